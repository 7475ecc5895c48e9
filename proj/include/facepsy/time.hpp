#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace facepsy {

using Millis = std::chrono::milliseconds;
using Instant = std::chrono::sys_time<Millis>;

inline std::int64_t to_epoch_ms(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_epoch_ms(std::int64_t ms) { return Instant{Millis{ms}}; }

class Clock {
public:
    virtual ~Clock() = default;
    virtual Instant now() const = 0;
};

class SystemClock final : public Clock {
public:
    Instant now() const override {
        return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
    }
};

/// Clock advanced explicitly; used by tests and offline simulation.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Instant start = from_epoch_ms(1'600'000'000'000)) : ms_(to_epoch_ms(start)) {}

    Instant now() const override { return from_epoch_ms(ms_.load()); }
    void advance(Millis d) { ms_ += d.count(); }
    void set(Instant t) { ms_ = to_epoch_ms(t); }

private:
    std::atomic<std::int64_t> ms_;
};

}  // namespace facepsy
