#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "facepsy/events.hpp"
#include "facepsy/serialization.hpp"
#include "fixtures.hpp"

using namespace facepsy;
namespace fs = std::filesystem;

namespace {

struct Run {
    int exit_code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(FACEPSY_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workdir {
    fs::path dir = fs::temp_directory_path() / "facepsy_cli_test";
    Workdir() {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

const std::string manifest = (testkit::fixture_dir() / "difficulty_classes.csv").string();

}  // namespace

TEST_CASE("cli: simulate a cohort, analyse it twice, identical output") {
    Workdir w;
    const auto sim = run("simulate cohort --manifest " + manifest + " --participants 15 --seed 4 --out " + (w / "log.jsonl"));
    REQUIRE(sim.exit_code == 0);
    const auto log = study::read_event_log(fs::path(w / "log.jsonl"));
    CHECK(!log.empty());

    const auto a = run("analyze --log " + (w / "log.jsonl") + " --manifest " + manifest + " --out " + (w / "a"));
    const auto b = run("analyze --log " + (w / "log.jsonl") + " --manifest " + manifest + " --out " + (w / "b"));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("included 15") != std::string::npos);
    int files = 0;
    for (const auto& e : fs::directory_iterator(w.dir / "a")) {
        ++files;
        CHECK(slurp(e.path()) == slurp(w.dir / "b" / e.path().filename()));
    }
    CHECK(files == 9);

    const auto report = json::parse(slurp(w.dir / "a" / "report.json"));
    CHECK(report.at("participants").size() == 15);
    const auto printed = run("analyze --json --no-fit --correction none --log " + (w / "log.jsonl") + " --manifest " + manifest);
    REQUIRE(printed.exit_code == 0);
    const auto j = json::parse(printed.out);
    CHECK(j.at("correction") == "none");
    CHECK(j.at("thresholds").is_null());

    const auto in1 = run("input --log " + (w / "log.jsonl") + " --manifest " + manifest);
    const auto in2 = run("input --log " + (w / "log.jsonl") + " --manifest " + manifest);
    REQUIRE(in1.exit_code == 0);
    CHECK(in1.out == in2.out);
    CHECK(json::parse(in1.out).at("participants").size() == 15);

    const auto ex = run("exclusions --log " + (w / "log.jsonl"));
    REQUIRE(ex.exit_code == 0);
    CHECK(json::parse(ex.out).at("included").size() == 15);
}

TEST_CASE("cli: simulate table and fit") {
    Workdir w;
    const auto table = run("simulate table --procedure abx --n 20000 --dprime 1.5 --seed 9");
    REQUIRE(table.exit_code == 0);
    const auto t = json::parse(table.out);
    CHECK(t.at("procedure") == "abx");
    CHECK(std::abs(t.at("d_prime_loglinear").get<double>() - 1.5) < 0.15);

    const auto bins = run("simulate bins --alpha 0.5 --beta 10 --lambda 0.02 --xs 0.2,0.3,0.4,0.5,0.6,0.7,0.8 --n 400 --seed 1");
    REQUIRE(bins.exit_code == 0);
    std::ofstream(w / "bins.csv") << bins.out;
    const auto fit = run("fit --bins " + (w / "bins.csv") + " --level 0.75");
    REQUIRE(fit.exit_code == 0);
    const auto f = json::parse(fit.out);
    CHECK(std::abs(f.at("params").at("alpha").get<double>() - 0.5) < 0.05);
    CHECK(f.contains("threshold"));
}

TEST_CASE("cli: exit codes") {
    Workdir w;
    CHECK(run("analyze --log " + (w / "missing.jsonl") + " --manifest " + manifest).exit_code == 2);
    std::ofstream(w / "bad.jsonl") << "{\"seq\": 1}\nnot json\n";
    CHECK(run("analyze --log " + (w / "bad.jsonl") + " --manifest " + manifest).exit_code == 2);
    std::ofstream(w / "flat.csv") << "x,n_trials,n_correct\n0.1,10,10\n0.5,10,10\n0.9,10,10\n";
    CHECK(run("fit --bins " + (w / "flat.csv") + " --level 0.75").exit_code == 3);
    CHECK(run("analyze --log x").exit_code == 1);
    CHECK(run("--help").exit_code == 0);
    CHECK(run("simulate table --procedure abx --lapse 0.9").exit_code == 2);
}
