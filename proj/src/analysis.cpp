#include "facepsy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "facepsy/csv.hpp"
#include "facepsy/error.hpp"

namespace facepsy::analysis {

namespace {

using trial::ProcedureKind;

constexpr std::array kProcedures{ProcedureKind::YesNo, ProcedureKind::TwoAFC, ProcedureKind::ABX};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

struct Estimates {
    std::optional<double> d_prime;
    std::optional<double> criterion;
    std::optional<double> pc_max;
};

Estimates estimate(ProcedureKind procedure, const sdt::RatePair& rates) {
    Estimates out;
    try {
        switch (procedure) {
            case ProcedureKind::TwoAFC: out.d_prime = sdt::dprime_2afc(rates).d_prime; break;
            case ProcedureKind::ABX: out.d_prime = sdt::dprime_abx_differencing(rates).d_prime; break;
            case ProcedureKind::YesNo: out.d_prime = sdt::dprime_yesno(rates).d_prime; break;
        }
        out.criterion = sdt::criterion_c(rates);
        out.pc_max = sdt::pc_max_unbiased(rates);
    } catch (const DomainError&) {
        return {};
    }
    return out;
}

const catalog::StimulusRecord& lookup(const catalog::Manifest& manifest, const std::string& id) {
    const auto* r = manifest.find(id);
    if (!r) throw ValidationError("manifest mismatch: unknown stimulus id '" + id + "'");
    return *r;
}

json summary_json(const Summary& s) {
    return json{{"n", s.n}, {"mean", opt(s.mean)}, {"sd", opt(s.sd)}, {"min", opt(s.min)}, {"max", opt(s.max)}};
}

json proportion_json(const Proportion& p) {
    return json{{"n", p.n}, {"k", p.k}, {"value", opt(p.value)}, {"ci_low", opt(p.ci_low)},
                {"ci_high", opt(p.ci_high)}};
}

// Group label with an ordering key.
using Label = std::pair<int, std::string>;

std::optional<Label> label_for(GroupKey key, const ParticipantInput& p, const ScoredTrial& t) {
    switch (key) {
        case GroupKey::Experience:
            return Label{static_cast<int>(p.experience), study::to_string(p.experience)};
        case GroupKey::Confidence:
            if (!t.confidence) return std::nullopt;
            return Label{*t.confidence, std::to_string(*t.confidence)};
        case GroupKey::LatencyBin: {
            const auto b = t.latency_ms / 1000;
            if (b >= 10) return Label{10, ">=10s"};
            return Label{static_cast<int>(b), std::to_string(b) + "-" + std::to_string(b + 1) + "s"};
        }
        case GroupKey::ManipulationClass:
            if (!t.stimulus_class) return std::nullopt;
            return Label{static_cast<int>(t.stimulus_class->type) * 2 + static_cast<int>(t.stimulus_class->difficulty),
                         catalog::to_string(t.stimulus_class->type) + "/" +
                             catalog::to_string(t.stimulus_class->difficulty)};
    }
    return std::nullopt;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NotFoundError("cannot write " + path.string());
    out << content;
}

std::string proportion_cells(const std::optional<Proportion>& p) {
    if (!p) return ",,,,";
    return std::to_string(p->n) + "," + std::to_string(p->k) + "," + cell(p->value) + "," + cell(p->ci_low) + "," +
           cell(p->ci_high);
}

}  // namespace

std::string format_double(double v) { return csv::format_number(v); }

ParticipantInput score_session(const study::SessionState& session, const study::ParticipantProfile& profile,
                               const catalog::Manifest& manifest) {
    ParticipantInput p{profile.participant_id, session.record.session_id, profile.experience, profile.age_bracket,
                       profile.gender, {}};
    for (const auto& t : session.finished) {
        const auto& spec = t.spec;
        if (!t.record) throw StateError("finished trial without a record");
        lookup(manifest, spec.target_stimulus);
        for (const auto& r : spec.reference_stimuli) lookup(manifest, r);

        ScoredTrial s;
        s.trial_id = spec.trial_id;
        s.procedure = spec.procedure;
        s.choice = t.record->choice;
        s.outcome = trial::score_response(spec, *t.record);
        s.confidence = t.record->confidence;
        s.latency_ms = t.record->latency_ms;
        s.target_stimulus = spec.target_stimulus;

        std::optional<std::string> manipulated;
        switch (spec.procedure) {
            case ProcedureKind::TwoAFC:
                s.signal_row = spec.spatial_order == trial::SpatialOrder::SignalNoise;
                s.signal_response = s.choice == trial::Choice::A;
                manipulated = spec.target_stimulus;
                break;
            case ProcedureKind::ABX:
                s.signal_row = spec.target_manipulated;
                s.signal_response = s.choice == trial::Choice::Manipulated;
                manipulated = spec.target_manipulated ? spec.target_stimulus : spec.reference_stimuli.at(1);
                break;
            case ProcedureKind::YesNo:
                s.signal_row = spec.target_manipulated;
                s.signal_response = s.choice == trial::Choice::Yes;
                if (spec.target_manipulated) manipulated = spec.target_stimulus;
                break;
        }
        if (manipulated) {
            const auto& rec = lookup(manifest, *manipulated);
            if (rec.manipulation && rec.difficulty) {
                s.stimulus_class = catalog::StimulusClass{rec.manipulation->type, *rec.difficulty, rec.manipulation->method};
            }
            s.distance_score = rec.distance_score;
        }
        p.trials.push_back(std::move(s));
    }
    return p;
}

AnalysisInput build_input(const study::StudyState& state, const catalog::Manifest& manifest,
                          const study::ExclusionCriteria& criteria) {
    AnalysisInput input;
    input.exclusions = state.exclusions(criteria);
    for (const auto& [participant_id, session_id] : input.exclusions.included) {
        input.participants.push_back(
            score_session(*state.session(session_id), state.participant(participant_id)->profile, manifest));
    }
    return input;
}

json input_to_json(const AnalysisInput& input) {
    json participants = json::array();
    for (const auto& p : input.participants) {
        json trials = json::array();
        for (const auto& t : p.trials) {
            json cls = nullptr;
            if (t.stimulus_class) {
                cls = json{{"type", catalog::to_string(t.stimulus_class->type)},
                           {"difficulty", catalog::to_string(t.stimulus_class->difficulty)},
                           {"method", t.stimulus_class->method}};
            }
            trials.push_back(json{{"trial_id", t.trial_id},
                                  {"procedure", trial::to_string(t.procedure)},
                                  {"signal_row", t.signal_row},
                                  {"signal_response", t.signal_response},
                                  {"choice", trial::to_string(t.choice)},
                                  {"outcome", trial::to_string(t.outcome)},
                                  {"confidence", t.confidence ? json(*t.confidence) : json(nullptr)},
                                  {"latency_ms", t.latency_ms},
                                  {"target_stimulus", t.target_stimulus},
                                  {"stimulus_class", cls},
                                  {"distance_score", opt(t.distance_score)}});
        }
        participants.push_back(json{{"participant_id", p.participant_id},
                                    {"session_id", p.session_id},
                                    {"experience", study::to_string(p.experience)},
                                    {"age_bracket", p.age_bracket},
                                    {"gender", p.gender},
                                    {"trials", trials}});
    }
    return json{{"participants", participants}, {"exclusions", input.exclusions}};
}

ProcedureMeasures measure_procedure(ProcedureKind procedure, std::span<const ScoredTrial> trials) {
    ProcedureMeasures m;
    m.procedure = procedure;
    m.table.procedure = procedure;
    for (const auto& t : trials) {
        if (t.procedure != procedure) continue;
        ++m.trials;
        if (!t.responded()) {
            ++m.nondecisions;
            continue;
        }
        ++m.responses;
        if (t.outcome == trial::Outcome::Correct) ++m.correct;
        ++m.table.counts[t.signal_row ? 0 : 1][t.signal_response ? 0 : 1];
    }
    if (m.responses > 0) m.acc = static_cast<double>(m.correct) / m.responses;
    if (m.table.signal_trials() > 0 && m.table.noise_trials() > 0) {
        const auto raw = sdt::rates_from_table(m.table, sdt::Correction::None);
        m.hit = raw.hit;
        m.false_alarm = raw.false_alarm;
        const auto e = estimate(procedure, raw);
        m.d_prime = e.d_prime;
        m.criterion = e.criterion;
        m.pc_max = e.pc_max;

        const auto ll = sdt::rates_from_table(m.table, sdt::Correction::LogLinear);
        m.hit_loglinear = ll.hit;
        m.false_alarm_loglinear = ll.false_alarm;
        const auto el = estimate(procedure, ll);
        m.d_prime_loglinear = el.d_prime;
        m.criterion_loglinear = el.criterion;
        m.pc_max_loglinear = el.pc_max;
    }
    return m;
}

ParticipantMeasures measure_participant(const ParticipantInput& participant) {
    ParticipantMeasures out{participant.participant_id, participant.session_id, participant.experience, {}};
    for (auto p : kProcedures) {
        const bool present = std::any_of(participant.trials.begin(), participant.trials.end(),
                                         [&](const ScoredTrial& t) { return t.procedure == p; });
        if (present) out.by_procedure.emplace(p, measure_procedure(p, participant.trials));
    }
    return out;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    s.mean = mean;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Proportion proportion(std::size_t k, std::size_t n) {
    Proportion p{n, k, std::nullopt, std::nullopt, std::nullopt};
    if (n == 0) return p;
    static const double z = sdt::inverse_normal_cdf(0.975);
    const double v = static_cast<double>(k) / static_cast<double>(n);
    const double half = z * std::sqrt(v * (1.0 - v) / static_cast<double>(n));
    p.value = v;
    p.ci_low = std::max(0.0, v - half);
    p.ci_high = std::min(1.0, v + half);
    return p;
}

std::vector<GroupRow> group_by(const AnalysisInput& input, GroupKey key) {
    struct Acc {
        std::set<std::string> participants;
        std::size_t n = 0, k = 0;
        std::size_t signal_n = 0, misses = 0;
        std::size_t noise_n = 0, false_alarms = 0;
    };
    std::map<std::tuple<ProcedureKind, int, std::string>, Acc> cells;
    for (const auto& p : input.participants) {
        for (const auto& t : p.trials) {
            if (!t.responded()) continue;
            const auto label = label_for(key, p, t);
            if (!label) continue;
            auto& a = cells[{t.procedure, label->first, label->second}];
            a.participants.insert(p.participant_id);
            ++a.n;
            if (t.outcome == trial::Outcome::Correct) ++a.k;
            if (t.signal_row) {
                ++a.signal_n;
                if (!t.signal_response) ++a.misses;
            } else {
                ++a.noise_n;
                if (t.signal_response) ++a.false_alarms;
            }
        }
    }
    std::vector<GroupRow> rows;
    for (const auto& [k, a] : cells) {
        GroupRow r;
        r.procedure = std::get<0>(k);
        r.group = std::get<2>(k);
        r.participants = a.participants.size();
        r.acc = proportion(a.k, a.n);
        if (key == GroupKey::ManipulationClass) {
            r.fnr = proportion(a.misses, a.signal_n);
            r.fpr = proportion(a.false_alarms, a.noise_n);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

ThresholdSummary fit_thresholds(const AnalysisInput& input, const ThresholdOptions& options) {
    ThresholdSummary out;
    out.level = options.level;
    std::vector<std::pair<double, bool>> points;
    for (const auto& p : input.participants) {
        for (const auto& t : p.trials) {
            if (t.procedure == ProcedureKind::TwoAFC && t.responded() && t.distance_score) {
                points.emplace_back(*t.distance_score, t.outcome == trial::Outcome::Correct);
            }
        }
    }
    if (points.empty()) {
        out.error = "no responded 2AFC trials with distance scores";
        return out;
    }
    if (options.bins < 3) {
        out.error = "at least 3 bins are required";
        return out;
    }
    double lo = points.front().first, hi = lo;
    for (const auto& [d, c] : points) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const auto nb = static_cast<std::size_t>(options.bins);
    std::vector<double> sum_x(nb, 0.0);
    std::vector<std::int64_t> n(nb, 0), k(nb, 0);
    for (const auto& [d, c] : points) {
        std::size_t b = 0;
        if (hi > lo) b = std::min(nb - 1, static_cast<std::size_t>((d - lo) / (hi - lo) * static_cast<double>(nb)));
        sum_x[b] += d;
        ++n[b];
        if (c) ++k[b];
    }
    for (std::size_t b = 0; b < nb; ++b) {
        if (n[b] > 0) out.bins.push_back({sum_x[b] / static_cast<double>(n[b]), n[b], k[b]});
    }
    try {
        psychometric::FitOptions fo;
        fo.base = options.base;
        fo.fixed_gamma = 0.5;
        out.fit = psychometric::fit_mle(out.bins, fo);
        out.threshold = psychometric::threshold_at(out.fit->params, options.level);
    } catch (const UnidentifiableError& e) {
        out.error = e.what();
    } catch (const ValidationError& e) {
        out.error = e.what();
    } catch (const DomainError& e) {
        out.error = e.what();
    }
    return out;
}

AnalysisReport analyze(const AnalysisInput& input, const AnalysisOptions& options) {
    AnalysisReport r;
    r.correction = options.correction;
    r.exclusions = input.exclusions;
    for (const auto& p : input.participants) r.participants.push_back(measure_participant(p));

    using Getter = std::optional<double> (*)(const ProcedureMeasures&, sdt::Correction);
    const std::vector<std::pair<std::string, Getter>> measures = {
        {"acc", [](const ProcedureMeasures& m, sdt::Correction) { return m.acc; }},
        {"hit", [](const ProcedureMeasures& m, sdt::Correction) { return m.hit; }},
        {"false_alarm", [](const ProcedureMeasures& m, sdt::Correction) { return m.false_alarm; }},
        {"d_prime", [](const ProcedureMeasures& m, sdt::Correction c) { return m.d_prime_for(c); }},
        {"c", [](const ProcedureMeasures& m, sdt::Correction c) { return m.criterion_for(c); }},
        {"d_prime_uncorrected", [](const ProcedureMeasures& m, sdt::Correction) { return m.d_prime; }},
        {"d_prime_loglinear", [](const ProcedureMeasures& m, sdt::Correction) { return m.d_prime_loglinear; }},
        {"c_uncorrected", [](const ProcedureMeasures& m, sdt::Correction) { return m.criterion; }},
        {"c_loglinear", [](const ProcedureMeasures& m, sdt::Correction) { return m.criterion_loglinear; }},
        {"pc_max_uncorrected", [](const ProcedureMeasures& m, sdt::Correction) { return m.pc_max; }},
        {"pc_max_loglinear", [](const ProcedureMeasures& m, sdt::Correction) { return m.pc_max_loglinear; }},
    };
    for (auto proc : kProcedures) {
        const bool any = std::any_of(r.participants.begin(), r.participants.end(),
                                     [&](const ParticipantMeasures& p) { return p.by_procedure.contains(proc); });
        if (!any) continue;
        for (const auto& [name, get] : measures) {
            std::vector<double> values;
            for (const auto& p : r.participants) {
                auto it = p.by_procedure.find(proc);
                if (it == p.by_procedure.end()) continue;
                if (auto v = get(it->second, options.correction)) values.push_back(*v);
            }
            r.aggregates.push_back({proc, name, summarize(values)});
        }
    }
    for (auto key : {GroupKey::Experience, GroupKey::Confidence, GroupKey::LatencyBin, GroupKey::ManipulationClass}) {
        r.groups[key] = group_by(input, key);
    }
    if (options.fit) r.thresholds = fit_thresholds(input, options.thresholds);
    return r;
}

AnalysisReport analyze_log(std::span<const study::EventLogEntry> log, const catalog::Manifest& manifest,
                           const AnalysisOptions& options) {
    const auto state = study::StudyState::replay(log);
    return analyze(build_input(state, manifest, options.criteria), options);
}

json measures_to_json(const ProcedureMeasures& m) {
    return json{{"procedure", trial::to_string(m.procedure)},
                {"table", json::array({json::array({m.table.n11(), m.table.n12()}),
                                       json::array({m.table.n21(), m.table.n22()})})},
                {"trials", m.trials},
                {"responses", m.responses},
                {"correct", m.correct},
                {"nondecisions", m.nondecisions},
                {"acc", opt(m.acc)},
                {"hit", opt(m.hit)},
                {"false_alarm", opt(m.false_alarm)},
                {"d_prime_uncorrected", opt(m.d_prime)},
                {"c_uncorrected", opt(m.criterion)},
                {"pc_max_uncorrected", opt(m.pc_max)},
                {"hit_loglinear", opt(m.hit_loglinear)},
                {"false_alarm_loglinear", opt(m.false_alarm_loglinear)},
                {"d_prime_loglinear", opt(m.d_prime_loglinear)},
                {"c_loglinear", opt(m.criterion_loglinear)},
                {"pc_max_loglinear", opt(m.pc_max_loglinear)}};
}

json participant_to_json(const ParticipantMeasures& p, sdt::Correction correction) {
    json procs = json::object();
    for (const auto& [proc, m] : p.by_procedure) {
        json j = measures_to_json(m);
        j["d_prime"] = opt(m.d_prime_for(correction));
        j["c"] = opt(m.criterion_for(correction));
        procs[trial::to_string(proc)] = j;
    }
    return json{{"participant_id", p.participant_id},
                {"session_id", p.session_id},
                {"experience", study::to_string(p.experience)},
                {"procedures", procs}};
}

json report_to_json(const AnalysisReport& report) {
    json participants = json::array();
    for (const auto& p : report.participants) participants.push_back(participant_to_json(p, report.correction));
    json aggregates = json::array();
    for (const auto& a : report.aggregates) {
        aggregates.push_back(json{{"procedure", trial::to_string(a.procedure)},
                                  {"measure", a.measure},
                                  {"summary", summary_json(a.summary)}});
    }
    json groups = json::object();
    for (const auto& [key, rows] : report.groups) {
        json arr = json::array();
        for (const auto& r : rows) {
            json j{{"procedure", trial::to_string(r.procedure)},
                   {"group", r.group},
                   {"participants", r.participants},
                   {"acc", proportion_json(r.acc)}};
            if (r.fpr) j["fpr"] = proportion_json(*r.fpr);
            if (r.fnr) j["fnr"] = proportion_json(*r.fnr);
            arr.push_back(j);
        }
        groups[to_string(key)] = arr;
    }
    json thresholds = nullptr;
    if (report.thresholds) {
        const auto& t = *report.thresholds;
        json bins = json::array();
        for (const auto& b : t.bins) bins.push_back(json{{"x", b.x}, {"n_trials", b.n_trials}, {"n_correct", b.n_correct}});
        thresholds = json{{"level", t.level},
                          {"bins", bins},
                          {"params", t.fit ? json(t.fit->params) : json(nullptr)},
                          {"log_likelihood", t.fit ? json(t.fit->log_likelihood) : json(nullptr)},
                          {"threshold", opt(t.threshold)},
                          {"error", t.error.empty() ? json(nullptr) : json(t.error)}};
    }
    return json{{"correction", to_string(report.correction)},
                {"participants", participants},
                {"aggregates", aggregates},
                {"groups", groups},
                {"thresholds", thresholds},
                {"exclusions", report.exclusions}};
}

void write_report(const AnalysisReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::string s =
        "participant_id,session_id,experience,procedure,trials,responses,nondecisions,correct,acc,hit,false_alarm,"
        "d_prime,c,d_prime_uncorrected,c_uncorrected,d_prime_loglinear,c_loglinear,pc_max_uncorrected,"
        "pc_max_loglinear,n11,n12,n21,n22\n";
    for (const auto& p : report.participants) {
        for (const auto& [proc, m] : p.by_procedure) {
            s += csv::escape(p.participant_id) + "," + csv::escape(p.session_id) + "," +
                 study::to_string(p.experience) + "," + trial::to_string(proc) + "," + std::to_string(m.trials) + "," +
                 std::to_string(m.responses) + "," + std::to_string(m.nondecisions) + "," +
                 std::to_string(m.correct) + "," + cell(m.acc) + "," + cell(m.hit) + "," + cell(m.false_alarm) + "," +
                 cell(m.d_prime_for(report.correction)) + "," + cell(m.criterion_for(report.correction)) + "," +
                 cell(m.d_prime) + "," + cell(m.criterion) + "," + cell(m.d_prime_loglinear) + "," +
                 cell(m.criterion_loglinear) + "," + cell(m.pc_max) + "," + cell(m.pc_max_loglinear) + "," +
                 std::to_string(m.table.n11()) + "," + std::to_string(m.table.n12()) + "," +
                 std::to_string(m.table.n21()) + "," + std::to_string(m.table.n22()) + "\n";
        }
    }
    write_file(out_dir / "participants.csv", s);

    s = "procedure,measure,n,mean,sd,min,max\n";
    for (const auto& a : report.aggregates) {
        s += trial::to_string(a.procedure) + "," + a.measure + "," + std::to_string(a.summary.n) + "," +
             cell(a.summary.mean) + "," + cell(a.summary.sd) + "," + cell(a.summary.min) + "," + cell(a.summary.max) +
             "\n";
    }
    write_file(out_dir / "aggregates.csv", s);

    for (const auto& [key, rows] : report.groups) {
        s = "procedure,group,participants,acc_n,acc_k,acc,acc_ci_low,acc_ci_high";
        if (key == GroupKey::ManipulationClass) {
            s += ",fpr_n,fpr_k,fpr,fpr_ci_low,fpr_ci_high,fnr_n,fnr_k,fnr,fnr_ci_low,fnr_ci_high";
        }
        s += "\n";
        for (const auto& r : rows) {
            s += trial::to_string(r.procedure) + "," + csv::escape(r.group) + "," + std::to_string(r.participants) +
                 "," + proportion_cells(r.acc);
            if (key == GroupKey::ManipulationClass) s += "," + proportion_cells(r.fpr) + "," + proportion_cells(r.fnr);
            s += "\n";
        }
        write_file(out_dir / ("group_" + to_string(key) + ".csv"), s);
    }

    s = "participant_id,session_id,reason,detail\n";
    for (const auto& e : report.exclusions.exclusions) {
        s += csv::escape(e.participant_id) + "," + csv::escape(e.session_id) + "," + study::to_string(e.reason) + "," +
             csv::escape(e.detail) + "\n";
    }
    write_file(out_dir / "exclusions.csv", s);

    if (report.thresholds) {
        s = "x,n_trials,n_correct\n";
        for (const auto& b : report.thresholds->bins) {
            s += format_double(b.x) + "," + std::to_string(b.n_trials) + "," + std::to_string(b.n_correct) + "\n";
        }
        write_file(out_dir / "thresholds.csv", s);
    }

    write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
}

std::string to_string(GroupKey key) {
    switch (key) {
        case GroupKey::Experience: return "experience";
        case GroupKey::Confidence: return "confidence";
        case GroupKey::LatencyBin: return "latency";
        case GroupKey::ManipulationClass: return "manipulation_class";
    }
    return "?";
}

GroupKey group_key_from_string(const std::string& s) {
    for (auto k : {GroupKey::Experience, GroupKey::Confidence, GroupKey::LatencyBin, GroupKey::ManipulationClass}) {
        if (to_string(k) == s) return k;
    }
    throw ValidationError("unknown group key '" + s + "'");
}

sdt::Correction correction_from_string(const std::string& s) {
    if (s == "loglinear") return sdt::Correction::LogLinear;
    if (s == "none") return sdt::Correction::None;
    throw ValidationError("unknown correction '" + s + "' (expected loglinear or none)");
}

std::string to_string(sdt::Correction c) { return c == sdt::Correction::LogLinear ? "loglinear" : "none"; }

}  // namespace facepsy::analysis
