// facepsy: study server and offline analysis.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid input (arguments,
// files, corrupt logs, unknown stimuli), 3 computation failure (unidentifiable
// fit, out-of-domain rates, insufficient stimulus material).

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "facepsy/analysis.hpp"
#include "facepsy/catalog.hpp"
#include "facepsy/cohort.hpp"
#include "facepsy/config.hpp"
#include "facepsy/error.hpp"
#include "facepsy/events.hpp"
#include "facepsy/http_api.hpp"
#include "facepsy/observer.hpp"
#include "facepsy/psychometric.hpp"
#include "facepsy/sdt.hpp"
#include "facepsy/service.hpp"

namespace fs = std::filesystem;
using namespace facepsy;

namespace {

constexpr int kExitUsage = 1;  // also unexpected failures
constexpr int kExitInput = 2;
constexpr int kExitComputation = 3;

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError("not a number: '" + item + "'");
        }
    }
    return out;
}

void print_summary(const analysis::AnalysisReport& report, std::ostream& out) {
    const auto& ex = report.exclusions;
    out << "registered " << ex.registered << ", completed " << ex.participants_with_completion << ", included "
        << ex.included.size() << "\n";
    for (const auto& [reason, n] : ex.counts()) out << "  excluded (" << study::to_string(reason) << "): " << n << "\n";
    out << "procedure  measure              n      mean        sd         min        max\n";
    for (const auto& a : report.aggregates) {
        auto cell = [](const std::optional<double>& v) {
            std::ostringstream s;
            if (v) {
                s << std::fixed << std::setprecision(4) << *v;
            } else {
                s << "-";
            }
            return s.str();
        };
        out << std::left << std::setw(11) << trial::to_string(a.procedure) << std::setw(21) << a.measure
            << std::setw(7) << a.summary.n << std::setw(11) << cell(a.summary.mean) << std::setw(11)
            << cell(a.summary.sd) << std::setw(11) << cell(a.summary.min) << cell(a.summary.max) << "\n";
    }
    if (report.thresholds) {
        const auto& t = *report.thresholds;
        if (t.threshold) {
            out << "threshold at " << t.level << ": " << *t.threshold << "\n";
        } else {
            out << "threshold fit: " << t.error << "\n";
        }
    }
}

std::atomic<httplib::Server*> g_server{nullptr};

void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facepsy: manipulated-face detection study server and analysis"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Analyse an exported event log");
    std::string log_path, manifest_path, correction = "loglinear", out_dir, base = "logistic";
    double level = 0.75;
    int bins = 8;
    bool no_fit = false, print_json = false;
    analyze->add_option("--log", log_path, "Event log (JSON lines)")->required();
    analyze->add_option("--manifest", manifest_path, "Stimulus manifest (CSV or JSON)")->required();
    analyze->add_option("--correction", correction, "loglinear or none")->check(CLI::IsMember({"loglinear", "none"}));
    analyze->add_option("--out", out_dir, "Directory for CSV tables and report.json");
    analyze->add_option("--level", level, "Proportion correct defining the threshold");
    analyze->add_option("--bins", bins, "Distance bins for the threshold fit");
    analyze->add_option("--base", base, "logistic, gaussian or weibull");
    analyze->add_flag("--no-fit", no_fit, "Skip the psychometric fit");
    analyze->add_flag("--json", print_json, "Print report.json to stdout");

    // input
    auto* input_cmd = app.add_subcommand("input", "Print the canonical analysis input of a log");
    input_cmd->add_option("--log", log_path)->required();
    input_cmd->add_option("--manifest", manifest_path)->required();

    // exclusions
    auto* excl = app.add_subcommand("exclusions", "Apply the exclusion criteria to a log");
    excl->add_option("--log", log_path)->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a psychometric function to binned data");
    std::string bins_path;
    std::optional<double> fixed_gamma = 0.5;
    bool free_gamma = false;
    fit->add_option("--bins", bins_path, "CSV with header x,n_trials,n_correct")->required();
    fit->add_option("--level", level, "Proportion correct defining the threshold")->required();
    fit->add_option("--base", base, "logistic, gaussian or weibull");
    fit->add_option("--gamma", fixed_gamma, "Fixed guess rate");
    fit->add_flag("--free-gamma", free_gamma, "Estimate the guess rate");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Synthetic observers");
    sim->require_subcommand(1);
    observer::ObserverModel model;
    std::int64_t n = 1000;
    std::string procedure = "2afc";
    auto add_model = [&](CLI::App* c) {
        c->add_option("--dprime", model.d_prime);
        c->add_option("--criterion", model.criterion);
        c->add_option("--lapse", model.lapse);
        c->add_option("--bias", model.position_bias, "2AFC probability of answering A regardless");
        c->add_option("--seed", model.seed);
    };
    auto* sim_table = sim->add_subcommand("table", "Simulate a stimulus-response table and estimate d'");
    add_model(sim_table);
    sim_table->add_option("--procedure", procedure)->check(CLI::IsMember({"2afc", "abx", "yes_no"}));
    sim_table->add_option("--n", n, "Trials");

    auto* sim_cohort = sim->add_subcommand("cohort", "Run a cohort through the study service");
    add_model(sim_cohort);
    int participants = 227;
    std::int64_t latency = 2500;
    std::string log_out;
    sim_cohort->add_option("--manifest", manifest_path)->required();
    sim_cohort->add_option("--participants", participants);
    sim_cohort->add_option("--latency-ms", latency, "Mean response latency");
    sim_cohort->add_option("--out", log_out, "Event log to write")->required();

    auto* sim_bins = sim->add_subcommand("bins", "Binomial draws from a psychometric function");
    psychometric::Params params{0.5, 10.0, 0.5, 0.02, psychometric::BaseFunction::Logistic};
    std::string xs = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8";
    sim_bins->add_option("--alpha", params.alpha);
    sim_bins->add_option("--beta", params.beta);
    sim_bins->add_option("--gamma", params.gamma);
    sim_bins->add_option("--lambda", params.lambda);
    sim_bins->add_option("--base", base);
    sim_bins->add_option("--xs", xs, "Comma-separated intensities");
    sim_bins->add_option("--n", n, "Trials per intensity");
    sim_bins->add_option("--seed", model.seed);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the study HTTP server");
    std::string config_path;
    serve->add_option("--config", config_path, "JSON config; FACEPSY_* environment variables override it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other parse failure is a usage error.
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (analyze->parsed()) {
            const auto manifest = catalog::load_manifest(manifest_path);
            const auto log = study::read_event_log(fs::path(log_path));
            analysis::AnalysisOptions opts;
            opts.correction = analysis::correction_from_string(correction);
            opts.fit = !no_fit;
            opts.thresholds.level = level;
            opts.thresholds.bins = bins;
            opts.thresholds.base = psychometric::base_from_string(base);
            const auto report = analysis::analyze_log(log, manifest, opts);
            if (!out_dir.empty()) analysis::write_report(report, out_dir);
            if (print_json) {
                std::cout << analysis::report_to_json(report).dump(2) << "\n";
            } else {
                print_summary(report, std::cout);
            }
        } else if (input_cmd->parsed()) {
            const auto manifest = catalog::load_manifest(manifest_path);
            const auto log = study::read_event_log(fs::path(log_path));
            const auto state = study::StudyState::replay(log);
            std::cout << analysis::input_to_json(analysis::build_input(state, manifest)).dump() << "\n";
        } else if (excl->parsed()) {
            const auto log = study::read_event_log(fs::path(log_path));
            std::cout << json(study::StudyState::replay(log).exclusions()).dump(2) << "\n";
        } else if (fit->parsed()) {
            std::ifstream in(bins_path);
            if (!in) throw NotFoundError("cannot open " + bins_path);
            const auto data = psychometric::read_bins_csv(in, bins_path);
            psychometric::FitOptions fo;
            fo.base = psychometric::base_from_string(base);
            fo.fixed_gamma = free_gamma ? std::nullopt : fixed_gamma;
            const auto result = psychometric::fit_mle(data, fo);
            json out{{"params", result.params},
                     {"log_likelihood", result.log_likelihood},
                     {"level", level},
                     {"threshold", psychometric::threshold_at(result.params, level)}};
            std::cout << out.dump(2) << "\n";
        } else if (sim_table->parsed()) {
            const auto p = trial::procedure_from_string(procedure);
            sdt::StimulusResponseTable t;
            if (p == trial::ProcedureKind::TwoAFC) t = observer::simulate_2afc(model, n);
            if (p == trial::ProcedureKind::ABX) t = observer::simulate_abx_differencing(model, n);
            if (p == trial::ProcedureKind::YesNo) t = observer::simulate_yesno(model, n);
            const auto rates = sdt::rates_from_table(t, sdt::Correction::LogLinear);
            double d = 0.0;
            if (p == trial::ProcedureKind::TwoAFC) d = sdt::dprime_2afc(rates).d_prime;
            if (p == trial::ProcedureKind::ABX) d = sdt::dprime_abx_differencing(rates).d_prime;
            if (p == trial::ProcedureKind::YesNo) d = sdt::dprime_yesno(rates).d_prime;
            json out{{"procedure", procedure},
                     {"table", json::array({json::array({t.n11(), t.n12()}), json::array({t.n21(), t.n22()})})},
                     {"proportion_correct", static_cast<double>(t.correct()) / static_cast<double>(t.total())},
                     {"hit_loglinear", rates.hit},
                     {"false_alarm_loglinear", rates.false_alarm},
                     {"d_prime_loglinear", d},
                     {"c_loglinear", sdt::criterion_c(rates)}};
            std::cout << out.dump(2) << "\n";
        } else if (sim_cohort->parsed()) {
            auto manifest = std::make_shared<const catalog::Manifest>(catalog::load_manifest(manifest_path));
            cohort::CohortOptions co;
            co.participants = participants;
            co.model = model;
            co.seed = model.seed;
            co.mean_latency_ms = latency;
            const auto result = cohort::simulate_cohort(manifest, co);
            std::ofstream out(log_out);
            if (!out) throw NotFoundError("cannot write " + log_out);
            study::write_event_log(out, result.log);
            std::cerr << "wrote " << result.log.size() << " events for " << participants << " participants to "
                      << log_out << "\n";
        } else if (sim_bins->parsed()) {
            params.base = psychometric::base_from_string(base);
            params.validate();
            const auto values = parse_list(xs);
            psychometric::write_bins_csv(std::cout, observer::simulate_psychometric_bins(params, values, n, model.seed));
        } else if (serve->parsed()) {
            const auto cfg = server::load_config(config_path.empty() ? std::nullopt
                                                                     : std::optional<fs::path>(config_path));
            if (cfg.manifest.empty()) throw ValidationError("no manifest configured (manifest or FACEPSY_MANIFEST)");
            auto manifest = std::make_shared<const catalog::Manifest>(catalog::load_manifest(cfg.manifest));
            study::EventLog log(cfg.event_log_path());
            SystemClock clock;
            study::LoggingMailer mailer(std::clog);
            study::StudyService service(manifest, cfg.study, clock, mailer, log);

            httplib::Server http;
            server::install_routes(http, service, cfg.admin_token);
            std::atomic<bool> running{true};
            std::thread sweeper([&] {
                while (running) {
                    std::this_thread::sleep_for(Millis{cfg.sweep_interval_ms});
                    try {
                        service.advance_all();
                    } catch (const std::exception& e) {
                        std::clog << "sweep failed: " << e.what() << std::endl;
                    }
                }
            });
            g_server = &http;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::clog << "listening on " << cfg.host << ":" << cfg.port << " (" << log.entries().size()
                      << " events replayed from " << cfg.event_log_path().string() << ")" << std::endl;
            const bool ok = http.listen(cfg.host, cfg.port);
            running = false;
            sweeper.join();
            g_server = nullptr;
            if (!ok) {
                std::cerr << "error: cannot listen on " << cfg.host << ":" << cfg.port << "\n";
                return kExitUsage;
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const CorruptLogError& e) {
        std::cerr << "error: corrupt log: " << e.what() << "\n";
        return kExitInput;
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const UnidentifiableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const InsufficientMaterialError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
