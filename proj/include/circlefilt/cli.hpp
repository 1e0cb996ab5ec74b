#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "circlefilt/config.hpp"
#include "circlefilt/csv.hpp"
#include "circlefilt/detector.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/experiment.hpp"
#include "circlefilt/mc_harness.hpp"
#include "circlefilt/particle_oracle.hpp"

namespace circlefilt::cli {

inline constexpr const char* kToolName = "circlefilt";
inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "scenario", "q_theta", "q_w", "w0", "w0_unit", "sigma0", "snr", "dt",
        "steps", "n_harmonics", "m_powers", "seed", "estimator", "hypothesis",
        "n_trials_h0", "n_trials_h1", "n_runs", "out_dir", "workers", "oracle",
        "oracle_np",
    };
    return keys;
}

inline std::string key_help(const std::string& key) {
    static const std::map<std::string, std::string> help = {
        {"scenario", "i, ii, or iii"},
        {"q_theta", "phase diffusion rate (rad^2/s)"},
        {"q_w", "frequency diffusion rate ((rad/s)^2/s), scenario iii"},
        {"w0", "carrier frequency, rad/s unless w0_unit=hz"},
        {"w0_unit", "rad or hz"},
        {"sigma0", "measurement noise variance rate"},
        {"snr", "sets sigma0 = dt/snr^2; roc accepts a comma list"},
        {"dt", "sampling interval (s)"},
        {"steps", "measurement count"},
        {"n_harmonics", "tracked harmonics N"},
        {"m_powers", "tracked frequency powers M, scenario iii"},
        {"seed", "base RNG seed"},
        {"estimator", "ec or ekf"},
        {"hypothesis", "h0 or h1"},
        {"n_trials_h0", "H0 trials per operating point"},
        {"n_trials_h1", "H1 trials per operating point"},
        {"n_runs", "tracking runs"},
        {"out_dir", "output directory"},
        {"workers", "worker threads, 0 = all cores"},
        {"oracle", "run the particle oracle alongside the filter"},
        {"oracle_np", "oracle particle count"},
    };
    const auto it = help.find(key);
    return it == help.end() ? std::string() : it->second;
}

struct SubcommandArgs {
    CLI::App* app = nullptr;
    std::string config_path;
    CLI::Option* config_opt = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    exp::ExperimentConfig parse_experiment() const {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const std::string& key : config_keys()) {
            const auto it = options.find(key);
            if (it != options.end() && it->second->count() > 0) {
                overrides.emplace_back(key, values.at(key));
            }
        }
        const bool has_file = config_opt->count() > 0;
        return exp::parse_config(has_file ? &config_path : nullptr, overrides);
    }
};

inline SubcommandArgs* add_subcommand(CLI::App& app, const std::string& name,
                                      const std::string& description,
                                      std::vector<std::unique_ptr<SubcommandArgs>>& store) {
    store.push_back(std::make_unique<SubcommandArgs>());
    SubcommandArgs* sub = store.back().get();
    sub->app = app.add_subcommand(name, description);
    sub->config_opt = sub->app->add_option("--config", sub->config_path,
                                           "flat key=value config file");
    for (const std::string& key : config_keys()) {
        std::string names = "--" + key;
        if (key == "oracle_np" && name == "oracle-compare") names += ",--np";
        sub->options[key] = sub->app->add_option(names, sub->values[key], key_help(key));
    }
    return sub;
}

inline std::ofstream open_output(const std::string& dir, const std::string& name,
                                 std::string* full_path = nullptr) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open output file '" + path + "'");
    }
    if (full_path != nullptr) *full_path = path;
    return out;
}

/// Complete resolved experiment state as header comments; every output file
/// carries this plus the command that produced it.
inline io::HeaderKv experiment_kv(const exp::ExperimentConfig& ec, const std::string& command) {
    io::HeaderKv kv = {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"command", command},
    };
    const io::HeaderKv cfg_kv = io::config_kv(ec.cfg);
    kv.insert(kv.end(), cfg_kv.begin(), cfg_kv.end());
    kv.emplace_back("estimator", to_string(ec.estimator));
    kv.emplace_back("hypothesis", to_string(ec.hypothesis));
    kv.emplace_back("n_trials_h0", std::to_string(ec.n_trials_h0));
    kv.emplace_back("n_trials_h1", std::to_string(ec.n_trials_h1));
    kv.emplace_back("n_runs", std::to_string(ec.n_runs));
    kv.emplace_back("workers", std::to_string(ec.workers));
    kv.emplace_back("oracle", ec.oracle_enabled ? "true" : "false");
    kv.emplace_back("oracle_np", std::to_string(ec.oracle_np));
    return kv;
}

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
}

inline sim::MeasurementPath simulate_pair(const exp::ExperimentConfig& ec,
                                          sim::SignalPath* path_out) {
    const sim::SignalPath path = sim::simulate_signal(ec.cfg);
    sim::MeasurementPath meas =
        ec.hypothesis == Hypothesis::H1
            ? sim::simulate_measurements(&path, ec.cfg, Hypothesis::H1)
            : sim::simulate_measurements(nullptr, ec.cfg, Hypothesis::H0);
    if (path_out != nullptr) *path_out = path;
    return meas;
}

inline std::vector<moment::cplx> ec_estimates(const sim::MeasurementPath& meas,
                                              const ScenarioConfig& cfg) {
    std::vector<moment::cplx> est;
    est.reserve(meas.dz.size());
    if (cfg.scenario == Scenario::III) {
        const lattice::LatticeRun run = lattice::run_lattice_filter(meas, cfg);
        for (const lattice::LatticeStep& s : run.steps) est.push_back(s.x_post.at(0, 1));
    } else {
        const moment::FilterRun run = moment::run_filter(meas, cfg);
        for (const moment::FilterStep& s : run.steps) est.push_back(s.x_post.x[1]);
    }
    return est;
}

inline int cmd_simulate(const exp::ExperimentConfig& ec) {
    sim::SignalPath path;
    const sim::MeasurementPath meas = simulate_pair(ec, &path);
    std::string full;
    std::ofstream out = open_output(ec.out_dir, "path.csv", &full);
    io::write_header(out, experiment_kv(ec, "simulate"));
    io::write_path_csv(out, path, meas);
    if (!out.good()) throw IoError("failed writing '" + full + "'");
    std::cout << full << "\n";
    return 0;
}

inline int cmd_filter(const exp::ExperimentConfig& ec) {
    sim::SignalPath path;
    const sim::MeasurementPath meas = simulate_pair(ec, &path);
    std::string full;

    if (ec.estimator == Estimator::EKF) {
        std::ofstream out = open_output(ec.out_dir, "ekf_trace.csv", &full);
        io::write_header(out, experiment_kv(ec, "filter"));
        io::write_ekf_trace_csv(out, meas, ec.cfg);
        if (!out.good()) throw IoError("failed writing '" + full + "'");
        std::cout << full << "\n";
        return 0;
    }

    std::size_t mod_violations = 0;
    if (ec.cfg.scenario == Scenario::III) {
        const lattice::LatticeRun run = lattice::run_lattice_filter(meas, ec.cfg);
        mod_violations = run.mod_violations;
        std::ofstream out = open_output(ec.out_dir, "lattice_trace.csv", &full);
        io::write_header(out, experiment_kv(ec, "filter"));
        io::write_lattice_trace_csv(out, run, ec.cfg.w0);
        if (!out.good()) throw IoError("failed writing '" + full + "'");
    } else {
        const moment::FilterRun run = moment::run_filter(meas, ec.cfg);
        mod_violations = run.mod_violations;
        std::ofstream out = open_output(ec.out_dir, "moment_trace.csv", &full);
        io::write_header(out, experiment_kv(ec, "filter"));
        io::write_moment_trace_csv(out, run);
        if (!out.good()) throw IoError("failed writing '" + full + "'");
    }
    if (mod_violations > 0) {
        std::cerr << "note: moment modulus exceeded 1+tol on " << mod_violations
                  << " steps (monitored, not fatal)\n";
    }
    std::cout << full << "\n";

    if (ec.oracle_enabled) {
        const std::vector<moment::cplx> est = ec_estimates(meas, ec.cfg);
        const std::vector<oracle::cplx> pf =
            oracle::pf_run(meas, ec.cfg, ec.oracle_np, ec.cfg.seed);
        std::string oc_full;
        std::ofstream out = open_output(ec.out_dir, "oracle_compare.csv", &oc_full);
        io::write_header(out, experiment_kv(ec, "filter"));
        io::write_oracle_compare_csv(out, est, pf, ec.cfg.dt);
        if (!out.good()) throw IoError("failed writing '" + oc_full + "'");
        std::cout << oc_full << "\n";
    }
    return 0;
}

inline int cmd_detect(const exp::ExperimentConfig& ec) {
    const sim::MeasurementPath meas = simulate_pair(ec, nullptr);
    const double loglik = detect::run_ec_detector(meas, ec.cfg, ec.estimator);
    std::cout << io::fmt_double(loglik) << "\n";
    return 0;
}

inline int cmd_roc(const exp::ExperimentConfig& ec) {
    std::vector<double> snrs = ec.snr_list;
    if (snrs.empty()) snrs.push_back(ec.cfg.snr());

    nlohmann::json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["command"] = "roc";
    manifest["base_seed"] = ec.cfg.seed;
    for (const auto& [key, value] : experiment_kv(ec, "roc")) {
        manifest["config"][key] = value;
    }
    manifest["outputs"] = nlohmann::json::array();

    for (double snr : snrs) {
        exp::ExperimentConfig batch_ec = ec;
        batch_ec.cfg.sigma0 = ec.cfg.dt / (snr * snr);
        batch_ec.snr_list = {snr};

        mc::TrialBatchSpec spec;
        spec.cfg = batch_ec.cfg;
        spec.estimator = ec.estimator;
        spec.n_trials_h0 = ec.n_trials_h0;
        spec.n_trials_h1 = ec.n_trials_h1;
        spec.base_seed = ec.cfg.seed;

        const mc::BatchResult batch = mc::run_batch(spec, ec.workers);
        mc::RocTable table = mc::sweep_roc(batch.h0_logliks, batch.h1_logliks);
        table.snr = snr;

        const std::string tag = to_string(ec.estimator) + "_snr" + short_number(snr);
        std::string roc_full;
        {
            std::ofstream out = open_output(ec.out_dir, "roc_" + tag + ".csv", &roc_full);
            io::write_header(out, experiment_kv(batch_ec, "roc"));
            io::write_roc_csv(out, table);
            if (!out.good()) throw IoError("failed writing '" + roc_full + "'");
        }
        std::string trials_full;
        {
            std::ofstream out = open_output(ec.out_dir, "trials_" + tag + ".csv", &trials_full);
            io::write_header(out, experiment_kv(batch_ec, "roc"));
            io::write_trials_csv(out, batch, ec.estimator);
            if (!out.good()) throw IoError("failed writing '" + trials_full + "'");
        }

        nlohmann::json entry;
        entry["snr"] = snr;
        entry["sigma0"] = batch_ec.cfg.sigma0;
        entry["estimator"] = to_string(ec.estimator);
        entry["roc_csv"] = roc_full;
        entry["trials_csv"] = trials_full;
        entry["pd_at_pf_1e-2"] = mc::pd_at_pf(table, 1e-2);
        manifest["outputs"].push_back(entry);

        std::cout << roc_full << "\n" << trials_full << "\n";
    }

    std::string man_full;
    std::ofstream out = open_output(ec.out_dir, "roc_manifest.json", &man_full);
    out << manifest.dump(2) << "\n";
    if (!out.good()) throw IoError("failed writing '" + man_full + "'");
    std::cout << man_full << "\n";
    return 0;
}

inline int cmd_track(const exp::ExperimentConfig& ec) {
    const mc::TrackingReport report =
        mc::tracking_rmse(ec.cfg, ec.estimator, ec.n_runs, ec.cfg.seed, ec.workers);
    std::string full;
    std::ofstream out = open_output(ec.out_dir, "tracking_" + to_string(ec.estimator) + ".csv",
                                    &full);
    io::write_header(out, experiment_kv(ec, "track"));
    io::write_tracking_csv(out, report);
    if (!out.good()) throw IoError("failed writing '" + full + "'");
    std::cout << full << "\n"
              << "mean_rmse=" << io::fmt_double(report.mean_rmse)
              << " std_rmse=" << io::fmt_double(report.std_rmse) << "\n";
    return 0;
}

inline int cmd_oracle_compare(const exp::ExperimentConfig& ec) {
    const sim::MeasurementPath meas = simulate_pair(ec, nullptr);
    const std::vector<moment::cplx> est = ec_estimates(meas, ec.cfg);
    const std::vector<oracle::cplx> pf = oracle::pf_run(meas, ec.cfg, ec.oracle_np, ec.cfg.seed);

    std::string full;
    std::ofstream out = open_output(ec.out_dir, "oracle_compare.csv", &full);
    io::write_header(out, experiment_kv(ec, "oracle-compare"));
    io::write_oracle_compare_csv(out, est, pf, ec.cfg.dt);
    if (!out.good()) throw IoError("failed writing '" + full + "'");

    const std::size_t burn = est.size() / 5;
    double acc = 0.0;
    for (std::size_t k = burn; k < est.size(); ++k) acc += std::abs(est[k] - pf[k]);
    const double avg = est.size() > burn ? acc / static_cast<double>(est.size() - burn) : 0.0;
    std::cout << full << "\n"
              << "mean_abs_diff=" << io::fmt_double(avg) << "\n";
    return 0;
}

} // namespace detail

/// Entry point behind main(). Exit codes: 0 success, 2 config/usage error,
/// 3 numerical failure (replay seed on stderr), 4 I/O error.
inline int run(int argc, char** argv) {
    CLI::App app{"filtering and detection for circle-valued random signals"};
    app.require_subcommand(1);

    std::vector<std::unique_ptr<detail::SubcommandArgs>> store;
    detail::SubcommandArgs* sim_args =
        detail::add_subcommand(app, "simulate", "emit a synthetic path and measurements", store);
    detail::SubcommandArgs* filt_args =
        detail::add_subcommand(app, "filter", "run one estimator over one path", store);
    detail::SubcommandArgs* det_args =
        detail::add_subcommand(app, "detect", "print the terminal log-likelihood ratio", store);
    detail::SubcommandArgs* roc_args =
        detail::add_subcommand(app, "roc", "Monte Carlo ROC tables over an SNR list", store);
    detail::SubcommandArgs* track_args =
        detail::add_subcommand(app, "track", "tracking RMSE report across seeded runs", store);
    detail::SubcommandArgs* oc_args = detail::add_subcommand(
        app, "oracle-compare", "moment filter vs particle oracle discrepancy", store);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::optional<std::uint64_t> replay_seed;
    try {
        const auto dispatch = [&](detail::SubcommandArgs* args,
                                  int (*fn)(const exp::ExperimentConfig&)) -> std::optional<int> {
            if (!args->app->parsed()) return std::nullopt;
            const exp::ExperimentConfig ec = args->parse_experiment();
            if (fn != detail::cmd_roc && ec.snr_list.size() > 1) {
                throw ConfigError("only the roc subcommand accepts an snr list");
            }
            replay_seed = ec.cfg.seed;
            return fn(ec);
        };
        if (auto r = dispatch(sim_args, detail::cmd_simulate)) return *r;
        if (auto r = dispatch(filt_args, detail::cmd_filter)) return *r;
        if (auto r = dispatch(det_args, detail::cmd_detect)) return *r;
        if (auto r = dispatch(roc_args, detail::cmd_roc)) return *r;
        if (auto r = dispatch(track_args, detail::cmd_track)) return *r;
        if (auto r = dispatch(oc_args, detail::cmd_oracle_compare)) return *r;
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        if (e.has_seed()) {
            std::cerr << "replay seed: " << e.seed() << "\n";
        } else if (replay_seed) {
            std::cerr << "replay seed: " << *replay_seed << "\n";
        }
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace circlefilt::cli
