#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/detector.hpp"
#include "circlefilt/ekf.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/lattice_filter.hpp"
#include "circlefilt/moment_filter.hpp"
#include "circlefilt/rng.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::mc {

/// One Monte Carlo detection batch: paired H0/H1 trial sets for one
/// estimator at one operating point.
struct TrialBatchSpec {
    ScenarioConfig cfg;
    Estimator estimator = Estimator::EC;
    std::size_t n_trials_h0 = 500;
    std::size_t n_trials_h1 = 500;
    std::uint64_t base_seed = 0;

    void validate() const {
        cfg.validate();
        if (n_trials_h0 < 1) throw ConfigError("n_trials_h0 must be >= 1");
        if (n_trials_h1 < 1) throw ConfigError("n_trials_h1 must be >= 1");
    }
};

struct BatchResult {
    std::vector<double> h0_logliks;
    std::vector<double> h1_logliks;
};

struct RocRow {
    double threshold = 0.0;
    double pf = 0.0;
    double pd = 0.0;
    double pf_hw = 0.0;
    double pd_hw = 0.0;
};

struct RocTable {
    std::vector<RocRow> rows; ///< threshold descending; pf, pd non-decreasing
    double snr = 0.0;
};

struct TrackingRecord {
    std::size_t run = 0;
    Estimator estimator = Estimator::EC;
    double rmse = 0.0;
};

struct TrackingReport {
    std::vector<TrackingRecord> records;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
};

/// Deterministic per-trial seed. The estimator is deliberately absent so
/// EC and EKF trials with equal indices consume identical measurement paths.
inline std::uint64_t trial_seed(std::uint64_t base_seed, Hypothesis hyp, std::uint64_t trial) {
    const std::uint64_t tag = hyp == Hypothesis::H1 ? 0x517cc1b727220a95ULL
                                                    : 0x2545f4914f6cdd1dULL;
    return rng::mix64(rng::mix64(base_seed + rng::kGoldenGamma)
                      ^ rng::mix64(tag + trial * rng::kGoldenGamma));
}

/// Index-sharded worker pool. Each index writes only its own preallocated
/// slot, so results are identical for any worker count.
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)>& body) {
    if (workers == 0) {
        workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t wi = 0; wi < workers; ++wi) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                body(i);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

/// Simulate one trial and return its terminal log-likelihood ratio.
inline double run_trial(const ScenarioConfig& cfg, Estimator estimator, Hypothesis hyp,
                        std::uint64_t seed) {
    sim::MeasurementPath meas;
    if (hyp == Hypothesis::H1) {
        const sim::SignalPath path = sim::simulate_signal(cfg, seed);
        meas = sim::simulate_measurements(&path, cfg, Hypothesis::H1, seed);
    } else {
        meas = sim::simulate_measurements(nullptr, cfg, Hypothesis::H0, seed);
    }
    return detect::run_ec_detector(meas, cfg, estimator);
}

/// All trials of a batch through the worker pool. Per-trial failures are
/// collected and reported together with their replay seeds.
inline BatchResult run_batch(const TrialBatchSpec& spec, std::size_t workers = 0) {
    spec.validate();
    const std::size_t n0 = spec.n_trials_h0;
    const std::size_t n1 = spec.n_trials_h1;

    BatchResult out;
    out.h0_logliks.assign(n0, 0.0);
    out.h1_logliks.assign(n1, 0.0);
    std::vector<std::string> failures(n0 + n1);
    std::vector<std::uint64_t> failure_seeds(n0 + n1, 0);

    parallel_for(n0 + n1, workers, [&](std::size_t i) {
        const Hypothesis hyp = i < n0 ? Hypothesis::H0 : Hypothesis::H1;
        const std::uint64_t trial = i < n0 ? i : i - n0;
        const std::uint64_t seed = trial_seed(spec.base_seed, hyp, trial);
        try {
            const double ll = run_trial(spec.cfg, spec.estimator, hyp, seed);
            (hyp == Hypothesis::H0 ? out.h0_logliks[trial] : out.h1_logliks[trial]) = ll;
        } catch (const std::exception& e) {
            failures[i] = std::string(to_string(hyp)) + " trial " + std::to_string(trial)
                          + " (seed " + std::to_string(seed) + "): " + e.what();
            failure_seeds[i] = seed;
        }
    });

    std::string report;
    std::size_t n_failed = 0;
    std::uint64_t first_seed = 0;
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (failures[i].empty()) continue;
        if (n_failed == 0) first_seed = failure_seeds[i];
        if (n_failed < 5) {
            report += (n_failed ? "; " : "") + failures[i];
        }
        ++n_failed;
    }
    if (n_failed > 0) {
        throw NumericalError(std::to_string(n_failed) + " of " + std::to_string(n0 + n1)
                                 + " trials failed: " + report,
                             NumericalError::kNoStep, first_seed, true);
    }
    return out;
}

/// 95% Wilson-score half-width for k successes out of n.
inline double wilson_halfwidth(std::size_t k, std::size_t n) {
    constexpr double z = 1.959963984540054;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return z * std::sqrt(kd * (nd - kd) / nd + z * z / 4.0) / (nd + z * z);
}

/// Empirical ROC: thresholds at every distinct observed log-likelihood plus
/// +/- infinity sentinels; pf and pd are strict exceedance fractions, so the
/// table is monotone by construction as the threshold descends.
inline RocTable sweep_roc(const std::vector<double>& h0_logliks,
                          const std::vector<double>& h1_logliks) {
    if (h0_logliks.empty() || h1_logliks.empty()) {
        throw UsageError("ROC sweep requires non-empty loglik arrays for both hypotheses");
    }
    std::vector<double> thresholds;
    thresholds.reserve(h0_logliks.size() + h1_logliks.size() + 2);
    thresholds.push_back(std::numeric_limits<double>::infinity());
    thresholds.insert(thresholds.end(), h0_logliks.begin(), h0_logliks.end());
    thresholds.insert(thresholds.end(), h1_logliks.begin(), h1_logliks.end());
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    std::sort(thresholds.begin(), thresholds.end(),
              [](double a, double b) { return a > b; });
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<double> h0 = h0_logliks;
    std::vector<double> h1 = h1_logliks;
    std::sort(h0.begin(), h0.end());
    std::sort(h1.begin(), h1.end());

    const auto exceed_count = [](const std::vector<double>& v, double thr) {
        return static_cast<std::size_t>(v.end() - std::upper_bound(v.begin(), v.end(), thr));
    };

    RocTable table;
    table.rows.reserve(thresholds.size());
    for (double thr : thresholds) {
        RocRow row;
        row.threshold = thr;
        const std::size_t k0 = exceed_count(h0, thr);
        const std::size_t k1 = exceed_count(h1, thr);
        row.pf = static_cast<double>(k0) / static_cast<double>(h0.size());
        row.pd = static_cast<double>(k1) / static_cast<double>(h1.size());
        row.pf_hw = wilson_halfwidth(k0, h0.size());
        row.pd_hw = wilson_halfwidth(k1, h1.size());
        table.rows.push_back(row);
    }
    return table;
}

/// Largest detection probability available at false-alarm rates not
/// exceeding the target.
inline double pd_at_pf(const RocTable& table, double target_pf) {
    double best = 0.0;
    for (const RocRow& row : table.rows) {
        if (row.pf <= target_pf) best = std::max(best, row.pd);
    }
    return best;
}

/// Signal-tracking error of one estimator on H1 data: RMSE of the real part
/// of the signal estimate against cos(theta) over the final 80% of the path.
inline double tracking_rmse_single(const ScenarioConfig& cfg, Estimator estimator,
                                   std::uint64_t seed) {
    const sim::SignalPath path = sim::simulate_signal(cfg, seed);
    const sim::MeasurementPath meas = sim::simulate_measurements(&path, cfg, Hypothesis::H1, seed);

    std::vector<double> re_est(cfg.steps);
    if (estimator == Estimator::EKF) {
        ekf::EkfState s = ekf::ekf_init(cfg);
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            s = ekf::ekf_step(s, meas.dz[k], cfg, cfg.dt);
            re_est[k] = std::cos(s.phase());
        }
    } else if (cfg.scenario == Scenario::III) {
        const lattice::LatticeRun run = lattice::run_lattice_filter(meas, cfg);
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            re_est[k] = run.steps[k].x_post.h_hat();
        }
    } else {
        const moment::FilterRun run = moment::run_filter(meas, cfg);
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            re_est[k] = run.steps[k].x_post.h_hat();
        }
    }

    const std::size_t burn = cfg.steps / 5;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t k = burn; k < cfg.steps; ++k) {
        const double err = re_est[k] - std::cos(path.theta[k + 1]);
        sq += err * err;
        ++count;
    }
    return std::sqrt(sq / static_cast<double>(count));
}

/// Tracking RMSE across seeded runs; run indices map to seeds exactly as in
/// run_batch's H1 trials, so EC and EKF reports pair path-for-path.
inline TrackingReport tracking_rmse(const ScenarioConfig& cfg, Estimator estimator,
                                    std::size_t n_runs, std::uint64_t base_seed,
                                    std::size_t workers = 0) {
    cfg.validate();
    if (n_runs < 1) throw ConfigError("n_runs must be >= 1");

    TrackingReport report;
    report.records.assign(n_runs, TrackingRecord{});
    std::vector<std::string> failures(n_runs);

    parallel_for(n_runs, workers, [&](std::size_t i) {
        const std::uint64_t seed = trial_seed(base_seed, Hypothesis::H1, i);
        try {
            report.records[i] = TrackingRecord{i, estimator,
                                               tracking_rmse_single(cfg, estimator, seed)};
        } catch (const std::exception& e) {
            failures[i] = "run " + std::to_string(i) + " (seed " + std::to_string(seed)
                          + "): " + e.what();
        }
    });
    for (const std::string& f : failures) {
        if (!f.empty()) throw NumericalError("tracking run failed: " + f);
    }

    double mean = 0.0;
    for (const TrackingRecord& r : report.records) mean += r.rmse;
    mean /= static_cast<double>(n_runs);
    double var = 0.0;
    for (const TrackingRecord& r : report.records) {
        var += (r.rmse - mean) * (r.rmse - mean);
    }
    report.mean_rmse = mean;
    report.std_rmse = n_runs > 1 ? std::sqrt(var / static_cast<double>(n_runs - 1)) : 0.0;
    return report;
}

} // namespace circlefilt::mc
