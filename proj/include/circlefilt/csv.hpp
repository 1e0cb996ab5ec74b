#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/ekf.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/lattice_filter.hpp"
#include "circlefilt/mc_harness.hpp"
#include "circlefilt/moment_filter.hpp"
#include "circlefilt/particle_oracle.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::io {

/// 17 significant digits: round-trip exact for 64-bit doubles, byte-stable
/// for equal inputs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

using HeaderKv = std::vector<std::pair<std::string, std::string>>;

/// Key-value header comments in config-file syntax, so any output is
/// replayable from its own metadata.
inline void write_header(std::ostream& os, const HeaderKv& kv) {
    for (const auto& [key, value] : kv) {
        os << "# " << key << "=" << value << "\n";
    }
}

inline HeaderKv config_kv(const ScenarioConfig& cfg) {
    return {
        {"scenario", to_string(cfg.scenario)},
        {"q_theta", fmt_double(cfg.q_theta)},
        {"q_w", fmt_double(cfg.q_w)},
        {"w0", fmt_double(cfg.w0)},
        {"sigma0", fmt_double(cfg.sigma0)},
        {"dt", fmt_double(cfg.dt)},
        {"steps", std::to_string(cfg.steps)},
        {"n_harmonics", std::to_string(cfg.n_harmonics)},
        {"m_powers", std::to_string(cfg.m_powers)},
        {"seed", std::to_string(cfg.seed)},
    };
}

/// Synthetic path dump. Row k pairs the left-endpoint state that generated
/// increment dz_k with that increment.
inline void write_path_csv(std::ostream& os, const sim::SignalPath& path,
                           const sim::MeasurementPath& meas) {
    if (path.theta.size() != meas.dz.size() + 1) {
        throw UsageError("signal path and measurement path lengths disagree");
    }
    os << "k,t,theta,omega,dz\n";
    for (std::size_t k = 0; k < meas.dz.size(); ++k) {
        os << k << ',' << fmt_double(static_cast<double>(k) * meas.dt) << ','
           << fmt_double(path.theta[k]) << ',' << fmt_double(path.omega[k]) << ','
           << fmt_double(meas.dz[k]) << "\n";
    }
}

/// Moment-filter trace: post-update first moment, causal predicted
/// measurement, and the modulus watermark.
inline void write_moment_trace_csv(std::ostream& os, const moment::FilterRun& run) {
    os << "k,t,re_x1,im_x1,h_hat,max_mod\n";
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
        const moment::FilterStep& s = run.steps[k];
        os << k << ',' << fmt_double(s.x_post.t) << ','
           << fmt_double(s.x_post.x[1].real()) << ',' << fmt_double(s.x_post.x[1].imag()) << ','
           << fmt_double(s.h_hat) << ',' << fmt_double(s.x_post.max_modulus()) << "\n";
    }
}

/// Lattice trace: adds the frequency read-out w0 + E[nu].
inline void write_lattice_trace_csv(std::ostream& os, const lattice::LatticeRun& run,
                                    double w0) {
    os << "k,t,re_x01,im_x01,h_hat,freq_est,max_mod\n";
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
        const lattice::LatticeStep& s = run.steps[k];
        os << k << ',' << fmt_double(s.x_post.t) << ','
           << fmt_double(s.x_post.at(0, 1).real()) << ','
           << fmt_double(s.x_post.at(0, 1).imag()) << ','
           << fmt_double(s.h_hat) << ',' << fmt_double(s.x_post.freq_estimate(w0)) << ','
           << fmt_double(s.x_post.max_modulus()) << "\n";
    }
}

/// EKF trace in the moment-trace schema: re/im of e^{i theta_hat}, the causal
/// predicted measurement, and a constant unit modulus column.
inline void write_ekf_trace_csv(std::ostream& os, const sim::MeasurementPath& meas,
                                const ScenarioConfig& cfg) {
    os << "k,t,re_x1,im_x1,h_hat,max_mod\n";
    ekf::EkfState s = ekf::ekf_init(cfg);
    for (std::size_t k = 0; k < meas.dz.size(); ++k) {
        const ekf::EkfState pred = ekf::ekf_predict(s, cfg, cfg.dt);
        s = ekf::ekf_update(pred, meas.dz[k], cfg, cfg.dt);
        os << k << ',' << fmt_double(s.t) << ',' << fmt_double(std::cos(s.phase())) << ','
           << fmt_double(std::sin(s.phase())) << ',' << fmt_double(pred.h_hat()) << ",1\n";
    }
}

inline void write_roc_csv(std::ostream& os, const mc::RocTable& table) {
    os << "threshold,pf,pd,pf_hw,pd_hw\n";
    for (const mc::RocRow& row : table.rows) {
        os << fmt_double(row.threshold) << ',' << fmt_double(row.pf) << ','
           << fmt_double(row.pd) << ',' << fmt_double(row.pf_hw) << ','
           << fmt_double(row.pd_hw) << "\n";
    }
}

inline void write_tracking_csv(std::ostream& os, const mc::TrackingReport& report) {
    os << "run,estimator,rmse\n";
    for (const mc::TrackingRecord& r : report.records) {
        os << r.run << ',' << to_string(r.estimator) << ',' << fmt_double(r.rmse) << "\n";
    }
}

/// Per-trial detection records for one batch.
inline void write_trials_csv(std::ostream& os, const mc::BatchResult& batch,
                             Estimator estimator) {
    os << "trial_id,hypothesis,estimator,loglik\n";
    for (std::size_t i = 0; i < batch.h0_logliks.size(); ++i) {
        os << i << ",h0," << to_string(estimator) << ',' << fmt_double(batch.h0_logliks[i])
           << "\n";
    }
    for (std::size_t i = 0; i < batch.h1_logliks.size(); ++i) {
        os << i << ",h1," << to_string(estimator) << ',' << fmt_double(batch.h1_logliks[i])
           << "\n";
    }
}

/// Step-by-step discrepancy between the moment filter's first moment and the
/// particle oracle's estimate on the same measurement path.
inline void write_oracle_compare_csv(std::ostream& os,
                                     const std::vector<moment::cplx>& filter_x1,
                                     const std::vector<oracle::cplx>& oracle_x1,
                                     double dt) {
    if (filter_x1.size() != oracle_x1.size()) {
        throw UsageError("filter and oracle estimate sequences differ in length");
    }
    os << "k,t,re_filter,im_filter,re_oracle,im_oracle,abs_diff\n";
    for (std::size_t k = 0; k < filter_x1.size(); ++k) {
        os << k << ',' << fmt_double(static_cast<double>(k + 1) * dt) << ','
           << fmt_double(filter_x1[k].real()) << ',' << fmt_double(filter_x1[k].imag()) << ','
           << fmt_double(oracle_x1[k].real()) << ',' << fmt_double(oracle_x1[k].imag()) << ','
           << fmt_double(std::abs(filter_x1[k] - oracle_x1[k])) << "\n";
    }
}

} // namespace circlefilt::io
