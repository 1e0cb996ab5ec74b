#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::moment {

using cplx = std::complex<double>;

/// Truncated circular moments x[n] = E[e^{in Theta} | F_t], n = 0..N-1.
/// x[0] is exactly 1 at all times: the n = 0 generator drift vanishes and the
/// n = 0 innovation gain cancels identically.
struct MomentVector {
    std::vector<cplx> x;
    double t = 0.0;

    std::size_t size() const noexcept { return x.size(); }

    /// Predicted measurement E[cos Theta | F_t].
    double h_hat() const noexcept { return x[1].real(); }

    double max_modulus() const noexcept {
        double m = 0.0;
        for (const cplx& v : x) m = std::max(m, std::abs(v));
        return m;
    }

    bool finite() const noexcept {
        for (const cplx& v : x) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        }
        return true;
    }
};

/// One predict/update cycle: pre- and post-update states, the causal
/// predicted measurement, and the innovation gains.
struct FilterStep {
    MomentVector x_pred;
    MomentVector x_post;
    double h_hat = 0.0;
    std::vector<cplx> gain;
};

struct FilterOptions {
    double tol_mod = 1e-2;     ///< monitored |x_n| <= 1 + tol_mod
    bool clip_to_disk = false; ///< radially clip moments back to the unit disk
};

struct FilterRun {
    MomentVector initial;
    std::vector<FilterStep> steps;
    std::size_t mod_violations = 0; ///< steps where max |x_n| exceeded 1 + tol_mod

    const MomentVector& final_state() const noexcept {
        return steps.empty() ? initial : steps.back().x_post;
    }
};

/// Uniform initial phase: characteristic function [1, 0, ..., 0].
inline MomentVector init_moments(const ScenarioConfig& cfg) {
    cfg.validate();
    MomentVector m;
    m.x.assign(cfg.n_harmonics, cplx(0.0, 0.0));
    m.x[0] = cplx(1.0, 0.0);
    m.t = 0.0;
    return m;
}

/// Explicit Euler step of the generator: x'[n] = x[n] + (i n w0 - q n^2/2) x[n] dt.
/// Scenario III has a random drift and must use the lattice filter instead.
inline MomentVector predict(const MomentVector& x, const ScenarioConfig& cfg, double dt) {
    if (cfg.scenario == Scenario::III) {
        throw UsageError("moment filter prediction is limited to scenarios i/ii; "
                         "use the augmented lattice filter for scenario iii");
    }
    const double w = cfg.drift_rate();
    MomentVector out = x;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double nd = static_cast<double>(n);
        const cplx coef(-cfg.q_theta * nd * nd / 2.0, nd * w);
        out.x[n] = x.x[n] + coef * x.x[n] * dt;
    }
    out.t = x.t + dt;
    return out;
}

/// Innovation update at the predicted state:
///   h_hat   = Re x[1]
///   cross_n = (x[n+1] + x[n-1]) / 2,  x[-1] := conj(x[1]),  x[N] := 0
///   gain_n  = (cross_n - x[n] h_hat) / sigma0
///   x'[n]   = x[n] + gain_n (dz - h_hat dt)
inline FilterStep update(const MomentVector& x, double dz, const ScenarioConfig& cfg, double dt) {
    if (!std::isfinite(dz)) {
        throw DataError("non-finite measurement increment dz");
    }
    const std::size_t N = x.size();
    FilterStep step;
    step.x_pred = x;
    step.h_hat = x.h_hat();
    step.gain.resize(N);

    const double innovation = dz - step.h_hat * dt;
    step.x_post = x;
    step.x_post.t = x.t;
    for (std::size_t n = 0; n < N; ++n) {
        const cplx upper = n + 1 < N ? x.x[n + 1] : cplx(0.0, 0.0);
        const cplx lower = n == 0 ? std::conj(x.x[1]) : x.x[n - 1];
        const cplx cross = (upper + lower) / 2.0;
        step.gain[n] = (cross - x.x[n] * step.h_hat) / cfg.sigma0;
        step.x_post.x[n] = x.x[n] + step.gain[n] * innovation;
    }
    if (!step.x_post.finite()) {
        throw NumericalError("moment filter state became non-finite after update");
    }
    return step;
}

/// Full predict/update recursion over a measurement path, recording each step.
/// Moduli above 1 + tol_mod are counted (and optionally clipped), never fatal.
inline FilterRun run_filter(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                            MomentVector state, FilterOptions opts = {}) {
    if (meas.dt != cfg.dt) {
        throw UsageError("measurement path dt does not match config dt");
    }
    FilterRun run;
    run.initial = state;
    run.steps.reserve(meas.dz.size());
    for (std::size_t k = 0; k < meas.dz.size(); ++k) {
        MomentVector pred = predict(state, cfg, cfg.dt);
        FilterStep step;
        try {
            step = update(pred, meas.dz[k], cfg, cfg.dt);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at step " + std::to_string(k), k);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at step " + std::to_string(k));
        }
        if (step.x_post.max_modulus() > 1.0 + opts.tol_mod) {
            ++run.mod_violations;
            if (opts.clip_to_disk) {
                for (cplx& v : step.x_post.x) {
                    const double m = std::abs(v);
                    if (m > 1.0) v /= m;
                }
            }
        }
        state = step.x_post;
        run.steps.push_back(std::move(step));
    }
    return run;
}

inline FilterRun run_filter(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                            FilterOptions opts = {}) {
    return run_filter(meas, cfg, init_moments(cfg), opts);
}

} // namespace circlefilt::moment
