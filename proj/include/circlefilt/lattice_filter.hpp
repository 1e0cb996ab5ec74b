#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/moment_filter.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::lattice {

using moment::cplx;
using moment::FilterOptions;

/// Augmented moments x(m, n) = E[nu^m e^{in Theta} | F_t] on an M x N lattice,
/// with nu = w - w0 the centered frequency. Centering keeps E[nu] = 0 and makes
/// the zero closure at the top power m = M accurate. x(0,0) = 1 exactly; the
/// n = 0 column is real (nu is real-valued).
struct MomentLattice {
    std::size_t m_powers = 0;   ///< M
    std::size_t n_harmonics = 0; ///< N
    std::vector<cplx> x;        ///< row-major, x[m * N + n]
    double t = 0.0;

    cplx& at(std::size_t m, std::size_t n) noexcept { return x[m * n_harmonics + n]; }
    const cplx& at(std::size_t m, std::size_t n) const noexcept { return x[m * n_harmonics + n]; }

    /// Predicted measurement E[cos Theta | F_t] = Re x(0,1).
    double h_hat() const noexcept { return x[1].real(); }

    /// Frequency read-out w0 + E[nu | F_t].
    double freq_estimate(double w0) const noexcept { return w0 + at(1, 0).real(); }

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

struct LatticeStep {
    MomentLattice x_pred;
    MomentLattice x_post;
    double h_hat = 0.0;
    std::vector<cplx> gain; ///< same row-major layout as the lattice
};

struct LatticeRun {
    MomentLattice initial;
    std::vector<LatticeStep> steps;
    std::size_t mod_violations = 0;

    const MomentLattice& final_state() const noexcept {
        return steps.empty() ? initial : steps.back().x_post;
    }
};

/// Known initial frequency (nu_0 = 0) and uniform initial phase:
/// everything vanishes except x(0,0) = 1.
inline MomentLattice init_lattice(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.scenario != Scenario::III) {
        throw UsageError("the augmented lattice filter applies to scenario iii only");
    }
    MomentLattice l;
    l.m_powers = cfg.m_powers;
    l.n_harmonics = cfg.n_harmonics;
    l.x.assign(cfg.m_powers * cfg.n_harmonics, cplx(0.0, 0.0));
    l.x[0] = cplx(1.0, 0.0);
    l.t = 0.0;
    return l;
}

/// Explicit Euler step of the centered-lattice generator
///   L(m,n) = q_w m(m-1)/2 x(m-2,n) + (i n w0 - q_theta n^2/2) x(m,n) + i n x(m+1,n)
/// with zero closure above the top frequency power (x(M, n) := 0).
inline MomentLattice predict_lattice(const MomentLattice& x, const ScenarioConfig& cfg, double dt) {
    if (cfg.scenario != Scenario::III) {
        throw UsageError("lattice prediction requires a scenario iii config");
    }
    const std::size_t M = x.m_powers;
    const std::size_t N = x.n_harmonics;
    MomentLattice out = x;
    for (std::size_t m = 0; m < M; ++m) {
        const double md = static_cast<double>(m);
        for (std::size_t n = 0; n < N; ++n) {
            const double nd = static_cast<double>(n);
            const cplx coef(-cfg.q_theta * nd * nd / 2.0, nd * cfg.w0);
            cplx drift = coef * x.at(m, n);
            if (m + 1 < M) {
                drift += cplx(0.0, nd) * x.at(m + 1, n);
            }
            if (m >= 2) {
                drift += (cfg.q_w * md * (md - 1.0) / 2.0) * x.at(m - 2, n);
            }
            out.at(m, n) = x.at(m, n) + drift * dt;
        }
    }
    out.t = x.t + dt;
    return out;
}

/// Innovation update at the predicted lattice:
///   h_hat        = Re x(0,1)
///   cross(m,n)   = (x(m,n+1) + x(m,n-1)) / 2,
///                  x(m,-1) := conj(x(m,1)) (exact: nu is real), x(m,N) := 0
///   gain(m,n)    = (cross(m,n) - x(m,n) h_hat) / sigma0
inline LatticeStep update_lattice(const MomentLattice& x, double dz, const ScenarioConfig& cfg,
                                  double dt) {
    if (!std::isfinite(dz)) {
        throw DataError("non-finite measurement increment dz");
    }
    const std::size_t M = x.m_powers;
    const std::size_t N = x.n_harmonics;
    LatticeStep step;
    step.x_pred = x;
    step.h_hat = x.h_hat();
    step.gain.resize(M * N);

    const double innovation = dz - step.h_hat * dt;
    step.x_post = x;
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t n = 0; n < N; ++n) {
            const cplx upper = n + 1 < N ? x.at(m, n + 1) : cplx(0.0, 0.0);
            const cplx lower = n == 0 ? std::conj(x.at(m, 1)) : x.at(m, n - 1);
            const cplx cross = (upper + lower) / 2.0;
            const cplx g = (cross - x.at(m, n) * step.h_hat) / cfg.sigma0;
            step.gain[m * N + n] = g;
            step.x_post.at(m, n) = x.at(m, n) + g * innovation;
        }
    }
    if (!step.x_post.finite()) {
        throw NumericalError("lattice filter state became non-finite after update");
    }
    return step;
}

/// Full predict/update recursion over a measurement path (scenario III).
inline LatticeRun run_lattice_filter(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                                     MomentLattice state, FilterOptions opts = {}) {
    if (meas.dt != cfg.dt) {
        throw UsageError("measurement path dt does not match config dt");
    }
    LatticeRun run;
    run.initial = state;
    run.steps.reserve(meas.dz.size());
    for (std::size_t k = 0; k < meas.dz.size(); ++k) {
        MomentLattice pred = predict_lattice(state, cfg, cfg.dt);
        LatticeStep step;
        try {
            step = update_lattice(pred, meas.dz[k], cfg, cfg.dt);
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

inline LatticeRun run_lattice_filter(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                                     FilterOptions opts = {}) {
    return run_lattice_filter(meas, cfg, init_lattice(cfg), opts);
}

} // namespace circlefilt::lattice
