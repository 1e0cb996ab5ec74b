#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "circlefilt/config.hpp"
#include "circlefilt/ekf.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/lattice_filter.hpp"
#include "circlefilt/moment_filter.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::detect {

/// Running discretized log-likelihood ratio
///   log L += h_hat dz - (1/2) h_hat^2 dt
/// accumulated from causal predicted measurements only.
struct LogLikAccumulator {
    double loglik = 0.0;
    std::size_t steps_seen = 0;
};

inline LogLikAccumulator loglik_step(LogLikAccumulator acc, double h_hat, double dz, double dt) {
    if (!std::isfinite(h_hat) || !std::isfinite(dz)) {
        throw DataError("non-finite input to log-likelihood accumulator");
    }
    acc.loglik += h_hat * dz - 0.5 * h_hat * h_hat * dt;
    ++acc.steps_seen;
    return acc;
}

/// Threshold rule: H1 iff loglik > threshold; ties go to H0.
inline Hypothesis decide(double loglik, double threshold) noexcept {
    return loglik > threshold ? Hypothesis::H1 : Hypothesis::H0;
}

/// Full estimator-correlator pass over a measurement path. Per step the
/// chosen estimator is advanced through its time update, the predicted
/// measurement feeds the accumulator, and only then does the estimator
/// see dz. Returns the terminal log-likelihood ratio.
inline double run_ec_detector(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                              Estimator estimator) {
    cfg.validate();
    if (meas.dt != cfg.dt) {
        throw UsageError("measurement path dt does not match config dt");
    }
    LogLikAccumulator acc;
    const double dt = cfg.dt;

    if (estimator == Estimator::EKF) {
        ekf::EkfState s = ekf::ekf_init(cfg);
        for (std::size_t k = 0; k < meas.dz.size(); ++k) {
            const ekf::EkfState pred = ekf::ekf_predict(s, cfg, dt);
            acc = loglik_step(acc, pred.h_hat(), meas.dz[k], dt);
            try {
                s = ekf::ekf_update(pred, meas.dz[k], cfg, dt);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at step " + std::to_string(k), k);
            } catch (const DataError& e) {
                throw DataError(std::string(e.what()) + " at step " + std::to_string(k));
            }
        }
    } else if (cfg.scenario == Scenario::III) {
        lattice::MomentLattice s = lattice::init_lattice(cfg);
        for (std::size_t k = 0; k < meas.dz.size(); ++k) {
            const lattice::MomentLattice pred = lattice::predict_lattice(s, cfg, dt);
            acc = loglik_step(acc, pred.h_hat(), meas.dz[k], dt);
            try {
                s = lattice::update_lattice(pred, meas.dz[k], cfg, dt).x_post;
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at step " + std::to_string(k), k);
            } catch (const DataError& e) {
                throw DataError(std::string(e.what()) + " at step " + std::to_string(k));
            }
        }
    } else {
        moment::MomentVector s = moment::init_moments(cfg);
        for (std::size_t k = 0; k < meas.dz.size(); ++k) {
            const moment::MomentVector pred = moment::predict(s, cfg, dt);
            acc = loglik_step(acc, pred.h_hat(), meas.dz[k], dt);
            try {
                s = moment::update(pred, meas.dz[k], cfg, dt).x_post;
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at step " + std::to_string(k), k);
            } catch (const DataError& e) {
                throw DataError(std::string(e.what()) + " at step " + std::to_string(k));
            }
        }
    }
    if (!std::isfinite(acc.loglik)) {
        throw NumericalError("log-likelihood ratio became non-finite");
    }
    return acc.loglik;
}

} // namespace circlefilt::detect
