#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"

namespace circlefilt::ekf {

/// Extended Kalman filter state over [theta] (scenarios I/II) or
/// [theta, w] (scenario III). Covariance is stored as (p00, p01, p11);
/// symmetry holds by construction.
struct EkfState {
    std::size_t dim = 1;
    std::array<double, 2> mean{0.0, 0.0};
    double p00 = 0.0;
    double p01 = 0.0;
    double p11 = 0.0;
    double t = 0.0;

    double phase() const noexcept { return mean[0]; }
    double freq() const noexcept { return mean[1]; }

    /// Predicted measurement E[cos Theta] under the linearized model.
    double h_hat() const noexcept { return std::cos(mean[0]); }
};

inline void check_psd(const EkfState& s) {
    if (!(s.p00 >= 0.0) || (s.dim == 2 && !(s.p11 >= 0.0))) {
        throw NumericalError("EKF covariance lost non-negative diagonal");
    }
    if (s.dim == 2) {
        const double det = s.p00 * s.p11 - s.p01 * s.p01;
        const double scale = std::max(1.0, s.p00 * s.p11);
        if (det < -1e-12 * scale) {
            throw NumericalError("EKF covariance lost positive semidefiniteness");
        }
    }
}

/// Gaussian surrogate for the uniform phase prior: theta = 0 with variance
/// pi^2/3 (the variance of U(-pi, pi)). Scenario III augments the state with
/// the known initial frequency at zero variance. Scenario I runs as II with
/// zero drift.
inline EkfState ekf_init(const ScenarioConfig& cfg) {
    cfg.validate();
    EkfState s;
    s.dim = cfg.scenario == Scenario::III ? 2 : 1;
    s.mean = {0.0, cfg.scenario == Scenario::III ? cfg.w0 : 0.0};
    s.p00 = std::numbers::pi * std::numbers::pi / 3.0;
    s.p01 = 0.0;
    s.p11 = 0.0;
    s.t = 0.0;
    return s;
}

inline double wrap_pi(double theta) noexcept {
    double w = std::fmod(theta + std::numbers::pi, 2.0 * std::numbers::pi);
    if (w < 0.0) w += 2.0 * std::numbers::pi;
    return w - std::numbers::pi;
}

/// Time update: mean through the drift, cov <- F cov F^T + Q dt with
/// F = [[1]] or [[1, dt], [0, 1]] and Q = diag(q_theta) or diag(q_theta, q_w).
inline EkfState ekf_predict(const EkfState& s, const ScenarioConfig& cfg, double dt) {
    EkfState n = s;
    if (s.dim == 1) {
        n.mean[0] = s.mean[0] + cfg.drift_rate() * dt;
        n.p00 = s.p00 + cfg.q_theta * dt;
    } else {
        n.mean[0] = s.mean[0] + s.mean[1] * dt;
        n.p00 = s.p00 + dt * (s.p01 + s.p01) + dt * dt * s.p11 + cfg.q_theta * dt;
        n.p01 = s.p01 + dt * s.p11;
        n.p11 = s.p11 + cfg.q_w * dt;
    }
    return n;
}

/// Measurement update with the increment pseudo-measurement y = dz/dt,
/// R = sigma0/dt, observation model y ~ cos(theta), H = [-sin(theta), 0].
/// Wraps the phase to [-pi, pi) after the mean update; covariance untouched.
inline EkfState ekf_update(const EkfState& s, double dz, const ScenarioConfig& cfg, double dt) {
    if (!std::isfinite(dz)) {
        throw DataError("non-finite measurement increment dz");
    }
    EkfState n = s;
    const double y = dz / dt;
    const double r = cfg.sigma0 / dt;
    const double h = -std::sin(s.mean[0]);
    const double innov = y - std::cos(s.mean[0]);
    const double denom = h * s.p00 * h + r;
    const double k0 = s.p00 * h / denom;
    const double k1 = s.dim == 2 ? s.p01 * h / denom : 0.0;

    n.mean[0] = wrap_pi(s.mean[0] + k0 * innov);
    if (s.dim == 2) n.mean[1] = s.mean[1] + k1 * innov;

    const double a = 1.0 - k0 * h;
    n.p00 = a * s.p00;
    n.p01 = a * s.p01;
    n.p11 = s.dim == 2 ? s.p11 - k1 * h * s.p01 : 0.0;
    n.t = s.t + dt;

    if (!std::isfinite(n.mean[0]) || !std::isfinite(n.p00)
        || (n.dim == 2 && (!std::isfinite(n.mean[1]) || !std::isfinite(n.p11)))) {
        throw NumericalError("EKF state became non-finite after update");
    }
    check_psd(n);
    return n;
}

/// One full predict/update cycle.
inline EkfState ekf_step(const EkfState& s, double dz, const ScenarioConfig& cfg, double dt) {
    return ekf_update(ekf_predict(s, cfg, dt), dz, cfg, dt);
}

/// Unit-modulus signal read-out e^{i theta_hat}.
inline std::complex<double> ekf_signal_estimate(const EkfState& s) noexcept {
    return std::polar(1.0, s.mean[0]);
}

} // namespace circlefilt::ekf
