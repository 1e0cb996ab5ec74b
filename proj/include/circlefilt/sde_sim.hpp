#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/rng.hpp"

namespace circlefilt::sim {

/// Unwrapped phase and frequency samples, length steps + 1.
/// No modular reduction is ever applied to theta; wrap at read-out if needed.
struct SignalPath {
    std::vector<double> theta; ///< phase samples (rad)
    std::vector<double> omega; ///< frequency samples (rad/s); constant for scenarios I/II
};

/// Measurement increments dz_k = Z_{t_{k+1}} - Z_{t_k}, length steps.
struct MeasurementPath {
    std::vector<double> dz;
    double dt = 0.0;
    Hypothesis hypothesis = Hypothesis::H0;
};

/// H1 increment assembled in one fixed expression so tests can reproduce the
/// exact floating-point result from (theta, dt, noise).
inline double h1_increment(double theta, double dt, double noise) noexcept {
    return std::cos(theta) * dt + noise;
}

/// Euler-Maruyama phase/frequency trajectory for the configured scenario.
/// phi_0 ~ U[0, 2pi); drift and diffusion of theta are state-independent, so
/// the discretization is exact in law. Noise substreams are keyed by purpose,
/// not by scenario: scenario III with q_w = 0 is bit-identical to scenario II.
inline SignalPath simulate_signal(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    rng::Generator init(rng::derive_key(seed, rng::Stream::PhaseInit));
    rng::Generator phase(rng::derive_key(seed, rng::Stream::PhaseNoise));
    rng::Generator freq(rng::derive_key(seed, rng::Stream::FreqNoise));

    SignalPath path;
    path.theta.resize(cfg.steps + 1);
    path.omega.resize(cfg.steps + 1);

    path.theta[0] = init.uniform01() * (2.0 * std::numbers::pi);
    path.omega[0] = cfg.drift_rate();

    const double s_theta = std::sqrt(cfg.q_theta * cfg.dt);
    const double s_omega = std::sqrt(cfg.q_w * cfg.dt);
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        path.theta[k + 1] = path.theta[k] + path.omega[k] * cfg.dt + s_theta * phase.normal();
        path.omega[k + 1] = cfg.scenario == Scenario::III
                                ? path.omega[k] + s_omega * freq.normal()
                                : path.omega[k];
    }
    return path;
}

inline SignalPath simulate_signal(const ScenarioConfig& cfg) {
    return simulate_signal(cfg, cfg.seed);
}

/// Noisy measurement increments under either hypothesis.
/// H1: dz_k = cos(theta_k) dt + sqrt(sigma0 dt) zeta_k;  H0: noise only.
/// The measurement-noise stream depends on the seed alone, so H0 and H1 paths
/// with equal seeds share zeta exactly.
inline MeasurementPath simulate_measurements(const SignalPath* path,
                                             const ScenarioConfig& cfg,
                                             Hypothesis hypothesis,
                                             std::uint64_t seed) {
    cfg.validate();
    if ((hypothesis == Hypothesis::H1) != (path != nullptr)) {
        throw UsageError(hypothesis == Hypothesis::H1
                             ? "H1 measurement simulation requires a signal path"
                             : "H0 measurement simulation takes no signal path");
    }
    if (path != nullptr && path->theta.size() != cfg.steps + 1) {
        throw UsageError("signal path length " + std::to_string(path->theta.size())
                         + " does not match cfg.steps + 1 = " + std::to_string(cfg.steps + 1));
    }

    rng::Generator meas(rng::derive_key(seed, rng::Stream::MeasNoise));
    const double s = std::sqrt(cfg.sigma0 * cfg.dt);

    MeasurementPath out;
    out.dt = cfg.dt;
    out.hypothesis = hypothesis;
    out.dz.resize(cfg.steps);
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const double noise = s * meas.normal();
        out.dz[k] = hypothesis == Hypothesis::H1 ? h1_increment(path->theta[k], cfg.dt, noise)
                                                 : noise;
    }
    return out;
}

inline MeasurementPath simulate_measurements(const SignalPath* path,
                                             const ScenarioConfig& cfg,
                                             Hypothesis hypothesis) {
    return simulate_measurements(path, cfg, hypothesis, cfg.seed);
}

} // namespace circlefilt::sim
