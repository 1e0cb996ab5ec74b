#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "circlefilt/errors.hpp"

namespace circlefilt {

/// Phase dynamics: I = pure diffusion, II = diffusion + known constant drift,
/// III = diffusion + slowly wandering frequency.
enum class Scenario { I, II, III };

enum class Hypothesis { H0, H1 };

enum class Estimator { EC, EKF };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::I: return "i";
        case Scenario::II: return "ii";
        case Scenario::III: return "iii";
    }
    return "?";
}

inline std::string to_string(Hypothesis h) {
    return h == Hypothesis::H0 ? "h0" : "h1";
}

inline std::string to_string(Estimator e) {
    return e == Estimator::EC ? "ec" : "ekf";
}

/// Full parameter set for one simulation/filtering run.
///
/// Defaults follow the reference operating point: dt = 0.1 s, L = 1e4 steps
/// (T = 1e3 s), 12 circular harmonics, 4 frequency powers, sigma0 = 10
/// (SNR = 0.1), q_theta = 0.1, q_w = 1e-8, w0 = 0.012 rad/s.
struct ScenarioConfig {
    Scenario scenario = Scenario::II;
    double q_theta = 1e-1;      ///< phase-noise variance rate (rad^2/s)
    double q_w = 1e-8;          ///< frequency-noise variance rate ((rad/s)^2/s)
    double w0 = 0.012;          ///< initial angular frequency (rad/s)
    double sigma0 = 10.0;       ///< measurement-noise variance rate
    double dt = 0.1;            ///< sampling interval (s)
    std::size_t steps = 10'000; ///< step count L
    std::size_t n_harmonics = 12; ///< N: moments X_0..X_{N-1}
    std::size_t m_powers = 4;     ///< M: frequency powers nu^0..nu^{M-1} (scenario III)
    std::uint64_t seed = 0;

    /// Per-increment amplitude-to-noise ratio sqrt(dt / sigma0) (unit amplitude).
    double snr() const noexcept { return std::sqrt(dt / sigma0); }

    /// Effective rotation rate seen by signal and filters: scenario I pins w = 0.
    double drift_rate() const noexcept { return scenario == Scenario::I ? 0.0 : w0; }

    double horizon() const noexcept { return static_cast<double>(steps) * dt; }

    /// Throws ConfigError naming the violated bound.
    void validate() const {
        if (!(q_theta >= 0.0)) {
            throw ConfigError("q_theta must satisfy q_theta >= 0 (got " + std::to_string(q_theta) + ")");
        }
        if (!(q_w >= 0.0)) {
            throw ConfigError("q_w must satisfy q_w >= 0 (got " + std::to_string(q_w) + ")");
        }
        if (!(sigma0 > 0.0)) {
            throw ConfigError("sigma0 must satisfy sigma0 > 0 (got " + std::to_string(sigma0) + ")");
        }
        if (!(dt > 0.0)) {
            throw ConfigError("dt must satisfy dt > 0 (got " + std::to_string(dt) + ")");
        }
        if (steps < 1) {
            throw ConfigError("steps must satisfy steps >= 1 (got " + std::to_string(steps) + ")");
        }
        if (n_harmonics < 2) {
            throw ConfigError("n_harmonics must satisfy n_harmonics >= 2 (got "
                              + std::to_string(n_harmonics) + ")");
        }
        if (scenario == Scenario::III && m_powers < 2) {
            throw ConfigError("m_powers must satisfy m_powers >= 2 for scenario iii (got "
                              + std::to_string(m_powers) + ")");
        }
        if (!std::isfinite(q_theta) || !std::isfinite(q_w) || !std::isfinite(w0)
            || !std::isfinite(sigma0) || !std::isfinite(dt)) {
            throw ConfigError("config fields must be finite");
        }
    }
};

} // namespace circlefilt
