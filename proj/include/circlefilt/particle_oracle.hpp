#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"
#include "circlefilt/rng.hpp"
#include "circlefilt/sde_sim.hpp"

namespace circlefilt::oracle {

using cplx = std::complex<double>;

/// Bootstrap ensemble over (theta, nu) with normalized weights.
/// Kept as a brute-force reference for the moment filters; never used in the
/// detection path.
struct ParticleEnsemble {
    std::vector<double> thetas;
    std::vector<double> nus;     ///< frequency deviations; empty outside scenario III
    std::vector<double> weights; ///< normalized, sum 1 within 1e-10
};

struct PfResult {
    std::vector<cplx> estimates; ///< per-step weighted means of e^{i theta_p}
    ParticleEnsemble final_ensemble;
    std::size_t resample_count = 0;
};

/// Bootstrap particle filter over the phase (and frequency deviation in
/// scenario III). Per step: propagate every particle through the exact
/// Euler-Maruyama transition, accumulate log-weights from the Gaussian
/// likelihood of dz (mean cos(theta_p) dt, variance sigma0 dt), normalize
/// with max-subtraction, systematically resample when the effective sample
/// size drops below np/2, then emit the weighted circular mean.
inline PfResult pf_run_detailed(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                                std::size_t np, std::uint64_t seed) {
    cfg.validate();
    if (np < 1000) {
        throw UsageError("particle oracle requires np >= 1000");
    }
    if (meas.dt != cfg.dt) {
        throw UsageError("measurement path dt does not match config dt");
    }

    rng::Generator init(rng::derive_key(seed, rng::Stream::ParticleInit));
    rng::Generator prop(rng::derive_key(seed, rng::Stream::ParticleProp));
    rng::Generator resample(rng::derive_key(seed, rng::Stream::Resample));

    const bool has_nu = cfg.scenario == Scenario::III;
    const double drift = cfg.drift_rate();
    const double s_theta = std::sqrt(cfg.q_theta * cfg.dt);
    const double s_nu = has_nu ? std::sqrt(cfg.q_w * cfg.dt) : 0.0;
    const double meas_var = cfg.sigma0 * cfg.dt;

    PfResult res;
    res.estimates.reserve(meas.dz.size());

    std::vector<double> thetas(np);
    std::vector<double> nus(has_nu ? np : 0, 0.0);
    std::vector<double> logw(np, 0.0);
    std::vector<double> w(np);
    for (std::size_t p = 0; p < np; ++p) {
        thetas[p] = init.uniform01() * (2.0 * std::numbers::pi);
    }

    std::vector<double> new_thetas(np);
    std::vector<double> new_nus(has_nu ? np : 0);
    std::vector<double> cdf(np);

    for (std::size_t k = 0; k < meas.dz.size(); ++k) {
        const double dz = meas.dz[k];
        if (!std::isfinite(dz)) {
            throw DataError("non-finite measurement increment dz at step " + std::to_string(k));
        }

        for (std::size_t p = 0; p < np; ++p) {
            const double om = has_nu ? drift + nus[p] : drift;
            thetas[p] += om * cfg.dt + s_theta * prop.normal();
            if (has_nu) nus[p] += s_nu * prop.normal();
            const double r = dz - std::cos(thetas[p]) * cfg.dt;
            logw[p] += -0.5 * r * r / meas_var;
        }

        const double m = *std::max_element(logw.begin(), logw.end());
        if (!std::isfinite(m)) {
            throw OracleError("particle log-weights became non-finite at step "
                                  + std::to_string(k),
                              k);
        }
        double sum = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            logw[p] -= m;
            w[p] = std::exp(logw[p]);
            sum += w[p];
        }
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw OracleError("particle weights vanished at step " + std::to_string(k), k);
        }
        double ess_den = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            w[p] /= sum;
            ess_den += w[p] * w[p];
        }

        if (1.0 / ess_den < static_cast<double>(np) / 2.0) {
            double acc = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                acc += w[p];
                cdf[p] = acc;
            }
            const double u0 = resample.uniform01() / static_cast<double>(np);
            std::size_t i = 0;
            for (std::size_t j = 0; j < np; ++j) {
                const double target = u0 + static_cast<double>(j) / static_cast<double>(np);
                while (i + 1 < np && cdf[i] < target) ++i;
                new_thetas[j] = thetas[i];
                if (has_nu) new_nus[j] = nus[i];
            }
            thetas.swap(new_thetas);
            if (has_nu) nus.swap(new_nus);
            std::fill(logw.begin(), logw.end(), 0.0);
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(np));
            ++res.resample_count;
        }

        cplx est(0.0, 0.0);
        for (std::size_t p = 0; p < np; ++p) {
            est += w[p] * std::polar(1.0, thetas[p]);
        }
        res.estimates.push_back(est);
    }

    res.final_ensemble.thetas = std::move(thetas);
    res.final_ensemble.nus = std::move(nus);
    res.final_ensemble.weights = std::move(w);
    return res;
}

inline std::vector<cplx> pf_run(const sim::MeasurementPath& meas, const ScenarioConfig& cfg,
                                std::size_t np, std::uint64_t seed) {
    return pf_run_detailed(meas, cfg, np, seed).estimates;
}

} // namespace circlefilt::oracle
