#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "circlefilt/moment_filter.hpp"
#include "circlefilt/sde_sim.hpp"

using namespace circlefilt;
using moment::cplx;

namespace {

sim::MeasurementPath zero_measurements(const ScenarioConfig& cfg, std::size_t n) {
    sim::MeasurementPath meas;
    meas.dt = cfg.dt;
    meas.hypothesis = Hypothesis::H0;
    meas.dz.assign(n, 0.0);
    return meas;
}

moment::MomentVector point_mass(const ScenarioConfig& cfg, double theta) {
    moment::MomentVector x = moment::init_moments(cfg);
    for (std::size_t n = 0; n < x.size(); ++n)
        x.x[n] = std::polar(1.0, theta * static_cast<double>(n));
    return x;
}

} // namespace

TEST_CASE("initial moments encode a uniform phase") {
    ScenarioConfig cfg;
    const moment::MomentVector x = moment::init_moments(cfg);
    REQUIRE(x.size() == cfg.n_harmonics);
    CHECK(x.x[0] == cplx(1.0, 0.0));
    for (std::size_t n = 1; n < x.size(); ++n) CHECK(x.x[n] == cplx(0.0, 0.0));
    CHECK(x.h_hat() == 0.0);
    CHECK(x.t == 0.0);
}

TEST_CASE("prediction applies decay to the first moment") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.1;
    cfg.w0 = 0.0;
    moment::MomentVector x = moment::init_moments(cfg);
    x.x[1] = 1.0;
    const moment::MomentVector out = moment::predict(x, cfg, cfg.dt);
    CHECK(out.x[1].real() == Catch::Approx(0.995).margin(1e-15));
    CHECK(out.x[1].imag() == 0.0);
    CHECK(out.x[0] == cplx(1.0, 0.0));
    CHECK(out.t == Catch::Approx(0.1));
}

TEST_CASE("prediction applies rotation to the first moment") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.0;
    cfg.w0 = 0.012;
    moment::MomentVector x = moment::init_moments(cfg);
    x.x[1] = 1.0;
    const moment::MomentVector out = moment::predict(x, cfg, cfg.dt);
    CHECK(out.x[1].real() == 1.0);
    CHECK(out.x[1].imag() == Catch::Approx(0.0012).margin(1e-18));
}

TEST_CASE("prediction leaves the uniform state fixed") {
    ScenarioConfig cfg;
    const moment::MomentVector x = moment::init_moments(cfg);
    const moment::MomentVector out = moment::predict(x, cfg, cfg.dt);
    CHECK(out.x[0] == cplx(1.0, 0.0));
    for (std::size_t n = 1; n < out.size(); ++n) CHECK(out.x[n] == cplx(0.0, 0.0));
}

TEST_CASE("prediction rejects the augmented scenario") {
    ScenarioConfig cfg;
    cfg.scenario = Scenario::III;
    const moment::MomentVector x = moment::init_moments(cfg);
    CHECK_THROWS_AS(moment::predict(x, cfg, cfg.dt), UsageError);
}

TEST_CASE("a point mass is innovation-blind below the truncation edge") {
    ScenarioConfig cfg;
    const moment::MomentVector x = point_mass(cfg, 0.7);
    const moment::FilterStep step = moment::update(x, 0.33, cfg, cfg.dt);
    for (std::size_t n = 0; n + 2 < x.size(); ++n) {
        CHECK(std::abs(step.x_post.x[n] - x.x[n]) < 1e-15);
        CHECK(std::abs(step.gain[n]) < 1e-15);
    }
    CHECK(std::abs(step.gain[x.size() - 1]) > 1e-3);
}

TEST_CASE("updating the uniform state only moves the first moment") {
    ScenarioConfig cfg;
    const moment::MomentVector x = moment::init_moments(cfg);
    const double dz = 0.42;
    const moment::FilterStep step = moment::update(x, dz, cfg, cfg.dt);
    CHECK(step.h_hat == 0.0);
    CHECK(step.gain[0] == cplx(0.0, 0.0));
    CHECK(step.gain[1].real() == Catch::Approx(1.0 / (2.0 * cfg.sigma0)).margin(1e-18));
    CHECK(step.x_post.x[1].real() == Catch::Approx(dz / (2.0 * cfg.sigma0)).margin(1e-15));
    CHECK(step.x_post.x[1].imag() == 0.0);
    CHECK(step.x_post.x[0] == cplx(1.0, 0.0));
    for (std::size_t n = 2; n < x.size(); ++n) CHECK(step.x_post.x[n] == cplx(0.0, 0.0));
}

TEST_CASE("the zeroth moment is conserved exactly by every update") {
    ScenarioConfig cfg;
    rng::Generator g(99);
    moment::MomentVector x = moment::init_moments(cfg);
    for (int k = 0; k < 200; ++k) {
        x = moment::predict(x, cfg, cfg.dt);
        x = moment::update(x, 0.3 * g.normal(), cfg, cfg.dt).x_post;
        REQUIRE(x.x[0].real() == 1.0);
        REQUIRE(x.x[0].imag() == 0.0);
    }
}

TEST_CASE("update rejects non-finite increments") {
    ScenarioConfig cfg;
    const moment::MomentVector x = moment::init_moments(cfg);
    CHECK_THROWS_AS(moment::update(x, std::nan(""), cfg, cfg.dt), DataError);
    CHECK_THROWS_AS(moment::update(x, INFINITY, cfg, cfg.dt), DataError);
}

TEST_CASE("an empty measurement record returns the initial state") {
    ScenarioConfig cfg;
    const sim::MeasurementPath meas = zero_measurements(cfg, 0);
    const moment::FilterRun run = moment::run_filter(meas, cfg);
    CHECK(run.steps.empty());
    CHECK(run.final_state().x == moment::init_moments(cfg).x);
}

TEST_CASE("zero increments keep the uniform state fixed forever") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.1;
    cfg.w0 = 0.0;
    const sim::MeasurementPath meas = zero_measurements(cfg, 100);
    const moment::FilterRun run = moment::run_filter(meas, cfg);
    const moment::MomentVector& xf = run.final_state();
    CHECK(xf.x[0] == cplx(1.0, 0.0));
    for (std::size_t n = 1; n < xf.size(); ++n) CHECK(xf.x[n] == cplx(0.0, 0.0));
    CHECK(run.mod_violations == 0);
}

TEST_CASE("with gains suppressed the moduli decay exponentially") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.1;
    cfg.w0 = 0.0;
    cfg.sigma0 = 1e12;
    const std::size_t nsteps = 1000;
    const sim::MeasurementPath meas = zero_measurements(cfg, nsteps);
    const moment::FilterRun run = moment::run_filter(meas, cfg, point_mass(cfg, 0.0));
    const double t = cfg.dt * static_cast<double>(nsteps);
    const double want = std::exp(-cfg.q_theta * t / 2.0);
    const double got = std::abs(run.final_state().x[1]);
    CHECK(std::abs(got - want) / want < 2.5e-2);
}

TEST_CASE("drift-only evolution is rotation-equivariant") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.0;
    cfg.w0 = 0.012;
    cfg.sigma0 = 1e6;
    const std::size_t nsteps = 1000;
    const sim::MeasurementPath meas = zero_measurements(cfg, nsteps);
    const moment::FilterRun run = moment::run_filter(meas, cfg, point_mass(cfg, 0.0));
    const double t = cfg.dt * static_cast<double>(nsteps);
    const moment::MomentVector& xf = run.final_state();
    for (std::size_t n = 1; n < xf.size(); ++n) {
        const cplx dir = xf.x[n] / std::abs(xf.x[n]);
        const cplx want = std::polar(1.0, static_cast<double>(n) * cfg.w0 * t);
        CHECK(std::abs(dir - want) < 1e-3);
    }
}

TEST_CASE("mirrored signals produce conjugate (real) states when w0 is zero") {
    ScenarioConfig cfg;
    cfg.w0 = 0.0;
    cfg.steps = 500;
    const sim::SignalPath path = sim::simulate_signal(cfg, 13);
    sim::SignalPath mirrored = path;
    for (double& th : mirrored.theta) th = -th;
    const sim::MeasurementPath m1 = sim::simulate_measurements(&path, cfg, Hypothesis::H1, 13);
    const sim::MeasurementPath m2 = sim::simulate_measurements(&mirrored, cfg, Hypothesis::H1, 13);
    REQUIRE(m1.dz == m2.dz);
    const moment::FilterRun run = moment::run_filter(m1, cfg);
    for (const moment::FilterStep& s : run.steps) {
        for (const cplx& v : s.x_post.x) REQUIRE(v.imag() == 0.0);
    }
}

TEST_CASE("the truncation edge stays below the first moment on real data") {
    ScenarioConfig cfg;
    std::size_t good = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const sim::SignalPath path = sim::simulate_signal(cfg, seed);
        const sim::MeasurementPath meas =
            sim::simulate_measurements(&path, cfg, Hypothesis::H1, seed);
        moment::MomentVector x = moment::init_moments(cfg);
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            x = moment::update(moment::predict(x, cfg, cfg.dt), meas.dz[k], cfg, cfg.dt).x_post;
            if (std::abs(x.x[cfg.n_harmonics - 1]) < std::abs(x.x[1])) ++good;
            ++total;
        }
    }
    CHECK(static_cast<double>(good) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("run_filter rejects a sampling-interval mismatch") {
    ScenarioConfig cfg;
    sim::MeasurementPath meas = zero_measurements(cfg, 10);
    meas.dt = 0.2;
    CHECK_THROWS_AS(moment::run_filter(meas, cfg), UsageError);
}

TEST_CASE("instability is reported with the failing step") {
    ScenarioConfig cfg;
    cfg.q_theta = 0.1;
    cfg.w0 = 0.0;
    cfg.n_harmonics = 24;
    const sim::MeasurementPath meas = zero_measurements(cfg, 1000);
    const moment::MomentVector x0 = point_mass(cfg, 0.0);
    bool caught = false;
    try {
        moment::run_filter(meas, cfg, x0);
    } catch (const NumericalError& e) {
        caught = true;
        CHECK(e.has_step());
        CHECK(e.step() < 1000);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
    CHECK(caught);

    moment::FilterOptions opts;
    opts.clip_to_disk = true;
    const moment::FilterRun run = moment::run_filter(meas, cfg, x0, opts);
    CHECK(run.steps.size() == 1000);
    CHECK(run.mod_violations > 0);
    CHECK(run.final_state().max_modulus() <= 1.0 + opts.tol_mod + 1e-12);
}
