#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "circlefilt/csv.hpp"
#include "circlefilt/experiment.hpp"

using namespace circlefilt;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const std::filesystem::path p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    out.close();
    return p;
}

exp::ExperimentConfig parse_text(const std::string& name, const std::string& content,
                            std::vector<std::pair<std::string, std::string>> overrides = {}) {
    const std::filesystem::path p = temp_file(name, content);
    const std::string path = p.string();
    const exp::ExperimentConfig ec = exp::parse_config(&path, overrides);
    std::filesystem::remove(p);
    return ec;
}

} // namespace

TEST_CASE("doubles round-trip through the formatter") {
    for (const double v : {0.1, std::numbers::pi, -3.25e-9, 1.0e17, 5e-324, -0.0, 123456.789}) {
        const std::string s = io::fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv output is byte-stable") {
    ScenarioConfig cfg;
    cfg.steps = 50;
    const sim::SignalPath path = sim::simulate_signal(cfg, 5);
    const sim::MeasurementPath meas = sim::simulate_measurements(&path, cfg, Hypothesis::H1, 5);
    std::ostringstream a, b;
    io::write_header(a, io::config_kv(cfg));
    io::write_path_csv(a, path, meas);
    io::write_header(b, io::config_kv(cfg));
    io::write_path_csv(b, path, meas);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("# sigma0=10\n") != std::string::npos);
    CHECK(a.str().find("k,t,theta,omega,dz\n") != std::string::npos);
}

TEST_CASE("path csv rejects mismatched lengths") {
    ScenarioConfig cfg;
    cfg.steps = 10;
    const sim::SignalPath path = sim::simulate_signal(cfg, 1);
    sim::MeasurementPath meas = sim::simulate_measurements(&path, cfg, Hypothesis::H1, 1);
    meas.dz.pop_back();
    std::ostringstream os;
    CHECK_THROWS_AS(io::write_path_csv(os, path, meas), UsageError);
}

TEST_CASE("trace csv carries causal predictions") {
    ScenarioConfig cfg;
    cfg.steps = 20;
    const sim::SignalPath path = sim::simulate_signal(cfg, 3);
    const sim::MeasurementPath meas = sim::simulate_measurements(&path, cfg, Hypothesis::H1, 3);
    const moment::FilterRun run = moment::run_filter(meas, cfg);
    std::ostringstream os;
    io::write_moment_trace_csv(os, run);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,t,re_x1,im_x1,h_hat,max_mod");
    std::getline(is, line);
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    CHECK(field == "0");
    std::getline(row, field, ',');
    CHECK(std::strtod(field.c_str(), nullptr) == cfg.dt);
    for (int i = 0; i < 3; ++i) std::getline(row, field, ',');
    CHECK(std::strtod(field.c_str(), nullptr) == run.steps[0].h_hat);
    CHECK(run.steps[0].h_hat == 0.0);
}

TEST_CASE("roc and trials csv have the documented schemas") {
    const mc::RocTable t = mc::sweep_roc({-1.0, 0.0}, {0.5, 2.0});
    std::ostringstream os;
    io::write_roc_csv(os, t);
    CHECK(os.str().rfind("threshold,pf,pd,pf_hw,pd_hw\n", 0) == 0);

    mc::BatchResult batch;
    batch.h0_logliks = {-1.0, -2.0};
    batch.h1_logliks = {3.0};
    std::ostringstream ts;
    io::write_trials_csv(ts, batch, Estimator::EC);
    std::istringstream is(ts.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "trial_id,hypothesis,estimator,loglik");
    std::getline(is, line);
    CHECK(line.rfind("0,h0,ec,", 0) == 0);
    std::getline(is, line);
    std::getline(is, line);
    CHECK(line.rfind("0,h1,ec,", 0) == 0);
}

TEST_CASE("an empty config file yields the table defaults") {
    const exp::ExperimentConfig ec = parse_text("empty_cfg.txt", "");
    CHECK(ec.cfg.scenario == Scenario::II);
    CHECK(ec.cfg.q_theta == 0.1);
    CHECK(ec.cfg.q_w == 1e-8);
    CHECK(ec.cfg.w0 == 0.012);
    CHECK(ec.cfg.sigma0 == 10.0);
    CHECK(ec.cfg.dt == 0.1);
    CHECK(ec.cfg.steps == 10000);
    CHECK(ec.cfg.n_harmonics == 12);
    CHECK(ec.cfg.m_powers == 4);
    CHECK(ec.estimator == Estimator::EC);
    CHECK(ec.n_trials_h0 == 500);
    CHECK(ec.n_trials_h1 == 500);
}

TEST_CASE("config files parse comments, scenarios, and units") {
    const exp::ExperimentConfig ec = parse_text("full_cfg.txt",
                                           "# comment line\n"
                                           "scenario = iii\n"
                                           "q_theta = 0.01   # trailing comment\n"
                                           "w0 = 0.012\n"
                                           "w0_unit = hz\n"
                                           "estimator = ekf\n"
                                           "hypothesis = h0\n"
                                           "seed = 42\n"
                                           "\n"
                                           "workers = 3\n");
    CHECK(ec.cfg.scenario == Scenario::III);
    CHECK(ec.cfg.q_theta == 0.01);
    CHECK(ec.cfg.w0 == Catch::Approx(0.012 * 2.0 * std::numbers::pi));
    CHECK(ec.estimator == Estimator::EKF);
    CHECK(ec.hypothesis == Hypothesis::H0);
    CHECK(ec.cfg.seed == 42);
    CHECK(ec.workers == 3);
}

TEST_CASE("snr is an alternative spelling of the noise level") {
    const exp::ExperimentConfig ec = parse_text("snr_cfg.txt", "snr = 0.1\n");
    CHECK(ec.cfg.sigma0 == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(ec.snr_list.size() == 1);

    const exp::ExperimentConfig multi = parse_text("snr_multi.txt", "snr = 0.1, 0.0816, 0.0577\n");
    REQUIRE(multi.snr_list.size() == 3);
    CHECK(multi.snr_list[1] == 0.0816);
    CHECK(multi.cfg.sigma0 == 10.0);

    CHECK_THROWS_MATCHES(parse_text("both_cfg.txt", "snr = 0.1\nsigma0 = 5\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("not both")));
}

TEST_CASE("invalid values name the key and the line") {
    CHECK_THROWS_MATCHES(parse_text("neg_q.txt", "q_theta = -1\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("q_theta")));
    CHECK_THROWS_MATCHES(parse_text("unknown.txt", "qtheta = 1\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown config key")));
    CHECK_THROWS_MATCHES(parse_text("dup.txt", "seed = 1\nseed = 2\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate key")));
    CHECK_THROWS_MATCHES(parse_text("line3.txt", "seed = 1\n\nsteps = x\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring(":3:")));
    CHECK_THROWS_AS(parse_text("noeq.txt", "just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("badbool.txt", "oracle = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("badsign.txt", "steps = -5\n"), ConfigError);
    CHECK_THROWS_AS(parse_text("badunit.txt", "w0_unit = degrees\n"), ConfigError);
}

TEST_CASE("inline overrides take precedence over the file") {
    const exp::ExperimentConfig ec =
        parse_text("override.txt", "q_theta = 0.01\nseed = 5\n", {{"q_theta", "0.2"}});
    CHECK(ec.cfg.q_theta == 0.2);
    CHECK(ec.cfg.seed == 5);
}

TEST_CASE("a missing config file is an io error") {
    const std::string path = "/nonexistent/config.txt";
    CHECK_THROWS_AS(exp::parse_config(&path, {}), IoError);
}

TEST_CASE("oracle options parse and validate") {
    const exp::ExperimentConfig ec = parse_text("oracle.txt", "oracle = on\noracle_np = 2000\n");
    CHECK(ec.oracle_enabled);
    CHECK(ec.oracle_np == 2000);
    CHECK_THROWS_AS(parse_text("oracle_small.txt", "oracle_np = 10\n"), ConfigError);
}
