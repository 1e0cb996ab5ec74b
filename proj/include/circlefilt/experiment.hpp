#pragma once

#include <cerrno>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "circlefilt/config.hpp"
#include "circlefilt/errors.hpp"

namespace circlefilt::exp {

/// Full experiment description: one ScenarioConfig plus run orchestration.
/// Built from defaults, then a flat key=value config file, then inline
/// overrides, in that order; unknown keys are rejected everywhere.
struct ExperimentConfig {
    ScenarioConfig cfg;
    Estimator estimator = Estimator::EC;
    Hypothesis hypothesis = Hypothesis::H1;
    std::size_t n_trials_h0 = 500;
    std::size_t n_trials_h1 = 500;
    std::size_t n_runs = 100;
    std::string out_dir = ".";
    std::size_t workers = 0; ///< 0 = hardware concurrency
    bool oracle_enabled = false;
    std::size_t oracle_np = 100000;
    std::vector<double> snr_list; ///< empty = keep sigma0 as configured

    bool w0_in_hz = false; ///< pending unit conversion, cleared by resolve()
    bool sigma0_set = false;
    bool snr_set = false;

    /// Apply the w0 unit flag and back-solve sigma0 = dt/snr^2 from a single
    /// configured SNR; then validate everything.
    void resolve() {
        if (w0_in_hz) {
            cfg.w0 *= 2.0 * std::numbers::pi;
            w0_in_hz = false;
        }
        if (snr_set && sigma0_set) {
            throw ConfigError("set either snr or sigma0, not both");
        }
        if (snr_set && snr_list.size() == 1) {
            cfg.sigma0 = cfg.dt / (snr_list[0] * snr_list[0]);
        }
        validate();
    }

    void validate() const {
        cfg.validate();
        if (n_trials_h0 < 1) throw ConfigError("n_trials_h0 must be >= 1");
        if (n_trials_h1 < 1) throw ConfigError("n_trials_h1 must be >= 1");
        if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
        if (oracle_np < 1000) throw ConfigError("oracle_np must be >= 1000");
        for (double s : snr_list) {
            if (!(s > 0.0)) throw ConfigError("snr values must be > 0");
        }
        if (out_dir.empty()) throw ConfigError("out_dir must be non-empty");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("value for '" + key + "' is not a finite number: '" + raw + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty() || t[0] == '-' || t[0] == '+') {
        throw ConfigError("value for '" + key + "' is not a non-negative integer: '" + raw + "'");
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError("value for '" + key + "' is not a non-negative integer: '" + raw + "'");
    }
    return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "on" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "off" || raw == "0" || raw == "no") return false;
    throw ConfigError("value for '" + key + "' is not a boolean: '" + raw + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const std::size_t comma = raw.find(',', start);
        const std::string item = trim(raw.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (item.empty()) {
            throw ConfigError("empty entry in list value for '" + key + "': '" + raw + "'");
        }
        out.push_back(parse_double(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty list value for '" + key + "'");
    return out;
}

} // namespace detail

inline Scenario parse_scenario(const std::string& raw) {
    if (raw == "i") return Scenario::I;
    if (raw == "ii") return Scenario::II;
    if (raw == "iii") return Scenario::III;
    throw ConfigError("scenario must be one of i, ii, iii; got '" + raw + "'");
}

inline Estimator parse_estimator(const std::string& raw) {
    if (raw == "ec") return Estimator::EC;
    if (raw == "ekf") return Estimator::EKF;
    throw ConfigError("estimator must be ec or ekf; got '" + raw + "'");
}

inline Hypothesis parse_hypothesis(const std::string& raw) {
    if (raw == "h0") return Hypothesis::H0;
    if (raw == "h1") return Hypothesis::H1;
    throw ConfigError("hypothesis must be h0 or h1; got '" + raw + "'");
}

/// One key into the config. Every assignable field of ExperimentConfig has
/// exactly one key here; anything else is a typo and is rejected.
inline void apply_key(ExperimentConfig& ec, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_double_list;
    using detail::parse_uint;

    if (key == "scenario") {
        ec.cfg.scenario = parse_scenario(value);
    } else if (key == "q_theta") {
        ec.cfg.q_theta = parse_double(key, value);
    } else if (key == "q_w") {
        ec.cfg.q_w = parse_double(key, value);
    } else if (key == "w0") {
        ec.cfg.w0 = parse_double(key, value);
    } else if (key == "w0_unit") {
        if (value == "rad") {
            ec.w0_in_hz = false;
        } else if (value == "hz") {
            ec.w0_in_hz = true;
        } else {
            throw ConfigError("w0_unit must be rad or hz; got '" + value + "'");
        }
    } else if (key == "sigma0") {
        ec.cfg.sigma0 = parse_double(key, value);
        ec.sigma0_set = true;
    } else if (key == "snr") {
        ec.snr_list = parse_double_list(key, value);
        ec.snr_set = true;
    } else if (key == "dt") {
        ec.cfg.dt = parse_double(key, value);
    } else if (key == "steps") {
        ec.cfg.steps = parse_uint(key, value);
    } else if (key == "n_harmonics") {
        ec.cfg.n_harmonics = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "m_powers") {
        ec.cfg.m_powers = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "seed") {
        ec.cfg.seed = parse_uint(key, value);
    } else if (key == "estimator") {
        ec.estimator = parse_estimator(value);
    } else if (key == "hypothesis") {
        ec.hypothesis = parse_hypothesis(value);
    } else if (key == "n_trials_h0") {
        ec.n_trials_h0 = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "n_trials_h1") {
        ec.n_trials_h1 = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "n_runs") {
        ec.n_runs = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "out_dir") {
        ec.out_dir = value;
    } else if (key == "workers") {
        ec.workers = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "oracle") {
        ec.oracle_enabled = parse_bool(key, value);
    } else if (key == "oracle_np") {
        ec.oracle_np = static_cast<std::size_t>(parse_uint(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

/// Flat key=value config file: one pair per line, # comments, blank lines
/// ignored. Duplicate keys are rejected (typo safety over convenience).
inline void apply_config_file(ExperimentConfig& ec, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::vector<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno)
                              + ": expected key=value, got '" + stripped + "'");
        }
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        for (const std::string& s : seen) {
            if (s == key) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '"
                                  + key + "'");
            }
        }
        seen.push_back(key);
        try {
            apply_key(ec, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

/// Defaults, then the optional file, then inline overrides; resolves units
/// and derived quantities, validates, and returns the final config.
inline ExperimentConfig parse_config(
    const std::string* file_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig ec;
    if (const char* env = std::getenv("CIRCLEFILT_OUT"); env != nullptr && env[0] != '\0') {
        ec.out_dir = env;
    }
    if (file_path != nullptr) {
        apply_config_file(ec, *file_path);
    }
    for (const auto& [key, value] : overrides) {
        apply_key(ec, key, value);
    }
    ec.resolve();
    return ec;
}

} // namespace circlefilt::exp
