#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/explore.hpp"
#include "whittle/tabular.hpp"

namespace whittle {

enum class Algorithm { Qlearn, IndexQlearn, IndexFa, IndexDqn, Solve };

inline const char* algorithm_label(Algorithm a) {
    switch (a) {
        case Algorithm::Qlearn: return "qlearn";
        case Algorithm::IndexQlearn: return "index_qlearn";
        case Algorithm::IndexFa: return "index_fa";
        case Algorithm::IndexDqn: return "index_dqn";
        case Algorithm::Solve: return "solve";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "qlearn") return Algorithm::Qlearn;
    if (s == "index_qlearn") return Algorithm::IndexQlearn;
    if (s == "index_fa") return Algorithm::IndexFa;
    if (s == "index_dqn") return Algorithm::IndexDqn;
    if (s == "solve") return Algorithm::Solve;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

enum class Example { Circular, Unstructured, Restart, RandomWalk };

inline const char* example_label(Example e) {
    switch (e) {
        case Example::Circular: return "circular";
        case Example::Unstructured: return "unstructured";
        case Example::Restart: return "restart";
        case Example::RandomWalk: return "random_walk";
    }
    return "?";
}

inline Example parse_example(const std::string& s) {
    if (s == "circular") return Example::Circular;
    if (s == "unstructured") return Example::Unstructured;
    if (s == "restart") return Example::Restart;
    if (s == "random_walk") return Example::RandomWalk;
    throw std::invalid_argument("unknown example '" + s + "'");
}

/// Raw key=value assignments before defaults are applied. Every field is
/// optional so a config file and command-line flags can be merged.
struct ConfigValues {
    std::optional<std::string> example, algorithm, policy, reinit, out_dir, model_file;
    std::optional<int> k_states, k_max, group_size;
    std::optional<std::uint64_t> t_max, seed;
    std::optional<double> rho, alpha, gamma, beta, epsilon, delta;
    std::optional<bool> timing;
};

/// Fully resolved experiment description; what run_experiment consumes and
/// what the runner echoes next to its outputs.
struct ExperimentConfig {
    Example example = Example::Circular;
    int k_states = 5;
    double rho = 0.95;
    std::string model_file;  // overrides `example` when nonempty
    Algorithm algorithm = Algorithm::Qlearn;
    PolicyKind policy = PolicyKind::EpsilonGreedy;
    double alpha = 0.01;
    double gamma = 0.01;
    double beta = 0.9;
    double epsilon = 0.4;
    double delta = 0.005;
    std::uint64_t t_max = 30000;
    int k_max = 1000;
    ReinitKind reinit = ReinitKind::None;
    int reinit_period = 50;
    int group_size = 10;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    /// When false (the default) all wall-clock fields in emitted CSVs are
    /// written as zero, so a repeated run is byte-identical.
    bool timing = false;

    ReinitScheme reinit_scheme() const { return ReinitScheme{reinit, reinit_period, {}}; }

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

[[noreturn]] inline void config_error(int line, const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

inline double parse_double_value(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        config_error(line, "key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline std::int64_t parse_int_value(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        std::int64_t d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        config_error(line, "key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool_value(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    config_error(line, "key '" + key + "': expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Parses `key=value` assignments: whitespace-separated tokens, one or more
/// per line, with `#` starting a comment. Unknown keys and malformed values
/// are reported with their line number.
inline ConfigValues parse_config_values(const std::string& text) {
    ConfigValues out;
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos || eq == 0)
                detail::config_error(lineno, "expected key=value, got '" + tok + "'");
            std::string key = tok.substr(0, eq);
            std::string val = tok.substr(eq + 1);
            if (val.empty()) detail::config_error(lineno, "key '" + key + "': empty value");

            if (key == "example") out.example = val;
            else if (key == "algorithm") out.algorithm = val;
            else if (key == "policy") out.policy = val;
            else if (key == "reinit") out.reinit = val;
            else if (key == "out_dir") out.out_dir = val;
            else if (key == "model_file") out.model_file = val;
            else if (key == "k_states") out.k_states = static_cast<int>(detail::parse_int_value(key, val, lineno));
            else if (key == "k_max") out.k_max = static_cast<int>(detail::parse_int_value(key, val, lineno));
            else if (key == "group_size") out.group_size = static_cast<int>(detail::parse_int_value(key, val, lineno));
            else if (key == "t_max") out.t_max = static_cast<std::uint64_t>(detail::parse_int_value(key, val, lineno));
            else if (key == "seed") out.seed = static_cast<std::uint64_t>(detail::parse_int_value(key, val, lineno));
            else if (key == "rho") out.rho = detail::parse_double_value(key, val, lineno);
            else if (key == "alpha") out.alpha = detail::parse_double_value(key, val, lineno);
            else if (key == "gamma") out.gamma = detail::parse_double_value(key, val, lineno);
            else if (key == "beta") out.beta = detail::parse_double_value(key, val, lineno);
            else if (key == "epsilon") out.epsilon = detail::parse_double_value(key, val, lineno);
            else if (key == "delta") out.delta = detail::parse_double_value(key, val, lineno);
            else if (key == "timing") out.timing = detail::parse_bool_value(key, val, lineno);
            else detail::config_error(lineno, "unknown key '" + key + "'");
        }
    }
    return out;
}

/// Later assignments win; used to let command-line flags override a file.
inline void merge_config_values(ConfigValues& base, const ConfigValues& over) {
    auto take = [](auto& dst, const auto& src) { if (src) dst = src; };
    take(base.example, over.example);
    take(base.algorithm, over.algorithm);
    take(base.policy, over.policy);
    take(base.reinit, over.reinit);
    take(base.out_dir, over.out_dir);
    take(base.model_file, over.model_file);
    take(base.k_states, over.k_states);
    take(base.k_max, over.k_max);
    take(base.group_size, over.group_size);
    take(base.t_max, over.t_max);
    take(base.seed, over.seed);
    take(base.rho, over.rho);
    take(base.alpha, over.alpha);
    take(base.gamma, over.gamma);
    take(base.beta, over.beta);
    take(base.epsilon, over.epsilon);
    take(base.delta, over.delta);
    take(base.timing, over.timing);
}

/// Applies documented defaults and cross-field constraints.
///
/// Defaults shared by every algorithm: circular example, eg policy,
/// beta = 0.9, seed = 1. Loop sizes and stepsizes default per algorithm to
/// the benchmark settings: qlearn alpha 0.01 / t_max 30000; index learning
/// alpha 0.05 / gamma 0.01 / t_max 5000 / k_max 1000 / delta 0.005; state
/// aggregation additionally group_size 10, t_max 3000, k_max 150,
/// delta 0.001; DQN alpha 0.01 (network) / gamma 0.05 (index) / t_max 500 /
/// k_max 100 / delta 0.001 and epsilon 0.1 (all other algorithms:
/// epsilon 0.4).
inline ExperimentConfig resolve_config(const ConfigValues& v) {
    ExperimentConfig c;
    c.algorithm = parse_algorithm(v.algorithm.value_or("qlearn"));
    c.example = parse_example(v.example.value_or("circular"));
    c.policy = parse_policy_kind(v.policy.value_or("eg"));
    if (v.model_file) c.model_file = *v.model_file;
    if (v.out_dir) c.out_dir = *v.out_dir;

    // The DQN variant is exempt from the gamma < alpha ordering below: its
    // stock configuration pairs a 0.01 network stepsize with a 0.05 index
    // stepsize (see DqnConfig).
    const bool ordered_index_algo =
        c.algorithm == Algorithm::IndexQlearn || c.algorithm == Algorithm::IndexFa;
    switch (c.algorithm) {
        case Algorithm::Qlearn:
        case Algorithm::Solve:
            c.alpha = v.alpha.value_or(0.01);
            c.t_max = v.t_max.value_or(30000);
            c.k_max = v.k_max.value_or(1);
            c.delta = v.delta.value_or(0.005);
            break;
        case Algorithm::IndexQlearn:
            c.alpha = v.alpha.value_or(0.05);
            c.t_max = v.t_max.value_or(5000);
            c.k_max = v.k_max.value_or(1000);
            c.delta = v.delta.value_or(0.005);
            break;
        case Algorithm::IndexFa:
            c.alpha = v.alpha.value_or(0.05);
            c.t_max = v.t_max.value_or(3000);
            c.k_max = v.k_max.value_or(150);
            c.delta = v.delta.value_or(0.001);
            break;
        case Algorithm::IndexDqn:
            c.alpha = v.alpha.value_or(0.01);
            c.t_max = v.t_max.value_or(500);
            c.k_max = v.k_max.value_or(100);
            c.delta = v.delta.value_or(0.001);
            break;
    }
    c.gamma = v.gamma.value_or(c.algorithm == Algorithm::IndexDqn ? 0.05 : 0.01);
    c.beta = v.beta.value_or(0.9);
    c.epsilon = v.epsilon.value_or(c.algorithm == Algorithm::IndexDqn ? 0.1 : 0.4);
    c.k_states = v.k_states.value_or(5);
    c.rho = v.rho.value_or(0.95);
    c.group_size = v.group_size.value_or(10);
    c.seed = v.seed.value_or(1);
    c.timing = v.timing.value_or(false);

    if (v.reinit) {
        const std::string& r = *v.reinit;
        if (r == "none") {
            c.reinit = ReinitKind::None;
        } else if (r == "inverse_count") {
            c.reinit = ReinitKind::InverseCount;
        } else if (r.rfind("periodic", 0) == 0) {
            c.reinit = ReinitKind::PeriodicRandom;
            if (r.size() > 8) {
                std::size_t pos = 0;
                if (r[8] == ':') {
                    try {
                        c.reinit_period = std::stoi(r.substr(9), &pos);
                    } catch (const std::exception&) {
                        pos = 0;
                    }
                }
                if (r[8] != ':' || pos != r.size() - 9)
                    throw std::invalid_argument("key 'reinit': expected periodic:N, got '" + r + "'");
            }
        } else {
            throw std::invalid_argument("key 'reinit': expected none, periodic:N or inverse_count, got '" +
                                        r + "'");
        }
    }

    // Cross-field constraints.
    if (!(c.beta >= 0.0 && c.beta < 1.0)) throw std::invalid_argument("key 'beta': must be in [0,1)");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw std::invalid_argument("key 'alpha': must be in (0,1]");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw std::invalid_argument("key 'epsilon': must be in [0,1]");
    if (!(c.delta > 0.0)) throw std::invalid_argument("key 'delta': must be positive");
    if (!(c.rho > 0.0 && c.rho < 1.0)) throw std::invalid_argument("key 'rho': must be in (0,1)");
    if (c.k_states < 2) throw std::invalid_argument("key 'k_states': must be at least 2");
    if (c.group_size < 1) throw std::invalid_argument("key 'group_size': must be at least 1");
    if (c.t_max < 1) throw std::invalid_argument("key 't_max': must be at least 1");
    if (c.k_max < 1) throw std::invalid_argument("key 'k_max': must be at least 1");
    if (c.reinit_period < 1) throw std::invalid_argument("key 'reinit': period must be at least 1");
    if (ordered_index_algo && !(c.gamma > 0.0 && c.gamma < c.alpha))
        throw std::invalid_argument("key 'gamma': two-timescale ordering requires 0 < gamma < alpha (got gamma=" +
                                    std::to_string(c.gamma) + ", alpha=" + std::to_string(c.alpha) + ")");
    if (c.algorithm == Algorithm::IndexDqn && !(c.gamma > 0.0 && c.gamma < 1.0))
        throw std::invalid_argument("key 'gamma': must be in (0,1)");
    return c;
}

/// Parses and resolves a config file in one step.
inline ExperimentConfig parse_config(const std::string& text) {
    return resolve_config(parse_config_values(text));
}

/// The fully-resolved config as key=value lines; parse_config(echo) is the
/// identity, so any output directory can be reproduced from its echo alone.
inline std::string echo_config(const ExperimentConfig& c) {
    char buf[64];
    auto num = [&buf](double d) {
        std::snprintf(buf, sizeof buf, "%.17g", d);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "algorithm=" << algorithm_label(c.algorithm) << "\n";
    out << "example=" << example_label(c.example) << "\n";
    out << "k_states=" << c.k_states << "\n";
    out << "rho=" << num(c.rho) << "\n";
    if (!c.model_file.empty()) out << "model_file=" << c.model_file << "\n";
    out << "policy=" << policy_label(c.policy) << "\n";
    out << "alpha=" << num(c.alpha) << "\n";
    out << "gamma=" << num(c.gamma) << "\n";
    out << "beta=" << num(c.beta) << "\n";
    out << "epsilon=" << num(c.epsilon) << "\n";
    out << "delta=" << num(c.delta) << "\n";
    out << "t_max=" << c.t_max << "\n";
    out << "k_max=" << c.k_max << "\n";
    out << "reinit=" << (c.reinit == ReinitKind::PeriodicRandom
                             ? "periodic:" + std::to_string(c.reinit_period)
                             : reinit_label(c.reinit))
        << "\n";
    out << "group_size=" << c.group_size << "\n";
    out << "seed=" << c.seed << "\n";
    out << "out_dir=" << c.out_dir << "\n";
    out << "timing=" << (c.timing ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace whittle
