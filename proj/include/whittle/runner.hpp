#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/config.hpp"
#include "whittle/envs.hpp"
#include "whittle/linfa.hpp"
#include "whittle/metrics.hpp"
#include "whittle/model_io.hpp"
#include "whittle/neural.hpp"
#include "whittle/oracle.hpp"
#include "whittle/tabular.hpp"
#include "whittle/windex.hpp"

namespace whittle {

namespace detail {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed while writing " + path.string());
}

}  // namespace detail

/// Builds the benchmark model (or loads the user-supplied one) described by
/// the config.
inline MdpModel build_model(const ExperimentConfig& cfg) {
    if (!cfg.model_file.empty()) return load_model(cfg.model_file);
    switch (cfg.example) {
        case Example::Circular: return make_circular();
        case Example::Unstructured: return make_unstructured();
        case Example::Restart: return make_restart();
        case Example::RandomWalk: return make_random_walk(cfg.k_states, cfg.rho);
    }
    throw std::logic_error("unreachable");
}

/// Precision of the oracle-index column written next to learned indices.
/// Small models get near-exact values; large ones trade precision for a
/// solve that stays a small fraction of the learning run itself (learned
/// indices carry errors around 1e-2 anyway).
inline double oracle_tol(const MdpModel& m) { return m.n_states <= 100 ? 1e-8 : 1e-4; }

/// Human-readable model tag used to group report rows.
inline std::string example_tag(const ExperimentConfig& cfg) {
    if (!cfg.model_file.empty()) return "model:" + cfg.model_file;
    std::string tag = example_label(cfg.example);
    if (cfg.example == Example::RandomWalk) tag += " K=" + std::to_string(cfg.k_states);
    return tag;
}

struct ExperimentResult {
    RunRecord record;
    std::filesystem::path dir;
    bool converged = false;
};

/// Runs one configured experiment and writes its artifacts into
/// cfg.out_dir:
///
///   config.txt   the fully resolved config (reparseable)
///   curve.csv    iter,error,wallclock_ms
///   outer.csv    k,delta_lambda,index_error,wallclock_ms[,train_loss]
///                (index algorithms only)
///   index.csv    state,learned_index,oracle_index (index algorithms and
///                solve; solve leaves the learned column empty)
///   summary.csv  algorithm,policy,iterations,compute_time_min,final_error
///                (appended, header written once)
///
/// The run stream is Rng(seed).fork(algorithm enum value), and slices fork
/// per-slice streams from it, so results do not depend on scheduling.
/// With cfg.timing = false every wall-clock field is written as zero and
/// repeated runs are byte-identical.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const MdpModel model = build_model(cfg);
    Rng run_rng = Rng(cfg.seed).fork(static_cast<std::uint64_t>(cfg.algorithm));

    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create out_dir " + dir.string() + ": " + ec.message());

    const double time_scale = cfg.timing ? 1.0 : 0.0;
    ExperimentResult result;
    std::ostringstream curve, outer, index_csv;
    curve << "iter,error,wallclock_ms\n";

    auto emit_curve = [&](const RunRecord& rec) {
        for (const CurvePoint& p : rec.curve)
            curve << p.iteration << ',' << detail::fmt_g(p.error) << ','
                  << detail::fmt_fixed(p.wallclock_ms * time_scale, 3) << '\n';
    };
    auto emit_outer = [&](const RunRecord& rec, const std::vector<double>& index_err,
                          const std::vector<double>* loss) {
        outer << "k,delta_lambda,index_error,wallclock_ms";
        if (loss) outer << ",train_loss";
        outer << '\n';
        for (std::size_t i = 0; i < rec.curve.size(); ++i) {
            const CurvePoint& p = rec.curve[i];
            outer << p.iteration << ',' << detail::fmt_g(p.error) << ','
                  << (i < index_err.size() ? detail::fmt_g(index_err[i]) : std::string())
                  << ',' << detail::fmt_fixed(p.wallclock_ms * time_scale, 3);
            if (loss) outer << ',' << detail::fmt_g((*loss)[i]);
            outer << '\n';
        }
    };
    auto emit_index = [&](const std::vector<double>* learned, const std::vector<double>& oracle) {
        index_csv << "state,learned_index,oracle_index\n";
        for (std::size_t s = 0; s < oracle.size(); ++s)
            index_csv << s << ',' << (learned ? detail::fmt_g((*learned)[s]) : std::string())
                      << ',' << detail::fmt_g(oracle[s]) << '\n';
    };

    switch (cfg.algorithm) {
        case Algorithm::Solve: {
            Stopwatch clock;
            SolveResult vi = value_iteration(model, cfg.beta, 1e-10, 100000);
            std::vector<double> oracle = whittle_indices(model, cfg.beta, oracle_tol(model));
            double ms = clock.elapsed_ms();
            result.record.push(static_cast<std::uint64_t>(vi.iterations), vi.residual, ms);
            result.record.finish("solve", "-", static_cast<std::uint64_t>(vi.iterations), ms);
            emit_curve(result.record);
            emit_index(nullptr, oracle);
            result.converged = true;
            break;
        }
        case Algorithm::Qlearn: {
            std::vector<double> v_star = value_iteration(model, cfg.beta, 1e-10, 100000).v;
            QlearnResult r = run_qlearning(model, ExplorationPolicy{cfg.policy, cfg.epsilon, {}},
                                           cfg.alpha, cfg.beta, 0.0, cfg.t_max,
                                           cfg.reinit_scheme(), run_rng, &v_star);
            result.record = std::move(r.record);
            emit_curve(result.record);
            result.converged = true;
            break;
        }
        case Algorithm::IndexQlearn: {
            std::vector<double> oracle = whittle_indices(model, cfg.beta, oracle_tol(model));
            IndexRunResult r = run_index_learning(
                model, ExplorationPolicy{cfg.policy, cfg.epsilon, {}}, cfg.alpha, cfg.gamma,
                cfg.beta, cfg.k_max, cfg.t_max, cfg.delta, cfg.reinit_scheme(), run_rng, &oracle);
            result.record = std::move(r.record);
            result.converged = r.converged;
            emit_curve(result.record);
            emit_outer(result.record, r.index_error_curve, nullptr);
            emit_index(&r.index.lambdas, oracle);
            break;
        }
        case Algorithm::IndexFa: {
            Aggregation agg = make_aggregation(model.n_states, cfg.group_size);
            std::vector<double> oracle = whittle_indices(model, cfg.beta, oracle_tol(model));
            std::vector<double> oracle_groups(static_cast<std::size_t>(agg.n_groups));
            for (int g = 0; g < agg.n_groups; ++g)
                oracle_groups[g] = oracle[agg.representative(g)];
            FaIndexRunResult r = run_fa_index_learning(
                model, agg, ExplorationPolicy{cfg.policy, cfg.epsilon, {}}, cfg.alpha, cfg.gamma,
                cfg.beta, cfg.k_max, cfg.t_max, cfg.delta, cfg.reinit_scheme(), run_rng,
                &oracle_groups);
            result.record = std::move(r.record);
            result.converged = r.converged;
            emit_curve(result.record);
            emit_outer(result.record, r.index_error_curve, nullptr);
            std::vector<double> learned = r.per_state_indices();
            emit_index(&learned, oracle);
            break;
        }
        case Algorithm::IndexDqn: {
            std::vector<double> oracle = whittle_indices(model, cfg.beta, oracle_tol(model));
            DqnConfig dqn;
            dqn.net_stepsize = cfg.alpha;
            dqn.index_stepsize = cfg.gamma;
            dqn.beta = cfg.beta;
            dqn.delta = cfg.delta;
            dqn.t_max = static_cast<int>(cfg.t_max);
            dqn.k_max = cfg.k_max;
            dqn.eps_init = cfg.epsilon;
            DqnRunResult r = run_dqn_index_learning(model, dqn, dqn_policy(dqn, cfg.policy),
                                                    cfg.reinit_scheme(), run_rng, &oracle);
            result.record = std::move(r.record);
            result.converged = r.converged;
            emit_curve(result.record);
            emit_outer(result.record, r.index_error_curve, &r.loss_curve);
            emit_index(&r.index.lambdas, oracle);
            break;
        }
    }

    detail::write_file(dir / "config.txt", echo_config(cfg));
    detail::write_file(dir / "curve.csv", curve.str());
    if (!outer.str().empty()) detail::write_file(dir / "outer.csv", outer.str());
    if (!index_csv.str().empty()) detail::write_file(dir / "index.csv", index_csv.str());

    const RunSummary& s = result.record.summary;
    std::filesystem::path summary_path = dir / "summary.csv";
    bool fresh = !std::filesystem::exists(summary_path);
    std::ofstream summary(summary_path, std::ios::binary | std::ios::app);
    if (!summary) throw std::runtime_error("cannot write " + summary_path.string());
    if (fresh) summary << "algorithm,policy,iterations,compute_time_min,final_error\n";
    summary << s.algorithm << ',' << s.policy << ',' << s.iterations << ','
            << detail::fmt_fixed(s.compute_time_min * time_scale, 4) << ','
            << detail::fmt_g(s.final_error) << '\n';
    if (!summary) throw std::runtime_error("failed while writing " + summary_path.string());

    result.dir = dir;
    return result;
}

namespace detail {

struct ReportRow {
    std::string example;
    std::string algorithm;
    std::string policy;
    std::string iterations;
    double time_min = 0.0;
    double error = 0.0;
};

inline int policy_rank(const std::string& p) {
    if (p == "eg") return 0;
    if (p == "so") return 1;
    if (p == "es") return 2;
    return 3;
}

inline int algorithm_rank(const std::string& a) {
    if (a == "solve") return 0;
    if (a == "qlearn") return 1;
    if (a == "index_qlearn") return 2;
    if (a == "index_fa") return 3;
    if (a == "index_dqn") return 4;
    return 5;
}

inline std::string display_algorithm(const std::string& a) {
    if (a == "qlearn") return "QL";
    if (a == "index_qlearn") return "QLL";
    if (a == "index_fa") return "QLLFA";
    if (a == "index_dqn") return "DQNLL";
    if (a == "solve") return "SOLVE";
    return a;
}

}  // namespace detail

/// Aggregates every summary.csv under `root` (paired with the config echo
/// beside it) into an aligned text table, one block per example, rows
/// ordered EG, SO, ES within an algorithm.
inline std::string report(const std::string& root) {
    namespace fs = std::filesystem;
    if (!fs::exists(root)) throw std::runtime_error("report: no such directory: " + root);

    std::vector<fs::path> summaries;
    if (fs::is_directory(root)) {
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file() && entry.path().filename() == "summary.csv")
                summaries.push_back(entry.path());
    } else {
        throw std::runtime_error("report: not a directory: " + root);
    }
    std::sort(summaries.begin(), summaries.end());
    if (summaries.empty()) throw std::runtime_error("report: no summary.csv under " + root);

    std::vector<detail::ReportRow> rows;
    for (const fs::path& path : summaries) {
        std::string example = "(unknown model)";
        fs::path cfg_path = path.parent_path() / "config.txt";
        if (fs::exists(cfg_path)) {
            std::ifstream in(cfg_path);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            try {
                example = example_tag(parse_config(text));
            } catch (const std::exception&) {
                // leave the placeholder; a stale echo should not sink the report
            }
        }
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream cells(line);
            detail::ReportRow row;
            row.example = example;
            std::string time_cell, error_cell;
            if (!std::getline(cells, row.algorithm, ',') || !std::getline(cells, row.policy, ',') ||
                !std::getline(cells, row.iterations, ',') || !std::getline(cells, time_cell, ',') ||
                !std::getline(cells, error_cell))
                throw std::runtime_error("report: malformed summary row in " + path.string());
            row.time_min = std::stod(time_cell);
            row.error = std::stod(error_cell);
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) throw std::runtime_error("report: summaries under " + root + " are empty");

    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.example != b.example) return a.example < b.example;
        if (detail::algorithm_rank(a.algorithm) != detail::algorithm_rank(b.algorithm))
            return detail::algorithm_rank(a.algorithm) < detail::algorithm_rank(b.algorithm);
        return detail::policy_rank(a.policy) < detail::policy_rank(b.policy);
    });

    std::ostringstream out;
    std::string current;
    for (const detail::ReportRow& row : rows) {
        if (row.example != current) {
            current = row.example;
            out << "== " << current << " ==\n";
            char header[128];
            std::snprintf(header, sizeof header, "%-14s %12s %14s %10s\n", "", "#Iterations",
                          "Time (min)", "Error");
            out << header;
        }
        std::string label = detail::display_algorithm(row.algorithm);
        if (row.policy != "-") {
            std::string p = row.policy;
            for (char& ch : p) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            label += " (" + p + ")";
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-14s %12s %14s %10s\n", label.c_str(),
                      row.iterations.c_str(), detail::fmt_fixed(row.time_min, 2).c_str(),
                      detail::fmt_fixed(row.error, 3).c_str());
        out << buf;
    }
    return out.str();
}

}  // namespace whittle
