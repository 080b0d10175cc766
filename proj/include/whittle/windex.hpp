#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "whittle/metrics.hpp"
#include "whittle/model.hpp"
#include "whittle/oracle.hpp"
#include "whittle/tabular.hpp"

namespace whittle {

/// Threshold-indexed state-action values Q(s, a, s_tilde): one Q table per
/// threshold state, stored slice-major so a fast-timescale pass stays in one
/// contiguous block.
struct QTensor {
    int n_states = 0;
    std::vector<double> values;

    QTensor() = default;
    explicit QTensor(int n)
        : n_states(n), values(static_cast<std::size_t>(n) * n * 2, 0.0) {}

    double& at(int s, int a, int s_tilde) {
        return values[(static_cast<std::size_t>(s_tilde) * n_states + s) * 2 + a];
    }
    double at(int s, int a, int s_tilde) const {
        return values[(static_cast<std::size_t>(s_tilde) * n_states + s) * 2 + a];
    }
};

/// Subsidy estimates, one per threshold slice. Updates are clamped to
/// +/- bound, the same bracket the exact solver searches, so one unlucky
/// stretch of TD noise cannot run the slow iterate off to infinity.
struct IndexTable {
    std::vector<double> lambdas;
    double bound = 0.0;

    IndexTable() = default;
    IndexTable(int n_slices, double clamp_bound)
        : lambdas(static_cast<std::size_t>(n_slices), 0.0), bound(clamp_bound) {}
};

namespace detail {

inline void apply_index_step(double& lambda, double gap, double gamma, double bound) {
    lambda += gamma * gap;
    if (lambda > bound) lambda = bound;
    if (lambda < -bound) lambda = -bound;
}

}  // namespace detail

/// Slow-timescale update: lambda(s) += gamma * (Q(s,1,s) - Q(s,0,s)) for
/// every threshold state, then clamp.
inline void index_update(IndexTable& idx, const QTensor& q, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("index_update: gamma must be in (0,1)");
    for (int s = 0; s < q.n_states; ++s)
        detail::apply_index_step(idx.lambdas[s], q.at(s, 1, s) - q.at(s, 0, s), gamma, idx.bound);
}

/// Q representation driving the fast timescale of the index learner.
/// TabularSliceRep works on the full QTensor; linfa's AggregatedSliceRep
/// substitutes group-shared weights behind the same four calls.
struct TabularSliceRep {
    QTensor q;

    explicit TabularSliceRep(int n_states) : q(n_states) {}

    int n_slices() const { return q.n_states; }
    std::array<double, 2> q_row(int s, int slice) const {
        return {q.at(s, 0, slice), q.at(s, 1, slice)};
    }
    double update(const Transition& t, int slice, double subsidy, double alpha, double beta) {
        double n0 = q.at(t.next_state, 0, slice), n1 = q.at(t.next_state, 1, slice);
        double best_next = n0 > n1 ? n0 : n1;
        return detail::td_step(q.at(t.state, t.action, slice), best_next, t.reward, t.action,
                               subsidy, alpha, beta);
    }
    double gap(int slice) const { return q.at(slice, 1, slice) - q.at(slice, 0, slice); }
};

template <class Rep>
struct IndexEngineResult {
    IndexTable index;
    RunRecord record;
    std::vector<double> index_error_curve;  // parallel to record.curve; empty without oracle
    Rep rep;
    bool converged = false;
    std::uint64_t outer_iterations = 0;
};

/// Two-timescale index learning: per outer iteration, every slice runs t_max
/// asynchronous TD steps against its frozen subsidy, then all subsidies take
/// one clamped step along their action gaps. Stops once the largest gap
/// drops below delta.
///
/// Each slice draws from its own forked stream (see Rng::fork), keeps its
/// own visit counts and trajectory, and redraws its state uniformly at the
/// start of each outer iteration.
template <class Rep>
IndexEngineResult<Rep> run_index_engine(const MdpModel& model, Rep rep,
                                        const ExplorationPolicy& policy, double alpha,
                                        double gamma, double beta, int k_max, std::uint64_t t_max,
                                        double delta, const ReinitScheme& scheme_proto, Rng& rng,
                                        std::span<const double> oracle, const char* algo_label) {
    // gamma = 0 freezes the subsidies, a useful diagnostic mode; any positive
    // gamma must sit on the slower timescale.
    if (!(gamma >= 0.0 && gamma < alpha && alpha < 1.0))
        throw std::invalid_argument("index learning requires 0 <= gamma < alpha < 1");
    if (k_max < 1 || t_max < 1) throw std::invalid_argument("index learning: k_max and t_max must be >= 1");
    if (!oracle.empty() && oracle.size() != static_cast<std::size_t>(rep.n_slices()))
        throw std::invalid_argument("index learning: oracle probe has wrong length");

    const int n_slices = rep.n_slices();
    IndexEngineResult<Rep> out{IndexTable(n_slices, index_bound(model, beta)),
                               RunRecord{},
                               {},
                               std::move(rep),
                               false,
                               0};

    std::vector<Rng> streams;
    streams.reserve(n_slices);
    std::vector<ReinitScheme> schemes(n_slices, scheme_proto);
    std::vector<std::uint64_t> counters(n_slices, 0);
    for (int sl = 0; sl < n_slices; ++sl) {
        streams.push_back(rng.fork(1 + static_cast<std::uint64_t>(sl)));
        schemes[sl].reset_counts(model.n_states);
    }

    Stopwatch clock;
    std::vector<double> gaps(n_slices, 0.0);
    for (int k = 0; k < k_max; ++k) {
        for (int sl = 0; sl < n_slices; ++sl) {
            Rng& slice_rng = streams[sl];
            int s = slice_rng.uniform_int(model.n_states);
            const double subsidy = out.index.lambdas[sl];
            for (std::uint64_t n = 0; n < t_max; ++n) {
                s = maybe_reinit(schemes[sl], counters[sl], s, slice_rng);
                auto row = out.rep.q_row(s, sl);
                int a = select_action(policy, row, slice_rng);
                Transition t = step(model, s, a, slice_rng);
                out.rep.update(t, sl, subsidy, alpha, beta);
                schemes[sl].note_update(t.state, t.action);
                ++counters[sl];
                s = t.next_state;
            }
        }

        double max_gap = 0.0;
        for (int sl = 0; sl < n_slices; ++sl) {
            gaps[sl] = out.rep.gap(sl);
            max_gap = std::max(max_gap, std::abs(gaps[sl]));
            detail::apply_index_step(out.index.lambdas[sl], gaps[sl], gamma, out.index.bound);
        }

        out.outer_iterations = static_cast<std::uint64_t>(k) + 1;
        out.record.push(out.outer_iterations, max_gap, clock.elapsed_ms());
        if (!oracle.empty()) out.index_error_curve.push_back(index_error(out.index, oracle));
        if (max_gap < delta) {
            out.converged = true;
            break;
        }
    }
    out.record.finish(algo_label, policy_label(policy.kind), out.outer_iterations,
                      clock.elapsed_ms());
    return out;
}

struct IndexRunResult {
    QTensor q;
    IndexTable index;
    RunRecord record;
    std::vector<double> index_error_curve;
    bool converged = false;
    std::uint64_t outer_iterations = 0;
};

/// Tabular two-timescale Whittle index learning. `oracle`, when supplied,
/// must hold the exact index of every state; the worst-state index error is
/// then recorded alongside the gap curve.
inline IndexRunResult run_index_learning(const MdpModel& model, const ExplorationPolicy& policy,
                                         double alpha, double gamma, double beta, int k_max,
                                         std::uint64_t t_max, double delta, ReinitScheme scheme,
                                         Rng& rng, const std::vector<double>* oracle = nullptr) {
    auto res = run_index_engine(model, TabularSliceRep(model.n_states), policy, alpha, gamma, beta,
                                k_max, t_max, delta, scheme, rng,
                                oracle ? std::span<const double>(*oracle) : std::span<const double>{},
                                "index_qlearn");
    return IndexRunResult{std::move(res.rep.q),       std::move(res.index),
                          std::move(res.record),      std::move(res.index_error_curve),
                          res.converged,              res.outer_iterations};
}

}  // namespace whittle
