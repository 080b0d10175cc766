#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "whittle/windex.hpp"

namespace whittle {

/// Contiguous state aggregation: state s belongs to group floor(s / group_size).
struct Aggregation {
    int n_states = 0;
    int group_size = 1;
    int n_groups = 0;

    int group(int s) const { return s / group_size; }

    /// Lower-median member of a group, used as the group's threshold
    /// representative. The last group may be ragged when group_size does not
    /// divide the state count.
    int representative(int g) const {
        int lo = g * group_size;
        int size = std::min(group_size, n_states - lo);
        return lo + (size - 1) / 2;
    }
};

inline Aggregation make_aggregation(int n_states, int group_size) {
    if (group_size < 1) throw std::invalid_argument("make_aggregation: group_size must be >= 1");
    if (n_states < 1) throw std::invalid_argument("make_aggregation: n_states must be >= 1");
    return Aggregation{n_states, group_size, (n_states + group_size - 1) / group_size};
}

/// One-hot group feature of a state.
inline int features(const Aggregation& agg, int s) { return agg.group(s); }

/// Aggregated action values: one weight per (group, action, threshold slice),
/// with one threshold slice per group. Q_hat(s, a, slice) = w(group(s), a, slice).
struct LinearQ {
    Aggregation agg;
    std::vector<double> w;  // slice-major: [slice][group][a]

    LinearQ() = default;
    explicit LinearQ(const Aggregation& aggregation)
        : agg(aggregation),
          w(static_cast<std::size_t>(aggregation.n_groups) * aggregation.n_groups * 2, 0.0) {}

    double& at(int group, int a, int slice) {
        return w[(static_cast<std::size_t>(slice) * agg.n_groups + group) * 2 + a];
    }
    double at(int group, int a, int slice) const {
        return w[(static_cast<std::size_t>(slice) * agg.n_groups + group) * 2 + a];
    }
};

/// Semi-gradient TD update under one-hot group features: a single weight
/// cell moves, exactly like the tabular update applied at group resolution.
inline double fa_q_update(LinearQ& lq, const Transition& t, int slice, double alpha, double beta,
                          double subsidy) {
    int g = lq.agg.group(t.state);
    int g_next = lq.agg.group(t.next_state);
    double n0 = lq.at(g_next, 0, slice), n1 = lq.at(g_next, 1, slice);
    double best_next = n0 > n1 ? n0 : n1;
    return detail::td_step(lq.at(g, t.action, slice), best_next, t.reward, t.action, subsidy,
                           alpha, beta);
}

/// LinearQ behind the index-engine interface. With group_size = 1 every call
/// reduces to the tabular expressions, so a shared seed reproduces the
/// tabular run bit for bit.
struct AggregatedSliceRep {
    LinearQ lq;

    explicit AggregatedSliceRep(const Aggregation& agg) : lq(agg) {}

    int n_slices() const { return lq.agg.n_groups; }
    std::array<double, 2> q_row(int s, int slice) const {
        int g = lq.agg.group(s);
        return {lq.at(g, 0, slice), lq.at(g, 1, slice)};
    }
    double update(const Transition& t, int slice, double subsidy, double alpha, double beta) {
        return fa_q_update(lq, t, slice, alpha, beta, subsidy);
    }
    double gap(int slice) const { return lq.at(slice, 1, slice) - lq.at(slice, 0, slice); }
};

struct FaIndexRunResult {
    LinearQ lq;
    IndexTable index;  // one lambda per group
    RunRecord record;
    std::vector<double> index_error_curve;
    bool converged = false;
    std::uint64_t outer_iterations = 0;

    /// Learned index reported per state: lambda(group(s)).
    std::vector<double> per_state_indices() const {
        std::vector<double> out(static_cast<std::size_t>(lq.agg.n_states));
        for (int s = 0; s < lq.agg.n_states; ++s) out[s] = index.lambdas[lq.agg.group(s)];
        return out;
    }
};

/// Two-timescale index learning with state aggregation. `oracle_per_group`,
/// when supplied, holds the exact index at each group's representative state.
inline FaIndexRunResult run_fa_index_learning(const MdpModel& model, const Aggregation& agg,
                                              const ExplorationPolicy& policy, double alpha,
                                              double gamma, double beta, int k_max,
                                              std::uint64_t t_max, double delta,
                                              ReinitScheme scheme, Rng& rng,
                                              const std::vector<double>* oracle_per_group = nullptr) {
    if (agg.n_states != model.n_states)
        throw std::invalid_argument("run_fa_index_learning: aggregation was built for a different model");
    auto res = run_index_engine(
        model, AggregatedSliceRep(agg), policy, alpha, gamma, beta, k_max, t_max, delta, scheme,
        rng,
        oracle_per_group ? std::span<const double>(*oracle_per_group) : std::span<const double>{},
        "index_fa");
    return FaIndexRunResult{std::move(res.rep.lq),    std::move(res.index),
                            std::move(res.record),    std::move(res.index_error_curve),
                            res.converged,            res.outer_iterations};
}

}  // namespace whittle
