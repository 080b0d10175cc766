#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "whittle/explore.hpp"
#include "whittle/metrics.hpp"
#include "whittle/model.hpp"
#include "whittle/rng.hpp"

namespace whittle {

/// Tabular state-action values Q(s,a) for a two-action arm.
struct QTable {
    int n_states = 0;
    std::vector<std::array<double, 2>> q;

    QTable() = default;
    explicit QTable(int n) : n_states(n), q(static_cast<std::size_t>(n), {0.0, 0.0}) {}

    std::span<const double, 2> row(int s) const { return std::span<const double, 2>(q[s]); }
    double max_value(int s) const { return q[s][0] > q[s][1] ? q[s][0] : q[s][1]; }
    double abs_max() const {
        double m = 0.0;
        for (const auto& r : q)
            for (double v : r) m = std::max(m, std::abs(v));
        return m;
    }
};

namespace detail {

/// The one-step TD update shared by the tabular and aggregated learners.
/// Written once so both paths produce bit-identical arithmetic.
inline double td_step(double& cell, double best_next, double reward, int action, double subsidy,
                      double alpha, double beta) {
    double err = reward + (action == 0 ? subsidy : 0.0) + beta * best_next - cell;
    cell += alpha * err;
    return err;
}

}  // namespace detail

/// Applies the asynchronous Q-learning update for one transition and returns
/// the TD error. Exactly one table entry changes. The subsidy is paid for
/// the passive action, so subsidy = 0 recovers plain Q-learning.
inline double q_update(QTable& table, const Transition& t, double alpha, double beta,
                       double subsidy) {
    double best_next = table.max_value(t.next_state);
    return detail::td_step(table.q[t.state][t.action], best_next, t.reward, t.action, subsidy,
                           alpha, beta);
}

enum class ReinitKind { None, PeriodicRandom, InverseCount };

inline const char* reinit_label(ReinitKind k) {
    switch (k) {
        case ReinitKind::None: return "none";
        case ReinitKind::PeriodicRandom: return "periodic";
        case ReinitKind::InverseCount: return "inverse_count";
    }
    return "?";
}

/// State re-initialization rule plus the visit counts that drive it.
/// Counts start at 2 so the inverse-count weights never divide by zero.
struct ReinitScheme {
    ReinitKind kind = ReinitKind::None;
    int period = 50;
    std::vector<std::array<std::uint64_t, 2>> visit_counts;

    void reset_counts(int n_states) {
        visit_counts.assign(static_cast<std::size_t>(n_states), {2, 2});
    }
    void note_update(int s, int a) { ++visit_counts[s][a]; }
    std::uint64_t state_count(int s) const { return visit_counts[s][0] + visit_counts[s][1]; }
};

/// Possibly replaces the current state at a period boundary. `iter` is the
/// number of fast-timescale steps already taken; resets fire when it is a
/// positive multiple of the period.
inline int maybe_reinit(ReinitScheme& scheme, std::uint64_t iter, int current, Rng& rng) {
    if (scheme.kind == ReinitKind::None) return current;
    if (iter == 0 || iter % static_cast<std::uint64_t>(scheme.period) != 0) return current;
    const int n = static_cast<int>(scheme.visit_counts.size());
    if (scheme.kind == ReinitKind::PeriodicRandom) return rng.uniform_int(n);
    // Inverse-count: Prob(s) proportional to 1 / sum_a N(s,a).
    double total = 0.0;
    for (int s = 0; s < n; ++s) total += 1.0 / static_cast<double>(scheme.state_count(s));
    double u = rng.uniform01() * total;
    double cum = 0.0;
    for (int s = 0; s < n; ++s) {
        cum += 1.0 / static_cast<double>(scheme.state_count(s));
        if (u < cum) return s;
    }
    return n - 1;
}

struct QlearnOptions {
    /// Windowed stop test: stop once the mean of |alpha * err| over the last
    /// 1000 updates falls below this. Off by default; runs go to t_max.
    std::optional<double> stop_delta;
    int stop_window = 1000;
    /// Curve sampling stride in fast iterations.
    int curve_stride = 100;
};

struct QlearnResult {
    QTable table;
    RunRecord record;
    ReinitScheme scheme;  // carries the final visit counts
    std::uint64_t steps = 0;
    bool stopped_early = false;
};

/// Asynchronous constant-stepsize Q-learning with a chosen exploration
/// policy. When `v_star` is supplied, the value error is recorded every
/// `curve_stride` steps. The initial state is drawn uniformly from `rng`.
inline QlearnResult run_qlearning(const MdpModel& model, const ExplorationPolicy& policy,
                                  double alpha, double beta, double subsidy, std::uint64_t t_max,
                                  ReinitScheme scheme, Rng& rng,
                                  const std::vector<double>* v_star = nullptr,
                                  const QlearnOptions& opt = {}) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("run_qlearning: alpha must be in (0,1]");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("run_qlearning: beta must be in [0,1)");
    QlearnResult out;
    out.table = QTable(model.n_states);
    scheme.reset_counts(model.n_states);
    Stopwatch clock;

    int s = rng.uniform_int(model.n_states);
    double window_sum = 0.0;
    std::vector<double> window;
    if (opt.stop_delta) window.reserve(opt.stop_window);
    std::size_t window_pos = 0;

    std::uint64_t n = 0;
    for (; n < t_max; ++n) {
        s = maybe_reinit(scheme, n, s, rng);
        int a = select_action(policy, out.table.row(s), rng);
        Transition t = step(model, s, a, rng);
        double err = q_update(out.table, t, alpha, beta, subsidy);
        scheme.note_update(t.state, t.action);
        s = t.next_state;

        if (v_star && (n + 1) % static_cast<std::uint64_t>(opt.curve_stride) == 0)
            out.record.push(n + 1, delta_v(out.table, *v_star), clock.elapsed_ms());

        if (opt.stop_delta) {
            double abs_step = std::abs(alpha * err);
            if (window.size() < static_cast<std::size_t>(opt.stop_window)) {
                window.push_back(abs_step);
                window_sum += abs_step;
            } else {
                window_sum += abs_step - window[window_pos];
                window[window_pos] = abs_step;
                window_pos = (window_pos + 1) % window.size();
            }
            if (window.size() == static_cast<std::size_t>(opt.stop_window) &&
                window_sum / static_cast<double>(window.size()) < *opt.stop_delta) {
                ++n;
                out.stopped_early = true;
                break;
            }
        }
    }

    if (v_star && (out.record.curve.empty() || out.record.curve.back().iteration != n))
        out.record.push(n, delta_v(out.table, *v_star), clock.elapsed_ms());
    out.steps = n;
    out.record.finish("qlearn", policy_label(policy.kind), n, clock.elapsed_ms());
    out.scheme = std::move(scheme);
    return out;
}

}  // namespace whittle
