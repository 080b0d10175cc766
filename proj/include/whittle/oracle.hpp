#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/model.hpp"

namespace whittle {

/// Thrown when an iterative solver fails to reach its tolerance.
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed point of a Bellman operator together with convergence diagnostics.
struct SolveResult {
    Matrix q;               // n_states x 2
    std::vector<double> v;  // v[s] = max_a q(s,a)
    double residual = 0.0;  // final sup-norm Bellman residual
    int iterations = 0;
};

namespace detail {

/// Iterates Q <- F_lambda(Q) until the sup-norm residual drops below tol,
/// starting from the supplied table (zeros by default). The subsidy lambda
/// is paid on top of the passive reward.
inline SolveResult bellman_fixed_point(const MdpModel& m, double lambda, double beta, double tol,
                                       int max_iters, const Matrix* warm_start = nullptr) {
    const int n = m.n_states;
    Matrix q = warm_start ? *warm_start : Matrix(n, 2);
    std::vector<double> vmax(n);
    Matrix next(n, 2);
    double residual = 0.0;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        for (int s = 0; s < n; ++s) vmax[s] = std::max(q(s, 0), q(s, 1));
        residual = 0.0;
        for (int s = 0; s < n; ++s) {
            for (int a = 0; a < 2; ++a) {
                const Matrix& p = m.transitions(a);
                double cont = 0.0;
                for (int t = 0; t < n; ++t) cont += p(s, t) * vmax[t];
                double val = m.reward(s, a) + (a == 0 ? lambda : 0.0) + beta * cont;
                residual = std::max(residual, std::abs(val - q(s, a)));
                next(s, a) = val;
            }
        }
        std::swap(q, next);
        if (residual <= tol) {
            ++iter;
            break;
        }
    }
    SolveResult out;
    out.q = std::move(q);
    out.v.resize(n);
    for (int s = 0; s < n; ++s) out.v[s] = std::max(out.q(s, 0), out.q(s, 1));
    out.residual = residual;
    out.iterations = iter;
    if (residual > tol)
        throw SolveError("value iteration did not reach tol=" + std::to_string(tol) + " after " +
                         std::to_string(max_iters) + " iterations (residual " +
                         std::to_string(residual) + ")");
    return out;
}

}  // namespace detail

/// Discounted value iteration from Q = 0.
inline SolveResult value_iteration(const MdpModel& m, double beta, double tol, int max_iters = 10000) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("value_iteration: beta must be in [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    return detail::bellman_fixed_point(m, 0.0, beta, tol, max_iters);
}

/// Value iteration for the subsidy-lambda dynamic program, where the passive
/// action earns r(s,0) + lambda.
inline SolveResult q_subsidy(const MdpModel& m, double lambda, double beta, double tol,
                             int max_iters = 10000) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("q_subsidy: beta must be in [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("q_subsidy: tol must be positive");
    return detail::bellman_fixed_point(m, lambda, beta, tol, max_iters);
}

/// Root bracket and solution of g(lambda) = Q^lambda(s,1) - Q^lambda(s,0).
struct IndexSolveResult {
    double index = 0.0;  // the subsidy where the action gap vanishes
    double gap = 0.0;    // |g(index)|
    double lo = 0.0;     // final bracket
    double hi = 0.0;
};

/// Largest subsidy magnitude worth searching: the action gap is bounded by
/// the discounted reward span, so any root lies inside [-B, B].
inline double index_bound(const MdpModel& m, double beta) {
    return m.reward_span() / (1.0 - beta) + 1.0;
}

/// Exact Whittle index of state s_tilde by bisection on the action gap
/// g(lambda), which is nonincreasing in lambda. Keeps the side with g > 0 on
/// the left so a flat zero stretch resolves to its left endpoint. If the
/// initial bracket does not straddle a sign change it is doubled up to 10
/// times before reporting the model as non-indexable at this state.
inline IndexSolveResult whittle_index(const MdpModel& m, int s_tilde, double beta, double root_tol) {
    if (s_tilde < 0 || s_tilde >= m.n_states) throw std::invalid_argument("whittle_index: bad state");
    if (!(root_tol > 0.0)) throw std::invalid_argument("whittle_index: root_tol must be positive");
    const double inner_tol = std::max(1e-13, root_tol * 1e-3 * (1.0 - beta));
    Matrix warm(m.n_states, 2);
    auto gap_at = [&](double lambda) {
        SolveResult r = detail::bellman_fixed_point(m, lambda, beta, inner_tol, 100000, &warm);
        warm = r.q;
        return r.q(s_tilde, 1) - r.q(s_tilde, 0);
    };

    double b = index_bound(m, beta);
    double lo = -b, hi = b;
    double g_lo = gap_at(lo), g_hi = gap_at(hi);
    int expansions = 0;
    while (!(g_lo > 0.0 && g_hi <= 0.0)) {
        if (++expansions > 10)
            throw SolveError("whittle_index: no sign change of the action gap for state " +
                             std::to_string(s_tilde) + " (non-indexable model?)");
        lo *= 2.0;
        hi *= 2.0;
        g_lo = gap_at(lo);
        g_hi = gap_at(hi);
    }

    double mid = 0.5 * (lo + hi), g_mid = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        g_mid = gap_at(mid);
        if (g_mid > 0.0)
            lo = mid;
        else
            hi = mid;
        if (std::abs(g_mid) <= root_tol && hi - lo <= root_tol) break;
    }
    return IndexSolveResult{mid, std::abs(g_mid), lo, hi};
}

/// Whittle index of every state, located to within root_tol.
///
/// One subsidy solve yields the action gap of every state at once, so the
/// per-state bisections are run in lockstep: states whose brackets coincide
/// share a single solve, and each round's solves walk the midpoints in
/// ascending order so the warm start stays close. On models whose indices
/// cluster (long chains with geometric rewards) this needs far fewer solves
/// than independent per-state bisections. States whose gap shows no sign
/// change inside [-B, B] fall back to the single-state solver and its
/// bracket expansion.
inline std::vector<double> whittle_indices(const MdpModel& m, double beta, double root_tol) {
    if (!(root_tol > 0.0)) throw std::invalid_argument("whittle_indices: root_tol must be positive");
    const int n = m.n_states;
    const double b = index_bound(m, beta);

    // A sign decision can only go wrong when the midpoint sits within the
    // gap-evaluation error of the true root, and then the final answer is
    // still within that error of the root. Solving to inner_tol keeps the
    // gap error at 2*inner_tol/(1-beta) = root_tol/25.
    const double inner_tol = std::max(1e-13, root_tol * (1.0 - beta) / 50.0);

    std::vector<double> lo(n, -b), hi(n, b);
    // Solutions from the previous round, keyed by subsidy; each solve warms
    // from the cached solution nearest its midpoint.
    std::map<double, Matrix> cache;
    cache.emplace(0.0, Matrix(n, 2));
    int rounds = 0;
    for (double width = 2.0 * b; width > root_tol; width *= 0.5, ++rounds) {
        // Group states by their (identical bit-for-bit) midpoints.
        std::map<double, std::vector<int>> groups;
        for (int s = 0; s < n; ++s) groups[0.5 * (lo[s] + hi[s])].push_back(s);
        std::map<double, Matrix> next_cache;
        for (const auto& [mid, states] : groups) {
            auto anchor = cache.lower_bound(mid);
            if (anchor == cache.end() ||
                (anchor != cache.begin() &&
                 mid - std::prev(anchor)->first < anchor->first - mid))
                --anchor;
            SolveResult r =
                detail::bellman_fixed_point(m, mid, beta, inner_tol, 100000, &anchor->second);
            for (int s : states) {
                if (r.q(s, 1) - r.q(s, 0) > 0.0)
                    lo[s] = mid;
                else
                    hi[s] = mid;
            }
            next_cache.emplace(mid, std::move(r.q));
        }
        cache = std::move(next_cache);
        if (rounds > 200) break;
    }

    std::vector<double> w(n);
    for (int s = 0; s < n; ++s) w[s] = 0.5 * (lo[s] + hi[s]);

    // Consistency check: the bracket edges must straddle the root. A state
    // pinned to an untouched endpoint never saw a sign change; resolve it
    // with the expanding single-state search.
    for (int s = 0; s < n; ++s)
        if (lo[s] == -b || hi[s] == b) w[s] = whittle_index(m, s, beta, root_tol).index;
    return w;
}

}  // namespace whittle
