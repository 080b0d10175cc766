#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/rng.hpp"

namespace whittle {

enum class PolicyKind { EpsilonGreedy, Softmax, EpsilonSoftmax };

/// Multiplicative epsilon decay: every `period` steps, epsilon <- max(floor, epsilon * rate).
struct DecaySchedule {
    double rate = 0.99;
    int period = 20;
    double floor = 0.01;
};

/// Action-selection rule shared by all learners. `epsilon` is ignored by the
/// pure softmax rule; `decay`, when set, is applied by the DQN loop.
struct ExplorationPolicy {
    PolicyKind kind = PolicyKind::EpsilonGreedy;
    double epsilon = 0.4;
    std::optional<DecaySchedule> decay;
};

inline const char* policy_label(PolicyKind k) {
    switch (k) {
        case PolicyKind::EpsilonGreedy: return "eg";
        case PolicyKind::Softmax: return "so";
        case PolicyKind::EpsilonSoftmax: return "es";
    }
    return "?";
}

inline PolicyKind parse_policy_kind(const std::string& s) {
    if (s == "eg") return PolicyKind::EpsilonGreedy;
    if (s == "so") return PolicyKind::Softmax;
    if (s == "es") return PolicyKind::EpsilonSoftmax;
    throw std::invalid_argument("unknown policy '" + s + "' (expected eg, so, or es)");
}

/// Greedy action with ties broken to the lowest action id.
inline int argmax_action(std::span<const double> q_row) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(q_row.size()); ++a)
        if (q_row[a] > q_row[best]) best = a;
    return best;
}

/// Softmax of the raw Q values (temperature 1), max-subtracted so that
/// exponentials cannot overflow.
inline std::vector<double> softmax(std::span<const double> q_row) {
    double m = *std::max_element(q_row.begin(), q_row.end());
    std::vector<double> p(q_row.size());
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        p[a] = std::exp(q_row[a] - m);
        z += p[a];
    }
    for (double& v : p) v /= z;
    return p;
}

/// The probability each action would be selected under the policy.
inline std::vector<double> action_probabilities(const ExplorationPolicy& pol,
                                                std::span<const double> q_row) {
    if (q_row.size() < 2) throw std::invalid_argument("action_probabilities: need at least 2 actions");
    for (double q : q_row)
        if (std::isnan(q)) throw std::invalid_argument("action_probabilities: NaN Q value");
    const auto n = q_row.size();
    switch (pol.kind) {
        case PolicyKind::EpsilonGreedy: {
            std::vector<double> p(n, pol.epsilon / static_cast<double>(n));
            p[argmax_action(q_row)] += 1.0 - pol.epsilon;
            return p;
        }
        case PolicyKind::Softmax:
            return softmax(q_row);
        case PolicyKind::EpsilonSoftmax: {
            std::vector<double> p = softmax(q_row);
            double u = pol.epsilon / static_cast<double>(n);
            for (double& v : p) v = u + (1.0 - pol.epsilon) * v;
            return p;
        }
    }
    throw std::logic_error("unreachable");
}

/// Samples an action by inverse CDF over action_probabilities, in action-id order.
inline int select_action(const ExplorationPolicy& pol, std::span<const double> q_row, Rng& rng) {
    std::vector<double> p = action_probabilities(pol, q_row);
    double u = rng.uniform01();
    double cum = 0.0;
    for (std::size_t a = 0; a + 1 < p.size(); ++a) {
        cum += p[a];
        if (u < cum) return static_cast<int>(a);
    }
    return static_cast<int>(p.size()) - 1;
}

}  // namespace whittle
