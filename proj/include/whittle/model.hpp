#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/rng.hpp"

namespace whittle {

/// Dense row-major matrix of doubles. Just enough for transition and reward
/// tables; not a linear-algebra type.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(static_cast<int>(rows.size()),
                 rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
        int r = 0;
        for (const auto& row : rows) {
            int c = 0;
            for (double v : row) m(r, c++) = v;
            ++r;
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// A finite-state two-action restless arm: transition matrices for the
/// passive (0) and active (1) actions and a per-state-action reward table.
struct MdpModel {
    int n_states = 0;
    Matrix p0;       // n_states x n_states, row-stochastic
    Matrix p1;       // n_states x n_states, row-stochastic
    Matrix rewards;  // n_states x 2

    const Matrix& transitions(int action) const { return action == 0 ? p0 : p1; }
    double reward(int s, int a) const { return rewards(s, a); }

    double max_reward() const { return *std::max_element(rewards.data().begin(), rewards.data().end()); }
    double min_reward() const { return *std::min_element(rewards.data().begin(), rewards.data().end()); }
    double reward_span() const { return max_reward() - min_reward(); }
    double abs_reward_max() const {
        double m = 0.0;
        for (double r : rewards.data()) m = std::max(m, std::abs(r));
        return m;
    }
};

/// One step of experience: (s, a, r, s').
struct Transition {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

/// Checks the stochastic-matrix and finite-reward invariants.
/// Throws std::invalid_argument naming the offending row.
inline void validate(const MdpModel& m) {
    if (m.n_states < 1) throw std::invalid_argument("model: n_states must be positive");
    auto check_stochastic = [&](const Matrix& p, const char* name) {
        if (p.rows() != m.n_states || p.cols() != m.n_states)
            throw std::invalid_argument(std::string("model: ") + name + " has wrong shape");
        for (int s = 0; s < m.n_states; ++s) {
            double sum = 0.0;
            for (int t = 0; t < m.n_states; ++t) {
                double v = p(s, t);
                if (!(v >= 0.0))
                    throw std::invalid_argument(std::string("model: ") + name + " row " +
                                                std::to_string(s) + " has a negative entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument(std::string("model: ") + name + " row " +
                                            std::to_string(s) + " sums to " + std::to_string(sum));
        }
    };
    check_stochastic(m.p0, "p0");
    check_stochastic(m.p1, "p1");
    if (m.rewards.rows() != m.n_states || m.rewards.cols() != 2)
        throw std::invalid_argument("model: rewards must be n_states x 2");
    for (double r : m.rewards.data())
        if (!std::isfinite(r)) throw std::invalid_argument("model: rewards must be finite");
}

/// Samples one transition. The next state is drawn by inverse CDF over the
/// row of P^a in ascending column order, which pins tie behavior and keeps
/// runs reproducible across platforms.
inline Transition step(const MdpModel& m, int s, int a, Rng& rng) {
    const Matrix& p = m.transitions(a);
    double u = rng.uniform01();
    double cum = 0.0;
    int next = m.n_states - 1;
    for (int t = 0; t < m.n_states; ++t) {
        cum += p(s, t);
        if (u < cum) {
            next = t;
            break;
        }
    }
    // Guard against cumulative rounding: never land on a zero-probability state.
    while (next > 0 && p(s, next) == 0.0) --next;
    return Transition{s, a, m.reward(s, a), next};
}

}  // namespace whittle
