#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace whittle {

/// One sampled point of a run's error curve.
struct CurvePoint {
    std::uint64_t iteration = 0;
    double error = 0.0;
    double wallclock_ms = 0.0;
};

/// End-of-run summary row, mirroring the layout of the comparison tables.
struct RunSummary {
    std::string algorithm;
    std::string policy;
    std::uint64_t iterations = 0;
    double compute_time_min = 0.0;
    double final_error = 0.0;
};

/// Per-iteration metric stream plus the summary row.
struct RunRecord {
    std::vector<CurvePoint> curve;
    RunSummary summary;

    void push(std::uint64_t iteration, double error, double wallclock_ms) {
        curve.push_back(CurvePoint{iteration, error, wallclock_ms});
    }
    void finish(std::string algorithm, std::string policy, std::uint64_t iterations,
                double wallclock_ms) {
        summary.algorithm = std::move(algorithm);
        summary.policy = std::move(policy);
        summary.iterations = iterations;
        summary.compute_time_min = wallclock_ms / 60000.0;
        summary.final_error = curve.empty() ? std::nan("") : curve.back().error;
    }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Root-mean-square gap between the greedy values of a learned Q table and
/// the oracle optimal values. QT must expose n_states and max_value(s).
template <class QT>
double delta_v(const QT& q, std::span<const double> v_star) {
    if (static_cast<std::size_t>(q.n_states) != v_star.size())
        throw std::invalid_argument("delta_v: dimension mismatch");
    double sum = 0.0;
    for (int s = 0; s < q.n_states; ++s) {
        double d = q.max_value(s) - v_star[s];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(q.n_states));
}

/// Maximum absolute action gap at the threshold states,
/// max over s of |Q(s,1,s) - Q(s,0,s)|. QT must expose n_states and at(s,a,s_tilde).
template <class QT>
double delta_lambda(const QT& q) {
    double m = 0.0;
    for (int s = 0; s < q.n_states; ++s) m = std::max(m, std::abs(q.at(s, 1, s) - q.at(s, 0, s)));
    return m;
}

/// Worst-state deviation of learned indices from oracle indices.
template <class IT>
double index_error(const IT& learned, std::span<const double> oracle) {
    if (learned.lambdas.size() != oracle.size())
        throw std::invalid_argument("index_error: dimension mismatch");
    double m = 0.0;
    for (std::size_t s = 0; s < oracle.size(); ++s)
        m = std::max(m, std::abs(learned.lambdas[s] - oracle[s]));
    return m;
}

}  // namespace whittle
