#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "whittle/explore.hpp"
#include "whittle/metrics.hpp"
#include "whittle/model.hpp"
#include "whittle/oracle.hpp"
#include "whittle/rng.hpp"
#include "whittle/tabular.hpp"
#include "whittle/windex.hpp"

namespace whittle {

/// Fully-connected network with rectified hidden layers and a linear output
/// head, evaluated on one-hot state encodings. Doubles throughout.
struct Mlp {
    struct Layer {
        Matrix w;                // out x in
        std::vector<double> b;   // out
    };
    std::vector<int> sizes;      // e.g. {n_states, 32, 32, 2}
    std::vector<Layer> layers;

    /// Glorot-uniform initialization, drawn from `rng`.
    static Mlp make(std::vector<int> layer_sizes, Rng& rng) {
        if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
        Mlp net;
        net.sizes = std::move(layer_sizes);
        for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
            int in = net.sizes[l], out = net.sizes[l + 1];
            Layer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
            double a = std::sqrt(6.0 / static_cast<double>(in + out));
            for (int i = 0; i < out; ++i)
                for (int j = 0; j < in; ++j) layer.w(i, j) = rng.uniform(-a, a);
            net.layers.push_back(std::move(layer));
        }
        return net;
    }

    /// Same shape, all parameters zero. Used as a gradient accumulator.
    Mlp zeros_like() const {
        Mlp g;
        g.sizes = sizes;
        for (const Layer& l : layers)
            g.layers.push_back(Layer{Matrix(l.w.rows(), l.w.cols()),
                                     std::vector<double>(l.b.size(), 0.0)});
        return g;
    }

    int n_inputs() const { return sizes.front(); }
    int n_outputs() const { return sizes.back(); }
};

namespace detail {

/// Forward pass on a one-hot input, keeping pre-activations for backprop.
/// acts[l] holds the post-activation output of layer l; acts.back() is the
/// linear output.
inline void mlp_forward_cached(const Mlp& net, int s, std::vector<std::vector<double>>& acts) {
    const std::size_t depth = net.layers.size();
    acts.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        const Mlp::Layer& layer = net.layers[l];
        const int out = layer.w.rows();
        std::vector<double>& z = acts[l];
        z.assign(out, 0.0);
        if (l == 0) {
            for (int i = 0; i < out; ++i) z[i] = layer.w(i, s) + layer.b[i];
        } else {
            const std::vector<double>& x = acts[l - 1];
            const int in = layer.w.cols();
            for (int i = 0; i < out; ++i) {
                double acc = layer.b[i];
                for (int j = 0; j < in; ++j) acc += layer.w(i, j) * x[j];
                z[i] = acc;
            }
        }
        if (l + 1 < depth)
            for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
}

/// Accumulates the gradient of 0.5 * (Q(s,a) - target)^2 into `grad`.
/// Returns the loss. `acts` is scratch reused across calls.
inline double mlp_backward_accumulate(const Mlp& net, int s, int a, double target, Mlp& grad,
                                      std::vector<std::vector<double>>& acts) {
    mlp_forward_cached(net, s, acts);
    const std::size_t depth = net.layers.size();
    double diff = acts.back()[a] - target;

    std::vector<double> delta(acts.back().size(), 0.0);
    delta[a] = diff;  // identity output: upstream error hits only the chosen action's unit

    for (std::size_t l = depth; l-- > 0;) {
        const Mlp::Layer& layer = net.layers[l];
        Mlp::Layer& g = grad.layers[l];
        const int out = layer.w.rows();
        if (l == 0) {
            for (int i = 0; i < out; ++i) {
                g.w(i, s) += delta[i];  // one-hot input: only column s receives gradient
                g.b[i] += delta[i];
            }
            break;
        }
        const std::vector<double>& x = acts[l - 1];
        const int in = layer.w.cols();
        std::vector<double> prev(in, 0.0);
        for (int i = 0; i < out; ++i) {
            double d = delta[i];
            if (d == 0.0) continue;
            g.b[i] += d;
            for (int j = 0; j < in; ++j) {
                g.w(i, j) += d * x[j];
                prev[j] += d * layer.w(i, j);
            }
        }
        // Rectifier gate: units that were clamped to zero pass no gradient.
        for (int j = 0; j < in; ++j)
            if (x[j] <= 0.0) prev[j] = 0.0;
        delta = std::move(prev);
    }
    return 0.5 * diff * diff;
}

}  // namespace detail

/// Q values for every action of state s.
inline std::vector<double> forward(const Mlp& net, int s) {
    if (s < 0 || s >= net.n_inputs()) throw std::invalid_argument("forward: state out of range");
    std::vector<std::vector<double>> acts;
    detail::mlp_forward_cached(net, s, acts);
    return acts.back();
}

/// Gradient of the squared-error loss 0.5 * (Q(s,a) - target)^2 with respect
/// to every parameter, as an Mlp-shaped container.
inline Mlp backward(const Mlp& net, int s, int a, double target) {
    if (!std::isfinite(target)) throw std::invalid_argument("backward: target must be finite");
    Mlp grad = net.zeros_like();
    std::vector<std::vector<double>> acts;
    detail::mlp_backward_accumulate(net, s, a, target, grad, acts);
    return grad;
}

/// Plain gradient step theta <- theta - stepsize * gradient.
inline void sgd_step(Mlp& net, const Mlp& grad, double stepsize) {
    if (!(stepsize > 0.0)) throw std::invalid_argument("sgd_step: stepsize must be positive");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& w = net.layers[l].w.data();
        const auto& gw = grad.layers[l].w.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= stepsize * gw[i];
        auto& b = net.layers[l].b;
        const auto& gb = grad.layers[l].b;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= stepsize * gb[i];
    }
}

/// Target-network blend. The printed rule is theta_bar <- tau * theta_bar +
/// (1 - tau) * theta; pass conventional_polyak = true for the usual
/// theta_bar <- (1 - tau) * theta_bar + tau * theta instead.
inline void soft_update(Mlp& target, const Mlp& online, double tau,
                        bool conventional_polyak = false) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in [0,1]");
    double keep = conventional_polyak ? 1.0 - tau : tau;
    double take = 1.0 - keep;
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        auto& w = target.layers[l].w.data();
        const auto& ow = online.layers[l].w.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = keep * w[i] + take * ow[i];
        auto& b = target.layers[l].b;
        const auto& ob = online.layers[l].b;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = keep * b[i] + take * ob[i];
    }
}

/// Fixed-capacity experience store with strict FIFO eviction.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity) : capacity_(capacity) {
        if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
        entries_.reserve(static_cast<std::size_t>(capacity));
    }

    void push(const Transition& t) {
        if (size() < capacity_) {
            entries_.push_back(t);
        } else {
            entries_[cursor_] = t;
            cursor_ = (cursor_ + 1) % static_cast<std::size_t>(capacity_);
        }
    }

    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    const Transition& operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }

    /// Uniform sample of k distinct entries (Floyd's algorithm), returned in
    /// ascending index order for deterministic accumulation.
    std::vector<Transition> sample(int k, Rng& rng) const {
        if (k > size()) throw std::invalid_argument("ReplayBuffer::sample: not enough entries");
        std::set<int> picked;
        for (int i = size() - k; i < size(); ++i) {
            int j = rng.uniform_int(i + 1);
            if (!picked.insert(j).second) picked.insert(i);
        }
        std::vector<Transition> out;
        out.reserve(static_cast<std::size_t>(k));
        for (int idx : picked) out.push_back(entries_[static_cast<std::size_t>(idx)]);
        return out;
    }

private:
    int capacity_;
    std::vector<Transition> entries_;
    std::size_t cursor_ = 0;  // next FIFO victim once full
};

/// Hyper-parameters of the DQN index learner. Defaults are the stock
/// configuration for the K=5 random-walk benchmark. The network stepsize is
/// deliberately the smaller of the two: with 100 outer iterations, an index
/// stepsize of 0.01 could move a subsidy at most 63% of the way from 0 to
/// its target, so the index stepsize carries the larger constant.
struct DqnConfig {
    double net_stepsize = 0.01;    // fast-timescale gradient stepsize
    double index_stepsize = 0.05;  // slow-timescale subsidy stepsize
    double beta = 0.9;             // discount factor
    double tau = 0.001;            // target blend weight
    double delta = 0.001;          // stopping threshold on the action gap
    int minibatch = 64;
    int t_max = 500;               // fast steps per slice per outer iteration
    int k_max = 100;               // outer iterations
    int memory_size = 10000;
    int hidden = 32;
    int hidden_layers = 2;
    double eps_init = 0.1;
    DecaySchedule eps_decay{0.99, 20, 0.01};
    bool conventional_polyak = false;  // false = soft update exactly as printed

    void check() const {
        if (!(index_stepsize > 0.0 && index_stepsize < 1.0 && net_stepsize > 0.0 &&
              net_stepsize < 1.0))
            throw std::invalid_argument("DqnConfig: stepsizes must lie in (0,1)");
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("DqnConfig: tau must be in (0,1)");
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("DqnConfig: beta must be in [0,1)");
        if (minibatch < 1 || t_max < 1 || k_max < 1 || memory_size < minibatch)
            throw std::invalid_argument("DqnConfig: bad loop sizes");
        if (!(eps_decay.floor <= eps_init)) throw std::invalid_argument("DqnConfig: eps floor above init");
    }
};

/// Exploration policy matching the DQN schedule in the config.
inline ExplorationPolicy dqn_policy(const DqnConfig& cfg, PolicyKind kind) {
    return ExplorationPolicy{kind, cfg.eps_init, cfg.eps_decay};
}

struct DqnRunResult {
    IndexTable index;
    RunRecord record;
    std::vector<double> index_error_curve;  // parallel to record.curve; empty without oracle
    std::vector<double> loss_curve;         // mean minibatch loss per outer iteration
    bool converged = false;
    std::uint64_t outer_iterations = 0;
};

/// Two-timescale index learning with a DQN on the fast timescale: one
/// online/target net pair and one replay buffer per threshold state. Every
/// environment step stores a transition and, once the buffer can fill a
/// minibatch, takes one averaged gradient step toward the target-net values
/// followed by a soft target update. Subsidies follow the target-net action
/// gaps at the threshold states.
inline DqnRunResult run_dqn_index_learning(const MdpModel& model, const DqnConfig& cfg,
                                           const ExplorationPolicy& policy, ReinitScheme scheme,
                                           Rng& rng, const std::vector<double>* oracle = nullptr) {
    cfg.check();
    if (oracle && oracle->size() != static_cast<std::size_t>(model.n_states))
        throw std::invalid_argument("run_dqn_index_learning: oracle probe has wrong length");

    const int n = model.n_states;
    std::vector<int> sizes{n};
    for (int l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(cfg.hidden);
    sizes.push_back(2);

    std::vector<Rng> streams;
    std::vector<Mlp> online, target;
    std::vector<ReplayBuffer> buffers;
    std::vector<ReinitScheme> schemes(static_cast<std::size_t>(n), scheme);
    std::vector<std::uint64_t> counters(static_cast<std::size_t>(n), 0);
    std::vector<double> eps(static_cast<std::size_t>(n), cfg.eps_init);
    for (int sl = 0; sl < n; ++sl) {
        streams.push_back(rng.fork(1 + static_cast<std::uint64_t>(sl)));
        online.push_back(Mlp::make(sizes, streams.back()));
        target.push_back(online.back());
        buffers.emplace_back(cfg.memory_size);
        schemes[sl].reset_counts(n);
    }

    DqnRunResult out;
    out.index = IndexTable(n, index_bound(model, cfg.beta));
    Stopwatch clock;
    Mlp grad = online.front().zeros_like();
    std::vector<std::vector<double>> acts, acts_eval;

    auto zero_grad = [&grad]() {
        for (auto& layer : grad.layers) {
            std::fill(layer.w.data().begin(), layer.w.data().end(), 0.0);
            std::fill(layer.b.begin(), layer.b.end(), 0.0);
        }
    };

    auto target_gap = [&](int sl) {
        std::vector<double> q = forward(target[sl], sl);
        return q[1] - q[0];
    };

    std::vector<double> gaps(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < cfg.k_max; ++k) {
        double loss_sum = 0.0;
        std::uint64_t loss_count = 0;
        for (int sl = 0; sl < n; ++sl) {
            Rng& slice_rng = streams[sl];
            Mlp& net = online[sl];
            Mlp& tgt = target[sl];
            ReplayBuffer& buf = buffers[sl];
            const double subsidy = out.index.lambdas[sl];
            int s = slice_rng.uniform_int(n);
            for (int t = 0; t < cfg.t_max; ++t) {
                if (counters[sl] > 0 &&
                    counters[sl] % static_cast<std::uint64_t>(policy.decay ? policy.decay->period
                                                                           : cfg.eps_decay.period) == 0) {
                    const DecaySchedule& d = policy.decay ? *policy.decay : cfg.eps_decay;
                    eps[sl] = std::max(d.floor, eps[sl] * d.rate);
                }
                s = maybe_reinit(schemes[sl], counters[sl], s, slice_rng);
                ExplorationPolicy step_policy{policy.kind, eps[sl], {}};
                detail::mlp_forward_cached(net, s, acts_eval);
                int a = select_action(step_policy, acts_eval.back(), slice_rng);
                Transition tr = step(model, s, a, slice_rng);
                buf.push(tr);
                schemes[sl].note_update(tr.state, tr.action);
                ++counters[sl];
                s = tr.next_state;

                if (buf.size() >= cfg.minibatch) {
                    std::vector<Transition> batch = buf.sample(cfg.minibatch, slice_rng);
                    zero_grad();
                    double batch_loss = 0.0;
                    for (const Transition& b : batch) {
                        detail::mlp_forward_cached(tgt, b.next_state, acts_eval);
                        const std::vector<double>& qn = acts_eval.back();
                        double best_next = qn[0] > qn[1] ? qn[0] : qn[1];
                        double y = b.reward + (b.action == 0 ? subsidy : 0.0) +
                                   cfg.beta * best_next;
                        batch_loss += detail::mlp_backward_accumulate(net, b.state, b.action, y,
                                                                      grad, acts);
                    }
                    double inv = 1.0 / static_cast<double>(cfg.minibatch);
                    for (auto& layer : grad.layers) {
                        for (double& v : layer.w.data()) v *= inv;
                        for (double& v : layer.b) v *= inv;
                    }
                    sgd_step(net, grad, cfg.net_stepsize);
                    soft_update(tgt, net, cfg.tau, cfg.conventional_polyak);
                    loss_sum += batch_loss * inv;
                    ++loss_count;
                }
            }
        }

        double max_gap = 0.0;
        for (int sl = 0; sl < n; ++sl) {
            gaps[sl] = target_gap(sl);
            max_gap = std::max(max_gap, std::abs(gaps[sl]));
            detail::apply_index_step(out.index.lambdas[sl], gaps[sl], cfg.index_stepsize,
                                     out.index.bound);
        }

        out.outer_iterations = static_cast<std::uint64_t>(k) + 1;
        out.record.push(out.outer_iterations, max_gap, clock.elapsed_ms());
        if (oracle) out.index_error_curve.push_back(index_error(out.index, *oracle));
        out.loss_curve.push_back(loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
        if (max_gap < cfg.delta) {
            out.converged = true;
            break;
        }
    }
    out.record.finish("index_dqn", policy_label(policy.kind), out.outer_iterations,
                      clock.elapsed_ms());
    return out;
}

}  // namespace whittle
