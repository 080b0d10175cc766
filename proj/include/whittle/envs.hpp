#pragma once

#include <cmath>
#include <stdexcept>

#include "whittle/model.hpp"

namespace whittle {

/// 4-state arm with circular dynamics; the active action reverses the
/// rotation (P1 is the transpose of P0).
inline MdpModel make_circular() {
    MdpModel m;
    m.n_states = 4;
    m.p0 = Matrix::from_rows({{0.5, 0.0, 0.0, 0.5},
                              {0.5, 0.5, 0.0, 0.0},
                              {0.0, 0.5, 0.5, 0.0},
                              {0.0, 0.0, 0.5, 0.5}});
    m.p1 = Matrix(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m.p1(i, j) = m.p0(j, i);
    m.rewards = Matrix::from_rows({{-1.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}});
    validate(m);
    return m;
}

/// 5-state arm with no structure on the transition matrices. Passive reward
/// increases along states, active reward decreases.
inline MdpModel make_unstructured() {
    MdpModel m;
    m.n_states = 5;
    m.p0 = Matrix::from_rows({{0.1502, 0.0400, 0.4156, 0.0300, 0.3642},
                              {0.4000, 0.3500, 0.0800, 0.1200, 0.0500},
                              {0.5276, 0.0400, 0.3991, 0.0200, 0.0133},
                              {0.0500, 0.1000, 0.1500, 0.2000, 0.5000},
                              {0.0191, 0.0100, 0.0897, 0.0300, 0.8512}});
    m.p1 = Matrix::from_rows({{0.7196, 0.0500, 0.0903, 0.0100, 0.1301},
                              {0.5500, 0.2000, 0.0500, 0.0800, 0.1200},
                              {0.1903, 0.0100, 0.1663, 0.0100, 0.6234},
                              {0.2000, 0.0500, 0.1500, 0.1000, 0.5000},
                              {0.2501, 0.0100, 0.3901, 0.0300, 0.3198}});
    m.rewards = Matrix::from_rows({{0.4580, 0.9631},
                                   {0.5100, 0.8100},
                                   {0.6508, 0.7963},
                                   {0.6710, 0.6061},
                                   {0.6873, 0.5057}});
    validate(m);
    return m;
}

/// 5-state restart arm: the active action deterministically resets the chain
/// to state 0 and pays nothing; staying passive earns 0.9^k in state k.
inline MdpModel make_restart() {
    MdpModel m;
    m.n_states = 5;
    m.p0 = Matrix::from_rows({{0.1, 0.9, 0.0, 0.0, 0.0},
                              {0.1, 0.0, 0.9, 0.0, 0.0},
                              {0.1, 0.0, 0.0, 0.9, 0.0},
                              {0.1, 0.0, 0.0, 0.0, 0.9},
                              {0.1, 0.0, 0.0, 0.0, 0.9}});
    m.p1 = Matrix(5, 5);
    for (int s = 0; s < 5; ++s) m.p1(s, 0) = 1.0;
    m.rewards = Matrix(5, 2);
    for (int k = 0; k < 5; ++k) {
        m.rewards(k, 0) = std::pow(0.9, k);
        m.rewards(k, 1) = 0.0;
    }
    validate(m);
    return m;
}

/// One-step random walk on K states, identical dynamics for both actions,
/// with upward drift. Active reward rho^k, passive reward 0.
///
/// The boundary rows follow the printed K=5 pattern: the first row puts
/// (3/10, 7/10) on states (0, 1) and the last row (3/10, 7/10) on states
/// (K-2, K-1). rho defaults to 0.95, the exponent of the K=25 instance.
inline MdpModel make_random_walk(int k_states, double rho = 0.95) {
    if (k_states < 2) throw std::invalid_argument("make_random_walk: K must be at least 2");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("make_random_walk: rho must be in (0,1)");
    MdpModel m;
    m.n_states = k_states;
    m.p0 = Matrix(k_states, k_states);
    m.p0(0, 0) = 0.3;
    m.p0(0, 1) = 0.7;
    for (int k = 1; k + 1 < k_states; ++k) {
        m.p0(k, k - 1) = 0.1;
        m.p0(k, k) = 0.2;
        m.p0(k, k + 1) = 0.7;
    }
    m.p0(k_states - 1, k_states - 2) = 0.3;
    m.p0(k_states - 1, k_states - 1) = 0.7;
    m.p1 = m.p0;
    m.rewards = Matrix(k_states, 2);
    for (int k = 0; k < k_states; ++k) {
        m.rewards(k, 0) = 0.0;
        m.rewards(k, 1) = std::pow(rho, k);
    }
    validate(m);
    return m;
}

}  // namespace whittle
