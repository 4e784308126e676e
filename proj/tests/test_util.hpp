// Copyright 2026 The hqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Shared generators and independent dense-matrix oracles for the test suites.

#include <cmath>
#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hqc/circuit.hpp"
#include "hqc/rng.hpp"
#include "hqc/statevector.hpp"

namespace hqc::testutil {

struct RandomCircuitOptions {
    std::size_t n_qubits = 4;
    std::size_t n_gates = 20;
    bool nearest_neighbor = false;
    bool with_measure = false;
};

inline Gate random_gate(Rng &rng, std::size_t n, bool nearest_neighbor) {
    static constexpr GateKind kKinds[] = {GateKind::H,  GateKind::X,  GateKind::Y,   GateKind::Z,  GateKind::S,
                                          GateKind::Sdg, GateKind::T, GateKind::Tdg, GateKind::RX, GateKind::RY,
                                          GateKind::RZ, GateKind::RZZ, GateKind::CX, GateKind::CZ};
    constexpr std::size_t kCount = sizeof(kKinds) / sizeof(kKinds[0]);
    GateKind kind = kKinds[rng.below(n >= 2 ? kCount : kCount - 3)];
    std::vector<std::size_t> qubits;
    if (gate_arity(kind) == 2) {
        std::size_t a, b;
        if (nearest_neighbor) {
            a = rng.below(n - 1);
            b = a + 1;
            if (rng.below(2)) {
                std::swap(a, b);
            }
        } else {
            a = rng.below(n);
            do {
                b = rng.below(n);
            } while (b == a);
        }
        qubits = {a, b};
    } else {
        qubits = {static_cast<std::size_t>(rng.below(n))};
    }
    std::optional<Param> param;
    if (is_rotation(kind)) {
        param = Param(rng.uniform(-std::numbers::pi, std::numbers::pi));
    }
    return Gate{kind, qubits, param, nullptr, {}};
}

inline Circuit random_circuit(Rng &rng, const RandomCircuitOptions &opt) {
    Circuit c(opt.n_qubits);
    for (std::size_t i = 0; i < opt.n_gates; ++i) {
        c.append(random_gate(rng, opt.n_qubits, opt.nearest_neighbor));
    }
    if (opt.with_measure) {
        for (std::size_t q = 0; q < opt.n_qubits; ++q) {
            c.append(gates::measure(q));
        }
    }
    return c;
}

/// Embeds a gate into the full 2^n space by brute-force index matching.
inline Eigen::MatrixXcd full_matrix(const Gate &g, std::size_t n) {
    const Eigen::MatrixXcd local = gate_matrix(g);
    const std::size_t dim = std::size_t{1} << n;
    std::size_t mask = 0;
    for (std::size_t q : g.qubits) {
        mask |= std::size_t{1} << q;
    }
    auto sub_index = [&](std::size_t idx) {
        std::size_t s = 0;
        for (std::size_t j = 0; j < g.qubits.size(); ++j) {
            if ((idx >> g.qubits[j]) & 1) {
                s |= std::size_t{1} << j;
            }
        }
        return s;
    };
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~mask) == (c & ~mask)) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = local(
                    static_cast<Eigen::Index>(sub_index(r)), static_cast<Eigen::Index>(sub_index(c)));
            }
        }
    }
    return m;
}

inline Eigen::MatrixXcd circuit_unitary(const Circuit &c) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << c.n_qubits());
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const Gate &g : c.gates()) {
        if (g.kind != GateKind::Measure) {
            u = full_matrix(g, c.n_qubits()) * u;
        }
    }
    return u;
}

inline Eigen::VectorXcd to_eigen(const StateVector &s) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(s.amplitudes().size()));
    for (std::size_t i = 0; i < s.amplitudes().size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = s.amplitudes()[i];
    }
    return v;
}

inline double fidelity(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b) {
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

/// Schmidt entropies (bits) of every bond computed from reduced density
/// matrices of a dense state: rho_A = M M^† with M[low, high].
inline std::vector<double> statevector_bond_entropies(const StateVector &s) {
    const std::size_t n = s.n_qubits();
    std::vector<double> out;
    for (std::size_t bond = 0; bond + 1 < n; ++bond) {
        const std::size_t low_dim = std::size_t{1} << (bond + 1);
        const std::size_t high_dim = std::size_t{1} << (n - bond - 1);
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(low_dim), static_cast<Eigen::Index>(high_dim));
        for (std::size_t h = 0; h < high_dim; ++h) {
            for (std::size_t l = 0; l < low_dim; ++l) {
                m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(h)) = s[l + low_dim * h];
            }
        }
        // Both reduced states share a spectrum; diagonalize the smaller one.
        const Eigen::MatrixXcd rho = low_dim <= high_dim ? Eigen::MatrixXcd(m * m.adjoint())
                                                         : Eigen::MatrixXcd(m.adjoint() * m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        double entropy = 0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double p = es.eigenvalues()[i];
            if (p > 1e-15) {
                entropy -= p * std::log2(p);
            }
        }
        out.push_back(entropy);
    }
    return out;
}

/// Independent bond scan: entropies from dense reduced density matrices at
/// every gate boundary, max over time, lowest score among bonds whose
/// fragments fit `max_fragment` and differ by at most `imbalance_tol`;
/// ties (1e-9) go to the more balanced bond, then the lower index.
inline std::size_t exhaustive_bond_scan(const Circuit &c, std::size_t max_fragment, std::size_t imbalance_tol) {
    const std::size_t n = c.n_qubits();
    std::vector<double> score(n - 1, 0.0);
    StateVector state(n);
    auto fold = [&] {
        const auto e = statevector_bond_entropies(state);
        for (std::size_t k = 0; k < e.size(); ++k) score[k] = std::max(score[k], e[k]);
    };
    fold();
    for (const Gate &g : c.gates()) {
        state.apply(g);
        fold();
    }
    std::optional<std::size_t> best;
    std::size_t best_imbalance = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t a = k + 1, b = n - a;
        const std::size_t imbalance = a > b ? a - b : b - a;
        if (std::max(a, b) > max_fragment || imbalance > imbalance_tol) continue;
        if (!best || score[k] < score[*best] - 1e-9 ||
            (std::abs(score[k] - score[*best]) <= 1e-9 && imbalance < best_imbalance)) {
            best = k;
            best_imbalance = imbalance;
        }
    }
    if (!best) throw std::invalid_argument("no feasible bond");
    return *best;
}

}  // namespace hqc::testutil
