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

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqc/circuit.hpp"
#include "hqc/rng.hpp"

namespace hqc {

/// Largest register the dense simulator accepts (2^24 amplitudes, 256 MiB).
inline constexpr std::size_t kMaxStatevectorQubits = 24;

/// Dense 2^n amplitude vector, little-endian (qubit 0 = lowest index bit).
class StateVector {
  public:
    /// |0...0>.
    explicit StateVector(std::size_t n_qubits) : n_(n_qubits) {
        check_cap(n_qubits);
        amps_.assign(std::size_t{1} << n_qubits, cplx(0.0));
        amps_[0] = 1.0;
    }

    StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
        check_cap(n_qubits);
        if (amps_.size() != (std::size_t{1} << n_qubits)) {
            throw CircuitError("amplitude count does not match 2^n");
        }
    }

    std::size_t n_qubits() const {
        return n_;
    }
    const std::vector<cplx> &amplitudes() const {
        return amps_;
    }
    std::vector<cplx> &amplitudes() {
        return amps_;
    }
    cplx operator[](std::size_t index) const {
        return amps_[index];
    }

    double norm_squared() const {
        double s = 0;
        for (const cplx &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    void normalize() {
        const double n = std::sqrt(norm_squared());
        if (n == 0.0) {
            throw std::runtime_error("cannot normalize a zero state");
        }
        for (cplx &a : amps_) {
            a /= n;
        }
    }

    /// Applies a bound gate in place. Measure markers are ignored.
    void apply(const Gate &g) {
        if (g.kind == GateKind::Measure) {
            return;
        }
        validate_gate(g, n_);
        if (g.param && g.param->is_symbolic()) {
            throw CircuitError("gate parameter '" + g.param->symbol() + "' is unbound");
        }
        const Eigen::MatrixXcd m = gate_matrix(g);
        if (g.qubits.size() == 1) {
            apply_1q(g.qubits[0], m(0, 0), m(0, 1), m(1, 0), m(1, 1));
        } else if (g.qubits.size() == 2 && g.kind != GateKind::Unitary) {
            apply_2q(g.qubits[0], g.qubits[1], m);
        } else {
            apply_dense(g.qubits, m);
        }
    }

    /// Single-qubit kernel over amplitude pairs (i, i | 1<<q).
    void apply_1q(std::size_t q, cplx m00, cplx m01, cplx m10, cplx m11) {
        const std::size_t stride = std::size_t{1} << q;
        const std::size_t dim = amps_.size();
        for (std::size_t base = 0; base < dim; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const cplx a0 = amps_[i];
                const cplx a1 = amps_[i + stride];
                amps_[i] = m00 * a0 + m01 * a1;
                amps_[i + stride] = m10 * a0 + m11 * a1;
            }
        }
    }

    void apply_1q(std::size_t q, const Eigen::Matrix2cd &m) {
        apply_1q(q, m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    }

    /// Projects qubit q onto |outcome> without renormalizing.
    void project(std::size_t q, int outcome) {
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (((i & bit) != 0) != (outcome != 0)) {
                amps_[i] = 0.0;
            }
        }
    }

    /// Probability of measuring |1> on qubit q (relative to the current norm).
    double probability_one(std::size_t q) const {
        const std::size_t bit = std::size_t{1} << q;
        double p1 = 0, total = 0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const double p = std::norm(amps_[i]);
            total += p;
            if (i & bit) {
                p1 += p;
            }
        }
        return total > 0 ? p1 / total : 0.0;
    }

  private:
    static void check_cap(std::size_t n) {
        if (n == 0) {
            throw CircuitError("state needs at least one qubit");
        }
        if (n > kMaxStatevectorQubits) {
            throw CircuitError("statevector cap exceeded: " + std::to_string(n) + " > " +
                               std::to_string(kMaxStatevectorQubits) + " qubits");
        }
    }

    void apply_2q(std::size_t qa, std::size_t qb, const Eigen::MatrixXcd &m) {
        const std::size_t ba = std::size_t{1} << qa;
        const std::size_t bb = std::size_t{1} << qb;
        const std::size_t dim = amps_.size();
        cplx mm[4][4];
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                mm[r][c] = m(r, c);
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & ba) || (i & bb)) {
                continue;
            }
            const std::size_t idx[4] = {i, i | ba, i | bb, i | ba | bb};
            cplx in[4];
            for (int k = 0; k < 4; ++k) {
                in[k] = amps_[idx[k]];
            }
            for (int r = 0; r < 4; ++r) {
                amps_[idx[r]] = mm[r][0] * in[0] + mm[r][1] * in[1] + mm[r][2] * in[2] + mm[r][3] * in[3];
            }
        }
    }

    void apply_dense(const std::vector<std::size_t> &qubits, const Eigen::MatrixXcd &m) {
        const std::size_t k = qubits.size();
        const std::size_t sub = std::size_t{1} << k;
        std::size_t mask = 0;
        std::vector<std::size_t> offsets(sub, 0);
        for (std::size_t j = 0; j < k; ++j) {
            mask |= std::size_t{1} << qubits[j];
        }
        for (std::size_t s = 0; s < sub; ++s) {
            for (std::size_t j = 0; j < k; ++j) {
                if ((s >> j) & 1) {
                    offsets[s] |= std::size_t{1} << qubits[j];
                }
            }
        }
        Eigen::VectorXcd in(static_cast<Eigen::Index>(sub));
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) {
                continue;
            }
            for (std::size_t s = 0; s < sub; ++s) {
                in[static_cast<Eigen::Index>(s)] = amps_[i | offsets[s]];
            }
            const Eigen::VectorXcd out = m * in;
            for (std::size_t s = 0; s < sub; ++s) {
                amps_[i | offsets[s]] = out[static_cast<Eigen::Index>(s)];
            }
        }
    }

    std::size_t n_;
    std::vector<cplx> amps_;
};

/// Runs a bound circuit from |0...0> (or `initial`). Measure gates are skipped.
inline StateVector simulate(const Circuit &circuit, const std::optional<StateVector> &initial = std::nullopt) {
    if (!circuit.is_bound()) {
        throw CircuitError("circuit has unbound parameters: " + circuit.params().front());
    }
    StateVector state = initial ? *initial : StateVector(circuit.n_qubits());
    if (state.n_qubits() != circuit.n_qubits()) {
        throw CircuitError("initial state width differs from circuit width");
    }
    for (const Gate &g : circuit.gates()) {
        state.apply(g);
    }
    return state;
}

/// <psi|P|psi> for one Pauli string, as a complex number (the imaginary
/// part is round-off for a normalized state).
inline cplx pauli_expectation_complex(const StateVector &state, const PauliString &p) {
    if (p.n_qubits() != state.n_qubits()) {
        throw CircuitError("observable width " + std::to_string(p.n_qubits()) + " differs from state width " +
                           std::to_string(state.n_qubits()));
    }
    std::size_t xmask = 0, zmask = 0, n_y = 0;
    for (std::size_t q = 0; q < p.n_qubits(); ++q) {
        const std::size_t bit = std::size_t{1} << q;
        switch (p.op(q)) {
            case 'X': xmask |= bit; break;
            case 'Y':
                xmask |= bit;
                zmask |= bit;
                ++n_y;
                break;
            case 'Z': zmask |= bit; break;
            default: break;
        }
    }
    static const cplx kIPow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    const cplx global = kIPow[n_y % 4];
    const auto &a = state.amplitudes();
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // P|i> = i^{nY} (-1)^{|i & zmask|} |i ^ xmask>
        const double sign = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
        acc += std::conj(a[i ^ xmask]) * (sign * a[i]);
    }
    return global * acc;
}

/// Σ_t c_t <psi|P_t|psi>.
inline double expectation(const StateVector &state, const PauliSum &obs) {
    double value = 0.0;
    for (const PauliTerm &t : obs.terms()) {
        value += t.coefficient * pauli_expectation_complex(state, t.pauli).real();
    }
    return value;
}

/// Draws `shots` computational-basis samples by inverse CDF over the
/// amplitude order. Keys are bitstrings with qubit 0 rightmost.
inline Counts sample(const StateVector &state, std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) {
        throw std::invalid_argument("shots must be positive");
    }
    const auto &a = state.amplitudes();
    std::vector<double> cdf(a.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::norm(a[i]);
        cdf[i] = acc;
    }
    Rng rng(seed);
    std::vector<std::uint64_t> hits(a.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
        if (idx >= a.size()) {
            idx = a.size() - 1;
        }
        ++hits[idx];
    }
    Counts counts;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i]) {
            counts[format_bitstring(i, state.n_qubits())] = hits[i];
        }
    }
    return counts;
}

}  // namespace hqc
