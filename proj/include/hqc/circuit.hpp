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
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hqc {

using cplx = std::complex<double>;

/// Raised for malformed gates, circuits and observables.
class CircuitError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class GateKind : std::uint8_t {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    RZZ,
    CX,
    CZ,
    Measure,
    // Dense unitary on an arbitrary qubit list. Simulation only; never emitted as QASM.
    Unitary,
};

inline std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::Y: return "y";
        case GateKind::Z: return "z";
        case GateKind::S: return "s";
        case GateKind::Sdg: return "sdg";
        case GateKind::T: return "t";
        case GateKind::Tdg: return "tdg";
        case GateKind::RX: return "rx";
        case GateKind::RY: return "ry";
        case GateKind::RZ: return "rz";
        case GateKind::RZZ: return "rzz";
        case GateKind::CX: return "cx";
        case GateKind::CZ: return "cz";
        case GateKind::Measure: return "measure";
        case GateKind::Unitary: return "unitary";
    }
    return "?";
}

/// Maps a lowercase mnemonic to its kind. `unitary` is not nameable.
inline std::optional<GateKind> gate_kind_from_name(std::string_view name) {
    static constexpr GateKind kNamed[] = {
        GateKind::H,  GateKind::X,  GateKind::Y,  GateKind::Z,   GateKind::S,  GateKind::Sdg,     GateKind::T, GateKind::Tdg,
        GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::RZZ, GateKind::CX, GateKind::CZ, GateKind::Measure,
    };
    for (GateKind k : kNamed) {
        if (gate_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

inline bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ || kind == GateKind::RZZ;
}

/// Number of qubits the kind acts on; 0 for Unitary (variable).
inline std::size_t gate_arity(GateKind kind) {
    switch (kind) {
        case GateKind::RZZ:
        case GateKind::CX:
        case GateKind::CZ: return 2;
        case GateKind::Unitary: return 0;
        default: return 1;
    }
}

/// A gate angle in radians: either a number or `scale * symbol`.
class Param {
  public:
    Param(double value) : value_(value) {  // NOLINT(google-explicit-constructor)
    }
    Param(std::string symbol, double scale = 1.0) : value_(0.0), scale_(scale), symbol_(std::move(symbol)) {  // NOLINT
        if (symbol_.empty()) {
            throw CircuitError("symbolic parameter name must be non-empty");
        }
    }
    Param(const char *symbol) : Param(std::string(symbol)) {  // NOLINT
    }

    bool is_symbolic() const {
        return !symbol_.empty();
    }
    const std::string &symbol() const {
        return symbol_;
    }
    double scale() const {
        return scale_;
    }
    double value() const {
        if (is_symbolic()) {
            throw CircuitError("parameter '" + symbol_ + "' is unbound");
        }
        return value_;
    }
    double resolve(const std::map<std::string, double> &values) const {
        if (!is_symbolic()) {
            return value_;
        }
        auto it = values.find(symbol_);
        if (it == values.end()) {
            throw CircuitError("missing binding for parameter '" + symbol_ + "'");
        }
        return scale_ * it->second;
    }
    Param negated() const {
        Param p = *this;
        if (is_symbolic()) {
            p.scale_ = -p.scale_;
        } else {
            p.value_ = -p.value_;
        }
        return p;
    }

    bool operator==(const Param &other) const {
        if (is_symbolic() != other.is_symbolic()) {
            return false;
        }
        return is_symbolic() ? (symbol_ == other.symbol_ && scale_ == other.scale_) : value_ == other.value_;
    }

  private:
    double value_;
    double scale_ = 1.0;
    std::string symbol_;
};

struct Gate {
    GateKind kind;
    std::vector<std::size_t> qubits;
    std::optional<Param> param;
    // Unitary only. Row/column index bit i corresponds to qubits[i].
    std::shared_ptr<const Eigen::MatrixXcd> matrix;
    std::string label;

    bool operator==(const Gate &other) const {
        if (kind != other.kind || qubits != other.qubits || param != other.param) {
            return false;
        }
        if (kind == GateKind::Unitary) {
            return matrix && other.matrix && matrix->rows() == other.matrix->rows() && *matrix == *other.matrix;
        }
        return true;
    }
};

namespace gates {

inline Gate single(GateKind kind, std::size_t q) {
    return Gate{kind, {q}, std::nullopt, nullptr, {}};
}
inline Gate h(std::size_t q) {
    return single(GateKind::H, q);
}
inline Gate x(std::size_t q) {
    return single(GateKind::X, q);
}
inline Gate y(std::size_t q) {
    return single(GateKind::Y, q);
}
inline Gate z(std::size_t q) {
    return single(GateKind::Z, q);
}
inline Gate s(std::size_t q) {
    return single(GateKind::S, q);
}
inline Gate sdg(std::size_t q) {
    return single(GateKind::Sdg, q);
}
inline Gate t(std::size_t q) {
    return single(GateKind::T, q);
}
inline Gate tdg(std::size_t q) {
    return single(GateKind::Tdg, q);
}
inline Gate measure(std::size_t q) {
    return single(GateKind::Measure, q);
}
inline Gate rx(std::size_t q, Param theta) {
    return Gate{GateKind::RX, {q}, std::move(theta), nullptr, {}};
}
inline Gate ry(std::size_t q, Param theta) {
    return Gate{GateKind::RY, {q}, std::move(theta), nullptr, {}};
}
inline Gate rz(std::size_t q, Param theta) {
    return Gate{GateKind::RZ, {q}, std::move(theta), nullptr, {}};
}
inline Gate rzz(std::size_t a, std::size_t b, Param theta) {
    return Gate{GateKind::RZZ, {a, b}, std::move(theta), nullptr, {}};
}
inline Gate cx(std::size_t control, std::size_t target) {
    return Gate{GateKind::CX, {control, target}, std::nullopt, nullptr, {}};
}
inline Gate cz(std::size_t a, std::size_t b) {
    return Gate{GateKind::CZ, {a, b}, std::nullopt, nullptr, {}};
}
inline Gate unitary(std::vector<std::size_t> qubits, Eigen::MatrixXcd m, std::string label = "unitary") {
    return Gate{GateKind::Unitary, std::move(qubits), std::nullopt,
                std::make_shared<const Eigen::MatrixXcd>(std::move(m)), std::move(label)};
}

}  // namespace gates

/// Throws CircuitError unless `g` is well formed on an n-qubit register.
inline void validate_gate(const Gate &g, std::size_t n_qubits) {
    const std::string name(gate_name(g.kind));
    if (g.kind == GateKind::Unitary) {
        if (g.qubits.empty()) {
            throw CircuitError("unitary gate needs at least one qubit");
        }
        if (!g.matrix) {
            throw CircuitError("unitary gate has no matrix");
        }
        const auto dim = Eigen::Index{1} << g.qubits.size();
        if (g.matrix->rows() != dim || g.matrix->cols() != dim) {
            throw CircuitError("unitary matrix dimension does not match its qubit count");
        }
        const Eigen::MatrixXcd gram = g.matrix->adjoint() * *g.matrix;
        if (!gram.isIdentity(1e-9)) {
            throw CircuitError("unitary gate matrix is not unitary");
        }
    } else if (g.qubits.size() != gate_arity(g.kind)) {
        throw CircuitError(name + " expects " + std::to_string(gate_arity(g.kind)) + " qubit(s), got " +
                           std::to_string(g.qubits.size()));
    }
    for (std::size_t i = 0; i < g.qubits.size(); ++i) {
        if (g.qubits[i] >= n_qubits) {
            throw CircuitError(name + ": qubit index " + std::to_string(g.qubits[i]) + " out of range for " +
                               std::to_string(n_qubits) + " qubit(s)");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (g.qubits[i] == g.qubits[j]) {
                throw CircuitError(name + ": qubits must be distinct");
            }
        }
    }
    if (is_rotation(g.kind) != g.param.has_value()) {
        throw CircuitError(is_rotation(g.kind) ? name + " requires an angle" : name + " takes no angle");
    }
}

/// Ordered gate list over a fixed register, with named symbolic parameters.
/// Qubit 0 is the least-significant bit of basis-state indices.
class Circuit {
  public:
    explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits == 0) {
            throw CircuitError("circuit needs at least one qubit");
        }
    }

    std::size_t n_qubits() const {
        return n_qubits_;
    }
    const std::vector<Gate> &gates() const {
        return gates_;
    }
    const std::vector<std::string> &params() const {
        return params_;
    }
    std::size_t size() const {
        return gates_.size();
    }

    Circuit &append(Gate g) {
        validate_gate(g, n_qubits_);
        if (g.param && g.param->is_symbolic() &&
            std::find(params_.begin(), params_.end(), g.param->symbol()) == params_.end()) {
            params_.push_back(g.param->symbol());
        }
        gates_.push_back(std::move(g));
        return *this;
    }

    /// Appends every gate of `other`, which must have the same width.
    Circuit &append(const Circuit &other) {
        if (other.n_qubits_ != n_qubits_) {
            throw CircuitError("cannot compose circuits of different widths");
        }
        for (const Gate &g : other.gates_) {
            append(g);
        }
        return *this;
    }

    bool is_bound() const {
        return params_.empty();
    }

    bool has_measurements() const {
        return std::any_of(gates_.begin(), gates_.end(), [](const Gate &g) { return g.kind == GateKind::Measure; });
    }

    /// Substitutes every symbolic parameter. Names outside params() are rejected.
    Circuit bind(const std::map<std::string, double> &values) const {
        for (const auto &[name, value] : values) {
            if (std::find(params_.begin(), params_.end(), name) == params_.end()) {
                throw CircuitError("unknown parameter '" + name + "'");
            }
        }
        Circuit out(n_qubits_);
        out.gates_.reserve(gates_.size());
        for (const Gate &g : gates_) {
            Gate b = g;
            if (b.param && b.param->is_symbolic()) {
                b.param = Param(b.param->resolve(values));
            }
            out.gates_.push_back(std::move(b));
        }
        return out;
    }

    /// Reversed gate order with each gate replaced by its adjoint.
    Circuit inverse() const {
        if (has_measurements()) {
            throw CircuitError("cannot invert a circuit containing measurements");
        }
        if (!is_bound()) {
            throw CircuitError("cannot invert a circuit with unbound parameters");
        }
        Circuit out(n_qubits_);
        for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
            Gate g = *it;
            switch (g.kind) {
                case GateKind::S: g.kind = GateKind::Sdg; break;
                case GateKind::Sdg: g.kind = GateKind::S; break;
                case GateKind::T: g.kind = GateKind::Tdg; break;
                case GateKind::Tdg: g.kind = GateKind::T; break;
                case GateKind::RX:
                case GateKind::RY:
                case GateKind::RZ:
                case GateKind::RZZ: g.param = g.param->negated(); break;
                case GateKind::Unitary:
                    g.matrix = std::make_shared<const Eigen::MatrixXcd>(g.matrix->adjoint());
                    g.label += "_dg";
                    break;
                default: break;
            }
            out.gates_.push_back(std::move(g));
        }
        return out;
    }

    bool operator==(const Circuit &other) const = default;

  private:
    std::size_t n_qubits_;
    std::vector<Gate> gates_;
    std::vector<std::string> params_;
};

/// Dense matrix of a bound, non-measurement gate. Index bit i <-> g.qubits[i].
inline Eigen::MatrixXcd gate_matrix(const Gate &g) {
    using std::numbers::pi;
    const cplx i1(0.0, 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd m;
    auto angle = [&] { return g.param->value(); };
    switch (g.kind) {
        case GateKind::H: m.resize(2, 2); m << r, r, r, -r; break;
        case GateKind::X: m.resize(2, 2); m << 0, 1, 1, 0; break;
        case GateKind::Y: m.resize(2, 2); m << 0, -i1, i1, 0; break;
        case GateKind::Z: m.resize(2, 2); m << 1, 0, 0, -1; break;
        case GateKind::S: m.resize(2, 2); m << 1, 0, 0, i1; break;
        case GateKind::Sdg: m.resize(2, 2); m << 1, 0, 0, -i1; break;
        case GateKind::T: m.resize(2, 2); m << 1, 0, 0, std::polar(1.0, pi / 4); break;
        case GateKind::Tdg: m.resize(2, 2); m << 1, 0, 0, std::polar(1.0, -pi / 4); break;
        case GateKind::RX: {
            const double c = std::cos(angle() / 2), s = std::sin(angle() / 2);
            m.resize(2, 2);
            m << c, -i1 * s, -i1 * s, c;
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(angle() / 2), s = std::sin(angle() / 2);
            m.resize(2, 2);
            m << c, -s, s, c;
            break;
        }
        case GateKind::RZ: {
            const double t = angle();
            m = Eigen::MatrixXcd::Zero(2, 2);
            m(0, 0) = std::polar(1.0, -t / 2);
            m(1, 1) = std::polar(1.0, t / 2);
            break;
        }
        case GateKind::RZZ: {
            // exp(-i t/2 Z⊗Z): phase e^{-it/2} on even parity, e^{+it/2} on odd.
            const double t = angle();
            m = Eigen::MatrixXcd::Zero(4, 4);
            m(0, 0) = m(3, 3) = std::polar(1.0, -t / 2);
            m(1, 1) = m(2, 2) = std::polar(1.0, t / 2);
            break;
        }
        case GateKind::CX:
            // control = qubits[0] (bit 0), target = qubits[1] (bit 1).
            m = Eigen::MatrixXcd::Zero(4, 4);
            m(0, 0) = m(2, 2) = 1.0;
            m(3, 1) = m(1, 3) = 1.0;
            break;
        case GateKind::CZ:
            m = Eigen::MatrixXcd::Identity(4, 4);
            m(3, 3) = -1.0;
            break;
        case GateKind::Unitary: m = *g.matrix; break;
        case GateKind::Measure: throw CircuitError("measure has no unitary matrix");
    }
    return m;
}

/// Tensor product of single-qubit Paulis. Character i of the text acts on
/// qubit n-1-i, so the rightmost character is qubit 0 (same layout as the
/// bitstrings produced by sampling).
class PauliString {
  public:
    explicit PauliString(std::string ops) : ops_(std::move(ops)) {
        if (ops_.empty()) {
            throw CircuitError("Pauli string must be non-empty");
        }
        for (char c : ops_) {
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                throw CircuitError(std::string("invalid Pauli character '") + c + "'");
            }
        }
    }

    static PauliString identity(std::size_t n) {
        return PauliString(std::string(n, 'I'));
    }

    std::size_t n_qubits() const {
        return ops_.size();
    }
    char op(std::size_t qubit) const {
        return ops_[ops_.size() - 1 - qubit];
    }
    void set_op(std::size_t qubit, char c) {
        ops_[ops_.size() - 1 - qubit] = c;
    }
    const std::string &str() const {
        return ops_;
    }
    bool is_diagonal() const {
        return ops_.find_first_of("XY") == std::string::npos;
    }
    bool is_identity() const {
        return ops_.find_first_not_of('I') == std::string::npos;
    }

    /// Restriction to qubits [first, first+count), re-indexed from 0.
    PauliString slice(std::size_t first, std::size_t count) const {
        std::string out(count, 'I');
        for (std::size_t q = 0; q < count; ++q) {
            out[count - 1 - q] = op(first + q);
        }
        return PauliString(std::move(out));
    }

    auto operator<=>(const PauliString &) const = default;

  private:
    std::string ops_;
};

struct PauliTerm {
    double coefficient;
    PauliString pauli;
};

/// Real-weighted sum of Pauli strings with merged duplicates.
class PauliSum {
  public:
    PauliSum() = default;

    PauliSum &add(double coefficient, const PauliString &pauli) {
        if (!terms_.empty() && terms_.front().pauli.n_qubits() != pauli.n_qubits()) {
            throw CircuitError("Pauli string width " + std::to_string(pauli.n_qubits()) + " differs from sum width " +
                               std::to_string(terms_.front().pauli.n_qubits()));
        }
        for (PauliTerm &t : terms_) {
            if (t.pauli == pauli) {
                t.coefficient += coefficient;
                return *this;
            }
        }
        terms_.push_back({coefficient, pauli});
        return *this;
    }
    PauliSum &add(double coefficient, std::string ops) {
        return add(coefficient, PauliString(std::move(ops)));
    }

    const std::vector<PauliTerm> &terms() const {
        return terms_;
    }
    bool empty() const {
        return terms_.empty();
    }
    /// Width of the strings; 0 for an empty sum.
    std::size_t n_qubits() const {
        return terms_.empty() ? 0 : terms_.front().pauli.n_qubits();
    }
    double identity_coefficient() const {
        for (const PauliTerm &t : terms_) {
            if (t.pauli.is_identity()) {
                return t.coefficient;
            }
        }
        return 0.0;
    }
    /// Σ|c_t|, the bound on any expectation value.
    double one_norm() const {
        double s = 0;
        for (const PauliTerm &t : terms_) {
            s += std::abs(t.coefficient);
        }
        return s;
    }
    PauliSum without_zeros(double tol = 0.0) const {
        PauliSum out;
        for (const PauliTerm &t : terms_) {
            if (std::abs(t.coefficient) > tol) {
                out.terms_.push_back(t);
            }
        }
        return out;
    }

  private:
    std::vector<PauliTerm> terms_;
};

/// Dense 2^n x 2^n matrix of a Pauli string (little-endian basis).
inline Eigen::MatrixXcd pauli_matrix(const PauliString &p) {
    const std::size_t n = p.n_qubits();
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        cplx amp = 1.0;
        std::size_t row = col;
        for (std::size_t q = 0; q < n; ++q) {
            const bool bit = (col >> q) & 1;
            switch (p.op(q)) {
                case 'X': row ^= std::size_t{1} << q; break;
                case 'Y':
                    row ^= std::size_t{1} << q;
                    amp *= bit ? cplx(0, -1) : cplx(0, 1);
                    break;
                case 'Z':
                    if (bit) {
                        amp = -amp;
                    }
                    break;
                default: break;
            }
        }
        m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = amp;
    }
    return m;
}

/// Formats a basis index as an n-character bitstring, qubit 0 rightmost.
inline std::string format_bitstring(std::uint64_t index, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t q = 0; q < n; ++q) {
        if ((index >> q) & 1) {
            s[n - 1 - q] = '1';
        }
    }
    return s;
}

using Counts = std::map<std::string, std::uint64_t>;

/// Estimates a diagonal (I/Z-only) observable from measurement counts.
inline double pauli_expectation_terms(const PauliSum &sum, const Counts &counts) {
    std::uint64_t total = 0;
    for (const auto &[bits, c] : counts) {
        total += c;
    }
    if (total == 0) {
        throw CircuitError("counts are empty");
    }
    double value = 0.0;
    for (const PauliTerm &t : sum.terms()) {
        if (!t.pauli.is_diagonal()) {
            throw CircuitError("Pauli string " + t.pauli.str() + " is not diagonal");
        }
        const std::string &ops = t.pauli.str();
        double acc = 0.0;
        for (const auto &[bits, c] : counts) {
            if (bits.size() != ops.size()) {
                throw CircuitError("bitstring '" + bits + "' width differs from observable width");
            }
            int parity = 0;
            for (std::size_t i = 0; i < ops.size(); ++i) {
                if (ops[i] == 'Z' && bits[i] == '1') {
                    parity ^= 1;
                }
            }
            acc += (parity ? -1.0 : 1.0) * static_cast<double>(c);
        }
        value += t.coefficient * acc / static_cast<double>(total);
    }
    return value;
}

}  // namespace hqc
