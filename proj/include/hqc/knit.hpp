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
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <future>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hqc/circuit.hpp"
#include "hqc/mps.hpp"
#include "hqc/rng.hpp"
#include "hqc/statevector.hpp"

namespace hqc {

// ---------------------------------------------------------------------------
// Disordered Ising chains.

struct DisorderRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct SpinChainSpec {
    std::size_t n_qubits = 2;
    std::vector<double> J;  // n-1 nearest-neighbour couplings
    std::vector<double> h;  // n transverse fields
    std::vector<double> g;  // n longitudinal fields
    double t = 1.0;
    std::size_t steps = 4;
    DisorderRange J_range{0.0, 1.0};
    DisorderRange h_range{0.0, 1.0};
    DisorderRange g_range{0.0, 0.5};
    std::uint64_t seed = 0;

    void validate() const {
        if (n_qubits < 2) {
            throw std::invalid_argument("spin chain needs at least 2 sites");
        }
        if (steps < 1) {
            throw std::invalid_argument("spin chain needs at least 1 Trotter step");
        }
        if (J.size() != n_qubits - 1 || h.size() != n_qubits || g.size() != n_qubits) {
            throw std::invalid_argument("spin chain field lengths must be J: n-1, h: n, g: n");
        }
        auto finite = [](const std::vector<double> &v) {
            return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        };
        if (!finite(J) || !finite(h) || !finite(g) || !std::isfinite(t)) {
            throw std::invalid_argument("spin chain parameters must be finite");
        }
        for (const DisorderRange *r : {&J_range, &h_range, &g_range}) {
            if (!(r->lo <= r->hi)) {
                throw std::invalid_argument("disorder range must satisfy lo <= hi");
            }
        }
    }

    /// Redraws J, then h, then g uniformly from the disorder ranges.
    void sample_fields(std::uint64_t new_seed) {
        seed = new_seed;
        Rng rng(new_seed);
        J.resize(n_qubits - 1);
        h.resize(n_qubits);
        g.resize(n_qubits);
        for (double &v : J) v = rng.uniform(J_range.lo, J_range.hi);
        for (double &v : h) v = rng.uniform(h_range.lo, h_range.hi);
        for (double &v : g) v = rng.uniform(g_range.lo, g_range.hi);
    }
};

inline SpinChainSpec random_spinchain(SpinChainSpec base, std::uint64_t seed) {
    base.sample_fields(seed);
    base.validate();
    return base;
}

/// Reads a spin chain document. Explicit "J"/"h"/"g" arrays win; missing ones
/// are drawn from "disorder" ranges with "disorder.seed".
inline SpinChainSpec spinchain_from_json(const nlohmann::json &doc) {
    SpinChainSpec spec;
    spec.n_qubits = doc.at("n_qubits").get<std::size_t>();
    spec.t = doc.value("t", spec.t);
    spec.steps = doc.value("steps", spec.steps);
    if (doc.contains("disorder")) {
        const auto &d = doc.at("disorder");
        auto range = [&](const char *key, DisorderRange &r) {
            if (d.contains(key)) {
                const auto pair = d.at(key).get<std::vector<double>>();
                if (pair.size() != 2) {
                    throw std::invalid_argument(std::string("disorder.") + key + " must be [lo, hi]");
                }
                r = {pair[0], pair[1]};
            }
        };
        range("J", spec.J_range);
        range("h", spec.h_range);
        range("g", spec.g_range);
        spec.seed = d.value("seed", std::uint64_t{0});
    }
    if (spec.n_qubits < 2) {
        throw std::invalid_argument("spin chain needs at least 2 sites");
    }
    spec.sample_fields(spec.seed);
    if (doc.contains("J")) spec.J = doc.at("J").get<std::vector<double>>();
    if (doc.contains("h")) spec.h = doc.at("h").get<std::vector<double>>();
    if (doc.contains("g")) spec.g = doc.at("g").get<std::vector<double>>();
    spec.validate();
    return spec;
}

inline nlohmann::json spinchain_to_json(const SpinChainSpec &spec) {
    return {
        {"n_qubits", spec.n_qubits},
        {"t", spec.t},
        {"steps", spec.steps},
        {"J", spec.J},
        {"h", spec.h},
        {"g", spec.g},
        {"disorder",
         {{"J", {spec.J_range.lo, spec.J_range.hi}},
          {"h", {spec.h_range.lo, spec.h_range.hi}},
          {"g", {spec.g_range.lo, spec.g_range.hi}},
          {"seed", spec.seed}}},
    };
}

/// First-order Trotter circuit for H = sum J_i Z_i Z_{i+1} + h_i X_i + g_i Z_i.
/// Single-site rotations with an exactly zero field are omitted.
inline Circuit build_spinchain_circuit(const SpinChainSpec &spec) {
    spec.validate();
    const double dt = spec.t / static_cast<double>(spec.steps);
    Circuit c(spec.n_qubits);
    for (std::size_t step = 0; step < spec.steps; ++step) {
        for (std::size_t i = 0; i + 1 < spec.n_qubits; ++i) {
            c.append(gates::rzz(i, i + 1, 2.0 * spec.J[i] * dt));
        }
        for (std::size_t i = 0; i < spec.n_qubits; ++i) {
            if (spec.h[i] != 0.0) {
                c.append(gates::rx(i, 2.0 * spec.h[i] * dt));
            }
        }
        for (std::size_t i = 0; i < spec.n_qubits; ++i) {
            if (spec.g[i] != 0.0) {
                c.append(gates::rz(i, 2.0 * spec.g[i] * dt));
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Quasiprobability decompositions of two-qubit gates.

/// A local operation on one side of a cut: a single-qubit gate, or the signed
/// Z measurement channel rho -> P0 rho P0 - P1 rho P1.
struct LocalOp {
    enum class Kind { Gate, MeasureZ };
    Kind kind = Kind::Gate;
    GateKind gate = GateKind::H;
    double angle = 0.0;

    static LocalOp unitary(GateKind g, double angle = 0.0) {
        return {Kind::Gate, g, angle};
    }
    static LocalOp measure_z() {
        return {Kind::MeasureZ, GateKind::Z, 0.0};
    }
    Gate as_gate(std::size_t q) const {
        Gate g{gate, {q}, std::nullopt, nullptr, {}};
        if (is_rotation(gate)) {
            g.param = Param(angle);
        }
        return g;
    }
    bool operator==(const LocalOp &) const = default;
};

/// One quasiprobability term. Left ops act on gate.qubits[0], right ops on gate.qubits[1].
struct CutTerm {
    double coefficient = 0.0;
    std::vector<LocalOp> left_ops;
    std::vector<LocalOp> right_ops;
};

struct CutGateDecomposition {
    Gate original;
    std::vector<CutTerm> terms;
    double gamma = 1.0;
    double channel_residual = 0.0;
};

namespace detail {

// Applies a local channel to a 4x4 operator; bit 0 is the left qubit.
inline Eigen::Matrix4cd apply_local(const LocalOp &op, bool left, const Eigen::Matrix4cd &x) {
    auto embed = [&](const Eigen::Matrix2cd &k) {
        Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                const int rl = left ? (r & 1) : (r >> 1), cl = left ? (c & 1) : (c >> 1);
                const int ro = left ? (r >> 1) : (r & 1), co = left ? (c >> 1) : (c & 1);
                out(r, c) = ro == co ? k(rl, cl) : cplx(0.0);
            }
        }
        return out;
    };
    if (op.kind == LocalOp::Kind::MeasureZ) {
        Eigen::Matrix2cd p0 = Eigen::Matrix2cd::Zero(), p1 = Eigen::Matrix2cd::Zero();
        p0(0, 0) = 1.0;
        p1(1, 1) = 1.0;
        const Eigen::Matrix4cd e0 = embed(p0), e1 = embed(p1);
        return e0 * x * e0 - e1 * x * e1;
    }
    const Eigen::Matrix4cd k = embed(gate_matrix(op.as_gate(0)));
    return k * x * k.adjoint();
}

inline Eigen::Matrix4cd apply_term(const CutTerm &term, const Eigen::Matrix4cd &x) {
    Eigen::Matrix4cd y = x;
    for (const LocalOp &op : term.left_ops) y = apply_local(op, true, y);
    for (const LocalOp &op : term.right_ops) y = apply_local(op, false, y);
    return term.coefficient * y;
}

// Six-term decomposition of RZZ(theta) = exp(-i theta/2 Z⊗Z):
//   c^2 id + s^2 (Z⊗Z) + cs [Rz(pi/2) - Rz(-pi/2)] ⊗ Mz + cs Mz ⊗ [Rz(pi/2) - Rz(-pi/2)]
// with c = cos(theta/2), s = sin(theta/2).
inline std::vector<CutTerm> rzz_terms(double theta) {
    using std::numbers::pi;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const LocalOp zp = LocalOp::unitary(GateKind::RZ, pi / 2), zm = LocalOp::unitary(GateKind::RZ, -pi / 2);
    const LocalOp mz = LocalOp::measure_z(), z = LocalOp::unitary(GateKind::Z);
    std::vector<CutTerm> all = {
        {c * c, {}, {}},       {s * s, {z}, {z}},      {c * s, {zp}, {mz}},
        {-c * s, {zm}, {mz}}, {c * s, {mz}, {zp}},    {-c * s, {mz}, {zm}},
    };
    std::vector<CutTerm> kept;
    for (CutTerm &t : all) {
        if (std::abs(t.coefficient) > 1e-14) {
            kept.push_back(std::move(t));
        }
    }
    return kept;
}

}  // namespace detail

/// Largest entry-wise deviation between the decomposition and the gate's
/// channel over all 16 matrix units (an informationally complete set).
inline double channel_residual(const CutGateDecomposition &d) {
    const Eigen::Matrix4cd u = gate_matrix(d.original);
    double worst = 0.0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
            e(r, c) = 1.0;
            Eigen::Matrix4cd sum = Eigen::Matrix4cd::Zero();
            for (const CutTerm &t : d.terms) sum += detail::apply_term(t, e);
            worst = std::max(worst, (sum - u * e * u.adjoint()).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

inline CutGateDecomposition decompose_cut_gate(const Gate &gate) {
    using std::numbers::pi;
    CutGateDecomposition d;
    d.original = gate;
    switch (gate.kind) {
        case GateKind::RZZ:
            d.terms = detail::rzz_terms(gate.param.value().value());
            break;
        case GateKind::CZ:
        case GateKind::CX: {
            // CZ = RZZ(-pi/2) · (RZ(pi/2) ⊗ RZ(pi/2)) up to phase; CX adds H on the target.
            const LocalOp rz = LocalOp::unitary(GateKind::RZ, pi / 2), h = LocalOp::unitary(GateKind::H);
            const bool cx = gate.kind == GateKind::CX;
            for (CutTerm t : detail::rzz_terms(-pi / 2)) {
                t.left_ops.push_back(rz);
                if (cx) t.right_ops.insert(t.right_ops.begin(), h);
                t.right_ops.push_back(rz);
                if (cx) t.right_ops.push_back(h);
                d.terms.push_back(std::move(t));
            }
            break;
        }
        default:
            throw CircuitError("cannot cut gate '" + std::string(gate_name(gate.kind)) +
                               "': only rzz, cx and cz are supported");
    }
    d.gamma = 0.0;
    for (const CutTerm &t : d.terms) d.gamma += std::abs(t.coefficient);
    d.channel_residual = channel_residual(d);
    if (!(d.channel_residual < 1e-8)) {
        throw std::logic_error("cut decomposition failed its channel check (residual " +
                               std::to_string(d.channel_residual) + ")");
    }
    return d;
}

// ---------------------------------------------------------------------------
// Cut plans.

struct CutPlan {
    std::size_t n_qubits = 0;
    std::size_t cut_bond = 0;  // fragment A = 0..cut_bond, B = cut_bond+1..n-1
    std::vector<std::size_t> cut_gates;
    std::vector<CutGateDecomposition> decompositions;
    double total_overhead = 1.0;
};

inline bool crosses_bond(const Gate &g, std::size_t bond) {
    if (g.kind == GateKind::Measure) {
        return false;
    }
    bool left = false, right = false;
    for (std::size_t q : g.qubits) {
        (q <= bond ? left : right) = true;
    }
    return left && right;
}

inline std::vector<std::size_t> crossing_gates(const Circuit &circuit, std::size_t bond) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < circuit.size(); ++i) {
        if (crosses_bond(circuit.gates()[i], bond)) {
            out.push_back(i);
        }
    }
    return out;
}

/// Cuts every gate crossing `bond`; overhead is the product of gamma^2.
inline CutPlan make_cut_plan(const Circuit &circuit, std::size_t bond) {
    if (circuit.n_qubits() < 2 || bond + 1 >= circuit.n_qubits()) {
        throw std::invalid_argument("cut bond " + std::to_string(bond) + " is not interior to a " +
                                    std::to_string(circuit.n_qubits()) + "-qubit circuit");
    }
    CutPlan plan;
    plan.n_qubits = circuit.n_qubits();
    plan.cut_bond = bond;
    plan.cut_gates = crossing_gates(circuit, bond);
    for (std::size_t idx : plan.cut_gates) {
        const Gate &g = circuit.gates()[idx];
        if (g.param && g.param->is_symbolic()) {
            throw CircuitError("cut gate " + std::to_string(idx) + " has unbound parameter '" + g.param->symbol() +
                               "'");
        }
        plan.decompositions.push_back(decompose_cut_gate(g));
        plan.total_overhead *= plan.decompositions.back().gamma * plan.decompositions.back().gamma;
    }
    return plan;
}

/// The most size-balanced bond: fragments of ceil(n/2) and floor(n/2) qubits.
inline std::size_t baseline_bond(std::size_t n_qubits) {
    if (n_qubits < 2) {
        throw std::invalid_argument("a cut needs at least 2 qubits");
    }
    return (n_qubits + 1) / 2 - 1;
}

inline CutPlan baseline_plan(const Circuit &circuit) {
    return make_cut_plan(circuit, baseline_bond(circuit.n_qubits()));
}

enum class Aggregation { Max, Mean };

struct CutConstraints {
    // Largest allowed fragment; default ceil(2n/3).
    std::optional<std::size_t> max_fragment;
    // Largest allowed | |A| - |B| |; default unconstrained.
    std::optional<std::size_t> imbalance_tol;
    Aggregation aggregation = Aggregation::Max;
};

inline std::vector<std::size_t> feasible_bonds(std::size_t n, const CutConstraints &constraints) {
    const std::size_t max_fragment = constraints.max_fragment.value_or((2 * n + 2) / 3);
    const std::size_t imbalance = constraints.imbalance_tol.value_or(n);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t a = k + 1, b = n - k - 1;
        if (std::max(a, b) <= max_fragment && (a > b ? a - b : b - a) <= imbalance) {
            out.push_back(k);
        }
    }
    return out;
}

/// Per-bond score: entropy aggregated over checkpoints.
inline std::vector<double> bond_scores(const EntropyProfile &profile, Aggregation aggregation) {
    if (profile.empty()) {
        throw std::invalid_argument("entropy profile has no checkpoints");
    }
    const std::size_t bonds = profile.front().size();
    std::vector<double> score(bonds, aggregation == Aggregation::Max ? -1.0 : 0.0);
    for (const auto &row : profile) {
        if (row.size() != bonds) {
            throw std::invalid_argument("entropy profile rows differ in width");
        }
        for (std::size_t k = 0; k < bonds; ++k) {
            score[k] = aggregation == Aggregation::Max ? std::max(score[k], row[k]) : score[k] + row[k];
        }
    }
    if (aggregation == Aggregation::Mean) {
        for (double &s : score) s /= static_cast<double>(profile.size());
    }
    return score;
}

/// Scores closer than this are treated as tied.
inline constexpr double kScoreTieTolerance = 1e-9;

/// Lowest score among feasible bonds; ties go to the more balanced bond, then the lower index.
inline std::size_t select_bond(const std::vector<double> &scores, const std::vector<std::size_t> &feasible,
                               std::size_t n) {
    if (feasible.empty()) {
        throw std::invalid_argument("no feasible cut bond satisfies the constraints");
    }
    auto imbalance = [n](std::size_t k) {
        const std::size_t a = k + 1, b = n - k - 1;
        return a > b ? a - b : b - a;
    };
    std::size_t best = feasible.front();
    for (std::size_t k : feasible) {
        const double d = scores[k] - scores[best];
        if (d < -kScoreTieTolerance || (std::abs(d) <= kScoreTieTolerance && imbalance(k) < imbalance(best))) {
            best = k;
        }
    }
    return best;
}

inline CutPlan adaptive_plan(const Circuit &circuit, const EntropyProfile &profile,
                             const CutConstraints &constraints = {}) {
    const std::size_t n = circuit.n_qubits();
    const std::vector<double> scores = bond_scores(profile, constraints.aggregation);
    if (scores.size() + 1 != n) {
        throw std::invalid_argument("entropy profile width does not match the circuit");
    }
    return make_cut_plan(circuit, select_bond(scores, feasible_bonds(n, constraints), n));
}

// ---------------------------------------------------------------------------
// Execution.

struct KnitMode {
    enum class Kind { Exact, Shots };
    Kind kind = Kind::Exact;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static KnitMode exact() {
        return {};
    }
    static KnitMode sampled(std::uint64_t shots, std::uint64_t seed) {
        return {Kind::Shots, shots, seed};
    }
};

struct KnitResult {
    double value = 0.0;
    // Contribution of each observable term, in observable order.
    std::vector<double> per_term_values;
    double overhead = 1.0;
    // Standard error of the shots-mode estimate; 0 in exact mode.
    double std_error = 0.0;
};

namespace detail {

// A fragment program: ordinary gates on local qubits, interleaved with cut slots.
struct FragmentItem {
    std::optional<Gate> gate;
    std::size_t cut = 0;       // index into plan.cut_gates when !gate
    std::size_t qubit = 0;     // local qubit of the cut slot
    bool left_side = false;    // whether this side carries the term's left ops
};

struct Fragment {
    std::size_t first = 0;
    std::size_t size = 0;
    std::vector<FragmentItem> items;
    std::vector<PauliString> observables;
};

// One measurement branch: unnormalized Born weight, channel sign, and
// normalized expectations of every observable term.
struct Leaf {
    double probability = 0.0;
    int sign = 1;
    std::vector<double> expectations;
};

class FragmentEvaluator {
  public:
    FragmentEvaluator(const Fragment &fragment, const CutPlan &plan, const std::vector<std::size_t> &strides,
                      std::size_t combos)
        : fragment_(fragment), plan_(plan), strides_(strides), leaves_(combos) {}

    std::vector<std::vector<Leaf>> run() {
        walk(StateVector(fragment_.size), 0, 0, 1);
        return std::move(leaves_);
    }

  private:
    void walk(StateVector state, std::size_t pos, std::size_t combo, int sign) {
        while (pos < fragment_.items.size() && fragment_.items[pos].gate) {
            state.apply(*fragment_.items[pos].gate);
            ++pos;
        }
        if (pos == fragment_.items.size()) {
            finish(state, combo, sign);
            return;
        }
        const FragmentItem &slot = fragment_.items[pos];
        const auto &terms = plan_.decompositions[slot.cut].terms;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto &ops = slot.left_side ? terms[t].left_ops : terms[t].right_ops;
            apply_ops(state, ops, 0, slot.qubit, pos + 1, combo + t * strides_[slot.cut], sign);
        }
    }

    void apply_ops(StateVector state, const std::vector<LocalOp> &ops, std::size_t i, std::size_t q,
                   std::size_t next, std::size_t combo, int sign) {
        for (; i < ops.size(); ++i) {
            if (ops[i].kind == LocalOp::Kind::MeasureZ) {
                StateVector one = state;
                state.project(q, 0);
                one.project(q, 1);
                if (state.norm_squared() > 0.0) apply_ops(std::move(state), ops, i + 1, q, next, combo, sign);
                if (one.norm_squared() > 0.0) apply_ops(std::move(one), ops, i + 1, q, next, combo, -sign);
                return;
            }
            state.apply(ops[i].as_gate(q));
        }
        walk(std::move(state), next, combo, sign);
    }

    void finish(const StateVector &state, std::size_t combo, int sign) {
        Leaf leaf;
        leaf.probability = state.norm_squared();
        leaf.sign = sign;
        for (const PauliString &p : fragment_.observables) {
            leaf.expectations.push_back(pauli_expectation_complex(state, p).real() / leaf.probability);
        }
        leaves_[combo].push_back(std::move(leaf));
    }

    const Fragment &fragment_;
    const CutPlan &plan_;
    const std::vector<std::size_t> &strides_;
    std::vector<std::vector<Leaf>> leaves_;
};

inline void check_plan(const Circuit &circuit, const CutPlan &plan) {
    if (plan.n_qubits != circuit.n_qubits() || plan.cut_bond + 1 >= circuit.n_qubits()) {
        throw std::invalid_argument("cut plan does not match the circuit width");
    }
    if (plan.cut_gates != crossing_gates(circuit, plan.cut_bond) ||
        plan.decompositions.size() != plan.cut_gates.size()) {
        throw std::invalid_argument("cut plan gates do not match the gates crossing bond " +
                                    std::to_string(plan.cut_bond));
    }
    for (std::size_t i = 0; i < plan.cut_gates.size(); ++i) {
        if (!(plan.decompositions[i].original == circuit.gates()[plan.cut_gates[i]])) {
            throw std::invalid_argument("cut plan decomposition " + std::to_string(i) + " is for a different gate");
        }
    }
}

inline Fragment make_fragment(const Circuit &circuit, const CutPlan &plan, const PauliSum &observable, bool side_a) {
    Fragment f;
    f.first = side_a ? 0 : plan.cut_bond + 1;
    f.size = side_a ? plan.cut_bond + 1 : circuit.n_qubits() - plan.cut_bond - 1;
    if (f.size > kMaxStatevectorQubits) {
        throw std::invalid_argument("fragment of " + std::to_string(f.size) + " qubits exceeds the simulator cap");
    }
    auto inside = [&](std::size_t q) { return q >= f.first && q < f.first + f.size; };
    std::size_t next_cut = 0;
    for (std::size_t i = 0; i < circuit.size(); ++i) {
        const Gate &g = circuit.gates()[i];
        if (next_cut < plan.cut_gates.size() && plan.cut_gates[next_cut] == i) {
            FragmentItem slot;
            slot.cut = next_cut++;
            slot.left_side = inside(g.qubits[0]);
            slot.qubit = (slot.left_side ? g.qubits[0] : g.qubits[1]) - f.first;
            f.items.push_back(slot);
            continue;
        }
        if (g.kind == GateKind::Measure || !inside(g.qubits[0])) {
            continue;
        }
        Gate local = g;
        for (std::size_t &q : local.qubits) q -= f.first;
        f.items.push_back({std::move(local)});
    }
    for (const PauliTerm &t : observable.terms()) {
        f.observables.push_back(t.pauli.slice(f.first, f.size));
    }
    return f;
}

}  // namespace detail

/// Reconstructs <observable> from the two fragments of `plan`.
inline KnitResult knit_execute(const Circuit &circuit, const CutPlan &plan, const PauliSum &observable,
                               const KnitMode &mode = KnitMode::exact()) {
    if (!circuit.is_bound()) {
        throw CircuitError("circuit has unbound parameters: " + circuit.params().front());
    }
    if (observable.empty() || observable.n_qubits() != circuit.n_qubits()) {
        throw std::invalid_argument("observable width does not match the circuit");
    }
    if (mode.kind == KnitMode::Kind::Shots && mode.shots == 0) {
        throw std::invalid_argument("shots mode needs at least one shot");
    }
    detail::check_plan(circuit, plan);

    // Mixed-radix index over one term choice per cut gate.
    std::vector<std::size_t> strides(plan.cut_gates.size());
    std::size_t combos = 1;
    for (std::size_t i = 0; i < plan.cut_gates.size(); ++i) {
        strides[i] = combos;
        combos *= plan.decompositions[i].terms.size();
    }
    std::vector<double> coefficient(combos, 1.0);
    for (std::size_t c = 0; c < combos; ++c) {
        for (std::size_t i = 0; i < strides.size(); ++i) {
            const auto &terms = plan.decompositions[i].terms;
            coefficient[c] *= terms[(c / strides[i]) % terms.size()].coefficient;
        }
    }

    const detail::Fragment frag_a = detail::make_fragment(circuit, plan, observable, true);
    const detail::Fragment frag_b = detail::make_fragment(circuit, plan, observable, false);
    auto future_a = std::async(std::launch::async, [&] {
        return detail::FragmentEvaluator(frag_a, plan, strides, combos).run();
    });
    auto leaves_b = detail::FragmentEvaluator(frag_b, plan, strides, combos).run();
    auto leaves_a = future_a.get();

    const auto &terms = observable.terms();
    KnitResult result;
    result.overhead = plan.total_overhead;
    result.per_term_values.assign(terms.size(), 0.0);

    if (mode.kind == KnitMode::Kind::Exact) {
        // Signed, probability-weighted fragment expectations per combination.
        auto reduce = [&](const std::vector<detail::Leaf> &leaves, std::size_t p) {
            double v = 0.0;
            for (const auto &leaf : leaves) v += leaf.sign * leaf.probability * leaf.expectations[p];
            return v;
        };
        for (std::size_t c = 0; c < combos; ++c) {
            for (std::size_t p = 0; p < terms.size(); ++p) {
                result.per_term_values[p] +=
                    terms[p].coefficient * coefficient[c] * reduce(leaves_a[c], p) * reduce(leaves_b[c], p);
            }
        }
        result.value = std::accumulate(result.per_term_values.begin(), result.per_term_values.end(), 0.0);
        return result;
    }

    // Shots: draw a combination with probability |c|/gamma, a measurement branch
    // per fragment by Born weight, and a +-1 outcome per observable term.
    double gamma = 0.0;
    std::vector<double> cdf(combos);
    for (std::size_t c = 0; c < combos; ++c) {
        gamma += std::abs(coefficient[c]);
        cdf[c] = gamma;
    }
    auto pick_leaf = [](Rng &rng, const std::vector<detail::Leaf> &leaves) -> const detail::Leaf & {
        double total = 0.0;
        for (const auto &leaf : leaves) total += leaf.probability;
        double u = rng.uniform() * total;
        for (const auto &leaf : leaves) {
            if (u < leaf.probability) return leaf;
            u -= leaf.probability;
        }
        return leaves.back();
    };
    auto outcome = [](Rng &rng, double expectation) { return rng.uniform() < (1.0 + expectation) / 2 ? 1 : -1; };
    Rng rng(mode.seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t s = 0; s < mode.shots; ++s) {
        const std::size_t c = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * gamma) - cdf.begin());
        const std::size_t combo = std::min(c, combos - 1);
        const detail::Leaf &la = pick_leaf(rng, leaves_a[combo]);
        const detail::Leaf &lb = pick_leaf(rng, leaves_b[combo]);
        const double weight = gamma * (coefficient[combo] < 0 ? -1.0 : 1.0) * la.sign * lb.sign;
        double shot = 0.0;
        for (std::size_t p = 0; p < terms.size(); ++p) {
            const double v = weight * terms[p].coefficient * outcome(rng, la.expectations[p]) *
                             outcome(rng, lb.expectations[p]);
            result.per_term_values[p] += v;
            shot += v;
        }
        sum += shot;
        sum_sq += shot * shot;
    }
    const double n = static_cast<double>(mode.shots);
    for (double &v : result.per_term_values) v /= n;
    result.value = sum / n;
    if (mode.shots > 1) {
        const double var = std::max(0.0, (sum_sq - n * result.value * result.value) / (n - 1));
        result.std_error = std::sqrt(var / n);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Overhead accounting.

struct OverheadReport {
    std::size_t adaptive_bond = 0;
    std::size_t baseline_bond = 0;
    double adaptive_overhead = 1.0;
    double baseline_overhead = 1.0;
    double ratio = 1.0;
    double discarded_weight = 0.0;
};

/// Profiles the circuit with an MPS at every gate boundary and compares the
/// entropy-guided plan with the balanced baseline.
inline OverheadReport overhead_reduction(const Circuit &circuit, const CutConstraints &constraints = {},
                                         const MpsOptions &mps = {}) {
    OverheadReport r;
    const EntropyProfile profile = entropy_profile(circuit, all_checkpoints(circuit), mps, &r.discarded_weight);
    const CutPlan adaptive = adaptive_plan(circuit, profile, constraints);
    const CutPlan baseline = baseline_plan(circuit);
    r.adaptive_bond = adaptive.cut_bond;
    r.baseline_bond = baseline.cut_bond;
    r.adaptive_overhead = adaptive.total_overhead;
    r.baseline_overhead = baseline.total_overhead;
    r.ratio = r.baseline_overhead / r.adaptive_overhead;
    return r;
}

struct EnsembleRow {
    std::uint64_t seed = 0;
    OverheadReport report;
};

/// Runs instances seeded first_seed, first_seed+1, ... on `jobs` threads.
/// Rows come back in seed order whatever the thread count.
inline std::vector<EnsembleRow> run_ensemble(const SpinChainSpec &base, std::uint64_t first_seed, std::size_t count,
                                             const CutConstraints &constraints = {}, const MpsOptions &mps = {},
                                             std::size_t jobs = 1) {
    std::vector<EnsembleRow> rows(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                const std::uint64_t seed = first_seed + i;
                rows[i] = {seed, overhead_reduction(build_spinchain_circuit(random_spinchain(base, seed)),
                                                    constraints, mps)};
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::max<std::size_t>(jobs, 1); ++t) pool.emplace_back(worker);
    worker();
    for (auto &th : pool) th.join();
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

inline double median_ratio(const std::vector<EnsembleRow> &rows) {
    if (rows.empty()) {
        throw std::invalid_argument("empty ensemble");
    }
    std::vector<double> r;
    for (const auto &row : rows) r.push_back(row.report.ratio);
    std::sort(r.begin(), r.end());
    const std::size_t m = r.size() / 2;
    return r.size() % 2 ? r[m] : (r[m - 1] + r[m]) / 2;
}

inline void write_ensemble_csv(std::ostream &out, const std::vector<EnsembleRow> &rows) {
    out << "seed,cut_bond,adaptive_overhead,baseline_overhead,ratio\n";
    std::ostringstream line;
    line.precision(17);
    for (const auto &row : rows) {
        line.str({});
        line << row.seed << ',' << row.report.adaptive_bond << ',' << row.report.adaptive_overhead << ','
             << row.report.baseline_overhead << ',' << row.report.ratio;
        out << line.str() << '\n';
    }
}

}  // namespace hqc
