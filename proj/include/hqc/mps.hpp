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
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hqc/circuit.hpp"
#include "hqc/statevector.hpp"

namespace hqc {

struct MpsOptions {
    std::size_t chi_max = 64;
    // Largest discarded weight (sum of dropped s^2) tolerated per truncation.
    double trunc_tol = 0.0;
    // Route non-adjacent two-qubit gates through SWAP chains.
    bool routing = true;
};

/// Matrix-product state with one site per qubit. Site i stores two
/// (left bond x right bond) matrices, one per physical value. Bond k sits
/// between qubits k and k+1, splitting {0..k} from {k+1..n-1}.
class MpsState {
  public:
    MpsState(std::size_t n_qubits, MpsOptions options) : n_(n_qubits), options_(options) {
        if (n_qubits == 0) {
            throw CircuitError("MPS needs at least one qubit");
        }
        if (options.chi_max < 1) {
            throw std::invalid_argument("chi_max must be at least 1");
        }
        sites_.resize(n_);
        for (auto &site : sites_) {
            site[0] = Eigen::MatrixXcd::Ones(1, 1);
            site[1] = Eigen::MatrixXcd::Zero(1, 1);
        }
        spectra_.assign(n_ > 0 ? n_ - 1 : 0, std::vector<double>{1.0});
    }

    std::size_t n_qubits() const {
        return n_;
    }
    const MpsOptions &options() const {
        return options_;
    }
    /// Norm fraction lost to truncation so far: 1 - prod(1 - w) over the
    /// per-step discarded weights w. Numerically zero singular values do not count.
    double discarded_weight() const {
        return discarded_;
    }
    std::size_t swaps_inserted() const {
        return swaps_;
    }
    std::size_t orthogonality_center() const {
        return center_;
    }
    bool is_canonical() const {
        return canonical_;
    }
    std::size_t bond_dimension(std::size_t bond) const {
        return static_cast<std::size_t>(sites_[bond][0].cols());
    }
    const std::array<Eigen::MatrixXcd, 2> &site(std::size_t i) const {
        return sites_[i];
    }
    /// Descending Schmidt values of `bond`, valid when is_canonical().
    const std::vector<double> &bond_spectrum(std::size_t bond) const {
        return spectra_[bond];
    }

    void apply(const Gate &g) {
        if (g.kind == GateKind::Measure) {
            return;
        }
        validate_gate(g, n_);
        if (g.param && g.param->is_symbolic()) {
            throw CircuitError("gate parameter '" + g.param->symbol() + "' is unbound");
        }
        if (g.qubits.size() > 2) {
            throw CircuitError("MPS simulation supports gates on at most two qubits");
        }
        const Eigen::MatrixXcd m = gate_matrix(g);
        if (g.qubits.size() == 1) {
            apply_single(g.qubits[0], m);
            return;
        }
        std::size_t a = g.qubits[0], b = g.qubits[1];
        Eigen::MatrixXcd u = m;
        if (a > b) {
            u = swap_bits(m);
            std::swap(a, b);
        }
        if (b == a + 1) {
            apply_adjacent(a, u);
            return;
        }
        if (!options_.routing) {
            throw CircuitError("non-adjacent two-qubit gate on qubits " + std::to_string(a) + "," +
                               std::to_string(b) + " with routing disabled");
        }
        // Carry qubit a rightwards next to b, apply, and carry it back.
        const Eigen::MatrixXcd sw = swap_matrix();
        for (std::size_t k = a; k + 1 < b; ++k) {
            apply_adjacent(k, sw);
            ++swaps_;
        }
        apply_adjacent(b - 1, u);
        for (std::size_t k = b - 1; k > a; --k) {
            apply_adjacent(k - 1, sw);
            ++swaps_;
        }
    }

    /// Left-to-right sweep that leaves every site left-orthonormal except the
    /// last and records exact Schmidt values on every bond.
    void canonicalize() {
        move_center(0);
        for (std::size_t k = 0; k + 1 < n_; ++k) {
            const Eigen::Index dl = sites_[k][0].rows(), dr = sites_[k][0].cols();
            Eigen::MatrixXcd m(2 * dl, dr);
            m.topRows(dl) = sites_[k][0];
            m.bottomRows(dl) = sites_[k][1];
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Eigen::VectorXd &s = svd.singularValues();
            Eigen::Index keep = 0;
            while (keep < s.size() && s[keep] > kZeroSingular) {
                ++keep;
            }
            keep = std::max<Eigen::Index>(keep, 1);
            const Eigen::MatrixXcd uk = svd.matrixU().leftCols(keep);
            sites_[k][0] = uk.topRows(dl);
            sites_[k][1] = uk.bottomRows(dl);
            const Eigen::MatrixXcd sv = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
            sites_[k + 1][0] = sv * sites_[k + 1][0];
            sites_[k + 1][1] = sv * sites_[k + 1][1];
            spectra_[k] = normalized(s.head(keep));
        }
        center_ = n_ - 1;
        canonical_ = true;
    }

    cplx amplitude(std::uint64_t index) const {
        Eigen::MatrixXcd row = sites_[0][index & 1];
        for (std::size_t i = 1; i < n_; ++i) {
            row = row * sites_[i][(index >> i) & 1];
        }
        return row(0, 0);
    }

    StateVector to_statevector() const {
        // psi has one row per basis prefix over qubits 0..i and one column per right bond index.
        Eigen::MatrixXcd psi(2, sites_[0][0].cols());
        psi.row(0) = sites_[0][0].row(0);
        psi.row(1) = sites_[0][1].row(0);
        for (std::size_t i = 1; i < n_; ++i) {
            const Eigen::Index rows = psi.rows();
            Eigen::MatrixXcd next(2 * rows, sites_[i][0].cols());
            next.topRows(rows) = psi * sites_[i][0];
            next.bottomRows(rows) = psi * sites_[i][1];
            psi = std::move(next);
        }
        std::vector<cplx> amps(static_cast<std::size_t>(psi.rows()));
        for (Eigen::Index r = 0; r < psi.rows(); ++r) {
            amps[static_cast<std::size_t>(r)] = psi(r, 0);
        }
        return StateVector(n_, std::move(amps));
    }

  private:
    static constexpr double kZeroSingular = 1e-13;

    static std::vector<double> normalized(const Eigen::VectorXd &s) {
        const double norm = s.norm();
        std::vector<double> out(static_cast<std::size_t>(s.size()));
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            out[static_cast<std::size_t>(i)] = s[i] / norm;
        }
        return out;
    }

    static Eigen::MatrixXcd swap_matrix() {
        Eigen::MatrixXcd sw = Eigen::MatrixXcd::Zero(4, 4);
        sw(0, 0) = sw(3, 3) = sw(1, 2) = sw(2, 1) = 1.0;
        return sw;
    }

    // Re-expresses a two-qubit matrix with its qubit order exchanged.
    static Eigen::MatrixXcd swap_bits(const Eigen::MatrixXcd &m) {
        const Eigen::MatrixXcd sw = swap_matrix();
        return sw * m * sw;
    }

    void apply_single(std::size_t q, const Eigen::MatrixXcd &u) {
        const Eigen::MatrixXcd a0 = sites_[q][0], a1 = sites_[q][1];
        sites_[q][0] = u(0, 0) * a0 + u(0, 1) * a1;
        sites_[q][1] = u(1, 0) * a0 + u(1, 1) * a1;
    }

    // QR / LQ steps moving the orthogonality center one site at a time.
    void move_center(std::size_t target) {
        while (center_ < target) {
            const std::size_t c = center_;
            const Eigen::Index dl = sites_[c][0].rows(), dr = sites_[c][0].cols();
            Eigen::MatrixXcd m(2 * dl, dr);
            m.topRows(dl) = sites_[c][0];
            m.bottomRows(dl) = sites_[c][1];
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
            const Eigen::Index k = std::min(2 * dl, dr);
            const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * dl, k);
            const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
            sites_[c][0] = q.topRows(dl);
            sites_[c][1] = q.bottomRows(dl);
            sites_[c + 1][0] = r * sites_[c + 1][0];
            sites_[c + 1][1] = r * sites_[c + 1][1];
            ++center_;
        }
        while (center_ > target) {
            const std::size_t c = center_;
            const Eigen::Index dl = sites_[c][0].rows(), dr = sites_[c][0].cols();
            // M[a, (s, b)] = L Q with Q having orthonormal rows; obtained from QR of M^†.
            Eigen::MatrixXcd m(dl, 2 * dr);
            m.leftCols(dr) = sites_[c][0];
            m.rightCols(dr) = sites_[c][1];
            const Eigen::MatrixXcd mh = m.adjoint();
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(mh);
            const Eigen::Index k = std::min(dl, 2 * dr);
            const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * dr, k);
            const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
            const Eigen::MatrixXcd qt = q.adjoint();  // k x 2dr
            const Eigen::MatrixXcd l = r.adjoint();   // dl x k
            sites_[c][0] = qt.leftCols(dr);
            sites_[c][1] = qt.rightCols(dr);
            sites_[c - 1][0] = sites_[c - 1][0] * l;
            sites_[c - 1][1] = sites_[c - 1][1] * l;
            --center_;
        }
    }

    // Contract sites i, i+1, apply u (bit 0 = qubit i), SVD and truncate.
    void apply_adjacent(std::size_t i, const Eigen::MatrixXcd &u) {
        move_center(i);
        const Eigen::Index dl = sites_[i][0].rows();
        const Eigen::Index dr = sites_[i + 1][0].cols();
        // theta[(s1, a), (s2, b)] with row = s1*dl + a, col = s2*dr + b.
        Eigen::MatrixXcd pair[2][2];
        for (int s1 = 0; s1 < 2; ++s1) {
            for (int s2 = 0; s2 < 2; ++s2) {
                pair[s1][s2] = sites_[i][s1] * sites_[i + 1][s2];
            }
        }
        Eigen::MatrixXcd theta(2 * dl, 2 * dr);
        for (int o1 = 0; o1 < 2; ++o1) {
            for (int o2 = 0; o2 < 2; ++o2) {
                Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(dl, dr);
                for (int s1 = 0; s1 < 2; ++s1) {
                    for (int s2 = 0; s2 < 2; ++s2) {
                        const cplx coef = u(o1 + 2 * o2, s1 + 2 * s2);
                        if (coef != cplx(0.0)) {
                            blk += coef * pair[s1][s2];
                        }
                    }
                }
                theta.block(o1 * dl, o2 * dr, dl, dr) = blk;
            }
        }
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd &s = svd.singularValues();
        const double total = s.squaredNorm();

        // Smallest rank whose tail weight fits trunc_tol, capped by chi_max.
        Eigen::Index nonzero = 0;
        while (nonzero < s.size() && s[nonzero] > kZeroSingular) {
            ++nonzero;
        }
        Eigen::Index keep = nonzero;
        double tail = 0.0;
        while (keep > 1) {
            const double w = s[keep - 1] * s[keep - 1] / total;
            if (tail + w > options_.trunc_tol) {
                break;
            }
            tail += w;
            --keep;
        }
        keep = std::clamp<Eigen::Index>(keep, 1, static_cast<Eigen::Index>(options_.chi_max));
        double dropped = 0.0;
        for (Eigen::Index j = keep; j < nonzero; ++j) {
            dropped += s[j] * s[j];
        }
        discarded_ = 1.0 - (1.0 - discarded_) * (1.0 - dropped / total);

        const Eigen::VectorXd kept = s.head(keep) / std::sqrt(s.head(keep).squaredNorm());
        const Eigen::MatrixXcd uk = svd.matrixU().leftCols(keep);
        const Eigen::MatrixXcd svh = kept.asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
        sites_[i][0] = uk.topRows(dl);
        sites_[i][1] = uk.bottomRows(dl);
        sites_[i + 1][0] = svh.leftCols(dr);
        sites_[i + 1][1] = svh.rightCols(dr);
        center_ = i + 1;
        spectra_[i].assign(kept.data(), kept.data() + kept.size());
        // An exact two-site update leaves every other bond's spectrum intact.
        if (dropped > 0.0) {
            canonical_ = false;
        }
    }

    std::size_t n_;
    MpsOptions options_;
    std::vector<std::array<Eigen::MatrixXcd, 2>> sites_;
    std::vector<std::vector<double>> spectra_;
    std::size_t center_ = 0;
    bool canonical_ = true;
    double discarded_ = 0.0;
    std::size_t swaps_ = 0;
};

inline MpsState mps_simulate(const Circuit &circuit, const MpsOptions &options) {
    if (!circuit.is_bound()) {
        throw CircuitError("circuit has unbound parameters: " + circuit.params().front());
    }
    MpsState state(circuit.n_qubits(), options);
    for (const Gate &g : circuit.gates()) {
        state.apply(g);
    }
    return state;
}

/// Von Neumann entropy in bits of a Schmidt spectrum.
inline double schmidt_entropy(const std::vector<double> &spectrum) {
    double s = 0.0;
    for (double v : spectrum) {
        const double p = v * v;
        if (p > 0.0) {
            s -= p * std::log2(p);
        }
    }
    return std::max(0.0, s);
}

/// Entropy of every interior bond. Non-canonical states are canonicalized on a copy.
inline std::vector<double> bond_entropies(const MpsState &state) {
    const MpsState *src = &state;
    MpsState copy = state;
    if (!state.is_canonical()) {
        copy.canonicalize();
        src = &copy;
    }
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < src->n_qubits(); ++k) {
        out.push_back(schmidt_entropy(src->bond_spectrum(k)));
    }
    return out;
}

using EntropyProfile = std::vector<std::vector<double>>;

/// Bond entropies after the first c gates for each checkpoint c. The final
/// discarded weight at the last checkpoint is stored through `discarded_weight` when given.
inline EntropyProfile entropy_profile(const Circuit &circuit, const std::vector<std::size_t> &checkpoints,
                                      const MpsOptions &options, double *discarded_weight = nullptr) {
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] > circuit.size()) {
            throw std::invalid_argument("checkpoint " + std::to_string(checkpoints[i]) + " exceeds gate count");
        }
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw std::invalid_argument("checkpoints must be strictly increasing");
        }
    }
    if (!circuit.is_bound()) {
        throw CircuitError("circuit has unbound parameters: " + circuit.params().front());
    }
    MpsState state(circuit.n_qubits(), options);
    EntropyProfile profile;
    std::size_t applied = 0;
    for (std::size_t cp : checkpoints) {
        while (applied < cp) {
            state.apply(circuit.gates()[applied++]);
        }
        MpsState copy = state;
        copy.canonicalize();
        profile.push_back(bond_entropies(copy));
    }
    if (discarded_weight != nullptr) {
        *discarded_weight = state.discarded_weight();
    }
    return profile;
}

/// Every gate boundary 0..gate count.
inline std::vector<std::size_t> all_checkpoints(const Circuit &circuit) {
    std::vector<std::size_t> cps(circuit.size() + 1);
    for (std::size_t i = 0; i < cps.size(); ++i) {
        cps[i] = i;
    }
    return cps;
}

/// CSV with one row per checkpoint and one column per bond.
inline void write_profile_csv(std::ostream &out, const EntropyProfile &profile,
                              const std::vector<std::size_t> &checkpoints) {
    const std::size_t bonds = profile.empty() ? 0 : profile.front().size();
    out << "checkpoint";
    for (std::size_t b = 0; b < bonds; ++b) {
        out << ",bond_" << b;
    }
    out << '\n';
    std::ostringstream row;
    row.precision(17);
    for (std::size_t r = 0; r < profile.size(); ++r) {
        row.str({});
        row << checkpoints[r];
        for (double v : profile[r]) {
            row << ',' << v;
        }
        out << row.str() << '\n';
    }
}

}  // namespace hqc
