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
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hqc/circuit.hpp"
#include "hqc/rng.hpp"
#include "hqc/statevector.hpp"

namespace hqc {

/// A x = b with A Hermitian positive definite of size 2^n, solved with an
/// m-qubit clock register. `scale` maps the spectrum of A into (0, 1/2].
struct LinearSystem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd b;
    std::size_t n = 0;
    std::size_t m = 0;
    double scale = 1.0;
};

inline constexpr double kHermitianTolerance = 1e-10;

namespace detail {

inline std::size_t log2_dimension(Eigen::Index dim) {
    if (dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
        throw std::invalid_argument("matrix dimension " + std::to_string(dim) + " is not a power of two");
    }
    return static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(dim)));
}

inline void check_hermitian(const Eigen::MatrixXcd &a) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("matrix is not square");
    }
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
        throw std::invalid_argument("matrix is not Hermitian");
    }
}

}  // namespace detail

/// Largest Gershgorin radius bound max_i sum_j |A_ij| >= |lambda_max|.
inline double gershgorin_bound(const Eigen::MatrixXcd &a) {
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline LinearSystem make_linear_system(Eigen::MatrixXcd a, Eigen::VectorXcd b, std::size_t m) {
    detail::check_hermitian(a);
    LinearSystem sys;
    sys.n = detail::log2_dimension(a.rows());
    if (b.size() != a.rows()) {
        throw std::invalid_argument("right-hand side length does not match the matrix");
    }
    if (b.norm() == 0.0) {
        throw std::invalid_argument("right-hand side is zero");
    }
    if (m < 1) {
        throw std::invalid_argument("clock register needs at least one qubit");
    }
    const Eigen::MatrixXcd herm = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("matrix must be positive definite");
    }
    sys.A = herm;
    sys.b = std::move(b);
    sys.m = m;
    sys.scale = 1.0 / (2.0 * gershgorin_bound(herm));
    return sys;
}

/// Reads {"A": rows of numbers or [re, im] pairs, "b": same, "m": int}.
inline LinearSystem linear_system_from_json(const nlohmann::json &doc, std::size_t default_m = 6) {
    auto scalar = [](const nlohmann::json &v) -> cplx {
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        throw std::invalid_argument("matrix entries must be numbers or [re, im] pairs");
    };
    const auto &rows = doc.at("A");
    if (!rows.is_array() || rows.empty()) {
        throw std::invalid_argument("\"A\" must be a non-empty list of rows");
    }
    const auto dim = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXcd a(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        const auto &row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
            throw std::invalid_argument("\"A\" must be square");
        }
        for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = scalar(row[static_cast<std::size_t>(c)]);
    }
    const auto &bj = doc.at("b");
    if (!bj.is_array()) {
        throw std::invalid_argument("\"b\" must be a list");
    }
    Eigen::VectorXcd b(static_cast<Eigen::Index>(bj.size()));
    for (std::size_t i = 0; i < bj.size(); ++i) b[static_cast<Eigen::Index>(i)] = scalar(bj[i]);
    return make_linear_system(std::move(a), std::move(b), doc.value("m", default_m));
}

inline nlohmann::json linear_system_to_json(const LinearSystem &sys) {
    nlohmann::json rows = nlohmann::json::array(), b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < sys.A.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < sys.A.cols(); ++c) row.push_back({sys.A(r, c).real(), sys.A(r, c).imag()});
        rows.push_back(row);
        b.push_back({sys.b[r].real(), sys.b[r].imag()});
    }
    return {{"A", rows}, {"b", b}, {"m", sys.m}};
}

/// c_P = Tr(P A) / 2^n for every Pauli string, zero terms dropped. Strings
/// are enumerated in lexicographic order over I < X < Y < Z.
inline PauliSum pauli_decompose(const Eigen::MatrixXcd &a) {
    detail::check_hermitian(a);
    const std::size_t n = detail::log2_dimension(a.rows());
    if (n > 8) {
        throw std::invalid_argument("Pauli decomposition is limited to 8 qubits");
    }
    const std::size_t dim = std::size_t{1} << n;
    const double tol = 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff());
    PauliSum out;
    std::string ops(n, 'I');
    const std::uint64_t strings = std::uint64_t{1} << (2 * n);
    for (std::uint64_t code = 0; code < strings; ++code) {
        std::size_t xmask = 0, zmask = 0, ny = 0;
        for (std::size_t k = 0; k < n; ++k) {
            // Leftmost character is the most significant base-4 digit and acts on qubit n-1.
            const auto digit = (code >> (2 * (n - 1 - k))) & 3;
            const std::size_t qubit = n - 1 - k;
            ops[k] = "IXYZ"[digit];
            if (digit == 1 || digit == 2) xmask |= std::size_t{1} << qubit;
            if (digit == 2 || digit == 3) zmask |= std::size_t{1} << qubit;
            ny += digit == 2;
        }
        // P|j> = i^{nY} (-1)^{|j & z|} |j ^ x>, so Tr(PA) = sum_j P_{j^x, j} A_{j, j^x}.
        static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        cplx trace = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double sign = std::popcount(j & zmask) % 2 ? -1.0 : 1.0;
            trace += sign * a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ xmask));
        }
        const double c = (kIPow[ny % 4] * trace).real() / static_cast<double>(dim);
        if (std::abs(c) > tol) {
            out.add(c, ops);
        }
    }
    return out;
}

/// Pivoted Gaussian elimination (full pivoting).
inline Eigen::VectorXcd classical_solve(const Eigen::MatrixXcd &a, const Eigen::VectorXcd &b) {
    if (a.rows() != a.cols() || b.size() != a.rows()) {
        throw std::invalid_argument("system dimensions do not match");
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible()) {
        throw std::invalid_argument("matrix is singular to working precision");
    }
    return lu.solve(b);
}

inline Eigen::VectorXcd classical_solve(const LinearSystem &sys) {
    return classical_solve(sys.A, sys.b);
}

// ---------------------------------------------------------------------------
// Circuit synthesis.

/// Controlled phase diag(1, 1, 1, e^{i theta}) up to global phase.
inline void append_controlled_phase(Circuit &c, std::size_t a, std::size_t b, double theta) {
    c.append(gates::rz(a, theta / 2));
    c.append(gates::rz(b, theta / 2));
    c.append(gates::rzz(a, b, -theta / 2));
}

inline void append_swap(Circuit &c, std::size_t a, std::size_t b) {
    c.append(gates::cx(a, b));
    c.append(gates::cx(b, a));
    c.append(gates::cx(a, b));
}

/// QFT |k> -> 2^{-m/2} sum_y e^{2 pi i k y / 2^m} |y>, with qubits[0] the
/// least significant bit of k and y. Exact up to global phase.
inline Circuit qft_circuit(std::size_t n_qubits, const std::vector<std::size_t> &qubits) {
    Circuit c(n_qubits);
    const std::size_t m = qubits.size();
    for (std::size_t i = m; i-- > 0;) {
        c.append(gates::h(qubits[i]));
        for (std::size_t j = i; j-- > 0;) {
            append_controlled_phase(c, qubits[j], qubits[i], std::numbers::pi / static_cast<double>(1ULL << (i - j)));
        }
    }
    for (std::size_t i = 0; i < m / 2; ++i) append_swap(c, qubits[i], qubits[m - 1 - i]);
    return c;
}

struct HhlOptions {
    // Apply the eigenvalue-inversion rotation; off leaves QPE followed by its inverse.
    bool rotation = true;
    // Append the inverse QPE.
    bool uncompute = true;
};

struct HhlLayout {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t clock(std::size_t j) const {
        return n + j;
    }
    std::size_t ancilla() const {
        return n + m;
    }
    std::size_t total() const {
        return n + m + 1;
    }
};

namespace detail {

// Unitary whose first column is b / |b|.
inline Eigen::MatrixXcd state_prep(const Eigen::VectorXcd &b) {
    const Eigen::Index dim = b.size();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(b);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
    const cplx r00 = qr.matrixQR()(0, 0);
    q.col(0) *= r00 / std::abs(r00);
    return q;
}

// blockdiag(I, e^{2 pi i A scale 2^power}) on [system..., control].
inline Eigen::MatrixXcd controlled_evolution(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> &es,
                                             double scale, std::size_t power) {
    const Eigen::Index dim = es.eigenvectors().rows();
    const double factor = 2.0 * std::numbers::pi * scale * std::ldexp(1.0, static_cast<int>(power));
    Eigen::VectorXcd phases(dim);
    for (Eigen::Index i = 0; i < dim; ++i) phases[i] = std::polar(1.0, factor * es.eigenvalues()[i]);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(2 * dim, 2 * dim);
    u.bottomRightCorner(dim, dim) = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return u;
}

// Ancilla RY(2 arcsin(C / lambda)) for each clock value k >= 1, with
// lambda = k / 2^m and C = 1 / 2^m. Qubit order: clock..., ancilla.
inline Eigen::MatrixXcd inversion_rotation(std::size_t m) {
    const Eigen::Index clock_dim = Eigen::Index{1} << m;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(2 * clock_dim, 2 * clock_dim);
    for (Eigen::Index k = 1; k < clock_dim; ++k) {
        const double half = std::asin(1.0 / static_cast<double>(k));
        const double c = std::cos(half), s = std::sin(half);
        u(k, k) = c;
        u(k, k + clock_dim) = -s;
        u(k + clock_dim, k) = s;
        u(k + clock_dim, k + clock_dim) = c;
    }
    return u;
}

inline Circuit qpe_circuit(const LinearSystem &sys, const HhlLayout &layout) {
    Circuit c(layout.total());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sys.A);
    std::vector<std::size_t> clock;
    for (std::size_t j = 0; j < sys.m; ++j) {
        clock.push_back(layout.clock(j));
        c.append(gates::h(layout.clock(j)));
    }
    for (std::size_t j = 0; j < sys.m; ++j) {
        std::vector<std::size_t> qubits;
        for (std::size_t q = 0; q < sys.n; ++q) qubits.push_back(q);
        qubits.push_back(layout.clock(j));
        c.append(gates::unitary(qubits, controlled_evolution(es, sys.scale, j), "c_u_pow" + std::to_string(j)));
    }
    c.append(qft_circuit(layout.total(), clock).inverse());
    return c;
}

}  // namespace detail

/// Qubits 0..n-1 hold the system, n..n+m-1 the clock (clock qubit j controls
/// U^{2^j}), and n+m the ancilla.
inline Circuit build_hhl_circuit(const LinearSystem &sys, const HhlOptions &options = {}) {
    const HhlLayout layout{sys.n, sys.m};
    if (layout.total() > kMaxStatevectorQubits) {
        throw std::invalid_argument("HHL circuit needs " + std::to_string(layout.total()) +
                                    " qubits, above the simulator cap");
    }
    Circuit c(layout.total());
    std::vector<std::size_t> system;
    for (std::size_t q = 0; q < sys.n; ++q) system.push_back(q);
    c.append(gates::unitary(system, detail::state_prep(sys.b), "prep_b"));
    const Circuit qpe = detail::qpe_circuit(sys, layout);
    c.append(qpe);
    if (options.rotation) {
        std::vector<std::size_t> qubits;
        for (std::size_t j = 0; j < sys.m; ++j) qubits.push_back(layout.clock(j));
        qubits.push_back(layout.ancilla());
        c.append(gates::unitary(qubits, detail::inversion_rotation(sys.m), "invert"));
    }
    if (options.uncompute) {
        c.append(qpe.inverse());
    }
    return c;
}

/// Conditions under which the clock register cannot resolve the spectrum.
inline std::vector<std::string> hhl_warnings(const LinearSystem &sys) {
    std::vector<std::string> out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sys.A, Eigen::EigenvaluesOnly);
    const double ticks = std::ldexp(1.0, static_cast<int>(sys.m));
    const double lowest = es.eigenvalues().minCoeff() * sys.scale * ticks;
    if (lowest < 1.0) {
        std::ostringstream msg;
        msg << "m=" << sys.m << " is too small: the smallest scaled eigenvalue spans " << lowest
            << " clock ticks (needs >= 1)";
        out.push_back(msg.str());
    }
    return out;
}

struct HhlResult {
    Eigen::VectorXcd x_quantum;    // unit norm, phase-aligned to x_classical
    Eigen::VectorXcd x_classical;  // unit norm
    double deviation = 0.0;
    double success_prob = 0.0;
    std::size_t pauli_terms = 0;
    std::vector<std::string> warnings;
};

/// min over global phase of |x_q - e^{i phi} x_c| for unit vectors.
inline double aligned_deviation(const Eigen::VectorXcd &xq, const Eigen::VectorXcd &xc) {
    const double overlap = std::abs(xc.dot(xq));
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::min(1.0, overlap)));
}

inline HhlResult solve(const LinearSystem &sys) {
    const HhlLayout layout{sys.n, sys.m};
    const StateVector state = simulate(build_hhl_circuit(sys));
    const std::size_t dim = std::size_t{1} << sys.n;
    const std::size_t offset = std::size_t{1} << layout.ancilla();  // ancilla = 1, clock = 0
    HhlResult r;
    r.x_quantum.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) r.x_quantum[static_cast<Eigen::Index>(i)] = state[offset + i];
    r.success_prob = r.x_quantum.squaredNorm();
    if (!(r.success_prob > 0.0)) {
        throw std::runtime_error("postselection probability is zero");
    }
    r.x_quantum /= std::sqrt(r.success_prob);
    r.x_classical = classical_solve(sys);
    r.x_classical.normalize();
    const cplx overlap = r.x_quantum.dot(r.x_classical);  // <x_q, x_c>
    if (std::abs(overlap) > 0.0) {
        r.x_quantum *= overlap / std::abs(overlap);
    }
    r.deviation = aligned_deviation(r.x_quantum, r.x_classical);
    r.pauli_terms = pauli_decompose(sys.A).terms().size();
    r.warnings = hhl_warnings(sys);
    return r;
}

/// Random real SPD matrix Q diag(lambda) Q^T with eigenvalues drawn from
/// U[lambda_lo, lambda_hi] and Q orthogonal (QR of a Gaussian matrix).
inline Eigen::MatrixXcd random_spd_matrix(std::size_t dim, double lambda_lo, double lambda_hi, Rng &rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) lambda[i] = rng.uniform(lambda_lo, lambda_hi);
    const Eigen::MatrixXd a = q * lambda.asDiagonal() * q.transpose();
    return ((a + a.transpose()) / 2.0).cast<cplx>();
}

inline Eigen::VectorXcd random_gaussian_vector(std::size_t dim, Rng &rng) {
    Eigen::VectorXcd b(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
    return b;
}

/// One row per component: quantum and classical amplitudes plus the global deviation.
inline void write_hhl_csv(std::ostream &out, const HhlResult &r) {
    out << "index,x_quantum_re,x_quantum_im,x_classical_re,x_classical_im,deviation\n";
    std::ostringstream row;
    row.precision(17);
    for (Eigen::Index i = 0; i < r.x_quantum.size(); ++i) {
        row.str({});
        row << i << ',' << r.x_quantum[i].real() << ',' << r.x_quantum[i].imag() << ',' << r.x_classical[i].real()
            << ',' << r.x_classical[i].imag() << ',' << r.deviation;
        out << row.str() << '\n';
    }
}

}  // namespace hqc
