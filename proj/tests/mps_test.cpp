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

#include "hqc/mps.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace hqc {
namespace {

using testutil::fidelity;
using testutil::to_eigen;

Eigen::VectorXcd mps_vector(const MpsState &m) {
    return to_eigen(m.to_statevector());
}

// Disordered Ising Trotter circuit built gate by gate.
Circuit ising_trotter(std::size_t n, std::size_t steps, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> j(n - 1), h(n), g(n);
    for (auto &v : j) v = rng.uniform(0.0, 1.0);
    for (auto &v : h) v = rng.uniform(0.0, 1.0);
    for (auto &v : g) v = rng.uniform(0.0, 0.5);
    const double dt = 1.0 / static_cast<double>(steps);
    Circuit c(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i + 1 < n; ++i) c.append(gates::rzz(i, i + 1, 2 * j[i] * dt));
        for (std::size_t i = 0; i < n; ++i) c.append(gates::rx(i, 2 * h[i] * dt));
        for (std::size_t i = 0; i < n; ++i) c.append(gates::rz(i, 2 * g[i] * dt));
    }
    return c;
}

TEST(Mps, ProductStateHasUnitBonds) {
    Circuit c(6);
    for (std::size_t q = 0; q < 6; ++q) c.append(gates::h(q));
    MpsState m = mps_simulate(c, {});
    for (std::size_t b = 0; b < 5; ++b) EXPECT_EQ(m.bond_dimension(b), 1u);
    for (double s : bond_entropies(m)) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Mps, BellSpectrum) {
    Circuit c(2);
    c.append(gates::h(0));
    c.append(gates::cx(0, 1));
    MpsState m = mps_simulate(c, {});
    m.canonicalize();
    const auto &spec = m.bond_spectrum(0);
    ASSERT_EQ(spec.size(), 2u);
    EXPECT_NEAR(spec[0], std::numbers::sqrt2 / 2, 1e-12);
    EXPECT_NEAR(spec[1], std::numbers::sqrt2 / 2, 1e-12);
    EXPECT_NEAR(bond_entropies(m)[0], 1.0, 1e-12);
}

TEST(Mps, GhzFourHasOneBitEverywhere) {
    Circuit c(4);
    c.append(gates::h(0));
    for (std::size_t q = 0; q + 1 < 4; ++q) c.append(gates::cx(q, q + 1));
    for (double s : bond_entropies(mps_simulate(c, {}))) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Mps, BellAcrossMiddleBondOnly) {
    Circuit c(4);
    c.append(gates::h(1));
    c.append(gates::cx(1, 2));
    const auto s = bond_entropies(mps_simulate(c, {}));
    EXPECT_NEAR(s[0], 0.0, 1e-12);
    EXPECT_NEAR(s[1], 1.0, 1e-12);
    EXPECT_NEAR(s[2], 0.0, 1e-12);
}

TEST(Mps, ChiBelowOneRejected) {
    MpsOptions o;
    o.chi_max = 0;
    EXPECT_THROW(mps_simulate(Circuit(2), o), std::invalid_argument);
}

TEST(Mps, NonAdjacentWithoutRoutingRejected) {
    Circuit c(3);
    c.append(gates::cx(0, 2));
    MpsOptions o;
    o.routing = false;
    EXPECT_THROW(mps_simulate(c, o), CircuitError);
}

TEST(Mps, UnboundParamRejected) {
    Circuit c(2);
    c.append(gates::rz(0, "a"));
    EXPECT_THROW(mps_simulate(c, {}), CircuitError);
}

TEST(Mps, ExactForRandomNearestNeighborCircuits) {
    Rng rng(11);
    for (std::size_t n = 2; n <= 12; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            Circuit c = testutil::random_circuit(rng, {n, 12 * n, true, false});
            MpsOptions o;
            o.chi_max = std::size_t{1} << (n / 2);
            MpsState m = mps_simulate(c, o);
            const Eigen::VectorXcd ref = to_eigen(simulate(c));
            const Eigen::VectorXcd got = mps_vector(m);
            EXPECT_GE(fidelity(ref, got), 1.0 - 1e-10) << "n=" << n;
            // Amplitudes, not just overlap: the MPS carries no stray global phase.
            EXPECT_LT((ref - got).norm(), 1e-10) << "n=" << n;
            EXPECT_EQ(m.discarded_weight(), 0.0);
            for (std::size_t b = 0; b + 1 < n; ++b) EXPECT_LE(m.bond_dimension(b), o.chi_max);
        }
    }
}

TEST(Mps, TenQubitExampleWithChi32) {
    Rng rng(2026);
    Circuit c = testutil::random_circuit(rng, {10, 200, true, false});
    MpsOptions o;
    o.chi_max = 32;
    EXPECT_GE(fidelity(to_eigen(simulate(c)), mps_vector(mps_simulate(c, o))), 1.0 - 1e-10);
}

TEST(Mps, RoutingMatchesStatevectorAndCountsSwaps) {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        Circuit c = testutil::random_circuit(rng, {7, 60, false, false});
        MpsOptions o;
        o.chi_max = 16;
        MpsState m = mps_simulate(c, o);
        EXPECT_GE(fidelity(to_eigen(simulate(c)), mps_vector(m)), 1.0 - 1e-10);
    }
    Circuit c(5);
    c.append(gates::cx(4, 0));
    MpsState m = mps_simulate(c, {});
    EXPECT_EQ(m.swaps_inserted(), 6u);
}

TEST(Mps, SpectraNormalizedAndEntropyBounded) {
    Rng rng(17);
    for (std::size_t chi : {1u, 2u, 4u, 8u}) {
        Circuit c = testutil::random_circuit(rng, {8, 120, true, false});
        MpsOptions o;
        o.chi_max = chi;
        MpsState m = mps_simulate(c, o);
        m.canonicalize();
        for (std::size_t k = 0; k + 1 < 8; ++k) {
            double total = 0;
            const auto &spec = m.bond_spectrum(k);
            for (std::size_t i = 0; i < spec.size(); ++i) {
                total += spec[i] * spec[i];
                if (i > 0) EXPECT_LE(spec[i], spec[i - 1] + 1e-15);
            }
            EXPECT_NEAR(total, 1.0, 1e-8);
        }
        const auto s = bond_entropies(m);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double cap = std::log2(static_cast<double>(
                std::min({std::size_t{1} << (k + 1), std::size_t{1} << (8 - k - 1), chi})));
            EXPECT_GE(s[k], 0.0);
            EXPECT_LE(s[k], cap + 1e-9);
        }
    }
}

TEST(Mps, DiscardedWeightMonotoneInChi) {
    Rng rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        Circuit c = testutil::random_circuit(rng, {10, 150, true, false});
        double previous = 2.0;
        for (std::size_t chi = 1; chi <= 32; chi *= 2) {
            MpsOptions o;
            o.chi_max = chi;
            const double w = mps_simulate(c, o).discarded_weight();
            EXPECT_LE(w, previous + 1e-12) << "chi=" << chi;
            previous = w;
        }
        EXPECT_NEAR(previous, 0.0, 1e-20);
    }
}

TEST(Mps, TruncToleranceBoundsPerStepLoss) {
    Rng rng(29);
    Circuit c = testutil::random_circuit(rng, {10, 150, true, false});
    MpsOptions o;
    o.trunc_tol = 1e-3;
    MpsState m = mps_simulate(c, o);
    const double f = fidelity(to_eigen(simulate(c)), mps_vector(m));
    EXPECT_GE(f, 1.0 - 2 * m.discarded_weight() - 1e-9);
}

TEST(Mps, CheckpointZeroIsProductState) {
    Circuit c = ising_trotter(6, 2, 1);
    const auto p = entropy_profile(c, {0}, {});
    ASSERT_EQ(p.size(), 1u);
    for (double s : p[0]) EXPECT_EQ(s, 0.0);
}

TEST(Mps, BellProfileHasOneNonzeroColumn) {
    Circuit c(4);
    c.append(gates::h(2));
    c.append(gates::cx(2, 3));
    const auto p = entropy_profile(c, {2}, {});
    int nonzero = 0;
    for (double s : p[0]) nonzero += s > 1e-12;
    EXPECT_EQ(nonzero, 1);
    EXPECT_NEAR(p[0][2], 1.0, 1e-12);
}

TEST(Mps, TrotterProfileMatchesReducedDensityMatrices) {
    Circuit c = ising_trotter(12, 4, 99);
    std::vector<std::size_t> cps;
    for (std::size_t i = 0; i <= c.size(); i += 23) cps.push_back(i);
    if (cps.back() != c.size()) cps.push_back(c.size());
    MpsOptions o;
    o.chi_max = 1 << 12;
    const auto profile = entropy_profile(c, cps, o);
    for (std::size_t r = 0; r < cps.size(); ++r) {
        Circuit prefix(12);
        for (std::size_t i = 0; i < cps[r]; ++i) prefix.append(c.gates()[i]);
        const auto ref = testutil::statevector_bond_entropies(simulate(prefix));
        for (std::size_t k = 0; k < ref.size(); ++k) {
            EXPECT_NEAR(profile[r][k], ref[k], 1e-6) << "checkpoint " << cps[r] << " bond " << k;
        }
    }
}

TEST(Mps, ProfileRejectsBadCheckpoints) {
    Circuit c = ising_trotter(4, 1, 3);
    EXPECT_THROW(entropy_profile(c, {1, 1}, {}), std::invalid_argument);
    EXPECT_THROW(entropy_profile(c, {c.size() + 1}, {}), std::invalid_argument);
}

TEST(Mps, ProfileCsvShape) {
    const EntropyProfile p = {{0.0, 0.0}, {0.5, 1.0}};
    std::ostringstream out;
    write_profile_csv(out, p, {0, 7});
    EXPECT_EQ(out.str(), "checkpoint,bond_0,bond_1\n0,0,0\n7,0.5,1\n");
}

}  // namespace
}  // namespace hqc
