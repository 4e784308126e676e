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

#include "hqc/qasm.hpp"

#include <gtest/gtest.h>

#include "hqc/statevector.hpp"
#include "test_util.hpp"

using namespace hqc;

TEST(QasmParse, single_hadamard) {
    const Circuit c = qasm::parse("OPENQASM 2.0; qreg q[1]; h q[0];");
    ASSERT_EQ(c.n_qubits(), 1u);
    ASSERT_EQ(c.size(), 1u);
    ASSERT_EQ(c.gates()[0], gates::h(0));
}

TEST(QasmParse, index_out_of_range_reports_location) {
    try {
        qasm::parse("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[5];\n");
        FAIL() << "expected QasmError";
    } catch (const qasm::QasmError &e) {
        ASSERT_EQ(e.line(), 3u);
        ASSERT_EQ(e.column(), 11u);
        ASSERT_NE(e.message().find("out of range"), std::string::npos);
    }
}

TEST(QasmParse, bell_program_samples_only_correlated_outcomes) {
    const Circuit c = qasm::parse(R"(OPENQASM 2.0;
qreg q[2];
creg c[2];
h q[0];
cx q[0],q[1];
measure q[0] -> c[0];
measure q[1] -> c[1];
)");
    ASSERT_EQ(c.size(), 4u);
    const Counts counts = sample(simulate(c), 2000, 3);
    for (const auto &[bits, n] : counts) {
        ASSERT_TRUE(bits == "00" || bits == "11") << bits;
    }
}

TEST(QasmParse, angle_forms) {
    const Circuit c = qasm::parse(
        "OPENQASM 2.0; qreg q[1]; rz(pi) q[0]; rz(-pi/2) q[0]; rz(3*pi/4) q[0]; rz(2*pi) q[0]; rz(-0.25) q[0]; "
        "rz(1e-3) q[0]; rz(.5) q[0];");
    const double pi = std::numbers::pi;
    const std::vector<double> expected = {pi, -(pi / 2), 3 * pi / 4, 2 * pi, -0.25, 1e-3, 0.5};
    ASSERT_EQ(c.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        ASSERT_EQ(c.gates()[i].param->value(), expected[i]) << i;
    }
}

TEST(QasmParse, diagnostics) {
    auto message_of = [](std::string_view src) {
        try {
            qasm::parse(src);
        } catch (const qasm::QasmError &e) {
            return e.message();
        }
        return std::string("no error");
    };
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[1]; foo q[0];").find("unknown gate"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[1]; rz(pi*2) q[0];").find("angle syntax"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[1]; rz(0.5/2) q[0];").find("angle syntax"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[1]; h q[0]; $").find("unexpected character"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 3.0; qreg q[1];").find("version"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[2]; cx q[0];").find("expects 2"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[2]; h r[0];").find("unknown qreg"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[2]; measure q[0] -> c[0];").find("creg"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; h q[0];").find("before qreg"), std::string::npos);
    EXPECT_NE(message_of("OPENQASM 2.0; qreg q[1]; rx q[0];").find("requires an angle"), std::string::npos);
}

TEST(QasmParse, accepts_standard_include_and_comments) {
    const Circuit c = qasm::parse("// bell\nOPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2]; // reg\nh q[0];\n");
    ASSERT_EQ(c.size(), 1u);
}

TEST(QasmEmit, hadamard_canonical_body) {
    Circuit c(1);
    c.append(gates::h(0));
    ASSERT_EQ(qasm::emit(c), "OPENQASM 2.0;\nqreg q[1];\nh q[0];\n");
}

TEST(QasmEmit, rzz_half_pi) {
    Circuit c(2);
    c.append(gates::rzz(0, 1, std::numbers::pi / 2));
    ASSERT_EQ(qasm::emit(c), "OPENQASM 2.0;\nqreg q[2];\nrzz(pi/2) q[0],q[1];\n");
}

TEST(QasmEmit, measure_adds_creg) {
    Circuit c(2);
    c.append(gates::h(1)).append(gates::measure(1));
    ASSERT_EQ(qasm::emit(c), "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\nh q[1];\nmeasure q[1] -> c[1];\n");
}

TEST(QasmEmit, rejects_unbound_and_unitary) {
    Circuit c(1);
    c.append(gates::rz(0, "a"));
    ASSERT_THROW(qasm::emit(c), CircuitError);
    Circuit u(1);
    u.append(gates::unitary({0}, Eigen::MatrixXcd::Identity(2, 2)));
    ASSERT_THROW(qasm::emit(u), CircuitError);
}

TEST(QasmEmit, canonical_form_of_source) {
    const std::string src = "OPENQASM 2.0;  qreg   q[3];\n  cx q[2] , q[0] ; rz( -3*pi/4 ) q[1];rx(0.10) q[0];";
    ASSERT_EQ(qasm::emit(qasm::parse(src)),
              "OPENQASM 2.0;\nqreg q[3];\ncx q[2],q[0];\nrz(-3*pi/4) q[1];\nrx(0.1) q[0];\n");
}

TEST(QasmRoundTrip, parse_emit_identity_on_random_circuits) {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        testutil::RandomCircuitOptions opt;
        opt.n_qubits = 1 + rng.below(6);
        opt.n_gates = rng.below(51);
        opt.with_measure = rng.below(4) == 0;
        Circuit c = testutil::random_circuit(rng, opt);
        // Mix in exact multiples of pi so both angle spellings are exercised.
        if (opt.n_qubits >= 1 && rng.below(2)) {
            c.append(gates::rz(0, static_cast<double>(rng.below(7) + 1) * std::numbers::pi / 8));
        }
        const std::string text = qasm::emit(c);
        ASSERT_EQ(qasm::parse(text), c) << text;
    }
}

TEST(QasmFuzz, arbitrary_bytes_yield_diagnostics) {
    Rng rng(99);
    const std::string seed_program = "OPENQASM 2.0;\nqreg q[3];\ncreg c[3];\nh q[0];\nrzz(pi/2) q[0],q[1];\n"
                                     "rx(-0.5) q[2];\nmeasure q[0] -> c[0];\n";
    int parsed = 0, rejected = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        std::string input;
        if (trial % 2 == 0) {
            const std::size_t len = rng.below(200);
            for (std::size_t i = 0; i < len; ++i) {
                input.push_back(static_cast<char>(rng.below(256)));
            }
        } else {
            input = seed_program;
            const std::size_t edits = 1 + rng.below(4);
            for (std::size_t e = 0; e < edits; ++e) {
                const std::size_t pos = rng.below(input.size());
                switch (rng.below(3)) {
                    case 0: input[pos] = static_cast<char>(rng.below(256)); break;
                    case 1: input.erase(pos, 1 + rng.below(5)); break;
                    default: input.insert(pos, 1, "q[];,()-*/pi0123456789 \n"[rng.below(24)]); break;
                }
                if (input.empty()) {
                    break;
                }
            }
        }
        try {
            qasm::parse(input);
            ++parsed;
        } catch (const qasm::QasmError &e) {
            ASSERT_GE(e.line(), 1u);
            ASSERT_GE(e.column(), 1u);
            ++rejected;
        }
    }
    ASSERT_GT(rejected, 0);
}
