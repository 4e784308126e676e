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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hqc/circuit.hpp"

namespace hqc::qasm {

/// Parse failure with a 1-based source location.
class QasmError : public std::runtime_error {
  public:
    QasmError(std::size_t line, std::size_t column, const std::string &message)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column),
          message_(message) {
    }
    std::size_t line() const {
        return line_;
    }
    std::size_t column() const {
        return column_;
    }
    const std::string &message() const {
        return message_;
    }

  private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

namespace detail {

enum class Tok { Ident, Number, String, Semi, Comma, LBracket, RBracket, LParen, RParen, Star, Slash, Minus, Arrow, End };

struct Token {
    Tok kind;
    std::string_view text;
    std::size_t line;
    std::size_t column;
};

inline std::string_view describe(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Minus: return "'-'";
        case Tok::Arrow: return "'->'";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {
    }

    Token next() {
        skip_space_and_comments();
        const std::size_t line = line_, col = col_;
        if (pos_ >= src_.size()) {
            return {Tok::End, {}, line, col};
        }
        const char c = src_[pos_];
        auto single = [&](Tok k) {
            advance(1);
            return Token{k, src_.substr(pos_ - 1, 1), line, col};
        };
        if (is_alpha(c)) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) {
                advance(1);
            }
            return {Tok::Ident, src_.substr(start, pos_ - start), line, col};
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            return lex_number(line, col);
        }
        switch (c) {
            case ';': return single(Tok::Semi);
            case ',': return single(Tok::Comma);
            case '[': return single(Tok::LBracket);
            case ']': return single(Tok::RBracket);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case '*': return single(Tok::Star);
            case '/': return single(Tok::Slash);
            case '-':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
                    advance(2);
                    return {Tok::Arrow, src_.substr(pos_ - 2, 2), line, col};
                }
                return single(Tok::Minus);
            case '"': {
                const std::size_t start = pos_;
                advance(1);
                while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
                    advance(1);
                }
                if (pos_ >= src_.size() || src_[pos_] != '"') {
                    throw QasmError(line, col, "unterminated string literal");
                }
                advance(1);
                return {Tok::String, src_.substr(start + 1, pos_ - start - 2), line, col};
            }
            default: break;
        }
        const auto byte = static_cast<unsigned char>(c);
        std::string shown = (byte >= 0x20 && byte < 0x7f) ? std::string(1, c) : "\\x" + hex(byte);
        throw QasmError(line, col, "unexpected character '" + shown + "'");
    }

  private:
    static bool is_alpha(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_digit(char c) {
        return c >= '0' && c <= '9';
    }
    static std::string hex(unsigned char b) {
        static constexpr char kDigits[] = "0123456789abcdef";
        return {kDigits[b >> 4], kDigits[b & 15]};
    }

    void advance(std::size_t k) {
        for (std::size_t i = 0; i < k && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance(1);
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance(1);
                }
            } else {
                break;
            }
        }
    }

    Token lex_number(std::size_t line, std::size_t col) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) {
            advance(1);
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance(1);
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                advance(1);
            }
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) {
                ++look;
            }
            if (look >= src_.size() || !is_digit(src_[look])) {
                throw QasmError(line_, col_, "malformed exponent in numeric literal");
            }
            advance(look - pos_);
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                advance(1);
            }
        }
        return {Tok::Number, src_.substr(start, pos_ - start), line, col};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

inline constexpr std::uint64_t kMaxRegisterSize = 4096;

class Parser {
  public:
    explicit Parser(std::string_view src) : lex_(src) {
        tok_ = lex_.next();
    }

    Circuit parse_program() {
        expect_keyword("OPENQASM");
        const Token version = expect(Tok::Number);
        if (version.text != "2.0") {
            throw QasmError(version.line, version.column,
                            "unsupported OPENQASM version '" + std::string(version.text) + "' (expected 2.0)");
        }
        expect(Tok::Semi);
        std::optional<Circuit> circuit;
        while (tok_.kind != Tok::End) {
            const Token head = expect(Tok::Ident);
            if (head.text == "include") {
                const Token file = expect(Tok::String);
                if (file.text != "qelib1.inc") {
                    throw QasmError(file.line, file.column, "include files are not supported");
                }
                expect(Tok::Semi);
            } else if (head.text == "qreg" || head.text == "creg") {
                parse_register(head, circuit);
            } else {
                if (!circuit) {
                    throw QasmError(head.line, head.column, "gate statement before qreg declaration");
                }
                parse_gate(head, *circuit);
            }
        }
        if (!circuit) {
            throw QasmError(tok_.line, tok_.column, "program declares no qreg");
        }
        return std::move(*circuit);
    }

  private:
    Token take() {
        Token t = tok_;
        tok_ = lex_.next();
        return t;
    }

    Token expect(Tok kind) {
        if (tok_.kind != kind) {
            throw QasmError(tok_.line, tok_.column,
                            "expected " + std::string(describe(kind)) + ", found " + found_text());
        }
        return take();
    }

    void expect_keyword(std::string_view word) {
        if (tok_.kind != Tok::Ident || tok_.text != word) {
            throw QasmError(tok_.line, tok_.column, "expected '" + std::string(word) + "', found " + found_text());
        }
        take();
    }

    std::string found_text() const {
        if (tok_.kind == Tok::End) {
            return "end of input";
        }
        return "'" + std::string(tok_.text) + "'";
    }

    std::uint64_t parse_index(const Token &t) {
        std::uint64_t v = 0;
        const char *first = t.text.data();
        const char *last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw QasmError(t.line, t.column, "expected a non-negative integer, found '" + std::string(t.text) + "'");
        }
        return v;
    }

    void parse_register(const Token &head, std::optional<Circuit> &circuit) {
        const Token name = expect(Tok::Ident);
        expect(Tok::LBracket);
        const Token size_tok = expect(Tok::Number);
        const std::uint64_t size = parse_index(size_tok);
        expect(Tok::RBracket);
        expect(Tok::Semi);
        if (size == 0 || size > kMaxRegisterSize) {
            throw QasmError(size_tok.line, size_tok.column, "register size must be in [1, 4096]");
        }
        if (head.text == "qreg") {
            if (circuit) {
                throw QasmError(head.line, head.column, "only one qreg is supported");
            }
            qreg_name_ = name.text;
            circuit.emplace(static_cast<std::size_t>(size));
        } else {
            if (creg_size_) {
                throw QasmError(head.line, head.column, "only one creg is supported");
            }
            creg_name_ = name.text;
            creg_size_ = size;
        }
    }

    std::size_t parse_operand(std::string_view reg_name, std::uint64_t reg_size, const char *what) {
        const Token name = expect(Tok::Ident);
        if (name.text != reg_name) {
            throw QasmError(name.line, name.column, "unknown " + std::string(what) + " '" + std::string(name.text) + "'");
        }
        expect(Tok::LBracket);
        const Token idx_tok = expect(Tok::Number);
        const std::uint64_t idx = parse_index(idx_tok);
        expect(Tok::RBracket);
        if (idx >= reg_size) {
            throw QasmError(idx_tok.line, idx_tok.column,
                            "index " + std::string(idx_tok.text) + " out of range for " + std::string(what) + " '" +
                                std::string(reg_name) + "' of size " + std::to_string(reg_size));
        }
        return static_cast<std::size_t>(idx);
    }

    double parse_number_value(const Token &t) {
        double v = 0;
        const char *first = t.text.data();
        const char *last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            throw QasmError(t.line, t.column, "invalid numeric literal '" + std::string(t.text) + "'");
        }
        return v;
    }

    // angle := '-'? ( 'pi' ('/' INT)? | NUMBER ('*' 'pi' ('/' INT)?)? )
    double parse_angle() {
        const Token start = tok_;
        double sign = 1.0;
        if (tok_.kind == Tok::Minus) {
            take();
            sign = -1.0;
        }
        double numerator;
        bool has_pi = false;
        if (tok_.kind == Tok::Ident && tok_.text == "pi") {
            take();
            numerator = std::numbers::pi;
            has_pi = true;
        } else if (tok_.kind == Tok::Number) {
            numerator = parse_number_value(take());
            if (tok_.kind == Tok::Star) {
                take();
                if (tok_.kind != Tok::Ident || tok_.text != "pi") {
                    throw QasmError(tok_.line, tok_.column, "angle syntax: expected 'pi' after '*'");
                }
                take();
                numerator *= std::numbers::pi;
                has_pi = true;
            }
        } else {
            throw QasmError(start.line, start.column, "angle syntax: expected number or 'pi', found " + found_text());
        }
        if (tok_.kind == Tok::Slash) {
            if (!has_pi) {
                throw QasmError(tok_.line, tok_.column, "angle syntax: division is only allowed after 'pi'");
            }
            take();
            const Token den = expect(Tok::Number);
            const std::uint64_t d = parse_index(den);
            if (d == 0) {
                throw QasmError(den.line, den.column, "angle syntax: division by zero");
            }
            numerator /= static_cast<double>(d);
        }
        if (tok_.kind != Tok::RParen) {
            throw QasmError(tok_.line, tok_.column, "angle syntax: unexpected " + found_text());
        }
        return sign * numerator;
    }

    void parse_gate(const Token &head, Circuit &circuit) {
        if (head.text == "measure") {
            const std::size_t q = parse_operand(qreg_name_, circuit.n_qubits(), "qreg");
            expect(Tok::Arrow);
            if (!creg_size_) {
                throw QasmError(tok_.line, tok_.column, "measure requires a creg declaration");
            }
            parse_operand(creg_name_, *creg_size_, "creg");
            expect(Tok::Semi);
            circuit.append(gates::measure(q));
            return;
        }
        const auto kind = gate_kind_from_name(head.text);
        if (!kind) {
            throw QasmError(head.line, head.column, "unknown gate '" + std::string(head.text) + "'");
        }
        std::optional<Param> param;
        if (tok_.kind == Tok::LParen) {
            const Token lp = take();
            if (!is_rotation(*kind)) {
                throw QasmError(lp.line, lp.column, "gate '" + std::string(head.text) + "' takes no angle");
            }
            param = Param(parse_angle());
            expect(Tok::RParen);
        } else if (is_rotation(*kind)) {
            throw QasmError(tok_.line, tok_.column, "gate '" + std::string(head.text) + "' requires an angle");
        }
        std::vector<std::size_t> qubits;
        qubits.push_back(parse_operand(qreg_name_, circuit.n_qubits(), "qreg"));
        while (tok_.kind == Tok::Comma) {
            take();
            qubits.push_back(parse_operand(qreg_name_, circuit.n_qubits(), "qreg"));
        }
        expect(Tok::Semi);
        try {
            circuit.append(Gate{*kind, std::move(qubits), param, nullptr, {}});
        } catch (const CircuitError &e) {
            throw QasmError(head.line, head.column, e.what());
        }
    }

    Lexer lex_;
    Token tok_;
    std::string_view qreg_name_;
    std::string_view creg_name_;
    std::optional<std::uint64_t> creg_size_;
};

inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Text for an angle that parses back to exactly the same double. Rational
/// multiples of pi with small denominators are printed symbolically.
inline std::string format_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw CircuitError("cannot emit non-finite angle");
    }
    if (angle != 0.0) {
        const double mag = std::abs(angle);
        const char *sign = angle < 0 ? "-" : "";
        for (std::uint64_t den = 1; den <= 64; ++den) {
            const double k_real = mag * static_cast<double>(den) / std::numbers::pi;
            const double k = std::round(k_real);
            if (k < 1 || k > 1024) {
                continue;
            }
            if (std::gcd(static_cast<std::uint64_t>(k), den) != 1) {
                continue;
            }
            // Mirror the parser's evaluation order exactly.
            double reparsed = (k == 1 ? std::numbers::pi : k * std::numbers::pi);
            if (den != 1) {
                reparsed /= static_cast<double>(den);
            }
            if (reparsed != mag) {
                continue;
            }
            std::string out = sign;
            if (k != 1) {
                out += shortest(k) + "*";
            }
            out += "pi";
            if (den != 1) {
                out += "/" + std::to_string(den);
            }
            return out;
        }
    }
    return shortest(angle);
}

}  // namespace detail

/// Parses the supported OpenQASM 2 subset into a circuit.
inline Circuit parse(std::string_view text) {
    detail::Parser parser(text);
    return parser.parse_program();
}

/// Canonical text for a bound circuit: header, qreg, creg when measuring,
/// then one statement per line.
inline std::string emit(const Circuit &circuit) {
    if (!circuit.is_bound()) {
        throw CircuitError("cannot emit circuit with unbound parameter '" + circuit.params().front() + "'");
    }
    std::string out = "OPENQASM 2.0;\n";
    const std::string n = std::to_string(circuit.n_qubits());
    out += "qreg q[" + n + "];\n";
    if (circuit.has_measurements()) {
        out += "creg c[" + n + "];\n";
    }
    for (const Gate &g : circuit.gates()) {
        if (g.kind == GateKind::Unitary) {
            throw CircuitError("unitary gate '" + g.label + "' has no QASM form");
        }
        if (g.kind == GateKind::Measure) {
            const std::string q = std::to_string(g.qubits[0]);
            out += "measure q[" + q + "] -> c[" + q + "];\n";
            continue;
        }
        out += gate_name(g.kind);
        if (g.param) {
            out += "(" + detail::format_angle(g.param->value()) + ")";
        }
        for (std::size_t i = 0; i < g.qubits.size(); ++i) {
            out += (i == 0 ? " q[" : ",q[") + std::to_string(g.qubits[i]) + "]";
        }
        out += ";\n";
    }
    return out;
}

}  // namespace hqc::qasm
