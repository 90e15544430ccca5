// Copyright 2026 The clbcs Authors
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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "clbcs/error.hpp"

namespace clbcs {

/// Single-qubit Pauli operator. The numeric codes are the 2-bit values stored
/// in a packed PauliString.
enum class PauliOp : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

constexpr char to_char(PauliOp op) noexcept { return "IXYZ"[static_cast<int>(op)]; }

/// Returns false for anything outside {I,X,Y,Z} (either case).
constexpr bool from_char(char c, PauliOp &out) noexcept {
    switch (c) {
    case 'I': case 'i': out = PauliOp::I; return true;
    case 'X': case 'x': out = PauliOp::X; return true;
    case 'Y': case 'y': out = PauliOp::Y; return true;
    case 'Z': case 'z': out = PauliOp::Z; return true;
    default: return false;
    }
}

/// Index of a non-identity operator in (X, Y, Z) order, as used by the per-qubit
/// probability triples of LBCS schemes.
constexpr int xyz_index(PauliOp op) noexcept { return static_cast<int>(op) - 1; }

constexpr PauliOp from_xyz_index(int k) noexcept { return static_cast<PauliOp>(k + 1); }

/// Fixed-width bit vector, bit i belonging to qubit i. Used for measurement
/// outcomes and for the support masks of Pauli strings.
class Bitstring {
  public:
    static constexpr std::size_t kBitsPerWord = 64;

    Bitstring() = default;
    explicit Bitstring(std::size_t n) : n_(n), words_((n + kBitsPerWord - 1) / kBitsPerWord, 0) {}

    std::size_t size() const noexcept { return n_; }

    bool get(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }

    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (i % 64);
        if (v) {
            words_[i / 64] |= bit;
        } else {
            words_[i / 64] &= ~bit;
        }
    }

    const std::vector<std::uint64_t> &words() const noexcept { return words_; }

    /// Parity of the bits selected by `mask`.
    bool masked_parity(const Bitstring &mask) const noexcept {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            acc ^= words_[w] & mask.words_[w];
        }
        return std::popcount(acc) & 1;
    }

    /// Text form: character i is '0' or '1' for qubit i.
    std::string str() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) {
            if (get(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    static Bitstring parse(std::string_view text) {
        Bitstring b(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '1') {
                b.set(i, true);
            } else if (text[i] != '0') {
                throw ParseError("illegal bit character '" + std::string(1, text[i]) +
                                     "' at index " + std::to_string(i),
                                 i);
            }
        }
        return b;
    }

    friend bool operator==(const Bitstring &, const Bitstring &) = default;

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// A tensor product of single-qubit Paulis, packed two bits per qubit so that
/// covering checks run a machine word at a time. Immutable after construction.
class PauliString {
  public:
    static constexpr std::size_t kQubitsPerWord = 32;

    PauliString() = default;

    /// All-identity string on `n` qubits.
    explicit PauliString(std::size_t n) : n_(n), words_(word_count(n), 0) {}

    PauliString(std::size_t n, const std::vector<PauliOp> &ops) : PauliString(n) {
        if (ops.size() != n) {
            throw DimensionError("PauliString: expected " + std::to_string(n) + " operators, got " +
                                 std::to_string(ops.size()));
        }
        for (std::size_t i = 0; i < n; ++i) {
            words_[i / kQubitsPerWord] |= std::uint64_t{static_cast<std::uint8_t>(ops[i])}
                                          << (2 * (i % kQubitsPerWord));
        }
    }

    std::size_t num_qubits() const noexcept { return n_; }

    PauliOp operator[](std::size_t i) const noexcept {
        return static_cast<PauliOp>((words_[i / kQubitsPerWord] >> (2 * (i % kQubitsPerWord))) & 3U);
    }

    const std::vector<std::uint64_t> &words() const noexcept { return words_; }

    /// Number of non-identity positions.
    std::size_t weight() const noexcept {
        std::size_t w = 0;
        for (std::uint64_t word : words_) {
            w += static_cast<std::size_t>(std::popcount(nonidentity_lanes(word)));
        }
        return w;
    }

    /// One bit per qubit, set where the operator is not the identity.
    Bitstring support() const {
        Bitstring s(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            if ((*this)[i] != PauliOp::I) {
                s.set(i, true);
            }
        }
        return s;
    }

    std::vector<PauliOp> ops() const {
        std::vector<PauliOp> out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            out[i] = (*this)[i];
        }
        return out;
    }

    std::string str() const {
        std::string s(n_, 'I');
        for (std::size_t i = 0; i < n_; ++i) {
            s[i] = to_char((*this)[i]);
        }
        return s;
    }

    friend bool operator==(const PauliString &, const PauliString &) = default;

    friend bool operator<(const PauliString &a, const PauliString &b) noexcept {
        if (a.n_ != b.n_) {
            return a.n_ < b.n_;
        }
        return a.words_ < b.words_;
    }

    /// Mask with 0b01 in every 2-bit lane whose operator is not I.
    static constexpr std::uint64_t nonidentity_lanes(std::uint64_t word) noexcept {
        return (word | (word >> 1)) & 0x5555555555555555ULL;
    }

  private:
    static std::size_t word_count(std::size_t n) noexcept {
        return (n + kQubitsPerWord - 1) / kQubitsPerWord;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

inline std::ostream &operator<<(std::ostream &os, const PauliString &p) { return os << p.str(); }

/// Parses the text form of a Pauli string. Qubit 0 is the leftmost character;
/// lower-case letters are accepted.
inline PauliString parse_pauli(std::string_view text, std::size_t n_qubits) {
    if (text.size() != n_qubits) {
        throw ParseError("Pauli string '" + std::string(text) + "' has length " +
                             std::to_string(text.size()) + ", expected " + std::to_string(n_qubits),
                         std::min(text.size(), n_qubits));
    }
    std::vector<PauliOp> ops(n_qubits);
    for (std::size_t i = 0; i < n_qubits; ++i) {
        if (!from_char(text[i], ops[i])) {
            throw ParseError("illegal Pauli character '" + std::string(1, text[i]) + "' at index " +
                                 std::to_string(i),
                             i);
        }
    }
    return PauliString(n_qubits, ops);
}

/// Parses a Pauli string whose length defines the qubit count.
inline PauliString parse_pauli(std::string_view text) { return parse_pauli(text, text.size()); }

/// Qubit-wise covering: true iff every non-identity position of `p` carries the
/// same operator in the measurement `q`.
inline bool covers(const PauliString &p, const PauliString &q) {
    if (p.num_qubits() != q.num_qubits()) {
        throw DimensionError("covers: qubit counts differ (" + std::to_string(p.num_qubits()) +
                             " vs " + std::to_string(q.num_qubits()) + ")");
    }
    const auto &pw = p.words();
    const auto &qw = q.words();
    for (std::size_t w = 0; w < pw.size(); ++w) {
        const std::uint64_t lanes = PauliString::nonidentity_lanes(pw[w]);
        if ((pw[w] ^ qw[w]) & (lanes | (lanes << 1))) {
            return false;
        }
    }
    return true;
}

inline std::size_t weight(const PauliString &p) noexcept { return p.weight(); }

} // namespace clbcs

template <> struct std::hash<clbcs::PauliString> {
    std::size_t operator()(const clbcs::PauliString &p) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ p.num_qubits();
        for (std::uint64_t w : p.words()) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};
