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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/rng.hpp"

namespace clbcs {

struct Term {
    double coefficient;
    PauliString pauli;
};

/// A Pauli-decomposed observable O = offset * I + sum_j a_j P_j.
///
/// Terms keep the order of first appearance in the source; duplicates are
/// merged, zero coefficients dropped and the all-identity term is held apart
/// as `offset()` since it carries no variance.
class Observable {
  public:
    Observable() = default;

    Observable(std::size_t n_qubits, std::vector<Term> terms, double offset = 0.0)
        : n_(n_qubits), offset_(offset) {
        if (n_qubits == 0) {
            throw DomainError("Observable: qubit count must be positive");
        }
        if (!std::isfinite(offset)) {
            throw DomainError("Observable: identity offset is not finite");
        }
        std::unordered_map<PauliString, std::size_t> index;
        for (auto &t : terms) {
            if (t.pauli.num_qubits() != n_qubits) {
                throw DimensionError("Observable: term " + t.pauli.str() + " has " +
                                     std::to_string(t.pauli.num_qubits()) + " qubits, expected " +
                                     std::to_string(n_qubits));
            }
            if (!std::isfinite(t.coefficient)) {
                throw DomainError("Observable: coefficient of " + t.pauli.str() + " is not finite");
            }
            if (t.pauli.weight() == 0) {
                offset_ += t.coefficient;
                continue;
            }
            auto [it, inserted] = index.try_emplace(t.pauli, terms_.size());
            if (inserted) {
                terms_.push_back(std::move(t));
            } else {
                terms_[it->second].coefficient += t.coefficient;
            }
        }
        std::erase_if(terms_, [](const Term &t) { return t.coefficient == 0.0; });

        l1_ = 0.0;
        for (const auto &t : terms_) {
            l1_ += std::abs(t.coefficient);
        }
        by_magnitude_.resize(terms_.size());
        std::iota(by_magnitude_.begin(), by_magnitude_.end(), std::size_t{0});
        std::stable_sort(by_magnitude_.begin(), by_magnitude_.end(), [this](std::size_t a, std::size_t b) {
            return std::abs(terms_[a].coefficient) > std::abs(terms_[b].coefficient);
        });
    }

    std::size_t num_qubits() const noexcept { return n_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const std::vector<Term> &terms() const noexcept { return terms_; }
    const Term &operator[](std::size_t j) const noexcept { return terms_[j]; }

    /// Coefficient of the identity term.
    double offset() const noexcept { return offset_; }

    /// l1 norm of the non-identity coefficients.
    double l1_norm() const noexcept { return l1_; }

    /// Term indices sorted by decreasing |a_j|, ties kept in file order.
    const std::vector<std::size_t> &by_magnitude() const noexcept { return by_magnitude_; }

  private:
    std::size_t n_ = 0;
    std::vector<Term> terms_;
    double offset_ = 0.0;
    double l1_ = 0.0;
    std::vector<std::size_t> by_magnitude_;
};

/// Reads the Hamiltonian text format: one `<coefficient> <pauli>` pair per
/// line, `#` starts a comment line, blank lines ignored.
inline Observable load_observable(std::istream &in) {
    std::vector<Term> terms;
    std::size_t n_qubits = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream fields(line);
        std::string coef_text;
        std::string pauli_text;
        if (!(fields >> coef_text) || coef_text.front() == '#') {
            continue;
        }
        std::string extra;
        if (!(fields >> pauli_text) || (fields >> extra)) {
            throw ParseError("line " + std::to_string(lineno) +
                                 ": expected '<coefficient> <pauli-string>'",
                             lineno);
        }
        double coef = 0.0;
        const char *first = coef_text.data();
        const char *last = first + coef_text.size();
        if (*first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, last, coef);
        if (ec != std::errc{} || ptr != last || !std::isfinite(coef)) {
            throw ParseError("line " + std::to_string(lineno) + ": bad coefficient '" + coef_text + "'",
                             lineno);
        }
        if (n_qubits == 0) {
            n_qubits = pauli_text.size();
        } else if (pauli_text.size() != n_qubits) {
            throw ParseError("line " + std::to_string(lineno) + ": Pauli string has " +
                                 std::to_string(pauli_text.size()) + " qubits, earlier lines have " +
                                 std::to_string(n_qubits),
                             lineno);
        }
        try {
            terms.push_back({coef, parse_pauli(pauli_text, n_qubits)});
        } catch (const ParseError &e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    if (terms.empty()) {
        throw ParseError("Hamiltonian contains no terms", lineno);
    }
    return Observable(n_qubits, std::move(terms));
}

inline Observable load_observable(const std::string &text) {
    std::istringstream in(text);
    return load_observable(in);
}

/// Writes the observable back in the Hamiltonian text format.
inline void write_observable(std::ostream &out, const Observable &obs) {
    const auto old_precision = out.precision(17);
    if (obs.offset() != 0.0) {
        out << obs.offset() << ' ' << PauliString(obs.num_qubits()).str() << '\n';
    }
    for (const auto &t : obs.terms()) {
        out << t.coefficient << ' ' << t.pauli.str() << '\n';
    }
    out.precision(old_precision);
}

/// A subset of term indices of one observable.
struct TermBatch {
    std::vector<std::size_t> indices;
};

/// Random partition of the term indices into batches of `batch_size` (the last
/// one possibly shorter). The permutation is a pure function of `seed`.
inline std::vector<TermBatch> make_batches(const Observable &obs, std::size_t batch_size,
                                           std::uint64_t seed) {
    if (batch_size == 0) {
        throw DomainError("make_batches: batch_size must be at least 1");
    }
    std::vector<std::size_t> perm(obs.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    std::vector<TermBatch> batches;
    for (std::size_t start = 0; start < perm.size(); start += batch_size) {
        const std::size_t stop = std::min(perm.size(), start + batch_size);
        batches.push_back({std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                                    perm.begin() + static_cast<std::ptrdiff_t>(stop))});
    }
    return batches;
}

/// The full index set as a single batch.
inline TermBatch all_terms(const Observable &obs) {
    TermBatch b;
    b.indices.resize(obs.size());
    std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
    return b;
}

} // namespace clbcs
