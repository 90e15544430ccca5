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
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/rng.hpp"

namespace clbcs {

inline constexpr double kSimplexTolerance = 1e-12;

/// Per-qubit probabilities over (X, Y, Z).
using PauliTriple = std::array<double, 3>;

/// Anything that can report the long-run probability that one of its draws
/// covers a given Pauli string. The variance module is written against this.
template <class S>
concept CoverageScheme = requires(const S &s, const PauliString &p) {
    { s.num_qubits() } -> std::convertible_to<std::size_t>;
    { s.coverage_prob(p) } -> std::convertible_to<double>;
};

namespace detail {

inline void check_distribution(std::span<const double> p, const std::string &what) {
    if (p.empty()) {
        throw DomainError(what + ": empty probability vector");
    }
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw DomainError(what + ": probability " + std::to_string(x) + " outside [0, 1]");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw DomainError(what + ": probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

/// Index of the first cumulative bucket above u. Zero-weight buckets are never
/// returned, including when rounding leaves u above the final partial sum.
inline std::size_t scan_pick(std::span<const double> p, double u) noexcept {
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) {
            continue;
        }
        last_positive = k;
        acc += p[k];
        if (u < acc) {
            return k;
        }
    }
    return last_positive;
}

} // namespace detail

/// Walker/Vose alias table: O(1) draws from a fixed discrete distribution.
class AliasTable {
  public:
    AliasTable() = default;

    explicit AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
        const std::size_t n = weights.size();
        double total = 0.0;
        for (double w : weights) {
            total += w;
        }
        std::vector<double> scaled(n);
        std::vector<std::size_t> small;
        std::vector<std::size_t> large;
        std::size_t some_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            if (weights[i] > 0.0) {
                some_positive = i;
            }
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::size_t l : large) {
            prob_[l] = 1.0;
            alias_[l] = l;
        }
        // Leftovers from rounding: keep zero-weight entries unreachable.
        for (std::size_t s : small) {
            prob_[s] = weights[s] > 0.0 ? 1.0 : 0.0;
            alias_[s] = weights[s] > 0.0 ? s : some_positive;
        }
    }

    std::size_t size() const noexcept { return prob_.size(); }

    std::size_t sample(Rng &rng) const {
        const std::size_t i = rng.below(prob_.size());
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

  private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

/// Locally-biased classical shadow: each qubit's basis is drawn independently
/// from its own distribution over (X, Y, Z).
class LbcsScheme {
  public:
    LbcsScheme() = default;

    explicit LbcsScheme(std::vector<PauliTriple> beta) : beta_(std::move(beta)) {
        if (beta_.empty()) {
            throw DomainError("LbcsScheme: qubit count must be positive");
        }
        for (std::size_t i = 0; i < beta_.size(); ++i) {
            detail::check_distribution(beta_[i], "LbcsScheme qubit " + std::to_string(i));
        }
    }

    /// Uniform (1/3, 1/3, 1/3) on every qubit; the classical-shadow scheme.
    static LbcsScheme uniform(std::size_t n_qubits) {
        return LbcsScheme(std::vector<PauliTriple>(n_qubits, PauliTriple{1.0 / 3, 1.0 / 3, 1.0 / 3}));
    }

    /// Deterministically emits `q`, which must act on every qubit.
    static LbcsScheme one_hot(const PauliString &q) {
        std::vector<PauliTriple> beta(q.num_qubits(), PauliTriple{0.0, 0.0, 0.0});
        for (std::size_t i = 0; i < q.num_qubits(); ++i) {
            if (q[i] == PauliOp::I) {
                throw DomainError("LbcsScheme::one_hot: " + q.str() + " has an identity at qubit " +
                                  std::to_string(i));
            }
            beta[i][static_cast<std::size_t>(xyz_index(q[i]))] = 1.0;
        }
        return LbcsScheme(std::move(beta));
    }

    std::size_t num_qubits() const noexcept { return beta_.size(); }
    const std::vector<PauliTriple> &beta() const noexcept { return beta_; }
    const PauliTriple &beta(std::size_t qubit) const noexcept { return beta_[qubit]; }

    /// Probability that one draw covers `p`: the product of beta_i(p[i]) over
    /// the non-identity positions of `p`.
    double coverage_prob(const PauliString &p) const {
        if (p.num_qubits() != num_qubits()) {
            throw DimensionError("coverage_prob: term has " + std::to_string(p.num_qubits()) +
                                 " qubits, scheme has " + std::to_string(num_qubits()));
        }
        double h = 1.0;
        for (std::size_t i = 0; i < beta_.size(); ++i) {
            const PauliOp op = p[i];
            if (op != PauliOp::I) {
                h *= beta_[i][static_cast<std::size_t>(xyz_index(op))];
            }
        }
        return h;
    }

    PauliString sample(Rng &rng) const {
        std::vector<PauliOp> ops(beta_.size());
        for (std::size_t i = 0; i < beta_.size(); ++i) {
            ops[i] = from_xyz_index(static_cast<int>(detail::scan_pick(beta_[i], rng.uniform())));
        }
        return PauliString(beta_.size(), ops);
    }

  private:
    std::vector<PauliTriple> beta_;
};

/// SampleProd of LBCS sub-schemes: each draw first picks sub-scheme k with
/// probability r_k, then draws from it.
class CompositeScheme {
  public:
    /// Above this many sub-schemes the sub-scheme draw uses an alias table.
    static constexpr std::size_t kAliasThreshold = 64;

    CompositeScheme() = default;

    CompositeScheme(std::vector<double> r, std::vector<LbcsScheme> subs)
        : r_(std::move(r)), subs_(std::move(subs)) {
        if (subs_.empty()) {
            throw DomainError("CompositeScheme: needs at least one sub-scheme");
        }
        if (r_.size() != subs_.size()) {
            throw DimensionError("CompositeScheme: " + std::to_string(r_.size()) + " weights for " +
                                 std::to_string(subs_.size()) + " sub-schemes");
        }
        detail::check_distribution(r_, "CompositeScheme weights");
        for (const auto &s : subs_) {
            if (s.num_qubits() != subs_.front().num_qubits()) {
                throw DimensionError("CompositeScheme: sub-schemes disagree on qubit count");
            }
        }
        if (r_.size() > kAliasThreshold) {
            alias_ = AliasTable(r_);
        }
    }

    /// A single-sub-scheme composite; identical to plain LBCS.
    explicit CompositeScheme(LbcsScheme sub) : CompositeScheme({1.0}, {std::move(sub)}) {}

    std::size_t num_qubits() const noexcept { return subs_.front().num_qubits(); }
    std::size_t num_subschemes() const noexcept { return subs_.size(); }
    const std::vector<double> &r() const noexcept { return r_; }
    const std::vector<LbcsScheme> &subs() const noexcept { return subs_; }

    /// h_j = sum_k r_k h_j^k.
    double coverage_prob(const PauliString &p) const {
        double h = 0.0;
        for (std::size_t k = 0; k < subs_.size(); ++k) {
            h += r_[k] * subs_[k].coverage_prob(p);
        }
        return std::min(h, 1.0);
    }

    std::size_t sample_subscheme(Rng &rng) const {
        if (r_.size() > kAliasThreshold) {
            return alias_.sample(rng);
        }
        return detail::scan_pick(r_, rng.uniform());
    }

    PauliString sample(Rng &rng) const { return subs_[sample_subscheme(rng)].sample(rng); }

  private:
    std::vector<double> r_;
    std::vector<LbcsScheme> subs_;
    AliasTable alias_;
};

/// Uniform sampling over an explicit list of measurements. Repeated entries
/// count with their multiplicity.
class FixedListScheme {
  public:
    FixedListScheme() = default;

    explicit FixedListScheme(std::vector<PauliString> measurements) : list_(std::move(measurements)) {
        if (list_.empty()) {
            throw DomainError("FixedListScheme: measurement list is empty");
        }
        for (const auto &q : list_) {
            if (q.num_qubits() != list_.front().num_qubits()) {
                throw DimensionError("FixedListScheme: measurements disagree on qubit count");
            }
        }
    }

    std::size_t num_qubits() const noexcept { return list_.front().num_qubits(); }
    std::size_t size() const noexcept { return list_.size(); }
    const std::vector<PauliString> &measurements() const noexcept { return list_; }

    double coverage_prob(const PauliString &p) const {
        std::size_t hits = 0;
        for (const auto &q : list_) {
            hits += covers(p, q) ? 1 : 0;
        }
        return static_cast<double>(hits) / static_cast<double>(list_.size());
    }

    PauliString sample(Rng &rng) const { return list_[rng.below(list_.size())]; }

  private:
    std::vector<PauliString> list_;
};

inline double coverage_prob_sub(const LbcsScheme &sub, const PauliString &p) { return sub.coverage_prob(p); }

inline double coverage_prob(const CompositeScheme &scheme, const PauliString &p) {
    return scheme.coverage_prob(p);
}

inline double coverage_prob_fixed(const FixedListScheme &scheme, const PauliString &p) {
    return scheme.coverage_prob(p);
}

/// Shots are generated in fixed blocks, each with its own derived seed, so the
/// output depends only on (scheme, shots, seed) and not on `threads`.
inline constexpr std::size_t kSampleBlock = 4096;

template <class Scheme>
std::vector<PauliString> sample_measurements(const Scheme &scheme, std::size_t shots, std::uint64_t seed,
                                             unsigned threads = 1) {
    std::vector<PauliString> out(shots);
    const std::size_t blocks = (shots + kSampleBlock - 1) / kSampleBlock;
    auto run_blocks = [&](std::size_t first, std::size_t stride) {
        for (std::size_t b = first; b < blocks; b += stride) {
            Rng rng(derive_seed(seed, "sample-block", b));
            const std::size_t stop = std::min(shots, (b + 1) * kSampleBlock);
            for (std::size_t s = b * kSampleBlock; s < stop; ++s) {
                out[s] = scheme.sample(rng);
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, blocks));
    if (workers <= 1) {
        run_blocks(0, 1);
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(run_blocks, w, workers);
    }
    pool.clear();
    return out;
}

/// Builds the composite that reproduces a distribution over full-weight Pauli
/// measurements exactly: one deterministic sub-scheme per measurement.
inline CompositeScheme from_target_distribution(const std::vector<PauliString> &paulis,
                                                const std::vector<double> &probs) {
    if (paulis.size() != probs.size()) {
        throw DimensionError("from_target_distribution: " + std::to_string(paulis.size()) +
                             " measurements but " + std::to_string(probs.size()) + " probabilities");
    }
    std::vector<LbcsScheme> subs;
    subs.reserve(paulis.size());
    for (const auto &q : paulis) {
        if (q.weight() != q.num_qubits()) {
            throw DomainError("from_target_distribution: " + q.str() +
                              " does not act on every qubit");
        }
        subs.push_back(LbcsScheme::one_hot(q));
    }
    return CompositeScheme(probs, std::move(subs));
}

} // namespace clbcs
