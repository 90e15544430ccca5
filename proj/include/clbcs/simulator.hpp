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
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/rng.hpp"

namespace clbcs {

using complex = std::complex<double>;

/// Largest register the simulator accepts unless a caller asks otherwise.
inline constexpr std::size_t kDefaultQubitCap = 14;

inline constexpr double kNormTolerance = 1e-10;

/// Pure state on n qubits. Amplitude index bit i holds the value of qubit i,
/// so qubit 0 (the leftmost character of a Pauli string) is the least
/// significant bit.
class StateVector {
  public:
    StateVector() = default;

    explicit StateVector(std::vector<complex> amplitudes, std::size_t cap = kDefaultQubitCap)
        : amps_(std::move(amplitudes)) {
        if (amps_.empty() || !std::has_single_bit(amps_.size())) {
            throw DimensionError("StateVector: dimension " + std::to_string(amps_.size()) +
                                 " is not a power of two");
        }
        n_ = static_cast<std::size_t>(std::countr_zero(amps_.size()));
        if (n_ == 0) {
            throw DimensionError("StateVector: need at least one qubit");
        }
        if (n_ > cap) {
            throw DomainError("StateVector: " + std::to_string(n_) + " qubits exceeds the cap of " +
                              std::to_string(cap));
        }
        double norm = 0.0;
        for (const auto &a : amps_) {
            norm += std::norm(a);
        }
        if (std::abs(norm - 1.0) > kNormTolerance) {
            throw DomainError("StateVector: squared norm is " + std::to_string(norm));
        }
    }

    /// Computational basis state |index>.
    static StateVector basis(std::size_t n_qubits, std::uint64_t index = 0) {
        std::vector<complex> a(std::size_t{1} << n_qubits, 0.0);
        a.at(index) = 1.0;
        return StateVector(std::move(a), std::max(n_qubits, kDefaultQubitCap));
    }

    std::size_t num_qubits() const noexcept { return n_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    const std::vector<complex> &amplitudes() const noexcept { return amps_; }

  private:
    std::size_t n_ = 0;
    std::vector<complex> amps_;
};

/// Haar-random pure state: a normalized vector of i.i.d. complex Gaussians.
inline StateVector haar_state(std::size_t n_qubits, std::uint64_t seed, std::size_t cap = kDefaultQubitCap) {
    if (n_qubits == 0 || n_qubits > cap) {
        throw DomainError("haar_state: qubit count " + std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(cap) + "]");
    }
    Rng rng(seed);
    std::vector<complex> a(std::size_t{1} << n_qubits);
    double norm = 0.0;
    for (auto &x : a) {
        const double re = rng.normal();
        const double im = rng.normal();
        x = complex(re, im);
        norm += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto &x : a) {
        x *= scale;
    }
    return StateVector(std::move(a), cap);
}

namespace detail {

inline void check_dims(const StateVector &s, const PauliString &p, const char *what) {
    if (s.num_qubits() != p.num_qubits()) {
        throw DimensionError(std::string(what) + ": state has " + std::to_string(s.num_qubits()) +
                             " qubits, Pauli string has " + std::to_string(p.num_qubits()));
    }
}

struct PauliMasks {
    std::uint64_t flip = 0;  // X or Y positions
    std::uint64_t phase = 0; // Y or Z positions
    unsigned num_y = 0;
};

inline PauliMasks masks_of(const PauliString &p) {
    PauliMasks m;
    for (std::size_t i = 0; i < p.num_qubits(); ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        switch (p[i]) {
        case PauliOp::X: m.flip |= bit; break;
        case PauliOp::Y: m.flip |= bit; m.phase |= bit; ++m.num_y; break;
        case PauliOp::Z: m.phase |= bit; break;
        case PauliOp::I: break;
        }
    }
    return m;
}

} // namespace detail

/// P|psi> as a raw amplitude vector.
inline std::vector<complex> apply_pauli(const StateVector &state, const PauliString &p) {
    detail::check_dims(state, p, "apply_pauli");
    const auto m = detail::masks_of(p);
    static constexpr complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const complex global = kIPow[m.num_y % 4];
    const auto &a = state.amplitudes();
    std::vector<complex> out(a.size());
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        const double sign = (std::popcount(b & m.phase) & 1) ? -1.0 : 1.0;
        out[b ^ m.flip] = global * sign * a[b];
    }
    return out;
}

/// <psi|P Q|psi>, the literal operator product including its phase.
inline complex pauli_product_expectation(const StateVector &state, const PauliString &p, const PauliString &q) {
    const auto pa = apply_pauli(state, p);
    const auto qa = apply_pauli(state, q);
    complex acc = 0.0;
    for (std::size_t b = 0; b < pa.size(); ++b) {
        acc += std::conj(pa[b]) * qa[b];
    }
    return acc;
}

/// <psi|P|psi>.
inline double expectation(const StateVector &state, const PauliString &p) {
    const auto pa = apply_pauli(state, p);
    const auto &a = state.amplitudes();
    double acc = 0.0;
    for (std::size_t b = 0; b < a.size(); ++b) {
        acc += (std::conj(a[b]) * pa[b]).real();
    }
    return acc;
}

/// Amplitudes after rotating qubit i into the eigenbasis of q[i]:
/// H for X, H S^dagger for Y, nothing for Z and I.
inline std::vector<complex> rotate_to_measurement_basis(const StateVector &state, const PauliString &q) {
    detail::check_dims(state, q, "rotate_to_measurement_basis");
    std::vector<complex> a = state.amplitudes();
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t i = 0; i < q.num_qubits(); ++i) {
        const PauliOp op = q[i];
        if (op != PauliOp::X && op != PauliOp::Y) {
            continue;
        }
        const std::uint64_t bit = std::uint64_t{1} << i;
        for (std::uint64_t b = 0; b < a.size(); ++b) {
            if (b & bit) {
                continue;
            }
            const complex a0 = a[b];
            complex a1 = a[b | bit];
            if (op == PauliOp::Y) {
                a1 *= complex(0.0, -1.0);
            }
            a[b] = (a0 + a1) * inv_sqrt2;
            a[b | bit] = (a0 - a1) * inv_sqrt2;
        }
    }
    return a;
}

/// Born-rule probabilities of each computational basis outcome when measuring
/// in the basis of `q`.
inline std::vector<double> outcome_distribution(const StateVector &state, const PauliString &q) {
    const auto a = rotate_to_measurement_basis(state, q);
    std::vector<double> p(a.size());
    for (std::size_t b = 0; b < a.size(); ++b) {
        p[b] = std::norm(a[b]);
    }
    return p;
}

inline Bitstring index_to_bits(std::uint64_t index, std::size_t n_qubits) {
    Bitstring x(n_qubits);
    for (std::size_t i = 0; i < n_qubits; ++i) {
        x.set(i, (index >> i) & 1U);
    }
    return x;
}

namespace detail {

inline std::uint64_t pick_from_cdf(const std::vector<double> &cdf, double u) {
    const double target = u * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    // upper_bound never lands on a zero-probability outcome: those share the
    // cumulative value of their predecessor.
    if (it == cdf.end()) {
        --it;
    }
    return static_cast<std::uint64_t>(it - cdf.begin());
}

inline std::vector<double> cumulative(const std::vector<double> &p) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    return cdf;
}

} // namespace detail

/// Draws one outcome of measuring `q`. Bit i is 0 for the +1 eigenvalue of
/// q[i]; identity positions are read out in the Z basis.
inline Bitstring sample_outcome(const StateVector &state, const PauliString &q, Rng &rng) {
    const auto cdf = detail::cumulative(outcome_distribution(state, q));
    return index_to_bits(detail::pick_from_cdf(cdf, rng.uniform()), state.num_qubits());
}

inline Bitstring sample_outcome(const StateVector &state, const PauliString &q, std::uint64_t seed) {
    Rng rng(seed);
    return sample_outcome(state, q, rng);
}

/// Repeated measurement of one state, caching the outcome distribution of
/// every distinct measurement seen.
class OutcomeSampler {
  public:
    explicit OutcomeSampler(const StateVector &state) : state_(&state) {}

    Bitstring sample(const PauliString &q, Rng &rng) {
        auto it = cache_.find(q);
        if (it == cache_.end()) {
            it = cache_.emplace(q, detail::cumulative(outcome_distribution(*state_, q))).first;
        }
        return index_to_bits(detail::pick_from_cdf(it->second, rng.uniform()), state_->num_qubits());
    }

  private:
    const StateVector *state_;
    std::unordered_map<PauliString, std::vector<double>> cache_;
};

/// Text state file: 2^n lines of `<re> <im>`; `#` lines are comments.
inline StateVector read_state(std::istream &in, std::size_t cap = kDefaultQubitCap) {
    std::vector<complex> amps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first) || first.front() == '#') {
            continue;
        }
        double re = 0.0;
        double im = 0.0;
        std::string extra;
        std::istringstream re_field(first);
        if (!(re_field >> re) || !(fields >> im) || (fields >> extra)) {
            throw ParseError("state file line " + std::to_string(lineno) + ": expected '<re> <im>'", lineno);
        }
        amps.emplace_back(re, im);
    }
    return StateVector(std::move(amps), cap);
}

inline void write_state(std::ostream &out, const StateVector &state) {
    const auto old_precision = out.precision(17);
    for (const auto &a : state.amplitudes()) {
        out << a.real() << ' ' << a.imag() << '\n';
    }
    out.precision(old_precision);
}

} // namespace clbcs
