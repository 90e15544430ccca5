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

#include <bit>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/rng.hpp"
#include "clbcs/schemes.hpp"
#include "clbcs/simulator.hpp"
#include "clbcs/summation.hpp"

namespace clbcs {

/// Haar average of <P^2> - <P>^2 for any non-identity Pauli P on n qubits:
/// 2^n / (2^n + 1).
inline double haar_constant(std::size_t n_qubits) {
    if (n_qubits == 0) {
        throw DomainError("haar_constant: qubit count must be positive");
    }
    return 1.0 / (1.0 + std::ldexp(1.0, -static_cast<int>(n_qubits)));
}

/// Per-term coverage probabilities h_j, aligned with an observable's terms.
struct CoverageVector {
    std::vector<double> h;

    CoverageVector() = default;

    explicit CoverageVector(std::vector<double> values) : h(std::move(values)) {
        for (std::size_t j = 0; j < h.size(); ++j) {
            if (!(h[j] >= 0.0 && h[j] <= 1.0)) {
                throw DomainError("CoverageVector: h[" + std::to_string(j) + "] = " + std::to_string(h[j]) +
                                  " outside [0, 1]");
            }
        }
    }

    std::size_t size() const noexcept { return h.size(); }
    double operator[](std::size_t j) const noexcept { return h[j]; }
};

template <CoverageScheme Scheme>
CoverageVector coverage_vector(const Observable &obs, const Scheme &scheme) {
    if (scheme.num_qubits() != obs.num_qubits()) {
        throw DimensionError("coverage_vector: scheme has " + std::to_string(scheme.num_qubits()) +
                             " qubits, observable has " + std::to_string(obs.num_qubits()));
    }
    std::vector<double> h(obs.size());
    for (std::size_t j = 0; j < obs.size(); ++j) {
        h[j] = scheme.coverage_prob(obs[j].pauli);
    }
    return CoverageVector(std::move(h));
}

/// Average one-shot variance with its per-term breakdown. When some term has
/// h_j = 0 the variance is +infinity and those terms are listed.
struct VarianceReport {
    double v = 0.0;
    std::vector<double> per_term; // haar_constant * a_j^2 / h_j, +inf when uncovered
    std::vector<std::size_t> uncovered;

    bool finite() const noexcept { return uncovered.empty(); }
};

namespace detail {

inline void check_aligned(const Observable &obs, const CoverageVector &h, const char *what) {
    if (h.size() != obs.size()) {
        throw DimensionError(std::string(what) + ": coverage vector has " + std::to_string(h.size()) +
                             " entries, observable has " + std::to_string(obs.size()) + " terms");
    }
}

} // namespace detail

/// V = haar_constant(n) * sum_j a_j^2 / h_j.
inline VarianceReport average_one_shot_variance(const Observable &obs, const CoverageVector &h) {
    detail::check_aligned(obs, h, "average_one_shot_variance");
    const double c = haar_constant(obs.num_qubits());
    VarianceReport report;
    report.per_term.resize(obs.size());
    CompensatedSum total;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const double a = obs[j].coefficient;
        if (h[j] == 0.0) {
            report.per_term[j] = std::numeric_limits<double>::infinity();
            report.uncovered.push_back(j);
            continue;
        }
        report.per_term[j] = c * a * a / h[j];
        total.add(report.per_term[j]);
    }
    report.v = report.finite() ? total.value() : std::numeric_limits<double>::infinity();
    return report;
}

template <CoverageScheme Scheme>
VarianceReport average_one_shot_variance(const Observable &obs, const Scheme &scheme) {
    return average_one_shot_variance(obs, coverage_vector(obs, scheme));
}

/// V restricted to the terms of one batch. Summing this over a partition of
/// the terms gives the full V.
inline double batch_variance(const Observable &obs, const CoverageVector &h, const TermBatch &batch) {
    detail::check_aligned(obs, h, "batch_variance");
    const double c = haar_constant(obs.num_qubits());
    CompensatedSum total;
    for (std::size_t j : batch.indices) {
        const double a = obs[j].coefficient;
        if (h[j] == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        total.add(c * a * a / h[j]);
    }
    return total.value();
}

/// dV/dh_j = -haar_constant(n) * a_j^2 / h_j^2.
inline std::vector<double> grad_v_wrt_h(const Observable &obs, const CoverageVector &h) {
    detail::check_aligned(obs, h, "grad_v_wrt_h");
    const double c = haar_constant(obs.num_qubits());
    std::vector<double> g(obs.size());
    for (std::size_t j = 0; j < obs.size(); ++j) {
        if (h[j] == 0.0) {
            throw DomainError("grad_v_wrt_h: term " + std::to_string(j) + " has zero coverage");
        }
        const double a = obs[j].coefficient;
        g[j] = -c * a * a / (h[j] * h[j]);
    }
    return g;
}

/// Pair counts m_jl: the number of measurements in the list covering both
/// term j and term l. Row-major n_terms x n_terms.
inline std::vector<std::uint64_t> covering_counts(const Observable &obs, std::span<const PauliString> measurements) {
    const std::size_t n = obs.size();
    const std::size_t words = (measurements.size() + 63) / 64;
    std::vector<std::uint64_t> hit(n * words, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < measurements.size(); ++k) {
            if (covers(obs[j].pauli, measurements[k])) {
                hit[j * words + k / 64] |= std::uint64_t{1} << (k % 64);
            }
        }
    }
    std::vector<std::uint64_t> m(n * n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = j; l < n; ++l) {
            std::uint64_t c = 0;
            for (std::size_t w = 0; w < words; ++w) {
                c += static_cast<std::uint64_t>(std::popcount(hit[j * words + w] & hit[l * words + w]));
            }
            m[j * n + l] = c;
            m[l * n + j] = c;
        }
    }
    return m;
}

/// Variance of the per-term estimator for a fixed measurement list on a known
/// state:
///   sum_{j,l} a_j a_l m_jl / (m_jj m_ll) (<P_j P_l> - <P_j><P_l>).
/// <P_j P_l> is the literal operator product evaluated on the state.
inline double exact_variance(const Observable &obs, std::span<const PauliString> measurements,
                             const StateVector &state) {
    if (state.num_qubits() != obs.num_qubits()) {
        throw DimensionError("exact_variance: state has " + std::to_string(state.num_qubits()) +
                             " qubits, observable has " + std::to_string(obs.num_qubits()));
    }
    for (const auto &q : measurements) {
        if (q.num_qubits() != obs.num_qubits()) {
            throw DimensionError("exact_variance: measurement " + q.str() + " has the wrong qubit count");
        }
    }
    const std::size_t n = obs.size();
    const auto m = covering_counts(obs, measurements);
    for (std::size_t j = 0; j < n; ++j) {
        if (m[j * n + j] == 0) {
            throw DomainError("exact_variance: term " + std::to_string(j) + " (" + obs[j].pauli.str() +
                              ") is not covered by any measurement");
        }
    }

    std::vector<std::vector<complex>> applied(n);
    std::vector<double> mean(n);
    const auto &psi = state.amplitudes();
    for (std::size_t j = 0; j < n; ++j) {
        applied[j] = apply_pauli(state, obs[j].pauli);
        double acc = 0.0;
        for (std::size_t b = 0; b < psi.size(); ++b) {
            acc += (std::conj(psi[b]) * applied[j][b]).real();
        }
        mean[j] = acc;
    }

    CompensatedSum total;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const std::uint64_t mjl = m[j * n + l];
            if (mjl == 0) {
                continue;
            }
            double prod = 0.0;
            for (std::size_t b = 0; b < psi.size(); ++b) {
                prod += (std::conj(applied[j][b]) * applied[l][b]).real();
            }
            const double ratio = static_cast<double>(mjl) /
                                 (static_cast<double>(m[j * n + j]) * static_cast<double>(m[l * n + l]));
            total.add(obs[j].coefficient * obs[l].coefficient * ratio * (prod - mean[j] * mean[l]));
        }
    }
    return total.value();
}

/// Monte-Carlo estimates of E[M / (m + eps)] with m ~ Binomial(M, h) and
/// eps = M^(5/6), one per entry of `shot_counts`. As M grows the values tend
/// to 1/h.
inline std::vector<double> limit_ratio_probe(double h, std::span<const std::uint64_t> shot_counts,
                                             std::size_t samples = 10000, std::uint64_t seed = 0) {
    if (!(h > 0.0 && h <= 1.0)) {
        throw DomainError("limit_ratio_probe: h must lie in (0, 1]");
    }
    std::vector<double> out;
    out.reserve(shot_counts.size());
    for (std::size_t idx = 0; idx < shot_counts.size(); ++idx) {
        const std::uint64_t M = shot_counts[idx];
        const double eps = std::pow(static_cast<double>(M), 5.0 / 6.0);
        const double Md = static_cast<double>(M);
        if (h == 1.0) {
            out.push_back(Md / (Md + eps));
            continue;
        }
        Rng rng(derive_seed(seed, "limit-probe", idx));
        std::binomial_distribution<std::int64_t> binom(static_cast<std::int64_t>(M), h);
        CompensatedSum acc;
        for (std::size_t s = 0; s < samples; ++s) {
            acc.add(Md / (static_cast<double>(binom(rng.engine())) + eps));
        }
        out.push_back(acc.value() / static_cast<double>(samples));
    }
    return out;
}

} // namespace clbcs
