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

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "clbcs/estimator.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/rng.hpp"
#include "clbcs/schemes.hpp"
#include "clbcs/simulator.hpp"
#include "clbcs/summation.hpp"
#include "clbcs/variance.hpp"

namespace clbcs {

/// Measures `state` once per listed measurement.
inline std::vector<MeasurementRecord> measure_all(OutcomeSampler &sampler, const std::vector<PauliString> &measurements,
                                                  std::uint64_t seed) {
    Rng rng(seed);
    std::vector<MeasurementRecord> records;
    records.reserve(measurements.size());
    for (const auto &q : measurements) {
        records.push_back({q, sampler.sample(q, rng)});
    }
    return records;
}

/// One full experiment: draw `shots` measurements from the scheme, measure the
/// state, and post-process. `repeat` selects independent streams.
template <class Scheme>
std::vector<MeasurementRecord> simulate_records(const Scheme &scheme, std::size_t shots, OutcomeSampler &sampler,
                                                std::uint64_t seed, std::uint64_t repeat, unsigned threads = 1) {
    const auto measurements =
        sample_measurements(scheme, shots, derive_seed(seed, "scheme-sampling", repeat), threads);
    return measure_all(sampler, measurements, derive_seed(seed, "outcomes", repeat));
}

/// The string covering exactly the measurements that cover both `p` and `q`,
/// or nothing when some qubit carries two different non-identity operators.
inline std::optional<PauliString> joint_cover(const PauliString &p, const PauliString &q) {
    std::vector<PauliOp> ops(p.num_qubits());
    for (std::size_t i = 0; i < p.num_qubits(); ++i) {
        const PauliOp a = p[i];
        const PauliOp b = q[i];
        if (a != PauliOp::I && b != PauliOp::I && a != b) {
            return std::nullopt;
        }
        ops[i] = a != PauliOp::I ? a : b;
    }
    return PauliString(p.num_qubits(), ops);
}

/// lim M * Var(estimate) for a simple scheme on one particular state:
///   sum_{j,l} a_j a_l h_jl / (h_j h_l) (<P_j P_l> - <P_j><P_l>),
/// with h_jl the probability that one draw covers both terms. Its Haar
/// average is the average one-shot variance V.
template <CoverageScheme Scheme>
double state_one_shot_variance(const Observable &obs, const Scheme &scheme, const StateVector &state) {
    const std::size_t n = obs.size();
    const auto h = coverage_vector(obs, scheme);
    std::vector<double> mean(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (h[j] == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        mean[j] = expectation(state, obs[j].pauli);
    }
    CompensatedSum total;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const auto joint = joint_cover(obs[j].pauli, obs[l].pauli);
            if (!joint) {
                continue;
            }
            const double hjl = scheme.coverage_prob(*joint);
            if (hjl == 0.0) {
                continue;
            }
            const double prod = pauli_product_expectation(state, obs[j].pauli, obs[l].pauli).real();
            total.add(obs[j].coefficient * obs[l].coefficient * hjl / (h[j] * h[l]) * (prod - mean[j] * mean[l]));
        }
    }
    return total.value();
}

struct SimulationStats {
    std::size_t repeats = 0;
    std::size_t shots = 0;
    double true_value = 0.0;
    double mean = 0.0;
    double variance = std::numeric_limits<double>::quiet_NaN(); // sample variance; NaN when repeats < 2
    double scaled_variance = std::numeric_limits<double>::quiet_NaN(); // shots * variance
    double predicted_v = 0.0;       // average one-shot variance of the scheme
    double predicted_state_v = 0.0; // the same limit for this particular state
    std::size_t runs_with_uncovered = 0;
    std::vector<double> estimates;
};

/// Repeats `simulate_records` + `estimate` and summarizes the spread of the
/// estimates against the scheme's predicted V.
template <class Scheme>
SimulationStats simulate_estimates(const Observable &obs, const Scheme &scheme, const StateVector &state,
                                   std::size_t shots, std::size_t repeats, std::uint64_t seed, unsigned threads = 1) {
    SimulationStats stats;
    stats.repeats = repeats;
    stats.shots = shots;
    CompensatedSum truth;
    truth.add(obs.offset());
    for (const auto &t : obs.terms()) {
        truth.add(t.coefficient * expectation(state, t.pauli));
    }
    stats.true_value = truth.value();
    stats.predicted_v = average_one_shot_variance(obs, scheme).v;
    stats.predicted_state_v = state_one_shot_variance(obs, scheme, state);

    OutcomeSampler sampler(state);
    stats.estimates.reserve(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        const auto records = simulate_records(scheme, shots, sampler, seed, rep, threads);
        const auto report = estimate(obs, records);
        if (!report.uncovered.empty()) {
            ++stats.runs_with_uncovered;
        }
        stats.estimates.push_back(report.value);
    }
    CompensatedSum sum;
    for (double e : stats.estimates) {
        sum.add(e);
    }
    stats.mean = repeats > 0 ? sum.value() / static_cast<double>(repeats) : 0.0;
    if (repeats >= 2) {
        CompensatedSum sq;
        for (double e : stats.estimates) {
            sq.add((e - stats.mean) * (e - stats.mean));
        }
        stats.variance = sq.value() / static_cast<double>(repeats - 1);
        stats.scaled_variance = static_cast<double>(shots) * stats.variance;
    }
    return stats;
}

} // namespace clbcs
