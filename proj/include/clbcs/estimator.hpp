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

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/summation.hpp"

namespace clbcs {

/// A performed Pauli measurement and its outcome bits.
struct MeasurementRecord {
    PauliString q;
    Bitstring x;

    friend bool operator==(const MeasurementRecord &, const MeasurementRecord &) = default;
};

/// One-shot estimate of <p> from a covering record: the product of (-1)^x[i]
/// over the non-identity positions of p.
inline int one_shot(const PauliString &p, const MeasurementRecord &rec) {
    if (!covers(p, rec.q)) {
        throw DomainError("one_shot: " + rec.q.str() + " does not cover " + p.str());
    }
    if (rec.x.size() != p.num_qubits()) {
        throw DimensionError("one_shot: outcome has " + std::to_string(rec.x.size()) + " bits, expected " +
                             std::to_string(p.num_qubits()));
    }
    return rec.x.masked_parity(p.support()) ? -1 : 1;
}

struct TermEstimate {
    double estimate = 0.0;
    std::uint64_t count = 0; // m_j
};

struct EstimateReport {
    double value = 0.0;
    std::vector<TermEstimate> per_term;
    std::vector<std::size_t> uncovered;
};

/// Per-term averages of one-shot estimates and their a_j-weighted sum. Terms no
/// record covers are listed in `uncovered` and left out of `value`.
inline EstimateReport estimate(const Observable &obs, const std::vector<MeasurementRecord> &records) {
    const std::size_t n_terms = obs.size();
    std::vector<std::int64_t> sums(n_terms, 0);
    std::vector<std::uint64_t> counts(n_terms, 0);

    std::vector<Bitstring> supports;
    supports.reserve(n_terms);
    for (const auto &t : obs.terms()) {
        supports.push_back(t.pauli.support());
    }

    // Records sharing a measurement share the set of covered terms.
    std::unordered_map<PauliString, std::vector<std::size_t>> covered_by;
    for (const auto &rec : records) {
        if (rec.q.num_qubits() != obs.num_qubits() || rec.x.size() != obs.num_qubits()) {
            throw DimensionError("estimate: record " + rec.q.str() + " does not match the observable's " +
                                 std::to_string(obs.num_qubits()) + " qubits");
        }
        auto it = covered_by.find(rec.q);
        if (it == covered_by.end()) {
            std::vector<std::size_t> hit;
            for (std::size_t j = 0; j < n_terms; ++j) {
                if (covers(obs[j].pauli, rec.q)) {
                    hit.push_back(j);
                }
            }
            it = covered_by.emplace(rec.q, std::move(hit)).first;
        }
        for (std::size_t j : it->second) {
            sums[j] += rec.x.masked_parity(supports[j]) ? -1 : 1;
            ++counts[j];
        }
    }

    EstimateReport report;
    report.per_term.resize(n_terms);
    CompensatedSum value;
    value.add(obs.offset());
    for (std::size_t j = 0; j < n_terms; ++j) {
        report.per_term[j].count = counts[j];
        if (counts[j] == 0) {
            report.uncovered.push_back(j);
            continue;
        }
        report.per_term[j].estimate = static_cast<double>(sums[j]) / static_cast<double>(counts[j]);
        value.add(obs[j].coefficient * report.per_term[j].estimate);
    }
    report.value = value.value();
    return report;
}

/// Outcome file: one `<pauli-string> <bitstring>` record per line.
inline std::vector<MeasurementRecord> read_outcomes(std::istream &in) {
    std::vector<MeasurementRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string q_text;
        std::string x_text;
        std::string extra;
        if (!(fields >> q_text) || q_text.front() == '#') {
            continue;
        }
        if (!(fields >> x_text) || (fields >> extra) || x_text.size() != q_text.size()) {
            throw ParseError("outcome file line " + std::to_string(lineno) +
                                 ": expected '<pauli-string> <bitstring>' of equal length",
                             lineno);
        }
        if (!records.empty() && q_text.size() != records.front().q.num_qubits()) {
            throw ParseError("outcome file line " + std::to_string(lineno) + ": inconsistent qubit count",
                             lineno);
        }
        try {
            records.push_back({parse_pauli(q_text), Bitstring::parse(x_text)});
        } catch (const ParseError &e) {
            throw ParseError("outcome file line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return records;
}

inline void write_outcomes(std::ostream &out, const std::vector<MeasurementRecord> &records) {
    for (const auto &r : records) {
        out << r.q.str() << ' ' << r.x.str() << '\n';
    }
}

} // namespace clbcs
