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

// File formats shared by the command-line tool. This is the only header that
// needs nlohmann/json.

#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clbcs/error.hpp"
#include "clbcs/estimator.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/schemes.hpp"
#include "clbcs/variance.hpp"

namespace clbcs {

using json = nlohmann::ordered_json;

/// Model file: {"n_q": n, "r": [n_S], "beta": [n_S][n_q][3]} with the triples
/// in (X, Y, Z) order.
inline json scheme_to_json(const CompositeScheme &scheme) {
    json beta = json::array();
    for (const auto &sub : scheme.subs()) {
        json rows = json::array();
        for (const auto &t : sub.beta()) {
            rows.push_back({t[0], t[1], t[2]});
        }
        beta.push_back(std::move(rows));
    }
    return json{{"n_q", scheme.num_qubits()}, {"r", scheme.r()}, {"beta", std::move(beta)}};
}

inline CompositeScheme scheme_from_json(const json &j) {
    try {
        const auto n_q = j.at("n_q").get<std::size_t>();
        auto r = j.at("r").get<std::vector<double>>();
        const auto &beta = j.at("beta");
        if (!beta.is_array() || beta.size() != r.size()) {
            throw DimensionError("model: beta must hold one entry per sub-scheme weight");
        }
        std::vector<LbcsScheme> subs;
        for (const auto &rows : beta) {
            auto triples = rows.get<std::vector<PauliTriple>>();
            if (triples.size() != n_q) {
                throw DimensionError("model: sub-scheme has " + std::to_string(triples.size()) +
                                     " qubit rows, expected " + std::to_string(n_q));
            }
            subs.emplace_back(std::move(triples));
        }
        return CompositeScheme(std::move(r), std::move(subs));
    } catch (const json::exception &e) {
        throw ParseError(std::string("model: ") + e.what(), 0);
    }
}

inline void write_scheme(std::ostream &out, const CompositeScheme &scheme) {
    out << scheme_to_json(scheme).dump(2) << '\n';
}

inline CompositeScheme read_scheme(std::istream &in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw ParseError(std::string("model: ") + e.what(), 0);
    }
    return scheme_from_json(j);
}

/// Measurement list file: one Pauli string per line, `#` comments allowed.
inline std::vector<PauliString> read_measurement_list(std::istream &in) {
    std::vector<PauliString> list;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string text;
        std::string extra;
        if (!(fields >> text) || text.front() == '#') {
            continue;
        }
        if (fields >> extra) {
            throw ParseError("measurement list line " + std::to_string(lineno) + ": trailing text", lineno);
        }
        const std::size_t n = list.empty() ? text.size() : list.front().num_qubits();
        try {
            list.push_back(parse_pauli(text, n));
        } catch (const ParseError &e) {
            throw ParseError("measurement list line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
    }
    return list;
}

inline void write_measurement_list(std::ostream &out, const std::vector<PauliString> &list) {
    for (const auto &q : list) {
        out << q.str() << '\n';
    }
}

namespace detail {

// JSON has no infinity; the sentinel is spelled "inf".
inline json number_or_inf(double x) {
    if (std::isinf(x)) {
        return "inf";
    }
    return x;
}

} // namespace detail

inline json variance_report_to_json(const Observable &obs, const CoverageVector &h, const VarianceReport &report) {
    json rows = json::array();
    for (std::size_t j = 0; j < obs.size(); ++j) {
        rows.push_back({{"index", j},
                        {"pauli", obs[j].pauli.str()},
                        {"coefficient", obs[j].coefficient},
                        {"h", h[j]},
                        {"contribution", detail::number_or_inf(report.per_term[j])}});
    }
    return json{{"n_q", obs.num_qubits()},
                {"v", detail::number_or_inf(report.v)},
                {"finite", report.finite()},
                {"uncovered", report.uncovered},
                {"per_term", std::move(rows)}};
}

/// Human-readable table of a variance report.
inline void print_variance_report(std::ostream &out, const Observable &obs, const CoverageVector &h,
                                  const VarianceReport &report) {
    const auto old_precision = out.precision(10);
    out << "V = " << report.v << '\n';
    out << "index pauli coefficient h contribution\n";
    for (std::size_t j = 0; j < obs.size(); ++j) {
        out << j << ' ' << obs[j].pauli.str() << ' ' << obs[j].coefficient << ' ' << h[j] << ' '
            << report.per_term[j] << '\n';
    }
    if (!report.finite()) {
        out << "uncovered:";
        for (std::size_t j : report.uncovered) {
            out << ' ' << j;
        }
        out << '\n';
    }
    out.precision(old_precision);
}

inline json estimate_report_to_json(const Observable &obs, const EstimateReport &report) {
    json rows = json::array();
    for (std::size_t j = 0; j < obs.size(); ++j) {
        rows.push_back({{"index", j},
                        {"pauli", obs[j].pauli.str()},
                        {"coefficient", obs[j].coefficient},
                        {"estimate", report.per_term[j].estimate},
                        {"count", report.per_term[j].count}});
    }
    return json{{"value", report.value},
                {"offset", obs.offset()},
                {"uncovered", report.uncovered},
                {"per_term", std::move(rows)}};
}

} // namespace clbcs
