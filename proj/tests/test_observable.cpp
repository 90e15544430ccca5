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

#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "clbcs/observable.hpp"
#include "clbcs/variance.hpp"
#include "oracles.hpp"

using namespace clbcs;

TEST(LoadObservable, TwoTerms) {
    const auto obs = load_observable("1.0 ZZ\n0.5 XI\n");
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_EQ(obs.num_qubits(), 2u);
    EXPECT_EQ(obs[0].pauli.str(), "ZZ");
    EXPECT_DOUBLE_EQ(obs[0].coefficient, 1.0);
    EXPECT_EQ(obs[1].pauli.str(), "XI");
    EXPECT_DOUBLE_EQ(obs[1].coefficient, 0.5);
}

TEST(LoadObservable, DuplicatesMerged) {
    const auto obs = load_observable("1.0 ZZ\n2.0 ZZ\n");
    ASSERT_EQ(obs.size(), 1u);
    EXPECT_DOUBLE_EQ(obs[0].coefficient, 3.0);
}

TEST(LoadObservable, IdentityBecomesOffset) {
    const auto obs = load_observable("1.0 II\n1.0 ZI\n");
    ASSERT_EQ(obs.size(), 1u);
    EXPECT_EQ(obs[0].pauli.str(), "ZI");
    EXPECT_DOUBLE_EQ(obs.offset(), 1.0);
}

TEST(LoadObservable, CommentsBlankLinesAndScientific) {
    const auto obs = load_observable("# header\n\n  -2.5e-1 XZ\r\n+3E2 YY\n");
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_DOUBLE_EQ(obs[0].coefficient, -0.25);
    EXPECT_DOUBLE_EQ(obs[1].coefficient, 300.0);
}

TEST(LoadObservable, CancellingDuplicatesDropped) {
    const auto obs = load_observable("1.0 XX\n-1.0 XX\n0.5 ZZ\n0 YY\n");
    ASSERT_EQ(obs.size(), 1u);
    EXPECT_EQ(obs[0].pauli.str(), "ZZ");
}

TEST(LoadObservable, MalformedLineReportsLineNumber) {
    try {
        load_observable("1.0 ZZ\nabc ZZ\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.position(), 2u);
    }
    EXPECT_THROW(load_observable("1.0\n"), ParseError);
    EXPECT_THROW(load_observable("1.0 ZQ\n"), ParseError);
}

TEST(LoadObservable, InconsistentLengths) {
    try {
        load_observable("1.0 ZZ\n1.0 ZZZ\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.position(), 2u);
    }
}

TEST(LoadObservable, EmptyFile) {
    EXPECT_THROW(load_observable(""), ParseError);
    EXPECT_THROW(load_observable("# only a comment\n\n"), ParseError);
}

TEST(LoadObservable, NonFiniteRejected) { EXPECT_THROW(load_observable("inf ZZ\n"), Error); }

TEST(LoadObservable, WriteRoundTrip) {
    Rng rng(2);
    const auto obs = oracle::random_observable(rng, 5, 20);
    std::ostringstream out;
    write_observable(out, obs);
    const auto back = load_observable(out.str());
    ASSERT_EQ(back.size(), obs.size());
    for (std::size_t j = 0; j < obs.size(); ++j) {
        EXPECT_EQ(back[j].pauli, obs[j].pauli);
        EXPECT_EQ(back[j].coefficient, obs[j].coefficient);
    }
}

TEST(Observable, NormAndMagnitudeOrder) {
    const auto obs = load_observable("1.0 XI\n-3.0 ZI\n2.0 IZ\n-2.0 XX\n");
    EXPECT_DOUBLE_EQ(obs.l1_norm(), 8.0);
    EXPECT_EQ(obs.by_magnitude(), (std::vector<std::size_t>{1, 2, 3, 0}));
}

namespace {

Observable seven_terms() {
    return load_observable("1 XI\n2 IX\n3 ZI\n4 IZ\n5 XX\n6 YY\n7 ZZ\n");
}

std::vector<std::size_t> sizes(const std::vector<TermBatch> &batches) {
    std::vector<std::size_t> s;
    for (const auto &b : batches) {
        s.push_back(b.indices.size());
    }
    return s;
}

} // namespace

TEST(MakeBatches, PartitionArithmetic) {
    const auto obs = seven_terms();
    EXPECT_EQ(sizes(make_batches(obs, 3, 42)), (std::vector<std::size_t>{3, 3, 1}));
    EXPECT_EQ(sizes(make_batches(obs, 100, 42)), (std::vector<std::size_t>{7}));
}

TEST(MakeBatches, DeterministicPerSeed) {
    const auto obs = seven_terms();
    const auto a = make_batches(obs, 3, 42);
    const auto b = make_batches(obs, 3, 42);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].indices, b[i].indices);
    }
}

TEST(MakeBatches, ReseedingChangesPartition) {
    Rng rng(4);
    const auto obs = oracle::random_observable(rng, 4, 40);
    const auto a = make_batches(obs, 10, derive_seed(1, "batching", 0));
    const auto b = make_batches(obs, 10, derive_seed(1, "batching", 1));
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        differ = differ || a[i].indices != b[i].indices;
    }
    EXPECT_TRUE(differ);
}

TEST(MakeBatches, ExactPartition) {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto obs = oracle::random_observable(rng, 4, 1 + rng.below(60));
        const std::size_t bs = 1 + rng.below(20);
        std::vector<std::size_t> all;
        for (const auto &b : make_batches(obs, bs, rng.next())) {
            all.insert(all.end(), b.indices.begin(), b.indices.end());
        }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(all.size(), obs.size());
        for (std::size_t j = 0; j < all.size(); ++j) {
            EXPECT_EQ(all[j], j);
        }
    }
}

TEST(MakeBatches, ZeroBatchSizeRejected) { EXPECT_THROW(make_batches(seven_terms(), 0, 1), DomainError); }

TEST(MakeBatches, BatchCostsSumToFullV) {
    Rng rng(12);
    for (int t = 0; t < 30; ++t) {
        const auto obs = oracle::random_observable(rng, 4, 30);
        const auto scheme = oracle::random_composite(rng, 4, 3);
        const auto h = coverage_vector(obs, scheme);
        const double full = average_one_shot_variance(obs, h).v;
        double sum = 0.0;
        for (const auto &b : make_batches(obs, 7, rng.next())) {
            sum += batch_variance(obs, h, b);
        }
        EXPECT_NEAR(sum, full, 1e-12 * full);
    }
}
