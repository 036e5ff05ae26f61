// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "spar/ann/exact.hpp"
#include "support/oracles.hpp"

namespace spar {
namespace {

struct Built {
    HnswIndex index;
    VectorSet oracle;
};

Built build(std::uint64_t seed, std::size_t n, std::size_t dim, AnnParams params = {}) {
    Built b{HnswIndex(dim, params), VectorSet(dim)};
    auto vs = testing::gaussian_vectors(seed, n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        b.index.insert(i, vs[i]);
        b.oracle.add(i, vs[i]);
    }
    return b;
}

TEST(Hnsw, EmptyIndexReturnsNothing) {
    HnswIndex idx(8);
    std::vector<float> q(8, 1.0f);
    auto r = idx.search(q, 3);
    EXPECT_TRUE(r.hits.empty());
    EXPECT_EQ(r.distance_evals, 0u);
}

TEST(Hnsw, DuplicateIdAndDimMismatch) {
    HnswIndex idx(4);
    std::vector<float> v{1, 0, 0, 0};
    idx.insert(7, v);
    try {
        idx.insert(7, v);
        FAIL() << "expected duplicate_id";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::duplicate_id);
    }
    std::vector<float> bad{1, 0};
    try {
        idx.insert(8, bad);
        FAIL() << "expected dim_mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::dim_mismatch);
    }
}

TEST(Hnsw, StoredVectorIsItsOwnNearest) {
    auto b = build(3, 500, 32);
    auto vs = testing::gaussian_vectors(3, 500, 32);
    for (std::size_t i : {0u, 17u, 499u}) {
        auto r = b.index.search(vs[i], 1);
        ASSERT_EQ(r.hits.size(), 1u);
        EXPECT_EQ(r.hits[0].id, i);
        EXPECT_NEAR(r.hits[0].distance, 0.0f, 1e-5);
    }
}

TEST(Hnsw, RecallAgainstExactOracle) {
    auto b = build(1, 2000, 64);
    auto queries = testing::gaussian_vectors(1001, 100, 64);
    auto m = measure_recall(b.index, b.oracle, queries, 10, 64);
    EXPECT_GE(m.recall, 0.90);
    EXPECT_LT(m.mean_distance_evals, 2000.0);
}

TEST(Hnsw, RecallGrowsWithBeamWidth) {
    auto b = build(2, 2000, 64);
    auto queries = testing::gaussian_vectors(1002, 100, 64);
    double prev = 0;
    for (std::size_t ef : {16u, 64u, 256u}) {
        auto r = measure_recall(b.index, b.oracle, queries, 10, ef).recall;
        EXPECT_GE(r, prev - 0.02) << "ef " << ef;
        prev = r;
    }
}

TEST(Hnsw, SmallerIndexNeedsFewerEvalsAtMatchedRecall) {
    auto small = build(4, 200, 64);
    auto large = build(4, 2000, 64);
    auto queries = testing::gaussian_vectors(1004, 50, 64);
    auto evals_at = [&](const Built& b) {
        for (std::size_t ef = 10; ef <= 512; ef *= 2) {
            auto m = measure_recall(b.index, b.oracle, queries, 10, ef);
            if (m.recall >= 0.9) return m.mean_distance_evals;
        }
        return 1e18;
    };
    EXPECT_LT(evals_at(small), evals_at(large));
}

TEST(Hnsw, DeletedItemsAreHidden) {
    auto b = build(5, 300, 16);
    auto vs = testing::gaussian_vectors(5, 300, 16);
    b.index.mark_deleted(42);
    EXPECT_TRUE(b.index.is_deleted(42));
    EXPECT_EQ(b.index.live_size(), 299u);
    auto r = b.index.search(vs[42], 5);
    for (const auto& h : r.hits) EXPECT_NE(h.id, 42u);
    EXPECT_EQ(live_vectors(b.index).size(), 299u);
}

TEST(Hnsw, SnapshotRoundTrip) {
    auto b = build(6, 400, 16);
    b.index.mark_deleted(3);
    std::stringstream buf;
    b.index.serialize(buf);
    EXPECT_EQ(buf.str().substr(0, 8), "SPARANN1");
    auto copy = HnswIndex::deserialize(buf);
    EXPECT_EQ(copy.live_size(), b.index.live_size());
    for (const auto& q : testing::gaussian_vectors(77, 20, 16)) {
        auto x = b.index.search(q, 5), y = copy.search(q, 5);
        EXPECT_EQ(x.hits, y.hits);
        EXPECT_EQ(x.distance_evals, y.distance_evals);
    }
    std::stringstream junk("NOTANANN");
    EXPECT_THROW(HnswIndex::deserialize(junk), Error);
}

TEST(Hnsw, ByteGauges) {
    auto b = build(7, 100, 16);
    EXPECT_EQ(b.index.vector_bytes(), 100u * 16u * sizeof(float));
    EXPECT_GT(b.index.overhead_bytes(), 0u);
    EXPECT_EQ(b.index.reachable_count(), 100u);
}

TEST(Exact, MatchesSortedScan) {
    VectorSet set(8);
    auto vs = testing::gaussian_vectors(8, 200, 8);
    for (std::size_t i = 0; i < vs.size(); ++i) set.add(i, vs[i]);
    auto q = testing::gaussian_vectors(9, 1, 8)[0];
    auto r = exact_knn(set, q, 10);
    ASSERT_EQ(r.hits.size(), 10u);
    EXPECT_EQ(r.distance_evals, 200u);
    auto cos = [](const std::vector<float>& a, const std::vector<float>& b) {
        double ab = 0, aa = 0, bb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ab += double(a[i]) * b[i];
            aa += double(a[i]) * a[i];
            bb += double(b[i]) * b[i];
        }
        return ab / std::sqrt(aa * bb);
    };
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < vs.size(); ++i) all.push_back({-cos(vs[i], q), i});
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r.hits[i].id, all[i].second);
}

TEST(Exact, RecallOfCountsOverlap) {
    SearchResult exact{{{1, 0}, {2, 0}, {3, 0}, {4, 0}}, 0};
    SearchResult approx{{{1, 0}, {9, 0}, {3, 0}, {8, 0}}, 0};
    EXPECT_DOUBLE_EQ(recall_of(approx, exact, 4), 0.5);
    EXPECT_DOUBLE_EQ(recall_of(SearchResult{}, SearchResult{}, 4), 1.0);
}

} // namespace
} // namespace spar
