// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "spar/ann/hnsw_index.hpp"

namespace spar {

/// Flat id-tagged vector collection, normalized on insert. The exact-scan
/// oracle and recall measurement operate on this.
class VectorSet {
public:
    explicit VectorSet(std::size_t dim) : dim_(dim) {}

    void add(std::uint64_t id, std::span<const float> v) {
        if (v.size() != dim_) throw Error(ErrorCode::dim_mismatch, "vector dim mismatch");
        auto unit = detail::normalized_copy(v);
        ids_.push_back(id);
        data_.insert(data_.end(), unit.begin(), unit.end());
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    std::uint64_t id(std::size_t i) const noexcept { return ids_[i]; }
    std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_;
    std::vector<std::uint64_t> ids_;
    std::vector<float> data_;
};

/// Live vectors of an ANN index, for use as its exact oracle.
inline VectorSet live_vectors(const HnswIndex& index) {
    VectorSet set(index.dim());
    for (auto id : index.ids())
        if (!index.is_deleted(id)) set.add(id, index.vector(id));
    return set;
}

/// Full scan. Ties on distance go to the lower id; k > size returns size hits.
inline SearchResult exact_knn(const VectorSet& set, std::span<const float> query, std::size_t k) {
    if (query.size() != set.dim()) throw Error(ErrorCode::dim_mismatch, "query dim mismatch");
    auto q = detail::normalized_copy(query);
    SearchResult r;
    std::vector<SearchHit> all;
    all.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        all.push_back({set.id(i), 1.0f - detail::dot_f(q.data(), set.row(i).data(), set.dim())});
        ++r.distance_evals;
    }
    auto by_dist = [](const SearchHit& a, const SearchHit& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    };
    auto n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(n), all.end(), by_dist);
    all.resize(n);
    r.hits = std::move(all);
    return r;
}

/// |approx ∩ exact| / k for one query. When the collection holds fewer than
/// k items the denominator is the exact set's size.
inline double recall_of(const SearchResult& approx, const SearchResult& exact, std::size_t k) {
    std::set<std::uint64_t> truth;
    for (std::size_t i = 0; i < exact.hits.size() && i < k; ++i) truth.insert(exact.hits[i].id);
    if (truth.empty()) return approx.hits.empty() ? 1.0 : 0.0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < approx.hits.size() && i < k; ++i) found += truth.count(approx.hits[i].id);
    return double(found) / double(truth.size());
}

inline double recall_at_k(std::span<const SearchResult> approx, std::span<const SearchResult> exact,
                          std::size_t k) {
    if (approx.size() != exact.size())
        throw Error(ErrorCode::invalid_argument, "recall needs one oracle result per query");
    if (approx.empty()) return 1.0;
    double sum = 0;
    for (std::size_t i = 0; i < approx.size(); ++i) sum += recall_of(approx[i], exact[i], k);
    return sum / double(approx.size());
}

struct RecallMeasurement {
    double recall = 0;
    double mean_distance_evals = 0;
};

/// Searches `index` with every query and scores against the exact oracle
/// over `oracle_set`.
inline RecallMeasurement measure_recall(const HnswIndex& index, const VectorSet& oracle_set,
                                        std::span<const std::vector<float>> queries, std::size_t k,
                                        std::size_t ef_search) {
    std::vector<SearchResult> approx, exact;
    double evals = 0;
    for (const auto& q : queries) {
        approx.push_back(index.search(q, k, ef_search));
        evals += double(approx.back().distance_evals);
        exact.push_back(exact_knn(oracle_set, q, k));
    }
    return {recall_at_k(approx, exact, k), queries.empty() ? 0.0 : evals / double(queries.size())};
}

} // namespace spar
