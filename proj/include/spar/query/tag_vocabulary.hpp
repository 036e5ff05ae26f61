// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <vector>

#include "spar/ann/hnsw_index.hpp"
#include "spar/cost/ledger.hpp"
#include "spar/embedding/embedder.hpp"
#include "spar/metadata/tag_hierarchy.hpp"

namespace spar {

struct TagMatch {
    TagId tag;
    double similarity = 0;
    friend bool operator==(const TagMatch&, const TagMatch&) = default;
};

/// Text a tag is embedded from: its label plus the optional note.
inline std::string tag_embedding_text(const TagNode& n) {
    return n.note.empty() ? n.value : n.value + " " + n.note;
}

/// One embedding per tag. Vocabularies up to `exhaustive_limit` tags are
/// searched by full scan, so results equal the exact top-m; larger ones use
/// an HNSW graph. Immutable after construction.
class TagVocabularyIndex {
public:
    static constexpr std::size_t kDefaultExhaustiveLimit = 10'000;

    TagVocabularyIndex(const TagHierarchy& tags, Embedder& embedder,
                       std::size_t exhaustive_limit = kDefaultExhaustiveLimit, AnnParams params = {})
        : dim_(embedder.dim()) {
        std::vector<std::string> texts;
        texts.reserve(tags.size());
        for (const auto& n : tags.nodes()) {
            ids_.push_back(n.id);
            texts.push_back(tag_embedding_text(n));
        }
        auto vecs = embedder.embed_batch(texts);
        vectors_.reserve(vecs.size());
        for (auto& v : vecs) vectors_.push_back(std::move(v.values));
        if (ids_.size() > exhaustive_limit) {
            graph_ = std::make_shared<HnswIndex>(dim_, params);
            for (std::size_t i = 0; i < ids_.size(); ++i) build_evals_ += graph_->insert(ids_[i].value, vectors_[i]);
        }
    }

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool exhaustive() const noexcept { return graph_ == nullptr; }
    std::uint64_t build_distance_evals() const noexcept { return build_evals_; }

    std::span<const float> embedding(TagId id) const {
        if (id.value == 0 || id.value > vectors_.size())
            throw Error(ErrorCode::unknown_tag, "unknown tag " + id.str());
        return vectors_[id.value - 1];
    }

    /// The `m` most similar tags with similarity >= `min_sim`, best first;
    /// equal similarities order by lower tag id.
    std::vector<TagMatch> top_m(std::span<const float> query, std::size_t m, double min_sim,
                                std::uint64_t* distance_evals = nullptr) const {
        if (ids_.empty()) throw Error(ErrorCode::empty_vocabulary, "tag vocabulary is empty");
        if (query.size() != dim_) throw Error(ErrorCode::dim_mismatch, "keyword embedding dim mismatch");
        std::vector<TagMatch> all;
        std::uint64_t evals = 0;
        if (graph_) {
            auto r = graph_->search(query, m, std::max<std::size_t>(4 * m, graph_->params().ef_search));
            evals = r.distance_evals;
            for (const auto& h : r.hits) all.push_back({TagId(h.id), dot(query, vectors_[h.id - 1])});
        } else {
            all.reserve(ids_.size());
            for (std::size_t i = 0; i < ids_.size(); ++i) all.push_back({ids_[i], dot(query, vectors_[i])});
            evals = ids_.size();
        }
        if (distance_evals) *distance_evals += evals;
        auto better = [](const TagMatch& a, const TagMatch& b) {
            return a.similarity != b.similarity ? a.similarity > b.similarity : a.tag < b.tag;
        };
        auto n = std::min(m, all.size());
        std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(n), all.end(), better);
        all.resize(n);
        std::erase_if(all, [&](const TagMatch& t) { return t.similarity < min_sim; });
        return all;
    }

private:
    std::size_t dim_;
    std::vector<TagId> ids_;
    std::vector<std::vector<float>> vectors_;
    std::shared_ptr<HnswIndex> graph_;
    std::uint64_t build_evals_ = 0;
};

} // namespace spar
