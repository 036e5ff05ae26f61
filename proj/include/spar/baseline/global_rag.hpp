// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <shared_mutex>

#include "spar/ann/hnsw_index.hpp"
#include "spar/core/file_source.hpp"
#include "spar/workspace/processing.hpp"
#include "spar/workspace/types.hpp"

namespace spar {

struct GlobalBuildReport {
    std::uint64_t corpus_version = 0;
    std::size_t files_seen = 0;
    std::vector<GateRejection> rejected;
    std::vector<FileId> added;
    std::vector<FileId> changed;
    std::uint64_t files_processed = 0;
    std::uint64_t embeddings_computed = 0;
    std::uint64_t index_inserts = 0;
    std::uint64_t distance_evals = 0;
    std::size_t index_size = 0;
    double processing_seconds = 0;
    double indexing_seconds = 0;
    double wall_seconds = 0;

    nlohmann::json to_json() const {
        nlohmann::json rej = nlohmann::json::array();
        for (const auto& r : rejected) rej.push_back({{"file_id", r.file}, {"gate", r.gate}, {"reason", r.reason}});
        return {{"corpus_version", corpus_version},
                {"files_seen", files_seen},
                {"rejected", rej},
                {"added", added.size()},
                {"changed", changed},
                {"files_processed", files_processed},
                {"embeddings_computed", embeddings_computed},
                {"index_inserts", index_inserts},
                {"distance_evals", distance_evals},
                {"index_size", index_size},
                {"seconds",
                 {{"processing", processing_seconds}, {"indexing", indexing_seconds}, {"wall", wall_seconds}}}};
    }
};

/// The conventional pipeline used as the control: every file is chunked,
/// embedded and inserted into one corpus-wide index ahead of any query, and
/// queries search that index with no metadata filtering at all. Uses the
/// same chunker, embedder, gates and ANN implementation as workspaces, but
/// never the workspace embedding cache.
class GlobalRag {
public:
    GlobalRag(const MetadataIndex& index, const FileSource& files, std::shared_ptr<Embedder> embedder,
              std::shared_ptr<AnswerGenerator> generator, CostLedger& ledger, std::shared_ptr<const Clock> clock,
              GateChain gates = GateChain::defaults(), ChunkerConfig chunker = {}, AnnParams ann = {})
        : index_(index), files_(files), embedder_(std::move(embedder)), generator_(std::move(generator)),
          ledger_(ledger), clock_(std::move(clock)), gates_(std::move(gates)), chunker_(chunker), ann_(ann) {
        ann_.validate();
    }

    /// Full prebuild over every file currently in the Metadata Index.
    GlobalBuildReport build() {
        std::unique_lock lock(mu_);
        graph_ = std::make_shared<HnswIndex>(embedder_->dim(), ann_);
        items_.clear();
        file_items_.clear();
        hashes_.clear();
        next_item_ = 0;
        return sync();
    }

    /// Re-embeds and reinserts only files whose content hash changed since the
    /// last build or refresh, and adds files that are new. Old vectors of a
    /// changed file are tombstoned.
    GlobalBuildReport refresh() {
        std::unique_lock lock(mu_);
        if (!graph_) {
            graph_ = std::make_shared<HnswIndex>(embedder_->dim(), ann_);
        }
        return sync();
    }

    QueryResult query(const std::string& question, std::optional<std::size_t> k = std::nullopt,
                      std::optional<std::size_t> ef_search = std::nullopt) const {
        std::shared_lock lock(mu_);
        QueryResult r;
        r.question = question;
        r.k = k.value_or(5);
        if (r.k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
        if (!graph_ || graph_->live_size() == 0)
            throw Error(ErrorCode::empty_workspace_index, "global index is empty");
        auto t0 = std::chrono::steady_clock::now();
        auto q = embedder_->embed(question);
        r.embed_seconds = since(t0);
        ++ledger_.query_embeddings;
        t0 = std::chrono::steady_clock::now();
        auto found = graph_->search(q.values, r.k, std::max(ef_search.value_or(ann_.ef_search), r.k));
        r.search_seconds = since(t0);
        r.distance_evals = found.distance_evals;
        ledger_.ann_distance_evals += found.distance_evals;
        ledger_.record_query(r.latency_seconds());
        std::vector<ContextChunk> context;
        for (const auto& h : found.hits) {
            const auto& it = items_.at(h.id);
            r.hits.push_back({it.file, it.path, it.chunk, double(h.distance), it.text});
            context.push_back({it.path, it.chunk, it.text});
        }
        t0 = std::chrono::steady_clock::now();
        r.answer = generator_->generate(question, context);
        r.generate_seconds = since(t0);
        r.index_version = corpus_version_;
        return r;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return graph_ ? graph_->live_size() : 0;
    }
    std::size_t file_count() const {
        std::shared_lock lock(mu_);
        return file_items_.size();
    }
    std::uint64_t corpus_version() const {
        std::shared_lock lock(mu_);
        return corpus_version_;
    }
    std::uint64_t vector_bytes() const {
        std::shared_lock lock(mu_);
        return graph_ ? graph_->vector_bytes() : 0;
    }
    std::uint64_t overhead_bytes() const {
        std::shared_lock lock(mu_);
        return graph_ ? graph_->overhead_bytes() : 0;
    }
    /// The underlying graph, for recall and cost experiments.
    std::shared_ptr<const HnswIndex> graph() const {
        std::shared_lock lock(mu_);
        return graph_;
    }
    /// File owning an index item.
    FileId file_of(std::uint64_t item) const {
        std::shared_lock lock(mu_);
        return items_.at(item).file;
    }

private:
    struct Item {
        FileId file;
        std::string path;
        std::size_t chunk = 0;
        std::string text;
    };

    static double since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    GlobalBuildReport sync() {
        auto started = std::chrono::steady_clock::now();
        GlobalBuildReport rep;
        FileProcessor proc(*embedder_, chunker_, nullptr, &ledger_, *clock_);
        auto all = index_.files();
        rep.files_seen = all.size();
        for (const auto& rec : all) {
            auto known = hashes_.find(rec.id);
            if (known != hashes_.end() && known->second == rec.content_hash) continue;
            auto content = files_.read(rec.path);
            if (auto why = gates_.evaluate(rec, content ? &*content : nullptr)) {
                rep.rejected.push_back(*why);
                if (known != hashes_.end()) drop(rec.id);
                continue;
            }
            if (known == hashes_.end()) rep.added.push_back(rec.id);
            else rep.changed.push_back(rec.id);
            auto p = proc.obtain(rec, *content);
            ++rep.files_processed;
            rep.embeddings_computed += p.entry->embeddings.size();
            rep.processing_seconds += p.t_proc_seconds;

            auto t0 = std::chrono::steady_clock::now();
            if (known != hashes_.end()) drop(rec.id);
            auto& slots = file_items_[rec.id];
            for (std::size_t c = 0; c < p.entry->embeddings.size(); ++c) {
                auto item = next_item_++;
                rep.distance_evals += graph_->insert(item, p.entry->embeddings[c]);
                ++rep.index_inserts;
                items_.emplace(item, Item{rec.id, rec.path, c, p.entry->chunks[c].text});
                slots.push_back(item);
            }
            hashes_[rec.id] = rec.content_hash;
            rep.indexing_seconds += since(t0);
        }
        ledger_.index_inserts += rep.index_inserts;
        ledger_.ann_distance_evals += rep.distance_evals;
        ledger_.set_global_memory(graph_->vector_bytes(), graph_->overhead_bytes());
        corpus_version_ = index_.version();
        rep.corpus_version = corpus_version_;
        rep.index_size = graph_->live_size();
        rep.wall_seconds = since(started);
        return rep;
    }

    void drop(FileId fid) {
        auto it = file_items_.find(fid);
        if (it == file_items_.end()) return;
        for (auto item : it->second) {
            graph_->mark_deleted(item);
            items_.erase(item);
        }
        file_items_.erase(it);
        hashes_.erase(fid);
    }

    const MetadataIndex& index_;
    const FileSource& files_;
    std::shared_ptr<Embedder> embedder_;
    std::shared_ptr<AnswerGenerator> generator_;
    CostLedger& ledger_;
    std::shared_ptr<const Clock> clock_;
    GateChain gates_;
    ChunkerConfig chunker_;
    AnnParams ann_;

    mutable std::shared_mutex mu_;
    std::shared_ptr<HnswIndex> graph_;
    std::map<std::uint64_t, Item> items_;
    std::map<FileId, std::vector<std::uint64_t>> file_items_;
    std::map<FileId, std::string> hashes_;
    std::uint64_t next_item_ = 0;
    std::uint64_t corpus_version_ = 0;
};

} // namespace spar
