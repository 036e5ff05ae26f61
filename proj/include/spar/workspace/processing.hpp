// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>

#include "spar/cost/ledger.hpp"
#include "spar/embedding/embedder.hpp"
#include "spar/workspace/embedding_cache.hpp"

namespace spar {

struct ProcessedFile {
    std::shared_ptr<const CacheEntry> entry;
    bool cache_hit = false;
    /// Normalize + chunk + embed time; zero on a cache hit.
    double t_proc_seconds = 0;
};

/// Normalize, chunk and embed one file's text, going through the shared
/// cache when one is given. Shared by workspaces and the global baseline so
/// both pay the same per-file processing cost.
class FileProcessor {
public:
    FileProcessor(Embedder& embedder, ChunkerConfig chunker, EmbeddingCache* cache, CostLedger* ledger,
                  const Clock& clock)
        : embedder_(embedder), chunker_(chunker), cache_(cache), ledger_(ledger), clock_(clock) {
        chunker_.validate();
    }

    const ChunkerConfig& chunker() const noexcept { return chunker_; }

    CacheKey key_for(const FileRecord& file) const {
        return {file.id, file.content_hash, chunker_.digest(), embedder_.config_digest()};
    }

    /// Cache lookup only; counts nothing.
    std::shared_ptr<const CacheEntry> peek(const FileRecord& file) const {
        return cache_ ? cache_->find(key_for(file)) : nullptr;
    }

    ProcessedFile obtain(const FileRecord& file, const std::string& content) {
        auto key = key_for(file);
        if (cache_) {
            if (auto hit = cache_->find(key)) {
                if (ledger_) ++ledger_->cache_hits;
                return {std::move(hit), true, 0};
            }
            if (ledger_) ++ledger_->cache_misses;
        }
        auto started = std::chrono::steady_clock::now();
        auto entry = std::make_shared<CacheEntry>();
        entry->key = std::move(key);
        entry->chunks = chunk_text(normalize_text(content), chunker_);
        std::vector<std::string> texts;
        texts.reserve(entry->chunks.size());
        for (const auto& c : entry->chunks) texts.push_back(c.text);
        for (auto& v : embedder_.embed_batch(texts)) entry->embeddings.push_back(std::move(v.values));
        entry->created_at = clock_.now();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (ledger_) {
            ++ledger_->files_processed;
            ledger_->embeddings_computed += entry->embeddings.size();
            ledger_->record_t_proc(secs);
        }
        if (cache_) cache_->insert(entry);
        return {std::move(entry), false, secs};
    }

private:
    Embedder& embedder_;
    ChunkerConfig chunker_;
    EmbeddingCache* cache_;
    CostLedger* ledger_;
    const Clock& clock_;
};

} // namespace spar
