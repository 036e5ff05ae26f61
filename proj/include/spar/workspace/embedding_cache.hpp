// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "spar/core/clock.hpp"
#include "spar/core/error.hpp"
#include "spar/core/ids.hpp"
#include "spar/metadata/metadata_index.hpp"
#include "spar/text/chunker.hpp"

namespace spar {

struct CacheKey {
    FileId file;
    std::string content_hash;
    std::string chunker_digest;
    std::string embedder_digest;
    auto operator<=>(const CacheKey&) const = default;
};

struct CacheEntry {
    CacheKey key;
    std::vector<Chunk> chunks;
    std::vector<std::vector<float>> embeddings;
    Timestamp created_at{};

    std::uint64_t bytes() const noexcept {
        std::uint64_t b = 0;
        for (const auto& c : chunks) b += c.text.size();
        for (const auto& e : embeddings) b += e.size() * sizeof(float);
        return b;
    }
};

struct CacheStats {
    std::size_t entries = 0;
    std::uint64_t bytes = 0;
    std::uint64_t capacity_bytes = 0;
    std::uint64_t evictions = 0;
    std::uint64_t invalidations = 0;
    std::uint64_t last_applied_version = 0;
};

/// Shared store of normalized chunks and their embeddings, keyed so that an
/// entry can only be found with the content hash it was computed from.
/// LRU eviction by bytes. Invalidation events are applied in index-version
/// order; an event at or below the last applied version is ignored.
class EmbeddingCache {
public:
    static constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

    explicit EmbeddingCache(std::uint64_t capacity_bytes = kUnbounded) : capacity_(capacity_bytes) {}

    /// Returns the entry for `key`, or null. A returned entry's content hash
    /// equals the requested one; anything else is a broken invariant.
    std::shared_ptr<const CacheEntry> find(const CacheKey& key) {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        if (it->second.entry->key.content_hash != key.content_hash)
            throw std::logic_error("embedding cache served an entry for a stale content hash");
        lru_.splice(lru_.begin(), lru_, it->second.pos);
        return it->second.entry;
    }

    void insert(std::shared_ptr<const CacheEntry> entry) {
        std::lock_guard lock(mu_);
        const auto& key = entry->key;
        if (auto it = entries_.find(key); it != entries_.end()) erase(it);
        const auto b = entry->bytes();
        if (b > capacity_) return;
        lru_.push_front(key);
        entries_.emplace(key, Slot{std::move(entry), lru_.begin(), b});
        bytes_ += b;
        while (bytes_ > capacity_ && !lru_.empty()) {
            erase(entries_.find(lru_.back()));
            ++evictions_;
        }
    }

    /// Drops every entry of the event's file that does not carry the new hash.
    void apply(const InvalidationEvent& ev) {
        std::lock_guard lock(mu_);
        if (ev.index_version <= last_version_) return;
        last_version_ = ev.index_version;
        CacheKey lo{ev.file_id, {}, {}, {}};
        for (auto it = entries_.lower_bound(lo); it != entries_.end() && it->first.file == ev.file_id;) {
            auto next = std::next(it);
            if (it->first.content_hash != ev.new_hash) {
                erase(it);
                ++invalidations_;
            }
            it = next;
        }
    }

    /// Subscribes to `index` so updates invalidate entries as they happen.
    void attach(MetadataIndex& index) {
        index.subscribe([this](const InvalidationEvent& ev) { apply(ev); });
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

    bool contains_file(FileId file) const {
        std::lock_guard lock(mu_);
        auto it = entries_.lower_bound(CacheKey{file, {}, {}, {}});
        return it != entries_.end() && it->first.file == file;
    }

    CacheStats stats() const {
        std::lock_guard lock(mu_);
        return {entries_.size(), bytes_, capacity_, evictions_, invalidations_, last_version_};
    }

    void clear() {
        std::lock_guard lock(mu_);
        entries_.clear();
        lru_.clear();
        bytes_ = 0;
    }

private:
    struct Slot {
        std::shared_ptr<const CacheEntry> entry;
        std::list<CacheKey>::iterator pos;
        std::uint64_t bytes;
    };

    void erase(std::map<CacheKey, Slot>::iterator it) {
        bytes_ -= it->second.bytes;
        lru_.erase(it->second.pos);
        entries_.erase(it);
    }

    mutable std::mutex mu_;
    std::uint64_t capacity_;
    std::map<CacheKey, Slot> entries_;
    std::list<CacheKey> lru_;
    std::uint64_t bytes_ = 0;
    std::uint64_t evictions_ = 0;
    std::uint64_t invalidations_ = 0;
    std::uint64_t last_version_ = 0;
};

} // namespace spar
