// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "spar/core/ids.hpp"

namespace spar {

/// Bytes held by one workspace's ANN index, split into raw vector storage
/// and graph overhead, plus the files those vectors came from.
struct WorkspaceMemory {
    std::uint64_t vector_bytes = 0;
    std::uint64_t overhead_bytes = 0;
    std::vector<FileId> indexed_files;
};

struct LedgerSnapshot {
    std::uint64_t files_processed = 0;
    std::uint64_t tag_assign_calls = 0;
    std::uint64_t embeddings_computed = 0;
    std::uint64_t query_embeddings = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t index_inserts = 0;
    std::uint64_t ann_distance_evals = 0;
    std::uint64_t tag_distance_evals = 0;
    std::uint64_t metadata_rows_touched = 0;
    std::uint64_t workspaces_created = 0;
    std::uint64_t global_vector_bytes = 0;
    std::uint64_t global_overhead_bytes = 0;
    std::uint64_t archive_bytes = 0;
    std::map<WorkspaceId, WorkspaceMemory> workspace_memory;
    std::vector<double> t_proc_samples;
    std::vector<double> query_seconds;

    nlohmann::json to_json() const {
        nlohmann::json ws = nlohmann::json::object();
        for (const auto& [id, m] : workspace_memory)
            ws[id.str()] = {{"vector_bytes", m.vector_bytes},
                            {"overhead_bytes", m.overhead_bytes},
                            {"indexed_files", m.indexed_files.size()}};
        return {{"counters",
                 {{"files_processed", files_processed},
                  {"tag_assign_calls", tag_assign_calls},
                  {"embeddings_computed", embeddings_computed},
                  {"query_embeddings", query_embeddings},
                  {"cache_hits", cache_hits},
                  {"cache_misses", cache_misses},
                  {"index_inserts", index_inserts},
                  {"ann_distance_evals", ann_distance_evals},
                  {"tag_distance_evals", tag_distance_evals},
                  {"metadata_rows_touched", metadata_rows_touched},
                  {"workspaces_created", workspaces_created}}},
                {"gauges",
                 {{"global_vector_bytes", global_vector_bytes},
                  {"global_overhead_bytes", global_overhead_bytes},
                  {"archive_bytes", archive_bytes},
                  {"workspaces", ws}}},
                {"timers",
                 {{"t_proc_samples", t_proc_samples.size()},
                  {"query_samples", query_seconds.size()}}}};
    }
};

/// Operation counters, memory gauges and timing samples shared by every
/// component of one engine. Counters only ever grow; gauges are overwritten.
class CostLedger {
public:
    std::atomic<std::uint64_t> files_processed{0};
    std::atomic<std::uint64_t> tag_assign_calls{0};
    std::atomic<std::uint64_t> embeddings_computed{0};
    std::atomic<std::uint64_t> query_embeddings{0};
    std::atomic<std::uint64_t> cache_hits{0};
    std::atomic<std::uint64_t> cache_misses{0};
    std::atomic<std::uint64_t> index_inserts{0};
    std::atomic<std::uint64_t> ann_distance_evals{0};
    std::atomic<std::uint64_t> tag_distance_evals{0};
    std::atomic<std::uint64_t> metadata_rows_touched{0};
    std::atomic<std::uint64_t> workspaces_created{0};

    void set_workspace_memory(WorkspaceId id, WorkspaceMemory m) {
        std::lock_guard lock(mu_);
        workspace_memory_[id] = std::move(m);
    }
    void clear_workspace_memory(WorkspaceId id) {
        std::lock_guard lock(mu_);
        workspace_memory_.erase(id);
    }
    void set_global_memory(std::uint64_t vector_bytes, std::uint64_t overhead_bytes) {
        std::lock_guard lock(mu_);
        global_vector_bytes_ = vector_bytes;
        global_overhead_bytes_ = overhead_bytes;
    }
    void set_archive_bytes(std::uint64_t bytes) {
        std::lock_guard lock(mu_);
        archive_bytes_ = bytes;
    }
    void record_t_proc(double seconds) {
        std::lock_guard lock(mu_);
        t_proc_.push_back(seconds);
    }
    void record_query(double seconds) {
        std::lock_guard lock(mu_);
        query_seconds_.push_back(seconds);
    }

    std::optional<WorkspaceMemory> workspace_memory(WorkspaceId id) const {
        std::lock_guard lock(mu_);
        auto it = workspace_memory_.find(id);
        if (it == workspace_memory_.end()) return std::nullopt;
        return it->second;
    }

    LedgerSnapshot snapshot() const {
        std::lock_guard lock(mu_);
        LedgerSnapshot s;
        s.files_processed = files_processed;
        s.tag_assign_calls = tag_assign_calls;
        s.embeddings_computed = embeddings_computed;
        s.query_embeddings = query_embeddings;
        s.cache_hits = cache_hits;
        s.cache_misses = cache_misses;
        s.index_inserts = index_inserts;
        s.ann_distance_evals = ann_distance_evals;
        s.tag_distance_evals = tag_distance_evals;
        s.metadata_rows_touched = metadata_rows_touched;
        s.workspaces_created = workspaces_created;
        s.global_vector_bytes = global_vector_bytes_;
        s.global_overhead_bytes = global_overhead_bytes_;
        s.archive_bytes = archive_bytes_;
        s.workspace_memory = workspace_memory_;
        s.t_proc_samples = t_proc_;
        s.query_seconds = query_seconds_;
        return s;
    }

private:
    mutable std::mutex mu_;
    std::map<WorkspaceId, WorkspaceMemory> workspace_memory_;
    std::uint64_t global_vector_bytes_ = 0;
    std::uint64_t global_overhead_bytes_ = 0;
    std::uint64_t archive_bytes_ = 0;
    std::vector<double> t_proc_;
    std::vector<double> query_seconds_;
};

} // namespace spar
