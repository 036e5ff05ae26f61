// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spar/query/interpreter.hpp"
#include "spar/workspace/gates.hpp"

namespace spar {

inline nlohmann::json timestamp_json(Timestamp t) { return format_timestamp(t); }
inline Timestamp timestamp_from_json(const nlohmann::json& j) {
    auto t = parse_iso_timestamp(j.get<std::string>());
    if (!t) throw Error(ErrorCode::invalid_argument, "bad timestamp '" + j.get<std::string>() + "'");
    return *t;
}

enum class WorkspaceStatus { active, archived, terminated };

inline std::string_view status_name(WorkspaceStatus s) {
    switch (s) {
    case WorkspaceStatus::active: return "active";
    case WorkspaceStatus::archived: return "archived";
    case WorkspaceStatus::terminated: return "terminated";
    }
    return "?";
}

struct AdmittedFile {
    FileId file;
    std::string path;
    std::string content_hash;
    std::size_t chunks = 0;

    friend bool operator==(const AdmittedFile&, const AdmittedFile&) = default;
    nlohmann::json to_json() const {
        return {{"file_id", file}, {"path", path}, {"content_hash", content_hash}, {"chunks", chunks}};
    }
    static AdmittedFile from_json(const nlohmann::json& j) {
        return {j.at("file_id").get<FileId>(), j.at("path").get<std::string>(),
                j.at("content_hash").get<std::string>(), j.at("chunks").get<std::size_t>()};
    }
};

struct RetrievedChunk {
    FileId file;
    std::string path;
    std::size_t chunk_index = 0;
    double distance = 0;
    std::string text;

    nlohmann::json to_json(bool with_text = true) const {
        nlohmann::json j{{"file_id", file}, {"path", path}, {"chunk_index", chunk_index}, {"distance", distance}};
        if (with_text) j["text"] = text;
        return j;
    }
    static RetrievedChunk from_json(const nlohmann::json& j) {
        return {j.at("file_id").get<FileId>(), j.at("path").get<std::string>(),
                j.at("chunk_index").get<std::size_t>(), j.at("distance").get<double>(), j.value("text", "")};
    }
};

struct QueryResult {
    std::optional<WorkspaceId> workspace;
    std::string question;
    std::size_t k = 5;
    std::vector<RetrievedChunk> hits;
    std::string answer;
    std::uint64_t distance_evals = 0;
    /// Distance evaluations spent building an index while answering; zero
    /// whenever the index already existed.
    std::uint64_t index_build_distance_evals = 0;
    double embed_seconds = 0;
    double search_seconds = 0;
    double generate_seconds = 0;
    std::uint64_t index_version = 0;

    /// Retrieval latency: question embedding plus index search.
    double latency_seconds() const noexcept { return embed_seconds + search_seconds; }

    nlohmann::json to_json() const {
        nlohmann::json hs = nlohmann::json::array();
        for (const auto& h : hits) hs.push_back(h.to_json());
        nlohmann::json j{{"question", question},
                         {"k", k},
                         {"hits", hs},
                         {"answer", answer},
                         {"distance_evals", distance_evals},
                         {"index_build_distance_evals", index_build_distance_evals},
                         {"latency_seconds", latency_seconds()},
                         {"embed_seconds", embed_seconds},
                         {"search_seconds", search_seconds},
                         {"generate_seconds", generate_seconds},
                         {"index_version", index_version}};
        j["workspace_id"] = workspace ? nlohmann::json(*workspace) : nlohmann::json();
        return j;
    }
};

struct ThreadEntry {
    Timestamp at{};
    std::string question;
    std::size_t k = 5;
    std::vector<RetrievedChunk> retrieved;
    std::string answer;

    nlohmann::json to_json() const {
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : retrieved) rs.push_back(r.to_json(false));
        return {{"at", timestamp_json(at)}, {"question", question}, {"k", k}, {"retrieved", rs}, {"answer", answer}};
    }
    static ThreadEntry from_json(const nlohmann::json& j) {
        ThreadEntry t{timestamp_from_json(j.at("at")), j.at("question").get<std::string>(),
                      j.at("k").get<std::size_t>(), {}, j.at("answer").get<std::string>()};
        for (const auto& r : j.at("retrieved")) t.retrieved.push_back(RetrievedChunk::from_json(r));
        return t;
    }
};

struct AccessEvent {
    Timestamp at{};
    std::string action;
    std::string detail;

    nlohmann::json to_json() const { return {{"at", timestamp_json(at)}, {"action", action}, {"detail", detail}}; }
    static AccessEvent from_json(const nlohmann::json& j) {
        return {timestamp_from_json(j.at("at")), j.at("action").get<std::string>(), j.at("detail").get<std::string>()};
    }
};

/// Per-workspace totals behind the session cost decomposition.
struct WorkspaceStats {
    std::uint64_t builds = 0;
    std::uint64_t queries = 0;
    std::uint64_t tag_distance_evals = 0;
    double tag_lookup_seconds = 0;
    std::uint64_t metadata_rows_touched = 0;
    double filter_seconds = 0;
    std::uint64_t n_candidates = 0;
    std::uint64_t n_filtered = 0;
    std::uint64_t files_processed = 0;
    std::uint64_t embeddings_computed = 0;
    double processing_seconds = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t index_inserts = 0;
    std::uint64_t index_build_distance_evals = 0;
    double indexing_seconds = 0;
    std::uint64_t query_distance_evals = 0;
    double query_seconds = 0;

    nlohmann::json to_json() const {
        return {{"builds", builds},
                {"queries", queries},
                {"tag_distance_evals", tag_distance_evals},
                {"tag_lookup_seconds", tag_lookup_seconds},
                {"metadata_rows_touched", metadata_rows_touched},
                {"filter_seconds", filter_seconds},
                {"n_candidates", n_candidates},
                {"n_filtered", n_filtered},
                {"files_processed", files_processed},
                {"embeddings_computed", embeddings_computed},
                {"processing_seconds", processing_seconds},
                {"cache_hits", cache_hits},
                {"cache_misses", cache_misses},
                {"index_inserts", index_inserts},
                {"index_build_distance_evals", index_build_distance_evals},
                {"indexing_seconds", indexing_seconds},
                {"query_distance_evals", query_distance_evals},
                {"query_seconds", query_seconds}};
    }
    static WorkspaceStats from_json(const nlohmann::json& j) {
        WorkspaceStats s;
        s.builds = j.at("builds");
        s.queries = j.at("queries");
        s.tag_distance_evals = j.at("tag_distance_evals");
        s.tag_lookup_seconds = j.at("tag_lookup_seconds");
        s.metadata_rows_touched = j.at("metadata_rows_touched");
        s.filter_seconds = j.at("filter_seconds");
        s.n_candidates = j.at("n_candidates");
        s.n_filtered = j.at("n_filtered");
        s.files_processed = j.at("files_processed");
        s.embeddings_computed = j.at("embeddings_computed");
        s.processing_seconds = j.at("processing_seconds");
        s.cache_hits = j.at("cache_hits");
        s.cache_misses = j.at("cache_misses");
        s.index_inserts = j.at("index_inserts");
        s.index_build_distance_evals = j.at("index_build_distance_evals");
        s.indexing_seconds = j.at("indexing_seconds");
        s.query_distance_evals = j.at("query_distance_evals");
        s.query_seconds = j.at("query_seconds");
        return s;
    }
};

struct BuildReport {
    WorkspaceId workspace;
    std::uint64_t index_version = 0;
    std::size_t n_candidates = 0;
    std::size_t n_filtered = 0;
    std::vector<GateRejection> rejected;
    std::vector<FileId> added;
    std::vector<FileId> changed;
    std::vector<FileId> restored;
    std::vector<FileId> removed;
    std::size_t unchanged = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t files_processed = 0;
    std::uint64_t embeddings_computed = 0;
    std::uint64_t index_inserts = 0;
    std::size_t index_size = 0;
    bool index_rebuilt = false;
    std::uint64_t distance_evals = 0;
    std::uint64_t tag_distance_evals = 0;
    std::uint64_t metadata_rows_touched = 0;
    double tag_lookup_seconds = 0;
    double filter_seconds = 0;
    double processing_seconds = 0;
    double indexing_seconds = 0;
    double wall_seconds = 0;
    FilterTrace filter_trace;
    FilterSpec filter_spec;

    nlohmann::json to_json() const {
        nlohmann::json rej = nlohmann::json::array();
        for (const auto& r : rejected) rej.push_back({{"file_id", r.file}, {"gate", r.gate}, {"reason", r.reason}});
        return {{"workspace_id", workspace},
                {"index_version", index_version},
                {"n_candidates", n_candidates},
                {"n_filtered", n_filtered},
                {"rejected", rej},
                {"added", added},
                {"changed", changed},
                {"restored", restored},
                {"removed", removed},
                {"unchanged", unchanged},
                {"cache_hits", cache_hits},
                {"cache_misses", cache_misses},
                {"files_processed", files_processed},
                {"embeddings_computed", embeddings_computed},
                {"index_inserts", index_inserts},
                {"index_size", index_size},
                {"index_rebuilt", index_rebuilt},
                {"distance_evals", distance_evals},
                {"tag_distance_evals", tag_distance_evals},
                {"metadata_rows_touched", metadata_rows_touched},
                {"seconds",
                 {{"tag_lookup", tag_lookup_seconds},
                  {"filtering", filter_seconds},
                  {"processing", processing_seconds},
                  {"indexing", indexing_seconds},
                  {"wall", wall_seconds}}},
                {"filter_trace", filter_trace.to_json()},
                {"filter_spec", filter_spec.to_json()}};
    }
};

/// Everything kept about an archived workspace. Holds no vectors and no
/// index data.
struct ArchiveRecord {
    WorkspaceId workspace;
    std::string name;
    std::optional<FilterSpec> filter_spec;
    std::vector<AdmittedFile> file_list;
    std::vector<ThreadEntry> thread_log;
    std::vector<AccessEvent> access_history;
    WorkspaceStats stats;
    Timestamp created_at{};
    Timestamp last_accessed{};
    Timestamp archived_at{};

    /// Object keys serialize in sorted order, so equal records produce equal
    /// bytes.
    nlohmann::json to_json() const {
        nlohmann::json files = nlohmann::json::array(), thread = nlohmann::json::array(),
                       history = nlohmann::json::array();
        for (const auto& f : file_list) files.push_back(f.to_json());
        for (const auto& t : thread_log) thread.push_back(t.to_json());
        for (const auto& a : access_history) history.push_back(a.to_json());
        return {{"format", "spar-archive-1"},
                {"workspace_id", workspace},
                {"name", name},
                {"filter_spec", filter_spec ? filter_spec->to_json() : nlohmann::json()},
                {"file_list", files},
                {"thread_log", thread},
                {"access_history", history},
                {"stats", stats.to_json()},
                {"created_at", timestamp_json(created_at)},
                {"last_accessed", timestamp_json(last_accessed)},
                {"archived_at", timestamp_json(archived_at)}};
    }
    std::string canonical() const { return to_json().dump(); }

    static ArchiveRecord from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "spar-archive-1")
            throw Error(ErrorCode::invalid_argument, "not a workspace archive record");
        ArchiveRecord r;
        r.workspace = j.at("workspace_id").get<WorkspaceId>();
        r.name = j.at("name").get<std::string>();
        if (!j.at("filter_spec").is_null()) r.filter_spec = FilterSpec::from_json(j["filter_spec"]);
        for (const auto& f : j.at("file_list")) r.file_list.push_back(AdmittedFile::from_json(f));
        for (const auto& t : j.at("thread_log")) r.thread_log.push_back(ThreadEntry::from_json(t));
        for (const auto& a : j.at("access_history")) r.access_history.push_back(AccessEvent::from_json(a));
        r.stats = WorkspaceStats::from_json(j.at("stats"));
        r.created_at = timestamp_from_json(j.at("created_at"));
        r.last_accessed = timestamp_from_json(j.at("last_accessed"));
        r.archived_at = timestamp_from_json(j.at("archived_at"));
        return r;
    }
};

struct WorkspaceInfo {
    WorkspaceId id;
    std::string name;
    WorkspaceStatus status = WorkspaceStatus::active;
    std::size_t file_count = 0;
    std::size_t index_items = 0;
    std::uint64_t queries = 0;
    Timestamp created_at{};
    Timestamp last_accessed{};
    std::optional<std::string> prompt;

    nlohmann::json to_json() const {
        nlohmann::json j{{"workspace_id", id},
                         {"name", name},
                         {"status", std::string(status_name(status))},
                         {"file_count", file_count},
                         {"index_items", index_items},
                         {"queries", queries},
                         {"created_at", timestamp_json(created_at)},
                         {"last_accessed", timestamp_json(last_accessed)}};
        j["prompt"] = prompt ? nlohmann::json(*prompt) : nlohmann::json();
        return j;
    }
};

} // namespace spar
