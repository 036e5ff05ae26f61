// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "spar/ann/hnsw_index.hpp"
#include "spar/core/file_source.hpp"
#include "spar/cost/model.hpp"
#include "spar/query/interpreter_source.hpp"
#include "spar/workspace/processing.hpp"
#include "spar/workspace/types.hpp"

namespace spar {

struct WorkspaceConfig {
    ChunkerConfig chunker;
    AnnParams ann;
    std::size_t default_k = 5;
    std::chrono::seconds ttl = std::chrono::days(14);
    /// Archive records are written to <archive_dir>/<id>.json when set.
    std::optional<std::filesystem::path> archive_dir;
    /// The index is rebuilt from its surviving vectors once tombstones
    /// outnumber live items by this factor.
    double compaction_ratio = 1.0;
};

/// Session lifecycle over a shared Metadata Index and embedding cache.
/// Operations on one workspace are serialized by that workspace's lock;
/// distinct workspaces proceed independently.
class WorkspaceManager {
public:
    WorkspaceManager(MetadataIndex& index, const FileSource& files, InterpreterSource& interpreters,
                     std::shared_ptr<Embedder> embedder, std::shared_ptr<AnswerGenerator> generator,
                     EmbeddingCache& cache, CostLedger& ledger, std::shared_ptr<const Clock> clock,
                     GateChain gates = GateChain::defaults(), WorkspaceConfig cfg = {})
        : index_(index), files_(files), interpreters_(interpreters), embedder_(std::move(embedder)),
          generator_(std::move(generator)), cache_(cache), ledger_(ledger), clock_(std::move(clock)),
          gates_(std::move(gates)), cfg_(std::move(cfg)) {
        cfg_.ann.validate();
        cfg_.chunker.validate();
        if (cfg_.archive_dir) std::filesystem::create_directories(*cfg_.archive_dir);
    }

    const WorkspaceConfig& config() const noexcept { return cfg_; }

    WorkspaceInfo create(std::string name) {
        auto ws = std::make_shared<State>();
        {
            std::unique_lock lock(mu_);
            ws->id = WorkspaceId(++last_id_);
            workspaces_.emplace(ws->id, ws);
        }
        ws->name = std::move(name);
        ws->created_at = ws->last_accessed = clock_->now();
        ws->history.push_back({ws->created_at, "created", ws->name});
        ++ledger_.workspaces_created;
        std::lock_guard g(ws->mu);
        return info_of(*ws);
    }

    /// Interprets `prompt`, filters, admits through the gates and brings the
    /// workspace index in line with the admitted set: files no longer matching
    /// are dropped, new or changed files are embedded (through the cache) and
    /// inserted, unchanged files are left alone.
    BuildReport build_update_dtb(WorkspaceId id, const std::string& prompt) {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        require_active(*ws);
        auto started = std::chrono::steady_clock::now();
        BuildReport report;
        report.workspace = id;

        CostLedger local;
        auto interp = interpreters_.get();
        auto t0 = std::chrono::steady_clock::now();
        auto spec = interp->interpret(prompt, &local);
        report.tag_lookup_seconds = seconds_since(t0);
        report.tag_distance_evals = local.tag_distance_evals;
        ledger_.tag_distance_evals += report.tag_distance_evals;

        apply_spec(*ws, std::move(spec), report);
        ws->history.push_back({ws->last_accessed, "build", prompt});
        report.wall_seconds = seconds_since(started);
        return report;
    }

    QueryResult query(WorkspaceId id, const std::string& question, std::optional<std::size_t> k = std::nullopt) {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        require_active(*ws);
        if (question.find_first_not_of(" \t\r\n") == std::string::npos)
            throw Error(ErrorCode::invalid_argument, "question is empty");
        QueryResult r;
        r.workspace = id;
        r.question = question;
        r.k = k.value_or(cfg_.default_k);
        if (r.k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
        if (!ws->index || ws->index->live_size() == 0)
            throw Error(ErrorCode::empty_workspace_index, "workspace " + id.str() + " has nothing indexed");

        auto t0 = std::chrono::steady_clock::now();
        auto q = embedder_->embed(question);
        r.embed_seconds = seconds_since(t0);
        ++ledger_.query_embeddings;
        t0 = std::chrono::steady_clock::now();
        auto found = ws->index->search(q.values, r.k, std::max(cfg_.ann.ef_search, r.k));
        r.search_seconds = seconds_since(t0);
        r.distance_evals = found.distance_evals;
        ledger_.ann_distance_evals += found.distance_evals;
        ledger_.record_query(r.latency_seconds());

        std::vector<ContextChunk> context;
        for (const auto& h : found.hits) {
            const auto& item = ws->items.at(h.id);
            if (!ws->files.count(item.file))
                throw std::logic_error("workspace index returned a file outside its file list");
            r.hits.push_back({item.file, ws->files.at(item.file).path, item.chunk, double(h.distance), item.text});
            context.push_back({r.hits.back().path, item.chunk, item.text});
        }
        t0 = std::chrono::steady_clock::now();
        r.answer = generator_->generate(question, context);
        r.generate_seconds = seconds_since(t0);
        r.index_version = index_.version();

        touch(*ws);
        ws->stats.queries++;
        ws->stats.query_distance_evals += r.distance_evals;
        ws->stats.query_seconds += r.latency_seconds();
        ws->thread.push_back({ws->last_accessed, question, r.k, r.hits, r.answer});
        for (auto& t : ws->thread.back().retrieved) t.text.clear();
        ws->history.push_back({ws->last_accessed, "query", question});
        return r;
    }

    /// Drops the index and every workspace-held vector; keeps filter spec,
    /// file list, thread log and history.
    ArchiveRecord archive(WorkspaceId id) {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        if (ws->status != WorkspaceStatus::active)
            throw Error(ErrorCode::illegal_transition, "workspace " + id.str() + " is not active");
        return archive_locked(*ws);
    }

    /// Re-applies the stored filter spec against the current index and
    /// rebuilds through the cache. Files whose content changed since
    /// archival are listed in `changed`.
    BuildReport reactivate(WorkspaceId id) {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        if (ws->status != WorkspaceStatus::archived)
            throw Error(ErrorCode::illegal_transition, "workspace " + id.str() + " is not archived");
        auto started = std::chrono::steady_clock::now();
        ws->status = WorkspaceStatus::active;
        ws->archive.reset();
        remove_archive_file(id);
        set_archive_size(id, std::nullopt);
        BuildReport report;
        report.workspace = id;
        if (ws->spec) apply_spec(*ws, *ws->spec, report);
        else touch(*ws);
        ws->history.push_back({ws->last_accessed, "reactivated", ""});
        report.wall_seconds = seconds_since(started);
        return report;
    }

    /// Brings back a workspace from a record produced by archive(), for
    /// example after a restart. The workspace comes back archived.
    WorkspaceInfo restore(const ArchiveRecord& rec) {
        auto ws = std::make_shared<State>();
        ws->id = rec.workspace;
        ws->name = rec.name;
        ws->status = WorkspaceStatus::archived;
        ws->spec = rec.filter_spec;
        for (const auto& f : rec.file_list) ws->files.emplace(f.file, f);
        ws->thread = rec.thread_log;
        ws->history = rec.access_history;
        ws->stats = rec.stats;
        ws->created_at = rec.created_at;
        ws->last_accessed = rec.last_accessed;
        ws->archive = rec;
        {
            std::unique_lock lock(mu_);
            if (workspaces_.count(rec.workspace))
                throw Error(ErrorCode::duplicate_id, "workspace " + rec.workspace.str() + " already exists");
            workspaces_.emplace(ws->id, ws);
            last_id_ = std::max(last_id_, rec.workspace.value);
        }
        set_archive_size(rec.workspace, rec.canonical().size());
        std::lock_guard g(ws->mu);
        return info_of(*ws);
    }

    /// Deletes the workspace together with its archive record.
    void terminate(WorkspaceId id) {
        std::shared_ptr<State> ws;
        {
            std::unique_lock lock(mu_);
            auto it = workspaces_.find(id);
            if (it == workspaces_.end())
                throw Error(ErrorCode::workspace_not_found, "no workspace " + id.str());
            ws = it->second;
            workspaces_.erase(it);
        }
        std::lock_guard g(ws->mu);
        ws->status = WorkspaceStatus::terminated;
        ws->index.reset();
        ws->items.clear();
        ws->archive.reset();
        ledger_.clear_workspace_memory(id);
        remove_archive_file(id);
        set_archive_size(id, std::nullopt);
    }

    /// Archives every active workspace idle for strictly longer than `ttl`.
    std::vector<WorkspaceId> expire_inactive(std::optional<std::chrono::seconds> ttl = std::nullopt) {
        auto limit = ttl.value_or(cfg_.ttl);
        auto now = clock_->now();
        std::vector<WorkspaceId> out;
        for (auto& ws : snapshot()) {
            std::lock_guard g(ws->mu);
            if (ws->status != WorkspaceStatus::active) continue;
            if (now - ws->last_accessed > limit) {
                archive_locked(*ws);
                out.push_back(ws->id);
            }
        }
        return out;
    }

    // ---- Inspection ---------------------------------------------------------

    WorkspaceInfo info(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return info_of(*ws);
    }

    std::vector<WorkspaceInfo> list() const {
        std::vector<WorkspaceInfo> out;
        for (auto& ws : snapshot()) {
            std::lock_guard g(ws->mu);
            out.push_back(info_of(*ws));
        }
        return out;
    }

    std::vector<AdmittedFile> file_list(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        std::vector<AdmittedFile> out;
        for (const auto& [_, f] : ws->files) out.push_back(f);
        return out;
    }

    std::optional<FilterSpec> filter_spec(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->spec;
    }

    std::vector<ThreadEntry> thread(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->thread;
    }

    std::vector<AccessEvent> history(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->history;
    }

    WorkspaceStats stats(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->stats;
    }

    SessionCostReport session_cost_report(WorkspaceId id) const {
        auto s = stats(id);
        SessionCostReport r;
        r.tag_lookup_seconds = s.tag_lookup_seconds;
        r.tag_distance_evals = s.tag_distance_evals;
        r.filtering_seconds = s.filter_seconds;
        r.metadata_rows_touched = s.metadata_rows_touched;
        r.n_candidates = s.n_candidates;
        r.n_filtered = s.n_filtered;
        r.processing_seconds = s.processing_seconds;
        r.files_processed = s.files_processed;
        r.embeddings_computed = s.embeddings_computed;
        r.mean_t_proc = s.files_processed ? s.processing_seconds / double(s.files_processed) : 0;
        r.indexing_seconds = s.indexing_seconds;
        r.index_build_distance_evals = s.index_build_distance_evals;
        r.index_inserts = s.index_inserts;
        r.queries = s.queries;
        r.cache_hits = s.cache_hits;
        r.cache_misses = s.cache_misses;
        return r;
    }

    AmortizedOverhead amortized_query_overhead(WorkspaceId id) const {
        auto s = stats(id);
        return amortize(s.index_build_distance_evals, s.indexing_seconds, s.queries);
    }

    std::optional<ArchiveRecord> archive_record(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->archive;
    }

    /// Bytes of vectors this workspace keeps resident (index storage).
    std::uint64_t resident_vector_bytes(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->index ? ws->index->vector_bytes() : 0;
    }

    std::size_t index_items(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->index ? ws->index->live_size() : 0;
    }

    /// The workspace's ANN graph, for recall and cost experiments. Null once
    /// archived. Not safe to search while the workspace is being rebuilt.
    std::shared_ptr<const HnswIndex> index_graph(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->index;
    }

    std::uint64_t index_builds(WorkspaceId id) const {
        auto ws = get(id);
        std::lock_guard g(ws->mu);
        return ws->index_builds;
    }

    std::size_t active_count() const {
        std::size_t n = 0;
        for (auto& ws : snapshot()) {
            std::lock_guard g(ws->mu);
            n += ws->status == WorkspaceStatus::active;
        }
        return n;
    }

private:
    struct Item {
        FileId file;
        std::size_t chunk = 0;
        std::string text;
    };

    struct State {
        mutable std::mutex mu;
        WorkspaceId id;
        std::string name;
        WorkspaceStatus status = WorkspaceStatus::active;
        std::optional<FilterSpec> spec;
        std::map<FileId, AdmittedFile> files;
        std::shared_ptr<HnswIndex> index;
        std::map<std::uint64_t, Item> items;
        std::map<FileId, std::vector<std::uint64_t>> file_items;
        std::uint64_t next_item = 0;
        std::uint64_t index_builds = 0;
        Timestamp created_at{};
        Timestamp last_accessed{};
        std::vector<ThreadEntry> thread;
        std::vector<AccessEvent> history;
        WorkspaceStats stats;
        std::optional<ArchiveRecord> archive;
    };

    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::shared_ptr<State> get(WorkspaceId id) const {
        std::shared_lock lock(mu_);
        auto it = workspaces_.find(id);
        if (it == workspaces_.end()) throw Error(ErrorCode::workspace_not_found, "no workspace " + id.str());
        return it->second;
    }

    std::vector<std::shared_ptr<State>> snapshot() const {
        std::shared_lock lock(mu_);
        std::vector<std::shared_ptr<State>> out;
        for (const auto& [_, ws] : workspaces_) out.push_back(ws);
        return out;
    }

    static void require_active(const State& ws) {
        if (ws.status == WorkspaceStatus::archived)
            throw Error(ErrorCode::workspace_archived, "workspace " + ws.id.str() + " is archived");
        if (ws.status != WorkspaceStatus::active)
            throw Error(ErrorCode::workspace_not_active, "workspace " + ws.id.str() + " is not active");
    }

    void touch(State& ws) {
        auto now = clock_->now();
        if (now > ws.last_accessed) ws.last_accessed = now;
    }

    WorkspaceInfo info_of(const State& ws) const {
        WorkspaceInfo i;
        i.id = ws.id;
        i.name = ws.name;
        i.status = ws.status;
        i.file_count = ws.files.size();
        i.index_items = ws.index ? ws.index->live_size() : 0;
        i.queries = ws.stats.queries;
        i.created_at = ws.created_at;
        i.last_accessed = ws.last_accessed;
        if (ws.spec) i.prompt = ws.spec->source_prompt;
        return i;
    }

    void apply_spec(State& ws, FilterSpec spec, BuildReport& report) {
        auto t0 = std::chrono::steady_clock::now();
        auto filtered = index_.filter_files(spec.tag_groups, spec.predicates);
        report.filter_seconds = seconds_since(t0);
        report.metadata_rows_touched = filtered.rows_touched;
        report.n_candidates = filtered.files.size();
        report.filter_trace = filtered.trace;

        struct Admit {
            FileRecord record;
            std::string content;
        };
        std::vector<Admit> admitted;
        for (auto fid : filtered.files) {
            auto rec = index_.file(fid);
            if (!rec) continue;
            auto content = files_.read(rec->path);
            if (auto why = gates_.evaluate(*rec, content ? &*content : nullptr)) {
                report.rejected.push_back(*why);
                continue;
            }
            admitted.push_back({std::move(*rec), content.value_or(std::string{})});
        }
        report.n_filtered = admitted.size();

        std::set<FileId> keep;
        for (const auto& a : admitted) keep.insert(a.record.id);
        for (const auto& [fid, _] : ws.files)
            if (!keep.count(fid)) report.removed.push_back(fid);

        // Decide per admitted file whether the index already holds it.
        std::vector<const Admit*> to_insert;
        std::vector<FileId> stale;
        for (const auto& a : admitted) {
            auto it = ws.files.find(a.record.id);
            bool indexed = ws.index && ws.file_items.count(a.record.id);
            if (it != ws.files.end() && it->second.content_hash == a.record.content_hash && indexed) {
                ++report.unchanged;
                continue;
            }
            if (it == ws.files.end()) report.added.push_back(a.record.id);
            else if (it->second.content_hash != a.record.content_hash) report.changed.push_back(a.record.id);
            else report.restored.push_back(a.record.id);
            if (indexed) stale.push_back(a.record.id);
            to_insert.push_back(&a);
        }

        // Obtain chunks and embeddings first, so processing and indexing
        // costs are measured separately.
        FileProcessor proc(*embedder_, cfg_.chunker, &cache_, &ledger_, *clock_);
        std::vector<std::shared_ptr<const CacheEntry>> entries;
        for (const auto* a : to_insert) {
            auto p = proc.obtain(a->record, a->content);
            if (p.cache_hit) {
                ++report.cache_hits;
            } else {
                ++report.cache_misses;
                ++report.files_processed;
                report.embeddings_computed += p.entry->embeddings.size();
                report.processing_seconds += p.t_proc_seconds;
            }
            entries.push_back(std::move(p.entry));
        }

        t0 = std::chrono::steady_clock::now();
        for (auto fid : report.removed) drop_file(ws, fid);
        for (auto fid : stale) drop_file(ws, fid);
        if (ws.index && double(ws.index->size() - ws.index->live_size()) >
                            cfg_.compaction_ratio * double(std::max<std::size_t>(ws.index->live_size(), 1))) {
            compact(ws, report);
        }
        if (!ws.index && !entries.empty()) {
            ws.index = std::make_shared<HnswIndex>(embedder_->dim(), cfg_.ann);
            ws.index_builds++;
            report.index_rebuilt = true;
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& rec = to_insert[i]->record;
            auto& slots = ws.file_items[rec.id];
            for (std::size_t c = 0; c < entries[i]->embeddings.size(); ++c) {
                auto item = ws.next_item++;
                report.distance_evals += ws.index->insert(item, entries[i]->embeddings[c]);
                ++report.index_inserts;
                ws.items.emplace(item, Item{rec.id, c, entries[i]->chunks[c].text});
                slots.push_back(item);
            }
        }
        report.indexing_seconds = seconds_since(t0);
        ledger_.index_inserts += report.index_inserts;
        ledger_.ann_distance_evals += report.distance_evals;

        std::map<FileId, AdmittedFile> next;
        for (std::size_t i = 0; i < admitted.size(); ++i) {
            const auto& rec = admitted[i].record;
            auto items = ws.file_items.count(rec.id) ? ws.file_items[rec.id].size() : 0;
            next.emplace(rec.id, AdmittedFile{rec.id, rec.path, rec.content_hash, items});
        }
        ws.files = std::move(next);
        ws.spec = std::move(spec);
        report.filter_spec = *ws.spec;
        report.index_size = ws.index ? ws.index->live_size() : 0;
        report.index_version = index_.version();

        auto& s = ws.stats;
        s.builds++;
        s.tag_distance_evals += report.tag_distance_evals;
        s.tag_lookup_seconds += report.tag_lookup_seconds;
        s.metadata_rows_touched += report.metadata_rows_touched;
        s.filter_seconds += report.filter_seconds;
        s.n_candidates = report.n_candidates;
        s.n_filtered = report.n_filtered;
        s.files_processed += report.files_processed;
        s.embeddings_computed += report.embeddings_computed;
        s.processing_seconds += report.processing_seconds;
        s.cache_hits += report.cache_hits;
        s.cache_misses += report.cache_misses;
        s.index_inserts += report.index_inserts;
        s.index_build_distance_evals += report.distance_evals;
        s.indexing_seconds += report.indexing_seconds;

        publish_memory(ws);
        touch(ws);
    }

    void drop_file(State& ws, FileId fid) {
        auto it = ws.file_items.find(fid);
        if (it == ws.file_items.end()) return;
        for (auto item : it->second) {
            ws.index->mark_deleted(item);
            ws.items.erase(item);
        }
        ws.file_items.erase(it);
    }

    /// Rebuilds the index from the vectors it already holds; nothing is
    /// re-embedded.
    void compact(State& ws, BuildReport& report) {
        auto fresh = std::make_shared<HnswIndex>(embedder_->dim(), cfg_.ann);
        std::map<std::uint64_t, Item> items;
        std::map<FileId, std::vector<std::uint64_t>> file_items;
        std::uint64_t next = 0;
        for (const auto& [fid, old_items] : ws.file_items) {
            for (auto old : old_items) {
                auto item = next++;
                report.distance_evals += fresh->insert(item, ws.index->vector(old));
                items.emplace(item, ws.items.at(old));
                file_items[fid].push_back(item);
            }
        }
        ws.index = std::move(fresh);
        ws.items = std::move(items);
        ws.file_items = std::move(file_items);
        ws.next_item = next;
        ws.index_builds++;
        report.index_rebuilt = true;
    }

    void publish_memory(const State& ws) {
        if (!ws.index) {
            ledger_.clear_workspace_memory(ws.id);
            return;
        }
        WorkspaceMemory m{ws.index->vector_bytes(), ws.index->overhead_bytes(), {}};
        for (const auto& [fid, _] : ws.file_items) m.indexed_files.push_back(fid);
        ledger_.set_workspace_memory(ws.id, std::move(m));
    }

    ArchiveRecord archive_locked(State& ws) {
        touch(ws);
        ArchiveRecord rec;
        rec.workspace = ws.id;
        rec.name = ws.name;
        rec.filter_spec = ws.spec;
        for (const auto& [_, f] : ws.files) rec.file_list.push_back(f);
        rec.thread_log = ws.thread;
        ws.history.push_back({ws.last_accessed, "archived", ""});
        rec.access_history = ws.history;
        rec.stats = ws.stats;
        rec.created_at = ws.created_at;
        rec.last_accessed = ws.last_accessed;
        rec.archived_at = ws.last_accessed;

        ws.index.reset();
        ws.items.clear();
        ws.file_items.clear();
        ws.next_item = 0;
        ws.status = WorkspaceStatus::archived;
        ws.archive = rec;
        ledger_.clear_workspace_memory(ws.id);
        auto bytes = rec.canonical();
        if (cfg_.archive_dir) {
            auto path = *cfg_.archive_dir / (ws.id.str() + ".json");
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
            out << bytes;
        }
        set_archive_size(ws.id, bytes.size());
        return rec;
    }

    void remove_archive_file(WorkspaceId id) {
        if (!cfg_.archive_dir) return;
        std::error_code ec;
        std::filesystem::remove(*cfg_.archive_dir / (id.str() + ".json"), ec);
    }

    void set_archive_size(WorkspaceId id, std::optional<std::uint64_t> bytes) {
        std::lock_guard lock(archive_mu_);
        if (bytes) archive_sizes_[id] = *bytes;
        else archive_sizes_.erase(id);
        std::uint64_t total = 0;
        for (const auto& [_, b] : archive_sizes_) total += b;
        ledger_.set_archive_bytes(total);
    }

    MetadataIndex& index_;
    const FileSource& files_;
    InterpreterSource& interpreters_;
    std::shared_ptr<Embedder> embedder_;
    std::shared_ptr<AnswerGenerator> generator_;
    EmbeddingCache& cache_;
    CostLedger& ledger_;
    std::shared_ptr<const Clock> clock_;
    GateChain gates_;
    WorkspaceConfig cfg_;

    mutable std::shared_mutex mu_;
    std::map<WorkspaceId, std::shared_ptr<State>> workspaces_;
    std::uint64_t last_id_ = 0;
    std::mutex archive_mu_;
    std::map<WorkspaceId, std::uint64_t> archive_sizes_;
};

} // namespace spar
