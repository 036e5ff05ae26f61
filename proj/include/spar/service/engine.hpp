// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "spar/baseline/global_rag.hpp"
#include "spar/cost/model.hpp"
#include "spar/embedding/provider.hpp"
#include "spar/metadata/ingest.hpp"
#include "spar/metadata/tree_numbers.hpp"
#include "spar/workspace/manager.hpp"

namespace spar {

/// Everything the service reads from its config file. Unknown keys are
/// ignored; missing keys keep the defaults below.
struct SparConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> corpus_root;
    std::optional<std::filesystem::path> index_path;
    std::optional<std::filesystem::path> archive_dir;
    ProviderConfig provider;
    ProviderConfig tag_provider = [] {
        ProviderConfig p;
        p.dim = 128;
        return p;
    }();
    WorkspaceConfig workspace;
    InterpreterConfig interpreter;
    std::optional<std::string> stopwords_path;
    std::uint64_t cache_capacity_bytes = EmbeddingCache::kUnbounded;
    std::size_t idempotency_capacity = 1024;
    std::size_t page_limit_max = 1000;

    static SparConfig from_json(const nlohmann::json& j) {
        SparConfig c;
        if (j.contains("listen")) {
            c.host = j["listen"].value("host", c.host);
            c.port = j["listen"].value("port", c.port);
        }
        auto path = [&](const char* key, std::optional<std::filesystem::path>& out) {
            if (j.contains(key) && j[key].is_string()) out = j[key].get<std::string>();
        };
        path("corpus_root", c.corpus_root);
        path("index_path", c.index_path);
        path("archive_dir", c.archive_dir);
        if (j.contains("provider")) c.provider = ProviderConfig::from_json(j["provider"]);
        if (j.contains("tag_provider")) c.tag_provider = ProviderConfig::from_json(j["tag_provider"]);
        if (j.contains("workspace")) {
            const auto& w = j["workspace"];
            c.workspace.default_k = w.value("default_k", c.workspace.default_k);
            c.workspace.ttl = std::chrono::seconds(
                w.value("ttl_seconds", static_cast<std::int64_t>(c.workspace.ttl.count())));
            c.workspace.chunker.window = w.value("chunk_window", c.workspace.chunker.window);
            c.workspace.chunker.overlap = w.value("chunk_overlap", c.workspace.chunker.overlap);
            c.workspace.compaction_ratio = w.value("compaction_ratio", c.workspace.compaction_ratio);
            if (w.contains("ann")) c.workspace.ann = AnnParams::from_json(w["ann"]);
        }
        if (j.contains("interpreter")) {
            const auto& i = j["interpreter"];
            c.interpreter.top_m = i.value("top_m", c.interpreter.top_m);
            c.interpreter.min_sim = i.value("min_sim", c.interpreter.min_sim);
            c.interpreter.parser.date_patterns = i.value("date_patterns", c.interpreter.parser.date_patterns);
            if (i.contains("stopwords_path") && i["stopwords_path"].is_string())
                c.stopwords_path = i["stopwords_path"].get<std::string>();
        }
        if (j.contains("cache_capacity_bytes") && j["cache_capacity_bytes"].is_number_unsigned())
            c.cache_capacity_bytes = j["cache_capacity_bytes"].get<std::uint64_t>();
        c.idempotency_capacity = j.value("idempotency_capacity", c.idempotency_capacity);
        c.page_limit_max = j.value("page_limit_max", c.page_limit_max);
        return c;
    }

    static SparConfig load(const std::filesystem::path& file) {
        std::ifstream in(file);
        if (!in) throw Error(ErrorCode::io_error, "cannot read config " + file.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::invalid_argument, std::string("bad config: ") + e.what());
        }
    }
};

/// Bytes uploaded through the API shadow the corpus directory, if any.
class OverlayFileSource final : public FileSource {
public:
    explicit OverlayFileSource(std::optional<std::filesystem::path> root) {
        if (root) disk_ = std::make_unique<DirectoryFileSource>(*root);
    }
    void put(std::string path, std::string bytes) { memory_.put(std::move(path), std::move(bytes)); }
    std::optional<std::string> read(const std::string& path) const override {
        if (auto b = memory_.read(path)) return b;
        if (disk_) return disk_->read(path);
        return std::nullopt;
    }

private:
    InMemoryFileSource memory_;
    std::unique_ptr<DirectoryFileSource> disk_;
};

/// One process worth of state: the Metadata Index, providers, shared cache,
/// workspaces and ledger. Each method is one module operation; the HTTP layer
/// only translates to and from JSON.
class Engine {
public:
    explicit Engine(SparConfig cfg, std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>())
        : cfg_(std::move(cfg)), clock_(std::move(clock)), cache_(cfg_.cache_capacity_bytes), files_(cfg_.corpus_root) {
        if (cfg_.index_path)
            index_ = MetadataIndex::open(*cfg_.index_path, MetadataSchema::defaults(), &ledger_);
        else
            index_ = std::make_unique<MetadataIndex>(MetadataSchema::defaults(), &ledger_);
        cache_.attach(*index_);
        embedder_ = make_embedder(cfg_.provider);
        generator_ = make_generator(cfg_.provider);
        tag_embedder_ = make_embedder(cfg_.tag_provider);
        auto icfg = cfg_.interpreter;
        icfg.parser.schema = index_->schema();
        if (cfg_.stopwords_path) icfg.parser.load_stopwords(*cfg_.stopwords_path);
        interpreters_ = std::make_unique<InterpreterSource>(*index_, tag_embedder_, icfg, clock_);
        auto wcfg = cfg_.workspace;
        if (cfg_.archive_dir) wcfg.archive_dir = cfg_.archive_dir;
        workspaces_ = std::make_unique<WorkspaceManager>(*index_, files_, *interpreters_, embedder_, generator_,
                                                         cache_, ledger_, clock_, GateChain::defaults(), wcfg);
    }

    const SparConfig& config() const noexcept { return cfg_; }
    MetadataIndex& index() noexcept { return *index_; }
    WorkspaceManager& workspaces() noexcept { return *workspaces_; }
    CostLedger& ledger() noexcept { return ledger_; }
    EmbeddingCache& cache() noexcept { return cache_; }
    OverlayFileSource& files() noexcept { return files_; }
    std::uint64_t index_version() const { return index_->version(); }

    // ---- corpus ---------------------------------------------------------------

    /// Bulk ingestion. Records may carry inline "content", which is stored in
    /// the overlay before the record is indexed.
    IngestReport ingest(const nlohmann::json& records) {
        if (!records.is_array()) throw Error(ErrorCode::invalid_argument, "ingestion body must be an array");
        IngestReport rep;
        for (std::size_t i = 0; i < records.size(); ++i) {
            try {
                auto rec = records[i];
                if (rec.is_object() && rec.contains("content")) {
                    if (!rec["content"].is_string() || !rec.contains("path") || !rec["path"].is_string())
                        throw Error(ErrorCode::invalid_argument, "inline content needs string 'path' and 'content'");
                    files_.put(rec["path"].get<std::string>(), rec["content"].get<std::string>());
                    rec.erase("content");
                }
                rep.added.push_back(ingest_one(*index_, rec, &files_, nullptr, *clock_, &ledger_));
            } catch (const Error& e) {
                rep.errors.push_back({i + 1, e.what()});
            } catch (const nlohmann::json::exception& e) {
                rep.errors.push_back({i + 1, e.what()});
            }
        }
        return rep;
    }

    /// New content (inline or re-read from the corpus) and/or new metadata for
    /// one file. Returns the updated record.
    FileRecord update_file(FileId id, const nlohmann::json& body) {
        auto rec = index_->file(id);
        if (!rec) throw Error(ErrorCode::unknown_file, "unknown file id " + id.str());
        std::string hash = rec->content_hash;
        if (body.contains("content")) {
            if (!body["content"].is_string()) throw Error(ErrorCode::invalid_argument, "'content' must be a string");
            files_.put(rec->path, body["content"].get<std::string>());
            hash = sha256_hex(body["content"].get<std::string>());
        } else if (body.contains("content_hash")) {
            hash = body["content_hash"].get<std::string>();
        } else if (body.value("rehash", false)) {
            auto bytes = files_.read(rec->path);
            if (!bytes) throw Error(ErrorCode::io_error, "cannot read " + rec->path);
            hash = sha256_hex(*bytes);
        }
        std::optional<Metadata> md;
        if (body.contains("metadata")) md = index_->schema().parse(body["metadata"]);
        return index_->update_file(id, hash, std::move(md), clock_->now());
    }

    struct FilePage {
        std::vector<FileRecord> files;
        std::size_t total = 0;
        std::size_t offset = 0;
        std::size_t limit = 0;
    };

    FilePage list_files(std::size_t offset, std::size_t limit) const {
        if (limit == 0 || limit > cfg_.page_limit_max)
            throw Error(ErrorCode::invalid_argument,
                        "limit must lie in [1, " + std::to_string(cfg_.page_limit_max) + "]");
        return {index_->files(offset, limit), index_->file_count(), offset, limit};
    }

    /// Appends the hierarchy implied by tree-number rows; returns the id
    /// offset its tags received.
    std::uint64_t import_tree_numbers(const std::vector<TreeNumberEntry>& rows) {
        return index_->import_hierarchy(build_hierarchy_from_tree_numbers(rows));
    }

    // ---- workspaces -----------------------------------------------------------

    WorkspaceInfo create_workspace(std::string name) { return workspaces_->create(std::move(name)); }
    BuildReport retrieve(WorkspaceId id, const std::string& prompt) { return workspaces_->build_update_dtb(id, prompt); }
    QueryResult query(WorkspaceId id, const std::string& question, std::optional<std::size_t> k) {
        return workspaces_->query(id, question, k);
    }
    ArchiveRecord archive(WorkspaceId id) { return workspaces_->archive(id); }
    BuildReport reactivate(WorkspaceId id) { return workspaces_->reactivate(id); }
    void terminate(WorkspaceId id) { workspaces_->terminate(id); }

    nlohmann::json workspace_detail(WorkspaceId id) const {
        auto j = workspaces_->info(id).to_json();
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : workspaces_->file_list(id)) files.push_back(f.to_json());
        nlohmann::json thread = nlohmann::json::array();
        for (const auto& t : workspaces_->thread(id)) thread.push_back(t.to_json());
        nlohmann::json history = nlohmann::json::array();
        for (const auto& h : workspaces_->history(id)) history.push_back(h.to_json());
        auto spec = workspaces_->filter_spec(id);
        j["files"] = files;
        j["thread"] = thread;
        j["history"] = history;
        j["filter_spec"] = spec ? spec->to_json() : nlohmann::json();
        j["stats"] = workspaces_->stats(id).to_json();
        return j;
    }

    /// The hierarchy with one entry per tag. With a workspace, each node also
    /// says whether the workspace selected it, reaches it through expansion,
    /// or pruned it in favour of a retained ancestor.
    nlohmann::json hierarchy(std::optional<WorkspaceId> highlight = std::nullopt) const {
        auto tags = index_->tag_snapshot();
        TagSet selected, expanded;
        std::map<TagId, TagId> pruned;
        std::vector<std::vector<TagId>> paths;
        if (highlight) {
            if (auto spec = workspaces_->filter_spec(*highlight)) {
                for (const auto& g : spec->tag_groups) {
                    selected.insert(g.begin(), g.end());
                    auto e = tags.expand(g);
                    expanded.insert(e.begin(), e.end());
                }
                for (const auto& k : spec->explanation.keywords)
                    for (const auto& p : k.pruned) pruned[p.tag] = p.retained_ancestor;
                paths = spec->explanation.highlighted_paths;
            } else {
                workspaces_->info(*highlight); // unknown ids still fail
            }
        }
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tags.nodes()) {
            auto j = tags.node_json(n.id);
            if (highlight) {
                j["selected"] = selected.count(n.id) > 0;
                j["in_expansion"] = expanded.count(n.id) > 0;
                auto p = pruned.find(n.id);
                j["pruned_for"] = p == pruned.end() ? nlohmann::json() : nlohmann::json(p->second);
            }
            nodes.push_back(std::move(j));
        }
        nlohmann::json out{{"nodes", nodes}, {"roots", tags.roots()}, {"tag_version", index_->tag_version()}};
        if (highlight) {
            out["workspace_id"] = *highlight;
            out["highlighted_paths"] = paths;
        }
        return out;
    }

    // ---- cost -----------------------------------------------------------------

    nlohmann::json workspace_cost(WorkspaceId id) const {
        auto info = workspaces_->info(id);
        auto mem = ledger_.workspace_memory(id);
        return {{"workspace_id", id},
                {"status", std::string(status_name(info.status))},
                {"session", workspaces_->session_cost_report(id).to_json()},
                {"amortized", workspaces_->amortized_query_overhead(id).to_json()},
                {"resident_vector_bytes", workspaces_->resident_vector_bytes(id)},
                {"resident_overhead_bytes", mem ? mem->overhead_bytes : 0},
                {"indexed_files", mem ? mem->indexed_files.size() : 0}};
    }

    /// Corpus-wide view: ledger, memory accounting and, once any workspace has
    /// been built, the break-even comparison at the current W and mean
    /// selectivity using constants measured from those builds.
    nlohmann::json cost_report() const {
        auto snap = ledger_.snapshot();
        const auto n = index_->file_count();
        auto mem = memory_report(snap, n);
        nlohmann::json out{{"ledger", snap.to_json()}, {"memory", mem.to_json()}};

        double idx_s = 0, inserts = 0, idx_size = 0, look_s = 0, handled = 0, tag_s = 0, tag_n = 0;
        std::size_t built = 0;
        for (const auto& w : workspaces_->list()) {
            auto s = workspaces_->session_cost_report(w.id);
            if (s.n_filtered == 0 && s.index_inserts == 0) continue;
            ++built;
            idx_s += s.indexing_seconds;
            inserts += double(s.index_inserts);
            idx_size += double(s.n_filtered);
            look_s += s.filtering_seconds;
            handled += double(s.n_filtered);
            tag_s += s.tag_lookup_seconds;
            tag_n += 1;
        }
        if (built == 0 || n == 0) {
            out["measured_constants"] = nullptr;
            out["break_even"] = nullptr;
            return out;
        }
        const double m = double(index_->tag_count());
        auto k = MeasuredConstants::from_measurements(snap.t_proc_samples, idx_s, inserts, idx_size / double(built),
                                                      look_s, handled, tag_s, tag_n, m);
        CostModelParams p;
        p.n = double(n);
        p.m = m;
        p.w = double(std::max<std::size_t>(mem.active_workspaces, 1));
        p.p = std::clamp(mem.mean_n_filtered > 0 ? mem.mean_n_filtered / double(n) : handled / built / double(n),
                         1.0 / double(n), 1.0);
        p.delta = std::clamp(mem.delta.value_or(1.0), 1.0, p.w);
        p.v = mem.v;
        p.o = mem.o;
        p = k.apply(p);
        out["measured_constants"] = k.to_json();
        out["break_even"] = {{"params", p.to_json()}, {"result", break_even(p).to_json()}};
        return out;
    }

    /// Builds (or refreshes) a corpus-wide baseline index, mainly so the
    /// memory report has a measured global footprint to compare against.
    GlobalBuildReport build_baseline() {
        if (!baseline_)
            baseline_ = std::make_unique<GlobalRag>(*index_, files_, embedder_, generator_, ledger_, clock_,
                                                    GateChain::defaults(), cfg_.workspace.chunker, cfg_.workspace.ann);
        return baseline_->refresh();
    }
    GlobalRag* baseline() noexcept { return baseline_.get(); }

private:
    SparConfig cfg_;
    std::shared_ptr<const Clock> clock_;
    CostLedger ledger_;
    EmbeddingCache cache_;
    OverlayFileSource files_;
    std::unique_ptr<MetadataIndex> index_;
    std::shared_ptr<Embedder> embedder_;
    std::shared_ptr<AnswerGenerator> generator_;
    std::shared_ptr<Embedder> tag_embedder_;
    std::unique_ptr<InterpreterSource> interpreters_;
    std::unique_ptr<WorkspaceManager> workspaces_;
    std::unique_ptr<GlobalRag> baseline_;
};

} // namespace spar
