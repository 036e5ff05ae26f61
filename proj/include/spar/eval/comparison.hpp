// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spar/baseline/global_rag.hpp"
#include "spar/eval/corpus.hpp"
#include "spar/workspace/manager.hpp"

namespace spar {

/// Embedding dims and seeds come from the corpus spec.
struct EvalConfig {
    std::size_t k = 5;
    /// "per_question": one workspace per query, built from its retrieval
    /// prompt. "per_topic": one workspace per topic tag, built from the
    /// topic-only prompt and shared by that topic's queries.
    std::string workspace_mode = "per_question";
    ChunkerConfig chunker;
    AnnParams ann;
    InterpreterConfig interpreter;
    /// Baseline queries run on this many threads; results are reduced in
    /// query order so the report does not depend on it.
    std::size_t parallelism = 1;
    bool per_query_records = false;

    void validate() const {
        if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
        if (workspace_mode != "per_question" && workspace_mode != "per_topic")
            throw Error(ErrorCode::invalid_argument, "workspace_mode must be per_question or per_topic");
        if (parallelism == 0) throw Error(ErrorCode::invalid_argument, "parallelism must be at least 1");
    }

    nlohmann::json to_json() const {
        return {{"k", k},
                {"workspace_mode", workspace_mode},
                {"chunker", {{"window", chunker.window}, {"overlap", chunker.overlap}}},
                {"ann", ann.to_json()},
                {"top_m", interpreter.top_m},
                {"min_sim", interpreter.min_sim},
                {"parallelism", parallelism}};
    }

    static EvalConfig from_json(const nlohmann::json& j) {
        EvalConfig c;
        c.k = j.value("k", c.k);
        c.workspace_mode = j.value("workspace_mode", c.workspace_mode);
        if (j.contains("chunker")) {
            c.chunker.window = j["chunker"].value("window", c.chunker.window);
            c.chunker.overlap = j["chunker"].value("overlap", c.chunker.overlap);
        }
        if (j.contains("ann")) c.ann = AnnParams::from_json(j["ann"]);
        c.interpreter.top_m = j.value("top_m", c.interpreter.top_m);
        c.interpreter.min_sim = j.value("min_sim", c.interpreter.min_sim);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.per_query_records = j.value("per_query_records", c.per_query_records);
        c.validate();
        return c;
    }
};

struct QueryOutcome {
    bool retrieved = false;
    bool answered = false;
    double latency_seconds = 0;
    std::uint64_t distance_evals = 0;
    std::optional<std::string> error;
};

struct SystemMetrics {
    std::size_t queries = 0;
    double retrieval_accuracy = 0;
    double answer_accuracy = 0;
    double mean_latency_seconds = 0;
    double median_latency_seconds = 0;
    double mean_distance_evals = 0;
    std::size_t failures = 0;
    std::uint64_t files_processed = 0;
    std::uint64_t embeddings_computed = 0;
    std::uint64_t build_distance_evals = 0;
    double build_seconds = 0;

    nlohmann::json to_json(bool with_timings = true) const {
        nlohmann::json j{{"queries", queries},
                         {"retrieval_accuracy", retrieval_accuracy},
                         {"answer_accuracy", answer_accuracy},
                         {"mean_distance_evals", mean_distance_evals},
                         {"failures", failures},
                         {"files_processed", files_processed},
                         {"embeddings_computed", embeddings_computed},
                         {"build_distance_evals", build_distance_evals}};
        if (with_timings) {
            j["mean_latency_seconds"] = mean_latency_seconds;
            j["median_latency_seconds"] = median_latency_seconds;
            j["build_seconds"] = build_seconds;
        }
        return j;
    }
};

struct EvalReport {
    nlohmann::json corpus_spec;
    nlohmann::json config;
    std::string corpus_digest;
    std::size_t k = 5;
    std::string workspace_mode;
    std::size_t workspaces_built = 0;
    SystemMetrics baseline;
    SystemMetrics spar;
    std::vector<QueryOutcome> baseline_outcomes;
    std::vector<QueryOutcome> spar_outcomes;
    bool per_query_records = false;

    /// Timings differ run to run; everything else is a function of the seed.
    nlohmann::json to_json(bool with_timings = true) const {
        nlohmann::json j{{"corpus_spec", corpus_spec},
                         {"config", config},
                         {"corpus_digest", corpus_digest},
                         {"k", k},
                         {"workspace_mode", workspace_mode},
                         {"workspaces_built", workspaces_built},
                         {"baseline", baseline.to_json(with_timings)},
                         {"spar", spar.to_json(with_timings)},
                         {"answer_accuracy_definition", "top-1 retrieved chunk contains the planted answer token"},
                         {"retrieval_accuracy_definition",
                          "a chunk of the ground-truth file is among the top-k results"}};
        if (per_query_records) {
            auto rows = [&](const std::vector<QueryOutcome>& v) {
                nlohmann::json a = nlohmann::json::array();
                for (const auto& o : v) {
                    nlohmann::json r{{"retrieved", o.retrieved}, {"answered", o.answered}, {"distance_evals", o.distance_evals}};
                    if (with_timings) r["latency_seconds"] = o.latency_seconds;
                    r["error"] = o.error ? nlohmann::json(*o.error) : nlohmann::json();
                    a.push_back(r);
                }
                return a;
            };
            j["per_query"] = {{"baseline", rows(baseline_outcomes)}, {"spar", rows(spar_outcomes)}};
        }
        return j;
    }
};

namespace detail {

inline SystemMetrics summarize(const std::vector<QueryOutcome>& outs) {
    SystemMetrics m;
    m.queries = outs.size();
    if (outs.empty()) return m;
    std::vector<double> lat;
    double evals = 0;
    for (const auto& o : outs) {
        m.retrieval_accuracy += o.retrieved;
        m.answer_accuracy += o.answered;
        m.failures += o.error.has_value();
        evals += double(o.distance_evals);
        if (!o.error) lat.push_back(o.latency_seconds);
    }
    m.retrieval_accuracy /= double(outs.size());
    m.answer_accuracy /= double(outs.size());
    m.mean_distance_evals = evals / double(outs.size());
    if (!lat.empty()) {
        double s = 0;
        for (double x : lat) s += x;
        m.mean_latency_seconds = s / double(lat.size());
        std::sort(lat.begin(), lat.end());
        m.median_latency_seconds = lat.size() % 2 ? lat[lat.size() / 2]
                                                  : 0.5 * (lat[lat.size() / 2 - 1] + lat[lat.size() / 2]);
    }
    return m;
}

inline QueryOutcome judge(const QueryResult& r, const EvalQuery& q) {
    QueryOutcome o;
    o.latency_seconds = r.latency_seconds();
    o.distance_evals = r.distance_evals;
    o.retrieved = std::any_of(r.hits.begin(), r.hits.end(), [&](const auto& h) { return h.path == q.target_path; });
    o.answered = !r.hits.empty() && r.hits.front().text.find(q.answer_token) != std::string::npos;
    return o;
}

} // namespace detail

/// Runs the baseline and SPAR on the same corpus and questions.
inline EvalReport run_comparison(const SyntheticCorpus& corpus, const EvalConfig& cfg = {}) {
    cfg.validate();
    EvalReport rep;
    rep.corpus_spec = corpus.spec.to_json();
    rep.config = cfg.to_json();
    rep.corpus_digest = corpus.digest();
    rep.k = cfg.k;
    rep.workspace_mode = cfg.workspace_mode;
    rep.per_query_records = cfg.per_query_records;

    MetadataIndex index;
    InMemoryFileSource source;
    corpus.load_into(index, source);
    for (const auto& q : corpus.queries) {
        auto rec = index.find_path(q.target_path);
        const auto& f = corpus.files.at(q.target_file);
        if (!rec || f.path != q.target_path || rec->content_hash != sha256_hex(f.text))
            throw Error(ErrorCode::ground_truth_mismatch,
                        "query " + std::to_string(q.id) + " does not match the loaded corpus");
    }

    auto clock = std::make_shared<ManualClock>(make_date(2024, 6, 1));
    auto corpus_embedder = std::make_shared<StubEmbedder>(corpus.spec.corpus_dim, corpus.spec.corpus_seed);
    auto tag_embedder = std::make_shared<StubEmbedder>(corpus.spec.tag_dim, corpus.spec.tag_seed);
    auto generator = std::make_shared<StubAnswerGenerator>();

    // Baseline: one global index, built before any query.
    {
        CostLedger ledger;
        GlobalRag global(index, source, corpus_embedder, generator, ledger, clock, GateChain::defaults(),
                         cfg.chunker, cfg.ann);
        auto built = global.build();
        rep.baseline_outcomes.resize(corpus.queries.size());
        auto worker = [&](std::size_t from, std::size_t step) {
            // Concurrent queries share the embedder; the stub keeps no state.
            for (std::size_t i = from; i < corpus.queries.size(); i += step) {
                const auto& q = corpus.queries[i];
                rep.baseline_outcomes[i] = detail::judge(global.query(q.question, cfg.k), q);
            }
        };
        if (cfg.parallelism == 1) {
            worker(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < cfg.parallelism; ++t) pool.emplace_back(worker, t, cfg.parallelism);
            for (auto& t : pool) t.join();
        }
        rep.baseline = detail::summarize(rep.baseline_outcomes);
        rep.baseline.files_processed = built.files_processed;
        rep.baseline.embeddings_computed = built.embeddings_computed;
        rep.baseline.build_distance_evals = built.distance_evals;
        rep.baseline.build_seconds = built.wall_seconds;
    }

    // SPAR: workspaces over filtered subsets, sharing one embedding cache.
    {
        CostLedger ledger;
        EmbeddingCache cache;
        cache.attach(index);
        InterpreterConfig icfg = cfg.interpreter;
        InterpreterSource interpreters(index, tag_embedder, icfg, clock);
        WorkspaceConfig wcfg;
        wcfg.chunker = cfg.chunker;
        wcfg.ann = cfg.ann;
        wcfg.default_k = cfg.k;
        WorkspaceManager mgr(index, source, interpreters, corpus_embedder, generator, cache, ledger, clock,
                             GateChain::defaults(), wcfg);
        rep.spar_outcomes.resize(corpus.queries.size());
        double build_seconds = 0;
        std::uint64_t build_evals = 0;

        auto ask = [&](WorkspaceId ws, std::size_t i) {
            const auto& q = corpus.queries[i];
            try {
                rep.spar_outcomes[i] = detail::judge(mgr.query(ws, q.question, cfg.k), q);
            } catch (const Error& e) {
                rep.spar_outcomes[i].error = std::string(code_name(e.code()));
            }
        };
        auto build = [&](const std::string& name, const std::string& prompt) -> std::optional<WorkspaceId> {
            auto ws = mgr.create(name).id;
            ++rep.workspaces_built;
            try {
                auto br = mgr.build_update_dtb(ws, prompt);
                build_seconds += br.wall_seconds;
                build_evals += br.distance_evals;
                return ws;
            } catch (const Error&) {
                mgr.terminate(ws);
                return std::nullopt;
            }
        };

        if (cfg.workspace_mode == "per_question") {
            for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
                const auto& q = corpus.queries[i];
                auto ws = build("q" + std::to_string(q.id), q.retrieval_prompt);
                if (!ws) {
                    rep.spar_outcomes[i].error = "empty_filter";
                    continue;
                }
                ask(*ws, i);
                mgr.terminate(*ws);
            }
        } else {
            std::map<TagId, std::vector<std::size_t>> by_topic;
            for (std::size_t i = 0; i < corpus.queries.size(); ++i) by_topic[corpus.queries[i].topic].push_back(i);
            for (const auto& [topic, qs] : by_topic) {
                auto ws = build("topic" + topic.str(), corpus.queries[qs.front()].topic_prompt);
                for (auto i : qs) {
                    if (!ws) rep.spar_outcomes[i].error = "empty_filter";
                    else ask(*ws, i);
                }
                if (ws) mgr.terminate(*ws);
            }
        }
        rep.spar = detail::summarize(rep.spar_outcomes);
        auto snap = ledger.snapshot();
        rep.spar.files_processed = snap.files_processed;
        rep.spar.embeddings_computed = snap.embeddings_computed;
        rep.spar.build_distance_evals = build_evals;
        rep.spar.build_seconds = build_seconds;
    }
    return rep;
}

} // namespace spar
