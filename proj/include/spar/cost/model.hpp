// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "spar/cost/ledger.hpp"
#include "spar/core/error.hpp"

namespace spar {

/// Mean after dropping the lowest and highest `trim` fraction of samples.
inline double trimmed_mean(std::vector<double> xs, double trim = 0.05) {
    if (xs.empty()) return 0;
    std::sort(xs.begin(), xs.end());
    auto cut = static_cast<std::size_t>(std::floor(double(xs.size()) * trim));
    if (2 * cut >= xs.size()) cut = 0;
    double s = 0;
    for (std::size_t i = cut; i < xs.size() - cut; ++i) s += xs[i];
    return s / double(xs.size() - 2 * cut);
}

inline double log2_at_least_one(double n) { return n > 2 ? std::log2(n) : 1.0; }

/// Inputs of the closed-form cost comparison. Times are in seconds; the
/// c_* constants convert the unit-cost terms of the analysis into seconds
/// and are measured alongside t_proc.
struct CostModelParams {
    double n = 0;       ///< corpus size, files
    double m = 0;       ///< tag vocabulary size
    double t_proc = 0;  ///< per-file processing time
    double p = 1;       ///< selectivity N_filtered / N
    double w = 1;       ///< concurrent workspaces
    double q = 1;       ///< queries per workspace
    double v = 0;       ///< vector bytes per file
    double o = 0;       ///< index overhead bytes per file
    double delta = 1;   ///< duplication factor
    double c_index = 1; ///< seconds per insert per log2(index size)
    double c_lookup = 1;///< seconds per admitted file for lookup and gating
    double c_tag = 1;   ///< seconds per tag per log2(M) for tag search

    void validate() const {
        if (!(p > 0 && p <= 1)) throw Error(ErrorCode::invalid_argument, "selectivity p must lie in (0, 1]");
        if (w < 1) throw Error(ErrorCode::invalid_argument, "W must be at least 1");
        if (delta < 1 || delta > w) throw Error(ErrorCode::invalid_argument, "delta must lie in [1, W]");
        for (double x : {n, m, t_proc, q, v, o, c_index, c_lookup, c_tag})
            if (x < 0) throw Error(ErrorCode::invalid_argument, "cost parameters must be non-negative");
    }

    nlohmann::json to_json() const {
        return {{"N", n}, {"M", m}, {"T_proc", t_proc}, {"p", p}, {"W", w}, {"Q", q}, {"v", v}, {"o", o},
                {"delta", delta}, {"c_index", c_index}, {"c_lookup", c_lookup}, {"c_tag", c_tag}};
    }
    static CostModelParams from_json(const nlohmann::json& j) {
        CostModelParams c;
        c.n = j.value("N", c.n);
        c.m = j.value("M", c.m);
        c.t_proc = j.value("T_proc", c.t_proc);
        c.p = j.value("p", c.p);
        c.w = j.value("W", c.w);
        c.q = j.value("Q", c.q);
        c.v = j.value("v", c.v);
        c.o = j.value("o", c.o);
        c.delta = j.value("delta", c.delta);
        c.c_index = j.value("c_index", c.c_index);
        c.c_lookup = j.value("c_lookup", c.c_lookup);
        c.c_tag = j.value("c_tag", c.c_tag);
        return c;
    }
};

struct BreakEvenResult {
    double global_cost = 0;
    double spar_cost = 0;
    /// Empty when the two costs are within the tolerance band of each other.
    std::optional<bool> spar_preferred;
    double rule_of_thumb = 0;
    double tolerance = 0.10;

    nlohmann::json to_json() const {
        nlohmann::json j{{"global_cost", global_cost},
                         {"spar_cost", spar_cost},
                         {"rule_of_thumb_wp", rule_of_thumb},
                         {"tolerance", tolerance}};
        j["spar_preferred"] = spar_preferred ? nlohmann::json(*spar_preferred) : nlohmann::json();
        return j;
    }
};

/// Global prebuild:  N*T_proc + c_index*N*log N
/// Session-based:    c_tag*M*log M + sum over W workspaces of
///                   N_f*(c_lookup + T_proc + c_index*log N_f),  N_f = p*N
inline BreakEvenResult break_even(const CostModelParams& c, double tolerance = 0.10) {
    c.validate();
    BreakEvenResult r;
    r.tolerance = tolerance;
    r.global_cost = c.n * c.t_proc + c.c_index * c.n * log2_at_least_one(c.n);
    const double nf = c.p * c.n;
    r.spar_cost = c.c_tag * c.m * log2_at_least_one(c.m) +
                  c.w * nf * (c.c_lookup + c.t_proc + c.c_index * log2_at_least_one(nf));
    r.rule_of_thumb = c.w * c.p;
    double hi = std::max(r.global_cost, r.spar_cost);
    if (hi > 0 && std::abs(r.global_cost - r.spar_cost) > tolerance * hi) r.spar_preferred = r.spar_cost < r.global_cost;
    return r;
}

/// Constants measured from one or more sessions, converted to the units
/// break_even() expects.
struct MeasuredConstants {
    double t_proc = 0;
    double c_index = 0;
    double c_lookup = 0;
    double c_tag = 0;

    nlohmann::json to_json() const {
        return {{"T_proc", t_proc}, {"c_index", c_index}, {"c_lookup", c_lookup}, {"c_tag", c_tag}};
    }

    /// t_proc from the ledger's samples (trimmed mean); the rest from totals
    /// observed while building: inserts into indexes of the given size,
    /// filtered files handled, and tag searches over a vocabulary of size m.
    static MeasuredConstants from_measurements(const std::vector<double>& t_proc_samples, double indexing_seconds,
                                               double inserts, double index_size, double lookup_seconds,
                                               double files_handled, double tag_seconds, double tag_searches,
                                               double m) {
        MeasuredConstants k;
        k.t_proc = trimmed_mean(t_proc_samples);
        k.c_index = inserts > 0 ? indexing_seconds / (inserts * log2_at_least_one(index_size)) : 0;
        k.c_lookup = files_handled > 0 ? lookup_seconds / files_handled : 0;
        k.c_tag = (tag_searches > 0 && m > 0) ? tag_seconds / (tag_searches * m * log2_at_least_one(m)) : 0;
        return k;
    }

    CostModelParams apply(CostModelParams p) const {
        p.t_proc = t_proc;
        p.c_index = c_index;
        p.c_lookup = c_lookup;
        p.c_tag = c_tag;
        return p;
    }
};

struct MemoryReport {
    double n = 0;
    double v = 0;
    double o = 0;
    double mem_global = 0;
    bool mem_global_measured = false;
    std::size_t active_workspaces = 0;
    std::size_t unique_files = 0;
    std::size_t indexed_file_slots = 0;
    std::optional<double> delta;
    double mean_n_filtered = 0;
    double mem_spar = 0;
    double mem_spar_identity = 0;
    double archive_bytes = 0;
    double win_lhs = 0;
    bool win = false;

    nlohmann::json to_json() const {
        nlohmann::json j{{"N", n},
                         {"v", v},
                         {"o", o},
                         {"mem_global", mem_global},
                         {"mem_global_measured", mem_global_measured},
                         {"W", active_workspaces},
                         {"unique_files", unique_files},
                         {"indexed_file_slots", indexed_file_slots},
                         {"mean_n_filtered", mean_n_filtered},
                         {"mem_spar", mem_spar},
                         {"mem_spar_identity", mem_spar_identity},
                         {"archive_bytes", archive_bytes},
                         {"win_lhs", win_lhs},
                         {"win_rhs", n},
                         {"win", win}};
        j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json();
        return j;
    }
};

/// Memory accounting from the ledger's gauges. v and o are bytes per indexed
/// file, measured from the global index when one exists and from the
/// workspace indexes otherwise. The win flag evaluates delta*W*E[N_f] < N.
inline MemoryReport memory_report(const LedgerSnapshot& s, std::size_t corpus_files) {
    MemoryReport r;
    r.n = double(corpus_files);
    r.archive_bytes = double(s.archive_bytes);
    std::set<FileId> unique;
    double ws_vec = 0, ws_over = 0;
    for (const auto& [_, m] : s.workspace_memory) {
        if (m.indexed_files.empty()) continue;
        ++r.active_workspaces;
        r.indexed_file_slots += m.indexed_files.size();
        unique.insert(m.indexed_files.begin(), m.indexed_files.end());
        ws_vec += double(m.vector_bytes);
        ws_over += double(m.overhead_bytes);
    }
    r.unique_files = unique.size();
    r.mem_spar = ws_vec + ws_over;
    if (r.unique_files > 0) r.delta = double(r.indexed_file_slots) / double(r.unique_files);
    if (r.active_workspaces > 0) r.mean_n_filtered = double(r.indexed_file_slots) / double(r.active_workspaces);

    if (s.global_vector_bytes > 0 && corpus_files > 0) {
        r.v = double(s.global_vector_bytes) / double(corpus_files);
        r.o = double(s.global_overhead_bytes) / double(corpus_files);
        r.mem_global = double(s.global_vector_bytes + s.global_overhead_bytes);
        r.mem_global_measured = true;
    } else if (r.indexed_file_slots > 0) {
        r.v = ws_vec / double(r.indexed_file_slots);
        r.o = ws_over / double(r.indexed_file_slots);
        r.mem_global = r.n * (r.v + r.o);
    }
    if (r.indexed_file_slots > 0) {
        double per_file = (ws_vec + ws_over) / double(r.indexed_file_slots);
        r.mem_spar_identity = r.delta.value_or(0) * double(r.unique_files) * per_file;
    }
    r.win_lhs = r.delta.value_or(1) * double(r.active_workspaces) * r.mean_n_filtered;
    r.win = r.win_lhs < r.n;
    return r;
}

/// The four-term decomposition of one session's build cost.
struct SessionCostReport {
    double tag_lookup_seconds = 0;
    std::uint64_t tag_distance_evals = 0;
    double filtering_seconds = 0;
    std::uint64_t metadata_rows_touched = 0;
    std::uint64_t n_candidates = 0;
    std::uint64_t n_filtered = 0;
    double processing_seconds = 0;
    std::uint64_t files_processed = 0;
    std::uint64_t embeddings_computed = 0;
    double mean_t_proc = 0;
    double indexing_seconds = 0;
    std::uint64_t index_build_distance_evals = 0;
    std::uint64_t index_inserts = 0;
    std::uint64_t queries = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;

    nlohmann::json to_json() const {
        return {{"tag_lookup", {{"seconds", tag_lookup_seconds}, {"distance_evals", tag_distance_evals}}},
                {"filtering",
                 {{"seconds", filtering_seconds},
                  {"rows_touched", metadata_rows_touched},
                  {"n_candidates", n_candidates},
                  {"n_filtered", n_filtered}}},
                {"processing",
                 {{"seconds", processing_seconds},
                  {"files_processed", files_processed},
                  {"embeddings_computed", embeddings_computed},
                  {"mean_t_proc", mean_t_proc},
                  {"cache_hits", cache_hits},
                  {"cache_misses", cache_misses}}},
                {"indexing",
                 {{"seconds", indexing_seconds},
                  {"distance_evals", index_build_distance_evals},
                  {"inserts", index_inserts}}},
                {"queries", queries}};
    }
};

/// Index-build cost spread over the queries served so far (at least one).
struct AmortizedOverhead {
    std::uint64_t queries = 0;
    double distance_evals_per_query = 0;
    double seconds_per_query = 0;

    nlohmann::json to_json() const {
        return {{"queries", queries},
                {"distance_evals_per_query", distance_evals_per_query},
                {"seconds_per_query", seconds_per_query}};
    }
};

inline AmortizedOverhead amortize(std::uint64_t build_distance_evals, double build_seconds, std::uint64_t queries) {
    double q = double(std::max<std::uint64_t>(queries, 1));
    return {queries, double(build_distance_evals) / q, build_seconds / q};
}

} // namespace spar
