// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded random fixtures and brute-force oracles shared by the unit tests
// and the acceptance runner. The oracles deliberately avoid the code under
// test: closures are computed from a plain adjacency list and predicates are
// evaluated on raw values.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "spar/metadata/metadata_index.hpp"

namespace spar::testing {

/// A random DAG as both a TagHierarchy and an independent adjacency list.
/// Node i (1-based) only gets parents among nodes < i, so the graph is
/// acyclic by construction.
struct RandomDag {
    TagHierarchy tags;
    std::vector<std::vector<std::size_t>> children; // index 0 unused

    std::size_t size() const { return children.size() - 1; }
};

inline RandomDag random_dag(std::mt19937_64& rng, std::size_t n, double extra_parent_p = 0.15,
                            double root_p = 0.1) {
    RandomDag d;
    d.children.resize(n + 1);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 1; i <= n; ++i) {
        TagSet parents;
        if (i > 1 && u(rng) >= root_p) {
            std::uniform_int_distribution<std::size_t> pick(1, i - 1);
            parents.insert(TagId(pick(rng)));
            while (u(rng) < extra_parent_p) parents.insert(TagId(pick(rng)));
        }
        auto id = d.tags.add_tag("t" + std::to_string(i), parents);
        for (auto p : parents) d.children[p.value].push_back(id.value);
    }
    return d;
}

/// S together with everything reachable from S along child edges.
inline std::set<std::size_t> closure_oracle(const RandomDag& d, const std::set<std::size_t>& s) {
    std::set<std::size_t> out;
    std::vector<std::size_t> stack(s.begin(), s.end());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (!out.insert(v).second) continue;
        for (auto c : d.children[v]) stack.push_back(c);
    }
    return out;
}

inline bool reaches_oracle(const RandomDag& d, std::size_t from, std::size_t to) {
    if (from == to) return false;
    std::set<std::size_t> seen;
    std::vector<std::size_t> stack(d.children[from].begin(), d.children[from].end());
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        if (!seen.insert(v).second) continue;
        for (auto c : d.children[v]) stack.push_back(c);
    }
    return false;
}

inline std::set<std::size_t> raw(const TagSet& s) {
    std::set<std::size_t> out;
    for (auto t : s) out.insert(t.value);
    return out;
}

inline TagSet ids(const std::set<std::size_t>& s) {
    TagSet out;
    for (auto v : s) out.insert(TagId(v));
    return out;
}

inline std::set<std::size_t> random_subset(std::mt19937_64& rng, std::size_t n, std::size_t max_size) {
    std::uniform_int_distribution<std::size_t> size(1, std::max<std::size_t>(1, max_size));
    std::uniform_int_distribution<std::size_t> pick(1, n);
    std::set<std::size_t> out;
    auto want = size(rng);
    while (out.size() < std::min(want, n)) out.insert(pick(rng));
    return out;
}

/// n standard-normal vectors of the given dim.
inline std::vector<std::vector<float>> gaussian_vectors(std::uint64_t seed, std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<std::vector<float>> out(n, std::vector<float>(dim));
    for (auto& v : out)
        for (auto& x : v) x = g(rng);
    return out;
}

// ---- Filter oracle ---------------------------------------------------------

/// Raw per-file values the oracle evaluates against.
struct RawFile {
    std::set<std::size_t> tags;
    std::optional<std::int64_t> year;
    std::optional<std::int64_t> date_seconds;
    std::optional<std::string> format;
    std::optional<std::string> department;
};

/// A predicate kept in raw form next to the MetadataPredicate built from it.
struct RawPredicate {
    std::string attribute;
    std::string op; // equals | in | range | before | after
    std::vector<std::int64_t> ints;
    std::vector<std::string> strings;
};

inline bool eval_raw(const RawPredicate& p, const RawFile& f) {
    auto num = [&](const std::optional<std::int64_t>& v) -> bool {
        if (!v) return false;
        if (p.op == "equals") return *v == p.ints[0];
        if (p.op == "in") return std::find(p.ints.begin(), p.ints.end(), *v) != p.ints.end();
        if (p.op == "range") return p.ints[0] <= *v && *v <= p.ints[1];
        if (p.op == "before") return *v < p.ints[0];
        if (p.op == "after") return *v > p.ints[0];
        return false;
    };
    auto str = [&](const std::optional<std::string>& v) -> bool {
        if (!v) return false;
        if (p.op == "equals") return *v == p.strings[0];
        if (p.op == "in") return std::find(p.strings.begin(), p.strings.end(), *v) != p.strings.end();
        return false;
    };
    if (p.attribute == "year") return num(f.year);
    if (p.attribute == "date") return num(f.date_seconds);
    if (p.attribute == "format") return str(f.format);
    if (p.attribute == "department") return str(f.department);
    return false;
}

inline MetadataPredicate to_predicate(const RawPredicate& p) {
    auto value = [&](std::size_t i) {
        if (p.attribute == "year") return MetadataValue::integer(p.ints[i]);
        if (p.attribute == "date") return MetadataValue::timestamp(Timestamp(std::chrono::seconds(p.ints[i])));
        return MetadataValue::enumeration(p.strings[i]);
    };
    std::size_t n = p.ints.empty() ? p.strings.size() : p.ints.size();
    if (p.op == "equals") return MetadataPredicate::equals(p.attribute, value(0));
    if (p.op == "range") return MetadataPredicate::range(p.attribute, value(0), value(1));
    if (p.op == "before") return MetadataPredicate::before(p.attribute, value(0));
    if (p.op == "after") return MetadataPredicate::after(p.attribute, value(0));
    std::vector<MetadataValue> vs;
    for (std::size_t i = 0; i < n; ++i) vs.push_back(value(i));
    return MetadataPredicate::in_set(p.attribute, std::move(vs));
}

struct FilterCase {
    RandomDag dag;
    std::vector<RawFile> files;
    std::vector<std::set<std::size_t>> groups;
    std::vector<RawPredicate> predicates;
};

inline const std::vector<std::string>& oracle_formats() {
    static const std::vector<std::string> v{"pdf", "docx", "txt", "html", "csv"};
    return v;
}
inline const std::vector<std::string>& oracle_departments() {
    static const std::vector<std::string> v{"cardiology", "oncology", "neurology", "radiology"};
    return v;
}

inline RawPredicate random_predicate(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> which(0, 3), op(0, 4), year(2008, 2025), n_in(1, 3);
    std::uniform_int_distribution<std::int64_t> day(0, 4000);
    const std::int64_t base = 1'262'304'000; // 2010-01-01
    RawPredicate p;
    switch (which(rng)) {
    case 0:
    case 1: {
        p.attribute = which(rng) % 2 ? "year" : "date";
        auto draw = [&] { return p.attribute == "year" ? std::int64_t(year(rng)) : base + day(rng) * 86400; };
        static const char* ops[] = {"equals", "in", "range", "before", "after"};
        p.op = ops[op(rng)];
        if (p.op == "range") {
            auto a = draw(), b = draw();
            p.ints = {std::min(a, b), std::max(a, b)};
        } else if (p.op == "in") {
            for (int i = n_in(rng); i > 0; --i) p.ints.push_back(draw());
        } else {
            p.ints = {draw()};
        }
        break;
    }
    default: {
        p.attribute = which(rng) % 2 ? "format" : "department";
        const auto& pool = p.attribute == "format" ? oracle_formats() : oracle_departments();
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        p.op = op(rng) % 2 ? "equals" : "in";
        for (int i = p.op == "equals" ? 1 : n_in(rng); i > 0; --i) p.strings.push_back(pool[pick(rng)]);
    }
    }
    return p;
}

/// Random hierarchy, files with random tags and partially missing metadata,
/// and a random query of up to three groups and three predicates.
inline FilterCase random_filter_case(std::mt19937_64& rng, std::size_t n_files, std::size_t n_tags) {
    FilterCase c;
    c.dag = random_dag(rng, n_tags);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<std::size_t> tag(1, n_tags), n_tag_dist(0, 4), fmt(0, oracle_formats().size() - 1),
        dep(0, oracle_departments().size() - 1);
    std::uniform_int_distribution<int> year(2008, 2025);
    std::uniform_int_distribution<std::int64_t> day(0, 4000);
    for (std::size_t i = 0; i < n_files; ++i) {
        RawFile f;
        for (auto k = n_tag_dist(rng); k > 0; --k) f.tags.insert(tag(rng));
        if (u(rng) < 0.9) f.year = year(rng);
        if (u(rng) < 0.8) f.date_seconds = 1'262'304'000 + day(rng) * 86400;
        if (u(rng) < 0.9) f.format = oracle_formats()[fmt(rng)];
        if (u(rng) < 0.7) f.department = oracle_departments()[dep(rng)];
        c.files.push_back(std::move(f));
    }
    std::uniform_int_distribution<int> n_groups(0, 3), n_preds(0, 3);
    for (int g = n_groups(rng); g > 0; --g) c.groups.push_back(random_subset(rng, n_tags, 3));
    for (int p = n_preds(rng); p > 0; --p) c.predicates.push_back(random_predicate(rng));
    return c;
}

inline void load_case(const FilterCase& c, MetadataIndex& index) {
    index.import_hierarchy(c.dag.tags);
    for (std::size_t i = 0; i < c.files.size(); ++i) {
        const auto& f = c.files[i];
        NewFile nf;
        nf.path = "f" + std::to_string(i) + ".txt";
        nf.tags = ids(f.tags);
        if (f.year) nf.metadata.emplace("year", MetadataValue::integer(*f.year));
        if (f.date_seconds)
            nf.metadata.emplace("date", MetadataValue::timestamp(Timestamp(std::chrono::seconds(*f.date_seconds))));
        if (f.format) nf.metadata.emplace("format", MetadataValue::enumeration(*f.format));
        if (f.department) nf.metadata.emplace("department", MetadataValue::enumeration(*f.department));
        index.add_file(std::move(nf));
    }
}

/// Expected file ids (1-based, in insertion order) by per-file evaluation.
inline std::vector<FileId> brute_force_filter(const FilterCase& c) {
    std::vector<std::set<std::size_t>> expanded;
    for (const auto& g : c.groups) expanded.push_back(closure_oracle(c.dag, g));
    std::vector<FileId> out;
    for (std::size_t i = 0; i < c.files.size(); ++i) {
        const auto& f = c.files[i];
        bool ok = true;
        for (const auto& e : expanded) {
            bool any = false;
            for (auto t : f.tags) any = any || e.count(t);
            ok = ok && any;
        }
        for (const auto& p : c.predicates) ok = ok && eval_raw(p, f);
        if (ok) out.push_back(FileId(i + 1));
    }
    return out;
}

inline std::vector<TagSet> query_groups(const FilterCase& c) {
    std::vector<TagSet> out;
    for (const auto& g : c.groups) out.push_back(ids(g));
    return out;
}

inline std::vector<MetadataPredicate> query_predicates(const FilterCase& c) {
    std::vector<MetadataPredicate> out;
    for (const auto& p : c.predicates) out.push_back(to_predicate(p));
    return out;
}

} // namespace spar::testing
