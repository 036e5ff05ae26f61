// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spar/core/file_source.hpp"
#include "spar/core/hash.hpp"
#include "spar/embedding/embedder.hpp"
#include "spar/metadata/metadata_index.hpp"
#include "spar/query/prompt_parser.hpp"

namespace spar {

/// splitmix64 stream. Used instead of <random> distributions so a seed
/// produces the same corpus with every standard library.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() noexcept { return splitmix64(state_++); }
    std::size_t below(std::size_t n) noexcept { return n ? std::size_t(next() % n) : 0; }
    double unit() noexcept { return double(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) noexcept { return unit() < p; }
    template <class T> void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::uint64_t state_;
};

struct SyntheticCorpusSpec {
    std::size_t n_files = 1000;
    std::size_t n_targets = 335;
    std::size_t roots = 5;
    std::size_t branching = 8;
    std::size_t depth = 2;
    /// Probability that a leaf also hangs under a second, different parent.
    double multi_parent_fraction = 0.1;
    std::size_t extra_tags_per_file = 0;
    std::size_t min_words = 80;
    std::size_t max_words = 160;
    std::size_t background_vocabulary = 3000;
    std::size_t topic_vocabulary = 200;
    double topic_word_share = 0.6;
    int year_min = 2012;
    int year_max = 2023;
    std::vector<std::string> formats{"pdf", "docx", "txt", "html"};
    std::vector<std::string> departments{"cardiology", "oncology", "neurology", "radiology", "pediatrics"};
    /// Share of distractors that repeat a target's rare token with a
    /// different answer and metadata that fails the target's predicates.
    double confuser_fraction = 0.6;
    /// Share of confusers that also carry the target's topic tag.
    double confuser_same_topic = 0.7;
    /// Confusers attach only to this leading share of the targets.
    double contested_target_fraction = 0.1;
    /// "round_robin" gives every leaf the same number of files (up to one);
    /// "random" draws leaves uniformly.
    std::string leaf_assignment = "random";
    /// Tag labels are chosen so no two share a stub bucket at this dim and
    /// seed, as long as there are at least as many buckets as tags.
    std::size_t tag_dim = 128;
    std::uint64_t tag_seed = StubEmbedder::kDefaultSeed;
    /// When set, question words, tag labels and rare tokens get corpus
    /// embedder buckets of their own and body vocabulary avoids them, so a
    /// document only overlaps a question where it really shares a token.
    bool reserve_query_buckets = true;
    std::size_t corpus_dim = 512;
    std::uint64_t corpus_seed = StubEmbedder::kDefaultSeed;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_targets > n_files) throw Error(ErrorCode::invalid_argument, "more targets than files");
        if (roots == 0 || branching == 0 || depth == 0)
            throw Error(ErrorCode::invalid_argument, "hierarchy needs roots, branching and depth >= 1");
        if (min_words == 0 || max_words < min_words) throw Error(ErrorCode::invalid_argument, "bad word range");
        if (year_max < year_min + 1) throw Error(ErrorCode::invalid_argument, "need at least two years");
        if (formats.size() < 2 || departments.empty())
            throw Error(ErrorCode::invalid_argument, "need two formats and one department");
        if (!(contested_target_fraction > 0 && contested_target_fraction <= 1))
            throw Error(ErrorCode::invalid_argument, "contested_target_fraction must lie in (0, 1]");
        if (leaf_assignment != "random" && leaf_assignment != "round_robin")
            throw Error(ErrorCode::invalid_argument, "leaf_assignment must be random or round_robin");
    }

    nlohmann::json to_json() const {
        return {{"n_files", n_files},
                {"n_targets", n_targets},
                {"roots", roots},
                {"branching", branching},
                {"depth", depth},
                {"multi_parent_fraction", multi_parent_fraction},
                {"extra_tags_per_file", extra_tags_per_file},
                {"min_words", min_words},
                {"max_words", max_words},
                {"background_vocabulary", background_vocabulary},
                {"topic_vocabulary", topic_vocabulary},
                {"topic_word_share", topic_word_share},
                {"year_min", year_min},
                {"year_max", year_max},
                {"formats", formats},
                {"departments", departments},
                {"confuser_fraction", confuser_fraction},
                {"confuser_same_topic", confuser_same_topic},
                {"contested_target_fraction", contested_target_fraction},
                {"leaf_assignment", leaf_assignment},
                {"tag_dim", tag_dim},
                {"tag_seed", tag_seed},
                {"reserve_query_buckets", reserve_query_buckets},
                {"corpus_dim", corpus_dim},
                {"corpus_seed", corpus_seed},
                {"seed", seed}};
    }

    static SyntheticCorpusSpec from_json(const nlohmann::json& j) {
        SyntheticCorpusSpec s;
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
        };
        get("n_files", s.n_files);
        get("n_targets", s.n_targets);
        get("roots", s.roots);
        get("branching", s.branching);
        get("depth", s.depth);
        get("multi_parent_fraction", s.multi_parent_fraction);
        get("extra_tags_per_file", s.extra_tags_per_file);
        get("min_words", s.min_words);
        get("max_words", s.max_words);
        get("background_vocabulary", s.background_vocabulary);
        get("topic_vocabulary", s.topic_vocabulary);
        get("topic_word_share", s.topic_word_share);
        get("year_min", s.year_min);
        get("year_max", s.year_max);
        get("formats", s.formats);
        get("departments", s.departments);
        get("confuser_fraction", s.confuser_fraction);
        get("confuser_same_topic", s.confuser_same_topic);
        get("contested_target_fraction", s.contested_target_fraction);
        get("leaf_assignment", s.leaf_assignment);
        get("tag_dim", s.tag_dim);
        get("tag_seed", s.tag_seed);
        get("reserve_query_buckets", s.reserve_query_buckets);
        get("corpus_dim", s.corpus_dim);
        get("corpus_seed", s.corpus_seed);
        get("seed", s.seed);
        s.validate();
        return s;
    }
};

enum class FileRole { target, confuser, distractor };

inline std::string_view role_name(FileRole r) {
    switch (r) {
    case FileRole::target: return "target";
    case FileRole::confuser: return "confuser";
    case FileRole::distractor: return "distractor";
    }
    return "?";
}

struct GeneratedFile {
    std::string path;
    std::string text;
    TagSet tags;
    Metadata metadata;
    FileRole role = FileRole::distractor;
    /// Query whose rare token this file carries (targets and confusers).
    std::optional<std::size_t> query;
};

struct EvalQuery {
    std::size_t id = 0;
    std::size_t target_file = 0;
    std::string target_path;
    TagId topic;
    std::string rare_token;
    std::string answer_token;
    /// The question as searched, answer options stripped.
    std::string question;
    /// Retrieval prompt naming the topic and the target's year and format.
    std::string retrieval_prompt;
    /// Topic-only prompt used when workspaces are shared per topic.
    std::string topic_prompt;

    nlohmann::json to_json() const {
        return {{"id", id},
                {"target_path", target_path},
                {"topic", topic},
                {"rare_token", rare_token},
                {"answer_token", answer_token},
                {"question", question},
                {"retrieval_prompt", retrieval_prompt},
                {"topic_prompt", topic_prompt}};
    }
};

struct SyntheticCorpus {
    SyntheticCorpusSpec spec;
    TagHierarchy tags;
    std::vector<GeneratedFile> files;
    std::vector<EvalQuery> queries;
    std::vector<TagId> leaves;
    bool label_buckets_distinct = false;
    /// Whether query-bearing tokens own their corpus buckets (see spec flag;
    /// off when there are too many of them for the dim).
    bool query_buckets_reserved = false;

    /// SHA-256 over every path, text, tag list and metadata value in order.
    std::string digest() const {
        std::string all;
        for (const auto& f : files) {
            all += f.path + '\n' + f.text + '\n';
            for (auto t : f.tags) all += t.str() + ',';
            all += metadata_to_json(f.metadata).dump() + '\n';
        }
        for (const auto& n : tags.nodes()) all += n.value + '\n';
        return sha256_hex(all);
    }

    std::size_t count(FileRole r) const {
        return std::size_t(std::count_if(files.begin(), files.end(), [&](const auto& f) { return f.role == r; }));
    }

    /// Imports the hierarchy into an empty index and adds every file, writing
    /// contents to `source`. Returns the FileId of each generated file.
    std::vector<FileId> load_into(MetadataIndex& index, InMemoryFileSource& source) const {
        if (index.tag_count() != 0 || index.file_count() != 0)
            throw Error(ErrorCode::invalid_argument, "synthetic corpus must be loaded into an empty index");
        index.import_hierarchy(tags);
        std::vector<FileId> ids;
        ids.reserve(files.size());
        for (const auto& f : files) {
            source.put(f.path, f.text);
            ids.push_back(index.add_file({f.path, f.tags, f.metadata, sha256_hex(f.text), make_date(2024, 1, 1)}));
        }
        return ids;
    }
};

namespace detail {

inline std::string pseudo_word(SeededRng& rng, std::size_t syllables) {
    static const char* onset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"};
    static const char* vowel[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += onset[rng.below(std::size(onset))];
        w += vowel[rng.below(std::size(vowel))];
    }
    return w;
}

} // namespace detail

/// Builds a corpus with known ground truth.
///
/// Every target holds one planted sentence "<rare> reading equals <answer>"
/// whose rare token occurs nowhere else except in confusers. A confuser
/// repeats the rare token with another answer and differs from its target in
/// year, so it fails the target's retrieval prompt; plain distractors draw
/// from the same topic and background vocabulary. Questions share only the
/// rare token and the topic label with the corpus.
inline SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec) {
    spec.validate();
    SeededRng rng(spec.seed);
    SyntheticCorpus c;
    c.spec = spec;

    std::set<std::string> used;
    const auto& stop = default_stopwords();
    PromptParserConfig parser_defaults;
    auto fresh_word = [&](std::size_t syllables) {
        for (int attempt = 1;; ++attempt) {
            if (attempt % 256 == 0) ++syllables;
            auto w = detail::pseudo_word(rng, syllables);
            if (used.count(w) || stop.count(w) || parser_defaults.formats.count(w) || w.size() < 4) continue;
            used.insert(w);
            return w;
        }
    };

    // Hierarchy: `roots` trees, `branching` children per node, `depth` levels.
    std::size_t total = 0, level = spec.roots;
    for (std::size_t d = 0; d < spec.depth; ++d, level *= spec.branching) total += level;
    // Question template words and planted filler words are fixed; labels and
    // rare tokens then claim distinct buckets that body words must avoid.
    StubEmbedder corpus_hasher(spec.corpus_dim, spec.corpus_seed);
    std::set<std::size_t> reserved, fixed;
    for (const char* w : {"what", "is", "the", "value", "for"}) reserved.insert(corpus_hasher.bucket(w));
    for (const char* w : {"reading", "equals"}) fixed.insert(corpus_hasher.bucket(w));
    c.query_buckets_reserved = spec.reserve_query_buckets &&
                               reserved.size() + fixed.size() + total + spec.n_targets + 64 <= spec.corpus_dim;
    auto claim = [&](const std::string& w) {
        if (!c.query_buckets_reserved) return true;
        auto b = corpus_hasher.bucket(w);
        if (fixed.count(b) || !reserved.insert(b).second) return false;
        return true;
    };
    auto outside_reserved = [&](const std::string& w) {
        return !c.query_buckets_reserved || !reserved.count(corpus_hasher.bucket(w));
    };
    auto body_word = [&](std::size_t syllables) {
        for (int attempt = 1;; ++attempt) {
            auto w = fresh_word(syllables);
            if (outside_reserved(w)) return w;
            used.erase(w);
            if (attempt % 64 == 0) ++syllables;
        }
    };

    StubEmbedder tag_hasher(spec.tag_dim, spec.tag_seed);
    std::set<std::size_t> buckets;
    c.label_buckets_distinct = total <= spec.tag_dim;
    auto label = [&] {
        for (int attempt = 0;; ++attempt) {
            auto w = fresh_word(3);
            auto tb = tag_hasher.bucket(w);
            if ((!c.label_buckets_distinct || !buckets.count(tb)) && claim(w)) {
                buckets.insert(tb);
                return w;
            }
            used.erase(w);
            if (attempt > 10'000) throw Error(ErrorCode::invalid_argument, "cannot find collision-free tag labels");
        }
    };
    std::vector<TagId> frontier;
    for (std::size_t r = 0; r < spec.roots; ++r) frontier.push_back(c.tags.add_tag(label()));
    for (std::size_t d = 1; d < spec.depth; ++d) {
        std::vector<TagId> next;
        for (auto parent : frontier)
            for (std::size_t b = 0; b < spec.branching; ++b) next.push_back(c.tags.add_tag(label(), {parent}));
        frontier = std::move(next);
    }
    c.leaves = frontier;
    if (spec.depth > 1 && spec.roots > 1) {
        auto roots = c.tags.roots();
        for (auto leaf : c.leaves) {
            if (!rng.chance(spec.multi_parent_fraction)) continue;
            auto own = c.tags.path_from_root(leaf).front();
            TagId other = roots[rng.below(roots.size())];
            if (other == own) other = roots[(std::find(roots.begin(), roots.end(), own) - roots.begin() + 1) % roots.size()];
            c.tags.link(other, leaf);
        }
    }

    std::vector<std::string> rare_tokens;
    for (std::size_t q = 0; q < spec.n_targets; ++q) {
        for (;;) {
            auto w = "zq" + std::to_string(q) + detail::pseudo_word(rng, 2);
            if (claim(w)) {
                rare_tokens.push_back(w);
                break;
            }
        }
    }
    auto answer_word = [&](const std::string& prefix) {
        for (;;) {
            auto w = prefix + detail::pseudo_word(rng, 2);
            if (outside_reserved(w)) return w;
        }
    };

    std::vector<std::string> background;
    for (std::size_t i = 0; i < spec.background_vocabulary; ++i) background.push_back(body_word(2 + rng.below(2)));
    std::map<TagId, std::vector<std::string>> topic_words;
    for (auto leaf : c.leaves) {
        auto& tw = topic_words[leaf];
        for (std::size_t i = 0; i < spec.topic_vocabulary; ++i) tw.push_back(body_word(2 + rng.below(2)));
    }

    auto body = [&](TagId topic, std::size_t words) {
        std::vector<std::string> out;
        const auto& tw = topic_words[topic];
        out.push_back(c.tags.node(topic).value);
        while (out.size() < words) {
            if (rng.chance(spec.topic_word_share)) out.push_back(tw[rng.below(tw.size())]);
            else out.push_back(background[rng.below(background.size())]);
        }
        return out;
    };
    auto words = [&] { return spec.min_words + rng.below(spec.max_words - spec.min_words + 1); };
    auto year = [&] { return spec.year_min + int(rng.below(std::size_t(spec.year_max - spec.year_min + 1))); };
    auto plant = [&](std::vector<std::string>& text, const std::string& rare, const std::string& answer) {
        std::vector<std::string> sentence{rare, "reading", "equals", answer};
        auto at = rng.below(text.size() + 1);
        text.insert(text.begin() + std::ptrdiff_t(at), sentence.begin(), sentence.end());
    };
    auto join = [](const std::vector<std::string>& ws) {
        std::string s;
        for (const auto& w : ws) s += (s.empty() ? "" : " ") + w;
        return s;
    };
    std::size_t leaf_cursor = 0;
    auto pick_leaf = [&] {
        if (spec.leaf_assignment == "round_robin") return c.leaves[leaf_cursor++ % c.leaves.size()];
        // The first |leaves| picks cover every leaf once.
        if (leaf_cursor < c.leaves.size()) return c.leaves[leaf_cursor++];
        return c.leaves[rng.below(c.leaves.size())];
    };
    auto metadata_for = [&](int y, const std::string& fmt) {
        Metadata md;
        md.emplace("year", MetadataValue::integer(y));
        md.emplace("date", MetadataValue::timestamp(make_date(y, unsigned(1 + rng.below(12)), unsigned(1 + rng.below(28)))));
        md.emplace("format", MetadataValue::enumeration(fmt));
        md.emplace("department", MetadataValue::enumeration(spec.departments[rng.below(spec.departments.size())]));
        return md;
    };
    auto extra_tags = [&](TagSet& tags) {
        for (std::size_t i = 0; i < spec.extra_tags_per_file; ++i) tags.insert(c.leaves[rng.below(c.leaves.size())]);
    };

    std::vector<GeneratedFile> files;
    files.reserve(spec.n_files);
    const std::size_t n_distractors = spec.n_files - spec.n_targets;
    // Leaves are drawn for all files first so round-robin assignment is exact.
    std::vector<TagId> leaf_of(spec.n_files);
    for (auto& l : leaf_of) l = pick_leaf();

    for (std::size_t q = 0; q < spec.n_targets; ++q) {
        GeneratedFile f;
        TagId topic = leaf_of[q];
        auto text = body(topic, words());
        EvalQuery eq;
        eq.id = q;
        eq.topic = topic;
        eq.rare_token = rare_tokens[q];
        eq.answer_token = answer_word("ans" + std::to_string(q));
        plant(text, eq.rare_token, eq.answer_token);
        int y = year();
        const auto& fmt = spec.formats[rng.below(spec.formats.size())];
        f.text = join(text);
        f.tags = {topic};
        extra_tags(f.tags);
        f.metadata = metadata_for(y, fmt);
        f.role = FileRole::target;
        f.query = q;
        const auto& lab = c.tags.node(topic).value;
        eq.question = "What is the " + eq.rare_token + " value for " + lab + "?";
        eq.retrieval_prompt = lab + " reports in " + std::to_string(y) + " " + fmt;
        eq.topic_prompt = lab;
        files.push_back(std::move(f));
        c.queries.push_back(std::move(eq));
    }
    for (std::size_t i = 0; i < n_distractors; ++i) {
        GeneratedFile f;
        TagId topic = leaf_of[spec.n_targets + i];
        bool confuser = !c.queries.empty() && rng.chance(spec.confuser_fraction);
        if (confuser) {
            auto contested = std::max<std::size_t>(
                1, std::size_t(std::ceil(spec.contested_target_fraction * double(c.queries.size()))));
            auto q = rng.below(std::min(contested, c.queries.size()));
            const auto& eq = c.queries[q];
            const auto& target = files[q];
            if (rng.chance(spec.confuser_same_topic)) topic = eq.topic;
            auto text = body(topic, words());
            plant(text, eq.rare_token, answer_word("ans" + std::to_string(q) + "x"));
            int ty = int(target.metadata.at("year").as_integer());
            int y = year();
            if (y == ty) y = y == spec.year_max ? spec.year_min : y + 1;
            f.text = join(text);
            f.metadata = metadata_for(y, target.metadata.at("format").as_string());
            f.role = FileRole::confuser;
            f.query = q;
        } else {
            f.text = join(body(topic, words()));
            f.metadata = metadata_for(year(), spec.formats[rng.below(spec.formats.size())]);
        }
        f.tags = {topic};
        extra_tags(f.tags);
        files.push_back(std::move(f));
    }

    // Shuffle so file order says nothing about roles, then name the files.
    std::vector<std::size_t> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> position(files.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) position[order[pos]] = pos;
    c.files.resize(files.size());
    for (std::size_t old = 0; old < files.size(); ++old) {
        auto& f = files[old];
        char name[32];
        std::snprintf(name, sizeof name, "%06zu", position[old]);
        f.path = "corpus/" + f.metadata.at("department").as_string() + "/" + name + "." + f.metadata.at("format").as_string();
        c.files[position[old]] = std::move(f);
    }
    for (auto& q : c.queries) {
        q.target_file = position[q.id];
        q.target_path = c.files[q.target_file].path;
    }

    std::set<TagId> seen;
    for (const auto& f : c.files) seen.insert(f.tags.begin(), f.tags.end());
    if (spec.n_files >= c.leaves.size())
        for (auto leaf : c.leaves)
            if (!seen.count(leaf)) throw std::logic_error("synthetic corpus left a leaf tag unused");
    return c;
}

} // namespace spar
