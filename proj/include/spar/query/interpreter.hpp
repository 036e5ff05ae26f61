// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "spar/query/prompt_parser.hpp"
#include "spar/query/tag_vocabulary.hpp"

namespace spar {

struct KeywordExplanation {
    std::string keyword;
    TextSpan span;
    std::vector<TagMatch> candidates;
    TagSet selected;
    std::vector<PrunedTag> pruned;
    std::optional<std::string> diagnostic;
};

struct PredicateExplanation {
    TextSpan span;
    std::string source_text;
    MetadataPredicate predicate;
};

struct ExplanationTrace {
    std::vector<KeywordExplanation> keywords;
    std::vector<PredicateExplanation> predicates;
    std::vector<std::vector<TagId>> highlighted_paths;
    std::vector<Diagnostic> diagnostics;
    std::map<TagId, std::string> labels;
    std::size_t top_m = 0;
    double min_sim = 0;
    std::size_t vocabulary_size = 0;

    nlohmann::json to_json() const {
        using nlohmann::json;
        json kws = json::array();
        for (const auto& k : keywords) {
            json cands = json::array();
            for (const auto& c : k.candidates) cands.push_back({{"tag_id", c.tag}, {"similarity", c.similarity}});
            json pruned = json::array();
            for (const auto& p : k.pruned)
                pruned.push_back({{"tag_id", p.tag}, {"retained_ancestor", p.retained_ancestor}});
            kws.push_back({{"keyword", k.keyword},
                           {"span", span_json(k.span)},
                           {"candidates", cands},
                           {"selected", k.selected},
                           {"pruned", pruned},
                           {"diagnostic", k.diagnostic ? json(*k.diagnostic) : json()}});
        }
        json preds = json::array();
        for (const auto& p : predicates)
            preds.push_back({{"span", span_json(p.span)}, {"source_text", p.source_text}, {"predicate", p.predicate.to_json()}});
        json diags = json::array();
        for (const auto& d : diagnostics) diags.push_back(d.to_json());
        json labs = json::object();
        for (const auto& [id, v] : labels) labs[id.str()] = v;
        return {{"keywords", kws},
                {"predicates", preds},
                {"highlighted_paths", highlighted_paths},
                {"diagnostics", diags},
                {"labels", labs},
                {"config", {{"top_m", top_m}, {"min_sim", min_sim}, {"vocabulary_size", vocabulary_size}}}};
    }

    static ExplanationTrace from_json(const nlohmann::json& j) {
        ExplanationTrace t;
        for (const auto& k : j.at("keywords")) {
            KeywordExplanation e;
            e.keyword = k.at("keyword").get<std::string>();
            e.span = span_from_json(k.at("span"));
            for (const auto& c : k.at("candidates"))
                e.candidates.push_back({c.at("tag_id").get<TagId>(), c.at("similarity").get<double>()});
            e.selected = k.at("selected").get<TagSet>();
            for (const auto& p : k.at("pruned"))
                e.pruned.push_back({p.at("tag_id").get<TagId>(), p.at("retained_ancestor").get<TagId>()});
            if (!k.at("diagnostic").is_null()) e.diagnostic = k["diagnostic"].get<std::string>();
            t.keywords.push_back(std::move(e));
        }
        for (const auto& p : j.at("predicates"))
            t.predicates.push_back({span_from_json(p.at("span")), p.at("source_text").get<std::string>(),
                                    MetadataPredicate::from_json(p.at("predicate"))});
        t.highlighted_paths = j.at("highlighted_paths").get<std::vector<std::vector<TagId>>>();
        for (const auto& d : j.at("diagnostics")) t.diagnostics.push_back(Diagnostic::from_json(d));
        for (const auto& [k, v] : j.at("labels").items()) t.labels[TagId(std::stoull(k))] = v.get<std::string>();
        const auto& c = j.at("config");
        t.top_m = c.at("top_m").get<std::size_t>();
        t.min_sim = c.at("min_sim").get<double>();
        t.vocabulary_size = c.at("vocabulary_size").get<std::size_t>();
        return t;
    }
};

/// What a workspace filters by: files must carry a tag from every group
/// (after hierarchy expansion) and satisfy every predicate. Groups are stored
/// pruned, i.e. before expansion.
struct FilterSpec {
    std::vector<TagSet> tag_groups;
    std::vector<MetadataPredicate> predicates;
    ExplanationTrace explanation;
    std::string source_prompt;

    bool empty() const noexcept { return tag_groups.empty() && predicates.empty(); }

    nlohmann::json to_json() const {
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& p : predicates) preds.push_back(p.to_json());
        return {{"source_prompt", source_prompt},
                {"tag_groups", tag_groups},
                {"predicates", preds},
                {"explanation", explanation.to_json()}};
    }

    static FilterSpec from_json(const nlohmann::json& j) {
        FilterSpec f;
        f.source_prompt = j.at("source_prompt").get<std::string>();
        f.tag_groups = j.at("tag_groups").get<std::vector<TagSet>>();
        for (const auto& p : j.at("predicates")) f.predicates.push_back(MetadataPredicate::from_json(p));
        f.explanation = ExplanationTrace::from_json(j.at("explanation"));
        return f;
    }
};

struct InterpreterConfig {
    std::size_t top_m = 5;
    double min_sim = 0.30;
    std::size_t exhaustive_limit = TagVocabularyIndex::kDefaultExhaustiveLimit;
    PromptParserConfig parser;

    void validate() const {
        if (top_m == 0) throw Error(ErrorCode::invalid_argument, "top_m must be at least 1");
        if (min_sim < -1 || min_sim > 1) throw Error(ErrorCode::invalid_argument, "min_sim must lie in [-1, 1]");
    }
};

/// Prompt -> FilterSpec over a fixed hierarchy snapshot. Rebuild when the
/// hierarchy changes; instances are immutable and safe to share.
class QueryInterpreter {
public:
    QueryInterpreter(std::shared_ptr<const TagHierarchy> tags, std::shared_ptr<Embedder> tag_embedder,
                     InterpreterConfig cfg = {}, std::shared_ptr<const Clock> clock = nullptr)
        : tags_(std::move(tags)), embedder_(std::move(tag_embedder)), cfg_(std::move(cfg)),
          parser_(cfg_.parser, std::move(clock)) {
        cfg_.validate();
        vocab_ = std::make_unique<TagVocabularyIndex>(*tags_, *embedder_, cfg_.exhaustive_limit);
    }

    const InterpreterConfig& config() const noexcept { return cfg_; }
    const TagHierarchy& tags() const noexcept { return *tags_; }
    const TagVocabularyIndex& vocabulary() const noexcept { return *vocab_; }
    const PromptParser& parser() const noexcept { return parser_; }

    ParsedPrompt parse(const std::string& text) const { return parser_.parse(text); }

    /// One explanation per keyword; the selected set of each is its pruned
    /// candidate set.
    std::vector<KeywordExplanation> match_keywords(const std::vector<ExtractedKeyword>& keywords,
                                                   CostLedger* ledger = nullptr) const {
        std::vector<KeywordExplanation> out;
        for (const auto& kw : keywords) {
            KeywordExplanation e{kw.text, kw.span, {}, {}, {}, std::nullopt};
            auto q = embedder_->embed(kw.text);
            std::uint64_t evals = 0;
            e.candidates = vocab_->top_m(q.values, cfg_.top_m, cfg_.min_sim, &evals);
            if (ledger) ledger->tag_distance_evals += evals;
            TagSet cands;
            for (const auto& c : e.candidates) cands.insert(c.tag);
            auto pr = tags_->prune(cands);
            e.selected = std::move(pr.kept);
            e.pruned = std::move(pr.pruned);
            if (e.candidates.empty()) e.diagnostic = "no tag reached similarity " + format_sim(cfg_.min_sim);
            out.push_back(std::move(e));
        }
        return out;
    }

    FilterSpec interpret(const std::string& text, CostLedger* ledger = nullptr) const {
        auto parsed = parse(text);
        FilterSpec spec;
        spec.source_prompt = text;
        auto& tr = spec.explanation;
        tr.top_m = cfg_.top_m;
        tr.min_sim = cfg_.min_sim;
        tr.vocabulary_size = vocab_->size();
        tr.diagnostics = parsed.diagnostics;

        tr.keywords = match_keywords(parsed.keywords, ledger);
        TagSet highlighted;
        for (const auto& k : tr.keywords) {
            if (k.diagnostic)
                tr.diagnostics.push_back({"no_matching_tags", "keyword '" + k.keyword + "': " + *k.diagnostic, k.span});
            for (const auto& c : k.candidates) tr.labels[c.tag] = tags_->node(c.tag).value;
            if (k.selected.empty()) continue;
            if (std::find(spec.tag_groups.begin(), spec.tag_groups.end(), k.selected) == spec.tag_groups.end())
                spec.tag_groups.push_back(k.selected);
            highlighted.insert(k.selected.begin(), k.selected.end());
        }
        for (auto t : highlighted) {
            auto path = tags_->path_from_root(t);
            for (auto p : path) tr.labels[p] = tags_->node(p).value;
            tr.highlighted_paths.push_back(std::move(path));
        }
        for (auto& p : parsed.predicates) {
            spec.predicates.push_back(p.predicate);
            tr.predicates.push_back({p.span, p.source_text, std::move(p.predicate)});
        }
        if (spec.empty())
            throw Error(ErrorCode::empty_filter, "prompt yields neither tag groups nor metadata predicates",
                        tr.to_json().dump());
        return spec;
    }

private:
    static std::string format_sim(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    std::shared_ptr<const TagHierarchy> tags_;
    std::shared_ptr<Embedder> embedder_;
    InterpreterConfig cfg_;
    PromptParser parser_;
    std::unique_ptr<TagVocabularyIndex> vocab_;
};

} // namespace spar
