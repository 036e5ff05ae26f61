// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <fstream>
#include <memory>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spar/core/clock.hpp"
#include "spar/metadata/predicate.hpp"

namespace spar {

struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

inline nlohmann::json span_json(const TextSpan& s) { return nlohmann::json::array({s.begin, s.end}); }
inline TextSpan span_from_json(const nlohmann::json& j) {
    return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

struct ExtractedKeyword {
    std::string text;
    TextSpan span;
};

struct ExtractedPredicate {
    MetadataPredicate predicate;
    TextSpan span;
    std::string source_text;
};

struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<TextSpan> span;

    nlohmann::json to_json() const {
        nlohmann::json j{{"code", code}, {"message", message}};
        j["span"] = span ? span_json(*span) : nlohmann::json();
        return j;
    }
    static Diagnostic from_json(const nlohmann::json& j) {
        Diagnostic d{j.at("code").get<std::string>(), j.at("message").get<std::string>(), std::nullopt};
        if (!j.at("span").is_null()) d.span = span_from_json(j["span"]);
        return d;
    }
};

struct ParsedPrompt {
    std::vector<ExtractedKeyword> keywords;
    std::vector<ExtractedPredicate> predicates;
    std::vector<Diagnostic> diagnostics;
};

inline const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words{
        "a", "about", "after", "again", "all", "also", "an", "and", "any", "anything", "are", "article",
        "articles", "as", "at", "be", "been", "before", "being", "between", "both", "by", "can", "concerning",
        "could", "did", "do", "document", "documents", "does", "during", "each", "every", "everything",
        "few", "file", "files", "find", "for", "from", "further", "get", "give", "had", "has", "have",
        "here", "how", "i", "in", "into", "is", "it", "its", "just", "list", "many", "may", "me", "might",
        "more", "most", "much", "must", "my", "need", "no", "not", "of", "on", "once", "only", "or",
        "other", "our", "over", "paper", "papers", "per", "please", "record", "records", "regarding",
        "related", "report", "reports", "retrieve", "search", "should", "show", "since", "some",
        "something", "such", "than", "that", "the", "their", "them", "then", "there", "these", "they",
        "this", "those", "through", "to", "under", "until", "up", "very", "via", "want", "was", "we",
        "were", "what", "when", "where", "which", "who", "whom", "whose", "why", "will", "with", "would",
        "you", "your", "written", "published"};
    return words;
}

/// Rule-based extraction of metadata predicates and keyword phrases.
///
/// Recognized metadata forms (case-insensitive), tried in this order, each
/// consuming its span so later forms cannot reuse it:
///   attr:value | attr:"quoted value"
///   from/between YYYY-MM-DD to/and YYYY-MM-DD
///   from/between <Month> YYYY to/and <Month> YYYY
///   from/between YYYY to/and YYYY
///   last/past N years|months|days            (relative to the clock)
///   before/after/since/until YYYY-MM-DD | YYYY
///   YYYY-MM-DD                                (one day)
///   [in|during|from|of] <Month> YYYY          (one month)
///   [in|during|from|of] YYYY                  (one year, 1900-2099)
///   file-format tokens such as pdf, .docx, csv
/// Whatever remains is split at punctuation, numbers, consumed spans and
/// stopwords; each maximal run of remaining words is one keyword.
struct PromptParserConfig {
    std::set<std::string> stopwords = default_stopwords();
    std::set<std::string> formats{"pdf", "doc", "docx", "csv", "json", "txt", "xml", "html", "htm",
                                  "md", "xls", "xlsx", "ppt", "pptx", "png", "jpg", "jpeg", "dicom"};
    bool date_patterns = true;
    std::string year_attribute = "year";
    std::string date_attribute = "date";
    std::string format_attribute = "format";
    MetadataSchema schema = MetadataSchema::defaults();

    void load_stopwords(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::io_error, "cannot read stopword list " + path);
        stopwords.clear();
        std::string w;
        while (in >> w) stopwords.insert(to_lower(w));
    }
};

class PromptParser {
public:
    explicit PromptParser(PromptParserConfig cfg = {}, std::shared_ptr<const Clock> clock = nullptr)
        : cfg_(std::move(cfg)), clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()) {}

    const PromptParserConfig& config() const noexcept { return cfg_; }

    ParsedPrompt parse(const std::string& text) const {
        if (text.find_first_not_of(" \t\r\n") == std::string::npos)
            throw Error(ErrorCode::invalid_argument, "retrieval prompt is empty");
        State st{text, to_lower(text), std::vector<char>(text.size(), 0), {}};

        static const std::string month =
            "(january|february|march|april|may|june|july|august|september|october|november|december|"
            "jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)";
        static const std::string iso = "(\\d{4}-\\d{2}-\\d{2})";
        static const std::string joiner = "\\s*(?:to|and|until|through|-)\\s*";

        scan(st, R"(\b([a-z_][a-z0-9_]*):("[^"]*"|[^\s,;]+))", [&](const std::smatch& m, TextSpan sp) {
            attribute_pair(st, m[1].str(), original(st, m, 2), sp);
        });
        if (cfg_.date_patterns) {
            scan(st, "\\b(?:from|between)\\s+" + iso + joiner + iso + "\\b", [&](const std::smatch& m, TextSpan sp) {
                auto a = parse_iso_timestamp(m[1].str()), b = parse_iso_timestamp(m[2].str());
                if (!a || !b || *b < *a) return unparsable(st, sp);
                add(st, MetadataPredicate::range(cfg_.date_attribute, MetadataValue::timestamp(*a),
                                                 MetadataValue::timestamp(end_of_day(*b))),
                    sp);
            });
            scan(st, "\\b(?:from|between)\\s+" + month + "\\s+(\\d{4})" + joiner + month + "\\s+(\\d{4})\\b",
                 [&](const std::smatch& m, TextSpan sp) {
                     auto lo = month_start(m[1].str(), std::stoi(m[2].str()));
                     auto hi = month_end(m[3].str(), std::stoi(m[4].str()));
                     if (hi < lo) return unparsable(st, sp);
                     add(st, MetadataPredicate::range(cfg_.date_attribute, MetadataValue::timestamp(lo),
                                                      MetadataValue::timestamp(hi)),
                         sp);
                 });
            scan(st, "\\b(?:from|between)\\s+(\\d{4})" + joiner + "(\\d{4})\\b", [&](const std::smatch& m, TextSpan sp) {
                auto lo = std::stoll(m[1].str()), hi = std::stoll(m[2].str());
                if (hi < lo) return unparsable(st, sp);
                add(st, MetadataPredicate::range(cfg_.year_attribute, MetadataValue::integer(lo),
                                                 MetadataValue::integer(hi)),
                    sp);
            });
            scan(st, R"(\b(?:last|past)\s+(\d+)\s+(years?|months?|days?)\b)", [&](const std::smatch& m, TextSpan sp) {
                auto now = clock_->now();
                auto n = std::stoi(m[1].str());
                auto today = std::chrono::floor<std::chrono::days>(now);
                std::chrono::sys_days from;
                if (m[2].str().rfind("day", 0) == 0) {
                    from = today - std::chrono::days(n);
                } else {
                    std::chrono::year_month_day ymd(today);
                    auto shifted = m[2].str().rfind("year", 0) == 0 ? ymd - std::chrono::years(n)
                                                                    : ymd - std::chrono::months(n);
                    from = shifted.ok() ? std::chrono::sys_days(shifted)
                                        : std::chrono::sys_days(shifted.year() / shifted.month() /
                                                                std::chrono::last);
                }
                add(st, MetadataPredicate::range(cfg_.date_attribute, MetadataValue::timestamp(Timestamp(from)),
                                                 MetadataValue::timestamp(now)),
                    sp);
            });
            scan(st, "\\b(before|after|since|until)\\s+" + iso + "\\b", [&](const std::smatch& m, TextSpan sp) {
                auto t = parse_iso_timestamp(m[2].str());
                if (!t) return unparsable(st, sp);
                auto word = m[1].str();
                bool is_before = word == "before" || word == "until";
                add(st,
                    is_before ? MetadataPredicate::before(cfg_.date_attribute, MetadataValue::timestamp(*t))
                              : MetadataPredicate::after(cfg_.date_attribute,
                                                         MetadataValue::timestamp(word == "since" ? *t - std::chrono::seconds(1)
                                                                                                  : end_of_day(*t))),
                    sp);
            });
            scan(st, R"(\b(before|after|since|until)\s+(\d{4})\b)", [&](const std::smatch& m, TextSpan sp) {
                auto y = std::stoll(m[2].str());
                auto word = m[1].str();
                if (word == "before") add(st, MetadataPredicate::before(cfg_.year_attribute, MetadataValue::integer(y)), sp);
                else if (word == "until") add(st, MetadataPredicate::before(cfg_.year_attribute, MetadataValue::integer(y + 1)), sp);
                else if (word == "since") add(st, MetadataPredicate::after(cfg_.year_attribute, MetadataValue::integer(y - 1)), sp);
                else add(st, MetadataPredicate::after(cfg_.year_attribute, MetadataValue::integer(y)), sp);
            });
            scan(st, R"(\b\d{4}-\d{1,2}-\d{1,2}\b)", [&](const std::smatch& m, TextSpan sp) {
                auto t = parse_iso_timestamp(m[0].str());
                if (!t) return unparsable(st, sp);
                add(st, MetadataPredicate::range(cfg_.date_attribute, MetadataValue::timestamp(*t),
                                                 MetadataValue::timestamp(end_of_day(*t))),
                    sp);
            });
            scan(st, "\\b(?:(?:in|during|from|of)\\s+)?" + month + "\\s+(\\d{4})\\b", [&](const std::smatch& m, TextSpan sp) {
                auto y = std::stoi(m[2].str());
                add(st, MetadataPredicate::range(cfg_.date_attribute, MetadataValue::timestamp(month_start(m[1].str(), y)),
                                                 MetadataValue::timestamp(month_end(m[1].str(), y))),
                    sp);
            });
            scan(st, R"(\b(?:(?:in|during|from|of)\s+)?((?:19|20)\d{2})\b)", [&](const std::smatch& m, TextSpan sp) {
                add(st, MetadataPredicate::equals(cfg_.year_attribute, MetadataValue::integer(std::stoll(m[1].str()))), sp);
            });
        }

        std::vector<std::pair<std::string, TextSpan>> formats;
        scan(st, R"(\.?\b([a-z0-9]+)\b)", [&](const std::smatch& m, TextSpan sp) {
            if (!cfg_.formats.count(m[1].str())) return false;
            formats.emplace_back(m[1].str(), sp);
            return true;
        });
        if (formats.size() == 1) {
            add(st, MetadataPredicate(cfg_.format_attribute, PredicateOp::format_is,
                                      {MetadataValue::enumeration(formats[0].first)}),
                formats[0].second);
        } else if (formats.size() > 1) {
            std::vector<MetadataValue> vs;
            for (const auto& [f, _] : formats) vs.push_back(MetadataValue::enumeration(f));
            std::sort(vs.begin(), vs.end());
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            TextSpan sp{formats.front().second.begin, formats.back().second.end};
            if (vs.size() == 1)
                add(st, MetadataPredicate(cfg_.format_attribute, PredicateOp::format_is, vs), sp);
            else
                add(st, MetadataPredicate::in_set(cfg_.format_attribute, vs), sp);
        }

        extract_keywords(st);
        std::stable_sort(st.out.predicates.begin(), st.out.predicates.end(),
                         [](const auto& a, const auto& b) { return a.span.begin < b.span.begin; });
        return std::move(st.out);
    }

private:
    struct State {
        const std::string& text;
        std::string lower;
        std::vector<char> used;
        ParsedPrompt out;
    };

    static std::string original(const State& st, const std::smatch& m, int group) {
        auto s = st.text.substr(std::size_t(m.position(group)), std::size_t(m.length(group)));
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
        return s;
    }

    /// Runs `fn` on every match not overlapping an already-consumed span.
    /// `fn` may return false to leave the span unconsumed.
    template <class Fn> void scan(State& st, const std::string& pattern, Fn&& fn) const {
        std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
        for (auto it = std::sregex_iterator(st.lower.begin(), st.lower.end(), re); it != std::sregex_iterator(); ++it) {
            TextSpan sp{std::size_t(it->position(0)), std::size_t(it->position(0) + it->length(0))};
            if (std::any_of(st.used.begin() + std::ptrdiff_t(sp.begin), st.used.begin() + std::ptrdiff_t(sp.end),
                            [](char c) { return c != 0; }))
                continue;
            bool consume = true;
            if constexpr (std::is_same_v<std::invoke_result_t<Fn, const std::smatch&, TextSpan>, bool>)
                consume = fn(*it, sp);
            else
                fn(*it, sp);
            if (consume) std::fill(st.used.begin() + std::ptrdiff_t(sp.begin), st.used.begin() + std::ptrdiff_t(sp.end), 1);
        }
    }

    void add(State& st, MetadataPredicate p, TextSpan sp) const {
        for (const auto& existing : st.out.predicates)
            if (existing.predicate == p) return;
        st.out.predicates.push_back({std::move(p), sp, st.text.substr(sp.begin, sp.end - sp.begin)});
    }

    void unparsable(State& st, TextSpan sp) const {
        st.out.diagnostics.push_back({std::string(code_name(ErrorCode::unparsable_date)),
                                      "could not interpret date '" + st.text.substr(sp.begin, sp.end - sp.begin) + "'",
                                      sp});
    }

    void attribute_pair(State& st, const std::string& attr, const std::string& raw, TextSpan sp) const {
        try {
            auto type = cfg_.schema.type_of(attr);
            auto value = MetadataValue::from_json(
                type == ValueType::integer ? nlohmann::json(raw) : nlohmann::json(raw), type);
            if (attr == cfg_.format_attribute && type == ValueType::enumeration)
                add(st, MetadataPredicate(attr, PredicateOp::format_is, {value}), sp);
            else
                add(st, MetadataPredicate::equals(attr, value), sp);
        } catch (const Error& e) {
            st.out.diagnostics.push_back({std::string(code_name(e.code())), e.message(), sp});
        }
    }

    static unsigned month_number(const std::string& name) {
        static const char* names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                      "jul", "aug", "sep", "oct", "nov", "dec"};
        for (unsigned i = 0; i < 12; ++i)
            if (name.compare(0, 3, names[i]) == 0) return i + 1;
        return 1;
    }
    static Timestamp month_start(const std::string& name, int year) {
        return make_date(year, month_number(name), 1);
    }
    static Timestamp month_end(const std::string& name, int year) {
        auto last = std::chrono::year(year) / std::chrono::month(month_number(name)) / std::chrono::last;
        return end_of_day(Timestamp(std::chrono::sys_days(last)));
    }
    static Timestamp end_of_day(Timestamp t) {
        return std::chrono::floor<std::chrono::days>(t) + std::chrono::days(1) - std::chrono::seconds(1);
    }

    void extract_keywords(State& st) const {
        auto is_word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '\'' || c == '-'; };
        std::vector<std::pair<std::string, TextSpan>> run;
        std::set<std::string> seen;
        auto flush = [&] {
            if (run.empty()) return;
            std::string phrase;
            for (const auto& [w, _] : run) phrase += (phrase.empty() ? "" : " ") + w;
            if (seen.insert(phrase).second)
                st.out.keywords.push_back({phrase, {run.front().second.begin, run.back().second.end}});
            run.clear();
        };
        std::size_t i = 0;
        const auto& s = st.lower;
        while (i < s.size()) {
            auto c = static_cast<unsigned char>(s[i]);
            if (st.used[i]) {
                flush();
                ++i;
                continue;
            }
            if (std::isspace(c)) {
                ++i;
                continue;
            }
            if (!is_word(c)) {
                flush();
                ++i;
                continue;
            }
            std::size_t b = i;
            while (i < s.size() && !st.used[i] && is_word(static_cast<unsigned char>(s[i]))) ++i;
            std::string w = s.substr(b, i - b);
            while (!w.empty() && (w.back() == '-' || w.back() == '\'')) w.pop_back();
            while (!w.empty() && (w.front() == '-' || w.front() == '\'')) w.erase(w.begin());
            bool numeric = !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char ch) { return std::isdigit(ch); });
            if (w.empty() || numeric || cfg_.stopwords.count(w))
                flush();
            else
                run.emplace_back(w, TextSpan{b, i});
        }
        flush();
    }

    PromptParserConfig cfg_;
    std::shared_ptr<const Clock> clock_;
};

} // namespace spar
