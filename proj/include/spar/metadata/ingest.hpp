// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spar/core/clock.hpp"
#include "spar/core/file_source.hpp"
#include "spar/core/hash.hpp"
#include "spar/metadata/metadata_index.hpp"
#include "spar/text/tokenize.hpp"

namespace spar {

/// Pluggable tag assignment for newly ingested files. The index only counts
/// invocations; what a tagger costs is its own business.
class AutoTagger {
public:
    virtual ~AutoTagger() = default;
    virtual TagSet assign(const std::string& path, const Metadata& metadata, std::string_view text,
                          const TagHierarchy& tags) = 0;
};

/// Assigns every leaf tag whose label tokens all occur in the file text.
class KeywordAutoTagger final : public AutoTagger {
public:
    TagSet assign(const std::string&, const Metadata&, std::string_view text,
                  const TagHierarchy& tags) override {
        auto words = tokenize(text);
        std::set<std::string> vocab(words.begin(), words.end());
        TagSet out;
        for (const auto& n : tags.nodes()) {
            if (!n.is_leaf()) continue;
            auto label = tokenize(n.value);
            if (label.empty()) continue;
            bool all = std::all_of(label.begin(), label.end(),
                                   [&](const std::string& w) { return vocab.count(w) > 0; });
            if (all) out.insert(n.id);
        }
        return out;
    }
};

struct IngestError {
    std::size_t line = 0;
    std::string message;
};

struct IngestReport {
    std::vector<FileId> added;
    std::vector<IngestError> errors;

    nlohmann::json to_json() const {
        nlohmann::json errs = nlohmann::json::array();
        for (const auto& e : errors) errs.push_back({{"line", e.line}, {"message", e.message}});
        return {{"added", added.size()}, {"file_ids", added}, {"errors", errs}};
    }
};

/// Resolves a tag reference from ingestion input: integers are tag ids,
/// strings are external ids first and labels second.
inline TagId resolve_tag_ref(const nlohmann::json& ref, const TagHierarchy& tags) {
    if (ref.is_number_unsigned() || ref.is_number_integer()) {
        TagId id(ref.get<std::uint64_t>());
        if (!tags.contains(id)) throw Error(ErrorCode::unknown_tag, "unknown tag id " + id.str());
        return id;
    }
    if (ref.is_string()) {
        const auto& s = ref.get_ref<const std::string&>();
        if (auto id = tags.find_external(s)) return *id;
        if (auto id = tags.find_value(s)) return *id;
        throw Error(ErrorCode::unknown_tag, "unknown tag '" + s + "'");
    }
    throw Error(ErrorCode::invalid_argument, "tag reference must be an id or a string");
}

/// Adds one file described by a bulk-ingestion object
/// {path, metadata, tags?, content_hash?}. Without explicit tags the tagger
/// (if any) is consulted once.
inline FileId ingest_one(MetadataIndex& index, const nlohmann::json& obj, const FileSource* source,
                         AutoTagger* tagger, const Clock& clock, CostLedger* ledger = nullptr) {
    if (!obj.is_object() || !obj.contains("path") || !obj["path"].is_string())
        throw Error(ErrorCode::invalid_argument, "ingestion record needs a string 'path'");
    NewFile f;
    f.path = obj["path"].get<std::string>();
    f.metadata = index.schema().parse(obj.value("metadata", nlohmann::json::object()));
    f.modified_at = clock.now();

    std::optional<std::string> bytes;
    if (source) bytes = source->read(f.path);
    if (obj.contains("content_hash"))
        f.content_hash = obj["content_hash"].get<std::string>();
    else if (bytes)
        f.content_hash = sha256_hex(*bytes);

    if (obj.contains("tags")) {
        index.with_tags([&](const TagHierarchy& tags) {
            for (const auto& ref : obj["tags"]) f.tags.insert(resolve_tag_ref(ref, tags));
        });
    } else if (tagger) {
        if (ledger) ++ledger->tag_assign_calls;
        auto text = bytes.value_or(std::string{});
        f.tags = index.with_tags(
            [&](const TagHierarchy& tags) { return tagger->assign(f.path, f.metadata, text, tags); });
    }
    return index.add_file(std::move(f));
}

/// Reads one JSON object per line. Bad lines are reported and skipped.
inline IngestReport ingest_jsonl(MetadataIndex& index, std::istream& in, const FileSource* source,
                                 AutoTagger* tagger, const Clock& clock, CostLedger* ledger = nullptr) {
    IngestReport report;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            report.added.push_back(
                ingest_one(index, nlohmann::json::parse(line), source, tagger, clock, ledger));
        } catch (const Error& e) {
            report.errors.push_back({n, e.what()});
        } catch (const nlohmann::json::exception& e) {
            report.errors.push_back({n, e.what()});
        }
    }
    return report;
}

} // namespace spar
