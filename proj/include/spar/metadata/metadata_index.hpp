// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spar/core/clock.hpp"
#include "spar/core/error.hpp"
#include "spar/core/ids.hpp"
#include "spar/cost/ledger.hpp"
#include "spar/metadata/journal.hpp"
#include "spar/metadata/predicate.hpp"
#include "spar/metadata/tag_hierarchy.hpp"
#include "spar/metadata/value.hpp"

namespace spar {

/// One row of the Files table.
struct FileRecord {
    FileId id;
    std::string path;
    TagSet tags;
    Metadata metadata;
    std::string content_hash;
    Timestamp modified_at{};

    nlohmann::json to_json() const {
        return {{"file_id", id.value},
                {"file_path", path},
                {"tag_ids", tags},
                {"metadata", metadata_to_json(metadata)},
                {"content_hash", content_hash},
                {"modified_at", format_timestamp(modified_at)}};
    }
};

struct NewFile {
    std::string path;
    TagSet tags;
    Metadata metadata;
    std::string content_hash;
    Timestamp modified_at{};
};

/// Emitted when a file's content digest changes. Caches apply these in
/// index_version order.
struct InvalidationEvent {
    FileId file_id;
    std::string old_hash;
    std::string new_hash;
    std::uint64_t index_version = 0;
};

struct GroupTrace {
    TagSet tags;
    std::size_t expanded_tags = 0;
    std::size_t matching_files = 0;
    std::size_t remaining = 0;
};

struct PredicateTrace {
    std::string description;
    bool used_index = false;
    std::size_t remaining = 0;
};

/// Per-stage survivor counts so an empty result can be diagnosed.
struct FilterTrace {
    std::vector<GroupTrace> groups;
    std::vector<PredicateTrace> predicates;
    std::size_t after_tags = 0;
    std::optional<std::string> eliminated_by;

    nlohmann::json to_json() const {
        nlohmann::json gs = nlohmann::json::array();
        for (const auto& g : groups)
            gs.push_back({{"tags", g.tags},
                          {"expanded_tags", g.expanded_tags},
                          {"matching_files", g.matching_files},
                          {"remaining", g.remaining}});
        nlohmann::json ps = nlohmann::json::array();
        for (const auto& p : predicates)
            ps.push_back({{"predicate", p.description},
                          {"used_index", p.used_index},
                          {"remaining", p.remaining}});
        nlohmann::json j{{"groups", gs}, {"predicates", ps}, {"after_tags", after_tags}};
        j["eliminated_by"] = eliminated_by ? nlohmann::json(*eliminated_by) : nlohmann::json();
        return j;
    }
};

struct FilterResult {
    std::vector<FileId> files;
    FilterTrace trace;
    /// Index rows read while answering, including posting-list entries.
    std::uint64_t rows_touched = 0;
    /// Sum of posting-list lengths over every expanded tag of every group.
    std::uint64_t posting_bound = 0;
};

/// The two-table Metadata Index: Files and Tags, with tag posting lists and
/// per-attribute ordered indexes so filtering never scans the whole Files
/// table when a narrower access path exists.
///
/// Readers take a shared lock; mutations take an exclusive lock, are written
/// to the journal (when persistent) before being applied, and bump version().
class MetadataIndex {
public:
    using Listener = std::function<void(const InvalidationEvent&)>;

    explicit MetadataIndex(MetadataSchema schema = MetadataSchema::defaults(),
                           CostLedger* ledger = nullptr)
        : schema_(std::move(schema)), ledger_(ledger) {}

    MetadataIndex(const MetadataIndex&) = delete;
    MetadataIndex& operator=(const MetadataIndex&) = delete;

    /// Opens or creates a journaled index file. The schema stored in an
    /// existing file wins over the one passed in.
    static std::unique_ptr<MetadataIndex> open(const std::filesystem::path& path,
                                               MetadataSchema schema = MetadataSchema::defaults(),
                                               CostLedger* ledger = nullptr, bool sync = false) {
        auto index = std::make_unique<MetadataIndex>(std::move(schema), ledger);
        index->journal_ = std::make_unique<IndexJournal>(path, sync);
        bool saw_schema = false;
        index->journal_->open([&](const nlohmann::json& e) {
            if (e.at("op") == "schema") saw_schema = true;
            index->replay(e);
        });
        if (!saw_schema) index->journal_->append({{"op", "schema"}, {"types", index->schema_.to_json()}});
        return index;
    }

    const MetadataSchema& schema() const noexcept { return schema_; }
    bool persistent() const noexcept { return journal_ != nullptr; }

    std::uint64_t version() const {
        std::shared_lock lock(mu_);
        return version_;
    }

    /// Bumped by every hierarchy mutation only.
    std::uint64_t tag_version() const {
        std::shared_lock lock(mu_);
        return tag_version_;
    }

    // ---- Tags ---------------------------------------------------------------

    TagId add_tag(std::string value, const TagSet& parents = {},
                  TagOrigin origin = TagOrigin::enterprise_defined,
                  std::optional<std::string> external_id = std::nullopt, std::string note = {}) {
        std::unique_lock lock(mu_);
        for (auto p : parents)
            if (!tags_.contains(p)) throw Error(ErrorCode::unknown_tag, "unknown tag id " + p.str());
        if (external_id && tags_.find_external(*external_id))
            throw Error(ErrorCode::duplicate_id, "external id '" + *external_id + "' already present");
        nlohmann::json e{{"op", "add_tag"},
                         {"value", value},
                         {"parents", parents},
                         {"origin", std::string(origin_name(origin))},
                         {"note", note}};
        if (external_id) e["external_id"] = *external_id;
        log(e);
        auto id = tags_.add_tag(std::move(value), parents, origin, std::move(external_id), std::move(note));
        ++version_;
        ++tag_version_;
        return id;
    }

    void link_parent_child(TagId parent, TagId child) {
        std::unique_lock lock(mu_);
        if (!tags_.contains(parent) || !tags_.contains(child))
            throw Error(ErrorCode::unknown_tag, "unknown tag in link " + parent.str() + " -> " + child.str());
        if (parent == child || tags_.is_ancestor(child, parent))
            throw Error(ErrorCode::cycle_detected,
                        "linking " + parent.str() + " -> " + child.str() + " would create a cycle");
        log({{"op", "link"}, {"parent", parent}, {"child", child}});
        tags_.link(parent, child);
        ++version_;
        ++tag_version_;
    }

    /// Appends every tag of `h` (ids shift by the current tag count) and
    /// returns the id offset applied.
    std::uint64_t import_hierarchy(const TagHierarchy& h) {
        std::unique_lock lock(mu_);
        const std::uint64_t offset = tags_.size();
        for (const auto& n : h.nodes())
            if (n.external_id && tags_.find_external(*n.external_id))
                throw Error(ErrorCode::duplicate_id, "external id '" + *n.external_id + "' already present");
        for (const auto& n : h.nodes()) {
            nlohmann::json e{{"op", "add_tag"},
                             {"value", n.value},
                             {"parents", nlohmann::json::array()},
                             {"origin", std::string(origin_name(n.origin))},
                             {"note", n.note},
                             {"tree_numbers", n.tree_numbers}};
            if (n.external_id) e["external_id"] = *n.external_id;
            log(e);
            auto id = tags_.add_tag(n.value, {}, n.origin, n.external_id, n.note);
            for (const auto& tn : n.tree_numbers) tags_.add_tree_number(id, tn);
        }
        for (const auto& n : h.nodes())
            for (auto c : n.children) {
                TagId p(n.id.value + offset), ch(c.value + offset);
                log({{"op", "link"}, {"parent", p}, {"child", ch}});
                tags_.link(p, ch);
            }
        ++version_;
        ++tag_version_;
        return offset;
    }

    TagHierarchy tag_snapshot() const {
        std::shared_lock lock(mu_);
        return tags_;
    }

    std::pair<TagHierarchy, std::uint64_t> versioned_tag_snapshot() const {
        std::shared_lock lock(mu_);
        return {tags_, tag_version_};
    }

    /// Runs `fn(const TagHierarchy&)` under the reader lock.
    template <class Fn> decltype(auto) with_tags(Fn&& fn) const {
        std::shared_lock lock(mu_);
        return std::forward<Fn>(fn)(tags_);
    }

    std::size_t tag_count() const {
        std::shared_lock lock(mu_);
        return tags_.size();
    }

    TagSet expand_tags(const TagSet& tags) const {
        std::shared_lock lock(mu_);
        return tags_.expand(tags);
    }

    TagSet prune_redundant(const TagSet& tags) const {
        std::shared_lock lock(mu_);
        return tags_.prune_redundant(tags);
    }

    // ---- Files --------------------------------------------------------------

    FileId add_file(NewFile f) {
        std::unique_lock lock(mu_);
        if (f.path.empty()) throw Error(ErrorCode::invalid_argument, "file path is empty");
        if (by_path_.count(f.path))
            throw Error(ErrorCode::duplicate_path, "path '" + f.path + "' already indexed");
        for (auto t : f.tags)
            if (!tags_.contains(t)) throw Error(ErrorCode::unknown_tag, "unknown tag id " + t.str());
        for (const auto& [attr, value] : f.metadata)
            if (schema_.type_of(attr) != value.type())
                throw Error(ErrorCode::type_mismatch, "attribute '" + attr + "' expects " +
                                                          std::string(type_name(schema_.type_of(attr))));
        log({{"op", "add_file"},
             {"path", f.path},
             {"tags", f.tags},
             {"metadata", metadata_to_json(f.metadata)},
             {"content_hash", f.content_hash},
             {"modified_at", f.modified_at.time_since_epoch().count()}});
        return apply_add_file(std::move(f));
    }

    /// Records a new content digest (and optionally new metadata). A changed
    /// digest emits exactly one InvalidationEvent; an identical digest emits
    /// none.
    FileRecord update_file(FileId id, const std::string& new_digest,
                           std::optional<Metadata> new_metadata = std::nullopt,
                           std::optional<Timestamp> modified_at = std::nullopt) {
        std::unique_lock lock(mu_);
        require_file(id);
        if (new_metadata)
            for (const auto& [attr, value] : *new_metadata)
                if (schema_.type_of(attr) != value.type())
                    throw Error(ErrorCode::type_mismatch, "attribute '" + attr + "' expects " +
                                                              std::string(type_name(schema_.type_of(attr))));
        nlohmann::json e{{"op", "update_file"}, {"file_id", id}, {"content_hash", new_digest}};
        if (new_metadata) e["metadata"] = metadata_to_json(*new_metadata);
        if (modified_at) e["modified_at"] = modified_at->time_since_epoch().count();
        log(e);
        auto event = apply_update(id, new_digest, std::move(new_metadata), modified_at);
        if (event)
            for (const auto& [_, fn] : listeners_) fn(*event);
        return files_[id.value - 1];
    }

    std::optional<FileRecord> file(FileId id) const {
        std::shared_lock lock(mu_);
        if (id.value < 1 || id.value > files_.size()) return std::nullopt;
        return files_[id.value - 1];
    }

    std::optional<FileRecord> find_path(const std::string& path) const {
        std::shared_lock lock(mu_);
        auto it = by_path_.find(path);
        if (it == by_path_.end()) return std::nullopt;
        return files_[it->second.value - 1];
    }

    std::vector<FileRecord> files(std::size_t offset = 0,
                                  std::size_t limit = std::numeric_limits<std::size_t>::max()) const {
        std::shared_lock lock(mu_);
        std::vector<FileRecord> out;
        for (std::size_t i = offset; i < files_.size() && out.size() < limit; ++i) out.push_back(files_[i]);
        return out;
    }

    std::size_t file_count() const {
        std::shared_lock lock(mu_);
        return files_.size();
    }

    std::size_t posting_size(TagId tag) const {
        std::shared_lock lock(mu_);
        auto it = postings_.find(tag);
        return it == postings_.end() ? 0 : it->second.size();
    }

    int subscribe(Listener fn) {
        std::unique_lock lock(mu_);
        listeners_.emplace(next_listener_, std::move(fn));
        return next_listener_++;
    }
    void unsubscribe(int handle) {
        std::unique_lock lock(mu_);
        listeners_.erase(handle);
    }

    // ---- Filtering ----------------------------------------------------------

    /// A file passes iff, for every group, it carries at least one tag of the
    /// group's hierarchical expansion, and it satisfies every predicate.
    /// Output is sorted by file id.
    FilterResult filter_files(const std::vector<TagSet>& groups,
                              const std::vector<MetadataPredicate>& predicates) const {
        std::shared_lock lock(mu_);
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].empty())
                throw Error(ErrorCode::empty_group, "tag group " + std::to_string(i) + " is empty");
            for (auto t : groups[i])
                if (!tags_.contains(t)) throw Error(ErrorCode::unknown_tag, "unknown tag id " + t.str());
        }
        for (const auto& p : predicates) p.validate(schema_);

        FilterResult r;
        std::vector<FileId> current;
        std::size_t first_unapplied = 0;

        if (!groups.empty()) {
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                auto expanded = tags_.expand(groups[gi]);
                std::vector<FileId> matches;
                for (auto t : expanded) {
                    auto it = postings_.find(t);
                    if (it == postings_.end()) continue;
                    matches.insert(matches.end(), it->second.begin(), it->second.end());
                    r.rows_touched += it->second.size();
                    r.posting_bound += it->second.size();
                }
                std::sort(matches.begin(), matches.end());
                matches.erase(std::unique(matches.begin(), matches.end()), matches.end());
                if (gi == 0) {
                    current = matches;
                } else {
                    std::vector<FileId> both;
                    std::set_intersection(current.begin(), current.end(), matches.begin(), matches.end(),
                                          std::back_inserter(both));
                    current.swap(both);
                }
                r.trace.groups.push_back({groups[gi], expanded.size(), matches.size(), current.size()});
                if (current.empty() && !r.trace.eliminated_by)
                    r.trace.eliminated_by = "tag group " + std::to_string(gi);
            }
        } else if (!predicates.empty()) {
            current = index_lookup(predicates.front());
            r.rows_touched += current.size();
            r.trace.predicates.push_back({predicates.front().describe(), true, current.size()});
            if (current.empty()) r.trace.eliminated_by = predicates.front().describe();
            first_unapplied = 1;
        } else {
            current.reserve(files_.size());
            for (const auto& f : files_) current.push_back(f.id);
            r.rows_touched += files_.size();
        }
        r.trace.after_tags = groups.empty() ? files_.size() : current.size();

        for (std::size_t pi = first_unapplied; pi < predicates.size(); ++pi) {
            const auto& p = predicates[pi];
            r.rows_touched += current.size();
            std::erase_if(current, [&](FileId id) { return !p.matches(files_[id.value - 1].metadata); });
            r.trace.predicates.push_back({p.describe(), false, current.size()});
            if (current.empty() && !r.trace.eliminated_by) r.trace.eliminated_by = p.describe();
        }

        if (ledger_) ledger_->metadata_rows_touched += r.rows_touched;
        r.files = std::move(current);
        return r;
    }

    /// Rewrites the journal as the minimal sequence reproducing current state.
    void compact() {
        std::unique_lock lock(mu_);
        if (!journal_) return;
        std::vector<nlohmann::json> entries;
        entries.push_back({{"op", "schema"}, {"types", schema_.to_json()}});
        for (const auto& n : tags_.nodes()) {
            nlohmann::json e{{"op", "add_tag"},
                             {"value", n.value},
                             {"parents", nlohmann::json::array()},
                             {"origin", std::string(origin_name(n.origin))},
                             {"note", n.note},
                             {"tree_numbers", n.tree_numbers}};
            if (n.external_id) e["external_id"] = *n.external_id;
            entries.push_back(std::move(e));
        }
        for (const auto& n : tags_.nodes())
            for (auto c : n.children) entries.push_back({{"op", "link"}, {"parent", n.id}, {"child", c}});
        for (const auto& f : files_)
            entries.push_back({{"op", "add_file"},
                               {"path", f.path},
                               {"tags", f.tags},
                               {"metadata", metadata_to_json(f.metadata)},
                               {"content_hash", f.content_hash},
                               {"modified_at", f.modified_at.time_since_epoch().count()}});
        journal_->rewrite(entries);
    }

private:
    void log(const nlohmann::json& e) {
        if (journal_ && !replaying_) journal_->append(e);
    }

    void require_file(FileId id) const {
        if (id.value < 1 || id.value > files_.size())
            throw Error(ErrorCode::unknown_file, "unknown file id " + id.str());
    }

    FileId apply_add_file(NewFile f) {
        FileRecord rec;
        rec.id = FileId(files_.size() + 1);
        rec.path = std::move(f.path);
        rec.tags = std::move(f.tags);
        rec.metadata = std::move(f.metadata);
        rec.content_hash = std::move(f.content_hash);
        rec.modified_at = f.modified_at;
        for (auto t : rec.tags) postings_[t].push_back(rec.id);
        for (const auto& [attr, value] : rec.metadata) attribute_index_[attr].emplace(value, rec.id);
        by_path_.emplace(rec.path, rec.id);
        files_.push_back(std::move(rec));
        ++version_;
        return files_.back().id;
    }

    std::optional<InvalidationEvent> apply_update(FileId id, const std::string& digest,
                                                  std::optional<Metadata> metadata,
                                                  std::optional<Timestamp> modified_at) {
        auto& rec = files_[id.value - 1];
        ++version_;
        if (metadata) {
            for (const auto& [attr, value] : rec.metadata) attribute_index_[attr].erase({value, id});
            rec.metadata = std::move(*metadata);
            for (const auto& [attr, value] : rec.metadata) attribute_index_[attr].emplace(value, id);
        }
        if (modified_at) rec.modified_at = *modified_at;
        if (rec.content_hash == digest) return std::nullopt;
        InvalidationEvent ev{id, rec.content_hash, digest, version_};
        rec.content_hash = digest;
        return ev;
    }

    std::vector<FileId> index_lookup(const MetadataPredicate& p) const {
        std::vector<FileId> out;
        auto it = attribute_index_.find(p.attribute());
        if (it == attribute_index_.end()) return out;
        const auto& idx = it->second;
        constexpr FileId lo_id{0};
        constexpr FileId hi_id{std::numeric_limits<std::uint64_t>::max()};
        auto take = [&](auto first, auto last) {
            for (; first != last; ++first)
                if (p.matches(first->first)) out.push_back(first->second);
        };
        const auto& ops = p.operands();
        switch (p.op()) {
        case PredicateOp::equals:
        case PredicateOp::format_is:
        case PredicateOp::in_set:
            for (const auto& v : ops) take(idx.lower_bound({v, lo_id}), idx.upper_bound({v, hi_id}));
            break;
        case PredicateOp::range_inclusive:
            take(idx.lower_bound({ops[0], lo_id}), idx.upper_bound({ops[1], hi_id}));
            break;
        case PredicateOp::before: take(idx.begin(), idx.lower_bound({ops[0], lo_id})); break;
        case PredicateOp::after: take(idx.upper_bound({ops[0], hi_id}), idx.end()); break;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    void replay(const nlohmann::json& e) {
        replaying_ = true;
        struct Reset {
            bool& flag;
            ~Reset() { flag = false; }
        } reset{replaying_};
        const auto op = e.at("op").get<std::string>();
        if (op == "schema") {
            schema_ = MetadataSchema::from_json(e.at("types"));
        } else if (op == "add_tag") {
            std::optional<std::string> ext;
            if (e.contains("external_id")) ext = e["external_id"].get<std::string>();
            auto id = tags_.add_tag(e.at("value").get<std::string>(), e.at("parents").get<TagSet>(),
                                    parse_origin(e.at("origin").get<std::string>()), ext,
                                    e.value("note", std::string{}));
            if (e.contains("tree_numbers"))
                for (const auto& tn : e["tree_numbers"]) tags_.add_tree_number(id, tn.get<std::string>());
            ++version_;
            ++tag_version_;
        } else if (op == "link") {
            tags_.link(e.at("parent").get<TagId>(), e.at("child").get<TagId>());
            ++version_;
            ++tag_version_;
        } else if (op == "add_file") {
            NewFile f;
            f.path = e.at("path").get<std::string>();
            f.tags = e.at("tags").get<TagSet>();
            f.metadata = schema_.parse(e.at("metadata"));
            f.content_hash = e.at("content_hash").get<std::string>();
            f.modified_at = Timestamp(std::chrono::seconds(e.at("modified_at").get<std::int64_t>()));
            apply_add_file(std::move(f));
        } else if (op == "update_file") {
            std::optional<Metadata> md;
            if (e.contains("metadata")) md = schema_.parse(e["metadata"]);
            std::optional<Timestamp> at;
            if (e.contains("modified_at"))
                at = Timestamp(std::chrono::seconds(e["modified_at"].get<std::int64_t>()));
            apply_update(e.at("file_id").get<FileId>(), e.at("content_hash").get<std::string>(),
                         std::move(md), at);
        } else {
            throw Error(ErrorCode::corrupt_index, "unknown journal op '" + op + "'");
        }
    }

    mutable std::shared_mutex mu_;
    MetadataSchema schema_;
    CostLedger* ledger_;
    std::unique_ptr<IndexJournal> journal_;
    bool replaying_ = false;
    std::uint64_t version_ = 0;
    std::uint64_t tag_version_ = 0;

    TagHierarchy tags_;
    std::vector<FileRecord> files_;
    std::unordered_map<std::string, FileId> by_path_;
    std::unordered_map<TagId, std::vector<FileId>> postings_;
    std::map<std::string, std::set<std::pair<MetadataValue, FileId>>> attribute_index_;
    std::map<int, Listener> listeners_;
    int next_listener_ = 0;
};

} // namespace spar
