// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spar/core/error.hpp"
#include "spar/core/ids.hpp"
#include "spar/metadata/value.hpp"

namespace spar {

enum class TagOrigin { enterprise_defined, auto_induced };

inline std::string_view origin_name(TagOrigin o) {
    return o == TagOrigin::enterprise_defined ? "enterprise_defined" : "auto_induced";
}

inline TagOrigin parse_origin(std::string_view s) {
    return s == "auto_induced" ? TagOrigin::auto_induced : TagOrigin::enterprise_defined;
}

/// One row of the Tags table.
struct TagNode {
    TagId id;
    std::string value;
    TagSet parents;
    TagSet children;
    std::vector<std::string> tree_numbers;
    TagOrigin origin = TagOrigin::enterprise_defined;
    std::optional<std::string> external_id;
    std::string note;

    bool is_root() const noexcept { return parents.empty(); }
    bool is_leaf() const noexcept { return children.empty(); }
};

/// A tag pruned because an ancestor in the same selection already covers it.
struct PrunedTag {
    TagId tag;
    TagId retained_ancestor;
    friend bool operator==(const PrunedTag&, const PrunedTag&) = default;
};

struct PruneOutcome {
    TagSet kept;
    std::vector<PrunedTag> pruned;
};

/// Tag DAG with symmetric parent/child links. Ids are dense and start at 1.
/// Every mutation keeps the graph acyclic; link() refuses edges that would
/// close a cycle.
class TagHierarchy {
public:
    TagId add_tag(std::string value, const TagSet& parents = {},
                  TagOrigin origin = TagOrigin::enterprise_defined,
                  std::optional<std::string> external_id = std::nullopt, std::string note = {}) {
        for (auto p : parents) require(p);
        if (external_id && by_external_.count(*external_id))
            throw Error(ErrorCode::duplicate_id, "external id '" + *external_id + "' already present");
        TagNode node;
        node.id = TagId(nodes_.size() + 1);
        node.value = std::move(value);
        node.origin = origin;
        node.external_id = std::move(external_id);
        node.note = std::move(note);
        if (node.external_id) by_external_.emplace(*node.external_id, node.id);
        nodes_.push_back(std::move(node));
        auto id = nodes_.back().id;
        for (auto p : parents) link(p, id);
        return id;
    }

    void link(TagId parent, TagId child) {
        require(parent);
        require(child);
        if (parent == child || reaches(child, parent))
            throw Error(ErrorCode::cycle_detected,
                        "linking " + parent.str() + " -> " + child.str() + " would create a cycle");
        at(parent).children.insert(child);
        at(child).parents.insert(parent);
    }

    void add_tree_number(TagId id, std::string tree_number) {
        at(id).tree_numbers.push_back(std::move(tree_number));
    }

    bool contains(TagId id) const noexcept { return id.value >= 1 && id.value <= nodes_.size(); }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    const TagNode& node(TagId id) const {
        require(id);
        return nodes_[id.value - 1];
    }
    const std::vector<TagNode>& nodes() const noexcept { return nodes_; }

    std::optional<TagId> find_external(const std::string& external_id) const {
        auto it = by_external_.find(external_id);
        if (it == by_external_.end()) return std::nullopt;
        return it->second;
    }

    /// Case-insensitive lookup by label; lowest id wins on duplicates.
    std::optional<TagId> find_value(std::string_view value) const {
        auto needle = to_lower(value);
        for (const auto& n : nodes_)
            if (to_lower(n.value) == needle) return n.id;
        return std::nullopt;
    }

    std::vector<TagId> roots() const {
        std::vector<TagId> out;
        for (const auto& n : nodes_)
            if (n.is_root()) out.push_back(n.id);
        return out;
    }

    /// Strict descendants (the tag itself is excluded).
    TagSet descendants(TagId id) const { return closure(id, &TagNode::children); }
    TagSet ancestors(TagId id) const { return closure(id, &TagNode::parents); }

    bool is_ancestor(TagId ancestor, TagId descendant) const {
        require(ancestor);
        require(descendant);
        return ancestor != descendant && reaches(ancestor, descendant);
    }

    TagSet expand(const TagSet& tags) const {
        TagSet out;
        std::deque<TagId> queue;
        for (auto t : tags) {
            require(t);
            if (out.insert(t).second) queue.push_back(t);
        }
        while (!queue.empty()) {
            auto t = queue.front();
            queue.pop_front();
            for (auto c : nodes_[t.value - 1].children)
                if (out.insert(c).second) queue.push_back(c);
        }
        return out;
    }

    /// Drops every tag that has an ancestor in the same set. The displacing
    /// ancestor reported for a pruned tag is itself kept.
    PruneOutcome prune(const TagSet& tags) const {
        PruneOutcome out;
        for (auto t : tags) {
            require(t);
            std::optional<TagId> top;
            for (auto a : ancestors(t)) {
                if (!tags.count(a)) continue;
                bool covered = false;
                for (auto aa : ancestors(a))
                    if (tags.count(aa)) { covered = true; break; }
                if (!covered && (!top || a < *top)) top = a;
            }
            if (top)
                out.pruned.push_back({t, *top});
            else
                out.kept.insert(t);
        }
        return out;
    }

    TagSet prune_redundant(const TagSet& tags) const { return prune(tags).kept; }

    /// Root-to-tag path following the lowest-id parent at each step.
    std::vector<TagId> path_from_root(TagId id) const {
        require(id);
        std::vector<TagId> path{id};
        while (!nodes_[path.back().value - 1].parents.empty())
            path.push_back(*nodes_[path.back().value - 1].parents.begin());
        std::reverse(path.begin(), path.end());
        return path;
    }

    /// Checks link symmetry and acyclicity. Used by tests and after loading.
    bool well_formed() const {
        for (const auto& n : nodes_) {
            for (auto c : n.children)
                if (!contains(c) || !node(c).parents.count(n.id)) return false;
            for (auto p : n.parents)
                if (!contains(p) || !node(p).children.count(n.id)) return false;
        }
        // Kahn's algorithm: all nodes drain iff acyclic.
        std::vector<std::size_t> indegree(nodes_.size());
        std::deque<std::size_t> ready;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            indegree[i] = nodes_[i].parents.size();
            if (indegree[i] == 0) ready.push_back(i);
        }
        std::size_t drained = 0;
        while (!ready.empty()) {
            auto i = ready.front();
            ready.pop_front();
            ++drained;
            for (auto c : nodes_[i].children)
                if (--indegree[c.value - 1] == 0) ready.push_back(c.value - 1);
        }
        return drained == nodes_.size();
    }

    nlohmann::json node_json(TagId id) const {
        const auto& n = node(id);
        nlohmann::json j{{"tag_id", n.id.value},
                         {"tag_value", n.value},
                         {"parent_ids", n.parents},
                         {"children_ids", n.children},
                         {"origin", std::string(origin_name(n.origin))}};
        if (!n.tree_numbers.empty()) j["tree_numbers"] = n.tree_numbers;
        if (n.external_id) j["external_id"] = *n.external_id;
        if (!n.note.empty()) j["note"] = n.note;
        return j;
    }

private:
    void require(TagId id) const {
        if (!contains(id)) throw Error(ErrorCode::unknown_tag, "unknown tag id " + id.str());
    }
    TagNode& at(TagId id) { return nodes_[id.value - 1]; }

    bool reaches(TagId from, TagId to) const {
        if (from == to) return true;
        return descendants(from).count(to) > 0;
    }

    TagSet closure(TagId id, TagSet TagNode::*edges) const {
        require(id);
        TagSet out;
        std::deque<TagId> queue{id};
        while (!queue.empty()) {
            auto t = queue.front();
            queue.pop_front();
            for (auto n : nodes_[t.value - 1].*edges)
                if (out.insert(n).second) queue.push_back(n);
        }
        return out;
    }

    std::vector<TagNode> nodes_;
    std::unordered_map<std::string, TagId> by_external_;
};

} // namespace spar
