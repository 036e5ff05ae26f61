// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spar/metadata/tag_hierarchy.hpp"

namespace spar {

/// One (tree number, descriptor) row of a MeSH-style taxonomy dump.
struct TreeNumberEntry {
    std::string tree_number;
    std::string external_id;
    std::string name;
    std::string note;
};

/// Splits "G16.012.500" into {"G16", "012", "500"}; throws on empty or
/// non-alphanumeric segments.
inline std::vector<std::string> split_tree_number(std::string_view tn) {
    std::vector<std::string> segments;
    std::string current;
    auto bad = [&] {
        return Error(ErrorCode::malformed_tree_number, "malformed tree number '" + std::string(tn) + "'");
    };
    for (char c : tn) {
        if (c == '.') {
            if (current.empty()) throw bad();
            segments.push_back(std::move(current));
            current.clear();
        } else if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(c);
        } else {
            throw bad();
        }
    }
    if (current.empty()) throw bad();
    segments.push_back(std::move(current));
    return segments;
}

/// Builds the tag DAG implied by tree-number prefixes. A node's parent is the
/// node holding its longest present proper prefix, so a missing intermediate
/// number attaches to the nearest ancestor that is present. Rows sharing an
/// external id collapse into one tag with one parent per tree number.
inline TagHierarchy build_hierarchy_from_tree_numbers(const std::vector<TreeNumberEntry>& entries) {
    TagHierarchy h;
    std::map<std::string, TagId> by_tree_number;
    std::vector<std::vector<std::string>> segments;
    segments.reserve(entries.size());

    for (const auto& e : entries) {
        segments.push_back(split_tree_number(e.tree_number));
        if (by_tree_number.count(e.tree_number))
            throw Error(ErrorCode::duplicate_tree_number,
                        "tree number '" + e.tree_number + "' listed twice");
        auto id = h.find_external(e.external_id);
        if (!id) id = h.add_tag(e.name, {}, TagOrigin::enterprise_defined, e.external_id, e.note);
        h.add_tree_number(*id, e.tree_number);
        by_tree_number.emplace(e.tree_number, *id);
    }

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& segs = segments[i];
        std::string prefix;
        std::optional<TagId> parent;
        for (std::size_t len = 1; len < segs.size(); ++len) {
            prefix += (len > 1 ? "." : "") + segs[len - 1];
            if (auto it = by_tree_number.find(prefix); it != by_tree_number.end()) parent = it->second;
        }
        if (parent) {
            auto child = by_tree_number.at(entries[i].tree_number);
            if (!h.node(*parent).children.count(child)) h.link(*parent, child);
        }
    }
    return h;
}

} // namespace spar
