// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <string>

#include <json.hpp>

namespace spar {

/// Integer identifier that cannot be mixed up with identifiers of another kind.
template <class Tag> struct StrongId {
    std::uint64_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint64_t v) : value(v) {}

    constexpr auto operator<=>(const StrongId&) const = default;
    std::string str() const { return std::to_string(value); }
};

template <class Tag> void to_json(nlohmann::json& j, const StrongId<Tag>& id) { j = id.value; }
template <class Tag> void from_json(const nlohmann::json& j, StrongId<Tag>& id) {
    id.value = j.get<std::uint64_t>();
}

using FileId = StrongId<struct FileIdTag>;
using TagId = StrongId<struct TagIdTag>;
using WorkspaceId = StrongId<struct WorkspaceIdTag>;

using TagSet = std::set<TagId>;

} // namespace spar

template <class Tag> struct std::hash<spar::StrongId<Tag>> {
    std::size_t operator()(const spar::StrongId<Tag>& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
