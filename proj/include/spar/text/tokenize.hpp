// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace spar {

inline bool is_token_byte(unsigned char c) noexcept { return std::isalnum(c) || c >= 0x80; }

/// Lowercased maximal runs of alphanumeric bytes. Non-ASCII bytes count as
/// alphanumeric so UTF-8 words stay whole.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (is_token_byte(c)) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Collapses whitespace runs to single spaces and trims both ends.
inline std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

} // namespace spar
