// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spar/core/error.hpp"
#include "spar/text/tokenize.hpp"

namespace spar {

struct ChunkerConfig {
    std::size_t window = 256;
    std::size_t overlap = 64;

    void validate() const {
        if (window == 0 || overlap >= window)
            throw Error(ErrorCode::invalid_argument, "chunk overlap must be smaller than the window");
    }
    std::string digest() const {
        return "chunk:w=" + std::to_string(window) + ",o=" + std::to_string(overlap);
    }
};

struct Chunk {
    std::size_t index = 0;
    std::size_t word_begin = 0;
    std::size_t word_end = 0;
    std::string text;
};

/// Fixed-window passage splitter over whitespace-delimited words. Windows
/// advance by (window - overlap) words; the last window ends at the final
/// word. Empty text yields no chunks.
inline std::vector<Chunk> chunk_text(std::string_view text, const ChunkerConfig& cfg = {}) {
    cfg.validate();
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    std::vector<Chunk> out;
    const std::size_t stride = cfg.window - cfg.overlap;
    for (std::size_t begin = 0; begin < words.size(); begin += stride) {
        std::size_t end = std::min(words.size(), begin + cfg.window);
        Chunk c;
        c.index = out.size();
        c.word_begin = begin;
        c.word_end = end;
        for (std::size_t w = begin; w < end; ++w) {
            if (w > begin) c.text.push_back(' ');
            c.text.append(words[w]);
        }
        out.push_back(std::move(c));
        if (end == words.size()) break;
    }
    return out;
}

} // namespace spar
