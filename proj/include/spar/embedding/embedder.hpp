// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spar/core/error.hpp"
#include "spar/core/hash.hpp"
#include "spar/text/tokenize.hpp"

namespace spar {

struct EmbeddingVector {
    std::vector<float> values;
    bool normalized = false;

    std::size_t dim() const noexcept { return values.size(); }
    std::span<const float> span() const noexcept { return values; }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

inline double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::dim_mismatch, "dot product of mismatched dims");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
    return s;
}

inline double l2_norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity; 0 when either side is the zero vector.
inline double cosine(std::span<const float> a, std::span<const float> b) {
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0 || nb == 0) return 0;
    return dot(a, b) / (na * nb);
}

inline void l2_normalize(std::vector<float>& v) {
    double n = l2_norm(v);
    if (n == 0) return;
    for (auto& x : v) x = static_cast<float>(x / n);
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    /// Output order matches input order.
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
    /// Identifies the configuration; part of every embedding cache key.
    virtual std::string config_digest() const = 0;
};

/// Deterministic offline embedder. Each token hashes to one of `dim` buckets;
/// every occurrence adds 1/sqrt(tf) to its bucket, where tf is the token's
/// count in the input; the result is L2-normalized. Texts that share no token
/// (and no bucket) are orthogonal; texts that share a token have positive
/// cosine.
class StubEmbedder final : public Embedder {
public:
    static constexpr std::uint64_t kDefaultSeed = 0x5350415253454544ULL;

    explicit StubEmbedder(std::size_t dim = 512, std::uint64_t seed = kDefaultSeed)
        : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw Error(ErrorCode::invalid_argument, "embedding dim must be positive");
    }

    std::size_t dim() const override { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::size_t bucket(std::string_view token) const noexcept {
        return static_cast<std::size_t>(splitmix64(fnv1a64(token) ^ seed_) % dim_);
    }

    EmbeddingVector embed(std::string_view text) override {
        if (text.empty()) throw Error(ErrorCode::invalid_argument, "cannot embed empty text");
        auto tokens = tokenize(text);
        std::unordered_map<std::string, std::size_t> tf;
        for (const auto& t : tokens) ++tf[t];
        std::vector<double> acc(dim_, 0.0);
        for (const auto& t : tokens) acc[bucket(t)] += 1.0 / std::sqrt(double(tf[t]));
        double norm = 0;
        for (double x : acc) norm += x * x;
        norm = std::sqrt(norm);
        EmbeddingVector v;
        v.values.resize(dim_);
        if (norm == 0) return v;
        for (std::size_t i = 0; i < dim_; ++i) v.values[i] = static_cast<float>(acc[i] / norm);
        v.normalized = true;
        return v;
    }

    std::string config_digest() const override {
        return "stub:d=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_);
    }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// A retrieved passage handed to the answer generator.
struct ContextChunk {
    std::string file_path;
    std::size_t chunk_index = 0;
    std::string text;
};

class AnswerGenerator {
public:
    virtual ~AnswerGenerator() = default;
    virtual std::string generate(std::string_view question, std::span<const ContextChunk> context) = 0;
};

/// Extractive stand-in for an LLM: answers with the top passage verbatim,
/// prefixed by its provenance.
class StubAnswerGenerator final : public AnswerGenerator {
public:
    static constexpr std::string_view kNoContext = "No relevant context was retrieved.";

    std::string generate(std::string_view, std::span<const ContextChunk> context) override {
        if (context.empty()) return std::string(kNoContext);
        const auto& top = context.front();
        return "[" + top.file_path + "#" + std::to_string(top.chunk_index) + "] " + top.text;
    }
};

} // namespace spar
