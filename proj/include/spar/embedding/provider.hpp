// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "spar/embedding/embedder.hpp"

namespace spar {

struct ProviderConfig {
    enum class Kind { stub, remote };

    Kind kind = Kind::stub;
    std::string endpoint;
    std::string model;
    std::size_t dim = 512;
    int timeout_ms = 10000;
    int max_retries = 2;
    int backoff_ms = 100;
    std::string auth_env = "SPAR_PROVIDER_TOKEN";
    std::string embed_path = "/embed";
    std::string generate_path = "/generate";

    void validate() const {
        if (kind == Kind::remote && endpoint.empty())
            throw Error(ErrorCode::invalid_argument, "remote provider requires an endpoint");
        if (dim == 0) throw Error(ErrorCode::invalid_argument, "provider dim must be positive");
        if (max_retries < 0 || timeout_ms <= 0)
            throw Error(ErrorCode::invalid_argument, "invalid retry/timeout policy");
    }

    static ProviderConfig from_json(const nlohmann::json& j) {
        ProviderConfig c;
        c.kind = j.value("kind", std::string("stub")) == "remote" ? Kind::remote : Kind::stub;
        c.endpoint = j.value("endpoint", c.endpoint);
        c.model = j.value("model", c.model);
        c.dim = j.value("dim", c.dim);
        c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
        c.auth_env = j.value("auth_env", c.auth_env);
        c.embed_path = j.value("embed_path", c.embed_path);
        c.generate_path = j.value("generate_path", c.generate_path);
        c.validate();
        return c;
    }
};

/// HTTP client for an external embedding/generation service.
///
///   POST {embed_path}    {"model", "texts": [...]}           -> {"vectors": [[...], ...]}
///   POST {generate_path} {"model", "question", "context": []} -> {"answer": "..."}
///
/// Transport failures, 429 and 5xx responses are retried with exponential
/// backoff; after the last attempt the call fails with provider_unavailable.
/// A new connection is opened per request, so one instance may be shared
/// across threads.
class RemoteProvider final : public Embedder, public AnswerGenerator {
public:
    explicit RemoteProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    std::size_t dim() const override { return cfg_.dim; }

    EmbeddingVector embed(std::string_view text) override {
        std::string t(text);
        return embed_batch(std::span<const std::string>(&t, 1)).front();
    }

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
        for (const auto& t : texts)
            if (t.empty()) throw Error(ErrorCode::invalid_argument, "cannot embed empty text");
        nlohmann::json body{{"model", cfg_.model}, {"texts", texts}};
        auto resp = post(cfg_.embed_path, body);
        if (!resp.contains("vectors") || !resp["vectors"].is_array())
            throw Error(ErrorCode::provider_unavailable, "embedding response lacks 'vectors'");
        const auto& vs = resp["vectors"];
        if (vs.size() != texts.size())
            throw Error(ErrorCode::dim_mismatch, "provider returned " + std::to_string(vs.size()) +
                                                     " vectors for " + std::to_string(texts.size()) +
                                                     " texts");
        std::vector<EmbeddingVector> out;
        out.reserve(vs.size());
        for (const auto& v : vs) {
            EmbeddingVector e;
            e.values = v.get<std::vector<float>>();
            if (e.values.size() != cfg_.dim)
                throw Error(ErrorCode::dim_mismatch, "provider vector has dim " +
                                                         std::to_string(e.values.size()) + ", expected " +
                                                         std::to_string(cfg_.dim));
            l2_normalize(e.values);
            e.normalized = l2_norm(e.values) > 0;
            out.push_back(std::move(e));
        }
        return out;
    }

    std::string config_digest() const override {
        return "remote:" + cfg_.endpoint + ",model=" + cfg_.model + ",d=" + std::to_string(cfg_.dim);
    }

    std::string generate(std::string_view question, std::span<const ContextChunk> context) override {
        nlohmann::json ctx = nlohmann::json::array();
        for (const auto& c : context)
            ctx.push_back({{"file_path", c.file_path}, {"chunk_index", c.chunk_index}, {"text", c.text}});
        auto resp = post(cfg_.generate_path,
                         {{"model", cfg_.model}, {"question", std::string(question)}, {"context", ctx}});
        if (!resp.contains("answer") || !resp["answer"].is_string())
            throw Error(ErrorCode::provider_unavailable, "generation response lacks 'answer'");
        return resp["answer"].get<std::string>();
    }

    const ProviderConfig& config() const noexcept { return cfg_; }

private:
    nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
        httplib::Headers headers;
        if (const char* token = std::getenv(cfg_.auth_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
            httplib::Client client(cfg_.endpoint);
            auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            auto res = client.Post(path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status >= 400)
                throw Error(ErrorCode::provider_unavailable, "provider rejected request with HTTP " +
                                                                 std::to_string(res->status));
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::provider_unavailable, std::string("malformed provider JSON: ") + e.what());
            }
        }
        throw Error(ErrorCode::provider_unavailable,
                    "provider at " + cfg_.endpoint + " unavailable after " +
                        std::to_string(cfg_.max_retries + 1) + " attempts (" + last_error + ")");
    }

    ProviderConfig cfg_;
};

inline std::shared_ptr<Embedder> make_embedder(const ProviderConfig& cfg) {
    cfg.validate();
    if (cfg.kind == ProviderConfig::Kind::remote) return std::make_shared<RemoteProvider>(cfg);
    return std::make_shared<StubEmbedder>(cfg.dim);
}

inline std::shared_ptr<AnswerGenerator> make_generator(const ProviderConfig& cfg) {
    cfg.validate();
    if (cfg.kind == ProviderConfig::Kind::remote) return std::make_shared<RemoteProvider>(cfg);
    return std::make_shared<StubAnswerGenerator>();
}

} // namespace spar
