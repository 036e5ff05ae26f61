// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "spar/embedding/provider.hpp"
#include "spar/text/chunker.hpp"

namespace spar {
namespace {

TEST(Tokenize, LowercasesAlphanumericRuns) {
    EXPECT_EQ(tokenize("Alpha beta, GAMMA-2 x"), (std::vector<std::string>{"alpha", "beta", "gamma", "2", "x"}));
    EXPECT_TRUE(tokenize(" .,; ").empty());
    EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(Chunker, WindowsAdvanceByStride) {
    std::string text;
    for (int i = 0; i < 600; ++i) text += "w" + std::to_string(i) + " ";
    auto chunks = chunk_text(text);
    // 600 words, window 256, stride 192: starts 0, 192, 384.
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[1].word_begin, 192u);
    EXPECT_EQ(chunks[1].word_end, 448u);
    EXPECT_EQ(chunks[2].word_end, 600u);
    EXPECT_EQ(chunks[2].text.substr(0, 5), "w384 ");
}

TEST(Chunker, ShortAndEmptyText) {
    EXPECT_TRUE(chunk_text("  \n ").empty());
    auto one = chunk_text("just  a\tfew words");
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].text, "just a few words");
}

TEST(Chunker, ChunkCountMatchesFormula) {
    for (std::size_t words : {1u, 5u, 7u, 8u, 9u, 20u, 23u}) {
        std::string text;
        for (std::size_t i = 0; i < words; ++i) text += "x ";
        ChunkerConfig cfg{8, 3};
        std::size_t expect = words <= 8 ? 1 : 1 + (words - 8 + 4) / 5;
        EXPECT_EQ(chunk_text(text, cfg).size(), expect) << words;
    }
}

TEST(Chunker, OverlapMustBeSmallerThanWindow) {
    EXPECT_THROW(chunk_text("a b", ChunkerConfig{4, 4}), Error);
}

// Golden vectors computed once with an independent script and frozen here.
TEST(StubEmbedder, GoldenVectorDim8) {
    StubEmbedder e(8);
    auto v = e.embed("a b a");
    const std::vector<float> golden{0, 0, 0, 0, 0.5773502588272095f, 0, 0, 0.8164966106414795f};
    ASSERT_EQ(v.values.size(), golden.size());
    for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_FLOAT_EQ(v.values[i], golden[i]) << i;
    EXPECT_TRUE(v.normalized);
}

TEST(StubEmbedder, GoldenVectorWithSharedBucket) {
    StubEmbedder e(16);
    auto v = e.embed("Alpha beta, GAMMA alpha");
    std::vector<float> golden(16, 0.0f);
    golden[1] = 0.9238795042037964f;
    golden[14] = 0.3826834261417389f;
    for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_FLOAT_EQ(v.values[i], golden[i]) << i;
}

TEST(StubEmbedder, IdenticalTextsHaveCosineOne) {
    StubEmbedder e;
    auto a = e.embed("renal function in elderly patients");
    auto b = e.embed("renal function in elderly patients");
    EXPECT_EQ(a, b);
    EXPECT_NEAR(cosine(a.values, b.values), 1.0, 1e-6);
}

TEST(StubEmbedder, DisjointTokensAreOrthogonal) {
    StubEmbedder e;
    const std::string left = "glucose insulin pancreas", right = "fracture femur cast";
    std::set<std::size_t> lb, rb;
    for (const auto& t : tokenize(left)) lb.insert(e.bucket(t));
    for (const auto& t : tokenize(right)) rb.insert(e.bucket(t));
    for (auto b : lb) ASSERT_FALSE(rb.count(b)) << "fixture collides in bucket " << b;
    EXPECT_DOUBLE_EQ(cosine(e.embed(left).values, e.embed(right).values), 0.0);
    EXPECT_GT(cosine(e.embed(left).values, e.embed("insulin dosing").values), 0.0);
}

TEST(StubEmbedder, RejectsEmptyTextAndZeroDim) {
    StubEmbedder e;
    EXPECT_THROW(e.embed(""), Error);
    EXPECT_THROW(StubEmbedder(0), Error);
    EXPECT_FALSE(e.embed("...").normalized);
}

TEST(StubEmbedder, ConfigDigestTracksDimAndSeed) {
    EXPECT_NE(StubEmbedder(64).config_digest(), StubEmbedder(128).config_digest());
    EXPECT_NE(StubEmbedder(64, 1).config_digest(), StubEmbedder(64, 2).config_digest());
}

TEST(StubGenerator, AnswersWithTopChunkOrSentinel) {
    StubAnswerGenerator g;
    std::vector<ContextChunk> one{{"notes/a.txt", 2, "the reading equals seven"}};
    auto answer = g.generate("q", one);
    EXPECT_NE(answer.find("the reading equals seven"), std::string::npos);
    EXPECT_NE(answer.find("notes/a.txt#2"), std::string::npos);
    EXPECT_EQ(g.generate("q", {}), StubAnswerGenerator::kNoContext);
}

// ---- Remote provider against a local mock -------------------------------------

class MockProvider : public ::testing::Test {
protected:
    void SetUp() override {
        server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++embed_calls;
            last_auth = req.get_header_value("Authorization");
            if (fail_first > 0) {
                --fail_first;
                res.status = 503;
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json vs = nlohmann::json::array();
            for (std::size_t i = 0; i < body["texts"].size(); ++i) {
                std::vector<float> v(dim, 0.0f);
                v[i % dim] = 2.0f;
                vs.push_back(v);
            }
            res.set_content(nlohmann::json{{"vectors", vs}}.dump(), "application/json");
        });
        server.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            res.set_content(nlohmann::json{{"answer", "  Canned: " + body["question"].get<std::string>() + "\n"}}.dump(),
                            "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    void TearDown() override {
        server.stop();
        thread.join();
    }
    ProviderConfig config() const {
        ProviderConfig c;
        c.kind = ProviderConfig::Kind::remote;
        c.endpoint = "http://127.0.0.1:" + std::to_string(port);
        c.dim = 4;
        c.backoff_ms = 1;
        c.timeout_ms = 2000;
        c.auth_env = "SPAR_TEST_PROVIDER_TOKEN";
        return c;
    }

    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::size_t dim = 4;
    std::atomic<int> fail_first{0};
    std::atomic<int> embed_calls{0};
    std::string last_auth;
};

TEST_F(MockProvider, EmbedBatchKeepsOrderAndNormalizes) {
    RemoteProvider p(config());
    std::vector<std::string> texts{"one", "two", "three"};
    auto out = p.embed_batch(texts);
    ASSERT_EQ(out.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_FLOAT_EQ(out[i].values[i], 1.0f);
        EXPECT_TRUE(out[i].normalized);
    }
}

TEST_F(MockProvider, RetriesTransientFailures) {
    fail_first = 2;
    RemoteProvider p(config());
    EXPECT_EQ(p.embed("x").values.size(), 4u);
    EXPECT_EQ(embed_calls.load(), 3);
}

TEST_F(MockProvider, GivesUpAfterRetryBudget) {
    fail_first = 10;
    RemoteProvider p(config());
    try {
        p.embed("x");
        FAIL() << "expected provider_unavailable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::provider_unavailable);
    }
    EXPECT_EQ(embed_calls.load(), 3);
}

TEST_F(MockProvider, DimMismatchIsReported) {
    dim = 6;
    RemoteProvider p(config());
    try {
        p.embed("x");
        FAIL() << "expected dim_mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::dim_mismatch);
    }
}

TEST_F(MockProvider, AnswerPassesThroughUnmodified) {
    RemoteProvider p(config());
    std::vector<ContextChunk> ctx{{"a.txt", 0, "text"}};
    EXPECT_EQ(p.generate("why?", ctx), "  Canned: why?\n");
}

TEST_F(MockProvider, BearerTokenFromEnvironment) {
    ::setenv("SPAR_TEST_PROVIDER_TOKEN", "s3cret", 1);
    RemoteProvider p(config());
    p.embed("x");
    ::unsetenv("SPAR_TEST_PROVIDER_TOKEN");
    EXPECT_EQ(last_auth, "Bearer s3cret");
}

TEST(RemoteProvider, UnreachableEndpointIsUnavailable) {
    ProviderConfig c;
    c.kind = ProviderConfig::Kind::remote;
    c.endpoint = "http://127.0.0.1:1";
    c.dim = 4;
    c.max_retries = 0;
    c.timeout_ms = 200;
    RemoteProvider p(c);
    try {
        p.embed("x");
        FAIL() << "expected provider_unavailable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::provider_unavailable);
    }
}

TEST(ProviderConfig, RemoteNeedsEndpoint) {
    EXPECT_THROW(ProviderConfig::from_json({{"kind", "remote"}}), Error);
    auto c = ProviderConfig::from_json({{"kind", "stub"}, {"dim", 32}});
    EXPECT_EQ(make_embedder(c)->dim(), 32u);
}

} // namespace
} // namespace spar
