// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "service/fixture.hpp"
#include "spar/service/api.hpp"

namespace spar {
namespace {

class ApiTest : public ::testing::Test {
protected:
    void SetUp() override {
        auto t = call("POST", "/tags/tree-numbers", {{"rows", testing::tree_rows()}});
        ASSERT_EQ(t.status, 201);
        EXPECT_EQ(t.body["id_offset"], 0);
        auto f = call("POST", "/files", testing::corpus_records());
        ASSERT_EQ(f.status, 201) << f.body.dump();
    }

    ApiResponse call(const std::string& method, const std::string& path, const nlohmann::json& body = nullptr,
                     std::map<std::string, std::string> query = {}, const std::string& key = {}) {
        auto r = api.handle(method, path, body.is_null() ? std::string() : body.dump(), query, key);
        EXPECT_TRUE(r.body.contains("index_version")) << method << " " << path;
        EXPECT_EQ(r.body["index_version"], engine.index_version()) << method << " " << path;
        return r;
    }

    std::uint64_t new_workspace(const std::string& name = "w") {
        auto r = call("POST", "/workspaces", {{"name", name}});
        EXPECT_EQ(r.status, 201);
        return r.body["workspace_id"].get<std::uint64_t>();
    }

    static std::string ws(std::uint64_t id, const std::string& tail = {}) {
        return "/workspaces/" + std::to_string(id) + tail;
    }

    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(make_date(2025, 3, 1));
    Engine engine{testing::test_config(), clock};
    ServiceApi api{engine};
};

TEST_F(ApiTest, TreeNumberImport) {
    auto h = call("GET", "/tags/hierarchy");
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(h.body["nodes"].size(), 5u);
    EXPECT_EQ(h.body["roots"].size(), 2u);
    auto bad = call("POST", "/tags/tree-numbers", {{"rows", {{{"tree_number", "C14..1"}, {"external_id", "X"}, {"label", "x"}}}}});
    EXPECT_EQ(bad.status, 400);
    EXPECT_EQ(bad.body["error"]["code"], "malformed_tree_number");
}

TEST_F(ApiTest, IngestReportsBadRecordsWith207) {
    auto r = call("POST", "/files",
                  {{"files", nlohmann::json::array({
                                 {{"path", "extra/x.txt"}, {"content", "fine"}, {"tags", {"Diabetes Mellitus"}}},
                                 {{"content", "no path"}},
                                 {{"path", "extra/y.txt"}, {"tags", {"No Such Tag"}}},
                             })}});
    EXPECT_EQ(r.status, 207);
    EXPECT_EQ(r.body["added"], 1);
    ASSERT_EQ(r.body["errors"].size(), 2u);
    EXPECT_EQ(r.body["errors"][0]["line"], 2);
    EXPECT_EQ(call("POST", "/files", nlohmann::json::object()).status, 400);
}

TEST_F(ApiTest, ListFilesPaginates) {
    auto first = call("GET", "/files", nullptr, {{"limit", "5"}});
    EXPECT_EQ(first.body["files"].size(), 5u);
    EXPECT_EQ(first.body["total"], 12);
    EXPECT_EQ(first.body["next_offset"], 5);
    EXPECT_EQ(first.body["files"][0]["file_path"], "notes/h0.txt");
    auto last = call("GET", "/files", nullptr, {{"offset", "10"}, {"limit", "5"}});
    EXPECT_EQ(last.body["files"].size(), 2u);
    EXPECT_TRUE(last.body["next_offset"].is_null());
    EXPECT_EQ(call("GET", "/files", nullptr, {{"limit", "0"}}).status, 400);
    EXPECT_EQ(call("GET", "/files", nullptr, {{"limit", "-3"}}).status, 400);
    EXPECT_EQ(call("GET", "/files/3").body["file_path"], "notes/h2.txt");
    EXPECT_EQ(call("GET", "/files/300").status, 404);
}

TEST_F(ApiTest, RetrieveExpandsHierarchyAndAppliesPredicates) {
    auto id = new_workspace("heart");
    auto r = call("POST", ws(id, "/retrieve"), {{"prompt", "heart"}});
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body["n_filtered"], 8);
    r = call("POST", ws(id, "/retrieve"), {{"prompt", "heart from 2019 to 2020"}});
    EXPECT_EQ(r.body["n_filtered"], 4);
    EXPECT_EQ(call("GET", ws(id)).body["files"].size(), 4u);
    EXPECT_EQ(call("POST", ws(id, "/retrieve"), {{"wrong", 1}}).status, 400);
}

TEST_F(ApiTest, QueryFindsUniqueToken) {
    auto id = new_workspace();
    call("POST", ws(id, "/retrieve"), {{"prompt", "heart"}});
    auto q = call("POST", ws(id, "/query"), {{"question", "zqa2"}, {"k", 3}});
    EXPECT_EQ(q.status, 200);
    EXPECT_EQ(q.body["hits"][0]["path"], "notes/a2.txt");
    EXPECT_EQ(q.body["k"], 3);
    EXPECT_EQ(call("GET", ws(id)).body["thread"].size(), 1u);
    EXPECT_EQ(call("POST", ws(id, "/query"), {{"question", "x"}, {"k", -1}}).status, 400);
}

TEST_F(ApiTest, EmptyFilterAndUnknownWorkspace) {
    auto id = new_workspace();
    auto e = call("POST", ws(id, "/retrieve"), {{"prompt", "the of and"}});
    EXPECT_EQ(e.status, 422);
    EXPECT_EQ(e.body["error"]["code"], "empty_filter");
    EXPECT_TRUE(e.body["error"]["details"].is_object());
    EXPECT_EQ(call("POST", ws(99, "/retrieve"), {{"prompt", "heart"}}).status, 404);
    auto empty = call("POST", ws(id, "/query"), {{"question", "zqa2"}});
    EXPECT_EQ(empty.status, 409);
    EXPECT_EQ(empty.body["error"]["code"], "empty_workspace_index");
    EXPECT_EQ(call("GET", "/workspaces/abc").status, 400);
}

TEST_F(ApiTest, UpdatedFileIsReembeddedOnRebuild) {
    auto id = new_workspace();
    call("POST", ws(id, "/retrieve"), {{"prompt", "diabetes mellitus"}});
    auto before = engine.index_version();
    auto p = call("PATCH", "/files/9", {{"content", "completely new wording zqnew"}});
    EXPECT_EQ(p.status, 200);
    EXPECT_GT(p.body["index_version"].get<std::uint64_t>(), before);
    auto r = call("POST", ws(id, "/retrieve"), {{"prompt", "diabetes mellitus"}});
    EXPECT_EQ(r.body["changed"], nlohmann::json::array({9}));
    EXPECT_EQ(call("POST", ws(id, "/query"), {{"question", "zqnew"}, {"k", 1}}).body["hits"][0]["file_id"], 9);
    EXPECT_EQ(call("PATCH", "/files/999", {{"rehash", true}}).status, 404);
}

TEST_F(ApiTest, ArchiveReactivateTerminate) {
    auto id = new_workspace();
    call("POST", ws(id, "/retrieve"), {{"prompt", "heart"}});
    auto top = call("POST", ws(id, "/query"), {{"question", "zqh1"}, {"k", 5}}).body["hits"];
    auto rec = call("POST", ws(id, "/archive"));
    EXPECT_EQ(rec.status, 200);
    EXPECT_EQ(rec.body["format"], "spar-archive-1");
    EXPECT_EQ(rec.body["file_list"].size(), 8u);
    EXPECT_EQ(call("GET", ws(id, "/cost")).body["resident_vector_bytes"], 0);
    EXPECT_EQ(call("POST", ws(id, "/archive")).status, 409);
    EXPECT_EQ(call("POST", ws(id, "/query"), {{"question", "zqh1"}}).body["error"]["code"], "workspace_archived");
    EXPECT_EQ(call("POST", ws(id, "/reactivate")).status, 200);
    auto again = call("POST", ws(id, "/query"), {{"question", "zqh1"}, {"k", 5}}).body["hits"];
    ASSERT_EQ(again.size(), top.size());
    for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(again[i]["file_id"], top[i]["file_id"]);
    EXPECT_EQ(call("DELETE", ws(id)).body["status"], "terminated");
    EXPECT_EQ(call("GET", ws(id)).status, 404);
}

TEST_F(ApiTest, HierarchyHighlightsWorkspaceSelection) {
    auto id = new_workspace();
    call("POST", ws(id, "/retrieve"), {{"prompt", "heart"}});
    auto h = call("GET", "/tags/hierarchy", nullptr, {{"highlight", std::to_string(id)}});
    std::map<std::string, nlohmann::json> by_label;
    for (const auto& n : h.body["nodes"]) by_label[n["tag_value"].get<std::string>()] = n;
    EXPECT_TRUE(by_label["Heart Diseases"]["selected"].get<bool>());
    EXPECT_TRUE(by_label["Arrhythmias, Cardiac"]["in_expansion"].get<bool>());
    EXPECT_FALSE(by_label["Diabetes Mellitus"]["in_expansion"].get<bool>());
    EXPECT_EQ(call("GET", "/tags/hierarchy", nullptr, {{"highlight", "42"}}).status, 404);
}

TEST_F(ApiTest, CostReportNeedsABuild) {
    EXPECT_TRUE(call("GET", "/cost/report").body["break_even"].is_null());
    auto id = new_workspace();
    call("POST", ws(id, "/retrieve"), {{"prompt", "diabetes mellitus"}});
    call("POST", ws(id, "/query"), {{"question", "zqd1"}, {"k", 2}});
    auto rep = call("GET", "/cost/report");
    ASSERT_FALSE(rep.body["break_even"].is_null());
    EXPECT_EQ(rep.body["memory"]["W"], 1);
    auto c = call("GET", ws(id, "/cost"));
    EXPECT_EQ(c.body["session"]["processing"]["files_processed"], 4);
    EXPECT_EQ(c.body["amortized"]["queries"], 1);
}

TEST_F(ApiTest, IdempotentReplayAndKeyReuse) {
    auto body = nlohmann::json{{"name", "once"}};
    auto a = call("POST", "/workspaces", body, {}, "k-1");
    auto b = call("POST", "/workspaces", body, {}, "k-1");
    EXPECT_EQ(a.status, 201);
    EXPECT_EQ(b.status, 201);
    EXPECT_EQ(a.body["workspace_id"], b.body["workspace_id"]);
    EXPECT_TRUE(b.body["idempotent_replay"].get<bool>());
    EXPECT_EQ(call("GET", "/workspaces").body["workspaces"].size(), 1u);
    auto c = call("POST", "/workspaces", {{"name", "other"}}, {}, "k-1");
    EXPECT_EQ(c.status, 409);
    EXPECT_EQ(c.body["error"]["code"], "idempotency_key_reused");
    EXPECT_EQ(call("POST", "/workspaces", body, {}, "k-2").body["workspace_id"], 2);
}

TEST_F(ApiTest, MalformedRequests) {
    auto r = api.handle("POST", "/workspaces", "{not json");
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(r.body["error"]["code"], "invalid_json");
    EXPECT_TRUE(r.body.contains("index_version"));
    auto nf = call("GET", "/nowhere");
    EXPECT_EQ(nf.status, 404);
    EXPECT_EQ(nf.body["error"]["code"], "route_not_found");
    EXPECT_EQ(call("PATCH", "/workspaces").status, 404);
}

TEST(OpenApi, CheckedInDocumentMatches) {
    std::ifstream in(SPAR_OPENAPI_PATH);
    ASSERT_TRUE(in) << SPAR_OPENAPI_PATH;
    EXPECT_EQ(nlohmann::json::parse(in), openapi_document());
}

TEST(OpenApi, EveryRouteIsDocumented) {
    auto doc = openapi_document();
    for (const char* p : {"/workspaces", "/workspaces/{id}", "/workspaces/{id}/retrieve", "/workspaces/{id}/query",
                          "/workspaces/{id}/archive", "/workspaces/{id}/reactivate", "/workspaces/{id}/cost",
                          "/tags/hierarchy", "/tags/tree-numbers", "/cost/report", "/files", "/files/{id}"})
        EXPECT_TRUE(doc["paths"].contains(p)) << p;
    EXPECT_TRUE(doc["paths"]["/files"]["post"]["responses"].contains("207"));
}

TEST(Http, RoundTripOverSocket) {
    Engine engine(testing::test_config());
    ServiceApi api(engine);
    httplib::Server server;
    api.mount(server);
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto imported = client.Post("/tags/tree-numbers", nlohmann::json{{"rows", testing::tree_rows()}}.dump(),
                                "application/json");
    ASSERT_TRUE(imported);
    EXPECT_EQ(imported->status, 201);
    client.Post("/files", testing::corpus_records().dump(), "application/json");
    httplib::Headers idem{{"Idempotency-Key", "abc"}};
    auto created = client.Post("/workspaces", idem, R"({"name":"h"})", "application/json");
    auto replay = client.Post("/workspaces", idem, R"({"name":"h"})", "application/json");
    ASSERT_TRUE(created && replay);
    EXPECT_EQ(nlohmann::json::parse(created->body)["workspace_id"], nlohmann::json::parse(replay->body)["workspace_id"]);
    client.Post("/workspaces/1/retrieve", R"({"prompt":"heart"})", "application/json");
    auto q = client.Post("/workspaces/1/query", R"({"question":"zqh3","k":2})", "application/json");
    ASSERT_TRUE(q);
    EXPECT_EQ(q->status, 200);
    EXPECT_EQ(nlohmann::json::parse(q->body)["hits"][0]["path"], "notes/h3.txt");
    auto missing = client.Get("/workspaces/7");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    server.stop();
    t.join();
}

} // namespace
} // namespace spar
