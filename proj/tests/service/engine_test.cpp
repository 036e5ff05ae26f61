// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

// Module-level counterparts of the API tests: the same operations driven on
// Engine directly.

#include <filesystem>

#include <unistd.h>

#include <gtest/gtest.h>

#include "service/fixture.hpp"

namespace spar {
namespace {

class EngineTest : public ::testing::Test {
protected:
    void SetUp() override {
        EXPECT_EQ(engine.import_tree_numbers(testing::tree_entries()), 0u);
        auto rep = engine.ingest(testing::corpus_records());
        ASSERT_TRUE(rep.errors.empty());
        ASSERT_EQ(rep.added.size(), 12u);
    }

    std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return std::nullopt;
    }

    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(make_date(2025, 3, 1));
    Engine engine{testing::test_config(), clock};
};

TEST_F(EngineTest, TreeNumberImport) {
    EXPECT_EQ(engine.index().tag_count(), 5u);
    auto h = engine.hierarchy();
    EXPECT_EQ(h["nodes"].size(), 5u);
    EXPECT_EQ(h["roots"].size(), 2u);
}

TEST_F(EngineTest, IngestReportsBadRecords) {
    auto rep = engine.ingest(nlohmann::json::array({
        {{"path", "extra/x.txt"}, {"content", "fine"}, {"tags", {"Diabetes Mellitus"}}},
        {{"content", "no path"}},
        {{"path", "extra/y.txt"}, {"tags", {"No Such Tag"}}},
    }));
    EXPECT_EQ(rep.added.size(), 1u);
    ASSERT_EQ(rep.errors.size(), 2u);
    EXPECT_EQ(rep.errors[0].line, 2u);
    EXPECT_EQ(rep.errors[1].line, 3u);
    EXPECT_EQ(code_of([&] { engine.ingest(nlohmann::json::object()); }), ErrorCode::invalid_argument);
}

TEST_F(EngineTest, ListFilesPaginates) {
    auto first = engine.list_files(0, 5), last = engine.list_files(10, 5);
    EXPECT_EQ(first.files.size(), 5u);
    EXPECT_EQ(first.total, 12u);
    EXPECT_EQ(last.files.size(), 2u);
    EXPECT_EQ(first.files[0].path, "notes/h0.txt");
    EXPECT_EQ(code_of([&] { engine.list_files(0, 0); }), ErrorCode::invalid_argument);
}

TEST_F(EngineTest, RetrieveExpandsHierarchyAndAppliesPredicates) {
    auto id = engine.create_workspace("heart").id;
    auto r = engine.retrieve(id, "heart");
    EXPECT_EQ(r.n_filtered, 8u);
    r = engine.retrieve(id, "heart from 2019 to 2020");
    EXPECT_EQ(r.n_filtered, 4u);
    EXPECT_EQ(r.removed.size(), 4u);
    EXPECT_EQ(engine.workspace_detail(id)["files"].size(), 4u);
}

TEST_F(EngineTest, QueryFindsUniqueToken) {
    auto id = engine.create_workspace("heart").id;
    engine.retrieve(id, "heart");
    auto q = engine.query(id, "zqa2", 3);
    ASSERT_FALSE(q.hits.empty());
    EXPECT_EQ(q.hits[0].path, "notes/a2.txt");
    EXPECT_EQ(q.k, 3u);
    EXPECT_EQ(engine.workspace_detail(id)["thread"].size(), 1u);
}

TEST_F(EngineTest, EmptyFilterAndUnknownWorkspace) {
    auto id = engine.create_workspace("w").id;
    EXPECT_EQ(code_of([&] { engine.retrieve(id, "the of and"); }), ErrorCode::empty_filter);
    EXPECT_EQ(code_of([&] { engine.retrieve(WorkspaceId(99), "heart"); }), ErrorCode::workspace_not_found);
    EXPECT_EQ(code_of([&] { engine.query(id, "zqa2", 3); }), ErrorCode::empty_workspace_index);
}

TEST_F(EngineTest, UpdatedFileIsReembeddedOnRebuild) {
    auto id = engine.create_workspace("w").id;
    engine.retrieve(id, "diabetes mellitus");
    auto before = engine.index_version();
    auto rec = engine.update_file(FileId(9), {{"content", "completely new wording zqnew"}});
    EXPECT_GT(engine.index_version(), before);
    EXPECT_EQ(rec.content_hash, sha256_hex("completely new wording zqnew"));
    auto r = engine.retrieve(id, "diabetes mellitus");
    EXPECT_EQ(r.changed, std::vector<FileId>{FileId(9)});
    EXPECT_EQ(r.files_processed, 1u);
    EXPECT_EQ(engine.query(id, "zqnew", 1).hits.at(0).file, FileId(9));
}

TEST_F(EngineTest, ArchiveReactivateTerminate) {
    auto id = engine.create_workspace("w").id;
    engine.retrieve(id, "heart");
    auto top = engine.query(id, "zqh1", 5);
    auto rec = engine.archive(id);
    EXPECT_EQ(rec.file_list.size(), 8u);
    EXPECT_EQ(engine.workspace_cost(id)["resident_vector_bytes"], 0);
    engine.reactivate(id);
    auto again = engine.query(id, "zqh1", 5);
    ASSERT_EQ(again.hits.size(), top.hits.size());
    for (std::size_t i = 0; i < top.hits.size(); ++i) EXPECT_EQ(again.hits[i].file, top.hits[i].file);
    engine.terminate(id);
    EXPECT_EQ(code_of([&] { engine.workspace_detail(id); }), ErrorCode::workspace_not_found);
}

TEST_F(EngineTest, HierarchyHighlightsWorkspaceSelection) {
    auto id = engine.create_workspace("w").id;
    engine.retrieve(id, "heart");
    auto h = engine.hierarchy(id);
    std::map<std::string, nlohmann::json> by_label;
    for (const auto& n : h["nodes"]) by_label[n["tag_value"].get<std::string>()] = n;
    EXPECT_TRUE(by_label["Heart Diseases"]["selected"].get<bool>());
    EXPECT_TRUE(by_label["Arrhythmias, Cardiac"]["in_expansion"].get<bool>());
    EXPECT_FALSE(by_label["Arrhythmias, Cardiac"]["selected"].get<bool>());
    EXPECT_FALSE(by_label["Diabetes Mellitus"]["in_expansion"].get<bool>());
    EXPECT_EQ(h["highlighted_paths"].size(), 1u);
    EXPECT_EQ(code_of([&] { engine.hierarchy(WorkspaceId(42)); }), ErrorCode::workspace_not_found);
}

TEST_F(EngineTest, CostReportNeedsABuild) {
    auto empty = engine.cost_report();
    EXPECT_TRUE(empty["break_even"].is_null());
    auto id = engine.create_workspace("w").id;
    engine.retrieve(id, "diabetes mellitus");
    engine.query(id, "zqd1", 2);
    auto rep = engine.cost_report();
    ASSERT_FALSE(rep["break_even"].is_null());
    EXPECT_EQ(rep["break_even"]["params"]["W"], 1.0);
    EXPECT_EQ(rep["memory"]["W"], 1);
    auto ws = engine.workspace_cost(id);
    EXPECT_EQ(ws["session"]["processing"]["files_processed"], 4);
    EXPECT_EQ(ws["amortized"]["queries"], 1);
}

TEST_F(EngineTest, BaselineMeasuresGlobalFootprint) {
    auto b = engine.build_baseline();
    EXPECT_EQ(b.files_processed, 12u);
    auto mem = engine.cost_report()["memory"];
    EXPECT_TRUE(mem["mem_global_measured"].get<bool>());
    EXPECT_EQ(engine.build_baseline().files_processed, 0u);
}

TEST(EngineConfig, FromJson) {
    auto c = SparConfig::from_json({{"listen", {{"port", 9000}}},
                                    {"provider", {{"kind", "stub"}, {"dim", 64}}},
                                    {"workspace", {{"default_k", 7}, {"ttl_seconds", 60}}},
                                    {"interpreter", {{"top_m", 3}}}});
    EXPECT_EQ(c.port, 9000);
    EXPECT_EQ(c.provider.dim, 64u);
    EXPECT_EQ(c.workspace.default_k, 7u);
    EXPECT_EQ(c.workspace.ttl, std::chrono::seconds(60));
    EXPECT_EQ(c.interpreter.top_m, 3u);
    EXPECT_THROW(SparConfig::load("/nonexistent/spar.json"), Error);
}

TEST(EngineConfig, IndexSurvivesRestart) {
    auto dir = std::filesystem::temp_directory_path() / ("spar_engine_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto cfg = testing::test_config();
    cfg.index_path = dir / "index.journal";
    {
        Engine e(cfg);
        e.import_tree_numbers(testing::tree_entries());
        e.ingest(testing::corpus_records());
    }
    Engine reopened(cfg);
    EXPECT_EQ(reopened.index().file_count(), 12u);
    EXPECT_EQ(reopened.index().tag_count(), 5u);
    std::filesystem::remove_all(dir);
}

} // namespace
} // namespace spar
