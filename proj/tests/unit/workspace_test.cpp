// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "spar/core/hash.hpp"
#include "spar/workspace/manager.hpp"

namespace spar {
namespace {

std::string content_of(std::size_t i) {
    return "shared clinical note body with routine wording zq" + std::to_string(i) + "a zq" + std::to_string(i) +
           "b zq" + std::to_string(i) + "c";
}

// 70 files: "alpha" on 0..49, "beta" on 20..69, so the two tag sets overlap
// on 30 files.
struct Env {
    MetadataIndex index;
    InMemoryFileSource files;
    std::shared_ptr<StubEmbedder> embedder = std::make_shared<StubEmbedder>();
    InterpreterSource interpreters{index, embedder};
    EmbeddingCache cache;
    CostLedger ledger;
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(make_date(2025, 1, 1));
    std::vector<FileId> ids;
    TagId alpha, beta;
    WorkspaceConfig cfg;
    std::unique_ptr<WorkspaceManager> mgr;

    explicit Env(std::optional<std::filesystem::path> archive_dir = std::nullopt) {
        cache.attach(index);
        alpha = index.add_tag("alpha");
        beta = index.add_tag("beta");
        for (std::size_t i = 0; i < 70; ++i) {
            NewFile f;
            f.path = "notes/f" + std::to_string(i) + ".txt";
            if (i < 50) f.tags.insert(alpha);
            if (i >= 20) f.tags.insert(beta);
            f.metadata.emplace("year", MetadataValue::integer(2010 + std::int64_t(i % 10)));
            f.content_hash = sha256_hex(content_of(i));
            files.put(f.path, content_of(i));
            ids.push_back(index.add_file(std::move(f)));
        }
        cfg.archive_dir = archive_dir;
        mgr = make_manager();
    }

    std::unique_ptr<WorkspaceManager> make_manager() {
        return std::make_unique<WorkspaceManager>(index, files, interpreters, embedder,
                                                  std::make_shared<StubAnswerGenerator>(), cache, ledger, clock,
                                                  GateChain::defaults(), cfg);
    }

    void modify(std::size_t i, const std::string& text) {
        auto rec = index.file(ids[i]);
        files.put(rec->path, text);
        index.update_file(ids[i], sha256_hex(text));
    }
};

std::vector<FileId> hit_files(const QueryResult& r) {
    std::vector<FileId> out;
    for (const auto& h : r.hits) out.push_back(h.file);
    return out;
}

TEST(Workspace, ColdBuildMissesEveryFile) {
    Env env;
    auto id = env.mgr->create("a").id;
    auto r = env.mgr->build_update_dtb(id, "alpha");
    EXPECT_EQ(r.n_candidates, 50u);
    EXPECT_EQ(r.n_filtered, 50u);
    EXPECT_EQ(r.cache_misses, 50u);
    EXPECT_EQ(r.cache_hits, 0u);
    EXPECT_EQ(r.files_processed, 50u);
    EXPECT_EQ(r.added.size(), 50u);
    EXPECT_EQ(r.index_size, 50u);
    EXPECT_EQ(env.mgr->file_list(id).size(), 50u);
}

TEST(Workspace, OverlappingWorkspaceReusesCachedEmbeddings) {
    Env env;
    env.mgr->build_update_dtb(env.mgr->create("a").id, "alpha");
    auto r = env.mgr->build_update_dtb(env.mgr->create("b").id, "beta");
    EXPECT_EQ(r.n_filtered, 50u);
    EXPECT_EQ(r.cache_hits, 30u);
    EXPECT_EQ(r.cache_misses, 20u);
    EXPECT_DOUBLE_EQ(double(r.cache_hits) / double(r.n_filtered), 0.60);
    EXPECT_EQ(r.files_processed, 20u);
}

TEST(Workspace, ModifiedFileIsReembeddedOnce) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    env.modify(7, "rewritten text about something else entirely");
    auto r = env.mgr->build_update_dtb(id, "alpha");
    EXPECT_EQ(r.changed, std::vector<FileId>{env.ids[7]});
    EXPECT_EQ(r.files_processed, 1u);
    EXPECT_EQ(r.cache_misses, 1u);
    EXPECT_EQ(r.unchanged, 49u);
    EXPECT_EQ(r.index_size, 50u);
}

TEST(Workspace, RebuildWithSamePromptIsNoOp) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto r = env.mgr->build_update_dtb(id, "alpha");
    EXPECT_EQ(r.unchanged, 50u);
    EXPECT_EQ(r.index_inserts, 0u);
    EXPECT_EQ(r.files_processed, 0u);
    EXPECT_EQ(r.cache_hits + r.cache_misses, 0u);
}

TEST(Workspace, NarrowingPromptRemovesFiles) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto r = env.mgr->build_update_dtb(id, "alpha in 2013");
    EXPECT_EQ(r.n_filtered, 5u);
    EXPECT_EQ(r.removed.size(), 45u);
    EXPECT_EQ(r.index_size, 5u);
    EXPECT_EQ(env.mgr->index_items(id), 5u);
}

TEST(Workspace, RareTokenRanksOwnFileFirst) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto r = env.mgr->query(id, "zq37a zq37b zq37c", 5);
    ASSERT_FALSE(r.hits.empty());
    EXPECT_EQ(r.hits[0].file, env.ids[37]);
    EXPECT_EQ(r.hits[0].path, "notes/f37.txt");
    EXPECT_NE(r.answer.find("notes/f37.txt"), std::string::npos);
    EXPECT_EQ(r.index_version, env.index.version());
}

TEST(Workspace, HitsStayInsideFileList) {
    Env env;
    auto id = env.mgr->create("b").id;
    env.mgr->build_update_dtb(id, "beta");
    std::set<FileId> allowed;
    for (const auto& f : env.mgr->file_list(id)) allowed.insert(f.file);
    for (const char* q : {"zq3a zq3b", "zq45a", "clinical note", "zq69c"}) {
        for (auto f : hit_files(env.mgr->query(id, q, 10))) EXPECT_TRUE(allowed.count(f)) << q;
    }
}

TEST(Workspace, EmptyWorkspaceCannotBeQueried) {
    Env env;
    auto id = env.mgr->create("a").id;
    auto expect_empty = [&] {
        try {
            env.mgr->query(id, "anything");
            FAIL() << "expected empty_workspace_index";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::empty_workspace_index);
        }
    };
    expect_empty();
    auto r = env.mgr->build_update_dtb(id, "alpha from 1990 to 1991");
    EXPECT_EQ(r.n_filtered, 0u);
    expect_empty();
}

TEST(Workspace, QueriesReuseOneIndex) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto q1 = env.mgr->query(id, "zq1a");
    auto q2 = env.mgr->query(id, "zq2a");
    EXPECT_EQ(env.mgr->index_builds(id), 1u);
    EXPECT_EQ(q2.index_build_distance_evals, 0u);
    EXPECT_EQ(env.mgr->stats(id).queries, 2u);
    EXPECT_EQ(env.mgr->thread(id).size(), 2u);
    auto o = env.mgr->amortized_query_overhead(id);
    EXPECT_EQ(o.queries, 2u);
}

TEST(Workspace, ArchiveDropsVectorsAndReactivationRestoresResults) {
    auto dir = std::filesystem::temp_directory_path() / ("spar_ws_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    Env env(dir);
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto before_files = env.mgr->file_list(id);
    auto before_hits = hit_files(env.mgr->query(id, "zq12a zq12b", 5));
    EXPECT_GT(env.mgr->resident_vector_bytes(id), 0u);

    auto rec = env.mgr->archive(id);
    EXPECT_EQ(env.mgr->resident_vector_bytes(id), 0u);
    EXPECT_EQ(env.mgr->info(id).status, WorkspaceStatus::archived);
    EXPECT_EQ(rec.to_json()["format"], "spar-archive-1");
    auto path = dir / (std::to_string(id.value) + ".json");
    ASSERT_TRUE(std::filesystem::exists(path));
    std::ifstream in(path);
    auto on_disk = ArchiveRecord::from_json(nlohmann::json::parse(in));
    EXPECT_EQ(on_disk.canonical(), rec.canonical());
    EXPECT_THROW(env.mgr->query(id, "zq12a"), Error);

    auto r = env.mgr->reactivate(id);
    EXPECT_EQ(r.cache_hits, 50u);
    EXPECT_EQ(r.files_processed, 0u);
    EXPECT_TRUE(r.changed.empty());
    EXPECT_EQ(env.mgr->file_list(id), before_files);
    EXPECT_EQ(hit_files(env.mgr->query(id, "zq12a zq12b", 5)), before_hits);
    EXPECT_FALSE(std::filesystem::exists(path));
    std::filesystem::remove_all(dir);
}

TEST(Workspace, ReactivationFlagsFilesChangedWhileArchived) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    env.mgr->archive(id);
    env.modify(5, "new content for file five");
    auto r = env.mgr->reactivate(id);
    EXPECT_EQ(r.changed, std::vector<FileId>{env.ids[5]});
    EXPECT_EQ(r.files_processed, 1u);
}

TEST(Workspace, RestoreIntoFreshManager) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    auto before = hit_files(env.mgr->query(id, "zq40a", 5));
    auto rec = env.mgr->archive(id);

    auto other = env.make_manager();
    auto info = other->restore(ArchiveRecord::from_json(nlohmann::json::parse(rec.canonical())));
    EXPECT_EQ(info.status, WorkspaceStatus::archived);
    EXPECT_THROW(other->restore(rec), Error);
    other->reactivate(id);
    EXPECT_EQ(hit_files(other->query(id, "zq40a", 5)), before);
    EXPECT_EQ(other->create("next").id.value, id.value + 1);
}

TEST(Workspace, ExpiryNeedsStrictlyLongerIdleTime) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    env.clock->advance(std::chrono::days(14));
    EXPECT_TRUE(env.mgr->expire_inactive().empty());
    EXPECT_EQ(env.mgr->info(id).status, WorkspaceStatus::active);
    env.clock->advance(std::chrono::seconds(1));
    EXPECT_EQ(env.mgr->expire_inactive(), std::vector<WorkspaceId>{id});
    EXPECT_EQ(env.mgr->info(id).status, WorkspaceStatus::archived);
    EXPECT_EQ(env.mgr->active_count(), 0u);
}

TEST(Workspace, QueryRefreshesIdleClock) {
    Env env;
    auto id = env.mgr->create("a").id;
    env.mgr->build_update_dtb(id, "alpha");
    env.clock->advance(std::chrono::days(10));
    env.mgr->query(id, "zq1a");
    env.clock->advance(std::chrono::days(10));
    EXPECT_TRUE(env.mgr->expire_inactive().empty());
}

TEST(Workspace, IllegalTransitionsAndTermination) {
    Env env;
    auto id = env.mgr->create("a").id;
    auto code = [](auto&& fn) -> std::optional<ErrorCode> {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return std::nullopt;
    };
    EXPECT_EQ(code([&] { env.mgr->reactivate(id); }), ErrorCode::illegal_transition);
    env.mgr->archive(id);
    EXPECT_EQ(code([&] { env.mgr->archive(id); }), ErrorCode::illegal_transition);
    EXPECT_EQ(code([&] { env.mgr->build_update_dtb(id, "alpha"); }), ErrorCode::workspace_archived);
    env.mgr->terminate(id);
    EXPECT_EQ(code([&] { env.mgr->info(id); }), ErrorCode::workspace_not_found);
    EXPECT_EQ(code([&] { env.mgr->terminate(id); }), ErrorCode::workspace_not_found);
}

TEST(Workspace, SessionCostReportAddsUp) {
    Env env;
    auto id = env.mgr->create("a").id;
    auto b = env.mgr->build_update_dtb(id, "alpha");
    env.mgr->query(id, "zq1a");
    auto c = env.mgr->session_cost_report(id);
    EXPECT_EQ(c.files_processed, 50u);
    EXPECT_EQ(c.n_filtered, 50u);
    EXPECT_EQ(c.index_inserts, b.index_inserts);
    EXPECT_EQ(c.index_build_distance_evals, b.distance_evals);
    EXPECT_EQ(c.queries, 1u);
    EXPECT_GT(c.tag_distance_evals, 0u);
}

} // namespace
} // namespace spar
