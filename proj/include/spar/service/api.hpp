// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <list>
#include <map>
#include <mutex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "spar/service/engine.hpp"

namespace spar {

/// HTTP status for each module error. Codes that only the API layer raises
/// (bad JSON, unknown route, reused idempotency key) are mapped in-line.
constexpr int http_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::type_mismatch:
    case ErrorCode::empty_group:
    case ErrorCode::unparsable_date:
    case ErrorCode::malformed_tree_number:
    case ErrorCode::duplicate_tree_number:
    case ErrorCode::cycle_detected:
    case ErrorCode::dim_mismatch: return 400;
    case ErrorCode::unknown_file:
    case ErrorCode::unknown_tag:
    case ErrorCode::workspace_not_found: return 404;
    case ErrorCode::duplicate_path:
    case ErrorCode::duplicate_id:
    case ErrorCode::workspace_not_active:
    case ErrorCode::workspace_archived:
    case ErrorCode::illegal_transition:
    case ErrorCode::empty_workspace_index: return 409;
    case ErrorCode::empty_filter:
    case ErrorCode::empty_vocabulary: return 422;
    case ErrorCode::provider_unavailable: return 503;
    case ErrorCode::ground_truth_mismatch:
    case ErrorCode::io_error:
    case ErrorCode::corrupt_index: return 500;
    }
    return 500;
}

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Routes requests onto an Engine. handle() is transport-free so tests and
/// the in-process CLI can drive it; mount() binds it to an httplib server.
class ServiceApi {
public:
    explicit ServiceApi(Engine& engine) : engine_(engine) {}

    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body = {},
                       const std::map<std::string, std::string>& query = {},
                       const std::string& idempotency_key = {}) {
        const bool mutating = method == "POST" || method == "PATCH" || method == "DELETE";
        std::string replay_key;
        if (mutating && !idempotency_key.empty()) {
            replay_key = method + ' ' + path + ' ' + idempotency_key;
            std::lock_guard lock(idem_mu_);
            auto it = idem_.find(replay_key);
            if (it != idem_.end()) {
                if (it->second.request_body != body)
                    return finish(error_body(409, "idempotency_key_reused",
                                             "the key was already used with a different request body"));
                auto r = it->second.response;
                r.body["idempotent_replay"] = true;
                return r;
            }
        }
        ApiResponse r;
        try {
            r = route(method, path, body, query);
        } catch (const Error& e) {
            r = error_body(http_status(e.code()), std::string(code_name(e.code())), e.message(), e.details());
        } catch (const nlohmann::json::exception& e) {
            r = error_body(400, "invalid_json", e.what());
        }
        r = finish(std::move(r));
        if (!replay_key.empty() && r.status < 500) remember(replay_key, body, r);
        return r;
    }

    void mount(httplib::Server& server) {
        auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> q;
            for (const auto& [k, v] : req.params) q[k] = v;
            auto r = handle(req.method, req.path, req.body, q, req.get_header_value("Idempotency-Key"));
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        const std::string any = R"(/.*)";
        server.Get(any, bridge);
        server.Post(any, bridge);
        server.Patch(any, bridge);
        server.Delete(any, bridge);
    }

private:
    struct Remembered {
        std::string request_body;
        ApiResponse response;
        std::list<std::string>::iterator pos;
    };

    static ApiResponse error_body(int status, const std::string& code, const std::string& message,
                                  const std::string& details = {}) {
        nlohmann::json d;
        if (!details.empty()) {
            auto parsed = nlohmann::json::parse(details, nullptr, false);
            d = parsed.is_discarded() ? nlohmann::json(details) : parsed;
        }
        return {status, {{"error", {{"code", code}, {"message", message}, {"details", d}}}}};
    }

    ApiResponse finish(ApiResponse r) const {
        if (!r.body.is_object()) r.body = {{"result", r.body}};
        r.body["index_version"] = engine_.index_version();
        return r;
    }

    void remember(const std::string& key, const std::string& body, const ApiResponse& r) {
        std::lock_guard lock(idem_mu_);
        order_.push_front(key);
        idem_[key] = {body, r, order_.begin()};
        while (idem_.size() > engine_.config().idempotency_capacity && !order_.empty()) {
            idem_.erase(order_.back());
            order_.pop_back();
        }
    }

    static std::vector<std::string> split(const std::string& path) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : path) {
            if (c == '/') {
                if (!cur.empty()) parts.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) parts.push_back(std::move(cur));
        return parts;
    }

    template <class Id> static Id parse_id(const std::string& s, const char* what) {
        if (s.empty() || s.size() > 19 || s.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorCode::invalid_argument, std::string("malformed ") + what + " id '" + s + "'");
        return Id(std::stoull(s));
    }

    static std::size_t parse_count(const std::map<std::string, std::string>& q, const char* key, std::size_t dflt) {
        auto it = q.find(key);
        if (it == q.end()) return dflt;
        if (it->second.empty() || it->second.size() > 12 || it->second.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be a non-negative integer");
        return std::stoull(it->second);
    }

    static nlohmann::json parse_body(const std::string& body) {
        if (body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
        return nlohmann::json::parse(body);
    }

    static std::string require_string(const nlohmann::json& j, const char* key) {
        if (!j.is_object() || !j.contains(key) || !j[key].is_string())
            throw Error(ErrorCode::invalid_argument, std::string("body needs a string '") + key + "'");
        return j[key].get<std::string>();
    }

    ApiResponse route(const std::string& method, const std::string& path, const std::string& raw,
                      const std::map<std::string, std::string>& query) {
        auto p = split(path);
        auto not_found = [&] { return error_body(404, "route_not_found", method + " " + path); };
        if (p.empty()) return not_found();

        if (p[0] == "workspaces") {
            if (p.size() == 1) {
                if (method == "POST") {
                    auto j = parse_body(raw);
                    auto name = j.value("name", std::string("workspace"));
                    return {201, engine_.create_workspace(name).to_json()};
                }
                if (method == "GET") {
                    nlohmann::json ws = nlohmann::json::array();
                    for (const auto& w : engine_.workspaces().list()) ws.push_back(w.to_json());
                    return {200, {{"workspaces", ws}}};
                }
                return not_found();
            }
            auto id = parse_id<WorkspaceId>(p[1], "workspace");
            if (p.size() == 2) {
                if (method == "GET") return {200, engine_.workspace_detail(id)};
                if (method == "DELETE") {
                    engine_.terminate(id);
                    return {200, {{"workspace_id", id}, {"status", "terminated"}}};
                }
                return not_found();
            }
            if (p.size() == 3 && method == "POST") {
                if (p[2] == "retrieve") {
                    auto j = parse_body(raw);
                    auto rep = engine_.retrieve(id, require_string(j, "prompt"));
                    auto out = rep.to_json();
                    out["workspace_id"] = id;
                    return {200, out};
                }
                if (p[2] == "query") {
                    auto j = parse_body(raw);
                    std::optional<std::size_t> k;
                    if (j.contains("k")) {
                        if (!j["k"].is_number_unsigned()) throw Error(ErrorCode::invalid_argument, "'k' must be a positive integer");
                        k = j["k"].get<std::size_t>();
                    }
                    auto out = engine_.query(id, require_string(j, "question"), k).to_json();
                    out["workspace_id"] = id;
                    return {200, out};
                }
                if (p[2] == "archive") return {200, engine_.archive(id).to_json()};
                if (p[2] == "reactivate") {
                    auto out = engine_.reactivate(id).to_json();
                    out["workspace_id"] = id;
                    return {200, out};
                }
            }
            if (p.size() == 3 && method == "GET" && p[2] == "cost") return {200, engine_.workspace_cost(id)};
            return not_found();
        }

        if (p[0] == "tags") {
            if (p.size() == 2 && p[1] == "hierarchy" && method == "GET") {
                std::optional<WorkspaceId> hl;
                if (auto it = query.find("highlight"); it != query.end() && !it->second.empty())
                    hl = parse_id<WorkspaceId>(it->second, "workspace");
                return {200, engine_.hierarchy(hl)};
            }
            if (p.size() == 2 && p[1] == "tree-numbers" && method == "POST") {
                auto j = parse_body(raw);
                if (!j.contains("rows") || !j["rows"].is_array())
                    throw Error(ErrorCode::invalid_argument, "body needs an array 'rows'");
                std::vector<TreeNumberEntry> rows;
                for (const auto& r : j["rows"])
                    rows.push_back({require_string(r, "tree_number"), require_string(r, "external_id"),
                                    require_string(r, "label"), r.value("note", std::string())});
                auto offset = engine_.import_tree_numbers(rows);
                return {201, {{"id_offset", offset}, {"tag_count", engine_.index().tag_count()}}};
            }
            return not_found();
        }

        if (p[0] == "cost" && p.size() == 2 && p[1] == "report" && method == "GET")
            return {200, engine_.cost_report()};

        if (p[0] == "files") {
            if (p.size() == 1 && method == "POST") {
                auto j = parse_body(raw);
                const auto& recs = j.is_object() && j.contains("files") ? j["files"] : j;
                auto rep = engine_.ingest(recs);
                return {rep.errors.empty() ? 201 : 207, rep.to_json()};
            }
            if (p.size() == 1 && method == "GET") {
                auto offset = parse_count(query, "offset", 0);
                auto limit = parse_count(query, "limit", 100);
                auto page = engine_.list_files(offset, limit);
                nlohmann::json fs = nlohmann::json::array();
                for (const auto& f : page.files) fs.push_back(f.to_json());
                nlohmann::json out{{"files", fs}, {"total", page.total}, {"offset", page.offset}, {"limit", page.limit}};
                auto next = page.offset + page.files.size();
                out["next_offset"] = next < page.total ? nlohmann::json(next) : nlohmann::json();
                return {200, out};
            }
            if (p.size() == 2 && method == "PATCH") {
                auto id = parse_id<FileId>(p[1], "file");
                return {200, engine_.update_file(id, parse_body(raw)).to_json()};
            }
            if (p.size() == 2 && method == "GET") {
                auto id = parse_id<FileId>(p[1], "file");
                auto rec = engine_.index().file(id);
                if (!rec) throw Error(ErrorCode::unknown_file, "unknown file id " + id.str());
                return {200, rec->to_json()};
            }
            return not_found();
        }
        return not_found();
    }

    Engine& engine_;
    std::mutex idem_mu_;
    std::map<std::string, Remembered> idem_;
    std::list<std::string> order_;
};

/// The API surface as an OpenAPI 3 document.
inline nlohmann::json openapi_document() {
    using nlohmann::json;
    auto ref = [](const std::string& name) { return json{{"$ref", "#/components/schemas/" + name}}; };
    auto ok = [&](const std::string& desc, const std::string& schema) {
        return json{{"description", desc}, {"content", {{"application/json", {{"schema", ref(schema)}}}}}};
    };
    auto err = [&](const std::string& desc) { return ok(desc, "ApiError"); };
    auto body = [&](const std::string& schema) {
        return json{{"required", true}, {"content", {{"application/json", {{"schema", ref(schema)}}}}}};
    };
    auto ws_param = json{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "integer"}}}};
    auto idem = json{{"name", "Idempotency-Key"}, {"in", "header"}, {"required", false}, {"schema", {{"type", "string"}}}};
    auto obj = [](json props, std::vector<std::string> required = {}) {
        json j{{"type", "object"}, {"properties", std::move(props)}};
        if (!required.empty()) j["required"] = required;
        return j;
    };
    auto any_obj = json{{"type", "object"}, {"additionalProperties", true}};
    auto tag_ref = json{{"oneOf", json::array({json{{"type", "integer"}}, json{{"type", "string"}}})}};
    auto with_version = [&](json props) {
        props["index_version"] = {{"type", "integer"}};
        return json{{"type", "object"}, {"properties", std::move(props)}, {"additionalProperties", true}};
    };

    json schemas{
        {"ApiError",
         obj({{"error", obj({{"code", {{"type", "string"}}},
                             {"message", {{"type", "string"}}},
                             {"details", {}}},
                            {"code", "message"})},
              {"index_version", {{"type", "integer"}}}},
             {"error", "index_version"})},
        {"CreateWorkspace", obj({{"name", {{"type", "string"}}}})},
        {"RetrieveRequest", obj({{"prompt", {{"type", "string"}}}}, {"prompt"})},
        {"QueryRequest", obj({{"question", {{"type", "string"}}}, {"k", {{"type", "integer"}, {"minimum", 1}}}}, {"question"})},
        {"TreeNumberImport",
         obj({{"rows", {{"type", "array"},
                        {"items", obj({{"tree_number", {{"type", "string"}}},
                                       {"external_id", {{"type", "string"}}},
                                       {"label", {{"type", "string"}}}},
                                      {"tree_number", "external_id", "label"})}}}},
             {"rows"})},
        {"IngestRecord",
         obj({{"path", {{"type", "string"}}},
              {"metadata", any_obj},
              {"tags", json{{"type", "array"}, {"items", tag_ref}}},
              {"content", {{"type", "string"}}},
              {"content_hash", {{"type", "string"}}}},
             {"path"})},
        {"IngestRequest",
         {{"oneOf", json::array({{{"type", "array"}, {"items", ref("IngestRecord")}},
                                 obj({{"files", {{"type", "array"}, {"items", ref("IngestRecord")}}}}, {"files"})})}}},
        {"FilePatch",
         obj({{"content", {{"type", "string"}}},
              {"content_hash", {{"type", "string"}}},
              {"rehash", {{"type", "boolean"}}},
              {"metadata", any_obj}})},
        {"WorkspaceInfo",
         with_version({{"workspace_id", {{"type", "integer"}}},
                       {"name", {{"type", "string"}}},
                       {"status", {{"type", "string"}, {"enum", {"active", "archived", "terminated"}}}},
                       {"file_count", {{"type", "integer"}}},
                       {"index_items", {{"type", "integer"}}},
                       {"queries", {{"type", "integer"}}}})},
        {"WorkspaceList", with_version({{"workspaces", {{"type", "array"}, {"items", ref("WorkspaceInfo")}}}})},
        {"WorkspaceDetail",
         with_version({{"workspace_id", {{"type", "integer"}}},
                       {"files", {{"type", "array"}, {"items", any_obj}}},
                       {"thread", {{"type", "array"}, {"items", any_obj}}},
                       {"history", {{"type", "array"}, {"items", any_obj}}},
                       {"filter_spec", any_obj},
                       {"stats", any_obj}})},
        {"BuildReport",
         with_version({{"workspace_id", {{"type", "integer"}}},
                       {"n_candidates", {{"type", "integer"}}},
                       {"n_filtered", {{"type", "integer"}}},
                       {"filter_trace", any_obj},
                       {"filter_spec", any_obj}})},
        {"QueryResult",
         with_version({{"workspace_id", {{"type", "integer"}}},
                       {"question", {{"type", "string"}}},
                       {"k", {{"type", "integer"}}},
                       {"hits", {{"type", "array"}, {"items", any_obj}}},
                       {"answer", {{"type", "string"}}},
                       {"distance_evals", {{"type", "integer"}}}})},
        {"ArchiveRecord", with_version({{"format", {{"type", "string"}}}, {"workspace_id", {{"type", "integer"}}}})},
        {"Terminated", with_version({{"workspace_id", {{"type", "integer"}}}, {"status", {{"type", "string"}}}})},
        {"Hierarchy",
         with_version({{"nodes", {{"type", "array"}, {"items", any_obj}}},
                       {"roots", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
                       {"tag_version", {{"type", "integer"}}},
                       {"highlighted_paths", {{"type", "array"}}}})},
        {"TreeNumberImportResult", with_version({{"id_offset", {{"type", "integer"}}}, {"tag_count", {{"type", "integer"}}}})},
        {"CostReport", with_version({{"ledger", any_obj}, {"memory", any_obj}, {"measured_constants", any_obj}, {"break_even", any_obj}})},
        {"WorkspaceCost", with_version({{"workspace_id", {{"type", "integer"}}}, {"session", any_obj}, {"amortized", any_obj}})},
        {"IngestReport", with_version({{"added", {{"type", "integer"}}}, {"file_ids", {{"type", "array"}}}, {"errors", {{"type", "array"}}}})},
        {"FileRecord",
         with_version({{"file_id", {{"type", "integer"}}},
                       {"file_path", {{"type", "string"}}},
                       {"tag_ids", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
                       {"metadata", any_obj},
                       {"content_hash", {{"type", "string"}}}})},
        {"FilePage",
         with_version({{"files", {{"type", "array"}, {"items", ref("FileRecord")}}},
                       {"total", {{"type", "integer"}}},
                       {"offset", {{"type", "integer"}}},
                       {"limit", {{"type", "integer"}}},
                       {"next_offset", {{"type", {"integer", "null"}}}}})},
    };

    json paths{
        {"/workspaces",
         {{"post", {{"summary", "Create a workspace"}, {"parameters", {idem}}, {"requestBody", body("CreateWorkspace")},
                    {"responses", {{"201", ok("Created", "WorkspaceInfo")}, {"400", err("Bad request")}}}}},
          {"get", {{"summary", "List workspaces"}, {"responses", {{"200", ok("Workspaces", "WorkspaceList")}}}}}}},
        {"/workspaces/{id}",
         {{"get", {{"summary", "Workspace detail"}, {"parameters", {ws_param}},
                   {"responses", {{"200", ok("Detail", "WorkspaceDetail")}, {"404", err("Unknown workspace")}}}}},
          {"delete", {{"summary", "Terminate a workspace"}, {"parameters", {ws_param, idem}},
                      {"responses", {{"200", ok("Terminated", "Terminated")}, {"404", err("Unknown workspace")},
                                     {"409", err("Illegal transition")}}}}}}},
        {"/workspaces/{id}/retrieve",
         {{"post", {{"summary", "Build or update the workspace from a retrieval prompt"},
                    {"parameters", {ws_param, idem}}, {"requestBody", body("RetrieveRequest")},
                    {"responses", {{"200", ok("Build report", "BuildReport")}, {"404", err("Unknown workspace")},
                                   {"409", err("Workspace archived or not active")}, {"422", err("Empty filter")}}}}}}},
        {"/workspaces/{id}/query",
         {{"post", {{"summary", "Answer a question from the workspace index"}, {"parameters", {ws_param, idem}},
                    {"requestBody", body("QueryRequest")},
                    {"responses", {{"200", ok("Answer", "QueryResult")}, {"404", err("Unknown workspace")},
                                   {"409", err("Workspace archived or empty")}}}}}}},
        {"/workspaces/{id}/archive",
         {{"post", {{"summary", "Archive a workspace"}, {"parameters", {ws_param, idem}},
                    {"responses", {{"200", ok("Archive record", "ArchiveRecord")}, {"404", err("Unknown workspace")},
                                   {"409", err("Illegal transition")}}}}}}},
        {"/workspaces/{id}/reactivate",
         {{"post", {{"summary", "Reactivate an archived workspace"}, {"parameters", {ws_param, idem}},
                    {"responses", {{"200", ok("Build report", "BuildReport")}, {"404", err("Unknown workspace")},
                                   {"409", err("Illegal transition")}}}}}}},
        {"/workspaces/{id}/cost",
         {{"get", {{"summary", "Session cost decomposition"}, {"parameters", {ws_param}},
                   {"responses", {{"200", ok("Cost", "WorkspaceCost")}, {"404", err("Unknown workspace")}}}}}}},
        {"/tags/hierarchy",
         {{"get", {{"summary", "Tag hierarchy, optionally highlighted for a workspace"},
                   {"parameters", {{{"name", "highlight"}, {"in", "query"}, {"required", false}, {"schema", {{"type", "integer"}}}}}},
                   {"responses", {{"200", ok("Hierarchy", "Hierarchy")}, {"404", err("Unknown workspace")}}}}}}},
        {"/tags/tree-numbers",
         {{"post", {{"summary", "Import a hierarchy from tree-number rows"}, {"parameters", {idem}},
                    {"requestBody", body("TreeNumberImport")},
                    {"responses", {{"201", ok("Imported", "TreeNumberImportResult")}, {"400", err("Malformed rows")}}}}}}},
        {"/cost/report",
         {{"get", {{"summary", "Corpus-wide cost, memory and break-even report"},
                   {"responses", {{"200", ok("Report", "CostReport")}}}}}}},
        {"/files",
         {{"post", {{"summary", "Bulk ingest files"}, {"parameters", {idem}}, {"requestBody", body("IngestRequest")},
                    {"responses", {{"201", ok("All records added", "IngestReport")},
                                   {"207", ok("Some records rejected", "IngestReport")}, {"400", err("Bad request")}}}}},
          {"get", {{"summary", "List files"},
                   {"parameters", {{{"name", "offset"}, {"in", "query"}, {"schema", {{"type", "integer"}}}},
                                   {{"name", "limit"}, {"in", "query"}, {"schema", {{"type", "integer"}}}}}},
                   {"responses", {{"200", ok("Page", "FilePage")}, {"400", err("Bad paging")}}}}}}},
        {"/files/{id}",
         {{"get", {{"summary", "One file record"}, {"parameters", {ws_param}},
                   {"responses", {{"200", ok("File", "FileRecord")}, {"404", err("Unknown file")}}}}},
          {"patch", {{"summary", "Update a file's content or metadata"}, {"parameters", {ws_param, idem}},
                     {"requestBody", body("FilePatch")},
                     {"responses", {{"200", ok("Updated", "FileRecord")}, {"404", err("Unknown file")},
                                    {"400", err("Bad request")}}}}}}},
    };

    return {{"openapi", "3.0.3"},
            {"info", {{"title", "SPAR service"}, {"version", "1.0.0"}}},
            {"paths", paths},
            {"components", {{"schemas", schemas}}}};
}

} // namespace spar
