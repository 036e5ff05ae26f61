// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: ingest files, import a tree-number taxonomy, run
// the service, print cost reports and run the synthetic benchmark.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "spar/eval/comparison.hpp"
#include "spar/service/api.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spar::Error(spar::ErrorCode::io_error, "cannot read " + path);
    return nlohmann::json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw spar::Error(spar::ErrorCode::io_error, "cannot write " + path);
    out << text << '\n';
}

// tree_number <TAB> external_id <TAB> label [<TAB> note]; '#' starts a comment.
std::vector<spar::TreeNumberEntry> read_tree_numbers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spar::Error(spar::ErrorCode::io_error, "cannot read " + path);
    std::vector<spar::TreeNumberEntry> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, '\t')) cols.push_back(c);
        if (cols.size() < 3)
            throw spar::Error(spar::ErrorCode::invalid_argument,
                              path + ":" + std::to_string(n) + ": expected tree_number, id and label");
        rows.push_back({cols[0], cols[1], cols[2], cols.size() > 3 ? cols[3] : std::string()});
    }
    return rows;
}

spar::SparConfig load_config(const std::string& path) {
    return path.empty() ? spar::SparConfig{} : spar::SparConfig::load(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPAR session-based retrieval engine"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "service config (JSON)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "add files from a JSONL manifest to the index");
    std::string manifest, index_path, corpus_root;
    ingest->add_option("manifest", manifest, "one {path, metadata, tags} object per line")->required();
    ingest->add_option("--index", index_path, "index journal (overrides config)");
    ingest->add_option("--corpus-root", corpus_root, "directory the paths are relative to");

    // tags import
    auto* tags = app.add_subcommand("tags", "tag hierarchy maintenance");
    tags->require_subcommand(1);
    auto* tags_import = tags->add_subcommand("import", "import tree-number rows (TSV)");
    std::string tsv;
    tags_import->add_option("file", tsv, "tree_number<TAB>id<TAB>label[<TAB>note]")->required();
    tags_import->add_option("--index", index_path, "index journal (overrides config)");
    auto* tags_show = tags->add_subcommand("show", "print the hierarchy as JSON");
    tags_show->add_option("--index", index_path, "index journal (overrides config)");

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    std::string host;
    int port = 0;
    serve->add_option("--host", host, "listen address (overrides config)");
    serve->add_option("--port", port, "listen port (overrides config)");

    // cost
    auto* cost = app.add_subcommand("cost", "cost reports");
    cost->require_subcommand(1);
    auto* cost_report = cost->add_subcommand("report", "fetch /cost/report from a running service");
    std::string url = "http://127.0.0.1:8080";
    cost_report->add_option("--url", url, "service base URL");
    auto* cost_be = cost->add_subcommand("break-even", "evaluate the build-cost comparison");
    std::string params_path;
    spar::CostModelParams params;
    double tolerance = 0.10;
    cost_be->add_option("--params", params_path, "JSON with N, M, T_proc, p, W, c_index, c_lookup, c_tag");
    cost_be->add_option("--N", params.n, "corpus size");
    cost_be->add_option("--M", params.m, "tag vocabulary size");
    cost_be->add_option("--T-proc", params.t_proc, "seconds per file");
    cost_be->add_option("--p", params.p, "selectivity");
    cost_be->add_option("--W", params.w, "concurrent workspaces");
    cost_be->add_option("--c-index", params.c_index, "seconds per insert per log2 n");
    cost_be->add_option("--c-lookup", params.c_lookup, "seconds per admitted file");
    cost_be->add_option("--c-tag", params.c_tag, "seconds per tag per log2 M");
    cost_be->add_option("--tolerance", tolerance, "relative band reported as a tie");

    // eval
    auto* eval = app.add_subcommand("eval", "synthetic benchmark");
    eval->require_subcommand(1);
    auto* eval_run = eval->add_subcommand("run", "compare SPAR with the global baseline");
    std::string spec_path, eval_cfg_path, out_path;
    std::vector<std::uint64_t> seeds;
    bool with_timings = true;
    eval_run->add_option("--spec", spec_path, "corpus spec (JSON); defaults otherwise");
    eval_run->add_option("--eval-config", eval_cfg_path, "evaluation config (JSON)");
    eval_run->add_option("--seeds", seeds, "corpus seeds (overrides the spec's)")->delimiter(',');
    eval_run->add_option("--out", out_path, "report file (stdout when omitted)");
    eval_run->add_flag("!--no-timings", with_timings, "omit wall-clock fields so reports compare byte for byte");

    // openapi
    auto* openapi = app.add_subcommand("openapi", "print the OpenAPI document");
    openapi->add_option("--out", out_path, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest || *tags) {
            auto cfg = load_config(config_path);
            if (!index_path.empty()) cfg.index_path = index_path;
            if (!corpus_root.empty()) cfg.corpus_root = corpus_root;
            if (!cfg.index_path) throw spar::Error(spar::ErrorCode::invalid_argument, "no index journal given");
            spar::Engine engine(cfg);
            if (*ingest) {
                std::ifstream in(manifest);
                if (!in) throw spar::Error(spar::ErrorCode::io_error, "cannot read " + manifest);
                spar::SystemClock clock;
                auto rep = spar::ingest_jsonl(engine.index(), in, &engine.files(), nullptr, clock, &engine.ledger());
                std::cout << rep.to_json().dump(2) << '\n';
                return rep.errors.empty() ? 0 : 2;
            }
            if (*tags_import) {
                auto offset = engine.import_tree_numbers(read_tree_numbers(tsv));
                std::cout << nlohmann::json{{"id_offset", offset}, {"tag_count", engine.index().tag_count()}}.dump(2)
                          << '\n';
                return 0;
            }
            std::cout << engine.hierarchy().dump(2) << '\n';
            return 0;
        }
        if (*serve) {
            auto cfg = load_config(config_path);
            if (!host.empty()) cfg.host = host;
            if (port) cfg.port = port;
            spar::Engine engine(cfg);
            spar::ServiceApi api(engine);
            httplib::Server server;
            api.mount(server);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << cfg.host << ':' << cfg.port << '\n';
            if (!server.listen(cfg.host, cfg.port)) {
                std::cerr << "cannot listen on " << cfg.host << ':' << cfg.port << '\n';
                return 1;
            }
            return 0;
        }
        if (*cost_report) {
            httplib::Client cli(url);
            auto res = cli.Get("/cost/report");
            if (!res) throw spar::Error(spar::ErrorCode::provider_unavailable, "no response from " + url);
            std::cout << nlohmann::json::parse(res->body).dump(2) << '\n';
            return res->status == 200 ? 0 : 1;
        }
        if (*cost_be) {
            auto p = params;
            if (!params_path.empty()) p = spar::CostModelParams::from_json(read_json(params_path));
            auto r = spar::break_even(p, tolerance);
            std::cout << nlohmann::json{{"params", p.to_json()}, {"result", r.to_json()}}.dump(2) << '\n';
            return 0;
        }
        if (*eval_run) {
            auto spec = spec_path.empty() ? spar::SyntheticCorpusSpec{}
                                          : spar::SyntheticCorpusSpec::from_json(read_json(spec_path));
            auto ecfg = eval_cfg_path.empty() ? spar::EvalConfig{} : spar::EvalConfig::from_json(read_json(eval_cfg_path));
            if (seeds.empty()) seeds.push_back(spec.seed);
            nlohmann::json runs = nlohmann::json::array();
            for (auto s : seeds) {
                spec.seed = s;
                auto rep = spar::run_comparison(spar::generate_corpus(spec), ecfg);
                runs.push_back(rep.to_json(with_timings));
            }
            write_text(out_path, (runs.size() == 1 ? runs[0] : nlohmann::json{{"runs", runs}}).dump(2));
            return 0;
        }
        if (*openapi) {
            write_text(out_path, spar::openapi_document().dump(2));
            return 0;
        }
    } catch (const spar::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
