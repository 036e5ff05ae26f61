// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

// A small cardiology/diabetes corpus shared by the engine and API tests.

#pragma once

#include <string>

#include <json.hpp>

#include "spar/service/engine.hpp"

namespace spar::testing {

inline nlohmann::json tree_rows() {
    return nlohmann::json::array({
        {{"tree_number", "C14"}, {"external_id", "D002318"}, {"label", "Cardiovascular Diseases"}},
        {{"tree_number", "C14.280"}, {"external_id", "D006331"}, {"label", "Heart Diseases"}},
        {{"tree_number", "C14.280.067"}, {"external_id", "D001145"}, {"label", "Arrhythmias, Cardiac"}},
        {{"tree_number", "C18"}, {"external_id", "D009750"}, {"label", "Nutritional and Metabolic Diseases"}},
        {{"tree_number", "C18.452"}, {"external_id", "D003920"}, {"label", "Diabetes Mellitus"}},
    });
}

inline std::vector<TreeNumberEntry> tree_entries() {
    std::vector<TreeNumberEntry> out;
    for (const auto& r : tree_rows())
        out.push_back({r["tree_number"].get<std::string>(), r["external_id"].get<std::string>(),
                       r["label"].get<std::string>(), ""});
    return out;
}

/// Twelve files: four per tag (Heart Diseases, Arrhythmias, Diabetes), years
/// 2018..2021, each with a unique token "zq<name>".
inline nlohmann::json corpus_records() {
    nlohmann::json out = nlohmann::json::array();
    const char* groups[][2] = {{"h", "D006331"}, {"a", "D001145"}, {"d", "D003920"}};
    for (const auto& g : groups) {
        for (int i = 0; i < 4; ++i) {
            std::string name = std::string(g[0]) + std::to_string(i);
            out.push_back({{"path", "notes/" + name + ".txt"},
                           {"content", "routine clinical summary for patient record zq" + name + " with plain wording"},
                           {"tags", {g[1]}},
                           {"metadata", {{"year", 2018 + i}, {"format", i % 2 ? "pdf" : "txt"}}}});
        }
    }
    return out;
}

inline SparConfig test_config() {
    SparConfig c;
    c.provider.dim = 256;
    return c;
}

} // namespace spar::testing
