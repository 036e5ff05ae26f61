// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spar/metadata/metadata_index.hpp"
#include "spar/text/tokenize.hpp"

namespace spar {

/// Admission check applied to filter candidates before any processing.
/// `content` is null when the file could not be read.
class FileGate {
public:
    virtual ~FileGate() = default;
    virtual std::string name() const = 0;
    virtual std::optional<std::string> reject(const FileRecord& file, const std::string* content) const = 0;
};

class ReadableGate final : public FileGate {
public:
    std::string name() const override { return "readable"; }
    std::optional<std::string> reject(const FileRecord&, const std::string* content) const override {
        if (!content) return "file could not be read";
        return std::nullopt;
    }
};

class NonEmptyTextGate final : public FileGate {
public:
    std::string name() const override { return "non_empty_text"; }
    std::optional<std::string> reject(const FileRecord&, const std::string* content) const override {
        if (content && tokenize(*content).empty()) return "no text content";
        return std::nullopt;
    }
};

/// Contents are treated as already-extracted text whatever the extension.
class ExtensionGate final : public FileGate {
public:
    explicit ExtensionGate(std::set<std::string> allowed = {"txt", "md", "pdf", "doc", "docx", "html", "htm",
                                                            "csv", "json", "xml"})
        : allowed_(std::move(allowed)) {}

    std::string name() const override { return "supported_extension"; }
    std::optional<std::string> reject(const FileRecord& file, const std::string*) const override {
        auto ext = to_lower(std::filesystem::path(file.path).extension().string());
        if (!ext.empty()) ext.erase(0, 1);
        if (!allowed_.count(ext)) return "unsupported extension '" + ext + "'";
        return std::nullopt;
    }

private:
    std::set<std::string> allowed_;
};

struct GateRejection {
    FileId file;
    std::string gate;
    std::string reason;
};

/// Ordered gates; the first rejecting gate decides.
class GateChain {
public:
    GateChain() = default;
    explicit GateChain(std::vector<std::shared_ptr<FileGate>> gates) : gates_(std::move(gates)) {}

    static GateChain defaults() {
        return GateChain({std::make_shared<ExtensionGate>(), std::make_shared<ReadableGate>(),
                          std::make_shared<NonEmptyTextGate>()});
    }

    std::optional<GateRejection> evaluate(const FileRecord& file, const std::string* content) const {
        for (const auto& g : gates_)
            if (auto why = g->reject(file, content)) return GateRejection{file.id, g->name(), *why};
        return std::nullopt;
    }

    std::size_t size() const noexcept { return gates_.size(); }

private:
    std::vector<std::shared_ptr<FileGate>> gates_;
};

} // namespace spar
