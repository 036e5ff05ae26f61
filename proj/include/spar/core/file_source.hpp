// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

namespace spar {

/// Where file bytes come from. Paths are corpus-relative.
class FileSource {
public:
    virtual ~FileSource() = default;
    /// nullopt when the file is missing or unreadable.
    virtual std::optional<std::string> read(const std::string& path) const = 0;
};

class DirectoryFileSource final : public FileSource {
public:
    explicit DirectoryFileSource(std::filesystem::path root) : root_(std::move(root)) {}

    std::optional<std::string> read(const std::string& path) const override {
        std::ifstream in(root_ / path, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

private:
    std::filesystem::path root_;
};

/// In-memory corpus used by the synthetic benchmark and tests.
class InMemoryFileSource final : public FileSource {
public:
    void put(std::string path, std::string bytes) {
        std::lock_guard lock(mu_);
        files_[std::move(path)] = std::move(bytes);
    }
    void remove(const std::string& path) {
        std::lock_guard lock(mu_);
        files_.erase(path);
    }
    std::optional<std::string> read(const std::string& path) const override {
        std::lock_guard lock(mu_);
        auto it = files_.find(path);
        if (it == files_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t size() const {
        std::lock_guard lock(mu_);
        return files_.size();
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> files_;
};

} // namespace spar
