// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>
#include <zlib.h>

#include <json.hpp>

#include "spar/core/error.hpp"

namespace spar {

/// Append-only write-ahead journal backing a persistent Metadata Index.
///
/// Layout (little-endian):
///   header:  "SPARMDX1" (8 bytes) | format version (u32)
///   entry*:  payload length (u32) | CRC-32 of payload (u32) | payload
/// Each payload is one compact JSON object describing a single mutation.
/// A torn or corrupt trailing entry is discarded on open and the file is
/// truncated back to the last intact entry.
class IndexJournal {
public:
    static constexpr std::array<char, 8> kMagic{'S', 'P', 'A', 'R', 'M', 'D', 'X', '1'};
    static constexpr std::uint32_t kFormatVersion = 1;
    static constexpr std::size_t kHeaderSize = 12;

    IndexJournal(std::filesystem::path path, bool sync_each_entry)
        : path_(std::move(path)), sync_(sync_each_entry) {}

    /// Opens (creating if absent) and replays every intact entry.
    void open(const std::function<void(const nlohmann::json&)>& apply) {
        bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
        if (fresh) {
            if (path_.has_parent_path()) {
                std::error_code ec;
                std::filesystem::create_directories(path_.parent_path(), ec);
            }
            file_.reset(std::fopen(path_.c_str(), "wb"));
            if (!file_) throw Error(ErrorCode::io_error, "cannot create " + path_.string());
            write_header();
            return;
        }
        file_.reset(std::fopen(path_.c_str(), "rb"));
        if (!file_) throw Error(ErrorCode::io_error, "cannot open " + path_.string());
        read_header();
        long good = static_cast<long>(kHeaderSize);
        while (true) {
            std::uint32_t len = 0, crc = 0;
            if (!read_u32(len) || !read_u32(crc)) break;
            std::string payload(len, '\0');
            if (len && std::fread(payload.data(), 1, len, file_.get()) != len) break;
            if (crc32_of(payload) != crc) break;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(payload);
            } catch (const nlohmann::json::exception&) {
                break;
            }
            apply(j);
            good = std::ftell(file_.get());
        }
        file_.reset();
        if (static_cast<std::uintmax_t>(good) != std::filesystem::file_size(path_))
            std::filesystem::resize_file(path_, static_cast<std::uintmax_t>(good));
        file_.reset(std::fopen(path_.c_str(), "ab"));
        if (!file_) throw Error(ErrorCode::io_error, "cannot append to " + path_.string());
    }

    void append(const nlohmann::json& entry) {
        write_entry(file_.get(), entry.dump());
        std::fflush(file_.get());
        if (sync_) ::fsync(::fileno(file_.get()));
    }

    /// Replaces the journal with a minimal sequence of entries, atomically.
    void rewrite(const std::vector<nlohmann::json>& entries) {
        auto tmp = path_;
        tmp += ".compact";
        {
            std::unique_ptr<std::FILE, Closer> out(std::fopen(tmp.c_str(), "wb"));
            if (!out) throw Error(ErrorCode::io_error, "cannot create " + tmp.string());
            std::swap(out, file_);
            write_header();
            for (const auto& e : entries) write_entry(file_.get(), e.dump());
            std::fflush(file_.get());
            ::fsync(::fileno(file_.get()));
            std::swap(out, file_);
        }
        file_.reset();
        std::filesystem::rename(tmp, path_);
        file_.reset(std::fopen(path_.c_str(), "ab"));
    }

    const std::filesystem::path& path() const noexcept { return path_; }

    static std::uint32_t crc32_of(const std::string& payload) {
        return static_cast<std::uint32_t>(
            ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
    }

private:
    struct Closer {
        void operator()(std::FILE* f) const noexcept {
            if (f) std::fclose(f);
        }
    };

    static void put_u32(std::FILE* f, std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        std::fwrite(b, 1, 4, f);
    }

    bool read_u32(std::uint32_t& v) {
        unsigned char b[4];
        if (std::fread(b, 1, 4, file_.get()) != 4) return false;
        v = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
            std::uint32_t(b[3]) << 24;
        return true;
    }

    void write_header() {
        std::fwrite(kMagic.data(), 1, kMagic.size(), file_.get());
        put_u32(file_.get(), kFormatVersion);
        std::fflush(file_.get());
    }

    void read_header() {
        std::array<char, 8> magic{};
        std::uint32_t version = 0;
        if (std::fread(magic.data(), 1, magic.size(), file_.get()) != magic.size() || magic != kMagic)
            throw Error(ErrorCode::corrupt_index, path_.string() + " is not a metadata index file");
        if (!read_u32(version) || version != kFormatVersion)
            throw Error(ErrorCode::corrupt_index,
                        "unsupported index format version " + std::to_string(version));
    }

    static void write_entry(std::FILE* f, const std::string& payload) {
        put_u32(f, static_cast<std::uint32_t>(payload.size()));
        put_u32(f, crc32_of(payload));
        std::fwrite(payload.data(), 1, payload.size(), f);
    }

    std::filesystem::path path_;
    bool sync_;
    std::unique_ptr<std::FILE, Closer> file_;
};

} // namespace spar
