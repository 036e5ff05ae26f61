// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>

#include "spar/metadata/metadata_index.hpp"
#include "spar/query/interpreter.hpp"

namespace spar {

/// Hands out an interpreter for the index's current hierarchy, rebuilding
/// the tag vocabulary only after the hierarchy has changed.
class InterpreterSource {
public:
    InterpreterSource(const MetadataIndex& index, std::shared_ptr<Embedder> tag_embedder,
                      InterpreterConfig cfg = {}, std::shared_ptr<const Clock> clock = nullptr)
        : index_(index), embedder_(std::move(tag_embedder)), cfg_(std::move(cfg)), clock_(std::move(clock)) {}

    std::shared_ptr<const QueryInterpreter> get() {
        std::lock_guard lock(mu_);
        auto version = index_.tag_version();
        if (!current_ || version != version_) {
            auto [tags, v] = index_.versioned_tag_snapshot();
            current_ = std::make_shared<const QueryInterpreter>(std::make_shared<const TagHierarchy>(std::move(tags)),
                                                                embedder_, cfg_, clock_);
            version_ = v;
            ++rebuilds_;
        }
        return current_;
    }

    const InterpreterConfig& config() const noexcept { return cfg_; }
    std::uint64_t rebuilds() const {
        std::lock_guard lock(mu_);
        return rebuilds_;
    }

private:
    const MetadataIndex& index_;
    std::shared_ptr<Embedder> embedder_;
    InterpreterConfig cfg_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mu_;
    std::shared_ptr<const QueryInterpreter> current_;
    std::uint64_t version_ = 0;
    std::uint64_t rebuilds_ = 0;
};

} // namespace spar
