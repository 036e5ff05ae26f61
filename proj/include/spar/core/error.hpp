// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spar {

/// Every failure the engine reports carries one of these codes. The string
/// forms returned by code_name() are part of the HTTP contract and must not
/// change once published.
enum class ErrorCode {
    invalid_argument,
    duplicate_path,
    duplicate_id,
    unknown_file,
    unknown_tag,
    cycle_detected,
    malformed_tree_number,
    duplicate_tree_number,
    type_mismatch,
    empty_group,
    empty_filter,
    unparsable_date,
    empty_vocabulary,
    provider_unavailable,
    dim_mismatch,
    empty_workspace_index,
    workspace_not_found,
    workspace_not_active,
    workspace_archived,
    illegal_transition,
    ground_truth_mismatch,
    io_error,
    corrupt_index,
};

constexpr std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::duplicate_path: return "duplicate_path";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::unknown_file: return "unknown_file";
    case ErrorCode::unknown_tag: return "unknown_tag";
    case ErrorCode::cycle_detected: return "cycle_detected";
    case ErrorCode::malformed_tree_number: return "malformed_tree_number";
    case ErrorCode::duplicate_tree_number: return "duplicate_tree_number";
    case ErrorCode::type_mismatch: return "type_mismatch";
    case ErrorCode::empty_group: return "empty_group";
    case ErrorCode::empty_filter: return "empty_filter";
    case ErrorCode::unparsable_date: return "unparsable_date";
    case ErrorCode::empty_vocabulary: return "empty_vocabulary";
    case ErrorCode::provider_unavailable: return "provider_unavailable";
    case ErrorCode::dim_mismatch: return "dim_mismatch";
    case ErrorCode::empty_workspace_index: return "empty_workspace_index";
    case ErrorCode::workspace_not_found: return "workspace_not_found";
    case ErrorCode::workspace_not_active: return "workspace_not_active";
    case ErrorCode::workspace_archived: return "workspace_archived";
    case ErrorCode::illegal_transition: return "illegal_transition";
    case ErrorCode::ground_truth_mismatch: return "ground_truth_mismatch";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::corrupt_index: return "corrupt_index";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string details = {})
        : std::runtime_error(std::string(code_name(code)) + ": " + message),
          code_(code), message_(message), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::string message_;
    std::string details_;
};

} // namespace spar
