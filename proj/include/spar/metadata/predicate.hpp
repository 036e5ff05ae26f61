// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spar/metadata/value.hpp"

namespace spar {

enum class PredicateOp { equals, in_set, range_inclusive, before, after, format_is };

constexpr std::string_view op_name(PredicateOp op) noexcept {
    switch (op) {
    case PredicateOp::equals: return "equals";
    case PredicateOp::in_set: return "in_set";
    case PredicateOp::range_inclusive: return "range_inclusive";
    case PredicateOp::before: return "before";
    case PredicateOp::after: return "after";
    case PredicateOp::format_is: return "format_is";
    }
    return "equals";
}

inline PredicateOp parse_op(std::string_view s) {
    for (auto op : {PredicateOp::equals, PredicateOp::in_set, PredicateOp::range_inclusive,
                    PredicateOp::before, PredicateOp::after, PredicateOp::format_is})
        if (op_name(op) == s) return op;
    throw Error(ErrorCode::invalid_argument, "unknown predicate operator '" + std::string(s) + "'");
}

/// A single metadata constraint. Construction validates that the operator
/// and operand types agree; validate(schema) additionally checks the operand
/// type against the attribute's declared type.
class MetadataPredicate {
public:
    MetadataPredicate(std::string attribute, PredicateOp op, std::vector<MetadataValue> operands)
        : attribute_(std::move(attribute)), op_(op), operands_(std::move(operands)) {
        check_shape();
    }

    static MetadataPredicate equals(std::string attr, MetadataValue v) {
        return {std::move(attr), PredicateOp::equals, {std::move(v)}};
    }
    static MetadataPredicate in_set(std::string attr, std::vector<MetadataValue> vs) {
        return {std::move(attr), PredicateOp::in_set, std::move(vs)};
    }
    static MetadataPredicate range(std::string attr, MetadataValue lo, MetadataValue hi) {
        return {std::move(attr), PredicateOp::range_inclusive, {std::move(lo), std::move(hi)}};
    }
    static MetadataPredicate before(std::string attr, MetadataValue v) {
        return {std::move(attr), PredicateOp::before, {std::move(v)}};
    }
    static MetadataPredicate after(std::string attr, MetadataValue v) {
        return {std::move(attr), PredicateOp::after, {std::move(v)}};
    }
    static MetadataPredicate format_is(std::string_view format) {
        return {"format", PredicateOp::format_is, {MetadataValue::enumeration(format)}};
    }

    const std::string& attribute() const noexcept { return attribute_; }
    PredicateOp op() const noexcept { return op_; }
    const std::vector<MetadataValue>& operands() const noexcept { return operands_; }
    ValueType operand_type() const noexcept { return operands_.front().type(); }

    void validate(const MetadataSchema& schema) const {
        auto declared = schema.type_of(attribute_);
        if (declared != operand_type())
            throw Error(ErrorCode::type_mismatch,
                        "predicate on '" + attribute_ + "' uses " +
                            std::string(type_name(operand_type())) + " operand but attribute is " +
                            std::string(type_name(declared)));
    }

    bool matches(const MetadataValue& v) const {
        if (v.type() != operand_type()) return false;
        switch (op_) {
        case PredicateOp::equals:
        case PredicateOp::format_is: return v == operands_[0];
        case PredicateOp::in_set:
            return std::find(operands_.begin(), operands_.end(), v) != operands_.end();
        case PredicateOp::range_inclusive: return operands_[0] <= v && v <= operands_[1];
        case PredicateOp::before: return v < operands_[0];
        case PredicateOp::after: return v > operands_[0];
        }
        return false;
    }

    /// A file lacking the attribute never satisfies the predicate.
    bool matches(const Metadata& metadata) const {
        auto it = metadata.find(attribute_);
        return it != metadata.end() && matches(it->second);
    }

    std::string describe() const {
        std::string s = attribute_ + " " + std::string(op_name(op_)) + " ";
        if (op_ == PredicateOp::range_inclusive)
            return s + "[" + operands_[0].display() + ", " + operands_[1].display() + "]";
        if (op_ == PredicateOp::in_set) {
            s += "{";
            for (std::size_t i = 0; i < operands_.size(); ++i)
                s += (i ? ", " : "") + operands_[i].display();
            return s + "}";
        }
        return s + operands_[0].display();
    }

    nlohmann::json to_json() const {
        nlohmann::json ops = nlohmann::json::array();
        for (const auto& v : operands_) ops.push_back(v.to_json());
        return {{"attribute", attribute_},
                {"op", std::string(op_name(op_))},
                {"type", std::string(type_name(operand_type()))},
                {"operands", ops}};
    }

    static MetadataPredicate from_json(const nlohmann::json& j) {
        auto type = parse_value_type(j.at("type").get<std::string>());
        std::vector<MetadataValue> vs;
        for (const auto& o : j.at("operands")) vs.push_back(MetadataValue::from_json(o, type));
        return {j.at("attribute").get<std::string>(), parse_op(j.at("op").get<std::string>()),
                std::move(vs)};
    }

    friend bool operator==(const MetadataPredicate&, const MetadataPredicate&) = default;

private:
    void check_shape() const {
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::type_mismatch,
                        std::string(op_name(op_)) + " on '" + attribute_ + "': " + why);
        };
        if (attribute_.empty()) fail("empty attribute name");
        if (operands_.empty()) fail("no operands");
        for (const auto& v : operands_)
            if (v.type() != operands_.front().type()) fail("operands have mixed types");
        switch (op_) {
        case PredicateOp::equals:
            if (operands_.size() != 1) fail("expects exactly one operand");
            break;
        case PredicateOp::in_set: break;
        case PredicateOp::range_inclusive:
            if (operands_.size() != 2) fail("expects [low, high]");
            if (!operands_[0].orderable()) fail("range needs integer or timestamp operands");
            if (operands_[1] < operands_[0]) fail("low bound exceeds high bound");
            break;
        case PredicateOp::before:
        case PredicateOp::after:
            if (operands_.size() != 1) fail("expects exactly one operand");
            if (!operands_[0].orderable()) fail("needs integer or timestamp operand");
            break;
        case PredicateOp::format_is:
            if (operands_.size() != 1) fail("expects exactly one operand");
            if (operands_[0].type() != ValueType::enumeration) fail("format must be an enum value");
            break;
        }
    }

    std::string attribute_;
    PredicateOp op_;
    std::vector<MetadataValue> operands_;
};

} // namespace spar
