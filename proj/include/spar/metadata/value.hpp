// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spar/core/clock.hpp"
#include "spar/core/error.hpp"

namespace spar {

enum class ValueType { integer, timestamp, enumeration, string };

constexpr std::string_view type_name(ValueType t) noexcept {
    switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::timestamp: return "timestamp";
    case ValueType::enumeration: return "enum";
    case ValueType::string: return "string";
    }
    return "string";
}

inline ValueType parse_value_type(std::string_view s) {
    if (s == "integer" || s == "int") return ValueType::integer;
    if (s == "timestamp" || s == "date") return ValueType::timestamp;
    if (s == "enum" || s == "enumeration") return ValueType::enumeration;
    if (s == "string") return ValueType::string;
    throw Error(ErrorCode::invalid_argument, "unknown metadata type '" + std::string(s) + "'");
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline Timestamp make_date(int y, unsigned m, unsigned d) {
    return std::chrono::sys_days(std::chrono::year(y) / std::chrono::month(m) / std::chrono::day(d));
}

/// Accepts "YYYY-MM-DD" and "YYYY-MM-DDTHH:MM:SS[Z]". Returns nullopt for
/// anything else, including calendar-invalid dates such as 2019-02-30.
inline std::optional<Timestamp> parse_iso_timestamp(std::string_view s) {
    int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
    auto digits = [&](std::size_t pos, std::size_t n, int& out) {
        if (pos + n > s.size()) return false;
        out = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
            out = out * 10 + (s[i] - '0');
        }
        return true;
    };
    if (!digits(0, 4, y) || s.size() < 10 || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' ||
        !digits(8, 2, d))
        return std::nullopt;
    if (s.size() > 10) {
        if ((s[10] != 'T' && s[10] != ' ') || !digits(11, 2, hh) || s.size() < 19 || s[13] != ':' ||
            !digits(14, 2, mm) || s[16] != ':' || !digits(17, 2, ss))
            return std::nullopt;
        if (s.size() > 19 && !(s.size() == 20 && s[19] == 'Z')) return std::nullopt;
        if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(mo), std::chrono::day(d)};
    if (!ymd.ok()) return std::nullopt;
    return Timestamp(std::chrono::sys_days(ymd)) + std::chrono::hours(hh) + std::chrono::minutes(mm) +
           std::chrono::seconds(ss);
}

inline std::string format_timestamp(Timestamp t) {
    auto days = std::chrono::floor<std::chrono::days>(t);
    std::chrono::year_month_day ymd(days);
    auto rest = std::chrono::hh_mm_ss(t - days);
    char buf[32];
    if (rest.to_duration().count() == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                      unsigned(ymd.day()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), int(rest.hours().count()),
                      int(rest.minutes().count()), int(rest.seconds().count()));
    }
    return buf;
}

/// A typed metadata attribute value. Enumeration values are case-folded at
/// construction so equality lookups through the attribute index are exact.
class MetadataValue {
public:
    MetadataValue() = default;

    static MetadataValue integer(std::int64_t v) { return MetadataValue(ValueType::integer, v, {}); }
    static MetadataValue timestamp(Timestamp t) {
        return MetadataValue(ValueType::timestamp, t.time_since_epoch().count(), {});
    }
    static MetadataValue enumeration(std::string_view v) {
        return MetadataValue(ValueType::enumeration, 0, to_lower(v));
    }
    static MetadataValue string(std::string v) {
        return MetadataValue(ValueType::string, 0, std::move(v));
    }

    /// Converts a JSON scalar to the declared type.
    static MetadataValue from_json(const nlohmann::json& j, ValueType type) {
        switch (type) {
        case ValueType::integer:
            if (j.is_number_integer()) return integer(j.get<std::int64_t>());
            if (j.is_string()) {
                const auto& s = j.get_ref<const std::string&>();
                try {
                    std::size_t used = 0;
                    auto v = std::stoll(s, &used);
                    if (used == s.size()) return integer(v);
                } catch (const std::exception&) {
                }
            }
            break;
        case ValueType::timestamp:
            if (j.is_string()) {
                if (auto t = parse_iso_timestamp(j.get<std::string>())) return timestamp(*t);
            } else if (j.is_number_integer()) {
                return timestamp(Timestamp(std::chrono::seconds(j.get<std::int64_t>())));
            }
            break;
        case ValueType::enumeration:
            if (j.is_string()) return enumeration(j.get<std::string>());
            break;
        case ValueType::string:
            if (j.is_string()) return string(j.get<std::string>());
            if (j.is_number() || j.is_boolean()) return string(j.dump());
            break;
        }
        throw Error(ErrorCode::type_mismatch,
                    "value " + j.dump() + " is not a valid " + std::string(type_name(type)));
    }

    ValueType type() const noexcept { return type_; }
    bool orderable() const noexcept {
        return type_ == ValueType::integer || type_ == ValueType::timestamp;
    }
    std::int64_t as_integer() const noexcept { return number_; }
    Timestamp as_timestamp() const noexcept { return Timestamp(std::chrono::seconds(number_)); }
    const std::string& as_string() const noexcept { return text_; }

    nlohmann::json to_json() const {
        switch (type_) {
        case ValueType::integer: return number_;
        case ValueType::timestamp: return format_timestamp(as_timestamp());
        default: return text_;
        }
    }

    std::string display() const {
        auto j = to_json();
        return j.is_string() ? j.get<std::string>() : j.dump();
    }

    friend bool operator==(const MetadataValue&, const MetadataValue&) = default;
    friend std::strong_ordering operator<=>(const MetadataValue& a, const MetadataValue& b) {
        if (auto c = a.type_ <=> b.type_; c != 0) return c;
        if (auto c = a.number_ <=> b.number_; c != 0) return c;
        return a.text_.compare(b.text_) <=> 0;
    }

private:
    MetadataValue(ValueType t, std::int64_t n, std::string s)
        : type_(t), number_(n), text_(std::move(s)) {}

    ValueType type_ = ValueType::string;
    std::int64_t number_ = 0;
    std::string text_;
};

using Metadata = std::map<std::string, MetadataValue>;

/// Per-attribute type declarations. Attributes without a declaration are
/// plain strings compared by equality.
struct MetadataSchema {
    std::map<std::string, ValueType> types;

    static MetadataSchema defaults() {
        return MetadataSchema{{{"year", ValueType::integer},
                               {"date", ValueType::timestamp},
                               {"format", ValueType::enumeration},
                               {"department", ValueType::enumeration}}};
    }

    ValueType type_of(const std::string& attribute) const {
        auto it = types.find(attribute);
        return it == types.end() ? ValueType::string : it->second;
    }

    Metadata parse(const nlohmann::json& object) const {
        Metadata out;
        if (object.is_null()) return out;
        if (!object.is_object())
            throw Error(ErrorCode::invalid_argument, "metadata must be a JSON object");
        for (const auto& [key, value] : object.items())
            out.emplace(key, MetadataValue::from_json(value, type_of(key)));
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, t] : types) j[k] = std::string(type_name(t));
        return j;
    }

    static MetadataSchema from_json(const nlohmann::json& j) {
        MetadataSchema s;
        for (const auto& [k, v] : j.items()) s.types[k] = parse_value_type(v.get<std::string>());
        return s;
    }
};

inline nlohmann::json metadata_to_json(const Metadata& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[k] = v.to_json();
    return j;
}

} // namespace spar
