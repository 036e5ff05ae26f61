// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace spar {

using Timestamp = std::chrono::sys_seconds;

/// Wall clock seam. Workspace expiry and relative date phrases ("last 3
/// years") resolve against this so tests can pin time.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override {
        return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start) : seconds_(start.time_since_epoch().count()) {}

    Timestamp now() const override { return Timestamp(std::chrono::seconds(seconds_.load())); }
    void set(Timestamp t) { seconds_ = t.time_since_epoch().count(); }
    void advance(std::chrono::seconds d) { seconds_ += d.count(); }

private:
    std::atomic<std::int64_t> seconds_;
};

inline std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

} // namespace spar
