/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_CLOCK_HPP_
#define IDFABRIC_CLOCK_HPP_

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace idfabric {

using Date      = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD"; rejects anything else including impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string         format_date(Date date);

/// Parses "YYYY-MM-DDTHH:MM:SSZ".
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string              format_timestamp(Timestamp ts);

inline Date date_of(Timestamp ts)
{
    return Date {std::chrono::floor<std::chrono::days>(ts)};
}

inline Timestamp start_of(Date date)
{
    return Timestamp {std::chrono::sys_days {date}};
}

class Clock {
public:
    virtual ~Clock()               = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override
    {
        return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
};

/// Deterministic clock for tests and reproducible scenario runs.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start)
        : mNow(start.time_since_epoch().count())
    {
    }

    Timestamp now() const override { return Timestamp {std::chrono::seconds {mNow.load()}}; }

    void set(Timestamp ts) { mNow = ts.time_since_epoch().count(); }
    void advance(std::chrono::seconds delta) { mNow += delta.count(); }

private:
    std::atomic<std::int64_t> mNow;
};

} // namespace idfabric

#endif
