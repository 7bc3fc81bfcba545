/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/clock.hpp>
#include <idfabric/result.hpp>

#include <cstdio>

namespace idfabric {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::UndefinedTransition:
        return "UndefinedTransition";
    case Errc::InvalidEvent:
        return "InvalidEvent";
    case Errc::MalformedLine:
        return "MalformedLine";
    case Errc::DuplicateInBatch:
        return "DuplicateInBatch";
    case Errc::UnknownRole:
        return "UnknownRole";
    case Errc::UnknownResource:
        return "UnknownResource";
    case Errc::DuplicateRow:
        return "DuplicateRow";
    case Errc::DuplicateIdentity:
        return "DuplicateIdentity";
    case Errc::StoreUnavailable:
        return "StoreUnavailable";
    case Errc::UnknownIdentity:
        return "UnknownIdentity";
    case Errc::NotTerminated:
        return "NotTerminated";
    case Errc::ResourceDown:
        return "ResourceDown";
    case Errc::InsecureChannel:
        return "InsecureChannel";
    case Errc::PrivilegeRequired:
        return "PrivilegeRequired";
    case Errc::AttributeConflict:
        return "AttributeConflict";
    case Errc::AccountNotFound:
        return "AccountNotFound";
    case Errc::ResourceUnavailable:
        return "ResourceUnavailable";
    case Errc::UnknownSerial:
        return "UnknownSerial";
    case Errc::UnknownAttribute:
        return "UnknownAttribute";
    case Errc::AuthenticationFailure:
        return "AuthenticationFailure";
    case Errc::PermissionDenied:
        return "PermissionDenied";
    case Errc::UnknownGroup:
        return "UnknownGroup";
    case Errc::MemberLacksAccount:
        return "MemberLacksAccount";
    case Errc::LogUnavailable:
        return "LogUnavailable";
    case Errc::EngineBusy:
        return "EngineBusy";
    case Errc::InvalidArgument:
        return "InvalidArgument";
    case Errc::ParseError:
        return "ParseError";
    case Errc::IoError:
        return "IoError";
    }
    return "Unknown";
}

std::string Error::describe() const
{
    std::string out {to_string(code)};
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}

std::optional<Date> parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i != 4 && i != 7 && (text[i] < '0' || text[i] > '9')) {
            return std::nullopt;
        }
    }
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    Date date {std::chrono::year {num(0, 4)}, std::chrono::month {static_cast<unsigned>(num(5, 2))},
        std::chrono::day {static_cast<unsigned>(num(8, 2))}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

std::string format_date(Date date)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
        static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text)
{
    if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    auto date = parse_date(text.substr(0, 10));
    if (!date) {
        return std::nullopt;
    }
    int parts[3];
    for (int i = 0; i < 3; ++i) {
        char hi = text[11 + i * 3], lo = text[12 + i * 3];
        if (hi < '0' || hi > '9' || lo < '0' || lo > '9') {
            return std::nullopt;
        }
        parts[i] = (hi - '0') * 10 + (lo - '0');
    }
    if (parts[0] > 23 || parts[1] > 59 || parts[2] > 59) {
        return std::nullopt;
    }
    return start_of(*date) + std::chrono::hours {parts[0]} + std::chrono::minutes {parts[1]}
        + std::chrono::seconds {parts[2]};
}

std::string format_timestamp(Timestamp ts)
{
    auto day  = std::chrono::floor<std::chrono::days>(ts);
    auto tod  = std::chrono::hh_mm_ss {ts - day};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(Date {day}).c_str(),
        static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
        static_cast<int>(tod.seconds().count()));
    return buf;
}

} // namespace idfabric
