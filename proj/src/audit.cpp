/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/audit.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sys/file.h>
#include <unistd.h>

namespace idfabric {

using json = nlohmann::json;

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<E, N>& values)
{
    for (auto v : values) {
        if (to_string(v) == text) {
            return v;
        }
    }
    return std::nullopt;
}

constexpr std::array kCategories {AuditCategory::Workflow, AuditCategory::ResourceMutation,
    AuditCategory::AuthAttempt, AuditCategory::AdminAction, AuditCategory::Reconciliation};
constexpr std::array kOutcomes {AuditOutcome::Allowed, AuditOutcome::Denied, AuditOutcome::Success,
    AuditOutcome::Failure, AuditOutcome::Partial};

} // namespace

std::string_view to_string(AuditCategory category) noexcept
{
    switch (category) {
    case AuditCategory::Workflow:
        return "workflow";
    case AuditCategory::ResourceMutation:
        return "resource_mutation";
    case AuditCategory::AuthAttempt:
        return "auth_attempt";
    case AuditCategory::AdminAction:
        return "admin_action";
    case AuditCategory::Reconciliation:
        return "reconciliation";
    }
    return "?";
}

std::string_view to_string(AuditOutcome outcome) noexcept
{
    switch (outcome) {
    case AuditOutcome::Allowed:
        return "allowed";
    case AuditOutcome::Denied:
        return "denied";
    case AuditOutcome::Success:
        return "success";
    case AuditOutcome::Failure:
        return "failure";
    case AuditOutcome::Partial:
        return "partial";
    }
    return "?";
}

std::string to_json_line(const AuditEvent& event)
{
    json doc {{"seq", event.sequence}, {"ts", format_timestamp(event.timestamp)}, {"actor", event.actor},
        {"category", to_string(event.category)}, {"action", event.action}, {"target", event.target},
        {"outcome", to_string(event.outcome)}, {"detail", event.detail}};
    return doc.dump();
}

Result<AuditEvent> parse_audit_line(std::string_view line)
{
    try {
        auto       doc = json::parse(line);
        AuditEvent event;
        event.sequence = doc.at("seq").get<std::uint64_t>();
        auto ts        = parse_timestamp(doc.at("ts").get<std::string>());
        auto category  = lookup(doc.at("category").get<std::string>(), kCategories);
        auto outcome   = lookup(doc.at("outcome").get<std::string>(), kOutcomes);
        if (!ts || !category || !outcome) {
            return make_error(Errc::ParseError, "bad audit field value");
        }
        event.timestamp = *ts;
        event.category  = *category;
        event.outcome   = *outcome;
        event.actor     = doc.at("actor").get<std::string>();
        event.action    = doc.at("action").get<std::string>();
        event.target    = doc.at("target").get<std::string>();
        event.detail    = doc.at("detail").get<AuditDetail>();
        return event;
    } catch (const json::exception& e) {
        return make_error(Errc::ParseError, e.what());
    }
}

AuditLog::AuditLog(const Clock& clock)
    : mClock(clock)
{
}

AuditLog::AuditLog(const Clock& clock, std::filesystem::path file)
    : mClock(clock)
    , mPath(std::move(file))
{
    if (std::filesystem::exists(*mPath)) {
        auto existing = read_file(*mPath);
        if (!existing) {
            throw ErrorException(existing.error());
        }
        mEvents = std::move(existing).value();
        if (!mEvents.empty()) {
            mLastSequence = mEvents.back().sequence;
        }
    }
    mFd = ::open(mPath->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0600);
    if (mFd < 0) {
        throw ErrorException(make_error(Errc::LogUnavailable, mPath->string() + ": " + std::strerror(errno)));
    }
}

AuditLog::~AuditLog()
{
    if (mFd >= 0) {
        ::close(mFd);
    }
}

Status AuditLog::try_lock_file() const
{
    if (::flock(mFd, LOCK_EX | LOCK_NB) != 0) {
        return make_error(Errc::LogUnavailable, mPath->string() + " is locked");
    }
    return {};
}

Status AuditLog::ensure_writable() const
{
    if (!mAvailable) {
        return make_error(Errc::LogUnavailable, "audit log disabled");
    }
    if (mFd >= 0) {
        std::lock_guard lock {mMutex};
        if (auto locked = try_lock_file(); !locked) {
            return locked;
        }
        ::flock(mFd, LOCK_UN);
    }
    return {};
}

Result<AuditEvent> AuditLog::record(std::string_view actor, AuditCategory category, std::string_view action,
    std::string_view target, AuditOutcome outcome, AuditDetail detail)
{
    if (!mAvailable) {
        return make_error(Errc::LogUnavailable, "audit log disabled");
    }

    std::lock_guard lock {mMutex};

    AuditEvent event {mLastSequence + 1, mClock.now(), std::string {actor}, category, std::string {action},
        std::string {target}, outcome, std::move(detail)};

    if (mFd >= 0) {
        if (auto locked = try_lock_file(); !locked) {
            return locked.error();
        }
        auto    line    = to_json_line(event) + "\n";
        ssize_t written = ::write(mFd, line.data(), line.size());
        bool    synced  = written == static_cast<ssize_t>(line.size()) && ::fdatasync(mFd) == 0;
        ::flock(mFd, LOCK_UN);
        if (!synced) {
            return make_error(Errc::LogUnavailable, "write failed: " + std::string {std::strerror(errno)});
        }
    }

    mLastSequence = event.sequence;
    mEvents.push_back(event);
    return event;
}

std::vector<AuditEvent> AuditLog::events() const
{
    std::lock_guard lock {mMutex};
    return mEvents;
}

std::size_t AuditLog::size() const
{
    std::lock_guard lock {mMutex};
    return mEvents.size();
}

std::uint64_t AuditLog::last_sequence() const
{
    std::lock_guard lock {mMutex};
    return mLastSequence;
}

Result<std::vector<AuditEvent>> AuditLog::read_file(const std::filesystem::path& file)
{
    std::ifstream in {file};
    if (!in) {
        return make_error(Errc::IoError, "cannot read " + file.string());
    }
    std::vector<AuditEvent> out;
    std::string             line;
    std::size_t             lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) {
            continue;
        }
        auto event = parse_audit_line(line);
        if (!event) {
            return make_error(Errc::ParseError, file.string() + ":" + std::to_string(lineNo) + ": "
                    + event.error().message);
        }
        out.push_back(std::move(event).value());
    }
    return out;
}

} // namespace idfabric
