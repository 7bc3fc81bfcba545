/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_AUDIT_HPP_
#define IDFABRIC_AUDIT_HPP_

#include <idfabric/clock.hpp>
#include <idfabric/result.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace idfabric {

enum class AuditCategory { Workflow, ResourceMutation, AuthAttempt, AdminAction, Reconciliation };
enum class AuditOutcome { Allowed, Denied, Success, Failure, Partial };

std::string_view to_string(AuditCategory category) noexcept;
std::string_view to_string(AuditOutcome outcome) noexcept;

using AuditDetail = std::map<std::string, std::string>;

struct AuditEvent {
    std::uint64_t sequence = 0;
    Timestamp     timestamp;
    std::string   actor;
    AuditCategory category = AuditCategory::Workflow;
    std::string   action;
    std::string   target;
    AuditOutcome  outcome = AuditOutcome::Success;
    AuditDetail   detail;

    bool operator==(const AuditEvent&) const = default;
};

std::string              to_json_line(const AuditEvent& event);
Result<AuditEvent>       parse_audit_line(std::string_view line);

inline constexpr std::string_view kSystemActor = "system";

/// Append-only audit log. Appends are serialized through one writer and
/// numbered gap-free. With a file attached, each event is written and synced
/// under an exclusive advisory lock before record() returns; an event that
/// cannot be written is not numbered and LogUnavailable is returned.
class AuditLog {
public:
    explicit AuditLog(const Clock& clock);
    AuditLog(const Clock& clock, std::filesystem::path file);
    ~AuditLog();

    AuditLog(const AuditLog&)            = delete;
    AuditLog& operator=(const AuditLog&) = delete;

    /// Fails with LogUnavailable when the next record() would fail.
    Status ensure_writable() const;

    Result<AuditEvent> record(std::string_view actor, AuditCategory category, std::string_view action,
        std::string_view target, AuditOutcome outcome, AuditDetail detail = {});

    std::vector<AuditEvent> events() const;
    std::size_t             size() const;
    std::uint64_t           last_sequence() const;

    /// Test hook simulating an unwritable log.
    void set_available(bool available) { mAvailable = available; }

    static Result<std::vector<AuditEvent>> read_file(const std::filesystem::path& file);

private:
    Status try_lock_file() const;

    const Clock&                         mClock;
    std::optional<std::filesystem::path> mPath;
    int                                  mFd = -1;
    mutable std::mutex                   mMutex;
    std::vector<AuditEvent>              mEvents;
    std::uint64_t                        mLastSequence = 0;
    std::atomic<bool>                    mAvailable {true};
};

} // namespace idfabric

#endif
