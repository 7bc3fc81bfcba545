/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_IDENTITY_HPP_
#define IDFABRIC_IDENTITY_HPP_

#include <idfabric/clock.hpp>
#include <idfabric/result.hpp>

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idfabric {

/// Opaque person identifier issued by the authoritative source.
class PersonId {
public:
    PersonId() = default;
    explicit PersonId(std::string value)
        : mValue(std::move(value))
    {
    }

    const std::string& str() const noexcept { return mValue; }
    bool               empty() const noexcept { return mValue.empty(); }

    auto operator<=>(const PersonId&) const = default;

private:
    std::string mValue;
};

enum class Role { Employee, Student, Faculty, Contractor };

inline constexpr std::array kAllRoles {Role::Employee, Role::Student, Role::Faculty, Role::Contractor};

/// Sub-role domain depends on the role: Employee takes Management or
/// IndividualContributor, Student takes Prospect/Active/Inactive/Alumni,
/// Faculty and Contractor take None.
enum class SubRole { None, Management, IndividualContributor, Prospect, Active, Inactive, Alumni };

inline constexpr std::array kAllSubRoles {SubRole::None, SubRole::Management, SubRole::IndividualContributor,
    SubRole::Prospect, SubRole::Active, SubRole::Inactive, SubRole::Alumni};

enum class IdentityStatus { Active, Suspended, Terminated };

enum class ResourceId { AccessRegistry, DirectoryMail, UnixHosts, StudentPortal, LearningPlatform };

inline constexpr std::array kAllResources {ResourceId::AccessRegistry, ResourceId::DirectoryMail,
    ResourceId::UnixHosts, ResourceId::StudentPortal, ResourceId::LearningPlatform};

enum class EventKind {
    Application,
    Matriculation,
    Enrollment,
    Withdrawal,
    Graduation,
    AlumniTransition,
    Hire,
    Transfer,
    LeaveOfAbsence,
    ReturnFromLeave,
    Termination,
};

inline constexpr std::array kAllEventKinds {EventKind::Application, EventKind::Matriculation,
    EventKind::Enrollment, EventKind::Withdrawal, EventKind::Graduation, EventKind::AlumniTransition,
    EventKind::Hire, EventKind::Transfer, EventKind::LeaveOfAbsence, EventKind::ReturnFromLeave,
    EventKind::Termination};

enum class WithdrawalReason { Academic, Financial, Voluntary };

struct LifecycleEvent {
    EventKind kind;
    Date      effective_date;
    // Withdrawal only.
    std::optional<WithdrawalReason> reason;
    // Transfer only; must be non-empty.
    std::string department;
    // Hire only; defaults to IndividualContributor.
    std::optional<SubRole> sub_role;

    static LifecycleEvent simple(EventKind kind, Date date) { return {kind, date, std::nullopt, {}, std::nullopt}; }
    static LifecycleEvent withdrawal(WithdrawalReason reason, Date date)
    {
        return {EventKind::Withdrawal, date, reason, {}, std::nullopt};
    }
    static LifecycleEvent transfer(std::string department, Date date)
    {
        return {EventKind::Transfer, date, std::nullopt, std::move(department), std::nullopt};
    }
    static LifecycleEvent hire(Date date, std::optional<SubRole> sub_role = std::nullopt)
    {
        return {EventKind::Hire, date, std::nullopt, {}, sub_role};
    }

    bool operator==(const LifecycleEvent&) const = default;
};

struct PiiValue {
    std::string value;
    bool        sensitive = true;

    bool operator==(const PiiValue&) const = default;
};

/// The last event applied to an identity. Lets a re-delivered feed line be
/// recognised as already applied.
struct AppliedEvent {
    EventKind kind;
    Date      effective_date;

    bool operator==(const AppliedEvent&) const = default;
};

struct Identity {
    PersonId                        person_id;
    std::string                     full_name;
    Role                            role     = Role::Student;
    SubRole                         sub_role = SubRole::Prospect;
    std::string                     department;
    IdentityStatus                  status = IdentityStatus::Active;
    std::map<std::string, PiiValue> pii;
    std::optional<AppliedEvent>     last_event;

    bool operator==(const Identity&) const = default;
};

enum class Violation { EmptyPersonId, InvalidRoleSubRolePair, EmptyFullName };

bool is_valid_pair(Role role, SubRole sub_role) noexcept;

/// Pure lifecycle transition. Returns the successor identity or
/// UndefinedTransition / InvalidEvent.
Result<Identity> apply_event(const Identity& identity, const LifecycleEvent& event);

/// Checks whether an event carries a well-formed payload for its kind.
Status validate_event(const LifecycleEvent& event);

std::vector<Violation> validate_identity(const Identity& identity);

// Wire names (lowercase snake case).
std::string_view to_string(Role role) noexcept;
std::string_view to_string(SubRole sub_role) noexcept;
std::string_view to_string(IdentityStatus status) noexcept;
std::string_view to_string(ResourceId resource) noexcept;
std::string_view to_string(EventKind kind) noexcept;
std::string_view to_string(WithdrawalReason reason) noexcept;
std::string_view to_string(Violation violation) noexcept;

std::optional<Role>             parse_role(std::string_view text) noexcept;
std::optional<SubRole>          parse_sub_role(std::string_view text) noexcept;
std::optional<IdentityStatus>   parse_status(std::string_view text) noexcept;
std::optional<ResourceId>       parse_resource(std::string_view text) noexcept;
std::optional<EventKind>        parse_event_kind(std::string_view text) noexcept;
std::optional<WithdrawalReason> parse_withdrawal_reason(std::string_view text) noexcept;

} // namespace idfabric

#endif
