/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/identity.hpp>

#include <algorithm>

namespace idfabric {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<E, N>& values) noexcept
{
    auto it = std::find_if(values.begin(), values.end(), [&](E v) { return to_string(v) == text; });
    if (it == values.end()) {
        return std::nullopt;
    }
    return *it;
}

Error undefined(const Identity& identity, const LifecycleEvent& event)
{
    return make_error(Errc::UndefinedTransition,
        std::string {to_string(event.kind)} + " not applicable to " + std::string {to_string(identity.role)} + "/"
            + std::string {to_string(identity.sub_role)} + " (" + std::string {to_string(identity.status)} + ")");
}

} // namespace

bool is_valid_pair(Role role, SubRole sub_role) noexcept
{
    switch (role) {
    case Role::Employee:
        return sub_role == SubRole::Management || sub_role == SubRole::IndividualContributor;
    case Role::Student:
        return sub_role == SubRole::Prospect || sub_role == SubRole::Active || sub_role == SubRole::Inactive
            || sub_role == SubRole::Alumni;
    case Role::Faculty:
    case Role::Contractor:
        return sub_role == SubRole::None;
    }
    return false;
}

Status validate_event(const LifecycleEvent& event)
{
    if (!event.effective_date.ok()) {
        return make_error(Errc::InvalidEvent, "invalid effective date");
    }
    if (event.kind == EventKind::Withdrawal && !event.reason) {
        return make_error(Errc::InvalidEvent, "withdrawal requires a reason");
    }
    if (event.kind != EventKind::Withdrawal && event.reason) {
        return make_error(Errc::InvalidEvent, "reason is only valid for withdrawal");
    }
    if (event.kind == EventKind::Transfer && event.department.empty()) {
        return make_error(Errc::InvalidEvent, "transfer requires a department");
    }
    if (event.sub_role) {
        if (event.kind != EventKind::Hire) {
            return make_error(Errc::InvalidEvent, "sub-role payload is only valid for hire");
        }
        if (!is_valid_pair(Role::Employee, *event.sub_role)) {
            return make_error(Errc::InvalidEvent, "hire sub-role must be an employee sub-role");
        }
    }
    return {};
}

Result<Identity> apply_event(const Identity& identity, const LifecycleEvent& event)
{
    if (auto status = validate_event(event); !status) {
        return status.error();
    }

    const bool isStudent    = identity.role == Role::Student;
    const bool isTerminated = identity.status == IdentityStatus::Terminated;

    Identity next   = identity;
    next.last_event = AppliedEvent {event.kind, event.effective_date};

    switch (event.kind) {
    case EventKind::Application:
        if (!isTerminated) {
            return undefined(identity, event);
        }
        next.role     = Role::Student;
        next.sub_role = SubRole::Prospect;
        next.status   = IdentityStatus::Active;
        return next;

    case EventKind::Hire:
        if (!isTerminated) {
            return undefined(identity, event);
        }
        next.role     = Role::Employee;
        next.sub_role = event.sub_role.value_or(SubRole::IndividualContributor);
        next.status   = IdentityStatus::Active;
        return next;

    case EventKind::Matriculation:
        if (!isStudent || isTerminated || identity.sub_role != SubRole::Prospect) {
            return undefined(identity, event);
        }
        next.sub_role = SubRole::Active;
        next.status   = IdentityStatus::Active;
        return next;

    case EventKind::Enrollment:
        if (!isStudent || identity.status != IdentityStatus::Active || identity.sub_role != SubRole::Active) {
            return undefined(identity, event);
        }
        return next;

    case EventKind::Withdrawal:
        if (!isStudent || identity.status != IdentityStatus::Active || identity.sub_role != SubRole::Active) {
            return undefined(identity, event);
        }
        next.sub_role = SubRole::Inactive;
        next.status   = IdentityStatus::Suspended;
        return next;

    case EventKind::Graduation:
        if (!isStudent || identity.status != IdentityStatus::Active || identity.sub_role != SubRole::Active) {
            return undefined(identity, event);
        }
        next.sub_role = SubRole::Alumni;
        return next;

    case EventKind::AlumniTransition:
        if (!isStudent || isTerminated || identity.sub_role != SubRole::Inactive) {
            return undefined(identity, event);
        }
        next.sub_role = SubRole::Alumni;
        next.status   = IdentityStatus::Active;
        return next;

    case EventKind::Transfer:
        if (isTerminated) {
            return undefined(identity, event);
        }
        next.department = event.department;
        return next;

    case EventKind::LeaveOfAbsence:
        if (isStudent || identity.status != IdentityStatus::Active) {
            return undefined(identity, event);
        }
        next.status = IdentityStatus::Suspended;
        return next;

    case EventKind::ReturnFromLeave:
        if (isStudent || identity.status != IdentityStatus::Suspended) {
            return undefined(identity, event);
        }
        next.status = IdentityStatus::Active;
        return next;

    case EventKind::Termination:
        if (isTerminated) {
            return undefined(identity, event);
        }
        next.status = IdentityStatus::Terminated;
        return next;
    }

    return undefined(identity, event);
}

std::vector<Violation> validate_identity(const Identity& identity)
{
    std::vector<Violation> violations;
    if (identity.person_id.empty()) {
        violations.push_back(Violation::EmptyPersonId);
    }
    if (!is_valid_pair(identity.role, identity.sub_role)) {
        violations.push_back(Violation::InvalidRoleSubRolePair);
    }
    if (identity.full_name.empty()) {
        violations.push_back(Violation::EmptyFullName);
    }
    return violations;
}

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::Employee:
        return "employee";
    case Role::Student:
        return "student";
    case Role::Faculty:
        return "faculty";
    case Role::Contractor:
        return "contractor";
    }
    return "?";
}

std::string_view to_string(SubRole sub_role) noexcept
{
    switch (sub_role) {
    case SubRole::None:
        return "none";
    case SubRole::Management:
        return "management";
    case SubRole::IndividualContributor:
        return "individual_contributor";
    case SubRole::Prospect:
        return "prospect";
    case SubRole::Active:
        return "active";
    case SubRole::Inactive:
        return "inactive";
    case SubRole::Alumni:
        return "alumni";
    }
    return "?";
}

std::string_view to_string(IdentityStatus status) noexcept
{
    switch (status) {
    case IdentityStatus::Active:
        return "active";
    case IdentityStatus::Suspended:
        return "suspended";
    case IdentityStatus::Terminated:
        return "terminated";
    }
    return "?";
}

std::string_view to_string(ResourceId resource) noexcept
{
    switch (resource) {
    case ResourceId::AccessRegistry:
        return "access_registry";
    case ResourceId::DirectoryMail:
        return "directory_mail";
    case ResourceId::UnixHosts:
        return "unix_hosts";
    case ResourceId::StudentPortal:
        return "student_portal";
    case ResourceId::LearningPlatform:
        return "learning_platform";
    }
    return "?";
}

std::string_view to_string(EventKind kind) noexcept
{
    switch (kind) {
    case EventKind::Application:
        return "application";
    case EventKind::Matriculation:
        return "matriculation";
    case EventKind::Enrollment:
        return "enrollment";
    case EventKind::Withdrawal:
        return "withdrawal";
    case EventKind::Graduation:
        return "graduation";
    case EventKind::AlumniTransition:
        return "alumni_transition";
    case EventKind::Hire:
        return "hire";
    case EventKind::Transfer:
        return "transfer";
    case EventKind::LeaveOfAbsence:
        return "leave_of_absence";
    case EventKind::ReturnFromLeave:
        return "return_from_leave";
    case EventKind::Termination:
        return "termination";
    }
    return "?";
}

std::string_view to_string(WithdrawalReason reason) noexcept
{
    switch (reason) {
    case WithdrawalReason::Academic:
        return "academic";
    case WithdrawalReason::Financial:
        return "financial";
    case WithdrawalReason::Voluntary:
        return "voluntary";
    }
    return "?";
}

std::string_view to_string(Violation violation) noexcept
{
    switch (violation) {
    case Violation::EmptyPersonId:
        return "EmptyPersonId";
    case Violation::InvalidRoleSubRolePair:
        return "InvalidRoleSubRolePair";
    case Violation::EmptyFullName:
        return "EmptyFullName";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view text) noexcept
{
    return lookup(text, kAllRoles);
}

std::optional<SubRole> parse_sub_role(std::string_view text) noexcept
{
    return lookup(text, kAllSubRoles);
}

std::optional<IdentityStatus> parse_status(std::string_view text) noexcept
{
    static constexpr std::array kAll {IdentityStatus::Active, IdentityStatus::Suspended, IdentityStatus::Terminated};
    return lookup(text, kAll);
}

std::optional<ResourceId> parse_resource(std::string_view text) noexcept
{
    return lookup(text, kAllResources);
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept
{
    return lookup(text, kAllEventKinds);
}

std::optional<WithdrawalReason> parse_withdrawal_reason(std::string_view text) noexcept
{
    static constexpr std::array kAll {
        WithdrawalReason::Academic, WithdrawalReason::Financial, WithdrawalReason::Voluntary};
    return lookup(text, kAll);
}

} // namespace idfabric
