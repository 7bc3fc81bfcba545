/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/admin.hpp>

namespace idfabric {

namespace {

using K = AdminActionKind;

const std::set<K> kDomainGrants {
    K::ManageApplicationGroups, K::CreateViewGroups, K::CreateViewSubGroups, K::AssignApplicationAdmin};
const std::set<K> kSeniorGrants {K::CreateViewGroups, K::CreateViewSubGroups, K::ViewMembers};
const std::set<K> kAppGrants {K::AddMember, K::ModifyAccess, K::DeleteMember, K::ViewMembers};

constexpr std::string_view kAnonymous = "unauthenticated";

std::string target_of(const AdminAction& action)
{
    std::string out = std::string {to_string(action.application)} + "/" + action.group;
    if (action.member) {
        out += "/" + action.member->str();
    }
    return out;
}

} // namespace

std::string to_string(const AdminRole& role)
{
    switch (role.kind) {
    case AdminRole::Kind::DomainAdmin:
        return "domain_admin";
    case AdminRole::Kind::SeniorAppAdmin:
        return "senior_app_admin";
    case AdminRole::Kind::AppAdmin:
        return "app_admin:" + std::string {role.application ? to_string(*role.application) : "?"};
    }
    return "?";
}

std::optional<AdminRole> parse_admin_role(std::string_view text)
{
    if (text == "domain_admin") {
        return AdminRole::domain_admin();
    }
    if (text == "senior_app_admin") {
        return AdminRole::senior_app_admin();
    }
    constexpr std::string_view prefix = "app_admin:";
    if (text.starts_with(prefix)) {
        if (auto app = parse_resource(text.substr(prefix.size()))) {
            return AdminRole::app_admin(*app);
        }
    }
    return std::nullopt;
}

std::string_view to_string(AdminActionKind kind) noexcept
{
    switch (kind) {
    case K::ManageApplicationGroups:
        return "manage_application_groups";
    case K::AddMember:
        return "add_member";
    case K::ModifyAccess:
        return "modify_access";
    case K::DeleteMember:
        return "delete_member";
    case K::CreateViewGroups:
        return "create_view_groups";
    case K::CreateViewSubGroups:
        return "create_view_sub_groups";
    case K::AssignApplicationAdmin:
        return "assign_application_admin";
    case K::ViewMembers:
        return "view_members";
    }
    return "?";
}

std::optional<AdminActionKind> parse_admin_action(std::string_view text) noexcept
{
    for (auto k : kAllAdminActions) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

bool takes_member(AdminActionKind kind) noexcept
{
    return kind == K::AddMember || kind == K::DeleteMember || kind == K::ModifyAccess;
}

PermissionDecision is_permitted(const AdminRole& role, const AdminAction& action)
{
    switch (role.kind) {
    case AdminRole::Kind::DomainAdmin:
        if (kDomainGrants.contains(action.kind)) {
            return {true, "domain_admin grants " + std::string {to_string(action.kind)}};
        }
        break;
    case AdminRole::Kind::SeniorAppAdmin:
        if (kSeniorGrants.contains(action.kind)) {
            return {true, "senior_app_admin grants " + std::string {to_string(action.kind)}};
        }
        break;
    case AdminRole::Kind::AppAdmin:
        if (!kAppGrants.contains(action.kind)) {
            break;
        }
        if (role.application != action.application) {
            return {false, to_string(role) + " is scoped to another application"};
        }
        return {true, to_string(role) + " grants " + std::string {to_string(action.kind)}};
    }
    return {false, "no grant for " + to_string(role) + " on " + std::string {to_string(action.kind)}};
}

bool has_groups(ResourceId application) noexcept
{
    return application == ResourceId::LearningPlatform || application == ResourceId::StudentPortal;
}

bool GroupTable::holds(const PersonId& person, const AdminRole& role) const
{
    auto it = role_holders.find(person);
    return it != role_holders.end() && it->second.contains(role);
}

Result<AdminOutcome> perform_admin_action(const SessionTable& sessions, std::string_view session_token,
    const AdminRole& role, const AdminAction& action, const GroupTable& groups, const ResourceEndpoint& application,
    AuditLog& audit, const Clock& clock)
{
    if (auto writable = audit.ensure_writable(); !writable) {
        return writable.error();
    }

    auto session = sessions.validate(session_token, clock.now());
    std::string actor {session ? std::string_view {session->person_id.str()} : kAnonymous};
    AuditDetail detail {{"role", to_string(role)}};
    if (!action.argument.empty()) {
        detail["argument"] = action.argument;
    }

    auto conclude = [&](AuditOutcome outcome, Result<AdminOutcome> result) -> Result<AdminOutcome> {
        if (!result) {
            detail["error"] = result.error().describe();
        }
        auto recorded = audit.record(actor, AuditCategory::AdminAction, to_string(action.kind), target_of(action),
            outcome, detail);
        if (!recorded) {
            return recorded.error();
        }
        return result;
    };
    auto denied = [&](std::string why) {
        return conclude(AuditOutcome::Denied, make_error(Errc::PermissionDenied, std::move(why)));
    };
    auto failed = [&](Errc code, std::string why) {
        return conclude(AuditOutcome::Failure, make_error(code, std::move(why)));
    };

    if (!session) {
        return denied("invalid session");
    }
    for (auto f : kAdminFactors) {
        if (!session->factors.contains(f)) {
            return denied("session lacks factor " + std::string {to_string(f)});
        }
    }
    if (!groups.holds(session->person_id, role)) {
        return denied(actor + " does not hold " + to_string(role));
    }
    auto decision = is_permitted(role, action);
    detail["rule"] = decision.rule;
    if (!decision.permitted) {
        return denied(decision.rule);
    }
    if (!has_groups(action.application) || application.id() != action.application) {
        return failed(Errc::UnknownGroup, std::string {to_string(action.application)} + " has no groups");
    }
    if (takes_member(action.kind) != action.member.has_value()) {
        return failed(Errc::InvalidArgument, "member is required exactly for membership actions");
    }

    AdminOutcome out {groups, {}};
    const GroupKey key {action.application, action.group};
    auto           it = out.table.groups.find(key);

    auto require_group = [&]() -> bool { return it != out.table.groups.end(); };

    switch (action.kind) {
    case K::ManageApplicationGroups:
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        out.table.groups.erase(it);
        break;
    case K::CreateViewGroups: {
        if (action.group.empty()) {
            return failed(Errc::InvalidArgument, "empty group name");
        }
        auto& group = out.table.groups[key];
        out.members.assign(group.members.begin(), group.members.end());
        break;
    }
    case K::CreateViewSubGroups:
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        if (!action.argument.empty()) {
            it->second.sub_groups.insert(action.argument);
        }
        break;
    case K::AssignApplicationAdmin:
        if (action.argument.empty()) {
            return failed(Errc::InvalidArgument, "assignee required");
        }
        out.table.role_holders[PersonId {action.argument}].insert(AdminRole::app_admin(action.application));
        break;
    case K::AddMember: {
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        auto account = application.find_account(*action.member);
        if (!account) {
            return failed(account.code(), account.error().message);
        }
        if (!*account || (*account)->state != AccountState::Active) {
            return failed(Errc::MemberLacksAccount,
                action.member->str() + " has no active " + std::string {to_string(action.application)} + " account");
        }
        it->second.members.insert(*action.member);
        it->second.access_levels[*action.member] = action.argument.empty() ? "read" : action.argument;
        break;
    }
    case K::ModifyAccess:
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        if (!it->second.members.contains(*action.member)) {
            return failed(Errc::InvalidArgument, action.member->str() + " is not a member");
        }
        if (action.argument.empty()) {
            return failed(Errc::InvalidArgument, "access level required");
        }
        it->second.access_levels[*action.member] = action.argument;
        break;
    case K::DeleteMember:
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        it->second.members.erase(*action.member);
        it->second.access_levels.erase(*action.member);
        break;
    case K::ViewMembers:
        if (!require_group()) {
            return failed(Errc::UnknownGroup, action.group);
        }
        out.members.assign(it->second.members.begin(), it->second.members.end());
        break;
    }

    return conclude(AuditOutcome::Allowed, std::move(out));
}

Result<AdminOutcome> AdminService::perform(const SessionTable& sessions, std::string_view session_token,
    const AdminRole& role, const AdminAction& action, const ResourceEndpoint& application, AuditLog& audit,
    const Clock& clock)
{
    std::lock_guard lock {mMutex};
    auto outcome = perform_admin_action(sessions, session_token, role, action, mTable, application, audit, clock);
    if (outcome) {
        mTable = outcome->table;
    }
    return outcome;
}

GroupTable AdminService::table() const
{
    std::lock_guard lock {mMutex};
    return mTable;
}

void AdminService::replace(GroupTable table)
{
    std::lock_guard lock {mMutex};
    mTable = std::move(table);
}

Status AdminService::grant(const PersonId& person, const AdminRole& role, AuditLog& audit)
{
    if (role.kind == AdminRole::Kind::AppAdmin && !role.application) {
        return make_error(Errc::InvalidArgument, "app_admin needs an application");
    }
    std::lock_guard lock {mMutex};
    if (auto writable = audit.ensure_writable(); !writable) {
        return writable;
    }
    mTable.role_holders[person].insert(role);
    auto recorded = audit.record(kSystemActor, AuditCategory::AdminAction, "grant_role", person.str(),
        AuditOutcome::Allowed, {{"role", to_string(role)}});
    if (!recorded) {
        return recorded.error();
    }
    return {};
}

} // namespace idfabric
