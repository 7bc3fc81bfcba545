/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_ADMIN_HPP_
#define IDFABRIC_ADMIN_HPP_

#include <idfabric/audit.hpp>
#include <idfabric/authn.hpp>
#include <idfabric/resources.hpp>

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>

namespace idfabric {

struct AdminRole {
    enum class Kind { DomainAdmin, SeniorAppAdmin, AppAdmin };

    Kind kind = Kind::DomainAdmin;
    // AppAdmin only.
    std::optional<ResourceId> application;

    static AdminRole domain_admin() { return {Kind::DomainAdmin, std::nullopt}; }
    static AdminRole senior_app_admin() { return {Kind::SeniorAppAdmin, std::nullopt}; }
    static AdminRole app_admin(ResourceId app) { return {Kind::AppAdmin, app}; }

    auto operator<=>(const AdminRole&) const = default;
};

/// "domain_admin", "senior_app_admin", "app_admin:<application>".
std::string              to_string(const AdminRole& role);
std::optional<AdminRole> parse_admin_role(std::string_view text);

enum class AdminActionKind {
    ManageApplicationGroups,
    AddMember,
    ModifyAccess,
    DeleteMember,
    CreateViewGroups,
    CreateViewSubGroups,
    AssignApplicationAdmin,
    ViewMembers,
};

inline constexpr std::array kAllAdminActions {AdminActionKind::ManageApplicationGroups, AdminActionKind::AddMember,
    AdminActionKind::ModifyAccess, AdminActionKind::DeleteMember, AdminActionKind::CreateViewGroups,
    AdminActionKind::CreateViewSubGroups, AdminActionKind::AssignApplicationAdmin, AdminActionKind::ViewMembers};

std::string_view               to_string(AdminActionKind kind) noexcept;
std::optional<AdminActionKind> parse_admin_action(std::string_view text) noexcept;

/// True for the actions whose target names a member.
bool takes_member(AdminActionKind kind) noexcept;

struct AdminAction {
    AdminActionKind         kind = AdminActionKind::ViewMembers;
    ResourceId              application = ResourceId::LearningPlatform;
    std::string             group;
    std::optional<PersonId> member;
    // Access level for AddMember/ModifyAccess, sub-group name for
    // CreateViewSubGroups, assignee for AssignApplicationAdmin.
    std::string argument;
};

struct PermissionDecision {
    bool        permitted = false;
    std::string rule;
};

/// The delegated-administration table. Pure; anything not granted is denied.
PermissionDecision is_permitted(const AdminRole& role, const AdminAction& action);
inline bool        is_permitted(const AdminRole& role, AdminActionKind kind, ResourceId application)
{
    return is_permitted(role, AdminAction {kind, application, {}, std::nullopt, {}}).permitted;
}

/// Applications that carry fine-grained groups.
bool has_groups(ResourceId application) noexcept;

struct Group {
    std::set<PersonId>                 members;
    std::set<std::string>              sub_groups;
    std::map<PersonId, std::string>    access_levels;

    bool operator==(const Group&) const = default;
};

using GroupKey = std::pair<ResourceId, std::string>;

struct GroupTable {
    std::map<GroupKey, Group>               groups;
    std::map<PersonId, std::set<AdminRole>> role_holders;

    bool operator==(const GroupTable&) const = default;

    bool holds(const PersonId& person, const AdminRole& role) const;
};

struct AdminOutcome {
    GroupTable table;
    // ViewMembers / CreateViewGroups listing.
    std::vector<PersonId> members;
};

/// Validates the session, the two-factor requirement, that the actor holds
/// `role`, and the permission table, then applies the action to a copy of
/// `groups`. Every call is audited once, denials included.
Result<AdminOutcome> perform_admin_action(const SessionTable& sessions, std::string_view session_token,
    const AdminRole& role, const AdminAction& action, const GroupTable& groups, const ResourceEndpoint& application,
    AuditLog& audit, const Clock& clock);

/// Serializes admin mutations on one shared table.
class AdminService {
public:
    Result<AdminOutcome> perform(const SessionTable& sessions, std::string_view session_token, const AdminRole& role,
        const AdminAction& action, const ResourceEndpoint& application, AuditLog& audit, const Clock& clock);

    GroupTable table() const;
    void       replace(GroupTable table);

    /// Operator bootstrap of role holders; audited.
    Status grant(const PersonId& person, const AdminRole& role, AuditLog& audit);

private:
    mutable std::mutex mMutex;
    GroupTable         mTable;
};

} // namespace idfabric

#endif
