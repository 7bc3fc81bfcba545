/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_GUARD_ACCESS_HPP_
#define IDFABRIC_GUARD_ACCESS_HPP_

#include <idfabric/admin.hpp>
#include <idfabric/authn.hpp>

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>

namespace idfabric {

struct ObjectRef {
    ResourceId  resource = ResourceId::StudentPortal;
    std::string path;

    auto operator<=>(const ObjectRef&) const = default;
};

/// A grant to one person, or to every member of one application group.
struct AclEntry {
    ObjectRef               object;
    std::optional<PersonId> person;
    std::optional<GroupKey> group;

    auto operator<=>(const AclEntry&) const = default;
};

class AccessControlList {
public:
    void grant_person(const ObjectRef& object, const PersonId& person);
    void grant_group(const ObjectRef& object, const GroupKey& group);
    void revoke(const AclEntry& entry);

    /// True iff an entry names `person` or a group containing them.
    bool allows(const ObjectRef& object, const PersonId& person, const GroupTable& groups) const;

    const std::set<AclEntry>& entries() const noexcept { return mEntries; }

private:
    std::set<AclEntry> mEntries;
};

/// Indirect object references: clients only ever see opaque handles, which
/// are resolved here on the server.
class ObjectReferenceMap {
public:
    explicit ObjectReferenceMap(std::string key);

    /// Stable for a given object and key.
    std::string handle_for(const ObjectRef& object);
    std::optional<ObjectRef> resolve(std::string_view handle) const;

private:
    std::string                        mKey;
    mutable std::mutex                 mMutex;
    std::map<std::string, ObjectRef>   mByHandle;
};

enum class DenyReason { SessionInvalid, UnknownHandle, NoGrant };

std::string_view to_string(DenyReason reason) noexcept;

struct AccessDecision {
    bool                      allowed = false;
    std::optional<DenyReason> reason;

    static AccessDecision allow() { return {true, std::nullopt}; }
    static AccessDecision deny(DenyReason r) { return {false, r}; }
};

/// Evaluated afresh on every request; nothing is cached between calls.
AccessDecision check_object_access(const SessionTable& sessions, std::string_view session_token,
    std::string_view handle, const ObjectReferenceMap& references, const AccessControlList& acl,
    const GroupTable& groups, Timestamp now);

} // namespace idfabric

#endif
