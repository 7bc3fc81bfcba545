/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/guard/access.hpp>
#include <idfabric/guard/protect.hpp>

#include <sodium.h>

namespace idfabric {

void AccessControlList::grant_person(const ObjectRef& object, const PersonId& person)
{
    mEntries.insert(AclEntry {object, person, std::nullopt});
}

void AccessControlList::grant_group(const ObjectRef& object, const GroupKey& group)
{
    mEntries.insert(AclEntry {object, std::nullopt, group});
}

void AccessControlList::revoke(const AclEntry& entry)
{
    mEntries.erase(entry);
}

bool AccessControlList::allows(const ObjectRef& object, const PersonId& person, const GroupTable& groups) const
{
    for (const auto& entry : mEntries) {
        if (entry.object != object) {
            continue;
        }
        if (entry.person && *entry.person == person) {
            return true;
        }
        if (entry.group) {
            auto it = groups.groups.find(*entry.group);
            if (it != groups.groups.end() && it->second.members.contains(person)) {
                return true;
            }
        }
    }
    return false;
}

ObjectReferenceMap::ObjectReferenceMap(std::string key)
    : mKey(std::move(key))
{
    ensure_crypto_ready();
}

std::string ObjectReferenceMap::handle_for(const ObjectRef& object)
{
    auto material = std::string {to_string(object.resource)} + '\0' + object.path;

    unsigned char digest[16];
    crypto_generichash(digest, sizeof(digest), reinterpret_cast<const unsigned char*>(material.data()),
        material.size(), reinterpret_cast<const unsigned char*>(mKey.data()), mKey.size());
    char hex[sizeof(digest) * 2 + 1];
    sodium_bin2hex(hex, sizeof(hex), digest, sizeof(digest));

    std::lock_guard lock {mMutex};
    mByHandle.emplace(hex, object);
    return hex;
}

std::optional<ObjectRef> ObjectReferenceMap::resolve(std::string_view handle) const
{
    std::lock_guard lock {mMutex};
    auto            it = mByHandle.find(std::string {handle});
    if (it == mByHandle.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string_view to_string(DenyReason reason) noexcept
{
    switch (reason) {
    case DenyReason::SessionInvalid:
        return "session_invalid";
    case DenyReason::UnknownHandle:
        return "unknown_handle";
    case DenyReason::NoGrant:
        return "no_grant";
    }
    return "?";
}

AccessDecision check_object_access(const SessionTable& sessions, std::string_view session_token,
    std::string_view handle, const ObjectReferenceMap& references, const AccessControlList& acl,
    const GroupTable& groups, Timestamp now)
{
    auto session = sessions.validate(session_token, now);
    if (!session) {
        return AccessDecision::deny(DenyReason::SessionInvalid);
    }
    auto object = references.resolve(handle);
    if (!object) {
        return AccessDecision::deny(DenyReason::UnknownHandle);
    }
    if (!acl.allows(*object, session->person_id, groups)) {
        return AccessDecision::deny(DenyReason::NoGrant);
    }
    return AccessDecision::allow();
}

} // namespace idfabric
