/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/store.hpp>

#include <mutex>

namespace idfabric {

Status IdentityStore::check_available() const
{
    if (!mAvailable) {
        return make_error(Errc::StoreUnavailable);
    }
    return {};
}

Status IdentityStore::insert(const Identity& identity)
{
    if (auto ok = check_available(); !ok) {
        return ok;
    }
    if (identity.person_id.empty()) {
        return make_error(Errc::InvalidArgument, "empty person id");
    }
    std::unique_lock lock {mMutex};
    if (!mIdentities.emplace(identity.person_id, identity).second) {
        return make_error(Errc::DuplicateIdentity, identity.person_id.str());
    }
    return {};
}

Status IdentityStore::replace(const Identity& identity)
{
    if (auto ok = check_available(); !ok) {
        return ok;
    }
    std::unique_lock lock {mMutex};
    auto             it = mIdentities.find(identity.person_id);
    if (it == mIdentities.end()) {
        return make_error(Errc::UnknownIdentity, identity.person_id.str());
    }
    it->second = identity;
    return {};
}

Result<std::optional<Identity>> IdentityStore::find(const PersonId& person) const
{
    if (auto ok = check_available(); !ok) {
        return ok.error();
    }
    std::shared_lock lock {mMutex};
    auto             it = mIdentities.find(person);
    if (it == mIdentities.end()) {
        return std::optional<Identity> {};
    }
    return std::optional<Identity> {it->second};
}

Result<std::vector<Identity>> IdentityStore::snapshot() const
{
    if (auto ok = check_available(); !ok) {
        return ok.error();
    }
    std::shared_lock      lock {mMutex};
    std::vector<Identity> out;
    out.reserve(mIdentities.size());
    for (const auto& [_, identity] : mIdentities) {
        out.push_back(identity);
    }
    return out;
}

std::size_t IdentityStore::size() const
{
    std::shared_lock lock {mMutex};
    return mIdentities.size();
}

} // namespace idfabric
