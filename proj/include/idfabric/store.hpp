/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_STORE_HPP_
#define IDFABRIC_STORE_HPP_

#include <idfabric/identity.hpp>

#include <atomic>
#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

namespace idfabric {

/// Identity store keyed by PersonId; PersonIds are unique by construction.
class IdentityStore {
public:
    Status insert(const Identity& identity);
    Status replace(const Identity& identity);

    Result<std::optional<Identity>> find(const PersonId& person) const;

    /// Consistent point-in-time copy, ordered by PersonId.
    Result<std::vector<Identity>> snapshot() const;

    std::size_t size() const;

    /// Test hook: when unavailable every call fails with StoreUnavailable.
    void set_available(bool available) { mAvailable = available; }

private:
    Status check_available() const;

    mutable std::shared_mutex     mMutex;
    std::map<PersonId, Identity>  mIdentities;
    std::atomic<bool>             mAvailable {true};
};

} // namespace idfabric

#endif
