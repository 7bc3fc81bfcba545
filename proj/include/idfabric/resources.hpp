/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_RESOURCES_HPP_
#define IDFABRIC_RESOURCES_HPP_

#include <idfabric/certificate.hpp>
#include <idfabric/guard/filter.hpp>
#include <idfabric/identity.hpp>

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace idfabric {

enum class AccountState { Active, Suspended };

std::string_view            to_string(AccountState state) noexcept;
std::optional<AccountState> parse_account_state(std::string_view text) noexcept;

using Attributes = AttributeMap;

struct Account {
    PersonId     person_id;
    ResourceId   resource = ResourceId::AccessRegistry;
    AccountState state    = AccountState::Active;
    Attributes   attributes;
    // AccessRegistry only.
    std::optional<Certificate> stored_certificate;
    std::string                password_hash;

    bool operator==(const Account&) const = default;
};

struct FaultMode {
    enum class Kind { Healthy, Down, Intermittent };

    Kind     kind           = Kind::Healthy;
    unsigned fail_every_nth = 0;

    static FaultMode healthy() { return {}; }
    static FaultMode down() { return {Kind::Down, 0}; }
    static FaultMode intermittent(unsigned n) { return {Kind::Intermittent, n}; }

    bool operator==(const FaultMode&) const = default;
};

/// "healthy", "down", or "intermittent:<n>".
std::string              to_string(const FaultMode& mode);
std::optional<FaultMode> parse_fault_mode(std::string_view text);

struct ConnectionSecurity {
    bool privileged     = true;
    bool channel_secure = true;

    bool operator==(const ConnectionSecurity&) const = default;
};

/// One simulated managed resource. Mutations are serialized on the endpoint
/// and require a privileged, secure connection. Every verb is idempotent.
///
/// Under Intermittent(n) the first mutating call after injection fails and
/// then every n-th one after it. Reads fail only when Down.
class ResourceEndpoint {
public:
    explicit ResourceEndpoint(ResourceId id);

    ResourceEndpoint(const ResourceEndpoint&)            = delete;
    ResourceEndpoint& operator=(const ResourceEndpoint&) = delete;

    ResourceId id() const noexcept { return mId; }

    Result<Account> create_account(const PersonId& person, const Attributes& attributes);
    Status          suspend_account(const PersonId& person);
    Status          restore_account(const PersonId& person);
    Status          delete_account(const PersonId& person);
    /// Merges `attributes` into the account's attribute map.
    Status set_attributes(const PersonId& person, const Attributes& attributes);
    Status set_certificate(const PersonId& person, const Certificate& cert);
    Status set_password_hash(const PersonId& person, const std::string& hash);

    Result<std::vector<Account>>   list_accounts() const;
    Result<std::optional<Account>> find_account(const PersonId& person) const;

    /// Evaluates raw filter text against account attributes.
    Result<std::vector<Account>> search(std::string_view filter_text) const;

    void      inject_fault(FaultMode mode);
    FaultMode fault_mode() const;
    /// Mutating calls seen since the fault was injected; persisted so a
    /// restored endpoint continues the same schedule.
    std::uint64_t fault_calls() const;
    void          restore_fault(FaultMode mode, std::uint64_t calls);

    void               set_connection(ConnectionSecurity connection);
    ConnectionSecurity connection() const;

    /// Count of mutating calls received, whatever their outcome.
    std::uint64_t mutation_attempts() const noexcept { return mMutationAttempts.load(); }
    std::uint64_t mutation_successes() const noexcept { return mMutationSuccesses.load(); }

    // Out-of-band table access: snapshot restore and planting drift in tests.
    // Bypasses faults and connection checks and is not counted.
    void                 put_account_unchecked(Account account);
    void                 erase_account_unchecked(const PersonId& person);
    std::vector<Account> accounts_unchecked() const;

private:
    // Caller holds mMutex.
    Status admit_mutation();

    ResourceId                      mId;
    mutable std::mutex              mMutex;
    std::map<PersonId, Account>     mAccounts;
    FaultMode                       mFault;
    std::uint64_t                   mFaultCalls = 0;
    ConnectionSecurity              mConnection;
    std::atomic<std::uint64_t>      mMutationAttempts {0};
    std::atomic<std::uint64_t>      mMutationSuccesses {0};
};

/// The five managed resources.
class ManagedResources {
public:
    ManagedResources();

    ResourceEndpoint&       at(ResourceId id) { return *mEndpoints[static_cast<std::size_t>(id)]; }
    const ResourceEndpoint& at(ResourceId id) const { return *mEndpoints[static_cast<std::size_t>(id)]; }

    ResourceEndpoint&       registry() { return at(ResourceId::AccessRegistry); }
    const ResourceEndpoint& registry() const { return at(ResourceId::AccessRegistry); }

    void heal_all();

    std::uint64_t total_mutation_attempts() const;

private:
    std::array<std::unique_ptr<ResourceEndpoint>, kAllResources.size()> mEndpoints;
};

/// Registry lookup by uid through an escaped equality filter.
Result<std::optional<Account>> find_registry_account_by_uid(const ResourceEndpoint& registry, std::string_view uid);

} // namespace idfabric

#endif
