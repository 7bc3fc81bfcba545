/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/resources.hpp>

#include <charconv>

namespace idfabric {

namespace {

Error not_found(ResourceId id, const PersonId& person)
{
    return make_error(Errc::AccountNotFound, person.str() + " on " + std::string {to_string(id)});
}

} // namespace

std::string_view to_string(AccountState state) noexcept
{
    return state == AccountState::Active ? "active" : "suspended";
}

std::optional<AccountState> parse_account_state(std::string_view text) noexcept
{
    if (text == "active") {
        return AccountState::Active;
    }
    if (text == "suspended") {
        return AccountState::Suspended;
    }
    return std::nullopt;
}

std::string to_string(const FaultMode& mode)
{
    switch (mode.kind) {
    case FaultMode::Kind::Healthy:
        return "healthy";
    case FaultMode::Kind::Down:
        return "down";
    case FaultMode::Kind::Intermittent:
        return "intermittent:" + std::to_string(mode.fail_every_nth);
    }
    return "?";
}

std::optional<FaultMode> parse_fault_mode(std::string_view text)
{
    if (text == "healthy") {
        return FaultMode::healthy();
    }
    if (text == "down") {
        return FaultMode::down();
    }
    constexpr std::string_view prefix = "intermittent:";
    if (text.substr(0, prefix.size()) == prefix) {
        auto     digits = text.substr(prefix.size());
        unsigned n      = 0;
        auto [ptr, ec]  = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc {} && ptr == digits.data() + digits.size() && n >= 1) {
            return FaultMode::intermittent(n);
        }
    }
    return std::nullopt;
}

ResourceEndpoint::ResourceEndpoint(ResourceId id)
    : mId(id)
{
}

Status ResourceEndpoint::admit_mutation()
{
    ++mMutationAttempts;

    if (!mConnection.channel_secure) {
        return make_error(Errc::InsecureChannel, std::string {to_string(mId)});
    }
    if (!mConnection.privileged) {
        return make_error(Errc::PrivilegeRequired, std::string {to_string(mId)});
    }

    switch (mFault.kind) {
    case FaultMode::Kind::Healthy:
        break;
    case FaultMode::Kind::Down:
        return make_error(Errc::ResourceDown, std::string {to_string(mId)});
    case FaultMode::Kind::Intermittent:
        if (mFaultCalls++ % mFault.fail_every_nth == 0) {
            return make_error(Errc::ResourceDown, std::string {to_string(mId)} + " (intermittent)");
        }
        break;
    }
    return {};
}

Result<Account> ResourceEndpoint::create_account(const PersonId& person, const Attributes& attributes)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted.error();
    }

    if (auto it = mAccounts.find(person); it != mAccounts.end()) {
        if (it->second.attributes != attributes) {
            return make_error(Errc::AttributeConflict, person.str() + " on " + std::string {to_string(mId)});
        }
        ++mMutationSuccesses;
        return it->second;
    }

    Account account {person, mId, AccountState::Active, attributes, std::nullopt, {}};
    mAccounts.emplace(person, account);
    ++mMutationSuccesses;
    return account;
}

Status ResourceEndpoint::suspend_account(const PersonId& person)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return not_found(mId, person);
    }
    it->second.state = AccountState::Suspended;
    ++mMutationSuccesses;
    return {};
}

Status ResourceEndpoint::restore_account(const PersonId& person)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return not_found(mId, person);
    }
    it->second.state = AccountState::Active;
    ++mMutationSuccesses;
    return {};
}

Status ResourceEndpoint::delete_account(const PersonId& person)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    mAccounts.erase(person);
    ++mMutationSuccesses;
    return {};
}

Status ResourceEndpoint::set_attributes(const PersonId& person, const Attributes& attributes)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return not_found(mId, person);
    }
    for (const auto& [key, value] : attributes) {
        it->second.attributes[key] = value;
    }
    ++mMutationSuccesses;
    return {};
}

Status ResourceEndpoint::set_certificate(const PersonId& person, const Certificate& cert)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    if (mId != ResourceId::AccessRegistry) {
        return make_error(Errc::InvalidArgument, "certificates are stored on the access registry only");
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return not_found(mId, person);
    }
    it->second.stored_certificate = cert;
    ++mMutationSuccesses;
    return {};
}

Status ResourceEndpoint::set_password_hash(const PersonId& person, const std::string& hash)
{
    std::lock_guard lock {mMutex};

    if (auto admitted = admit_mutation(); !admitted) {
        return admitted;
    }
    if (mId != ResourceId::AccessRegistry) {
        return make_error(Errc::InvalidArgument, "password hashes are stored on the access registry only");
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return not_found(mId, person);
    }
    it->second.password_hash = hash;
    ++mMutationSuccesses;
    return {};
}

Result<std::vector<Account>> ResourceEndpoint::list_accounts() const
{
    std::lock_guard lock {mMutex};

    if (mFault.kind == FaultMode::Kind::Down) {
        return make_error(Errc::ResourceDown, std::string {to_string(mId)});
    }
    std::vector<Account> out;
    out.reserve(mAccounts.size());
    for (const auto& [_, account] : mAccounts) {
        out.push_back(account);
    }
    return out;
}

Result<std::optional<Account>> ResourceEndpoint::find_account(const PersonId& person) const
{
    std::lock_guard lock {mMutex};

    if (mFault.kind == FaultMode::Kind::Down) {
        return make_error(Errc::ResourceDown, std::string {to_string(mId)});
    }
    auto it = mAccounts.find(person);
    if (it == mAccounts.end()) {
        return std::optional<Account> {};
    }
    return std::optional<Account> {it->second};
}

Result<std::vector<Account>> ResourceEndpoint::search(std::string_view filter_text) const
{
    auto filter = parse_filter(filter_text);
    if (!filter) {
        return filter.error();
    }

    std::lock_guard lock {mMutex};

    if (mFault.kind == FaultMode::Kind::Down) {
        return make_error(Errc::ResourceDown, std::string {to_string(mId)});
    }
    std::vector<Account> out;
    for (const auto& [_, account] : mAccounts) {
        if (matches(*filter, account.attributes)) {
            out.push_back(account);
        }
    }
    return out;
}

void ResourceEndpoint::inject_fault(FaultMode mode)
{
    std::lock_guard lock {mMutex};
    mFault      = mode;
    mFaultCalls = 0;
}

std::uint64_t ResourceEndpoint::fault_calls() const
{
    std::lock_guard lock {mMutex};
    return mFaultCalls;
}

void ResourceEndpoint::restore_fault(FaultMode mode, std::uint64_t calls)
{
    std::lock_guard lock {mMutex};
    mFault      = mode;
    mFaultCalls = calls;
}

FaultMode ResourceEndpoint::fault_mode() const
{
    std::lock_guard lock {mMutex};
    return mFault;
}

void ResourceEndpoint::set_connection(ConnectionSecurity connection)
{
    std::lock_guard lock {mMutex};
    mConnection = connection;
}

ConnectionSecurity ResourceEndpoint::connection() const
{
    std::lock_guard lock {mMutex};
    return mConnection;
}

void ResourceEndpoint::put_account_unchecked(Account account)
{
    std::lock_guard lock {mMutex};
    account.resource = mId;
    auto key         = account.person_id;
    mAccounts.insert_or_assign(key, std::move(account));
}

void ResourceEndpoint::erase_account_unchecked(const PersonId& person)
{
    std::lock_guard lock {mMutex};
    mAccounts.erase(person);
}

std::vector<Account> ResourceEndpoint::accounts_unchecked() const
{
    std::lock_guard      lock {mMutex};
    std::vector<Account> out;
    for (const auto& [_, account] : mAccounts) {
        out.push_back(account);
    }
    return out;
}

ManagedResources::ManagedResources()
{
    for (auto id : kAllResources) {
        mEndpoints[static_cast<std::size_t>(id)] = std::make_unique<ResourceEndpoint>(id);
    }
}

void ManagedResources::heal_all()
{
    for (auto& endpoint : mEndpoints) {
        endpoint->inject_fault(FaultMode::healthy());
    }
}

std::uint64_t ManagedResources::total_mutation_attempts() const
{
    std::uint64_t total = 0;
    for (const auto& endpoint : mEndpoints) {
        total += endpoint->mutation_attempts();
    }
    return total;
}

Result<std::optional<Account>> find_registry_account_by_uid(const ResourceEndpoint& registry, std::string_view uid)
{
    auto filter = build_search_filter("uid", uid);
    if (!filter) {
        return filter.error();
    }
    auto hits = registry.search(render(*filter));
    if (!hits) {
        return hits.error();
    }
    if (hits->empty()) {
        return std::optional<Account> {};
    }
    return std::optional<Account> {hits->front()};
}

} // namespace idfabric
