/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/authn.hpp>
#include <idfabric/guard/protect.hpp>

#include <sodium.h>

#include <array>
#include <charconv>

namespace idfabric {

namespace {

constexpr std::array kFactors {AuthFactor::Certificate, AuthFactor::Password};
constexpr std::array kReasons {RevocationReason::Unspecified, RevocationReason::KeyCompromise,
    RevocationReason::AffiliationChanged, RevocationReason::Superseded, RevocationReason::CessationOfOperation};

std::string factor_list(const FactorSet& factors)
{
    std::string out;
    for (auto f : factors) {
        if (!out.empty()) {
            out += '+';
        }
        out += to_string(f);
    }
    return out;
}

Denial deny(AuthDenial reason)
{
    return Denial {reason, std::nullopt, std::nullopt, std::nullopt};
}

Result<std::optional<Account>> find_registry_account_by_email(const ResourceEndpoint& registry, std::string_view email)
{
    auto filter = build_search_filter("email", email);
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

} // namespace

std::string_view to_string(AuthFactor factor) noexcept
{
    switch (factor) {
    case AuthFactor::Certificate:
        return "certificate";
    case AuthFactor::Password:
        return "password";
    }
    return "?";
}

std::optional<AuthFactor> parse_auth_factor(std::string_view text) noexcept
{
    for (auto f : kFactors) {
        if (to_string(f) == text) {
            return f;
        }
    }
    return std::nullopt;
}

Status AuthPolicy::validate() const
{
    if (max_failed_attempts < 1) {
        return make_error(Errc::InvalidArgument, "max_failed_attempts must be at least 1");
    }
    if (lockout_duration.count() <= 0 || session_ttl.count() <= 0) {
        return make_error(Errc::InvalidArgument, "durations must be positive");
    }
    return {};
}

FactorSet required_factors_for(ResourceId application)
{
    if (application == ResourceId::LearningPlatform) {
        return {AuthFactor::Password};
    }
    return {AuthFactor::Certificate, AuthFactor::Password};
}

std::string_view to_string(RevocationReason reason) noexcept
{
    switch (reason) {
    case RevocationReason::Unspecified:
        return "unspecified";
    case RevocationReason::KeyCompromise:
        return "key_compromise";
    case RevocationReason::AffiliationChanged:
        return "affiliation_changed";
    case RevocationReason::Superseded:
        return "superseded";
    case RevocationReason::CessationOfOperation:
        return "cessation_of_operation";
    }
    return "?";
}

std::optional<RevocationReason> parse_revocation_reason(std::string_view text) noexcept
{
    for (auto r : kReasons) {
        if (to_string(r) == text) {
            return r;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// StatusResponder

void StatusResponder::add_issuer(const std::string& issuer)
{
    std::lock_guard lock {mMutex};
    auto [it, inserted] = mIssuers.try_emplace(issuer);
    if (inserted) {
        auto list          = std::make_shared<RevocationList>();
        list->issuer       = issuer;
        it->second.current = std::move(list);
    }
}

bool StatusResponder::knows_issuer(const std::string& issuer) const
{
    std::lock_guard lock {mMutex};
    return mIssuers.contains(issuer);
}

Result<Certificate> StatusResponder::issue(const std::string& issuer, const std::string& uid,
    const std::string& email, Date not_before, Date not_after, const std::string& key_token)
{
    if (!not_before.ok() || !not_after.ok() || not_after < not_before) {
        return make_error(Errc::InvalidArgument, "notBefore must not follow notAfter");
    }
    std::lock_guard lock {mMutex};
    auto            it = mIssuers.find(issuer);
    if (it == mIssuers.end()) {
        return make_error(Errc::InvalidArgument, "unknown issuer " + issuer);
    }
    Certificate cert {mNextSerial++, uid, email, issuer, not_before, not_after, key_token};
    it->second.issued.insert(cert.serial);
    return cert;
}

StatusAnswer StatusResponder::query(const Certificate& cert) const
{
    ++mQueries;
    std::lock_guard lock {mMutex};
    auto            it = mIssuers.find(cert.issuer);
    if (it == mIssuers.end() || !it->second.issued.contains(cert.serial)) {
        return {CertStatus::Unknown, std::nullopt};
    }
    const auto& entries = it->second.current->entries;
    if (auto hit = entries.find(cert.serial); hit != entries.end()) {
        return {CertStatus::Revoked, hit->second};
    }
    return {CertStatus::Good, std::nullopt};
}

Result<std::shared_ptr<const RevocationList>> StatusResponder::publish_revocation(
    std::uint64_t serial, RevocationReason reason, Timestamp now)
{
    std::lock_guard lock {mMutex};
    for (auto& [name, state] : mIssuers) {
        if (!state.issued.contains(serial)) {
            continue;
        }
        if (state.current->entries.contains(serial)) {
            return state.current;
        }
        auto next       = std::make_shared<RevocationList>(*state.current);
        next->version   = state.current->version + 1;
        next->issued_at = now;
        next->entries.emplace(serial, RevocationEntry {serial, reason, now});
        state.current = std::move(next);
        return state.current;
    }
    return make_error(Errc::UnknownSerial, std::to_string(serial));
}

std::shared_ptr<const RevocationList> StatusResponder::current_list(const std::string& issuer) const
{
    std::lock_guard lock {mMutex};
    auto            it = mIssuers.find(issuer);
    return it == mIssuers.end() ? nullptr : it->second.current;
}

std::map<std::string, StatusResponder::IssuerState> StatusResponder::state() const
{
    std::lock_guard lock {mMutex};
    return mIssuers;
}

std::uint64_t StatusResponder::next_serial() const
{
    std::lock_guard lock {mMutex};
    return mNextSerial;
}

void StatusResponder::restore(std::map<std::string, IssuerState> issuers, std::uint64_t next_serial)
{
    std::lock_guard lock {mMutex};
    mIssuers    = std::move(issuers);
    mNextSerial = next_serial;
}

// ---------------------------------------------------------------------------
// Sessions

std::string session_token(const Session& session)
{
    return session.session_id + "." + session.person_id.str() + "."
        + std::to_string(session.expires_at.time_since_epoch().count()) + "." + factor_list(session.factors);
}

SessionTable::SessionTable(std::uint64_t seed)
    : mSeed(seed)
{
    ensure_crypto_ready();
}

Session SessionTable::issue(const PersonId& person, const FactorSet& factors, Timestamp now, std::chrono::seconds ttl)
{
    std::lock_guard lock {mMutex};

    std::array<unsigned char, randombytes_SEEDBYTES> seed {};
    for (std::size_t i = 0; i < 8; ++i) {
        seed[i]     = static_cast<unsigned char>(mSeed >> (8 * i));
        seed[8 + i] = static_cast<unsigned char>(mCounter >> (8 * i));
    }
    ++mCounter;

    unsigned char raw[16];
    randombytes_buf_deterministic(raw, sizeof(raw), seed.data());
    char hex[sizeof(raw) * 2 + 1];
    sodium_bin2hex(hex, sizeof(hex), raw, sizeof(raw));

    Session session {hex, person, now, now + ttl, factors};
    mSessions[session.session_id] = session;
    return session;
}

std::optional<Session> SessionTable::validate(std::string_view token, Timestamp now) const
{
    auto dot = token.find('.');
    if (dot == std::string_view::npos) {
        return std::nullopt;
    }
    std::lock_guard lock {mMutex};
    auto            it = mSessions.find(std::string {token.substr(0, dot)});
    if (it == mSessions.end()) {
        return std::nullopt;
    }
    auto expected = session_token(it->second);
    if (expected.size() != token.size() || sodium_memcmp(expected.data(), token.data(), token.size()) != 0) {
        return std::nullopt;
    }
    if (now >= it->second.expires_at) {
        return std::nullopt;
    }
    return it->second;
}

void SessionTable::revoke(const std::string& session_id)
{
    std::lock_guard lock {mMutex};
    mSessions.erase(session_id);
}

std::vector<Session> SessionTable::sessions() const
{
    std::lock_guard      lock {mMutex};
    std::vector<Session> out;
    for (const auto& [_, s] : mSessions) {
        out.push_back(s);
    }
    return out;
}

std::uint64_t SessionTable::counter() const
{
    std::lock_guard lock {mMutex};
    return mCounter;
}

void SessionTable::restore(std::vector<Session> sessions, std::uint64_t counter)
{
    std::lock_guard lock {mMutex};
    mSessions.clear();
    for (auto& s : sessions) {
        auto id        = s.session_id;
        mSessions[id] = std::move(s);
    }
    mCounter = counter;
}

// ---------------------------------------------------------------------------
// Lockout

std::optional<Timestamp> LockoutTracker::locked_until(const PersonId& person, Timestamp now)
{
    std::lock_guard lock {mMutex};
    auto            it = mStates.find(person);
    if (it == mStates.end() || !it->second.locked_until) {
        return std::nullopt;
    }
    if (*it->second.locked_until > now) {
        return it->second.locked_until;
    }
    mStates.erase(it);
    return std::nullopt;
}

LockoutTracker::Failure LockoutTracker::record_failure(const PersonId& person, Timestamp now, const AuthPolicy& policy)
{
    std::lock_guard lock {mMutex};
    auto&           state = mStates[person];
    if (state.locked_until) {
        if (*state.locked_until > now) {
            return Failure::AlreadyLocked;
        }
        state = {};
    }
    if (++state.consecutive_failures >= policy.max_failed_attempts) {
        state.locked_until = now + policy.lockout_duration;
        return Failure::NowLocked;
    }
    return Failure::Counted;
}

void LockoutTracker::record_success(const PersonId& person)
{
    std::lock_guard lock {mMutex};
    mStates.erase(person);
}

LockState LockoutTracker::state_of(const PersonId& person) const
{
    std::lock_guard lock {mMutex};
    auto            it = mStates.find(person);
    return it == mStates.end() ? LockState {} : it->second;
}

std::map<PersonId, LockState> LockoutTracker::entries() const
{
    std::lock_guard lock {mMutex};
    return mStates;
}

void LockoutTracker::restore(std::map<PersonId, LockState> entries)
{
    std::lock_guard lock {mMutex};
    mStates = std::move(entries);
}

// ---------------------------------------------------------------------------
// Flows

std::string_view to_string(AuthDenial denial) noexcept
{
    switch (denial) {
    case AuthDenial::Revoked:
        return "revoked";
    case AuthDenial::ExpiredCertificate:
        return "expired_certificate";
    case AuthDenial::NotYetValid:
        return "not_yet_valid";
    case AuthDenial::UnknownIssuer:
        return "unknown_issuer";
    case AuthDenial::StatusUnknown:
        return "status_unknown";
    case AuthDenial::ProofMismatch:
        return "proof_mismatch";
    case AuthDenial::NoRegistryAccount:
        return "no_registry_account";
    case AuthDenial::RegistryUnavailable:
        return "registry_unavailable";
    case AuthDenial::CertificateMismatch:
        return "certificate_mismatch";
    case AuthDenial::AccountSuspended:
        return "account_suspended";
    case AuthDenial::BadCredentials:
        return "bad_credentials";
    case AuthDenial::LockedOut:
        return "locked_out";
    case AuthDenial::MissingFactor:
        return "missing_factor";
    case AuthDenial::FactorMismatch:
        return "factor_mismatch";
    case AuthDenial::AuditUnavailable:
        return "audit_unavailable";
    }
    return "?";
}

std::string Denial::describe() const
{
    std::string out {to_string(reason)};
    if (revocation) {
        out += "(serial " + std::to_string(revocation->serial) + ", " + std::string {to_string(revocation->reason)}
            + ")";
    }
    if (locked_until) {
        out += "(until " + format_timestamp(*locked_until) + ")";
    }
    if (missing) {
        out += "(" + std::string {to_string(*missing)} + ")";
    }
    return out;
}

Authenticator::Authenticator(StatusResponder& responder, ResourceEndpoint& registry, SessionTable& sessions,
    LockoutTracker& lockouts, AuditLog& audit, const Clock& clock, AuthPolicy policy)
    : mResponder(responder)
    , mRegistry(registry)
    , mSessions(sessions)
    , mLockouts(lockouts)
    , mAudit(audit)
    , mClock(clock)
    , mPolicy(std::move(policy))
{
}

AuthResult Authenticator::finish(
    std::string_view flow, PersonId person, FactorSet factors, std::optional<Denial> denial)
{
    AuditDetail detail {{"factors", factor_list(factors)}};
    if (denial) {
        detail["reason"] = denial->describe();
    }
    auto recorded = mAudit.record(person.empty() ? kSystemActor : std::string_view {person.str()},
        AuditCategory::AuthAttempt, flow, person.str(), denial ? AuditOutcome::Denied : AuditOutcome::Allowed,
        std::move(detail));

    AuthResult result {std::move(person), std::move(factors), std::nullopt, std::move(denial)};
    if (!recorded && result.granted()) {
        result.denial = deny(AuthDenial::AuditUnavailable);
    }
    if (result.granted()) {
        result.session = mSessions.issue(result.person_id, result.factors, mClock.now(), mPolicy.session_ttl);
    }
    return result;
}

AuthResult Authenticator::authenticate_production(const Certificate& cert, std::string_view proof)
{
    const PersonId  person {cert.subject_uid};
    const FactorSet factor {AuthFactor::Certificate};
    const Date      today = date_of(mClock.now());

    // Step 1: local validity; the responder is not contacted for these.
    if (today < cert.not_before) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::NotYetValid));
    }
    if (today > cert.not_after) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::ExpiredCertificate));
    }
    if (!mResponder.knows_issuer(cert.issuer)) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::UnknownIssuer));
    }

    // Step 2: real-time status.
    auto answer = mResponder.query(cert);
    if (answer.status == CertStatus::Revoked) {
        Denial d      = deny(AuthDenial::Revoked);
        d.revocation = answer.entry;
        return finish("authenticate_production", person, factor, d);
    }
    if (answer.status == CertStatus::Unknown) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::StatusUnknown));
    }

    // Step 3: possession proof.
    if (!proof_matches(cert.key_token, proof)) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::ProofMismatch));
    }

    // Step 4: the subject must hold an Active registry account.
    auto account = find_registry_account_by_uid(mRegistry, cert.subject_uid);
    if (!account) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::RegistryUnavailable));
    }
    if (!*account || (*account)->state != AccountState::Active) {
        return finish("authenticate_production", person, factor, deny(AuthDenial::NoRegistryAccount));
    }
    return finish("authenticate_production", person, factor, std::nullopt);
}

AuthResult Authenticator::authenticate_nonproduction(const Certificate& cert, std::string_view proof)
{
    const FactorSet factor {AuthFactor::Certificate};
    PersonId        person {cert.subject_uid};

    auto account = find_registry_account_by_uid(mRegistry, cert.subject_uid);
    if (account && !*account && !cert.subject_email.empty()) {
        account = find_registry_account_by_email(mRegistry, cert.subject_email);
    }
    if (!account) {
        return finish("authenticate_nonproduction", person, factor, deny(AuthDenial::RegistryUnavailable));
    }
    if (!*account) {
        return finish("authenticate_nonproduction", person, factor, deny(AuthDenial::NoRegistryAccount));
    }
    const Account& found = **account;
    person               = found.person_id;

    if (found.state != AccountState::Active) {
        return finish("authenticate_nonproduction", person, factor, deny(AuthDenial::AccountSuspended));
    }
    if (!found.stored_certificate || canonical_bytes(*found.stored_certificate) != canonical_bytes(cert)) {
        return finish("authenticate_nonproduction", person, factor, deny(AuthDenial::CertificateMismatch));
    }
    if (!proof_matches(cert.key_token, proof)) {
        return finish("authenticate_nonproduction", person, factor, deny(AuthDenial::ProofMismatch));
    }
    return finish("authenticate_nonproduction", person, factor, std::nullopt);
}

AuthResult Authenticator::authenticate_password(const PersonId& person, std::string_view password)
{
    const FactorSet factor {AuthFactor::Password};

    if (auto until = mLockouts.locked_until(person, mClock.now())) {
        Denial d        = deny(AuthDenial::LockedOut);
        d.locked_until = until;
        return finish("authenticate_password", person, factor, d);
    }

    auto account = find_registry_account_by_uid(mRegistry, person.str());
    if (!account) {
        return finish("authenticate_password", person, factor, deny(AuthDenial::RegistryUnavailable));
    }
    if (!*account) {
        return finish("authenticate_password", person, factor, deny(AuthDenial::NoRegistryAccount));
    }

    const Account& found = **account;
    bool           ok    = !found.password_hash.empty() && verify_password(found.password_hash, password);

    if (!ok) {
        auto failure = mLockouts.record_failure(person, mClock.now(), mPolicy);
        if (failure == LockoutTracker::Failure::AlreadyLocked) {
            // Another attempt locked the identity while this one was verifying.
            Denial d        = deny(AuthDenial::LockedOut);
            d.locked_until = mLockouts.state_of(person).locked_until;
            return finish("authenticate_password", person, factor, d);
        }
        return finish("authenticate_password", person, factor, deny(AuthDenial::BadCredentials));
    }

    if (auto until = mLockouts.locked_until(person, mClock.now())) {
        Denial d        = deny(AuthDenial::LockedOut);
        d.locked_until = until;
        return finish("authenticate_password", person, factor, d);
    }
    if (found.state != AccountState::Active) {
        return finish("authenticate_password", person, factor, deny(AuthDenial::AccountSuspended));
    }
    mLockouts.record_success(person);
    return finish("authenticate_password", person, factor, std::nullopt);
}

std::variant<std::pair<PersonId, FactorSet>, Denial> combine_factors(
    const std::vector<AuthResult>& results, const FactorSet& required)
{
    FactorSet                satisfied;
    std::optional<PersonId> person;
    bool                     mismatch = false;

    for (const auto& r : results) {
        if (!r.granted()) {
            continue;
        }
        if (person && *person != r.person_id) {
            mismatch = true;
        }
        person = person.value_or(r.person_id);
        satisfied.insert(r.factors.begin(), r.factors.end());
    }

    for (auto f : required) {
        if (!satisfied.contains(f)) {
            Denial d {AuthDenial::MissingFactor, std::nullopt, std::nullopt, f};
            return d;
        }
    }
    if (mismatch) {
        return deny(AuthDenial::FactorMismatch);
    }
    return std::pair {*person, satisfied};
}

AuthResult Authenticator::mfa_authenticate(const std::vector<AuthResult>& results, const FactorSet& required)
{
    auto combined = combine_factors(results, required);
    if (auto* d = std::get_if<Denial>(&combined)) {
        PersonId person = results.empty() ? PersonId {} : results.front().person_id;
        return finish("mfa_authenticate", person, {}, *d);
    }
    auto& [person, factors] = std::get<0>(combined);
    return finish("mfa_authenticate", person, factors, std::nullopt);
}

Result<Enrolment> enroll_credentials(StatusResponder& responder, ResourceEndpoint& registry, AuditLog& audit,
    const PersonId& person, const std::string& issuer, std::string_view secret, std::string_view password,
    Date not_before, Date not_after)
{
    if (registry.id() != ResourceId::AccessRegistry) {
        return make_error(Errc::InvalidArgument, "credentials live on the access registry");
    }
    auto account = registry.find_account(person);
    if (!account) {
        return account.error();
    }
    if (!*account) {
        return make_error(Errc::AccountNotFound, person.str());
    }
    auto email = (*account)->attributes.count("email") ? (*account)->attributes.at("email") : std::string {};

    responder.add_issuer(issuer);
    auto cert = responder.issue(issuer, person.str(), email, not_before, not_after, key_token_for(secret));
    if (!cert) {
        return cert.error();
    }
    auto hash = hash_password(person.str(), password);
    if (!hash) {
        return hash.error();
    }

    auto audited = [&](std::string_view action, auto&& mutate) -> Status {
        if (auto writable = audit.ensure_writable(); !writable) {
            return writable;
        }
        Status outcome = mutate();
        AuditDetail detail {{"resource", std::string {to_string(registry.id())}}};
        if (!outcome) {
            detail["error"] = outcome.error().describe();
        }
        auto recorded = audit.record(kSystemActor, AuditCategory::ResourceMutation, action, person.str(),
            outcome ? AuditOutcome::Success : AuditOutcome::Failure, std::move(detail));
        if (!recorded) {
            return recorded.error();
        }
        return outcome;
    };

    if (auto s = audited("set_certificate", [&] { return registry.set_certificate(person, *cert); }); !s) {
        return s.error();
    }
    if (auto s = audited("set_password_hash", [&] { return registry.set_password_hash(person, *hash); }); !s) {
        return s.error();
    }
    return Enrolment {*cert, *hash};
}

} // namespace idfabric
