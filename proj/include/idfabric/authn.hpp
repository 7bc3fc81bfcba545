/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_AUTHN_HPP_
#define IDFABRIC_AUTHN_HPP_

#include <idfabric/audit.hpp>
#include <idfabric/certificate.hpp>
#include <idfabric/resources.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace idfabric {

enum class AuthFactor { Certificate, Password };
using FactorSet = std::set<AuthFactor>;

std::string_view          to_string(AuthFactor factor) noexcept;
std::optional<AuthFactor> parse_auth_factor(std::string_view text) noexcept;

struct AuthPolicy {
    unsigned             max_failed_attempts = 5;
    std::chrono::seconds lockout_duration {900};
    FactorSet            required_factors {AuthFactor::Certificate, AuthFactor::Password};
    std::chrono::seconds session_ttl {3600};

    Status validate() const;
};

/// Factors an application demands. PII-bearing applications and admin
/// surfaces need both; the learning platform needs a password only.
FactorSet        required_factors_for(ResourceId application);
inline const FactorSet kAdminFactors {AuthFactor::Certificate, AuthFactor::Password};

// ---------------------------------------------------------------------------
// Revocation

enum class RevocationReason { Unspecified, KeyCompromise, AffiliationChanged, Superseded, CessationOfOperation };

std::string_view                to_string(RevocationReason reason) noexcept;
std::optional<RevocationReason> parse_revocation_reason(std::string_view text) noexcept;

struct RevocationEntry {
    std::uint64_t    serial = 0;
    RevocationReason reason = RevocationReason::Unspecified;
    Timestamp        revoked_at;

    bool operator==(const RevocationEntry&) const = default;
};

/// One published version. Never modified after publication; a new
/// revocation produces a new list.
struct RevocationList {
    std::string                               issuer;
    std::uint64_t                             version = 0;
    Timestamp                                 issued_at;
    std::map<std::uint64_t, RevocationEntry> entries;

    bool operator==(const RevocationList&) const = default;
};

enum class CertStatus { Good, Revoked, Unknown };

struct StatusAnswer {
    CertStatus                     status = CertStatus::Unknown;
    std::optional<RevocationEntry> entry;
};

/// Issuing authority plus online status responder. Serials are allocated
/// from one counter and so are unique per issuer. Queries and publications
/// are linearizable: a query that starts after publish returns sees it.
class StatusResponder {
public:
    struct IssuerState {
        std::set<std::uint64_t>               issued;
        std::shared_ptr<const RevocationList> current;
    };

    void add_issuer(const std::string& issuer);
    bool knows_issuer(const std::string& issuer) const;

    Result<Certificate> issue(const std::string& issuer, const std::string& uid, const std::string& email,
        Date not_before, Date not_after, const std::string& key_token);

    /// Real-time status. Counted.
    StatusAnswer query(const Certificate& cert) const;
    std::uint64_t query_count() const noexcept { return mQueries.load(); }

    /// UnknownSerial if no issuer handed out `serial`. Re-publishing a serial
    /// already on the list returns the current list unchanged.
    Result<std::shared_ptr<const RevocationList>> publish_revocation(
        std::uint64_t serial, RevocationReason reason, Timestamp now);

    std::shared_ptr<const RevocationList> current_list(const std::string& issuer) const;

    // Snapshot support.
    std::map<std::string, IssuerState> state() const;
    std::uint64_t                      next_serial() const;
    void restore(std::map<std::string, IssuerState> issuers, std::uint64_t next_serial);

private:
    mutable std::mutex                 mMutex;
    std::map<std::string, IssuerState> mIssuers;
    std::uint64_t                      mNextSerial = 1;
    mutable std::atomic<std::uint64_t> mQueries {0};
};

// ---------------------------------------------------------------------------
// Sessions and lockout

struct Session {
    std::string session_id;
    PersonId    person_id;
    Timestamp   issued_at;
    Timestamp   expires_at;
    FactorSet   factors;

    bool operator==(const Session&) const = default;
};

/// The client-held form: "<sid>.<person>.<expires epoch>.<factor list>".
/// Only the server table decides validity.
std::string session_token(const Session& session);

/// Server-side session table. Session ids come from a seeded deterministic
/// generator so fixed-seed runs are reproducible.
class SessionTable {
public:
    explicit SessionTable(std::uint64_t seed = 0);

    Session issue(const PersonId& person, const FactorSet& factors, Timestamp now, std::chrono::seconds ttl);

    /// Valid iff the token is byte-identical to the one issued for its id
    /// and the stored expiry is in the future.
    std::optional<Session> validate(std::string_view token, Timestamp now) const;

    void revoke(const std::string& session_id);

    std::vector<Session> sessions() const;
    std::uint64_t        counter() const;
    void                 restore(std::vector<Session> sessions, std::uint64_t counter);

private:
    mutable std::mutex             mMutex;
    std::uint64_t                  mSeed;
    std::uint64_t                  mCounter = 0;
    std::map<std::string, Session> mSessions;
};

struct LockState {
    unsigned                 consecutive_failures = 0;
    std::optional<Timestamp> locked_until;

    bool operator==(const LockState&) const = default;
};

/// Per-identity failed-attempt counters.
class LockoutTracker {
public:
    enum class Failure { Counted, NowLocked, AlreadyLocked };

    /// Lock expiry if `person` is locked at `now`. An expired lock is cleared.
    std::optional<Timestamp> locked_until(const PersonId& person, Timestamp now);

    Failure record_failure(const PersonId& person, Timestamp now, const AuthPolicy& policy);
    void    record_success(const PersonId& person);

    LockState state_of(const PersonId& person) const;

    std::map<PersonId, LockState> entries() const;
    void                          restore(std::map<PersonId, LockState> entries);

private:
    mutable std::mutex            mMutex;
    std::map<PersonId, LockState> mStates;
};

// ---------------------------------------------------------------------------
// Flows

enum class AuthDenial {
    Revoked,
    ExpiredCertificate,
    NotYetValid,
    UnknownIssuer,
    StatusUnknown,
    ProofMismatch,
    NoRegistryAccount,
    RegistryUnavailable,
    CertificateMismatch,
    AccountSuspended,
    BadCredentials,
    LockedOut,
    MissingFactor,
    FactorMismatch,
    AuditUnavailable,
};

std::string_view to_string(AuthDenial denial) noexcept;

struct Denial {
    AuthDenial reason;
    // Revoked: the list entry.
    std::optional<RevocationEntry> revocation;
    // LockedOut: until when.
    std::optional<Timestamp> locked_until;
    // MissingFactor: which one.
    std::optional<AuthFactor> missing;

    std::string describe() const;
};

/// Outcome of a single-factor flow or of an MFA combination. A granted
/// result carries a session whose factors are those verified.
struct AuthResult {
    PersonId               person_id;
    FactorSet              factors;
    std::optional<Session> session;
    std::optional<Denial>  denial;

    bool granted() const noexcept { return !denial.has_value(); }
};

class Authenticator {
public:
    Authenticator(StatusResponder& responder, ResourceEndpoint& registry, SessionTable& sessions,
        LockoutTracker& lockouts, AuditLog& audit, const Clock& clock, AuthPolicy policy = {});

    /// Local validity, then one status query, then proof, then registry.
    AuthResult authenticate_production(const Certificate& cert, std::string_view proof);

    /// Registry lookup by uid (then email) and byte comparison with the
    /// stored certificate. Does not consult the responder.
    AuthResult authenticate_nonproduction(const Certificate& cert, std::string_view proof);

    AuthResult authenticate_password(const PersonId& person, std::string_view password);

    /// Combines factor results; grants iff every required factor succeeded
    /// for one person.
    AuthResult mfa_authenticate(const std::vector<AuthResult>& results, const FactorSet& required);
    AuthResult mfa_authenticate(const std::vector<AuthResult>& results)
    {
        return mfa_authenticate(results, mPolicy.required_factors);
    }

    const AuthPolicy& policy() const noexcept { return mPolicy; }

private:
    AuthResult finish(std::string_view flow, PersonId person, FactorSet factors, std::optional<Denial> denial);

    StatusResponder&  mResponder;
    ResourceEndpoint& mRegistry;
    SessionTable&     mSessions;
    LockoutTracker&   mLockouts;
    AuditLog&         mAudit;
    const Clock&      mClock;
    AuthPolicy        mPolicy;
};

/// Pure factor combination used by mfa_authenticate: the common person and
/// the satisfied factors, or the denial.
std::variant<std::pair<PersonId, FactorSet>, Denial> combine_factors(
    const std::vector<AuthResult>& results, const FactorSet& required);

/// Credential enrolment: issues a certificate for `person`, stores it on the
/// registry account and sets the password hash. Each registry write is an
/// audited resource mutation.
struct Enrolment {
    Certificate certificate;
    std::string password_hash;
};

Result<Enrolment> enroll_credentials(StatusResponder& responder, ResourceEndpoint& registry, AuditLog& audit,
    const PersonId& person, const std::string& issuer, std::string_view secret, std::string_view password,
    Date not_before, Date not_after);

} // namespace idfabric

#endif
