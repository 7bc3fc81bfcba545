/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "testkit.hpp"

#include <idfabric/authn.hpp>
#include <idfabric/guard/protect.hpp>

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace idfabric;
using namespace std::chrono_literals;

namespace {

Date plus_days(Date d, int n)
{
    return Date {std::chrono::sys_days {d} + std::chrono::days {n}};
}

class Authn : public ::testing::Test {
protected:
    void SetUp() override
    {
        ensure_crypto_ready();
        for (std::string p : {"F1", "F2"}) {
            ASSERT_TRUE(sys().engine.provision_workflow(testkit::joiner(p, Role::Faculty, SubRole::None, d.today())).ok());
            certs[p] = enroll(p).certificate;
        }
    }

    System& sys() { return d.system; }

    Enrolment enroll(const std::string& p)
    {
        return enroll_credentials(sys().responder, sys().resources.registry(), sys().audit, PersonId {p},
            std::string {kDefaultIssuer}, "secret-" + p, "pw-" + p, d.today(), plus_days(d.today(), 30))
            .value();
    }

    AuthDenial denial_of(const AuthResult& r)
    {
        EXPECT_FALSE(r.granted());
        return r.denial ? r.denial->reason : AuthDenial::AuditUnavailable;
    }

    testkit::Deployment                d;
    std::map<std::string, Certificate> certs;
};

} // namespace

TEST_F(Authn, EnrolmentStoresCertificateAndHash)
{
    auto account = sys().resources.registry().find_account(PersonId {"F1"}).value();
    ASSERT_TRUE(account);
    EXPECT_EQ(account->stored_certificate, certs["F1"]);
    EXPECT_TRUE(verify_password(account->password_hash, "pw-F1"));
    EXPECT_EQ(certs["F1"].subject_uid, "F1");
    EXPECT_EQ(certs["F1"].subject_email, account->attributes.at("email"));
    EXPECT_NE(certs["F1"].serial, certs["F2"].serial);
    EXPECT_EQ(enroll_credentials(sys().responder, sys().resources.at(ResourceId::UnixHosts), sys().audit,
                  PersonId {"F1"}, "ca", "s", "p", d.today(), d.today())
                  .code(),
        Errc::InvalidArgument);
    EXPECT_EQ(enroll_credentials(sys().responder, sys().resources.registry(), sys().audit, PersonId {"nobody"}, "ca",
                  "s", "p", d.today(), d.today())
                  .code(),
        Errc::AccountNotFound);
}

TEST_F(Authn, ProductionGrantIssuesCertificateSession)
{
    auto before = sys().responder.query_count();
    auto r      = sys().authenticator.authenticate_production(certs["F1"], "secret-F1");
    ASSERT_TRUE(r.granted()) << r.denial->describe();
    ASSERT_TRUE(r.session);
    EXPECT_EQ(r.session->factors, FactorSet {AuthFactor::Certificate});
    EXPECT_EQ(r.session->expires_at - r.session->issued_at, sys().authenticator.policy().session_ttl);
    EXPECT_EQ(sys().responder.query_count(), before + 1);
    EXPECT_TRUE(sys().sessions.validate(session_token(*r.session), d.clock.now()));
}

TEST_F(Authn, ProductionChecksLocalValidityBeforeStatus)
{
    auto before  = sys().responder.query_count();
    auto expired = certs["F1"];
    d.clock.advance(std::chrono::days {31});
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(expired, "secret-F1")),
        AuthDenial::ExpiredCertificate);

    auto early       = certs["F1"];
    early.not_before = plus_days(d.today(), 1);
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(early, "secret-F1")), AuthDenial::NotYetValid);

    auto foreign   = certs["F1"];
    foreign.issuer = "rogue-ca";
    foreign.not_after = d.today();
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(foreign, "secret-F1")), AuthDenial::UnknownIssuer);
    EXPECT_EQ(sys().responder.query_count(), before);
}

TEST_F(Authn, ProductionDenialReasons)
{
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(certs["F1"], "secret-F2")),
        AuthDenial::ProofMismatch);

    auto forged   = certs["F1"];
    forged.serial = 9999;
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(forged, "secret-F1")), AuthDenial::StatusUnknown);

    ASSERT_TRUE(sys().resources.registry().suspend_account(PersonId {"F1"}).ok());
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(certs["F1"], "secret-F1")),
        AuthDenial::NoRegistryAccount);

    sys().resources.registry().inject_fault(FaultMode::down());
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_production(certs["F2"], "secret-F2")),
        AuthDenial::RegistryUnavailable);
}

TEST_F(Authn, RevocationIsImmediateAndPerSerial)
{
    auto list = sys().responder.publish_revocation(certs["F1"].serial, RevocationReason::AffiliationChanged,
        d.clock.now());
    ASSERT_TRUE(list.ok());
    EXPECT_EQ((*list)->version, 1u);
    auto r = sys().authenticator.authenticate_production(certs["F1"], "secret-F1");
    EXPECT_EQ(denial_of(r), AuthDenial::Revoked);
    ASSERT_TRUE(r.denial->revocation);
    EXPECT_EQ(r.denial->revocation->reason, RevocationReason::AffiliationChanged);
    EXPECT_TRUE(sys().authenticator.authenticate_production(certs["F2"], "secret-F2").granted());

    // Published lists are immutable; republishing is a no-op.
    auto again = sys().responder.publish_revocation(certs["F1"].serial, RevocationReason::KeyCompromise, d.clock.now());
    EXPECT_EQ(again->get(), list->get());
    EXPECT_EQ(sys().responder.publish_revocation(424242, RevocationReason::Unspecified, d.clock.now()).code(),
        Errc::UnknownSerial);

    auto second = sys().responder.publish_revocation(certs["F2"].serial, RevocationReason::Superseded, d.clock.now());
    EXPECT_EQ((*second)->version, 2u);
    EXPECT_EQ((*list)->entries.size(), 1u);
    EXPECT_EQ((*second)->entries.size(), 2u);
}

TEST_F(Authn, RevocationVisibleToConcurrentQueries)
{
    std::atomic<bool> published {false};
    std::atomic<int>  stale {0};
    std::thread       reader {[&] {
        for (int i = 0; i < 2000; ++i) {
            bool after = published.load();
            if (after && sys().responder.query(certs["F1"]).status != CertStatus::Revoked) {
                ++stale;
            }
        }
    }};
    ASSERT_TRUE(sys().responder.publish_revocation(certs["F1"].serial, RevocationReason::Unspecified, d.clock.now()));
    published = true;
    reader.join();
    EXPECT_EQ(stale.load(), 0);
}

TEST_F(Authn, NonProductionComparesStoredBytes)
{
    EXPECT_TRUE(sys().authenticator.authenticate_nonproduction(certs["F1"], "secret-F1").granted());
    auto tweaked = certs["F1"];
    tweaked.subject_email += ".";
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_nonproduction(tweaked, "secret-F1")),
        AuthDenial::CertificateMismatch);
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_nonproduction(certs["F1"], "nope")),
        AuthDenial::ProofMismatch);

    // Falls back to the email when the uid is unknown; the bytes still differ.
    auto renamed        = certs["F1"];
    renamed.subject_uid = "ghost";
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_nonproduction(renamed, "secret-F1")),
        AuthDenial::CertificateMismatch);

    auto nobody          = renamed;
    nobody.subject_email = "ghost@nowhere";
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_nonproduction(nobody, "secret-F1")),
        AuthDenial::NoRegistryAccount);

    ASSERT_TRUE(sys().resources.registry().suspend_account(PersonId {"F1"}).ok());
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_nonproduction(certs["F1"], "secret-F1")),
        AuthDenial::AccountSuspended);
}

TEST_F(Authn, NonProductionIgnoresRevocation)
{
    auto before = sys().responder.query_count();
    ASSERT_TRUE(sys().responder.publish_revocation(certs["F1"].serial, RevocationReason::Unspecified, d.clock.now()));
    EXPECT_TRUE(sys().authenticator.authenticate_nonproduction(certs["F1"], "secret-F1").granted());
    EXPECT_EQ(sys().responder.query_count(), before);
}

TEST_F(Authn, PasswordLockoutAtExactlyTheLimit)
{
    const PersonId who {"F1"};
    const auto&    policy = sys().authenticator.policy();
    for (unsigned i = 1; i < policy.max_failed_attempts; ++i) {
        EXPECT_EQ(denial_of(sys().authenticator.authenticate_password(who, "bad")), AuthDenial::BadCredentials);
        EXPECT_FALSE(sys().lockouts.locked_until(who, d.clock.now()));
    }
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_password(who, "bad")), AuthDenial::BadCredentials);
    auto until = sys().lockouts.locked_until(who, d.clock.now());
    ASSERT_TRUE(until);
    EXPECT_EQ(*until, d.clock.now() + policy.lockout_duration);

    auto locked = sys().authenticator.authenticate_password(who, "pw-F1");
    EXPECT_EQ(denial_of(locked), AuthDenial::LockedOut);
    EXPECT_EQ(locked.denial->locked_until, until);
    // Other identities are unaffected.
    EXPECT_TRUE(sys().authenticator.authenticate_password(PersonId {"F2"}, "pw-F2").granted());

    d.clock.advance(policy.lockout_duration);
    EXPECT_TRUE(sys().authenticator.authenticate_password(who, "pw-F1").granted());
    EXPECT_EQ(sys().lockouts.state_of(who), LockState {});
}

TEST_F(Authn, SuccessResetsFailureCount)
{
    const PersonId who {"F1"};
    const auto     limit = sys().authenticator.policy().max_failed_attempts;
    for (int round = 0; round < 3; ++round) {
        for (unsigned i = 1; i < limit; ++i) {
            (void)sys().authenticator.authenticate_password(who, "bad");
        }
        EXPECT_TRUE(sys().authenticator.authenticate_password(who, "pw-F1").granted());
    }
}

TEST_F(Authn, PasswordOnSuspendedAccount)
{
    ASSERT_TRUE(sys().resources.registry().suspend_account(PersonId {"F2"}).ok());
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_password(PersonId {"F2"}, "pw-F2")),
        AuthDenial::AccountSuspended);
    EXPECT_EQ(denial_of(sys().authenticator.authenticate_password(PersonId {"zz"}, "pw")),
        AuthDenial::NoRegistryAccount);
}

TEST_F(Authn, ConcurrentFailuresLockExactlyOnce)
{
    const PersonId           who {"F1"};
    std::vector<std::thread> threads;
    std::atomic<int>         bad {0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 5; ++i) {
                auto r = sys().authenticator.authenticate_password(who, "bad");
                bad += r.denial && r.denial->reason == AuthDenial::BadCredentials ? 1 : 0;
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(static_cast<unsigned>(bad.load()), sys().authenticator.policy().max_failed_attempts);
}

TEST_F(Authn, MfaNeedsEveryFactorForOnePerson)
{
    auto cert = sys().authenticator.authenticate_production(certs["F1"], "secret-F1");
    auto pw   = sys().authenticator.authenticate_password(PersonId {"F1"}, "pw-F1");
    auto both = sys().authenticator.mfa_authenticate({cert, pw});
    ASSERT_TRUE(both.granted());
    EXPECT_EQ(both.session->factors, kAdminFactors);

    auto only = sys().authenticator.mfa_authenticate({pw});
    EXPECT_EQ(denial_of(only), AuthDenial::MissingFactor);
    EXPECT_EQ(only.denial->missing, AuthFactor::Certificate);

    auto other = sys().authenticator.authenticate_password(PersonId {"F2"}, "pw-F2");
    EXPECT_EQ(denial_of(sys().authenticator.mfa_authenticate({cert, other})), AuthDenial::FactorMismatch);

    auto failed = sys().authenticator.authenticate_password(PersonId {"F1"}, "bad");
    EXPECT_EQ(denial_of(sys().authenticator.mfa_authenticate({cert, failed})), AuthDenial::MissingFactor);

    EXPECT_TRUE(sys().authenticator.mfa_authenticate({pw}, required_factors_for(ResourceId::LearningPlatform)).granted());
}

TEST_F(Authn, EveryAttemptIsAudited)
{
    auto before = sys().audit.size();
    (void)sys().authenticator.authenticate_production(certs["F1"], "secret-F1");
    (void)sys().authenticator.authenticate_password(PersonId {"F1"}, "bad");
    (void)sys().authenticator.authenticate_nonproduction(certs["F2"], "secret-F2");
    auto events = sys().audit.events();
    ASSERT_EQ(events.size(), before + 3);
    EXPECT_EQ(events[before].category, AuditCategory::AuthAttempt);
    EXPECT_EQ(events[before].outcome, AuditOutcome::Allowed);
    EXPECT_EQ(events[before + 1].outcome, AuditOutcome::Denied);
    EXPECT_EQ(events[before + 1].detail.at("reason"), "bad_credentials");
}

TEST_F(Authn, GrantWithoutAuditIsRefused)
{
    sys().audit.set_available(false);
    auto r = sys().authenticator.authenticate_password(PersonId {"F1"}, "pw-F1");
    EXPECT_EQ(denial_of(r), AuthDenial::AuditUnavailable);
    EXPECT_FALSE(r.session);
}

TEST(Sessions, TokensAreCheckedAgainstTheTable)
{
    Timestamp    now = testkit::noon(testkit::kStart);
    SessionTable table {1};
    auto         s   = table.issue(PersonId {"P"}, {AuthFactor::Password}, now, 10s);
    auto         tok = session_token(s);
    EXPECT_TRUE(table.validate(tok, now + 9s));
    EXPECT_FALSE(table.validate(tok, now + 10s));

    auto upgraded = s;
    upgraded.factors.insert(AuthFactor::Certificate);
    EXPECT_FALSE(table.validate(session_token(upgraded), now));
    auto extended       = s;
    extended.expires_at = now + 1000s;
    EXPECT_FALSE(table.validate(session_token(extended), now + 20s));

    table.revoke(s.session_id);
    EXPECT_FALSE(table.validate(tok, now));
    EXPECT_FALSE(table.validate("garbage", now));
}

TEST(Sessions, SeededIdsAreReproducible)
{
    Timestamp    now = testkit::noon(testkit::kStart);
    SessionTable a {5};
    SessionTable b {5};
    SessionTable c {6};
    auto         sa = a.issue(PersonId {"P"}, {}, now, 10s);
    EXPECT_EQ(sa, b.issue(PersonId {"P"}, {}, now, 10s));
    EXPECT_NE(sa.session_id, c.issue(PersonId {"P"}, {}, now, 10s).session_id);
    EXPECT_NE(sa.session_id, a.issue(PersonId {"P"}, {}, now, 10s).session_id);
}

TEST(Policy, Validation)
{
    EXPECT_TRUE(AuthPolicy {}.validate().ok());
    AuthPolicy zero;
    zero.max_failed_attempts = 0;
    EXPECT_FALSE(zero.validate().ok());
    AuthPolicy noTtl;
    noTtl.session_ttl = 0s;
    EXPECT_FALSE(noTtl.validate().ok());
    EXPECT_EQ(required_factors_for(ResourceId::LearningPlatform), FactorSet {AuthFactor::Password});
    EXPECT_EQ(required_factors_for(ResourceId::StudentPortal), kAdminFactors);
}
