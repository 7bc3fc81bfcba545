/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "oracle.hpp"

#include <idfabric/guard/filter.hpp>
#include <idfabric/resources.hpp>

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace idfabric;

namespace {

const PersonId   kAda {"ada"};
const Attributes kAttrs {{"uid", "ada"}, {"cn", "Ada L"}};

} // namespace

TEST(Resources, AccountLifecycle)
{
    ResourceEndpoint e {ResourceId::UnixHosts};
    auto             created = e.create_account(kAda, kAttrs);
    ASSERT_TRUE(created.ok());
    EXPECT_EQ(created->state, AccountState::Active);
    EXPECT_EQ(created->resource, ResourceId::UnixHosts);

    ASSERT_TRUE(e.suspend_account(kAda).ok());
    EXPECT_EQ(e.find_account(kAda).value()->state, AccountState::Suspended);
    ASSERT_TRUE(e.restore_account(kAda).ok());
    EXPECT_EQ(e.find_account(kAda).value()->state, AccountState::Active);
    ASSERT_TRUE(e.set_attributes(kAda, {{"cn", "Ada King"}}).ok());
    EXPECT_EQ(e.find_account(kAda).value()->attributes.at("cn"), "Ada King");
    EXPECT_EQ(e.find_account(kAda).value()->attributes.at("uid"), "ada");
    ASSERT_TRUE(e.delete_account(kAda).ok());
    EXPECT_FALSE(e.find_account(kAda).value());
}

TEST(Resources, CreateIsIdempotentButConflictsOnDifferentAttributes)
{
    ResourceEndpoint e {ResourceId::DirectoryMail};
    ASSERT_TRUE(e.create_account(kAda, kAttrs).ok());
    auto again = e.create_account(kAda, kAttrs);
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(e.accounts_unchecked().size(), 1u);
    EXPECT_EQ(e.create_account(kAda, {{"uid", "other"}}).code(), Errc::AttributeConflict);
}

TEST(Resources, MissingAccountErrors)
{
    ResourceEndpoint e {ResourceId::StudentPortal};
    EXPECT_EQ(e.suspend_account(kAda).code(), Errc::AccountNotFound);
    EXPECT_EQ(e.restore_account(kAda).code(), Errc::AccountNotFound);
    EXPECT_EQ(e.set_attributes(kAda, kAttrs).code(), Errc::AccountNotFound);
    // Deleting nothing is a successful no-op.
    EXPECT_TRUE(e.delete_account(kAda).ok());
}

TEST(Resources, EveryVerbTwiceEqualsOnce)
{
    std::mt19937 rng {8};
    for (int trial = 0; trial < 200; ++trial) {
        ResourceEndpoint once {ResourceId::UnixHosts};
        ResourceEndpoint twice {ResourceId::UnixHosts};
        for (int step = 0; step < 12; ++step) {
            PersonId who {"u" + std::to_string(rng() % 4)};
            auto     verb = rng() % 5;
            auto apply    = [&](ResourceEndpoint& e) {
                switch (verb) {
                case 0:
                    (void)e.create_account(who, {{"uid", who.str()}});
                    break;
                case 1:
                    (void)e.suspend_account(who);
                    break;
                case 2:
                    (void)e.restore_account(who);
                    break;
                case 3:
                    (void)e.delete_account(who);
                    break;
                default:
                    (void)e.set_attributes(who, {{"cn", "n" + std::to_string(step)}});
                }
            };
            apply(once);
            apply(twice);
            apply(twice);
            ASSERT_EQ(once.accounts_unchecked(), twice.accounts_unchecked());
        }
    }
}

TEST(Resources, DownFailsMutationsAndReads)
{
    ResourceEndpoint e {ResourceId::LearningPlatform};
    ASSERT_TRUE(e.create_account(kAda, kAttrs).ok());
    e.inject_fault(FaultMode::down());
    EXPECT_EQ(e.suspend_account(kAda).code(), Errc::ResourceDown);
    EXPECT_EQ(e.list_accounts().code(), Errc::ResourceDown);
    EXPECT_EQ(e.find_account(kAda).code(), Errc::ResourceDown);
    EXPECT_EQ(e.search("(uid=ada)").code(), Errc::ResourceDown);
    e.inject_fault(FaultMode::healthy());
    EXPECT_EQ(e.find_account(kAda).value()->state, AccountState::Active);
}

TEST(Resources, IntermittentFailsFirstThenEveryNth)
{
    ResourceEndpoint e {ResourceId::UnixHosts};
    e.inject_fault(FaultMode::intermittent(3));
    std::vector<bool> outcomes;
    for (int i = 0; i < 9; ++i) {
        outcomes.push_back(e.delete_account(PersonId {"x"}).ok());
    }
    EXPECT_EQ(outcomes, (std::vector<bool> {false, true, true, false, true, true, false, true, true}));
    // Reads are unaffected.
    EXPECT_TRUE(e.list_accounts().ok());
}

TEST(Resources, FaultScheduleCanBeRestored)
{
    ResourceEndpoint a {ResourceId::UnixHosts};
    a.inject_fault(FaultMode::intermittent(4));
    (void)a.delete_account(kAda);
    (void)a.delete_account(kAda);
    ResourceEndpoint b {ResourceId::UnixHosts};
    b.restore_fault(a.fault_mode(), a.fault_calls());
    for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(a.delete_account(kAda).ok(), b.delete_account(kAda).ok());
    }
}

TEST(Resources, MutationsNeedSecurePrivilegedChannel)
{
    ResourceEndpoint e {ResourceId::AccessRegistry};
    e.set_connection({true, false});
    EXPECT_EQ(e.create_account(kAda, kAttrs).code(), Errc::InsecureChannel);
    e.set_connection({false, true});
    EXPECT_EQ(e.create_account(kAda, kAttrs).code(), Errc::PrivilegeRequired);
    EXPECT_TRUE(e.list_accounts().ok());
    e.set_connection({});
    EXPECT_TRUE(e.create_account(kAda, kAttrs).ok());
}

TEST(Resources, CountersSeeEveryAttempt)
{
    ResourceEndpoint e {ResourceId::UnixHosts};
    (void)e.create_account(kAda, kAttrs);
    e.inject_fault(FaultMode::down());
    (void)e.suspend_account(kAda);
    e.set_connection({false, false});
    (void)e.suspend_account(kAda);
    EXPECT_EQ(e.mutation_attempts(), 3u);
    EXPECT_EQ(e.mutation_successes(), 1u);
}

TEST(Resources, CredentialsLiveOnTheRegistryOnly)
{
    ResourceEndpoint hosts {ResourceId::UnixHosts};
    (void)hosts.create_account(kAda, kAttrs);
    EXPECT_EQ(hosts.set_password_hash(kAda, "h").code(), Errc::InvalidArgument);

    ResourceEndpoint reg {ResourceId::AccessRegistry};
    (void)reg.create_account(kAda, kAttrs);
    ASSERT_TRUE(reg.set_password_hash(kAda, "h").ok());
    Certificate cert {9, "ada", "ada@x", "ca", Date {std::chrono::year {2026}, std::chrono::January, std::chrono::day {1}}, Date {std::chrono::year {2027}, std::chrono::January, std::chrono::day {1}}, "tok"};
    ASSERT_TRUE(reg.set_certificate(kAda, cert).ok());
    EXPECT_EQ(reg.find_account(kAda).value()->stored_certificate, cert);
}

TEST(Resources, RegistryLookupByUidUsesEscapedFilter)
{
    ResourceEndpoint reg {ResourceId::AccessRegistry};
    (void)reg.create_account(PersonId {"p1"}, {{"uid", "a*"}});
    (void)reg.create_account(PersonId {"p2"}, {{"uid", "ab"}});
    auto found = find_registry_account_by_uid(reg, "a*").value();
    ASSERT_TRUE(found);
    EXPECT_EQ(found->person_id.str(), "p1");
    EXPECT_FALSE(find_registry_account_by_uid(reg, "*").value());
}

TEST(Resources, SearchMatchesLinearScan)
{
    ResourceEndpoint reg {ResourceId::AccessRegistry};
    std::mt19937     rng {21};
    for (int i = 0; i < 60; ++i) {
        std::string uid = "u" + std::to_string(rng() % 20) + (rng() % 3 == 0 ? "*" : "");
        (void)reg.create_account(PersonId {"p" + std::to_string(i)}, {{"uid", uid}});
    }
    auto all = reg.accounts_unchecked();
    for (int q = 0; q < 40; ++q) {
        std::string value = "u" + std::to_string(rng() % 20) + (rng() % 3 == 0 ? "*" : "");
        auto        hits  = reg.search(render(build_search_filter("uid", value).value())).value();
        std::set<PersonId> got;
        for (const auto& a : hits) {
            got.insert(a.person_id);
        }
        EXPECT_EQ(got, oracle::literal_matches(all, "uid", value)) << value;
    }
}

TEST(Resources, ConcurrentMutationsAreSerialized)
{
    ResourceEndpoint         e {ResourceId::UnixHosts};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&e, t] {
            for (int i = 0; i < 200; ++i) {
                PersonId p {"t" + std::to_string(t) + "-" + std::to_string(i % 10)};
                (void)e.create_account(p, {{"uid", p.str()}});
                (void)e.suspend_account(p);
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(e.accounts_unchecked().size(), 80u);
    EXPECT_EQ(e.mutation_attempts(), 8u * 200u * 2u);
}

TEST(Resources, ManagedResourcesHoldsOneEndpointEach)
{
    ManagedResources all;
    for (auto r : kAllResources) {
        EXPECT_EQ(all.at(r).id(), r);
        all.at(r).inject_fault(FaultMode::down());
    }
    EXPECT_EQ(&all.registry(), &all.at(ResourceId::AccessRegistry));
    all.heal_all();
    for (auto r : kAllResources) {
        EXPECT_EQ(all.at(r).fault_mode(), FaultMode::healthy());
    }
    (void)all.at(ResourceId::UnixHosts).delete_account(kAda);
    (void)all.registry().delete_account(kAda);
    EXPECT_EQ(all.total_mutation_attempts(), 2u);
}

TEST(Resources, FaultModeWireNames)
{
    EXPECT_EQ(to_string(FaultMode::intermittent(3)), "intermittent:3");
    EXPECT_EQ(parse_fault_mode("intermittent:3"), FaultMode::intermittent(3));
    EXPECT_EQ(parse_fault_mode("down"), FaultMode::down());
    EXPECT_EQ(parse_fault_mode("healthy"), FaultMode::healthy());
    EXPECT_EQ(parse_fault_mode("intermittent:0"), std::nullopt);
    EXPECT_EQ(parse_fault_mode("flaky"), std::nullopt);
    EXPECT_EQ(parse_account_state(to_string(AccountState::Suspended)), AccountState::Suspended);
}
