/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "oracle.hpp"
#include "testkit.hpp"

#include <idfabric/admin.hpp>

#include <gtest/gtest.h>

#include <thread>

using namespace idfabric;
using namespace std::chrono_literals;
using K = AdminActionKind;

namespace {

constexpr ResourceId kApp1 = ResourceId::LearningPlatform;
constexpr ResourceId kApp2 = ResourceId::StudentPortal;

class Admin : public ::testing::Test {
protected:
    void SetUp() override
    {
        for (std::string p : {"S1", "S2"}) {
            Attributes attrs {{"uid", p}};
            ASSERT_TRUE(lp.create_account(PersonId {p}, attrs).ok());
            ASSERT_TRUE(sp.create_account(PersonId {p}, attrs).ok());
        }
        ASSERT_TRUE(service.grant(PersonId {"dom"}, AdminRole::domain_admin(), audit).ok());
        ASSERT_TRUE(service.grant(PersonId {"sen"}, AdminRole::senior_app_admin(), audit).ok());
        ASSERT_TRUE(service.grant(PersonId {"lpa"}, AdminRole::app_admin(kApp1), audit).ok());
    }

    std::string token(const std::string& who, FactorSet factors = kAdminFactors)
    {
        return session_token(sessions.issue(PersonId {who}, factors, clock.now(), 600s));
    }

    Result<AdminOutcome> run(const std::string& who, AdminRole role, AdminAction action)
    {
        const auto& app = action.application == kApp2 ? sp : lp;
        return service.perform(sessions, token(who), role, action, app, audit, clock);
    }

    static AdminAction act(K kind, std::string group, std::optional<std::string> member = std::nullopt,
        std::string arg = {}, ResourceId app = kApp1)
    {
        AdminAction a {kind, app, std::move(group), std::nullopt, std::move(arg)};
        if (member) {
            a.member = PersonId {*member};
        }
        return a;
    }

    ManualClock      clock {testkit::noon(testkit::kStart)};
    AuditLog         audit {clock};
    SessionTable     sessions {3};
    AdminService     service;
    ResourceEndpoint lp {kApp1};
    ResourceEndpoint sp {kApp2};
};

} // namespace

TEST(AdminTable, MatchesReferenceTable)
{
    for (const auto& row : oracle::kAdminTable) {
        for (auto app : {kApp1, kApp2}) {
            EXPECT_EQ(is_permitted(AdminRole::domain_admin(), row.action, app), row.cells[0]);
            EXPECT_EQ(is_permitted(AdminRole::senior_app_admin(), row.action, app), row.cells[1]);
        }
        EXPECT_EQ(is_permitted(AdminRole::app_admin(kApp1), row.action, kApp1), row.cells[2]);
        EXPECT_EQ(is_permitted(AdminRole::app_admin(kApp2), row.action, kApp2), row.cells[3]);
        // Application admins never reach across applications.
        EXPECT_FALSE(is_permitted(AdminRole::app_admin(kApp1), row.action, kApp2));
        EXPECT_FALSE(is_permitted(AdminRole::app_admin(kApp2), row.action, kApp1));
    }
}

TEST(AdminTable, WireNames)
{
    for (auto k : kAllAdminActions) {
        EXPECT_EQ(parse_admin_action(to_string(k)), k);
    }
    for (auto r : {AdminRole::domain_admin(), AdminRole::senior_app_admin(), AdminRole::app_admin(kApp2)}) {
        EXPECT_EQ(parse_admin_role(to_string(r)), r);
    }
    EXPECT_EQ(parse_admin_role("app_admin:moodle"), std::nullopt);
    EXPECT_EQ(to_string(AdminRole::app_admin(kApp1)), "app_admin:learning_platform");
}

TEST_F(Admin, GroupLifecycle)
{
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "tas")).ok());
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewSubGroups, "tas", {}, "week1")).ok());
    ASSERT_TRUE(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "S1", "write")).ok());
    ASSERT_TRUE(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "S2")).ok());
    ASSERT_TRUE(run("lpa", AdminRole::app_admin(kApp1), act(K::ModifyAccess, "tas", "S2", "grade")).ok());

    auto g = service.table().groups.at({kApp1, "tas"});
    EXPECT_EQ(g.members, (std::set<PersonId> {PersonId {"S1"}, PersonId {"S2"}}));
    EXPECT_EQ(g.access_levels.at(PersonId {"S1"}), "write");
    EXPECT_EQ(g.access_levels.at(PersonId {"S2"}), "grade");
    EXPECT_EQ(g.sub_groups, std::set<std::string> {"week1"});

    auto view = run("sen", AdminRole::senior_app_admin(), act(K::ViewMembers, "tas"));
    ASSERT_TRUE(view.ok());
    EXPECT_EQ(view->members.size(), 2u);

    ASSERT_TRUE(run("lpa", AdminRole::app_admin(kApp1), act(K::DeleteMember, "tas", "S1")).ok());
    EXPECT_FALSE(service.table().groups.at({kApp1, "tas"}).members.contains(PersonId {"S1"}));

    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::ManageApplicationGroups, "tas")).ok());
    EXPECT_FALSE(service.table().groups.contains({kApp1, "tas"}));
}

TEST_F(Admin, AssignApplicationAdminCreatesARoleHolder)
{
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::AssignApplicationAdmin, "", {}, "new", kApp2)).ok());
    EXPECT_TRUE(service.table().holds(PersonId {"new"}, AdminRole::app_admin(kApp2)));
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "clubs", {}, {}, kApp2)).ok());
    EXPECT_TRUE(run("new", AdminRole::app_admin(kApp2), act(K::AddMember, "clubs", "S1", {}, kApp2)).ok());
}

TEST_F(Admin, DenialsAreAuditedAndLeaveTheTableAlone)
{
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "tas")).ok());
    auto before = service.table();
    auto count  = audit.size();

    auto r = run("lpa", AdminRole::app_admin(kApp1), act(K::ManageApplicationGroups, "tas"));
    EXPECT_EQ(r.code(), Errc::PermissionDenied);
    r = run("sen", AdminRole::senior_app_admin(), act(K::AddMember, "tas", "S1"));
    EXPECT_EQ(r.code(), Errc::PermissionDenied);
    r = run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "S1", {}, kApp2));
    EXPECT_EQ(r.code(), Errc::PermissionDenied);

    EXPECT_EQ(service.table(), before);
    auto events = audit.events();
    ASSERT_EQ(events.size(), count + 3);
    for (std::size_t i = count; i < events.size(); ++i) {
        EXPECT_EQ(events[i].category, AuditCategory::AdminAction);
        EXPECT_EQ(events[i].outcome, AuditOutcome::Denied);
    }
}

TEST_F(Admin, ClaimedRoleMustBeHeld)
{
    EXPECT_EQ(run("lpa", AdminRole::domain_admin(), act(K::CreateViewGroups, "x")).code(), Errc::PermissionDenied);
    EXPECT_EQ(run("S1", AdminRole::app_admin(kApp1), act(K::ViewMembers, "x")).code(), Errc::PermissionDenied);
}

TEST_F(Admin, SessionNeedsBothFactors)
{
    auto pwOnly = token("dom", {AuthFactor::Password});
    EXPECT_EQ(service.perform(sessions, pwOnly, AdminRole::domain_admin(), act(K::CreateViewGroups, "x"), lp, audit,
                  clock)
                  .code(),
        Errc::PermissionDenied);
    EXPECT_EQ(service.perform(sessions, "forged", AdminRole::domain_admin(), act(K::CreateViewGroups, "x"), lp, audit,
                  clock)
                  .code(),
        Errc::PermissionDenied);
    EXPECT_EQ(audit.events().back().actor, "unauthenticated");

    auto tok = token("dom");
    clock.advance(601s);
    EXPECT_EQ(
        service.perform(sessions, tok, AdminRole::domain_admin(), act(K::CreateViewGroups, "x"), lp, audit, clock)
            .code(),
        Errc::PermissionDenied);
}

TEST_F(Admin, MembersNeedAnActiveApplicationAccount)
{
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "tas")).ok());
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "ghost")).code(),
        Errc::MemberLacksAccount);
    ASSERT_TRUE(lp.suspend_account(PersonId {"S1"}).ok());
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "S1")).code(),
        Errc::MemberLacksAccount);
    lp.inject_fault(FaultMode::down());
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas", "S2")).code(), Errc::ResourceDown);
}

TEST_F(Admin, MalformedActions)
{
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "nope", "S1")).code(), Errc::UnknownGroup);
    EXPECT_EQ(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "")).code(), Errc::InvalidArgument);
    EXPECT_EQ(run("dom", AdminRole::domain_admin(), act(K::ManageApplicationGroups, "nope")).code(),
        Errc::UnknownGroup);
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "tas")).ok());
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::AddMember, "tas")).code(), Errc::InvalidArgument);
    EXPECT_EQ(run("lpa", AdminRole::app_admin(kApp1), act(K::ModifyAccess, "tas", "S1", "x")).code(),
        Errc::InvalidArgument);

    // Applications without fine-grained groups.
    ResourceEndpoint hosts {ResourceId::UnixHosts};
    auto             a = act(K::CreateViewGroups, "x", {}, {}, ResourceId::UnixHosts);
    EXPECT_EQ(service.perform(sessions, token("dom"), AdminRole::domain_admin(), a, hosts, audit, clock).code(),
        Errc::UnknownGroup);
}

TEST_F(Admin, UnwritableAuditBlocksActions)
{
    audit.set_available(false);
    EXPECT_EQ(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "x")).code(), Errc::LogUnavailable);
    EXPECT_FALSE(service.table().groups.contains({kApp1, "x"}));
    EXPECT_EQ(service.grant(PersonId {"z"}, AdminRole::domain_admin(), audit).code(), Errc::LogUnavailable);
}

TEST_F(Admin, ConcurrentAddsAreAllKept)
{
    ASSERT_TRUE(run("dom", AdminRole::domain_admin(), act(K::CreateViewGroups, "big")).ok());
    for (int i = 0; i < 40; ++i) {
        ASSERT_TRUE(lp.create_account(PersonId {"m" + std::to_string(i)}, {{"uid", "m"}}).ok());
    }
    std::vector<std::string> tokens;
    for (int t = 0; t < 4; ++t) {
        tokens.push_back(token("lpa"));
    }
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = t; i < 40; i += 4) {
                (void)service.perform(sessions, tokens[t], AdminRole::app_admin(kApp1),
                    act(K::AddMember, "big", "m" + std::to_string(i)), lp, audit, clock);
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(service.table().groups.at({kApp1, "big"}).members.size(), 40u);
    EXPECT_TRUE(testkit::gap_free(audit));
}
