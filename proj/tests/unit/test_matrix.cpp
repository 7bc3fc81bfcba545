/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "oracle.hpp"
#include "testkit.hpp"

#include <idfabric/matrix.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace idfabric;
using R = ResourceId;

TEST(Matrix, DefaultBaseRowsMatchRoleTable)
{
    auto m = default_matrix();
    ASSERT_EQ(m.base_rows.size(), oracle::kRoleTable.size());
    for (const auto& row : oracle::kRoleTable) {
        ResourceSet expected;
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            if (row.cells[i]) {
                expected.insert(oracle::kRoleColumns[i]);
            }
        }
        EXPECT_EQ(m.base_rows.at(row.role), expected) << to_string(row.role);
    }
}

TEST(Matrix, DefaultSubRowsMatchSubRoleTable)
{
    auto m = default_matrix();
    for (const auto& row : oracle::kSubRoleTable) {
        if (!row.sub_role) {
            EXPECT_EQ(m.base_rows.at(row.role), oracle::row_resources(row));
            continue;
        }
        EXPECT_EQ(m.sub_rows.at({row.role, *row.sub_role}), oracle::row_resources(row))
            << to_string(row.role) << "/" << to_string(*row.sub_role);
    }
    // Applicants get an explicit empty row.
    EXPECT_TRUE(m.sub_rows.at({Role::Student, SubRole::Prospect}).empty());
}

TEST(Matrix, ExamplesFromCompositionRules)
{
    auto m = default_matrix();
    EXPECT_EQ(entitlements_for(m, Role::Employee, SubRole::Management)->resources,
        (ResourceSet {R::AccessRegistry, R::DirectoryMail, R::UnixHosts, R::StudentPortal}));
    EXPECT_EQ(entitlements_for(m, Role::Student, SubRole::Active)->resources,
        (ResourceSet {R::AccessRegistry, R::UnixHosts, R::StudentPortal, R::LearningPlatform}));
    EXPECT_TRUE(entitlements_for(m, Role::Student, SubRole::Inactive)->resources.empty());
    EXPECT_TRUE(entitlements_for(m, Role::Student, SubRole::Prospect)->resources.empty());
    EXPECT_EQ(entitlements_for(m, Role::Student, SubRole::Alumni)->resources,
        (ResourceSet {R::AccessRegistry, R::StudentPortal}));
    EXPECT_EQ(entitlements_for(m, Role::Contractor, SubRole::None)->resources,
        (ResourceSet {R::AccessRegistry, R::DirectoryMail}));
}

TEST(Matrix, EveryPairAgreesWithReferenceComposition)
{
    auto m = default_matrix();
    for (auto [role, sub] : testkit::valid_pairs()) {
        auto e = entitlements_for(m, role, sub, PersonId {"p"});
        ASSERT_TRUE(e.ok());
        EXPECT_EQ(e->resources, oracle::entitlements(role, sub)) << to_string(role) << "/" << to_string(sub);
        EXPECT_EQ(e->person_id.str(), "p");
        EXPECT_FALSE(e->trace.empty());
    }
    for (auto role : kAllRoles) {
        EXPECT_EQ(role_footprint(m, role), oracle::footprint(role));
    }
}

TEST(Matrix, TraceNamesContributingRows)
{
    auto m = default_matrix();
    auto e = entitlements_for(m, Role::Employee, SubRole::Management).value();
    ASSERT_EQ(e.trace.size(), 2u);
    EXPECT_EQ(e.trace[0].row, "employee");
    EXPECT_EQ(e.trace[1].row, "employee/management");
    EXPECT_EQ(e.trace[1].resources, m.sub_rows.at({Role::Employee, SubRole::Management}));
}

TEST(Matrix, InvalidPairRejected)
{
    auto m = default_matrix();
    EXPECT_EQ(entitlements_for(m, Role::Faculty, SubRole::Alumni).code(), Errc::InvalidArgument);
    ProvisioningMatrix empty;
    EXPECT_EQ(entitlements_for(empty, Role::Faculty, SubRole::None).code(), Errc::UnknownRole);
}

TEST(Matrix, GraduationDiffDropsTeachingResources)
{
    auto m    = default_matrix();
    auto from = entitlements_for(m, Role::Student, SubRole::Active)->resources;
    auto to   = entitlements_for(m, Role::Student, SubRole::Alumni)->resources;
    auto diff = diff_entitlements(from, to);
    EXPECT_TRUE(diff.to_provision.empty());
    EXPECT_EQ(diff.to_deprovision, (ResourceSet {R::UnixHosts, R::LearningPlatform}));
}

TEST(Matrix, DiffIsSetSubtraction)
{
    std::mt19937 rng {5};
    for (int i = 0; i < 500; ++i) {
        ResourceSet a;
        ResourceSet b;
        for (auto r : kAllResources) {
            if (rng() % 2) {
                a.insert(r);
            }
            if (rng() % 2) {
                b.insert(r);
            }
        }
        auto d = diff_entitlements(a, b);
        for (auto r : kAllResources) {
            EXPECT_EQ(d.to_provision.contains(r), b.contains(r) && !a.contains(r));
            EXPECT_EQ(d.to_deprovision.contains(r), a.contains(r) && !b.contains(r));
        }
    }
}

TEST(Matrix, SerializeLoadRoundTrip)
{
    auto m    = default_matrix();
    auto text = serialize_matrix(m);
    auto back = load_matrix(text);
    ASSERT_TRUE(back.ok()) << back.error().describe();
    EXPECT_EQ(*back, m);
}

TEST(Matrix, LoaderRejectsBadRows)
{
    EXPECT_EQ(load_matrix(R"({"role":"janitor","resources":[]})").code(), Errc::UnknownRole);
    EXPECT_EQ(load_matrix(R"({"role":"faculty","resources":["moodle"]})").code(), Errc::UnknownResource);
    EXPECT_EQ(load_matrix(R"({"role":"faculty","sub_role":"alumni","resources":[]})").code(), Errc::UnknownRole);
    EXPECT_EQ(load_matrix("{\"role\":\"faculty\",\"resources\":[]}\n{\"role\":\"faculty\",\"resources\":[]}").code(),
        Errc::DuplicateRow);
    EXPECT_EQ(load_matrix("not json").code(), Errc::ParseError);
    EXPECT_EQ(load_matrix(R"({"role":"faculty"})").code(), Errc::ParseError);
}

TEST(Matrix, LoaderReportsEveryBadLine)
{
    auto r = load_matrix("{\"role\":\"x\",\"resources\":[]}\n\n{\"role\":\"faculty\",\"resources\":[\"y\"]}\n");
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.error().message.find("line 1"), std::string::npos);
    EXPECT_NE(r.error().message.find("line 3"), std::string::npos);
}

TEST(Matrix, CustomMatrixDrivesEntitlements)
{
    auto r = load_matrix(R"({"role":"contractor","resources":["unix_hosts"]}
{"role":"employee","resources":[]}
{"role":"student","resources":[]}
{"role":"faculty","resources":["learning_platform"]})");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(entitlements_for(*r, Role::Contractor, SubRole::None)->resources, (ResourceSet {R::UnixHosts}));
    EXPECT_TRUE(entitlements_for(*r, Role::Employee, SubRole::Management)->resources.empty());
}

TEST(Matrix, FormatResources)
{
    EXPECT_EQ(format_resources({}), "{}");
    EXPECT_EQ(format_resources({R::UnixHosts, R::AccessRegistry}), "{access_registry, unix_hosts}");
}
