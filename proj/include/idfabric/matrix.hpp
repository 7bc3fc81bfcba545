/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_MATRIX_HPP_
#define IDFABRIC_MATRIX_HPP_

#include <idfabric/identity.hpp>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace idfabric {

using ResourceSet = std::set<ResourceId>;

/// Role-based provisioning table: one base row per role plus optional
/// sub-role rows. Immutable after construction.
struct ProvisioningMatrix {
    std::map<Role, ResourceSet>                     base_rows;
    std::map<std::pair<Role, SubRole>, ResourceSet> sub_rows;

    bool operator==(const ProvisioningMatrix&) const = default;
};

struct RuleContribution {
    std::string row;
    ResourceSet resources;

    bool operator==(const RuleContribution&) const = default;
};

struct EntitlementSet {
    PersonId                      person_id;
    ResourceSet                   resources;
    std::vector<RuleContribution> trace;
};

struct EntitlementDiff {
    ResourceSet to_provision;
    ResourceSet to_deprovision;
};

ProvisioningMatrix default_matrix();

/// Sub-roles whose entitlements are the sub-row alone instead of the union
/// with the base row: applicants and withdrawn students.
bool is_override_pair(Role role, SubRole sub_role) noexcept;

Result<EntitlementSet> entitlements_for(
    const ProvisioningMatrix& matrix, Role role, SubRole sub_role, const PersonId& person = {});

/// Every resource some sub-role of `role` is entitled to. Accounts an identity
/// holds inside its footprint but outside its current entitlements are
/// expected to be suspended; anything outside the footprint is an orphan.
ResourceSet role_footprint(const ProvisioningMatrix& matrix, Role role);

EntitlementDiff diff_entitlements(const ResourceSet& current, const ResourceSet& next);

/// JSON-lines matrix configuration.
Result<ProvisioningMatrix> load_matrix(std::string_view text);
std::string                serialize_matrix(const ProvisioningMatrix& matrix);

std::string format_resources(const ResourceSet& resources);

} // namespace idfabric

#endif
