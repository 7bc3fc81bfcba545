/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/matrix.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <iterator>
#include <sstream>

namespace idfabric {

using json = nlohmann::json;

ProvisioningMatrix default_matrix()
{
    using R = ResourceId;

    ProvisioningMatrix m;
    m.base_rows[Role::Employee]   = {R::AccessRegistry, R::DirectoryMail, R::UnixHosts};
    m.base_rows[Role::Student]    = {R::AccessRegistry, R::UnixHosts, R::LearningPlatform};
    m.base_rows[Role::Faculty]    = {R::AccessRegistry, R::UnixHosts, R::LearningPlatform};
    m.base_rows[Role::Contractor] = {R::AccessRegistry, R::DirectoryMail};

    m.sub_rows[{Role::Employee, SubRole::Management}] = {R::AccessRegistry, R::DirectoryMail, R::UnixHosts,
        R::StudentPortal};
    m.sub_rows[{Role::Employee, SubRole::IndividualContributor}] = {R::AccessRegistry, R::DirectoryMail, R::UnixHosts};
    m.sub_rows[{Role::Student, SubRole::Active}]                 = {R::StudentPortal, R::LearningPlatform};
    m.sub_rows[{Role::Student, SubRole::Inactive}]               = {};
    m.sub_rows[{Role::Student, SubRole::Prospect}]               = {};
    m.sub_rows[{Role::Student, SubRole::Alumni}]                 = {R::StudentPortal};

    return m;
}

bool is_override_pair(Role role, SubRole sub_role) noexcept
{
    return role == Role::Student && (sub_role == SubRole::Inactive || sub_role == SubRole::Prospect);
}

Result<EntitlementSet> entitlements_for(
    const ProvisioningMatrix& matrix, Role role, SubRole sub_role, const PersonId& person)
{
    if (!is_valid_pair(role, sub_role)) {
        return make_error(Errc::InvalidArgument,
            "invalid role/sub-role pair " + std::string {to_string(role)} + "/" + std::string {to_string(sub_role)});
    }

    auto base = matrix.base_rows.find(role);
    if (base == matrix.base_rows.end()) {
        return make_error(Errc::UnknownRole, std::string {to_string(role)});
    }

    EntitlementSet result {person, {}, {}};

    ResourceSet subRow;
    auto        sub = matrix.sub_rows.find({role, sub_role});
    if (sub != matrix.sub_rows.end()) {
        subRow = sub->second;
    }

    const std::string subName = std::string {to_string(role)} + "/" + std::string {to_string(sub_role)};

    if (is_override_pair(role, sub_role)) {
        result.resources = subRow;
        result.trace.push_back({subName + " (override)", subRow});
        return result;
    }

    result.resources = base->second;
    result.trace.push_back({std::string {to_string(role)}, base->second});
    if (sub != matrix.sub_rows.end()) {
        result.resources.insert(subRow.begin(), subRow.end());
        result.trace.push_back({subName, subRow});
    }

    // Alumni retain only the registry from the base row.
    if (role == Role::Student && sub_role == SubRole::Alumni) {
        ResourceSet retained;
        if (base->second.contains(ResourceId::AccessRegistry)) {
            retained.insert(ResourceId::AccessRegistry);
        }
        retained.insert(subRow.begin(), subRow.end());
        result.resources = retained;
        result.trace.front() = {std::string {to_string(role)} + " (alumni retains registry)",
            base->second.contains(ResourceId::AccessRegistry) ? ResourceSet {ResourceId::AccessRegistry}
                                                               : ResourceSet {}};
    }

    return result;
}

ResourceSet role_footprint(const ProvisioningMatrix& matrix, Role role)
{
    ResourceSet out;
    for (auto sub : kAllSubRoles) {
        if (!is_valid_pair(role, sub)) {
            continue;
        }
        if (auto ent = entitlements_for(matrix, role, sub); ent) {
            out.insert(ent->resources.begin(), ent->resources.end());
        }
    }
    return out;
}

EntitlementDiff diff_entitlements(const ResourceSet& current, const ResourceSet& next)
{
    EntitlementDiff diff;
    std::set_difference(next.begin(), next.end(), current.begin(), current.end(),
        std::inserter(diff.to_provision, diff.to_provision.end()));
    std::set_difference(current.begin(), current.end(), next.begin(), next.end(),
        std::inserter(diff.to_deprovision, diff.to_deprovision.end()));
    return diff;
}

Result<ProvisioningMatrix> load_matrix(std::string_view text)
{
    ProvisioningMatrix       matrix;
    std::vector<Error>       failures;
    std::istringstream       in {std::string {text}};
    std::string              line;
    std::size_t              lineNo = 0;

    auto fail = [&](Errc code, std::string msg) {
        failures.push_back(make_error(code, "line " + std::to_string(lineNo) + ": " + std::move(msg)));
    };

    while (std::getline(in, line)) {
        ++lineNo;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }

        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(Errc::ParseError, e.what());
            continue;
        }
        if (!row.is_object() || !row.contains("role") || !row["role"].is_string() || !row.contains("resources")
            || !row["resources"].is_array()) {
            fail(Errc::ParseError, "row needs string \"role\" and array \"resources\"");
            continue;
        }

        auto roleName = row["role"].get<std::string>();
        auto role     = parse_role(roleName);
        if (!role) {
            fail(Errc::UnknownRole, roleName);
            continue;
        }

        std::optional<SubRole> subRole;
        if (row.contains("sub_role") && !row["sub_role"].is_null()) {
            if (!row["sub_role"].is_string()) {
                fail(Errc::ParseError, "\"sub_role\" must be a string or null");
                continue;
            }
            auto subName = row["sub_role"].get<std::string>();
            subRole      = parse_sub_role(subName);
            if (!subRole || !is_valid_pair(*role, *subRole)) {
                fail(Errc::UnknownRole, roleName + "/" + subName);
                continue;
            }
        }

        ResourceSet resources;
        bool        rowOk = true;
        for (const auto& item : row["resources"]) {
            if (!item.is_string()) {
                fail(Errc::ParseError, "resource names must be strings");
                rowOk = false;
                continue;
            }
            auto name = item.get<std::string>();
            auto res  = parse_resource(name);
            if (!res) {
                fail(Errc::UnknownResource, name);
                rowOk = false;
                continue;
            }
            resources.insert(*res);
        }
        if (!rowOk) {
            continue;
        }

        bool inserted = subRole ? matrix.sub_rows.emplace(std::pair {*role, *subRole}, resources).second
                                : matrix.base_rows.emplace(*role, resources).second;
        if (!inserted) {
            fail(Errc::DuplicateRow, roleName + (subRole ? "/" + std::string {to_string(*subRole)} : ""));
        }
    }

    if (!failures.empty()) {
        std::string msg;
        for (const auto& f : failures) {
            if (!msg.empty()) {
                msg += "; ";
            }
            msg += f.describe();
        }
        return make_error(failures.front().code, msg);
    }
    return matrix;
}

std::string serialize_matrix(const ProvisioningMatrix& matrix)
{
    auto names = [](const ResourceSet& set) {
        json arr = json::array();
        for (auto r : set) {
            arr.push_back(std::string {to_string(r)});
        }
        return arr;
    };

    std::string out;
    for (const auto& [role, set] : matrix.base_rows) {
        json row {{"role", to_string(role)}, {"sub_role", nullptr}, {"resources", names(set)}};
        out += row.dump() + "\n";
    }
    for (const auto& [key, set] : matrix.sub_rows) {
        json row {{"role", to_string(key.first)}, {"sub_role", to_string(key.second)}, {"resources", names(set)}};
        out += row.dump() + "\n";
    }
    return out;
}

std::string format_resources(const ResourceSet& resources)
{
    std::string out = "{";
    for (auto r : resources) {
        if (out.size() > 1) {
            out += ", ";
        }
        out += to_string(r);
    }
    return out + "}";
}

} // namespace idfabric
