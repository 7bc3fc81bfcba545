/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/compliance.hpp>
#include <idfabric/guard/filter.hpp>

#include <algorithm>
#include <map>

namespace idfabric {

namespace {

// Shorter values match too much unrelated text to be meaningful.
constexpr std::size_t kMinScanLength = 4;

std::string account_row(const PersonId& person, ResourceId resource)
{
    return "account " + std::string {to_string(resource)} + "/" + person.str();
}

} // namespace

std::string_view to_string(Severity severity) noexcept
{
    switch (severity) {
    case Severity::High:
        return "high";
    case Severity::Medium:
        return "medium";
    case Severity::Low:
        return "low";
    }
    return "?";
}

ComplianceReport report_compliance(const System& system, std::string_view serialized_snapshot)
{
    ComplianceReport report;
    auto&            findings = report.findings;

    auto identities = system.store.snapshot();
    if (!identities) {
        for (auto r : kAllResources) {
            report.unreachable.insert(r);
        }
        return report;
    }
    std::map<PersonId, const Identity*> byId;
    for (const auto& id : *identities) {
        byId.emplace(id.person_id, &id);
    }

    // Latest audit event per target, cited as evidence.
    std::map<std::string, std::uint64_t> lastEvent;
    for (const auto& e : system.audit.events()) {
        lastEvent[e.target] = e.sequence;
    }
    auto cite = [&](std::vector<std::string>& evidence, const PersonId& person) {
        if (auto it = lastEvent.find(person.str()); it != lastEvent.end()) {
            evidence.push_back("audit seq " + std::to_string(it->second));
        }
    };

    // One registry uid per person.
    if (auto registry = system.resources.registry().list_accounts()) {
        std::map<std::string, std::vector<PersonId>> holders;
        for (const auto& a : *registry) {
            auto uid = a.attributes.find("uid");
            holders[uid == a.attributes.end() ? a.person_id.str() : uid->second].push_back(a.person_id);
        }
        for (const auto& [uid, people] : holders) {
            if (people.size() < 2) {
                continue;
            }
            ComplianceFinding f {std::string {kRuleUniqueId}, uid,
                "registry uid " + uid + " is held by " + std::to_string(people.size()) + " accounts", Severity::High,
                {}};
            for (const auto& p : people) {
                f.evidence.push_back(account_row(p, ResourceId::AccessRegistry));
            }
            findings.push_back(std::move(f));
        }
    } else {
        report.unreachable.insert(ResourceId::AccessRegistry);
    }

    // Group membership must be backed by a matrix entitlement.
    for (const auto& [key, group] : system.admin.table().groups) {
        for (const auto& member : group.members) {
            auto it       = byId.find(member);
            bool entitled = false;
            if (it != byId.end() && it->second->status != IdentityStatus::Terminated) {
                auto e = entitlements_for(system.engine.matrix(), it->second->role, it->second->sub_role);
                entitled = e && e->resources.contains(key.first);
            }
            if (entitled) {
                continue;
            }
            ComplianceFinding f {std::string {kRuleNeedToKnow}, member.str(),
                member.str() + " is in group " + std::string {to_string(key.first)} + "/" + key.second
                    + " without an entitlement on that application",
                Severity::High, {"group " + std::string {to_string(key.first)} + "/" + key.second}};
            if (it != byId.end()) {
                f.evidence.push_back("identity " + member.str());
            }
            findings.push_back(std::move(f));
        }
    }

    // Drift against the matrix.
    DriftReport drift = system.engine.drift_for(*identities);
    report.unreachable.insert(drift.unreachable.begin(), drift.unreachable.end());
    for (const auto& [person, resource] : drift.orphaned) {
        ComplianceFinding f {std::string {kRuleOrphan}, person.str() + "@" + std::string {to_string(resource)},
            "account on " + std::string {to_string(resource)} + " is not backed by the matrix", Severity::Medium,
            {account_row(person, resource)}};
        cite(f.evidence, person);
        findings.push_back(std::move(f));
    }
    for (const auto& [person, resource] : drift.missing) {
        ComplianceFinding f {std::string {kRuleDrift}, person.str() + "@" + std::string {to_string(resource)},
            "entitled account on " + std::string {to_string(resource)} + " is missing", Severity::Medium,
            {"identity " + person.str()}};
        cite(f.evidence, person);
        findings.push_back(std::move(f));
    }
    for (const auto& m : drift.state_mismatch) {
        ComplianceFinding f {std::string {kRuleDrift},
            m.person_id.str() + "@" + std::string {to_string(m.resource)},
            "account on " + std::string {to_string(m.resource)} + " is " + std::string {to_string(m.actual)}
                + ", expected " + std::string {to_string(m.expected)},
            Severity::Medium, {account_row(m.person_id, m.resource)}};
        cite(f.evidence, m.person_id);
        findings.push_back(std::move(f));
    }

    // Sensitive values must never appear in the persisted state.
    for (const auto& id : *identities) {
        for (const auto& [name, value] : id.pii) {
            if (!value.sensitive || value.value.size() < kMinScanLength) {
                continue;
            }
            if (serialized_snapshot.find(value.value) != std::string_view::npos) {
                findings.push_back(ComplianceFinding {std::string {kRulePlaintext}, id.person_id.str() + "/" + name,
                    "sensitive field " + name + " appears in plaintext in the snapshot", Severity::High,
                    {"identity " + id.person_id.str()}});
            }
        }
    }

    std::stable_sort(findings.begin(), findings.end(), [](const auto& a, const auto& b) {
        return std::tie(a.rule_id, a.subject) < std::tie(b.rule_id, b.subject);
    });
    return report;
}

std::string render_report_html(const ComplianceReport& report)
{
    std::string out = "<table>\n<tr><th>rule</th><th>subject</th><th>severity</th><th>description</th></tr>\n";
    for (const auto& f : report.findings) {
        out += "<tr><td>" + html_escape(f.rule_id) + "</td><td>" + html_escape(f.subject) + "</td><td>"
            + std::string {to_string(f.severity)} + "</td><td>" + html_escape(f.description) + "</td></tr>\n";
    }
    out += "</table>\n";
    return out;
}

} // namespace idfabric
