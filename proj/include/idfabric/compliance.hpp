/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_COMPLIANCE_HPP_
#define IDFABRIC_COMPLIANCE_HPP_

#include <idfabric/system.hpp>

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace idfabric {

inline constexpr std::string_view kRuleUniqueId    = "PCI-UNIQUE-ID";
inline constexpr std::string_view kRuleNeedToKnow  = "FERPA-NEED-TO-KNOW";
inline constexpr std::string_view kRuleOrphan      = "ORPHAN-ACCOUNT";
inline constexpr std::string_view kRuleDrift       = "MATRIX-DRIFT";
inline constexpr std::string_view kRulePlaintext   = "PLAINTEXT-PII";

enum class Severity { High, Medium, Low };
std::string_view to_string(Severity severity) noexcept;

struct ComplianceFinding {
    std::string              rule_id;
    std::string              subject;
    std::string              description;
    Severity                 severity = Severity::Medium;
    // Store rows, account rows, or audit sequence numbers behind the finding.
    std::vector<std::string> evidence;

    bool operator==(const ComplianceFinding&) const = default;
};

struct ComplianceReport {
    std::vector<ComplianceFinding> findings;
    // Resources that could not be read; the report is partial if non-empty.
    std::set<ResourceId> unreachable;

    bool partial() const noexcept { return !unreachable.empty(); }
};

/// Read-only compliance pass. `serialized_snapshot` is the persisted form of
/// the same state and is scanned for plaintext copies of sensitive PII.
/// Findings are sorted by (rule, subject).
ComplianceReport report_compliance(const System& system, std::string_view serialized_snapshot);

/// HTML-escaped rendering for reports viewed in a browser.
std::string render_report_html(const ComplianceReport& report);

} // namespace idfabric

#endif
