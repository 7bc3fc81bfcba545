/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/scenario.hpp>

#include <algorithm>

namespace idfabric {

namespace {

struct Definition {
    std::string                                               name;
    FeedRecord                                                joiner;
    std::vector<LifecycleEvent (*)(Date)>                     events;
    // Expected account states at the end; nullopt means absent.
    std::map<ResourceId, std::optional<AccountState>>         expected;
    std::string                                               expectation;
};

LifecycleEvent matriculation(Date d)
{
    return LifecycleEvent::simple(EventKind::Matriculation, d);
}
LifecycleEvent enrollment(Date d)
{
    return LifecycleEvent::simple(EventKind::Enrollment, d);
}
LifecycleEvent graduation(Date d)
{
    return LifecycleEvent::simple(EventKind::Graduation, d);
}
LifecycleEvent withdrawal(Date d)
{
    return LifecycleEvent::withdrawal(WithdrawalReason::Voluntary, d);
}
LifecycleEvent leave(Date d)
{
    return LifecycleEvent::simple(EventKind::LeaveOfAbsence, d);
}
LifecycleEvent back(Date d)
{
    return LifecycleEvent::simple(EventKind::ReturnFromLeave, d);
}
LifecycleEvent termination(Date d)
{
    return LifecycleEvent::simple(EventKind::Termination, d);
}

FeedRecord record(std::string id, std::string name, Role role, SubRole sub, std::string dept, EventKind hint, Date d)
{
    return FeedRecord {PersonId {std::move(id)}, std::move(name), role, sub, std::move(dept),
        hint == EventKind::Hire ? LifecycleEvent::hire(d, sub) : LifecycleEvent::simple(hint, d), d};
}

std::vector<Definition> definitions(Date d)
{
    using R  = ResourceId;
    using AS = AccountState;
    const auto A = std::optional {AS::Active};
    const auto S = std::optional {AS::Suspended};
    const std::optional<AS> none;

    auto student = record("S1001", "Ada Lovelace", Role::Student, SubRole::Prospect, "mathematics",
        EventKind::Application, d);
    auto employee = record("E2001", "Grace Hopper", Role::Employee, SubRole::IndividualContributor, "computing",
        EventKind::Hire, d);

    return {
        {"student-full-lifecycle", student, {matriculation, enrollment, graduation},
            {{R::AccessRegistry, A}, {R::StudentPortal, A}, {R::UnixHosts, S}, {R::LearningPlatform, S},
                {R::DirectoryMail, none}},
            "alumni keep access_registry and student_portal; unix_hosts and learning_platform suspended"},
        {"student-withdrawal", student, {matriculation, enrollment, withdrawal},
            {{R::AccessRegistry, S}, {R::StudentPortal, S}, {R::UnixHosts, S}, {R::LearningPlatform, S},
                {R::DirectoryMail, none}},
            "every account suspended after withdrawal"},
        {"employee-leave", employee, {leave, back},
            {{R::AccessRegistry, A}, {R::DirectoryMail, A}, {R::UnixHosts, A}, {R::StudentPortal, none},
                {R::LearningPlatform, none}},
            "accounts suspended for the leave and restored on return"},
        {"employee-termination", employee, {termination},
            {{R::AccessRegistry, none}, {R::DirectoryMail, none}, {R::UnixHosts, none}, {R::StudentPortal, none},
                {R::LearningPlatform, none}},
            "no accounts remain after termination"},
    };
}

std::string describe_accounts(const System& system, const PersonId& person)
{
    std::string out;
    for (auto r : kAllResources) {
        auto found = system.resources.at(r).find_account(person);
        out += out.empty() ? "" : " ";
        out += std::string {to_string(r)} + "=";
        if (!found) {
            out += "unreachable";
        } else if (!*found) {
            out += "absent";
        } else {
            out += to_string((*found)->state);
        }
    }
    return out;
}

} // namespace

std::vector<std::string> scenario_names()
{
    std::vector<std::string> names;
    for (const auto& d : definitions(Date {})) {
        names.push_back(d.name);
    }
    return names;
}

Result<ScenarioResult> run_scenario(System& system, std::string_view name)
{
    Date today = date_of(system.clock.now());
    auto defs  = definitions(today);
    auto def   = std::find_if(defs.begin(), defs.end(), [&](const Definition& d) { return d.name == name; });
    if (def == defs.end()) {
        return make_error(Errc::InvalidArgument, "unknown scenario " + std::string {name});
    }

    ScenarioResult result;
    result.name    = def->name;
    result.subject = def->joiner.person_id;

    auto provisioned = system.engine.provision_workflow(def->joiner);
    if (!provisioned) {
        return provisioned.error();
    }

    // Sensitive PII rides along so the encrypted-at-rest path is exercised.
    auto stored = system.store.find(result.subject);
    if (!stored || !*stored) {
        return make_error(Errc::StoreUnavailable, "identity vanished after provisioning");
    }
    Identity withPii               = **stored;
    withPii.pii["national_id"]     = PiiValue {"078-05-1120", true};
    withPii.pii["date_of_birth"]   = PiiValue {"1815-12-10", true};
    withPii.pii["preferred_pronoun"] = PiiValue {"they", false};
    if (auto replaced = system.store.replace(withPii); !replaced) {
        return replaced.error();
    }

    result.trace.push_back("provision " + result.subject.str() + " as " + std::string {to_string(def->joiner.role)}
        + "/" + std::string {to_string(def->joiner.sub_role)} + ": " + describe_accounts(system, result.subject));

    for (auto make : def->events) {
        auto event = make(today);
        auto done  = system.engine.apply_lifecycle_event(result.subject, event);
        if (!done) {
            return done.error();
        }
        result.trace.push_back(std::string {to_string(event.kind)} + ": " + describe_accounts(system, result.subject));
    }

    auto final = system.store.find(result.subject);
    if (!final || !*final) {
        return make_error(Errc::StoreUnavailable, "identity vanished");
    }
    result.final_identity = **final;

    result.expectations_met = true;
    for (auto r : kAllResources) {
        auto found = system.resources.at(r).find_account(result.subject);
        if (!found) {
            return found.error();
        }
        result.accounts[r] = *found ? std::optional {(*found)->state} : std::nullopt;
        if (result.accounts[r] != def->expected.at(r)) {
            result.expectations_met = false;
        }
    }
    result.drift       = system.engine.drift();
    result.expectation = def->expectation;
    if (!result.drift.empty()) {
        result.expectations_met = false;
    }
    return result;
}

} // namespace idfabric
