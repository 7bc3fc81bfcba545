/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/engine.hpp>

#include <algorithm>
#include <functional>

namespace idfabric {

namespace {

constexpr std::array kVerbs {
    Verb::CreateAccount, Verb::SuspendAccount, Verb::RestoreAccount, Verb::DeleteAccount, Verb::SetAttributes};
constexpr std::array kStatuses {
    ActionStatus::Pending, ActionStatus::Done, ActionStatus::Failed, ActionStatus::ManualIntervention};

constexpr std::string_view kMailDomain = "campus.example";

ResourceAction make_action(ResourceId resource, Verb verb, const Identity& identity)
{
    ResourceAction action;
    action.resource  = resource;
    action.verb      = verb;
    action.person_id = identity.person_id;
    if (verb == Verb::CreateAccount || verb == Verb::RestoreAccount || verb == Verb::SetAttributes) {
        action.attributes = account_attributes(identity, resource);
    }
    return action;
}

Status as_status(const Result<Account>& r)
{
    if (r) {
        return {};
    }
    return r.error();
}

} // namespace

std::string_view to_string(DesiredState state) noexcept
{
    switch (state) {
    case DesiredState::Active:
        return "active";
    case DesiredState::Suspended:
        return "suspended";
    case DesiredState::SuspendedOrAbsent:
        return "suspended_or_absent";
    case DesiredState::Absent:
        return "absent";
    }
    return "?";
}

std::string_view to_string(WorkKind kind) noexcept
{
    switch (kind) {
    case WorkKind::Provision:
        return "provision";
    case WorkKind::Update:
        return "update";
    case WorkKind::Deprovision:
        return "deprovision";
    case WorkKind::Correction:
        return "correction";
    }
    return "?";
}

std::string_view to_string(Verb verb) noexcept
{
    switch (verb) {
    case Verb::CreateAccount:
        return "create_account";
    case Verb::SuspendAccount:
        return "suspend_account";
    case Verb::RestoreAccount:
        return "restore_account";
    case Verb::DeleteAccount:
        return "delete_account";
    case Verb::SetAttributes:
        return "set_attributes";
    }
    return "?";
}

std::string_view to_string(ActionStatus status) noexcept
{
    switch (status) {
    case ActionStatus::Pending:
        return "pending";
    case ActionStatus::Done:
        return "done";
    case ActionStatus::Failed:
        return "failed";
    case ActionStatus::ManualIntervention:
        return "manual_intervention";
    }
    return "?";
}

std::optional<Verb> parse_verb(std::string_view text) noexcept
{
    for (auto v : kVerbs) {
        if (to_string(v) == text) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<ActionStatus> parse_action_status(std::string_view text) noexcept
{
    for (auto s : kStatuses) {
        if (to_string(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

DesiredMap desired_state(const Identity& identity, const ProvisioningMatrix& matrix, Date today, unsigned grace_days)
{
    DesiredMap desired;
    for (auto r : kAllResources) {
        desired[r] = DesiredState::Absent;
    }

    if (identity.status == IdentityStatus::Terminated) {
        const bool inGrace = grace_days > 0 && identity.last_event
            && identity.last_event->kind == EventKind::Termination
            && std::chrono::sys_days {today}
                < std::chrono::sys_days {identity.last_event->effective_date} + std::chrono::days {grace_days};
        if (inGrace) {
            for (auto& [_, state] : desired) {
                state = DesiredState::SuspendedOrAbsent;
            }
        }
        return desired;
    }

    for (auto r : role_footprint(matrix, identity.role)) {
        desired[r] = DesiredState::SuspendedOrAbsent;
    }
    if (auto entitled = entitlements_for(matrix, identity.role, identity.sub_role, identity.person_id)) {
        for (auto r : entitled->resources) {
            desired[r] = identity.status == IdentityStatus::Active ? DesiredState::Active : DesiredState::Suspended;
        }
    }
    return desired;
}

Attributes account_attributes(const Identity& identity, ResourceId resource)
{
    Attributes attributes {{"uid", identity.person_id.str()}, {"full_name", identity.full_name},
        {"department", identity.department}};
    if (resource == ResourceId::AccessRegistry) {
        attributes["cn"]    = identity.full_name;
        attributes["email"] = identity.person_id.str() + "@" + std::string {kMailDomain};
    }
    return attributes;
}

DriftReport compute_drift(const std::vector<Identity>& identities, const ProvisioningMatrix& matrix,
    const std::map<ResourceId, std::vector<Account>>& actual, Date today, unsigned grace_days)
{
    DriftReport report;

    std::map<PersonId, DesiredMap> desired;
    for (const auto& identity : identities) {
        desired.emplace(identity.person_id, desired_state(identity, matrix, today, grace_days));
    }

    for (auto r : kAllResources) {
        auto it = actual.find(r);
        if (it == actual.end()) {
            report.unreachable.insert(r);
            continue;
        }
        std::map<PersonId, AccountState> present;
        for (const auto& account : it->second) {
            present.emplace(account.person_id, account.state);
        }

        for (const auto& [person, state] : present) {
            auto want = desired.find(person);
            auto d    = want == desired.end() ? DesiredState::Absent : want->second.at(r);
            switch (d) {
            case DesiredState::Absent:
                report.orphaned.emplace(person, r);
                break;
            case DesiredState::Active:
                if (state != AccountState::Active) {
                    report.state_mismatch.insert({person, r, AccountState::Active, state});
                }
                break;
            case DesiredState::Suspended:
            case DesiredState::SuspendedOrAbsent:
                if (state != AccountState::Suspended) {
                    report.state_mismatch.insert({person, r, AccountState::Suspended, state});
                }
                break;
            }
        }
        for (const auto& [person, map] : desired) {
            auto d = map.at(r);
            if ((d == DesiredState::Active || d == DesiredState::Suspended) && !present.contains(person)) {
                report.missing.emplace(person, r);
            }
        }
    }
    return report;
}

Status EngineConfig::validate() const
{
    if (max_attempts < 1) {
        return make_error(Errc::InvalidArgument, "max_attempts must be at least 1");
    }
    return {};
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(IdentityStore& store, const ProvisioningMatrix& matrix, ManagedResources& resources, AuditLog& audit,
    const Clock& clock, EngineConfig config)
    : mStore(store)
    , mMatrix(matrix)
    , mResources(resources)
    , mAudit(audit)
    , mClock(clock)
    , mConfig(config)
{
}

std::mutex& Engine::stripe_for(const PersonId& person)
{
    return mStripes[std::hash<std::string> {}(person.str()) % mStripes.size()];
}

bool Engine::queued_for(ResourceId resource, const PersonId& person) const
{
    std::lock_guard lock {mQueueMutex};
    auto            it = mQueue.find(resource);
    if (it == mQueue.end()) {
        return false;
    }
    return std::any_of(
        it->second.begin(), it->second.end(), [&](const Queued& q) { return q.action.person_id == person; });
}

void Engine::enqueue(ResourceAction action)
{
    std::lock_guard lock {mQueueMutex};
    mQueue[action.resource].push_back(Queued {mNextQueueId++, std::move(action)});
}

Status Engine::audited_call(const ResourceAction& action, Verb verb, const std::function<Status()>& call)
{
    if (auto writable = mAudit.ensure_writable(); !writable) {
        return writable;
    }
    Status      outcome = call();
    AuditDetail detail {{"resource", std::string {to_string(action.resource)}},
        {"attempt", std::to_string(action.attempt)}};
    if (verb != action.verb) {
        detail["on_behalf_of"] = std::string {to_string(action.verb)};
    }
    if (!outcome) {
        detail["error"] = outcome.error().describe();
    }
    auto recorded = mAudit.record(kSystemActor, AuditCategory::ResourceMutation, to_string(verb),
        action.person_id.str(), outcome ? AuditOutcome::Success : AuditOutcome::Failure, std::move(detail));
    if (!recorded) {
        return recorded.error();
    }
    return outcome;
}

Engine::Dispatch Engine::dispatch(ResourceAction& action)
{
    if (!mAudit.ensure_writable()) {
        return Dispatch::Unaudited;
    }
    ++action.attempt;

    auto&           endpoint = mResources.at(action.resource);
    const PersonId& person   = action.person_id;

    // Create, then settle attribute conflicts, then make sure the account is
    // active: CreateAccount always leaves an Active account behind.
    auto ensure_active = [&]() -> Status {
        Status s = audited_call(action, Verb::CreateAccount,
            [&] { return as_status(endpoint.create_account(person, action.attributes)); });
        if (!s && s.code() == Errc::AttributeConflict) {
            s = audited_call(
                action, Verb::SetAttributes, [&] { return endpoint.set_attributes(person, action.attributes); });
        }
        if (!s) {
            return s;
        }
        auto found = endpoint.find_account(person);
        if (!found) {
            return found.error();
        }
        if (*found && (*found)->state == AccountState::Suspended) {
            return audited_call(action, Verb::RestoreAccount, [&] { return endpoint.restore_account(person); });
        }
        return {};
    };

    Status s;
    switch (action.verb) {
    case Verb::CreateAccount:
        s = ensure_active();
        break;
    case Verb::RestoreAccount:
        s = audited_call(action, Verb::RestoreAccount, [&] { return endpoint.restore_account(person); });
        if (!s && s.code() == Errc::AccountNotFound) {
            s = ensure_active();
        }
        break;
    case Verb::SuspendAccount:
        s = audited_call(action, Verb::SuspendAccount, [&] { return endpoint.suspend_account(person); });
        if (!s && s.code() == Errc::AccountNotFound) {
            s = {};
        }
        break;
    case Verb::DeleteAccount:
        s = audited_call(action, Verb::DeleteAccount, [&] { return endpoint.delete_account(person); });
        break;
    case Verb::SetAttributes:
        s = audited_call(
            action, Verb::SetAttributes, [&] { return endpoint.set_attributes(person, action.attributes); });
        if (!s && s.code() == Errc::AccountNotFound) {
            s = {};
        }
        break;
    }

    if (s) {
        action.status = ActionStatus::Done;
        action.cause.clear();
        return Dispatch::Done;
    }
    action.status = ActionStatus::Failed;
    action.cause  = s.error().describe();
    return s.code() == Errc::LogUnavailable ? Dispatch::Unaudited : Dispatch::Failed;
}

Status Engine::run_actions(WorkOrder& order, bool& partial)
{
    for (std::size_t i = 0; i < order.actions.size(); ++i) {
        ResourceAction& action = order.actions[i];

        if (queued_for(action.resource, action.person_id)) {
            // Older work for this account is still waiting; keep the order.
            enqueue(action);
            partial = true;
            continue;
        }

        switch (dispatch(action)) {
        case Dispatch::Done:
            break;
        case Dispatch::Failed:
            if (action.attempt >= mConfig.max_attempts) {
                action.status = ActionStatus::ManualIntervention;
                std::lock_guard lock {mQueueMutex};
                mManual.push_back(action);
            } else {
                enqueue(action);
            }
            partial = true;
            break;
        case Dispatch::Unaudited:
            for (std::size_t j = i; j < order.actions.size(); ++j) {
                order.actions[j].status = ActionStatus::Pending;
                enqueue(order.actions[j]);
            }
            partial = true;
            return make_error(Errc::LogUnavailable, "resource actions deferred");
        }
    }
    return {};
}

Status Engine::record_workflow(const WorkOrder& order, bool partial, bool no_op, std::string_view action)
{
    AuditDetail detail {{"kind", std::string {to_string(order.kind)}},
        {"actions", std::to_string(order.actions.size())}, {"approval", "auto"}};
    if (order.origin_event) {
        detail["event"] = std::string {to_string(order.origin_event->kind)};
        detail["effective_date"] = format_date(order.origin_event->effective_date);
    }
    if (no_op) {
        detail["no_op"] = "true";
    }
    auto recorded = mAudit.record(kSystemActor, AuditCategory::Workflow, action, order.person_id.str(),
        partial ? AuditOutcome::Partial : AuditOutcome::Success, std::move(detail));
    if (!recorded) {
        return recorded.error();
    }
    return {};
}

std::vector<ResourceAction> Engine::removal_actions(const Identity& identity, Verb verb) const
{
    std::vector<ResourceAction> actions;
    for (auto it = kAllResources.rbegin(); it != kAllResources.rend(); ++it) {
        const auto r = *it;
        bool       needed = queued_for(r, identity.person_id);
        if (!needed) {
            auto found = mResources.at(r).find_account(identity.person_id);
            // An unreadable resource gets the action anyway; it will queue.
            needed = !found
                || (*found && (verb == Verb::DeleteAccount || (*found)->state == AccountState::Active));
        }
        if (needed) {
            actions.push_back(make_action(r, verb, identity));
        }
    }
    return actions;
}

Result<WorkflowResult> Engine::provision_workflow(const FeedRecord& record)
{
    std::shared_lock quiesce {mQuiesce};
    std::lock_guard  lock {stripe_for(record.person_id)};
    return provision_locked(record);
}

Result<WorkflowResult> Engine::provision_locked(const FeedRecord& record)
{
    if (auto writable = mAudit.ensure_writable(); !writable) {
        return writable.error();
    }
    auto existing = mStore.find(record.person_id);
    if (!existing) {
        return existing.error();
    }
    if (*existing) {
        return make_error(Errc::DuplicateIdentity, record.person_id.str());
    }

    Identity identity = identity_from_record(record);
    if (auto violations = validate_identity(identity); !violations.empty()) {
        return make_error(Errc::InvalidArgument, std::string {to_string(violations.front())});
    }
    if (auto inserted = mStore.insert(identity); !inserted) {
        return inserted.error();
    }

    WorkflowResult result;
    result.order = WorkOrder {identity.person_id, WorkKind::Provision, {}, record.event};

    auto desired = desired_state(identity, mMatrix, today(), mConfig.deletion_grace_days);
    for (auto r : kAllResources) {
        if (desired[r] == DesiredState::Active || desired[r] == DesiredState::Suspended) {
            result.order.actions.push_back(make_action(r, Verb::CreateAccount, identity));
        }
        if (desired[r] == DesiredState::Suspended) {
            result.order.actions.push_back(make_action(r, Verb::SuspendAccount, identity));
        }
    }

    auto ran = run_actions(result.order, result.partial);
    if (auto logged = record_workflow(result.order, result.partial, false, "provision"); !logged) {
        return logged.error();
    }
    if (!ran) {
        return ran.error();
    }
    return result;
}

Result<WorkflowResult> Engine::update_workflow(const FeedDelta& delta)
{
    std::shared_lock quiesce {mQuiesce};
    std::lock_guard  lock {stripe_for(delta.person_id)};
    return update_locked(delta);
}

Result<WorkflowResult> Engine::apply_lifecycle_event(const PersonId& person, const LifecycleEvent& event)
{
    std::shared_lock quiesce {mQuiesce};
    std::lock_guard  lock {stripe_for(person)};

    auto found = mStore.find(person);
    if (!found) {
        return found.error();
    }
    if (!*found) {
        return make_error(Errc::UnknownIdentity, person.str());
    }
    const Identity& current = **found;

    FeedDelta delta;
    delta.kind      = FeedDelta::Kind::Update;
    delta.person_id = person;
    delta.event     = event;
    delta.record    = FeedRecord {person, current.full_name, current.role, current.sub_role,
        event.kind == EventKind::Transfer ? event.department : current.department, event, event.effective_date};
    return update_locked(delta);
}

Result<WorkflowResult> Engine::update_locked(const FeedDelta& delta)
{
    if (auto writable = mAudit.ensure_writable(); !writable) {
        return writable.error();
    }
    auto found = mStore.find(delta.person_id);
    if (!found) {
        return found.error();
    }
    if (!*found) {
        return make_error(Errc::UnknownIdentity, delta.person_id.str());
    }

    const Identity old  = **found;
    Identity       next = old;

    WorkflowResult result;
    result.order = WorkOrder {old.person_id, WorkKind::Update, {}, delta.event};

    if (delta.event) {
        const AppliedEvent applied {delta.event->kind, delta.event->effective_date};
        if (old.last_event == applied) {
            result.no_op = true;
            if (auto logged = record_workflow(result.order, false, true, "update"); !logged) {
                return logged.error();
            }
            return result;
        }
        auto transitioned = apply_event(old, *delta.event);
        if (!transitioned) {
            return transitioned.error();
        }
        next            = std::move(transitioned).value();
        next.last_event = applied;
    }

    const bool fromRecord = delta.record.person_id == delta.person_id;
    if (fromRecord && next.status != IdentityStatus::Terminated) {
        next.full_name = delta.record.full_name;
        if (!delta.event || delta.event->kind != EventKind::Transfer) {
            next.department = delta.record.department;
        }
        if (!delta.event && is_valid_pair(delta.record.role, delta.record.sub_role)) {
            next.role     = delta.record.role;
            next.sub_role = delta.record.sub_role;
        }
    }

    if (next == old) {
        result.no_op = true;
        if (auto logged = record_workflow(result.order, false, true, "update"); !logged) {
            return logged.error();
        }
        return result;
    }
    if (auto replaced = mStore.replace(next); !replaced) {
        return replaced.error();
    }

    const auto grace = mConfig.deletion_grace_days;
    if (next.status == IdentityStatus::Terminated && old.status != IdentityStatus::Terminated) {
        if (grace == 0) {
            result.order.kind    = WorkKind::Deprovision;
            result.order.actions = removal_actions(next, Verb::DeleteAccount);
        } else {
            result.order.actions = removal_actions(next, Verb::SuspendAccount);
        }
    } else {
        const auto before = desired_state(old, mMatrix, today(), grace);
        const auto after  = desired_state(next, mMatrix, today(), grace);
        const bool attributesChanged = old.full_name != next.full_name || old.department != next.department;

        std::vector<ResourceAction> grants;
        std::vector<ResourceAction> removals;
        for (auto r : kAllResources) {
            const auto o = before.at(r);
            const auto n = after.at(r);
            switch (n) {
            case DesiredState::Active:
                if (o == DesiredState::Active) {
                    if (attributesChanged) {
                        grants.push_back(make_action(r, Verb::SetAttributes, next));
                    }
                } else if (o == DesiredState::Absent) {
                    grants.push_back(make_action(r, Verb::CreateAccount, next));
                } else {
                    grants.push_back(make_action(r, Verb::RestoreAccount, next));
                }
                break;
            case DesiredState::Suspended:
                if (o == DesiredState::Active) {
                    removals.push_back(make_action(r, Verb::SuspendAccount, next));
                } else if (o != DesiredState::Suspended) {
                    grants.push_back(make_action(r, Verb::CreateAccount, next));
                    grants.push_back(make_action(r, Verb::SuspendAccount, next));
                }
                break;
            case DesiredState::SuspendedOrAbsent:
                if (o == DesiredState::Active) {
                    removals.push_back(make_action(r, Verb::SuspendAccount, next));
                }
                break;
            case DesiredState::Absent:
                if (o != DesiredState::Absent) {
                    removals.push_back(make_action(r, Verb::DeleteAccount, next));
                }
                break;
            }
        }
        // Registry first when granting, last when taking away.
        result.order.actions = std::move(grants);
        result.order.actions.insert(result.order.actions.end(), removals.rbegin(), removals.rend());
    }

    auto ran = run_actions(result.order, result.partial);
    if (auto logged = record_workflow(result.order, result.partial, false, "update"); !logged) {
        return logged.error();
    }
    if (!ran) {
        return ran.error();
    }
    return result;
}

Result<WorkflowResult> Engine::deprovision_workflow(const PersonId& person)
{
    std::shared_lock quiesce {mQuiesce};
    std::lock_guard  lock {stripe_for(person)};

    auto found = mStore.find(person);
    if (!found) {
        return found.error();
    }
    if (!*found) {
        return make_error(Errc::UnknownIdentity, person.str());
    }
    if ((*found)->status != IdentityStatus::Terminated) {
        return make_error(Errc::NotTerminated, person.str());
    }
    return deprovision_locked(**found, WorkKind::Deprovision);
}

Result<WorkflowResult> Engine::deprovision_locked(const Identity& identity, WorkKind kind)
{
    if (auto writable = mAudit.ensure_writable(); !writable) {
        return writable.error();
    }
    WorkflowResult result;
    result.order = WorkOrder {identity.person_id, kind, removal_actions(identity, Verb::DeleteAccount), std::nullopt};

    auto ran = run_actions(result.order, result.partial);
    if (auto logged = record_workflow(result.order, result.partial, false, "deprovision"); !logged) {
        return logged.error();
    }
    if (!ran) {
        return ran.error();
    }
    return result;
}

Result<std::size_t> Engine::run_due_deletions()
{
    if (mConfig.deletion_grace_days == 0) {
        return std::size_t {0};
    }
    auto identities = mStore.snapshot();
    if (!identities) {
        return identities.error();
    }

    std::size_t actions = 0;
    for (const auto& identity : *identities) {
        if (identity.status != IdentityStatus::Terminated) {
            continue;
        }
        auto desired = desired_state(identity, mMatrix, today(), mConfig.deletion_grace_days);
        if (desired.at(ResourceId::AccessRegistry) != DesiredState::Absent) {
            continue;
        }
        std::shared_lock quiesce {mQuiesce};
        std::lock_guard  lock {stripe_for(identity.person_id)};
        if (removal_actions(identity, Verb::DeleteAccount).empty()) {
            continue;
        }
        auto done = deprovision_locked(identity, WorkKind::Deprovision);
        if (!done) {
            return done.error();
        }
        actions += done->order.actions.size();
    }
    return actions;
}

Result<FeedApplyResult> Engine::apply_feed(const std::vector<FeedRecord>& records)
{
    auto identities = mStore.snapshot();
    if (!identities) {
        return identities.error();
    }
    auto deltas = diff_feed(*identities, records);
    if (!deltas) {
        return deltas.error();
    }

    FeedApplyResult out;
    out.deltas = std::move(deltas).value();
    for (const auto& delta : out.deltas) {
        Result<WorkflowResult> run = WorkflowResult {};
        switch (delta.kind) {
        case FeedDelta::Kind::NoChange:
            ++out.unchanged;
            continue;
        case FeedDelta::Kind::Create:
            run = provision_workflow(delta.record);
            if (run) {
                ++out.created;
            }
            break;
        case FeedDelta::Kind::Update:
            run = update_workflow(delta);
            if (run) {
                ++out.updated;
            }
            break;
        }
        if (!run) {
            if (run.code() == Errc::LogUnavailable || run.code() == Errc::StoreUnavailable) {
                return run.error();
            }
            out.failures.emplace_back(delta.person_id, run.error());
        } else if (run->partial) {
            out.partial = true;
        }
    }
    return out;
}

DriftReport Engine::drift_for(const std::vector<Identity>& identities) const
{
    std::map<ResourceId, std::vector<Account>> actual;
    for (auto r : kAllResources) {
        if (auto accounts = mResources.at(r).list_accounts()) {
            actual.emplace(r, std::move(accounts).value());
        }
    }
    return compute_drift(identities, mMatrix, actual, date_of(mClock.now()), mConfig.deletion_grace_days);
}

DriftReport Engine::drift_unlocked() const
{
    auto identities = mStore.snapshot();
    if (!identities) {
        DriftReport report;
        for (auto r : kAllResources) {
            report.unreachable.insert(r);
        }
        return report;
    }
    return drift_for(*identities);
}

DriftReport Engine::drift() const
{
    std::unique_lock quiesce {mQuiesce};
    return drift_unlocked();
}

Result<DriftReport> Engine::reconcile()
{
    std::unique_lock quiesce {mQuiesce};
    auto             identities = mStore.snapshot();
    if (!identities) {
        return identities.error();
    }
    DriftReport report = drift_for(*identities);

    AuditDetail detail {{"missing", std::to_string(report.missing.size())},
        {"orphaned", std::to_string(report.orphaned.size())},
        {"state_mismatch", std::to_string(report.state_mismatch.size())}};
    for (auto r : report.unreachable) {
        detail["unreachable." + std::string {to_string(r)}] = "true";
    }
    auto recorded = mAudit.record(kSystemActor, AuditCategory::Reconciliation, "reconcile", "all",
        report.partial() ? AuditOutcome::Partial : AuditOutcome::Success, std::move(detail));
    if (!recorded) {
        return recorded.error();
    }
    return report;
}

Result<WorkflowResult> Engine::apply_corrections(const DriftReport& report)
{
    std::unique_lock quiesce {mQuiesce};
    if (auto writable = mAudit.ensure_writable(); !writable) {
        return writable.error();
    }

    WorkflowResult result;
    result.order.kind = WorkKind::Correction;

    std::map<PersonId, Identity> identities;
    auto                         lookup = [&](const PersonId& person) -> const Identity* {
        if (auto it = identities.find(person); it != identities.end()) {
            return &it->second;
        }
        auto found = mStore.find(person);
        if (!found || !*found) {
            return nullptr;
        }
        return &identities.emplace(person, **found).first->second;
    };

    for (const auto& [person, resource] : report.missing) {
        const Identity* identity = lookup(person);
        if (!identity) {
            continue;
        }
        auto d = desired_state(*identity, mMatrix, today(), mConfig.deletion_grace_days).at(resource);
        if (d != DesiredState::Active && d != DesiredState::Suspended) {
            continue;
        }
        result.order.actions.push_back(make_action(resource, Verb::CreateAccount, *identity));
        if (d == DesiredState::Suspended) {
            result.order.actions.push_back(make_action(resource, Verb::SuspendAccount, *identity));
        }
    }
    for (const auto& m : report.state_mismatch) {
        Identity stub;
        stub.person_id = m.person_id;
        const Identity* identity = lookup(m.person_id);
        const Identity& subject  = identity ? *identity : stub;
        result.order.actions.push_back(make_action(
            m.resource, m.expected == AccountState::Active ? Verb::RestoreAccount : Verb::SuspendAccount, subject));
    }
    for (auto it = report.orphaned.rbegin(); it != report.orphaned.rend(); ++it) {
        Identity stub;
        stub.person_id = it->first;
        result.order.actions.push_back(make_action(it->second, Verb::DeleteAccount, stub));
    }

    auto ran = run_actions(result.order, result.partial);
    if (auto logged = record_workflow(result.order, result.partial, false, "apply_corrections"); !logged) {
        return logged.error();
    }
    if (!ran) {
        return ran.error();
    }
    return result;
}

Result<std::size_t> Engine::drain_retries()
{
    std::lock_guard  drainer {mDrainMutex};
    std::shared_lock quiesce {mQuiesce};

    std::size_t completed = 0;
    for (auto r : kAllResources) {
        std::vector<std::uint64_t> ids;
        {
            std::lock_guard lock {mQueueMutex};
            for (const auto& q : mQueue[r]) {
                ids.push_back(q.id);
            }
        }

        std::set<PersonId> blocked;
        for (auto id : ids) {
            ResourceAction action;
            {
                std::lock_guard lock {mQueueMutex};
                auto&           queue = mQueue[r];
                auto it = std::find_if(queue.begin(), queue.end(), [&](const Queued& q) { return q.id == id; });
                if (it == queue.end()) {
                    continue;
                }
                action = it->action;
            }
            if (blocked.contains(action.person_id)) {
                continue;
            }

            std::lock_guard person {stripe_for(action.person_id)};
            auto            outcome = dispatch(action);

            std::lock_guard lock {mQueueMutex};
            auto&           queue = mQueue[r];
            auto it = std::find_if(queue.begin(), queue.end(), [&](const Queued& q) { return q.id == id; });
            switch (outcome) {
            case Dispatch::Done:
                queue.erase(it);
                ++completed;
                break;
            case Dispatch::Failed:
                if (action.attempt >= mConfig.max_attempts) {
                    action.status = ActionStatus::ManualIntervention;
                    mManual.push_back(action);
                    queue.erase(it);
                } else {
                    it->action = action;
                    blocked.insert(action.person_id);
                }
                break;
            case Dispatch::Unaudited:
                it->action = action;
                return make_error(Errc::LogUnavailable, "retry drain halted");
            }
        }
    }
    return completed;
}

Result<std::size_t> Engine::drain_until_quiet()
{
    // Every pass either completes or charges an attempt to each queue head,
    // so this ends once everything succeeded or reached manual intervention.
    std::size_t total = 0;
    while (!retry_queue().empty()) {
        auto pass = drain_retries();
        if (!pass) {
            return pass.error();
        }
        total += *pass;
    }
    return total;
}

std::vector<ResourceAction> Engine::retry_queue() const
{
    std::lock_guard             lock {mQueueMutex};
    std::vector<ResourceAction> out;
    for (const auto& [_, queue] : mQueue) {
        for (const auto& q : queue) {
            out.push_back(q.action);
        }
    }
    return out;
}

std::vector<ResourceAction> Engine::manual_intervention() const
{
    std::lock_guard lock {mQueueMutex};
    return mManual;
}

void Engine::restore_queue(std::vector<ResourceAction> pending, std::vector<ResourceAction> manual)
{
    std::lock_guard lock {mQueueMutex};
    mQueue.clear();
    for (auto& action : pending) {
        mQueue[action.resource].push_back(Queued {mNextQueueId++, std::move(action)});
    }
    mManual = std::move(manual);
}

} // namespace idfabric
