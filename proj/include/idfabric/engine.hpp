/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_ENGINE_HPP_
#define IDFABRIC_ENGINE_HPP_

#include <idfabric/audit.hpp>
#include <idfabric/feed.hpp>
#include <idfabric/matrix.hpp>
#include <idfabric/resources.hpp>
#include <idfabric/store.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <tuple>
#include <vector>

namespace idfabric {

// ---------------------------------------------------------------------------
// Desired state

/// What the matrix says a (person, resource) pair should look like.
/// SuspendedOrAbsent covers resources inside the role's footprint that the
/// identity is not currently entitled to, and terminated identities still in
/// their deletion grace period.
enum class DesiredState { Active, Suspended, SuspendedOrAbsent, Absent };

std::string_view to_string(DesiredState state) noexcept;

using DesiredMap = std::map<ResourceId, DesiredState>;

/// Per-resource desired state for one identity on `today`.
DesiredMap desired_state(
    const Identity& identity, const ProvisioningMatrix& matrix, Date today, unsigned deletion_grace_days = 0);

/// Attributes an account for `identity` carries on `resource`.
Attributes account_attributes(const Identity& identity, ResourceId resource);

using AccountKey = std::pair<PersonId, ResourceId>;

struct StateMismatch {
    PersonId     person_id;
    ResourceId   resource;
    AccountState expected;
    AccountState actual;

    auto operator<=>(const StateMismatch&) const = default;
};

struct DriftReport {
    std::set<AccountKey>    missing;
    std::set<AccountKey>    orphaned;
    std::set<StateMismatch> state_mismatch;
    // Resources that could not be read; their rows are not compared.
    std::set<ResourceId> unreachable;

    bool empty() const noexcept { return missing.empty() && orphaned.empty() && state_mismatch.empty(); }
    bool partial() const noexcept { return !unreachable.empty(); }
};

/// Pure comparison of desired and actual. `actual` holds the account tables
/// of every reachable resource.
DriftReport compute_drift(const std::vector<Identity>& identities, const ProvisioningMatrix& matrix,
    const std::map<ResourceId, std::vector<Account>>& actual, Date today, unsigned deletion_grace_days = 0);

// ---------------------------------------------------------------------------
// Work orders

enum class WorkKind { Provision, Update, Deprovision, Correction };
enum class Verb { CreateAccount, SuspendAccount, RestoreAccount, DeleteAccount, SetAttributes };
enum class ActionStatus { Pending, Done, Failed, ManualIntervention };

std::string_view          to_string(WorkKind kind) noexcept;
std::string_view          to_string(Verb verb) noexcept;
std::string_view          to_string(ActionStatus status) noexcept;
std::optional<Verb>       parse_verb(std::string_view text) noexcept;
std::optional<ActionStatus> parse_action_status(std::string_view text) noexcept;

struct ResourceAction {
    ResourceId   resource = ResourceId::AccessRegistry;
    Verb         verb     = Verb::CreateAccount;
    PersonId     person_id;
    // CreateAccount, RestoreAccount fallback, SetAttributes.
    Attributes   attributes;
    unsigned     attempt = 0;
    ActionStatus status  = ActionStatus::Pending;
    std::string  cause;

    bool operator==(const ResourceAction&) const = default;
};

struct WorkOrder {
    PersonId                      person_id;
    WorkKind                      kind = WorkKind::Provision;
    std::vector<ResourceAction>   actions;
    std::optional<LifecycleEvent> origin_event;
};

struct WorkflowResult {
    WorkOrder order;
    // Some action failed and is waiting in the retry queue.
    bool partial = false;
    // Nothing to do: a re-delivered event or an unchanged update.
    bool no_op = false;
};

struct EngineConfig {
    unsigned max_attempts        = 5;
    unsigned deletion_grace_days = 0;

    Status validate() const;
};

struct FeedApplyResult {
    std::vector<FeedDelta> deltas;
    std::size_t            created   = 0;
    std::size_t            updated   = 0;
    std::size_t            unchanged = 0;
    bool                   partial   = false;
    // Deltas whose workflow failed, with the cause.
    std::vector<std::pair<PersonId, Error>> failures;
};

/// Provisioning engine. Workflows for one person run strictly in order;
/// distinct people may proceed concurrently. reconcile and apply_corrections
/// wait for in-flight workflows to finish and block new ones meanwhile.
///
/// Every resource call is preceded by an audit-writability check and
/// followed by exactly one ResourceMutation event. A call that cannot be
/// audited is not made and the workflow fails with LogUnavailable.
class Engine {
public:
    Engine(IdentityStore& store, const ProvisioningMatrix& matrix, ManagedResources& resources, AuditLog& audit,
        const Clock& clock, EngineConfig config = {});

    Engine(const Engine&)            = delete;
    Engine& operator=(const Engine&) = delete;

    Result<WorkflowResult> provision_workflow(const FeedRecord& record);
    Result<WorkflowResult> update_workflow(const FeedDelta& delta);
    Result<WorkflowResult> deprovision_workflow(const PersonId& person);

    /// Applies one lifecycle event to a stored identity.
    Result<WorkflowResult> apply_lifecycle_event(const PersonId& person, const LifecycleEvent& event);

    /// Parses nothing: diffs `records` against the store and runs the
    /// matching workflow per delta.
    Result<FeedApplyResult> apply_feed(const std::vector<FeedRecord>& records);

    /// Deletes accounts of terminated identities whose grace period ended.
    Result<std::size_t> run_due_deletions();

    /// Read-only. Audited as a Reconciliation event.
    Result<DriftReport> reconcile();
    /// reconcile without the audit record, for read-only reporting.
    DriftReport drift() const;
    DriftReport drift_for(const std::vector<Identity>& identities) const;

    Result<WorkflowResult> apply_corrections(const DriftReport& report);

    /// One FIFO pass per resource. Returns the number of actions completed.
    Result<std::size_t> drain_retries();
    /// Drains until every queued action succeeded or moved to manual intervention.
    Result<std::size_t> drain_until_quiet();

    /// Pending actions, per resource in FIFO order.
    std::vector<ResourceAction> retry_queue() const;
    std::vector<ResourceAction> manual_intervention() const;
    void restore_queue(std::vector<ResourceAction> pending, std::vector<ResourceAction> manual);

    const EngineConfig&       config() const noexcept { return mConfig; }
    const ProvisioningMatrix& matrix() const noexcept { return mMatrix; }

private:
    struct Queued {
        std::uint64_t  id;
        ResourceAction action;
    };

    // Outcome of one dispatch attempt.
    enum class Dispatch { Done, Failed, Unaudited };

    std::mutex& stripe_for(const PersonId& person);

    Result<WorkflowResult> provision_locked(const FeedRecord& record);
    Result<WorkflowResult> update_locked(const FeedDelta& delta);
    Result<WorkflowResult> deprovision_locked(const Identity& identity, WorkKind kind);

    // Runs the order's actions: dispatches those with nothing queued ahead
    // of them and queues the rest. Fills in statuses.
    Status run_actions(WorkOrder& order, bool& partial);

    Dispatch dispatch(ResourceAction& action);
    Status   audited_call(const ResourceAction& action, Verb verb, const std::function<Status()>& call);

    bool queued_for(ResourceId resource, const PersonId& person) const;
    void enqueue(ResourceAction action);

    // Actions that bring an existing (or queued) account set to `target`.
    std::vector<ResourceAction> removal_actions(const Identity& identity, Verb verb) const;

    Status record_workflow(const WorkOrder& order, bool partial, bool no_op, std::string_view action);

    DriftReport drift_unlocked() const;

    Date today() const { return date_of(mClock.now()); }

    IdentityStore&            mStore;
    ProvisioningMatrix        mMatrix;
    ManagedResources&         mResources;
    AuditLog&                 mAudit;
    const Clock&              mClock;
    EngineConfig              mConfig;

    mutable std::shared_mutex       mQuiesce;
    std::array<std::mutex, 64>      mStripes;
    std::mutex                      mDrainMutex;

    mutable std::mutex                                 mQueueMutex;
    std::map<ResourceId, std::list<Queued>>            mQueue;
    std::vector<ResourceAction>                        mManual;
    std::uint64_t                                      mNextQueueId = 1;
};

} // namespace idfabric

#endif
