/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/cli.hpp>
#include <idfabric/compliance.hpp>
#include <idfabric/feed.hpp>
#include <idfabric/guard/protect.hpp>
#include <idfabric/scenario.hpp>
#include <idfabric/snapshot.hpp>
#include <idfabric/system.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <sodium.h>

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <ostream>

namespace idfabric {

namespace {

using nlohmann::json;

constexpr std::string_view kConfigEnv  = "IDFABRIC_CONFIG";
constexpr std::string_view kDataKeyEnv = "IDFABRIC_DATA_KEY";
constexpr std::size_t      kKeyBytes   = 32;
constexpr int              kCertYears  = 1;

std::optional<std::string> env(std::string_view name)
{
    const char* value = std::getenv(std::string {name}.c_str());
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string {value};
}

template <typename T>
Result<T> number_field(const json& doc, std::string_view key)
{
    const auto& v = doc.at(std::string {key});
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        return make_error(Errc::InvalidArgument, std::string {key} + " must be a positive integer");
    }
    return static_cast<T>(v.get<long long>());
}

std::string config_path_text(const std::filesystem::path& p)
{
    return std::filesystem::weakly_canonical(p).string();
}

/// What one command hands back to the driver.
struct Reply {
    int         code = kExitOk;
    json        doc  = json::object();
    std::string text;
};

Reply failure(const Error& error)
{
    Reply r;
    r.code        = exit_code_for(error.code);
    r.doc["ok"]   = false;
    r.doc["error"] = {{"code", std::string {to_string(error.code)}}, {"message", error.message}};
    r.text        = error.describe();
    return r;
}

json drift_json(const DriftReport& d)
{
    json out {{"missing", json::array()}, {"orphaned", json::array()}, {"state_mismatch", json::array()},
        {"unreachable", json::array()}};
    for (const auto& [p, r] : d.missing) {
        out["missing"].push_back({{"person_id", p.str()}, {"resource", to_string(r)}});
    }
    for (const auto& [p, r] : d.orphaned) {
        out["orphaned"].push_back({{"person_id", p.str()}, {"resource", to_string(r)}});
    }
    for (const auto& m : d.state_mismatch) {
        out["state_mismatch"].push_back({{"person_id", m.person_id.str()}, {"resource", to_string(m.resource)},
            {"expected", to_string(m.expected)}, {"actual", to_string(m.actual)}});
    }
    for (auto r : d.unreachable) {
        out["unreachable"].push_back(to_string(r));
    }
    return out;
}

std::string drift_text(const DriftReport& d)
{
    std::string out = std::to_string(d.missing.size()) + " missing, " + std::to_string(d.orphaned.size())
        + " orphaned, " + std::to_string(d.state_mismatch.size()) + " mismatched";
    if (d.partial()) {
        out += " (partial: " + std::to_string(d.unreachable.size()) + " unreachable)";
    }
    for (const auto& [p, r] : d.missing) {
        out += "\n  missing " + p.str() + " on " + std::string {to_string(r)};
    }
    for (const auto& [p, r] : d.orphaned) {
        out += "\n  orphaned " + p.str() + " on " + std::string {to_string(r)};
    }
    for (const auto& m : d.state_mismatch) {
        out += "\n  " + m.person_id.str() + " on " + std::string {to_string(m.resource)} + " is "
            + std::string {to_string(m.actual)} + ", expected " + std::string {to_string(m.expected)};
    }
    return out;
}

json action_json(const ResourceAction& a)
{
    return {{"resource", to_string(a.resource)}, {"verb", to_string(a.verb)}, {"person_id", a.person_id.str()},
        {"attempt", a.attempt}, {"status", to_string(a.status)}, {"cause", a.cause}};
}

json workflow_json(const WorkflowResult& w)
{
    json actions = json::array();
    for (const auto& a : w.order.actions) {
        actions.push_back(action_json(a));
    }
    return {{"person_id", w.order.person_id.str()}, {"kind", to_string(w.order.kind)}, {"partial", w.partial},
        {"no_op", w.no_op}, {"actions", actions}};
}

std::string workflow_text(const WorkflowResult& w)
{
    if (w.no_op) {
        return w.order.person_id.str() + ": no change";
    }
    std::string out = w.order.person_id.str() + ": " + std::string {to_string(w.order.kind)};
    for (const auto& a : w.order.actions) {
        out += "\n  " + std::string {to_string(a.verb)} + " " + std::string {to_string(a.resource)} + " "
            + std::string {to_string(a.status)};
    }
    return out;
}

Result<Certificate> parse_certificate(std::string_view text)
{
    try {
        auto doc = json::parse(text);
        auto nb  = parse_date(doc.at("not_before").get<std::string>());
        auto na  = parse_date(doc.at("not_after").get<std::string>());
        if (!nb || !na) {
            return make_error(Errc::ParseError, "certificate dates must be YYYY-MM-DD");
        }
        return Certificate {doc.at("serial").get<std::uint64_t>(), doc.at("subject_uid").get<std::string>(),
            doc.at("subject_email").get<std::string>(), doc.at("issuer").get<std::string>(), *nb, *na,
            doc.at("key_token").get<std::string>()};
    } catch (const json::exception& e) {
        return make_error(Errc::ParseError, std::string {"certificate: "} + e.what());
    }
}

json auth_json(const AuthResult& r)
{
    json factors = json::array();
    for (auto f : r.factors) {
        factors.push_back(to_string(f));
    }
    json out {{"granted", r.granted()}, {"person_id", r.person_id.str()}, {"factors", factors}};
    if (r.session) {
        out["session"] = session_token(*r.session);
    }
    if (r.denial) {
        out["denial"] = {{"reason", to_string(r.denial->reason)}, {"message", r.denial->describe()}};
    }
    return out;
}

Reply auth_reply(const AuthResult& r)
{
    Reply reply;
    reply.doc = auth_json(r);
    if (r.granted()) {
        reply.text = "granted " + r.person_id.str() + (r.session ? " session " + session_token(*r.session) : "");
    } else {
        reply.code = kExitPartial;
        reply.text = "denied: " + r.denial->describe();
    }
    return reply;
}

json identity_json(const Identity& id)
{
    json pii = json::object();
    for (const auto& [name, value] : id.pii) {
        pii[name] = value.sensitive ? json("<protected>") : json(value.value);
    }
    json out {{"person_id", id.person_id.str()}, {"full_name", id.full_name}, {"role", to_string(id.role)},
        {"sub_role", to_string(id.sub_role)}, {"department", id.department}, {"status", to_string(id.status)},
        {"pii", pii}};
    if (id.last_event) {
        out["last_event"] = {{"kind", to_string(id.last_event->kind)},
            {"effective_date", format_date(id.last_event->effective_date)}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Options gathered from the command line.

struct Globals {
    bool                       json = false;
    std::string                config;
    std::string                snapshot;
    std::string                audit_log;
    std::string                matrix;
    std::string                clock;
    std::optional<std::uint64_t> seed;
};

struct Args {
    std::string file;
    bool        fix  = false;
    bool        html = false;
    std::string person;
    std::string event;
    std::string reason;
    std::string department;
    std::string sub_role;
    std::string date;
    std::string secret;
    std::string password;
    std::string cert_file;
    std::string app;
    std::uint64_t serial = 0;
    std::string role;
    std::string action;
    std::string session;
    std::string group;
    std::string member;
    std::string argument;
    std::string resource;
    std::string mode;
    std::string channel;
    std::string privilege;
    std::string name;
};

/// A loaded deployment plus how to persist it again.
class Workspace {
public:
    Workspace(CliConfig config, std::unique_ptr<Clock> clock)
        : mConfig(std::move(config))
        , mClock(std::move(clock))
    {
    }

    Status open()
    {
        SystemOptions options;
        if (mConfig.matrix_path) {
            auto text = read_file(*mConfig.matrix_path);
            if (!text) {
                return text.error();
            }
            auto matrix = load_matrix(*text);
            if (!matrix) {
                return matrix.error();
            }
            options.matrix = *matrix;
        }
        options.engine     = mConfig.engine;
        options.policy     = mConfig.policy;
        options.seed       = mConfig.seed;
        options.audit_path = mConfig.audit_log_path;

        auto key = resolve_key();
        if (!key) {
            return key.error();
        }
        mKey = *key;

        try {
            mSystem = std::make_unique<System>(*mClock, std::move(options));
        } catch (const ErrorException& e) {
            return e.error();
        }

        if (std::filesystem::exists(mConfig.snapshot_path)) {
            auto text = read_file(mConfig.snapshot_path);
            if (!text) {
                return text.error();
            }
            if (auto loaded = load_snapshot(*mSystem, *text, mKey); !loaded) {
                return loaded.error();
            }
        }
        return {};
    }

    Status save()
    {
        auto text = serialized();
        if (!text) {
            return text.error();
        }
        return write_file_atomic(mConfig.snapshot_path, *text);
    }

    Result<std::string> serialized() const { return save_snapshot(*mSystem, mKey); }

    System&          system() { return *mSystem; }
    const CliConfig& config() const { return mConfig; }

private:
    Result<std::string> resolve_key() const
    {
        if (mConfig.data_key) {
            return *mConfig.data_key;
        }
        if (auto fromEnv = env(kDataKeyEnv)) {
            return *fromEnv;
        }
        auto keyPath = mConfig.snapshot_path;
        keyPath += ".key";
        if (std::filesystem::exists(keyPath)) {
            auto text = read_file(keyPath);
            if (!text) {
                return text.error();
            }
            std::string key = *text;
            while (!key.empty() && (key.back() == '\n' || key.back() == '\r')) {
                key.pop_back();
            }
            if (key.empty()) {
                return make_error(Errc::InvalidArgument, keyPath.string() + " is empty");
            }
            return key;
        }
        unsigned char raw[kKeyBytes];
        randombytes_buf(raw, sizeof(raw));
        char hex[kKeyBytes * 2 + 1];
        sodium_bin2hex(hex, sizeof(hex), raw, sizeof(raw));
        if (auto written = write_file_atomic(keyPath, std::string {hex} + "\n"); !written) {
            return written.error();
        }
        return std::string {hex};
    }

    CliConfig                mConfig;
    std::unique_ptr<Clock>   mClock;
    std::unique_ptr<System>  mSystem;
    std::string              mKey;
};

Result<Date> date_or_today(const std::string& text, const Clock& clock)
{
    if (text.empty()) {
        return date_of(clock.now());
    }
    auto d = parse_date(text);
    if (!d) {
        return make_error(Errc::InvalidArgument, "bad date " + text + " (want YYYY-MM-DD)");
    }
    return *d;
}

Result<ResourceId> resource_arg(const std::string& text)
{
    auto r = parse_resource(text);
    if (!r) {
        return make_error(Errc::InvalidArgument, "unknown resource " + text);
    }
    return *r;
}

Result<Certificate> presented_certificate(System& system, const Args& a)
{
    if (!a.cert_file.empty()) {
        auto text = read_file(a.cert_file);
        if (!text) {
            return text.error();
        }
        return parse_certificate(*text);
    }
    auto account = system.resources.registry().find_account(PersonId {a.person});
    if (!account) {
        return account.error();
    }
    if (!*account || !(*account)->stored_certificate) {
        return make_error(Errc::InvalidArgument, a.person + " has no enrolled certificate; pass --cert");
    }
    return *(*account)->stored_certificate;
}

// ---------------------------------------------------------------------------
// Commands

Reply cmd_feed_apply(Workspace& ws, const Args& a)
{
    auto text = read_file(a.file);
    if (!text) {
        return failure(text.error());
    }
    auto records = parse_feed(*text);
    if (!records) {
        return failure(records.error());
    }
    auto& engine  = ws.system().engine;
    auto  applied = engine.apply_feed(*records);
    if (!applied) {
        return failure(applied.error());
    }
    auto deleted = engine.run_due_deletions();
    if (!deleted) {
        return failure(deleted.error());
    }
    auto drained = engine.drain_retries();
    if (!drained) {
        return failure(drained.error());
    }

    const auto pending = engine.retry_queue().size();
    const auto manual  = engine.manual_intervention().size();

    Reply r;
    r.doc = {{"ok", true}, {"records", records->size()}, {"created", applied->created},
        {"updated", applied->updated}, {"unchanged", applied->unchanged}, {"deleted", *deleted},
        {"retried", *drained}, {"pending_retries", pending}, {"manual_intervention", manual},
        {"failures", json::array()}};
    r.text = std::to_string(records->size()) + " records: " + std::to_string(applied->created) + " created, "
        + std::to_string(applied->updated) + " updated, " + std::to_string(applied->unchanged) + " unchanged";
    if (pending + manual > 0) {
        r.text += "; " + std::to_string(pending) + " pending retries, " + std::to_string(manual) + " need attention";
        r.code = kExitPartial;
    }
    for (const auto& [person, error] : applied->failures) {
        r.doc["failures"].push_back({{"person_id", person.str()}, {"error", error.describe()}});
        r.text += "\n  " + person.str() + ": " + error.describe();
        r.code = std::max(r.code, exit_code_for(error.code));
    }
    return r;
}

Reply cmd_reconcile(Workspace& ws, const Args& a)
{
    auto& engine = ws.system().engine;
    Reply r;
    if (a.fix) {
        if (auto drained = engine.drain_until_quiet(); !drained) {
            return failure(drained.error());
        }
    }
    auto report = engine.reconcile();
    if (!report) {
        return failure(report.error());
    }
    DriftReport found = *report;
    r.doc["drift"]    = drift_json(found);
    if (a.fix && !found.empty()) {
        auto corrected = engine.apply_corrections(found);
        if (!corrected) {
            return failure(corrected.error());
        }
        r.doc["corrections"] = workflow_json(*corrected);
        auto after           = engine.reconcile();
        if (!after) {
            return failure(after.error());
        }
        found              = *after;
        r.doc["remaining"] = drift_json(found);
    }
    const auto pending = engine.retry_queue().size();
    r.doc["ok"]              = true;
    r.doc["pending_retries"] = pending;
    r.text = (a.fix ? "after corrections: " : "") + drift_text(found);
    if (!found.empty() || found.partial() || pending > 0) {
        r.code = kExitPartial;
    }
    return r;
}

Reply cmd_identity_show(Workspace& ws, const Args& a)
{
    auto& system = ws.system();
    auto  found  = system.store.find(PersonId {a.person});
    if (!found) {
        return failure(found.error());
    }
    if (!*found) {
        return failure(make_error(Errc::UnknownIdentity, a.person));
    }
    const Identity& id = **found;

    Reply r;
    r.doc       = identity_json(id);
    r.doc["ok"] = true;
    auto desired = desired_state(id, system.engine.matrix(), date_of(system.clock.now()),
        system.engine.config().deletion_grace_days);
    json accounts = json::object();
    r.text        = id.person_id.str() + " " + id.full_name + " " + std::string {to_string(id.role)} + "/"
        + std::string {to_string(id.sub_role)} + " " + std::string {to_string(id.status)};
    for (auto res : kAllResources) {
        auto        account = system.resources.at(res).find_account(id.person_id);
        std::string state   = !account ? "unreachable" : !*account ? "absent" : std::string {to_string((*account)->state)};
        accounts[std::string {to_string(res)}] = {{"desired", to_string(desired.at(res))}, {"actual", state}};
        r.text += "\n  " + std::string {to_string(res)} + ": " + state + " (desired "
            + std::string {to_string(desired.at(res))} + ")";
    }
    r.doc["accounts"] = accounts;
    for (const auto& [name, value] : id.pii) {
        r.text += "\n  " + name + " = " + (value.sensitive ? std::string {"<protected>"} : value.value);
    }
    return r;
}

Reply cmd_event_apply(Workspace& ws, const Args& a)
{
    auto kind = parse_event_kind(a.event);
    if (!kind) {
        return failure(make_error(Errc::InvalidArgument, "unknown event " + a.event));
    }
    auto date = date_or_today(a.date, ws.system().clock);
    if (!date) {
        return failure(date.error());
    }
    LifecycleEvent event = LifecycleEvent::simple(*kind, *date);
    if (!a.reason.empty()) {
        auto reason = parse_withdrawal_reason(a.reason);
        if (!reason) {
            return failure(make_error(Errc::InvalidArgument, "unknown withdrawal reason " + a.reason));
        }
        event.reason = reason;
    }
    event.department = a.department;
    if (!a.sub_role.empty()) {
        auto sub = parse_sub_role(a.sub_role);
        if (!sub) {
            return failure(make_error(Errc::InvalidArgument, "unknown sub-role " + a.sub_role));
        }
        event.sub_role = sub;
    }
    auto done = ws.system().engine.apply_lifecycle_event(PersonId {a.person}, event);
    if (!done) {
        return failure(done.error());
    }
    Reply r;
    r.doc       = workflow_json(*done);
    r.doc["ok"] = true;
    r.text      = workflow_text(*done);
    if (done->partial) {
        r.code = kExitPartial;
    }
    return r;
}

Reply cmd_enroll(Workspace& ws, const Args& a)
{
    auto& system = ws.system();
    Date  today  = date_of(system.clock.now());
    Date  until  = today + std::chrono::years {kCertYears};
    if (!until.ok()) {
        until = std::chrono::year_month_day_last {until.year(), std::chrono::month_day_last {until.month()}};
    }
    auto enrolled = enroll_credentials(system.responder, system.resources.registry(), system.audit,
        PersonId {a.person}, std::string {kDefaultIssuer}, a.secret, a.password, today, until);
    if (!enrolled) {
        return failure(enrolled.error());
    }
    Reply r;
    r.doc  = {{"ok", true}, {"certificate", json::parse(canonical_bytes(enrolled->certificate))}};
    r.text = canonical_bytes(enrolled->certificate);
    return r;
}

Reply cmd_auth(Workspace& ws, const std::string& flow, const Args& a)
{
    auto& system = ws.system();
    auto& auth   = system.authenticator;
    if (flow == "password") {
        return auth_reply(auth.authenticate_password(PersonId {a.person}, a.password));
    }
    auto cert = presented_certificate(system, a);
    if (!cert) {
        return failure(cert.error());
    }
    if (flow == "prod") {
        return auth_reply(auth.authenticate_production(*cert, a.secret));
    }
    if (flow == "nonprod") {
        return auth_reply(auth.authenticate_nonproduction(*cert, a.secret));
    }
    FactorSet required = auth.policy().required_factors;
    if (!a.app.empty()) {
        auto app = resource_arg(a.app);
        if (!app) {
            return failure(app.error());
        }
        required = required_factors_for(*app);
    }
    std::vector<AuthResult> results;
    if (required.contains(AuthFactor::Certificate)) {
        results.push_back(auth.authenticate_production(*cert, a.secret));
    }
    if (required.contains(AuthFactor::Password)) {
        results.push_back(auth.authenticate_password(PersonId {a.person}, a.password));
    }
    return auth_reply(auth.mfa_authenticate(results, required));
}

Reply cmd_revoke(Workspace& ws, const Args& a)
{
    auto reason = RevocationReason::Unspecified;
    if (!a.reason.empty()) {
        auto parsed = parse_revocation_reason(a.reason);
        if (!parsed) {
            return failure(make_error(Errc::InvalidArgument, "unknown revocation reason " + a.reason));
        }
        reason = *parsed;
    }
    auto& system = ws.system();
    auto  list   = system.responder.publish_revocation(a.serial, reason, system.clock.now());
    if (!list) {
        return failure(list.error());
    }
    Reply r;
    r.doc  = {{"ok", true}, {"serial", a.serial}, {"issuer", (*list)->issuer}, {"version", (*list)->version},
        {"reason", to_string(reason)}};
    r.text = "serial " + std::to_string(a.serial) + " revoked (" + (*list)->issuer + " list version "
        + std::to_string((*list)->version) + ")";
    return r;
}

Reply cmd_admin_check(const Args& a)
{
    auto role = parse_admin_role(a.role);
    if (!role) {
        return failure(make_error(Errc::InvalidArgument, "unknown admin role " + a.role));
    }
    auto kind = parse_admin_action(a.action);
    if (!kind) {
        return failure(make_error(Errc::InvalidArgument, "unknown admin action " + a.action));
    }
    AdminAction action {*kind, role->application.value_or(ResourceId::LearningPlatform), {}, std::nullopt, {}};
    if (!a.app.empty()) {
        auto app = resource_arg(a.app);
        if (!app) {
            return failure(app.error());
        }
        action.application = *app;
    }
    auto decision = is_permitted(*role, action);
    Reply r;
    r.doc  = {{"ok", true}, {"permitted", decision.permitted}, {"rule", decision.rule}, {"role", to_string(*role)},
        {"action", to_string(*kind)}, {"application", to_string(action.application)}};
    r.text = std::string {decision.permitted ? "permitted" : "denied"} + ": " + decision.rule;
    r.code = decision.permitted ? kExitOk : kExitPartial;
    return r;
}

Reply cmd_admin_do(Workspace& ws, const Args& a)
{
    auto role = parse_admin_role(a.role);
    if (!role) {
        return failure(make_error(Errc::InvalidArgument, "unknown admin role " + a.role));
    }
    auto kind = parse_admin_action(a.action);
    if (!kind) {
        return failure(make_error(Errc::InvalidArgument, "unknown admin action " + a.action));
    }
    auto app = resource_arg(a.app);
    if (!app) {
        return failure(app.error());
    }
    AdminAction action {*kind, *app, a.group, std::nullopt, a.argument};
    if (!a.member.empty()) {
        action.member = PersonId {a.member};
    }
    auto& system = ws.system();
    auto  done   = system.admin.perform(system.sessions, a.session, *role, action, system.resources.at(*app),
        system.audit, system.clock);
    if (!done) {
        return failure(done.error());
    }
    Reply r;
    json  members = json::array();
    for (const auto& m : done->members) {
        members.push_back(m.str());
        r.text += (r.text.empty() ? "" : "\n") + m.str();
    }
    r.doc = {{"ok", true}, {"action", to_string(*kind)}, {"members", members}};
    if (r.text.empty()) {
        r.text = std::string {to_string(*kind)} + " done";
    }
    return r;
}

Reply cmd_admin_grant(Workspace& ws, const Args& a)
{
    auto role = parse_admin_role(a.role);
    if (!role) {
        return failure(make_error(Errc::InvalidArgument, "unknown admin role " + a.role));
    }
    auto& system = ws.system();
    if (auto granted = system.admin.grant(PersonId {a.person}, *role, system.audit); !granted) {
        return failure(granted.error());
    }
    Reply r;
    r.doc  = {{"ok", true}, {"person_id", a.person}, {"role", to_string(*role)}};
    r.text = a.person + " now holds " + to_string(*role);
    return r;
}

Reply cmd_fault(Workspace& ws, const Args& a)
{
    auto res = resource_arg(a.resource);
    if (!res) {
        return failure(res.error());
    }
    auto mode = parse_fault_mode(a.mode);
    if (!mode) {
        return failure(make_error(Errc::InvalidArgument, "bad fault mode " + a.mode));
    }
    auto& endpoint   = ws.system().resources.at(*res);
    auto  connection = endpoint.connection();
    if (!a.channel.empty()) {
        connection.channel_secure = a.channel == "secure";
    }
    if (!a.privilege.empty()) {
        connection.privileged = a.privilege == "on";
    }
    endpoint.inject_fault(*mode);
    endpoint.set_connection(connection);

    Reply r;
    r.doc  = {{"ok", true}, {"resource", to_string(*res)}, {"mode", to_string(*mode)},
        {"channel_secure", connection.channel_secure}, {"privileged", connection.privileged}};
    r.text = std::string {to_string(*res)} + ": " + to_string(*mode);
    return r;
}

Reply cmd_report(Workspace& ws, const Args& a)
{
    auto text = ws.serialized();
    if (!text) {
        return failure(text.error());
    }
    auto  report = report_compliance(ws.system(), *text);
    Reply r;
    json  findings = json::array();
    for (const auto& f : report.findings) {
        findings.push_back({{"rule_id", f.rule_id}, {"subject", f.subject}, {"description", f.description},
            {"severity", to_string(f.severity)}, {"evidence", f.evidence}});
    }
    json unreachable = json::array();
    for (auto res : report.unreachable) {
        unreachable.push_back(to_string(res));
    }
    r.doc = {{"ok", true}, {"findings", findings}, {"unreachable", unreachable}, {"partial", report.partial()}};
    if (a.html) {
        r.text = render_report_html(report);
        if (!r.text.empty() && r.text.back() == '\n') {
            r.text.pop_back();
        }
    } else {
        r.text = std::to_string(report.findings.size()) + " findings";
        for (const auto& f : report.findings) {
            r.text += "\n  [" + f.rule_id + "] " + f.subject + ": " + f.description;
        }
    }
    if (!report.findings.empty() || report.partial()) {
        r.code = kExitPartial;
    }
    return r;
}

Reply cmd_scenario(const CliConfig& config, const Globals& g, const Args& a)
{
    Timestamp start = start_of(Date {std::chrono::year {2026}, std::chrono::January, std::chrono::day {1}});
    if (!g.clock.empty()) {
        auto parsed = parse_timestamp(g.clock);
        if (!parsed) {
            return failure(make_error(Errc::InvalidArgument, "bad --clock " + g.clock));
        }
        start = *parsed;
    }
    ManualClock   clock {start};
    SystemOptions options;
    options.engine = config.engine;
    options.policy = config.policy;
    options.seed   = config.seed;
    System system {clock, options};

    auto result = run_scenario(system, a.name);
    if (!result) {
        return failure(result.error());
    }
    Reply r;
    json  accounts = json::object();
    for (const auto& [res, state] : result->accounts) {
        accounts[std::string {to_string(res)}] = state ? json(to_string(*state)) : json("absent");
    }
    r.doc  = {{"ok", result->expectations_met}, {"scenario", result->name}, {"trace", result->trace},
        {"identity", identity_json(result->final_identity)}, {"accounts", accounts},
        {"drift", drift_json(result->drift)}, {"expectation", result->expectation},
        {"expectations_met", result->expectations_met}};
    for (const auto& line : result->trace) {
        r.text += line + "\n";
    }
    r.text += std::string {result->expectations_met ? "ok: " : "FAILED: "} + result->expectation;
    r.code = result->expectations_met ? kExitOk : kExitViolation;
    return r;
}

Reply cmd_retry(Workspace& ws, bool drain)
{
    auto& engine = ws.system().engine;
    Reply r;
    if (drain) {
        auto drained = engine.drain_retries();
        if (!drained) {
            return failure(drained.error());
        }
        r.doc["completed"] = *drained;
        r.text             = std::to_string(*drained) + " completed";
    }
    json pending = json::array();
    json manual  = json::array();
    auto queue   = engine.retry_queue();
    for (const auto& act : queue) {
        pending.push_back(action_json(act));
    }
    for (const auto& act : engine.manual_intervention()) {
        manual.push_back(action_json(act));
    }
    r.doc["ok"]                  = true;
    r.doc["pending"]             = pending;
    r.doc["manual_intervention"] = manual;
    std::string summary = std::to_string(pending.size()) + " pending, " + std::to_string(manual.size())
        + " need manual intervention";
    r.text = r.text.empty() ? summary : r.text + "; " + summary;
    for (const auto& act : queue) {
        r.text += "\n  " + std::string {to_string(act.resource)} + " " + std::string {to_string(act.verb)} + " "
            + act.person_id.str() + " attempt " + std::to_string(act.attempt) + ": " + act.cause;
    }
    if (!pending.empty() || !manual.empty()) {
        r.code = kExitPartial;
    }
    return r;
}

int emit(const Reply& r, bool asJson, std::ostream& out, std::ostream& err)
{
    if (asJson) {
        json doc = r.doc;
        if (!doc.contains("ok")) {
            doc["ok"] = r.code == kExitOk;
        }
        doc["exit_code"] = r.code;
        out << doc.dump() << "\n";
        if (r.doc.contains("error")) {
            err << "error: " << r.text << "\n";
        }
        return r.code;
    }
    if (r.doc.contains("error")) {
        err << "error: " << r.text << "\n";
    } else if (!r.text.empty()) {
        out << r.text << "\n";
    }
    return r.code;
}

Result<CliConfig> resolve_config(const Globals& g)
{
    CliConfig  config;
    std::string path = g.config;
    if (path.empty()) {
        path = env(kConfigEnv).value_or("");
    }
    if (!path.empty()) {
        auto text = read_file(path);
        if (!text) {
            return text.error();
        }
        auto parsed = parse_config(*text, config);
        if (!parsed) {
            return parsed.error();
        }
        config = *parsed;
    }
    if (!g.snapshot.empty()) {
        config.snapshot_path = g.snapshot;
    }
    if (!g.audit_log.empty()) {
        config.audit_log_path = g.audit_log;
    }
    if (!g.matrix.empty()) {
        config.matrix_path = g.matrix;
    }
    if (g.seed) {
        config.seed = *g.seed;
    }
    if (auto valid = config.validate(); !valid) {
        return valid.error();
    }
    return config;
}

} // namespace

int exit_code_for(Errc code) noexcept
{
    switch (code) {
    case Errc::MalformedLine:
    case Errc::DuplicateInBatch:
    case Errc::UnknownRole:
    case Errc::UnknownResource:
    case Errc::DuplicateRow:
    case Errc::UnknownAttribute:
    case Errc::InvalidArgument:
    case Errc::ParseError:
        return kExitUsage;
    case Errc::ResourceDown:
    case Errc::InsecureChannel:
    case Errc::PrivilegeRequired:
    case Errc::ResourceUnavailable:
    case Errc::AuthenticationFailure:
    case Errc::PermissionDenied:
    case Errc::EngineBusy:
        return kExitPartial;
    case Errc::UndefinedTransition:
    case Errc::InvalidEvent:
    case Errc::DuplicateIdentity:
    case Errc::StoreUnavailable:
    case Errc::UnknownIdentity:
    case Errc::NotTerminated:
    case Errc::AttributeConflict:
    case Errc::AccountNotFound:
    case Errc::UnknownSerial:
    case Errc::UnknownGroup:
    case Errc::MemberLacksAccount:
    case Errc::LogUnavailable:
    case Errc::IoError:
        return kExitViolation;
    }
    return kExitViolation;
}

Status CliConfig::validate() const
{
    if (snapshot_path.empty() || audit_log_path.empty()) {
        return make_error(Errc::InvalidArgument, "snapshot and audit log paths are required");
    }
    std::vector<std::string> paths {config_path_text(snapshot_path), config_path_text(audit_log_path)};
    if (matrix_path) {
        paths.push_back(config_path_text(*matrix_path));
    }
    std::sort(paths.begin(), paths.end());
    if (std::adjacent_find(paths.begin(), paths.end()) != paths.end()) {
        return make_error(Errc::InvalidArgument, "snapshot, audit log and matrix paths must be distinct");
    }
    if (data_key && data_key->empty()) {
        return make_error(Errc::InvalidArgument, "data_key must not be empty");
    }
    if (auto p = policy.validate(); !p) {
        return p;
    }
    return engine.validate();
}

Result<CliConfig> parse_config(std::string_view text, CliConfig base)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        return make_error(Errc::ParseError, std::string {"config: "} + e.what());
    }
    if (!doc.is_object()) {
        return make_error(Errc::ParseError, "config must be a JSON object");
    }

    CliConfig config = std::move(base);
    for (const auto& [key, value] : doc.items()) {
        auto asString = [&]() -> Result<std::string> {
            if (!value.is_string() || value.get<std::string>().empty()) {
                return make_error(Errc::InvalidArgument, key + " must be a non-empty string");
            }
            return value.get<std::string>();
        };
        if (key == "snapshot_path" || key == "audit_log_path" || key == "matrix_path" || key == "data_key") {
            auto s = asString();
            if (!s) {
                return s.error();
            }
            if (key == "snapshot_path") {
                config.snapshot_path = *s;
            } else if (key == "audit_log_path") {
                config.audit_log_path = *s;
            } else if (key == "matrix_path") {
                config.matrix_path = *s;
            } else {
                config.data_key = *s;
            }
        } else if (key == "max_failed_attempts") {
            auto n = number_field<unsigned>(doc, key);
            if (!n) {
                return n.error();
            }
            config.policy.max_failed_attempts = *n;
        } else if (key == "lockout_duration_seconds") {
            auto n = number_field<long long>(doc, key);
            if (!n) {
                return n.error();
            }
            config.policy.lockout_duration = std::chrono::seconds {*n};
        } else if (key == "session_ttl_seconds") {
            auto n = number_field<long long>(doc, key);
            if (!n) {
                return n.error();
            }
            config.policy.session_ttl = std::chrono::seconds {*n};
        } else if (key == "max_attempts") {
            auto n = number_field<unsigned>(doc, key);
            if (!n) {
                return n.error();
            }
            config.engine.max_attempts = *n;
        } else if (key == "deletion_grace_days") {
            auto n = number_field<unsigned>(doc, key);
            if (!n) {
                return n.error();
            }
            config.engine.deletion_grace_days = *n;
        } else if (key == "seed") {
            if (!value.is_number_unsigned()) {
                return make_error(Errc::InvalidArgument, "seed must be a non-negative integer");
            }
            config.seed = value.get<std::uint64_t>();
        } else {
            return make_error(Errc::InvalidArgument, "unknown config key " + key);
        }
    }
    if (auto valid = config.validate(); !valid) {
        return valid.error();
    }
    return config;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    ensure_crypto_ready();

    CLI::App app {"Identity lifecycle provisioning engine", "idfabric"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    Globals g;
    Args    a;
    app.add_flag("--json", g.json, "Emit one JSON object");
    app.add_option("--config", g.config, "Config file (default: $IDFABRIC_CONFIG)");
    app.add_option("--snapshot", g.snapshot, "State snapshot path");
    app.add_option("--audit-log", g.audit_log, "Audit log path");
    app.add_option("--matrix", g.matrix, "Provisioning matrix JSON");
    app.add_option("--clock", g.clock, "Fix the clock at YYYY-MM-DDTHH:MM:SSZ");
    app.add_option("--seed", g.seed, "Seed for session identifiers");

    auto* feed      = app.add_subcommand("feed", "Authoritative feed")->require_subcommand(1);
    auto* feedApply = feed->add_subcommand("apply", "Parse, diff and apply a feed file, then drain retries once");
    feedApply->add_option("file", a.file, "JSON-lines feed")->required();

    auto* reconcile = app.add_subcommand("reconcile", "Compare desired and actual state");
    reconcile->add_flag("--fix", a.fix, "Drain retries, then correct all drift");

    auto* identity     = app.add_subcommand("identity", "Identity store")->require_subcommand(1);
    auto* identityShow = identity->add_subcommand("show", "Print one identity with sensitive PII masked");
    identityShow->add_option("person_id", a.person)->required();

    auto* event      = app.add_subcommand("event", "Lifecycle events")->require_subcommand(1);
    auto* eventApply = event->add_subcommand("apply", "Apply one lifecycle event");
    eventApply->add_option("person_id", a.person)->required();
    eventApply->add_option("event", a.event)->required();
    eventApply->add_option("--reason", a.reason, "Withdrawal reason");
    eventApply->add_option("--department", a.department, "Transfer target department");
    eventApply->add_option("--sub-role", a.sub_role, "Hire sub-role");
    eventApply->add_option("--date", a.date, "Effective date (default: today)");

    auto* authn  = app.add_subcommand("authn", "Authentication")->require_subcommand(1);
    auto* enroll = authn->add_subcommand("enroll", "Issue a certificate and set a password");
    enroll->add_option("person_id", a.person)->required();
    enroll->add_option("--secret", a.secret, "Certificate holder secret")->required();
    enroll->add_option("--password", a.password)->required();
    auto* authTest = authn->add_subcommand("test", "Run an authentication flow")->require_subcommand(1);
    std::string flow;
    for (const char* name : {"prod", "nonprod", "password", "mfa"}) {
        auto* sub = authTest->add_subcommand(name, std::string {name} + " flow");
        sub->add_option("person_id", a.person)->required();
        if (std::string_view {name} != "password") {
            sub->add_option("--secret", a.secret, "Possession proof");
            sub->add_option("--cert", a.cert_file, "Presented certificate (default: the enrolled one)");
        }
        if (std::string_view {name} == "password" || std::string_view {name} == "mfa") {
            sub->add_option("--password", a.password);
        }
        if (std::string_view {name} == "mfa") {
            sub->add_option("--app", a.app, "Target application; sets the required factors");
        }
        sub->callback([&flow, name] { flow = name; });
    }

    auto* revoke = app.add_subcommand("revoke", "Publish a certificate revocation");
    revoke->add_option("serial", a.serial)->required();
    revoke->add_option("--reason", a.reason);

    auto* admin      = app.add_subcommand("admin", "Delegated administration")->require_subcommand(1);
    auto* adminCheck = admin->add_subcommand("check", "Consult the permission table");
    adminCheck->add_option("role", a.role)->required();
    adminCheck->add_option("action", a.action)->required();
    adminCheck->add_option("app", a.app);
    auto* adminDo = admin->add_subcommand("do", "Perform an administrative action");
    adminDo->add_option("action", a.action)->required();
    adminDo->add_option("--session", a.session)->required();
    adminDo->add_option("--role", a.role)->required();
    adminDo->add_option("--app", a.app)->required();
    adminDo->add_option("--group", a.group)->required();
    adminDo->add_option("--member", a.member);
    adminDo->add_option("--arg", a.argument, "Access level, sub-group or assignee");
    auto* adminGrant = admin->add_subcommand("grant", "Make a person an administrator");
    adminGrant->add_option("person_id", a.person)->required();
    adminGrant->add_option("role", a.role)->required();

    auto* fault = app.add_subcommand("fault", "Inject a resource fault");
    fault->add_option("resource", a.resource)->required();
    fault->add_option("mode", a.mode, "healthy, down or intermittent:<n>")->required();
    fault->add_option("--channel", a.channel)->check(CLI::IsMember({"secure", "insecure"}));
    fault->add_option("--privilege", a.privilege)->check(CLI::IsMember({"on", "off"}));

    auto* report           = app.add_subcommand("report", "Reports")->require_subcommand(1);
    auto* reportCompliance = report->add_subcommand("compliance", "Compliance findings");
    reportCompliance->add_flag("--html", a.html, "Render as an HTML table");

    auto* scenario    = app.add_subcommand("scenario", "Named end-to-end traces")->require_subcommand(1);
    auto* scenarioRun = scenario->add_subcommand("run", "Run a trace on a fresh in-memory deployment");
    scenarioRun->add_option("name", a.name)->required()->check(CLI::IsMember(scenario_names()));

    auto* retry      = app.add_subcommand("retry", "Retry queue")->require_subcommand(1);
    auto* retryDrain = retry->add_subcommand("drain", "One pass over the retry queue");
    auto* retryList  = retry->add_subcommand("list", "Show pending and manual-intervention actions");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    auto config = resolve_config(g);
    if (!config) {
        return emit(failure(config.error()), g.json, out, err);
    }

    // Commands that need no persisted state.
    if (adminCheck->parsed()) {
        return emit(cmd_admin_check(a), g.json, out, err);
    }
    if (scenarioRun->parsed()) {
        return emit(cmd_scenario(*config, g, a), g.json, out, err);
    }

    std::unique_ptr<Clock> clock;
    if (g.clock.empty()) {
        clock = std::make_unique<SystemClock>();
    } else {
        auto start = parse_timestamp(g.clock);
        if (!start) {
            return emit(failure(make_error(Errc::InvalidArgument, "bad --clock " + g.clock)), g.json, out, err);
        }
        clock = std::make_unique<ManualClock>(*start);
    }

    Workspace ws {*config, std::move(clock)};
    if (auto opened = ws.open(); !opened) {
        return emit(failure(opened.error()), g.json, out, err);
    }

    Reply reply;
    bool  mutates = true;
    if (feedApply->parsed()) {
        reply = cmd_feed_apply(ws, a);
    } else if (reconcile->parsed()) {
        reply = cmd_reconcile(ws, a);
    } else if (identityShow->parsed()) {
        reply   = cmd_identity_show(ws, a);
        mutates = false;
    } else if (eventApply->parsed()) {
        reply = cmd_event_apply(ws, a);
    } else if (enroll->parsed()) {
        reply = cmd_enroll(ws, a);
    } else if (authTest->parsed()) {
        reply = cmd_auth(ws, flow, a);
    } else if (revoke->parsed()) {
        reply = cmd_revoke(ws, a);
    } else if (adminDo->parsed()) {
        reply = cmd_admin_do(ws, a);
    } else if (adminGrant->parsed()) {
        reply = cmd_admin_grant(ws, a);
    } else if (fault->parsed()) {
        reply = cmd_fault(ws, a);
    } else if (reportCompliance->parsed()) {
        reply   = cmd_report(ws, a);
        mutates = false;
    } else if (retryDrain->parsed()) {
        reply = cmd_retry(ws, true);
    } else if (retryList->parsed()) {
        reply   = cmd_retry(ws, false);
        mutates = false;
    }

    // Partial work and denials still change state (queues, lockouts, audit).
    if (mutates) {
        if (auto saved = ws.save(); !saved) {
            return emit(failure(saved.error()), g.json, out, err);
        }
    }
    return emit(reply, g.json, out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, out, err);
}

} // namespace idfabric
