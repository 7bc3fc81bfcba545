/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/guard/protect.hpp>
#include <idfabric/snapshot.hpp>

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace idfabric {

using json = nlohmann::json;

namespace {

// Thrown inside the loader and turned into a ParseError at the boundary.
struct BadField : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
T require(std::optional<T> value, std::string_view what)
{
    if (!value) {
        throw BadField("bad " + std::string {what});
    }
    return *value;
}

json epoch(Timestamp ts)
{
    return format_timestamp(ts);
}

Timestamp timestamp_from(const json& j)
{
    return require(parse_timestamp(j.get<std::string>()), "timestamp");
}

Date date_from(const json& j)
{
    return require(parse_date(j.get<std::string>()), "date");
}

// -- certificates ----------------------------------------------------------

json to_json(const Certificate& c)
{
    return json {{"serial", c.serial}, {"subject_uid", c.subject_uid}, {"subject_email", c.subject_email},
        {"issuer", c.issuer}, {"not_before", format_date(c.not_before)}, {"not_after", format_date(c.not_after)},
        {"key_token", c.key_token}};
}

Certificate certificate_from(const json& j)
{
    return Certificate {j.at("serial").get<std::uint64_t>(), j.at("subject_uid").get<std::string>(),
        j.at("subject_email").get<std::string>(), j.at("issuer").get<std::string>(), date_from(j.at("not_before")),
        date_from(j.at("not_after")), j.at("key_token").get<std::string>()};
}

// -- identities ------------------------------------------------------------

Result<json> identity_to_json(const Identity& id, std::string_view key)
{
    json pii = json::object();
    for (const auto& [name, value] : id.pii) {
        if (value.sensitive) {
            auto sealed = protect_field(id.person_id.str() + "/" + name, value.value, key);
            if (!sealed) {
                return sealed.error();
            }
            pii[name] = json {{"sensitive", true},
                {"protected", {{"name", sealed->name}, {"ciphertext", sealed->ciphertext}, {"scheme", sealed->scheme}}}};
        } else {
            pii[name] = json {{"sensitive", false}, {"value", value.value}};
        }
    }
    json last = nullptr;
    if (id.last_event) {
        last = json {{"kind", to_string(id.last_event->kind)}, {"effective_date", format_date(id.last_event->effective_date)}};
    }
    return json {{"person_id", id.person_id.str()}, {"full_name", id.full_name}, {"role", to_string(id.role)},
        {"sub_role", to_string(id.sub_role)}, {"department", id.department}, {"status", to_string(id.status)},
        {"last_event", last}, {"pii", pii}};
}

Identity identity_from(const json& j, std::string_view key)
{
    Identity id;
    id.person_id  = PersonId {j.at("person_id").get<std::string>()};
    id.full_name  = j.at("full_name").get<std::string>();
    id.role       = require(parse_role(j.at("role").get<std::string>()), "role");
    id.sub_role   = require(parse_sub_role(j.at("sub_role").get<std::string>()), "sub_role");
    id.department = j.at("department").get<std::string>();
    id.status     = require(parse_status(j.at("status").get<std::string>()), "status");
    if (const auto& last = j.at("last_event"); !last.is_null()) {
        id.last_event = AppliedEvent {require(parse_event_kind(last.at("kind").get<std::string>()), "event kind"),
            date_from(last.at("effective_date"))};
    }
    for (const auto& [name, value] : j.at("pii").items()) {
        if (value.at("sensitive").get<bool>()) {
            const auto&    p = value.at("protected");
            ProtectedField field {p.at("name").get<std::string>(), p.at("ciphertext").get<std::string>(),
                p.at("scheme").get<std::string>()};
            auto plain = unprotect_field(field, key);
            if (!plain) {
                throw BadField("cannot decrypt " + field.name + ": " + plain.error().message);
            }
            id.pii[name] = PiiValue {*plain, true};
        } else {
            id.pii[name] = PiiValue {value.at("value").get<std::string>(), false};
        }
    }
    return id;
}

// -- resources -------------------------------------------------------------

json account_to_json(const Account& a)
{
    json out {{"person_id", a.person_id.str()}, {"state", to_string(a.state)}, {"attributes", a.attributes}};
    if (a.stored_certificate) {
        out["stored_certificate"] = to_json(*a.stored_certificate);
    }
    if (!a.password_hash.empty()) {
        out["password_hash"] = a.password_hash;
    }
    return out;
}

Account account_from(const json& j, ResourceId resource)
{
    Account a;
    a.person_id  = PersonId {j.at("person_id").get<std::string>()};
    a.resource   = resource;
    a.state      = require(parse_account_state(j.at("state").get<std::string>()), "account state");
    a.attributes = j.at("attributes").get<Attributes>();
    if (j.contains("stored_certificate")) {
        a.stored_certificate = certificate_from(j.at("stored_certificate"));
    }
    a.password_hash = j.value("password_hash", std::string {});
    return a;
}

// -- engine ----------------------------------------------------------------

json action_to_json(const ResourceAction& a)
{
    return json {{"resource", to_string(a.resource)}, {"verb", to_string(a.verb)}, {"person_id", a.person_id.str()},
        {"attributes", a.attributes}, {"attempt", a.attempt}, {"status", to_string(a.status)}, {"cause", a.cause}};
}

ResourceAction action_from(const json& j)
{
    ResourceAction a;
    a.resource   = require(parse_resource(j.at("resource").get<std::string>()), "resource");
    a.verb       = require(parse_verb(j.at("verb").get<std::string>()), "verb");
    a.person_id  = PersonId {j.at("person_id").get<std::string>()};
    a.attributes = j.at("attributes").get<Attributes>();
    a.attempt    = j.at("attempt").get<unsigned>();
    a.status     = require(parse_action_status(j.at("status").get<std::string>()), "action status");
    a.cause      = j.at("cause").get<std::string>();
    return a;
}

// -- sessions --------------------------------------------------------------

json factors_to_json(const FactorSet& factors)
{
    json out = json::array();
    for (auto f : factors) {
        out.push_back(to_string(f));
    }
    return out;
}

FactorSet factors_from(const json& j)
{
    FactorSet out;
    for (const auto& f : j) {
        out.insert(require(parse_auth_factor(f.get<std::string>()), "factor"));
    }
    return out;
}

// Everything decoded, ready to install.
struct Decoded {
    std::vector<Identity>                                   identities;
    struct Endpoint {
        FaultMode            fault;
        std::uint64_t        fault_calls = 0;
        ConnectionSecurity   connection;
        std::vector<Account> accounts;
    };
    std::map<ResourceId, Endpoint>                  endpoints;
    GroupTable                                      groups;
    std::vector<Session>                            sessions;
    std::uint64_t                                   session_counter = 0;
    std::map<PersonId, LockState>                   lockouts;
    std::vector<ResourceAction>                     pending;
    std::vector<ResourceAction>                     manual;
    std::map<std::string, StatusResponder::IssuerState> issuers;
    std::uint64_t                                   next_serial = 1;
};

Decoded decode(const json& doc, std::string_view key)
{
    Decoded d;

    for (const auto& j : doc.at("identities")) {
        d.identities.push_back(identity_from(j, key));
    }

    for (const auto& [name, j] : doc.at("resources").items()) {
        auto           id = require(parse_resource(name), "resource");
        Decoded::Endpoint e;
        e.fault       = require(parse_fault_mode(j.at("fault").get<std::string>()), "fault mode");
        e.fault_calls = j.at("fault_calls").get<std::uint64_t>();
        e.connection  = ConnectionSecurity {
            j.at("connection").at("privileged").get<bool>(), j.at("connection").at("channel_secure").get<bool>()};
        for (const auto& a : j.at("accounts")) {
            e.accounts.push_back(account_from(a, id));
        }
        d.endpoints[id] = std::move(e);
    }

    const auto& groups = doc.at("groups");
    for (const auto& g : groups.at("groups")) {
        GroupKey key {require(parse_resource(g.at("application").get<std::string>()), "application"),
            g.at("name").get<std::string>()};
        Group group;
        for (const auto& m : g.at("members")) {
            group.members.insert(PersonId {m.get<std::string>()});
        }
        group.sub_groups = g.at("sub_groups").get<std::set<std::string>>();
        for (const auto& [member, level] : g.at("access_levels").items()) {
            group.access_levels[PersonId {member}] = level.get<std::string>();
        }
        d.groups.groups[key] = std::move(group);
    }
    for (const auto& [person, roles] : groups.at("role_holders").items()) {
        for (const auto& r : roles) {
            d.groups.role_holders[PersonId {person}].insert(
                require(parse_admin_role(r.get<std::string>()), "admin role"));
        }
    }

    const auto& sessions = doc.at("sessions");
    d.session_counter    = sessions.at("counter").get<std::uint64_t>();
    for (const auto& s : sessions.at("active")) {
        d.sessions.push_back(Session {s.at("session_id").get<std::string>(),
            PersonId {s.at("person_id").get<std::string>()}, timestamp_from(s.at("issued_at")),
            timestamp_from(s.at("expires_at")), factors_from(s.at("factors"))});
    }
    for (const auto& [person, l] : sessions.at("lockouts").items()) {
        LockState state;
        state.consecutive_failures = l.at("consecutive_failures").get<unsigned>();
        if (!l.at("locked_until").is_null()) {
            state.locked_until = timestamp_from(l.at("locked_until"));
        }
        d.lockouts[PersonId {person}] = state;
    }

    const auto& queue = doc.at("retry_queue");
    for (const auto& a : queue.at("pending")) {
        d.pending.push_back(action_from(a));
    }
    for (const auto& a : queue.at("manual_intervention")) {
        d.manual.push_back(action_from(a));
    }

    const auto& revocations = doc.at("revocations");
    d.next_serial           = revocations.at("next_serial").get<std::uint64_t>();
    for (const auto& [issuer, j] : revocations.at("issuers").items()) {
        StatusResponder::IssuerState state;
        state.issued    = j.at("issued").get<std::set<std::uint64_t>>();
        auto list       = std::make_shared<RevocationList>();
        list->issuer    = issuer;
        list->version   = j.at("version").get<std::uint64_t>();
        list->issued_at = timestamp_from(j.at("issued_at"));
        for (const auto& e : j.at("entries")) {
            RevocationEntry entry {e.at("serial").get<std::uint64_t>(),
                require(parse_revocation_reason(e.at("reason").get<std::string>()), "revocation reason"),
                timestamp_from(e.at("revoked_at"))};
            list->entries[entry.serial] = entry;
        }
        state.current      = std::move(list);
        d.issuers[issuer] = std::move(state);
    }
    return d;
}

} // namespace

Result<std::string> save_snapshot(const System& system, std::string_view data_key)
{
    json doc;

    auto identities = system.store.snapshot();
    if (!identities) {
        return identities.error();
    }
    doc["identities"] = json::array();
    for (const auto& id : *identities) {
        auto j = identity_to_json(id, data_key);
        if (!j) {
            return j.error();
        }
        doc["identities"].push_back(std::move(j).value());
    }

    doc["resources"] = json::object();
    for (auto r : kAllResources) {
        const auto& endpoint = system.resources.at(r);
        auto        conn     = endpoint.connection();
        json        accounts = json::array();
        for (const auto& a : endpoint.accounts_unchecked()) {
            accounts.push_back(account_to_json(a));
        }
        doc["resources"][std::string {to_string(r)}] = json {{"fault", to_string(endpoint.fault_mode())},
            {"fault_calls", endpoint.fault_calls()},
            {"connection", {{"privileged", conn.privileged}, {"channel_secure", conn.channel_secure}}},
            {"accounts", std::move(accounts)}};
    }

    auto table  = system.admin.table();
    json groups = json::array();
    for (const auto& [key, group] : table.groups) {
        json members = json::array();
        for (const auto& m : group.members) {
            members.push_back(m.str());
        }
        json levels = json::object();
        for (const auto& [m, level] : group.access_levels) {
            levels[m.str()] = level;
        }
        groups.push_back(json {{"application", to_string(key.first)}, {"name", key.second}, {"members", members},
            {"sub_groups", group.sub_groups}, {"access_levels", levels}});
    }
    json holders = json::object();
    for (const auto& [person, roles] : table.role_holders) {
        json list = json::array();
        for (const auto& role : roles) {
            list.push_back(to_string(role));
        }
        holders[person.str()] = list;
    }
    doc["groups"] = json {{"groups", groups}, {"role_holders", holders}};

    json active = json::array();
    for (const auto& s : system.sessions.sessions()) {
        active.push_back(json {{"session_id", s.session_id}, {"person_id", s.person_id.str()},
            {"issued_at", epoch(s.issued_at)}, {"expires_at", epoch(s.expires_at)},
            {"factors", factors_to_json(s.factors)}});
    }
    json lockouts = json::object();
    for (const auto& [person, state] : system.lockouts.entries()) {
        lockouts[person.str()] = json {{"consecutive_failures", state.consecutive_failures},
            {"locked_until", state.locked_until ? epoch(*state.locked_until) : json(nullptr)}};
    }
    doc["sessions"] = json {{"counter", system.sessions.counter()}, {"active", active}, {"lockouts", lockouts}};

    json pending = json::array();
    for (const auto& a : system.engine.retry_queue()) {
        pending.push_back(action_to_json(a));
    }
    json manual = json::array();
    for (const auto& a : system.engine.manual_intervention()) {
        manual.push_back(action_to_json(a));
    }
    doc["retry_queue"] = json {{"pending", pending}, {"manual_intervention", manual}};

    json issuers = json::object();
    for (const auto& [name, state] : system.responder.state()) {
        json entries = json::array();
        for (const auto& [serial, e] : state.current->entries) {
            entries.push_back(
                json {{"serial", serial}, {"reason", to_string(e.reason)}, {"revoked_at", epoch(e.revoked_at)}});
        }
        issuers[name] = json {{"issued", state.issued}, {"version", state.current->version},
            {"issued_at", epoch(state.current->issued_at)}, {"entries", entries}};
    }
    doc["revocations"] = json {{"next_serial", system.responder.next_serial()}, {"issuers", issuers}};

    return doc.dump(2) + "\n";
}

Status load_snapshot(System& system, std::string_view text, std::string_view data_key)
{
    Decoded decoded;
    try {
        decoded = decode(json::parse(text), data_key);
    } catch (const json::exception& e) {
        return make_error(Errc::ParseError, std::string {"snapshot: "} + e.what());
    } catch (const BadField& e) {
        return make_error(Errc::ParseError, std::string {"snapshot: "} + e.what());
    }

    for (auto& id : decoded.identities) {
        auto current = system.store.find(id.person_id);
        if (!current) {
            return current.error();
        }
        auto done = *current ? system.store.replace(id) : system.store.insert(id);
        if (!done) {
            return done;
        }
    }
    for (auto& [id, e] : decoded.endpoints) {
        auto& endpoint = system.resources.at(id);
        for (const auto& existing : endpoint.accounts_unchecked()) {
            endpoint.erase_account_unchecked(existing.person_id);
        }
        for (auto& a : e.accounts) {
            endpoint.put_account_unchecked(std::move(a));
        }
        endpoint.set_connection(e.connection);
        endpoint.restore_fault(e.fault, e.fault_calls);
    }
    system.admin.replace(std::move(decoded.groups));
    system.sessions.restore(std::move(decoded.sessions), decoded.session_counter);
    system.lockouts.restore(std::move(decoded.lockouts));
    system.engine.restore_queue(std::move(decoded.pending), std::move(decoded.manual));
    system.responder.restore(std::move(decoded.issuers), decoded.next_serial);
    return {};
}

Status write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) {
        return make_error(Errc::IoError, tmp.string() + ": " + std::strerror(errno));
    }
    bool ok = ::write(fd, content.data(), content.size()) == static_cast<ssize_t>(content.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) {
        return make_error(Errc::IoError, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        return make_error(Errc::IoError, path.string() + ": " + ec.message());
    }
    return {};
}

Result<std::string> read_file(const std::filesystem::path& path)
{
    std::ifstream in {path, std::ios::binary};
    if (!in) {
        return make_error(Errc::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace idfabric
