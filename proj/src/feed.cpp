/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/feed.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace idfabric {

using json = nlohmann::json;

namespace {

const std::set<std::string> kFeedKeys {
    "person_id", "full_name", "role", "sub_role", "department", "event", "effective_date"};

Result<FeedRecord> parse_record(const json& doc)
{
    auto bad = [](std::string cause) { return make_error(Errc::MalformedLine, std::move(cause)); };

    if (!doc.is_object()) {
        return bad("line is not a JSON object");
    }
    for (const auto& [key, _] : doc.items()) {
        if (!kFeedKeys.contains(key)) {
            return bad("unexpected key " + key);
        }
    }

    auto text = [&](const char* key) -> std::optional<std::string> {
        auto it = doc.find(key);
        if (it == doc.end() || !it->is_string()) {
            return std::nullopt;
        }
        return it->get<std::string>();
    };
    auto nullable = [&](const char* key, std::optional<std::string>& out) -> bool {
        auto it = doc.find(key);
        if (it == doc.end() || it->is_null()) {
            out.reset();
            return true;
        }
        if (!it->is_string()) {
            return false;
        }
        out = it->get<std::string>();
        return true;
    };

    FeedRecord record;

    auto person = text("person_id");
    if (!person || person->empty()) {
        return bad("missing person_id");
    }
    record.person_id = PersonId {*person};

    auto name = text("full_name");
    if (!name) {
        return bad("missing full_name");
    }
    record.full_name = *name;

    auto roleName = text("role");
    if (!roleName) {
        return bad("missing role");
    }
    auto role = parse_role(*roleName);
    if (!role) {
        return bad("unknown role " + *roleName);
    }
    record.role = *role;

    std::optional<std::string> subName;
    if (!nullable("sub_role", subName)) {
        return bad("sub_role must be a string or null");
    }
    if (subName) {
        auto sub = parse_sub_role(*subName);
        if (!sub) {
            return bad("unknown sub_role " + *subName);
        }
        record.sub_role = *sub;
    } else {
        record.sub_role = SubRole::None;
    }
    if (!is_valid_pair(record.role, record.sub_role)) {
        return bad("invalid role/sub_role pair " + *roleName + "/" + subName.value_or("null"));
    }

    auto department = text("department");
    if (!department) {
        return bad("missing department");
    }
    record.department = *department;

    auto dateText = text("effective_date");
    if (!dateText) {
        return bad("missing effective_date");
    }
    auto date = parse_date(*dateText);
    if (!date) {
        return bad("invalid effective_date " + *dateText);
    }
    record.effective_date = *date;

    std::optional<std::string> eventText;
    if (!nullable("event", eventText)) {
        return bad("event must be a string or null");
    }
    if (eventText) {
        std::string_view spec {*eventText};
        std::string_view payload;
        if (auto colon = spec.find(':'); colon != std::string_view::npos) {
            payload = spec.substr(colon + 1);
            spec    = spec.substr(0, colon);
        }
        auto kind = parse_event_kind(spec);
        if (!kind) {
            return bad("unknown event " + *eventText);
        }

        LifecycleEvent event = LifecycleEvent::simple(*kind, record.effective_date);
        if (*kind == EventKind::Withdrawal) {
            auto reason = payload.empty() ? std::optional {WithdrawalReason::Voluntary}
                                          : parse_withdrawal_reason(payload);
            if (!reason) {
                return bad("unknown withdrawal reason " + std::string {payload});
            }
            event.reason = reason;
        } else if (!payload.empty()) {
            return bad("event " + std::string {spec} + " takes no payload");
        }
        if (*kind == EventKind::Transfer) {
            event.department = record.department;
        }
        if (*kind == EventKind::Hire && record.role == Role::Employee) {
            event.sub_role = record.sub_role;
        }
        if (auto valid = validate_event(event); !valid) {
            return bad(valid.error().message);
        }
        record.event = event;
    }

    return record;
}

} // namespace

std::string_view to_string(FeedDelta::Kind kind) noexcept
{
    switch (kind) {
    case FeedDelta::Kind::Create:
        return "create";
    case FeedDelta::Kind::Update:
        return "update";
    case FeedDelta::Kind::NoChange:
        return "no_change";
    }
    return "?";
}

Result<std::vector<FeedRecord>> parse_feed(std::string_view text)
{
    std::vector<FeedRecord> records;
    std::istringstream      in {std::string {text}};
    std::string             line;
    std::size_t             lineNo = 0;

    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }

        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error&) {
            return make_error(Errc::MalformedLine, "line " + std::to_string(lineNo) + ": invalid JSON");
        }
        auto record = parse_record(doc);
        if (!record) {
            return make_error(Errc::MalformedLine, "line " + std::to_string(lineNo) + ": " + record.error().message);
        }
        records.push_back(std::move(record).value());
    }
    return records;
}

std::string serialize_feed_record(const FeedRecord& record)
{
    json doc {{"person_id", record.person_id.str()}, {"full_name", record.full_name},
        {"role", to_string(record.role)}, {"department", record.department},
        {"effective_date", format_date(record.effective_date)}};
    doc["sub_role"] = record.sub_role == SubRole::None ? json(nullptr) : json(to_string(record.sub_role));
    if (record.event) {
        std::string name {to_string(record.event->kind)};
        if (record.event->kind == EventKind::Withdrawal && record.event->reason) {
            name += ":" + std::string {to_string(*record.event->reason)};
        }
        doc["event"] = name;
    } else {
        doc["event"] = nullptr;
    }
    return doc.dump();
}

Identity identity_from_record(const FeedRecord& record)
{
    Identity identity;
    identity.person_id  = record.person_id;
    identity.full_name  = record.full_name;
    identity.role       = record.role;
    identity.sub_role   = record.sub_role;
    identity.department = record.department;
    identity.status     = IdentityStatus::Active;
    if (record.event) {
        identity.last_event = AppliedEvent {record.event->kind, record.event->effective_date};
    }
    return identity;
}

Result<std::vector<FeedDelta>> diff_feed(const std::vector<Identity>& store, const std::vector<FeedRecord>& records)
{
    std::map<PersonId, const FeedRecord*> batch;
    for (const auto& record : records) {
        if (!batch.emplace(record.person_id, &record).second) {
            return make_error(Errc::DuplicateInBatch, record.person_id.str());
        }
    }

    std::map<PersonId, const Identity*> known;
    for (const auto& identity : store) {
        known.emplace(identity.person_id, &identity);
    }

    std::vector<FeedDelta> deltas;
    deltas.reserve(batch.size());

    for (const auto& [person, record] : batch) {
        FeedDelta delta {FeedDelta::Kind::NoChange, person, *record, std::nullopt};

        auto it = known.find(person);
        if (it == known.end()) {
            delta.kind = FeedDelta::Kind::Create;
            deltas.push_back(std::move(delta));
            continue;
        }

        const Identity& current = *it->second;

        const bool hintPending = record->event
            && current.last_event != AppliedEvent {record->event->kind, record->event->effective_date};

        if (hintPending) {
            delta.kind  = FeedDelta::Kind::Update;
            delta.event = record->event;
        } else if (record->department != current.department) {
            delta.kind  = FeedDelta::Kind::Update;
            delta.event = LifecycleEvent::transfer(record->department, record->effective_date);
        } else if (!record->event
            && (record->full_name != current.full_name || record->role != current.role
                || record->sub_role != current.sub_role)) {
            delta.kind = FeedDelta::Kind::Update;
        } else if (record->event && record->full_name != current.full_name) {
            delta.kind = FeedDelta::Kind::Update;
        }

        deltas.push_back(std::move(delta));
    }

    return deltas;
}

} // namespace idfabric
