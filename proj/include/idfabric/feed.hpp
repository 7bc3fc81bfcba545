/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_FEED_HPP_
#define IDFABRIC_FEED_HPP_

#include <idfabric/identity.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idfabric {

/// One line of the authoritative-source extract.
struct FeedRecord {
    PersonId                      person_id;
    std::string                   full_name;
    Role                          role     = Role::Student;
    SubRole                       sub_role = SubRole::Prospect;
    std::string                   department;
    std::optional<LifecycleEvent> event;
    Date                          effective_date;

    bool operator==(const FeedRecord&) const = default;
};

struct FeedDelta {
    enum class Kind { Create, Update, NoChange };

    Kind     kind = Kind::NoChange;
    PersonId person_id;
    // The record that produced this delta.
    FeedRecord record;
    // Update only. Empty for attribute-only changes (name, employee sub-role).
    std::optional<LifecycleEvent> event;
};

std::string_view to_string(FeedDelta::Kind kind) noexcept;

/// Parses a JSON-lines feed. All-or-nothing: the first malformed line fails
/// the batch with MalformedLine("line N: cause").
///
/// The "event" value is a lowercase event name, optionally followed by
/// ":<reason>" for withdrawal. Transfer takes its department from the record
/// and hire its sub-role.
Result<std::vector<FeedRecord>> parse_feed(std::string_view text);

std::string serialize_feed_record(const FeedRecord& record);

/// Builds the identity a Create delta provisions.
Identity identity_from_record(const FeedRecord& record);

/// Diffs a batch against the store contents. Output is sorted by PersonId.
/// Identities absent from the batch are left alone.
Result<std::vector<FeedDelta>> diff_feed(const std::vector<Identity>& store, const std::vector<FeedRecord>& records);

} // namespace idfabric

#endif
