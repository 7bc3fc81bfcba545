/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_GUARD_FILTER_HPP_
#define IDFABRIC_GUARD_FILTER_HPP_

#include <idfabric/result.hpp>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace idfabric {

/// Replaces `*` `(` `)` `\` and NUL with their `\xx` hex escapes.
std::string escape_filter_value(std::string_view raw);

/// Five-character HTML output encoding (& < > " ') used by report emitters.
std::string html_escape(std::string_view raw);

enum class FilterOp { Equals, Presence, Substring };

/// Structured registry search filter. Values are held as data and only
/// become filter text through render(), which escapes them.
struct SearchFilter {
    enum class Kind { Match, And, Or, Not };

    Kind        kind = Kind::Match;
    std::string attribute;
    FilterOp    op = FilterOp::Equals;
    // Equals: the literal value. Substring: pieces between wildcards,
    // with empty first/last pieces meaning leading/trailing `*`.
    std::string               value;
    std::vector<std::string>  pieces;
    std::vector<SearchFilter> children;

    static SearchFilter equals(std::string attribute, std::string value);
    static SearchFilter presence(std::string attribute);
    static SearchFilter all_of(std::vector<SearchFilter> children);
    static SearchFilter any_of(std::vector<SearchFilter> children);
    static SearchFilter negate(SearchFilter child);

    bool operator==(const SearchFilter&) const = default;
};

using AttributeMap = std::map<std::string, std::string>;

inline const std::set<std::string>& searchable_attributes()
{
    static const std::set<std::string> kAttributes {"uid", "email", "cn"};
    return kAttributes;
}

/// Single Equals node over a whitelisted attribute; UnknownAttribute otherwise.
Result<SearchFilter> build_search_filter(std::string_view attribute, std::string_view raw_value);

std::string render(const SearchFilter& filter);

/// Parses filter text the way a directory server would, including wildcards
/// and boolean combinators. Whitespace between tokens is tolerated but value
/// bytes are taken verbatim. Text after the first complete filter is ignored.
Result<SearchFilter> parse_filter(std::string_view text);

bool matches(const SearchFilter& filter, const AttributeMap& attributes);

} // namespace idfabric

#endif
