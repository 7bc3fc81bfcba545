/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/guard/filter.hpp>

#include <algorithm>
#include <cctype>

namespace idfabric {

namespace {

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    return -1;
}

class FilterParser {
public:
    explicit FilterParser(std::string_view text)
        : mText(text)
    {
    }

    Result<SearchFilter> parse() { return parse_filter(); }

private:
    void skip_ws()
    {
        while (mPos < mText.size() && std::isspace(static_cast<unsigned char>(mText[mPos]))) {
            ++mPos;
        }
    }

    Error fail(std::string what) const
    {
        return make_error(Errc::ParseError, what + " at offset " + std::to_string(mPos));
    }

    Result<SearchFilter> parse_filter()
    {
        skip_ws();
        if (mPos >= mText.size() || mText[mPos] != '(') {
            return fail("expected '('");
        }
        ++mPos;
        skip_ws();
        if (mPos >= mText.size()) {
            return fail("unterminated filter");
        }

        SearchFilter out;
        char         c = mText[mPos];
        if (c == '&' || c == '|') {
            ++mPos;
            out.kind = c == '&' ? SearchFilter::Kind::And : SearchFilter::Kind::Or;
            for (;;) {
                skip_ws();
                if (mPos >= mText.size()) {
                    return fail("unterminated filter list");
                }
                if (mText[mPos] == ')') {
                    break;
                }
                auto child = parse_filter();
                if (!child) {
                    return child;
                }
                out.children.push_back(std::move(child).value());
            }
        } else if (c == '!') {
            ++mPos;
            out.kind   = SearchFilter::Kind::Not;
            auto child = parse_filter();
            if (!child) {
                return child;
            }
            out.children.push_back(std::move(child).value());
            skip_ws();
        } else {
            auto item = parse_item();
            if (!item) {
                return item;
            }
            out = std::move(item).value();
        }

        if (mPos >= mText.size() || mText[mPos] != ')') {
            return fail("expected ')'");
        }
        ++mPos;
        return out;
    }

    Result<SearchFilter> parse_item()
    {
        auto eq = mText.find('=', mPos);
        if (eq == std::string_view::npos) {
            return fail("expected '='");
        }
        auto attr = mText.substr(mPos, eq - mPos);
        if (attr.find_first_of("()") != std::string_view::npos) {
            return fail("malformed attribute");
        }
        while (!attr.empty() && std::isspace(static_cast<unsigned char>(attr.back()))) {
            attr.remove_suffix(1);
        }
        if (attr.empty()) {
            return fail("empty attribute");
        }
        mPos = eq + 1;

        // Decode the value into pieces split at unescaped wildcards.
        std::vector<std::string> pieces(1);
        bool                     wildcard = false;
        while (mPos < mText.size() && mText[mPos] != ')') {
            char ch = mText[mPos];
            if (ch == '(') {
                return fail("unescaped '(' in value");
            }
            if (ch == '*') {
                wildcard = true;
                pieces.emplace_back();
                ++mPos;
                continue;
            }
            if (ch == '\\') {
                if (mPos + 2 >= mText.size()) {
                    return fail("truncated escape");
                }
                int hi = hex_value(mText[mPos + 1]);
                int lo = hex_value(mText[mPos + 2]);
                if (hi < 0 || lo < 0) {
                    return fail("invalid escape");
                }
                pieces.back().push_back(static_cast<char>(hi * 16 + lo));
                mPos += 3;
                continue;
            }
            pieces.back().push_back(ch);
            ++mPos;
        }

        SearchFilter out;
        out.kind      = SearchFilter::Kind::Match;
        out.attribute = std::string {attr};
        if (!wildcard) {
            out.op    = FilterOp::Equals;
            out.value = std::move(pieces.front());
        } else if (pieces.size() == 2 && pieces[0].empty() && pieces[1].empty()) {
            out.op = FilterOp::Presence;
        } else {
            out.op     = FilterOp::Substring;
            out.pieces = std::move(pieces);
        }
        return out;
    }

    std::string_view mText;
    std::size_t      mPos = 0;
};

bool substring_match(const std::vector<std::string>& pieces, std::string_view value)
{
    const auto& first = pieces.front();
    const auto& last  = pieces.back();
    if (value.substr(0, first.size()) != first) {
        return false;
    }
    std::size_t pos = first.size();
    for (std::size_t i = 1; i + 1 < pieces.size(); ++i) {
        auto found = value.find(pieces[i], pos);
        if (found == std::string_view::npos) {
            return false;
        }
        pos = found + pieces[i].size();
    }
    if (value.size() < pos + last.size()) {
        return false;
    }
    return value.substr(value.size() - last.size()) == last;
}

} // namespace

std::string escape_filter_value(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '*' || c == '(' || c == ')' || c == '\\' || c == '\0') {
            auto u = static_cast<unsigned char>(c);
            out.push_back('\\');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0x0f]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string html_escape(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        case '\'':
            out += "&#39;";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

SearchFilter SearchFilter::equals(std::string attribute, std::string value)
{
    SearchFilter f;
    f.attribute = std::move(attribute);
    f.op        = FilterOp::Equals;
    f.value     = std::move(value);
    return f;
}

SearchFilter SearchFilter::presence(std::string attribute)
{
    SearchFilter f;
    f.attribute = std::move(attribute);
    f.op        = FilterOp::Presence;
    return f;
}

SearchFilter SearchFilter::all_of(std::vector<SearchFilter> children)
{
    SearchFilter f;
    f.kind     = Kind::And;
    f.children = std::move(children);
    return f;
}

SearchFilter SearchFilter::any_of(std::vector<SearchFilter> children)
{
    SearchFilter f;
    f.kind     = Kind::Or;
    f.children = std::move(children);
    return f;
}

SearchFilter SearchFilter::negate(SearchFilter child)
{
    SearchFilter f;
    f.kind = Kind::Not;
    f.children.push_back(std::move(child));
    return f;
}

Result<SearchFilter> build_search_filter(std::string_view attribute, std::string_view raw_value)
{
    if (!searchable_attributes().contains(std::string {attribute})) {
        return make_error(Errc::UnknownAttribute, std::string {attribute});
    }
    return SearchFilter::equals(std::string {attribute}, std::string {raw_value});
}

std::string render(const SearchFilter& filter)
{
    switch (filter.kind) {
    case SearchFilter::Kind::Match:
        switch (filter.op) {
        case FilterOp::Equals:
            return "(" + filter.attribute + "=" + escape_filter_value(filter.value) + ")";
        case FilterOp::Presence:
            return "(" + filter.attribute + "=*)";
        case FilterOp::Substring: {
            std::string out = "(" + filter.attribute + "=";
            for (std::size_t i = 0; i < filter.pieces.size(); ++i) {
                if (i > 0) {
                    out += '*';
                }
                out += escape_filter_value(filter.pieces[i]);
            }
            return out + ")";
        }
        }
        break;
    case SearchFilter::Kind::And:
    case SearchFilter::Kind::Or: {
        std::string out = filter.kind == SearchFilter::Kind::And ? "(&" : "(|";
        for (const auto& child : filter.children) {
            out += render(child);
        }
        return out + ")";
    }
    case SearchFilter::Kind::Not:
        return "(!" + render(filter.children.front()) + ")";
    }
    return {};
}

Result<SearchFilter> parse_filter(std::string_view text)
{
    return FilterParser {text}.parse();
}

bool matches(const SearchFilter& filter, const AttributeMap& attributes)
{
    switch (filter.kind) {
    case SearchFilter::Kind::Match: {
        auto it = attributes.find(filter.attribute);
        if (it == attributes.end()) {
            return false;
        }
        switch (filter.op) {
        case FilterOp::Equals:
            return it->second == filter.value;
        case FilterOp::Presence:
            return true;
        case FilterOp::Substring:
            return substring_match(filter.pieces, it->second);
        }
        return false;
    }
    case SearchFilter::Kind::And:
        return std::all_of(filter.children.begin(), filter.children.end(),
            [&](const SearchFilter& child) { return matches(child, attributes); });
    case SearchFilter::Kind::Or:
        return std::any_of(filter.children.begin(), filter.children.end(),
            [&](const SearchFilter& child) { return matches(child, attributes); });
    case SearchFilter::Kind::Not:
        return !matches(filter.children.front(), attributes);
    }
    return false;
}

} // namespace idfabric
