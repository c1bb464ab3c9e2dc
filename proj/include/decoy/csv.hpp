#pragma once

// Minimal RFC-4180 reader/writer: quoted fields may contain commas,
// doubled quotes and line breaks. The first row is always the header.

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decoy/errors.hpp"

namespace decoy::csv {

using row = std::vector<std::string>;

struct table {
    row header;
    std::vector<row> rows;

    [[nodiscard]] std::ptrdiff_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        return -1;
    }
};

inline std::vector<row> parse_rows(std::string_view text) {
    std::vector<row> rows;
    row current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // a lone empty field is a blank line
        if (!(current.size() == 1 && current[0].empty())) rows.push_back(std::move(current));
        current.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty())
                    throw input_error("csv: stray quote inside unquoted field at line " + std::to_string(line));
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                [[fallthrough]];
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw input_error("csv: unterminated quoted field");
    if (field_started || !field.empty() || !current.empty()) end_row();
    return rows;
}

inline table parse(std::string_view text) {
    auto rows = parse_rows(text);
    if (rows.empty()) throw input_error("csv: missing header row");
    table t;
    t.header = std::move(rows.front());
    t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != t.header.size())
            throw input_error("csv: row " + std::to_string(r + 1) + " has " + std::to_string(t.rows[r].size()) +
                              " fields, header has " + std::to_string(t.header.size()));
    }
    return t;
}

inline std::string quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_row(const row& r) {
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += quote(r[i]);
    }
    out += "\r\n";
    return out;
}

}  // namespace decoy::csv
