#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/csv.hpp"
#include "decoy/errors.hpp"
#include "decoy/hash.hpp"
#include "decoy/text/unicode.hpp"

namespace decoy {

enum class veracity { truthful, deceptive };
enum class split { train, test };

inline std::string_view to_string(veracity v) { return v == veracity::truthful ? "truthful" : "deceptive"; }
inline std::string_view to_string(split s) { return s == split::train ? "train" : "test"; }

inline veracity parse_veracity(std::string_view s) {
    if (s == "truthful") return veracity::truthful;
    if (s == "deceptive") return veracity::deceptive;
    throw input_error("unknown label value \"" + std::string(s) + "\" (expected truthful|deceptive)");
}

inline split parse_split(std::string_view s) {
    if (s == "train") return split::train;
    if (s == "test") return split::test;
    throw input_error("unknown split value \"" + std::string(s) + "\" (expected train|test)");
}

/// Number of maximal non-whitespace runs.
inline std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool space = text::is_space(text::next_code_point(text, i));
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

struct statement {
    std::string id;
    std::string text;
    veracity label = veracity::truthful;
    split part = split::train;
    std::optional<std::string> summary;

    [[nodiscard]] std::size_t word_count() const { return decoy::word_count(text); }
    friend bool operator==(const statement&, const statement&) = default;
};

struct provenance {
    std::string path;
    std::string sha256;
};

/// Descriptives of one group: sample SD uses the n-1 denominator.
struct group_stats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

inline group_stats describe_values(std::span<const double> values) {
    if (values.empty()) throw input_error("describe: empty group");
    group_stats g;
    g.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    g.mean = sum / static_cast<double>(g.n);
    if (g.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - g.mean) * (v - g.mean);
        g.sd = std::sqrt(ss / static_cast<double>(g.n - 1));
    }
    return g;
}

enum class grouping { label, split, split_label };

class corpus {
  public:
    corpus() = default;

    explicit corpus(std::vector<statement> statements, provenance prov = {})
        : statements_(std::move(statements)), provenance_(std::move(prov)) {
        validate();
    }

    [[nodiscard]] const std::vector<statement>& statements() const { return statements_; }
    [[nodiscard]] const provenance& source() const { return provenance_; }
    [[nodiscard]] std::size_t size() const { return statements_.size(); }

    [[nodiscard]] std::size_t count(std::optional<split> s, std::optional<veracity> v) const {
        return static_cast<std::size_t>(std::count_if(statements_.begin(), statements_.end(), [&](const statement& st) {
            return (!s || st.part == *s) && (!v || st.label == *v);
        }));
    }

    [[nodiscard]] std::vector<const statement*> select(std::optional<split> s,
                                                       std::optional<veracity> v = std::nullopt) const {
        std::vector<const statement*> out;
        for (const auto& st : statements_)
            if ((!s || st.part == *s) && (!v || st.label == *v)) out.push_back(&st);
        return out;
    }

    [[nodiscard]] const statement* find(std::string_view id) const {
        const auto it = by_id_.find(std::string(id));
        return it == by_id_.end() ? nullptr : &statements_[it->second];
    }

  private:
    void validate() {
        by_id_.clear();
        for (std::size_t i = 0; i < statements_.size(); ++i) {
            const auto& s = statements_[i];
            if (s.id.empty()) throw input_error("statement #" + std::to_string(i + 1) + " has an empty id");
            if (word_count(s.text) == 0) throw input_error("statement \"" + s.id + "\" has empty text");
            if (!by_id_.emplace(s.id, i).second) throw input_error("duplicate statement id \"" + s.id + "\"");
        }
    }

    std::vector<statement> statements_;
    provenance provenance_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

inline std::string group_key(const statement& s, grouping by) {
    switch (by) {
        case grouping::label: return std::string(to_string(s.label));
        case grouping::split: return std::string(to_string(s.part));
        case grouping::split_label:
        default: return std::string(to_string(s.part)) + "/" + std::string(to_string(s.label));
    }
}

/// Word-count descriptives per group. `required` lists groups that must be
/// present (and hence non-empty); missing ones raise an error naming them.
inline std::map<std::string, group_stats> describe(const corpus& c, grouping by,
                                                   const std::vector<std::string>& required = {}) {
    std::map<std::string, std::vector<double>> values;
    for (const auto& s : c.statements()) values[group_key(s, by)].push_back(static_cast<double>(s.word_count()));
    for (const auto& g : required)
        if (!values.count(g)) throw input_error("describe: group \"" + g + "\" is empty");
    std::map<std::string, group_stats> out;
    for (const auto& [key, vals] : values) out.emplace(key, describe_values(vals));
    return out;
}

// ---------------------------------------------------------------- io

enum class corpus_format { jsonl, csv };

inline corpus_format format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return corpus_format::csv;
    return corpus_format::jsonl;
}

/// id -> split from a CSV with columns id,split.
inline std::unordered_map<std::string, split> load_split_file(const std::string& path) {
    const auto t = csv::parse(read_file(path));
    const auto id_col = t.column("id");
    const auto split_col = t.column("split");
    if (id_col < 0 || split_col < 0) throw input_error("split file " + path + " needs columns id,split");
    std::unordered_map<std::string, split> out;
    for (const auto& r : t.rows) {
        const auto& id = r[static_cast<std::size_t>(id_col)];
        if (!out.emplace(id, parse_split(r[static_cast<std::size_t>(split_col)])).second)
            throw input_error("split file " + path + ": duplicate id \"" + id + "\"");
    }
    return out;
}

namespace detail {

struct raw_record {
    std::string id, text, label;
    std::optional<std::string> split, summary;
};

inline std::vector<raw_record> read_jsonl_records(const std::string& content, const std::string& path) {
    std::vector<raw_record> out;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw input_error(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        auto field = [&](const char* key) -> std::string {
            if (!j.contains(key) || !j[key].is_string())
                throw input_error(path + ":" + std::to_string(lineno) + ": missing string field \"" + key + "\"");
            return j[key].get<std::string>();
        };
        raw_record r{field("id"), field("text"), field("label"), std::nullopt, std::nullopt};
        if (j.contains("split") && !j["split"].is_null()) r.split = j["split"].get<std::string>();
        // an empty summary is the same as none, which keeps CSV and JSONL interchangeable
        if (j.contains("summary") && j["summary"].is_string() && !j["summary"].get<std::string>().empty())
            r.summary = j["summary"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<raw_record> read_csv_records(const std::string& content, const std::string& path) {
    const auto t = csv::parse(content);
    const auto id = t.column("id"), text = t.column("text"), label = t.column("label");
    const auto sp = t.column("split"), summary = t.column("summary");
    if (id < 0 || text < 0 || label < 0) throw input_error(path + ": CSV header must contain id,text,label");
    std::vector<raw_record> out;
    for (const auto& r : t.rows) {
        auto at = [&](std::ptrdiff_t c) { return r[static_cast<std::size_t>(c)]; };
        raw_record rec{at(id), at(text), at(label), std::nullopt, std::nullopt};
        if (sp >= 0 && !at(sp).empty()) rec.split = at(sp);
        if (summary >= 0 && !at(summary).empty()) rec.summary = at(summary);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace detail

/// Loads and validates a corpus. With a sidecar split file, its assignment
/// takes precedence over any split field in the records.
inline corpus load_corpus(const std::string& path, std::optional<corpus_format> format = std::nullopt,
                          const std::optional<std::string>& split_file = std::nullopt) {
    const std::string content = read_file(path);
    const auto fmt = format.value_or(format_from_path(path));
    auto raw = fmt == corpus_format::csv ? detail::read_csv_records(content, path)
                                         : detail::read_jsonl_records(content, path);
    std::unordered_map<std::string, split> sidecar;
    if (split_file) sidecar = load_split_file(*split_file);

    std::vector<statement> statements;
    statements.reserve(raw.size());
    for (auto& r : raw) {
        statement s;
        s.id = std::move(r.id);
        s.text = std::move(r.text);
        s.label = parse_veracity(r.label);
        if (const auto it = sidecar.find(s.id); it != sidecar.end()) {
            s.part = it->second;
        } else if (r.split) {
            s.part = parse_split(*r.split);
        } else {
            throw input_error("statement \"" + s.id + "\" has no split (add a split field or a split file)");
        }
        s.summary = std::move(r.summary);
        statements.push_back(std::move(s));
    }
    return corpus(std::move(statements), provenance{path, sha256_hex(content)});
}

inline nlohmann::json to_json(const statement& s) {
    nlohmann::json j{{"id", s.id}, {"text", s.text}, {"label", to_string(s.label)}, {"split", to_string(s.part)}};
    if (s.summary) j["summary"] = *s.summary;
    return j;
}

inline std::string to_jsonl(const corpus& c) {
    std::string out;
    for (const auto& s : c.statements()) {
        out += to_json(s).dump();
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const corpus& c) {
    std::string out = csv::format_row({"id", "text", "label", "split", "summary"});
    for (const auto& s : c.statements())
        out += csv::format_row({s.id, s.text, std::string(to_string(s.label)), std::string(to_string(s.part)),
                                s.summary.value_or("")});
    return out;
}

inline void write_corpus(const corpus& c, const std::string& path, std::optional<corpus_format> format = std::nullopt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << (format.value_or(format_from_path(path)) == corpus_format::csv ? to_csv(c) : to_jsonl(c));
}

}  // namespace decoy
