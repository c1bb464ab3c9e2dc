#pragma once

// Publication-style report tables. Rows are JSON objects; a column spec maps
// keys to markdown cells (4 decimal places) and parses the cells back.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/anova.hpp"
#include "decoy/errors.hpp"
#include "decoy/hash.hpp"
#include "decoy/stats.hpp"
#include "decoy/validity.hpp"

namespace decoy::report {

using nlohmann::json;

inline constexpr int decimals = 4;

inline std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s == "-0.0000") s = "0.0000";
    return s;
}

/// Value as it survives a trip through the markdown table.
inline double round_reported(double v) {
    return std::isfinite(v) ? std::stod(fmt(v)) : v;
}

enum class cell_kind { text, integer, number, mean_sd, estimate_ci };

struct column {
    std::string header;
    cell_kind kind;
    std::vector<std::string> keys;  // 1 key, or 2 for mean_sd, or 3 for estimate_ci
};

struct table {
    std::string title;
    std::vector<column> columns;
    std::vector<json> rows;
    std::vector<std::string> notes;
};

namespace detail {

inline std::string num_or_na(const json& row, const std::string& key) {
    if (!row.contains(key) || row[key].is_null()) return "n/a";
    return fmt(row[key].get<double>());
}

inline std::string render_cell(const column& c, const json& row) {
    switch (c.kind) {
        case cell_kind::text: return row.value(c.keys[0], "");
        case cell_kind::integer:
            return row.contains(c.keys[0]) && !row[c.keys[0]].is_null() ? std::to_string(row[c.keys[0]].get<long long>())
                                                                        : "n/a";
        case cell_kind::number: return num_or_na(row, c.keys[0]);
        case cell_kind::mean_sd: {
            const auto m = num_or_na(row, c.keys[0]);
            return m == "n/a" ? m : m + " (" + num_or_na(row, c.keys[1]) + ")";
        }
        case cell_kind::estimate_ci:
        default: {
            const auto e = num_or_na(row, c.keys[0]);
            if (e == "n/a") return e;
            if (!row.contains(c.keys[1]) || row[c.keys[1]].is_null()) return e;
            return e + " [" + num_or_na(row, c.keys[1]) + "; " + num_or_na(row, c.keys[2]) + "]";
        }
    }
}

inline std::string escape_cell(std::string s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|') out += "\\|";
        else if (ch == '\n') out += ' ';
        else out += ch;
    }
    return out;
}

inline std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline json parse_number(const std::string& s) {
    if (s == "n/a") return nullptr;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("report table: cannot read number \"" + s + "\"");
    }
}

inline void parse_cell(const column& c, const std::string& cell, json& row) {
    if (cell == "n/a" && c.kind != cell_kind::text) {
        for (const auto& k : c.keys) row[k] = nullptr;
        return;
    }
    switch (c.kind) {
        case cell_kind::text: row[c.keys[0]] = cell; return;
        case cell_kind::integer: {
            const auto v = parse_number(cell);
            row[c.keys[0]] = v.is_null() ? json(nullptr) : json(static_cast<long long>(v.get<double>()));
            return;
        }
        case cell_kind::number: row[c.keys[0]] = parse_number(cell); return;
        case cell_kind::mean_sd: {
            const auto open = cell.find(" (");
            if (open == std::string::npos || cell.back() != ')') {
                row[c.keys[0]] = parse_number(cell);
                row[c.keys[1]] = nullptr;
                return;
            }
            row[c.keys[0]] = parse_number(cell.substr(0, open));
            row[c.keys[1]] = parse_number(cell.substr(open + 2, cell.size() - open - 3));
            return;
        }
        case cell_kind::estimate_ci:
        default: {
            const auto open = cell.find(" [");
            if (open == std::string::npos) {
                row[c.keys[0]] = parse_number(cell);
                row[c.keys[1]] = row[c.keys[2]] = nullptr;
                return;
            }
            const auto semi = cell.find("; ", open);
            if (semi == std::string::npos || cell.back() != ']') throw input_error("report table: bad interval \"" + cell + "\"");
            row[c.keys[0]] = parse_number(cell.substr(0, open));
            row[c.keys[1]] = parse_number(cell.substr(open + 2, semi - open - 2));
            row[c.keys[2]] = parse_number(cell.substr(semi + 2, cell.size() - semi - 3));
            return;
        }
    }
}

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
            cur += '|';
            ++i;
        } else if (line[i] == '|') {
            cells.push_back(strip(cur));
            cur.clear();
        } else {
            cur += line[i];
        }
    }
    cells.push_back(strip(cur));
    // drop the empty edges produced by the leading and trailing pipes
    if (!cells.empty() && cells.front().empty()) cells.erase(cells.begin());
    if (!cells.empty() && cells.back().empty()) cells.pop_back();
    return cells;
}

}  // namespace detail

inline std::string to_markdown(const table& t) {
    std::string out = "## " + t.title + "\n\n|";
    for (const auto& c : t.columns) out += " " + c.header + " |";
    out += "\n|";
    for (const auto& c : t.columns) out += c.kind == cell_kind::text ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& row : t.rows) {
        out += "|";
        for (const auto& c : t.columns) out += " " + detail::escape_cell(detail::render_cell(c, row)) + " |";
        out += "\n";
    }
    for (const auto& n : t.notes) out += "\n" + n + "\n";
    return out;
}

/// Rows as the markdown reports them (numbers rounded to 4 places).
inline std::vector<json> reported_rows(const table& t) {
    std::vector<json> out;
    for (const auto& row : t.rows) {
        json r = json::object();
        for (const auto& c : t.columns)
            for (const auto& k : c.keys) {
                if (!row.contains(k)) continue;
                const auto& v = row[k];
                if (c.kind == cell_kind::text || c.kind == cell_kind::integer || v.is_null())
                    r[k] = v;
                else
                    r[k] = round_reported(v.get<double>());
            }
        out.push_back(std::move(r));
    }
    return out;
}

inline json to_json(const table& t) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"header", c.header}, {"keys", c.keys}});
    return {{"title", t.title}, {"columns", cols}, {"rows", t.rows}, {"notes", t.notes}};
}

/// Reads the tables of a markdown report back into rows, given the column
/// specs to expect. Tables are matched by their "## title" heading.
inline std::vector<table> parse_markdown(const std::string& md, const std::vector<table>& specs) {
    std::vector<table> out;
    std::istringstream in(md);
    std::string line;
    const table* spec = nullptr;
    table current;
    bool in_table = false;
    auto flush = [&] {
        if (spec) out.push_back(std::move(current));
        spec = nullptr;
        in_table = false;
    };
    while (std::getline(in, line)) {
        if (line.rfind("## ", 0) == 0) {
            flush();
            const auto title = line.substr(3);
            for (const auto& s : specs)
                if (s.title == title) spec = &s;
            if (spec) current = table{spec->title, spec->columns, {}, {}};
            continue;
        }
        if (!spec) continue;
        if (line.rfind("|", 0) != 0) {
            if (in_table) in_table = false;
            if (!detail::strip(line).empty() && !current.rows.empty()) current.notes.push_back(line);
            continue;
        }
        const auto cells = detail::split_row(line);
        if (!in_table) {
            // header row: must match the column list
            if (cells.size() != spec->columns.size()) throw input_error("report table \"" + spec->title + "\": column count mismatch");
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i] != spec->columns[i].header)
                    throw input_error("report table \"" + spec->title + "\": unexpected header \"" + cells[i] + "\"");
            in_table = true;
            continue;
        }
        if (!cells.empty() && cells[0].find("---") != std::string::npos) continue;
        if (cells.size() != spec->columns.size()) throw input_error("report table \"" + spec->title + "\": ragged row");
        json row = json::object();
        for (std::size_t i = 0; i < cells.size(); ++i) detail::parse_cell(spec->columns[i], cells[i], row);
        current.rows.push_back(std::move(row));
    }
    flush();
    return out;
}

// ------------------------------------------------------- table shapes

inline std::vector<column> classification_columns() {
    return {{"Condition", cell_kind::text, {"condition"}},
            {"n", cell_kind::integer, {"n"}},
            {"Accuracy", cell_kind::number, {"accuracy"}},
            {"AUC [99% CI]", cell_kind::estimate_ci, {"auc", "auc_ci_low", "auc_ci_high"}},
            {"Precision (truthful)", cell_kind::number, {"precision_truthful"}},
            {"Recall (truthful)", cell_kind::number, {"recall_truthful"}},
            {"Precision (deceptive)", cell_kind::number, {"precision_deceptive"}},
            {"Recall (deceptive)", cell_kind::number, {"recall_deceptive"}}};
}

inline std::vector<column> length_columns() {
    return {{"Condition", cell_kind::text, {"condition"}},
            {"Truthful M (SD)", cell_kind::mean_sd, {"truthful_mean", "truthful_sd"}},
            {"Deceptive M (SD)", cell_kind::mean_sd, {"deceptive_mean", "deceptive_sd"}},
            {"Cohen's d [99% CI]", cell_kind::estimate_ci, {"d", "d_ci_low", "d_ci_high"}},
            {"n truthful", cell_kind::integer, {"n_truthful"}},
            {"n deceptive", cell_kind::integer, {"n_deceptive"}}};
}

inline std::vector<column> similarity_columns() {
    return {{"Condition", cell_kind::text, {"condition"}},
            {"Pairs", cell_kind::integer, {"n_pairs"}},
            {"Similarity M (SD)", cell_kind::mean_sd, {"similarity_mean", "similarity_sd"}},
            {"Share >= 0.80", cell_kind::number, {"share_ge_080"}},
            {"Share >= 0.90", cell_kind::number, {"share_ge_090"}},
            {"Mean rank (SD)", cell_kind::mean_sd, {"rank_mean", "rank_sd"}},
            {"Rank coverage", cell_kind::number, {"rank_coverage"}}};
}

inline std::vector<column> anova_columns() {
    return {{"Effect", cell_kind::text, {"effect"}},   {"SS", cell_kind::number, {"ss"}},
            {"df", cell_kind::integer, {"df"}},        {"F", cell_kind::number, {"f"}},
            {"p", cell_kind::number, {"p"}},           {"Partial eta^2", cell_kind::number, {"eta_sq"}}};
}

inline json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json classification_row(const stats::metrics_report& r) {
    json row{{"condition", r.condition},
             {"n", r.n},
             {"accuracy", r.accuracy},
             {"auc", opt_num(r.auc)},
             {"auc_ci_low", r.auc_ci ? json(r.auc_ci->first) : json(nullptr)},
             {"auc_ci_high", r.auc_ci ? json(r.auc_ci->second) : json(nullptr)},
             {"precision_truthful", opt_num(r.truthful.precision)},
             {"recall_truthful", opt_num(r.truthful.recall)},
             {"precision_deceptive", opt_num(r.deceptive.precision)},
             {"recall_deceptive", opt_num(r.deceptive.recall)},
             {"warnings", r.warnings}};
    return row;
}

inline json length_row_json(const validity::length_row& r) {
    return {{"condition", r.condition},       {"truthful_mean", r.truthful.mean}, {"truthful_sd", r.truthful.sd},
            {"deceptive_mean", r.deceptive.mean}, {"deceptive_sd", r.deceptive.sd}, {"d", r.d.d},
            {"d_ci_low", r.d.ci_low},         {"d_ci_high", r.d.ci_high},       {"n_truthful", r.truthful.n},
            {"n_deceptive", r.deceptive.n}};
}

inline json validity_row(const std::string& condition, const std::optional<validity::similarity_summary>& sim,
                         const std::optional<validity::rank_summary>& ranks) {
    json row{{"condition", condition}};
    for (const char* k : {"n_pairs", "similarity_mean", "similarity_sd", "share_ge_080", "share_ge_090", "rank_mean",
                          "rank_sd", "rank_coverage"})
        row[k] = nullptr;
    if (sim) {
        row["n_pairs"] = sim->n_pairs;
        row["similarity_mean"] = sim->mean;
        row["similarity_sd"] = sim->sd;
        row["share_ge_080"] = sim->share_at(0.80);
        row["share_ge_090"] = sim->share_at(0.90);
        row["unembeddable"] = sim->unembeddable;
        row["embedding_coverage"] = sim->mean_coverage;
    }
    if (ranks) {
        row["rank_mean"] = ranks->mean_rank;
        row["rank_sd"] = ranks->sd_rank;
        row["rank_coverage"] = ranks->mean_coverage;
        row["rank_texts"] = ranks->n_texts;
        row["rank_scored"] = ranks->n_scored;
    }
    return row;
}

inline std::vector<json> anova_rows(const stats::anova_table& t) {
    std::vector<json> rows;
    for (const auto& e : t.effects)
        rows.push_back({{"effect", e.name}, {"ss", e.ss}, {"df", e.df}, {"f", e.f}, {"p", e.p}, {"eta_sq", e.eta_sq}});
    rows.push_back({{"effect", "Residual"}, {"ss", t.ss_error}, {"df", t.df_error}, {"f", nullptr}, {"p", nullptr},
                    {"eta_sq", nullptr}});
    return rows;
}

// ----------------------------------------------------------- manifest

struct artifact_ref {
    std::string role;
    std::string path;
    std::string sha256;
};

/// Provenance of one command run. Every written artifact is listed here.
struct run_manifest {
    std::string command;
    json config = json::object();
    std::vector<artifact_ref> inputs;
    std::vector<artifact_ref> outputs;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;

    void add_input(const std::string& role, const std::string& path) { inputs.push_back({role, path, file_sha256(path)}); }
    void add_output(const std::string& role, const std::string& path) {
        outputs.push_back({role, path, file_sha256(path)});
    }
};

inline json to_json(const run_manifest& m) {
    auto refs = [](const std::vector<artifact_ref>& v) {
        json a = json::array();
        for (const auto& r : v) a.push_back({{"role", r.role}, {"path", r.path}, {"sha256", r.sha256}});
        return a;
    };
    return {{"format", "decoy.run_manifest"}, {"version", 1},
            {"command", m.command},          {"config", m.config},
            {"inputs", refs(m.inputs)},      {"outputs", refs(m.outputs)},
            {"seed", m.seed},                {"tool_version", m.tool_version},
            {"started_at", m.started_at},    {"finished_at", m.finished_at}};
}

}  // namespace decoy::report
