#pragma once

// Checks on rewrites: embedding similarity to the original, mean
// word-frequency rank, and word-count descriptives.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "decoy/corpus.hpp"
#include "decoy/hash.hpp"
#include "decoy/stats.hpp"
#include "decoy/textprep.hpp"

namespace decoy::validity {

using vec = std::vector<double>;

/// Word vectors from a text file of "token v1 ... vD" lines. A leading
/// "count dim" header line, as word2vec and fastText write it, is skipped.
class embedding_provider {
  public:
    static embedding_provider from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw input_error("cannot open word-vector file " + path);
        embedding_provider p;
        p.fingerprint_ = "word_vectors:sha256=" + file_sha256(path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(' ') == std::string::npos) continue;
            std::istringstream ls(line);
            std::string token;
            ls >> token;
            vec v;
            double x;
            while (ls >> x) v.push_back(x);
            if (!ls.eof()) throw input_error(path + ":" + std::to_string(lineno) + ": non-numeric vector component");
            if (lineno == 1 && v.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
            p.add(token, std::move(v), path, lineno);
        }
        if (p.vectors_.empty()) throw input_error("word-vector file " + path + " holds no vectors");
        p.fingerprint_ += ";dim=" + std::to_string(p.dim_) + ";words=" + std::to_string(p.vectors_.size());
        return p;
    }

    /// In-memory provider, mainly for tests.
    static embedding_provider from_map(const std::unordered_map<std::string, vec>& words, std::string fingerprint) {
        embedding_provider p;
        for (const auto& [w, v] : words) p.add(w, v, "<memory>", 0);
        p.fingerprint_ = std::move(fingerprint);
        return p;
    }

    [[nodiscard]] std::size_t dimension() const { return dim_; }
    [[nodiscard]] std::size_t vocabulary_size() const { return vectors_.size(); }
    [[nodiscard]] const std::string& fingerprint() const { return fingerprint_; }

    [[nodiscard]] const vec* find(const std::string& word) const {
        const auto it = vectors_.find(word);
        return it == vectors_.end() ? nullptr : &it->second;
    }

  private:
    void add(const std::string& token, vec v, const std::string& origin, std::size_t lineno) {
        if (v.empty()) throw input_error(origin + ":" + std::to_string(lineno) + ": vector has no components");
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_)
            throw input_error(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim_) +
                              " components, found " + std::to_string(v.size()));
        vectors_.emplace(token, std::move(v));  // first occurrence wins
    }

    std::unordered_map<std::string, vec> vectors_;
    std::size_t dim_ = 0;
    std::string fingerprint_;
};

struct embedding {
    vec values;
    double coverage = 0.0;  // share of tokens found in the vocabulary
    std::size_t tokens = 0;
};

/// Mean of the vectors of in-vocabulary tokens (lowercased, punctuation
/// stripped, stopwords kept).
inline embedding embed(std::string_view text, const embedding_provider& p) {
    const auto words = plain_words(text);
    embedding e;
    e.values.assign(p.dimension(), 0.0);
    e.tokens = words.size();
    std::size_t found = 0;
    for (const auto& w : words)
        if (const vec* v = p.find(w)) {
            ++found;
            for (std::size_t k = 0; k < v->size(); ++k) e.values[k] += (*v)[k];
        }
    if (found == 0) throw input_error("unembeddable text: no token has a word vector");
    for (auto& x : e.values) x /= static_cast<double>(found);
    e.coverage = static_cast<double>(found) / static_cast<double>(words.size());
    return e;
}

inline double cosine(const vec& u, const vec& v) {
    if (u.size() != v.size()) throw input_error("cosine: dimension mismatch");
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw input_error("cosine: zero vector");
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

/// Cosine as reported: negative similarity counts as none.
inline double reported_similarity(double raw) { return raw < 0.0 ? 0.0 : raw; }

struct text_pair {
    std::string id;
    std::string original;
    std::string modified;
};

struct pair_similarity {
    std::string id;
    double raw = 0.0;
    double similarity = 0.0;  // clamped at 0
    double coverage_original = 0.0;
    double coverage_modified = 0.0;
};

struct similarity_summary {
    std::size_t n_pairs = 0;
    std::vector<pair_similarity> pairs;
    std::vector<std::string> unembeddable;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<std::pair<double, double>> shares;  // (threshold, share of pairs >= threshold)
    double mean_coverage = 0.0;
    std::string provider;

    [[nodiscard]] double share_at(double threshold) const {
        for (const auto& [t, s] : shares)
            if (t == threshold) return s;
        throw input_error("no share recorded for threshold " + std::to_string(threshold));
    }
};

inline similarity_summary similarity_report(const std::vector<text_pair>& pairs, const embedding_provider& p,
                                            std::vector<double> thresholds = {0.80, 0.90}) {
    if (pairs.empty()) throw input_error("similarity_report: no pairs");
    similarity_summary r;
    r.n_pairs = pairs.size();
    r.provider = p.fingerprint();
    std::vector<double> sims;
    double coverage = 0.0;
    for (const auto& tp : pairs) {
        try {
            const auto a = embed(tp.original, p), b = embed(tp.modified, p);
            const double raw = cosine(a.values, b.values);
            r.pairs.push_back({tp.id, raw, reported_similarity(raw), a.coverage, b.coverage});
            sims.push_back(reported_similarity(raw));
            coverage += (a.coverage + b.coverage) / 2.0;
        } catch (const input_error&) {
            r.unembeddable.push_back(tp.id);
        }
    }
    if (sims.empty()) throw input_error("similarity_report: every pair was unembeddable");
    r.mean = stats::mean(sims);
    r.sd = sims.size() > 1 ? std::sqrt(stats::variance(sims)) : 0.0;
    r.mean_coverage = coverage / static_cast<double>(sims.size());
    std::sort(thresholds.begin(), thresholds.end());
    for (double t : thresholds) {
        const auto hits = std::count_if(sims.begin(), sims.end(), [t](double s) { return s >= t; });
        r.shares.emplace_back(t, static_cast<double>(hits) / static_cast<double>(sims.size()));
    }
    return r;
}

/// Effect size between the similarity distributions of two conditions.
inline stats::effect_size compare_similarity(const similarity_summary& a, const similarity_summary& b,
                                             double level = 0.99) {
    std::vector<double> xa, xb;
    for (const auto& p : a.pairs) xa.push_back(p.similarity);
    for (const auto& p : b.pairs) xb.push_back(p.similarity);
    return stats::cohens_d_with_ci(xa, xb, level);
}

// --------------------------------------------------------------- rank

/// Word -> 1-based rank from a one-word-per-line list; the first occurrence
/// of a repeated word keeps its rank.
class rank_list {
  public:
    static rank_list from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw input_error("cannot open rank list " + path);
        std::vector<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            words.push_back(line);
        }
        auto r = from_words(words);
        r.fingerprint_ = "rank_list:sha256=" + file_sha256(path) + ";lines=" + std::to_string(words.size());
        return r;
    }

    static rank_list from_words(const std::vector<std::string>& words) {
        rank_list r;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto norm = plain_words(words[i]);
            if (norm.size() != 1) continue;  // blank or multiword lines keep their number but rank nothing
            r.rank_.emplace(norm[0], i + 1);
        }
        if (r.rank_.empty()) throw input_error("rank list is empty");
        r.fingerprint_ = "rank_list:words=" + std::to_string(words.size());
        return r;
    }

    [[nodiscard]] std::optional<std::size_t> rank_of(const std::string& w) const {
        const auto it = rank_.find(w);
        if (it == rank_.end()) return std::nullopt;
        return it->second;
    }
    [[nodiscard]] std::size_t size() const { return rank_.size(); }
    [[nodiscard]] const std::string& fingerprint() const { return fingerprint_; }

  private:
    std::unordered_map<std::string, std::size_t> rank_;
    std::string fingerprint_;
};

struct rank_result {
    double mean_rank = 0.0;
    double coverage = 0.0;
    std::size_t tokens = 0;
    std::size_t found = 0;
};

/// Mean rank of the tokens present in the list; absent tokens are skipped
/// and lower the coverage.
inline rank_result vocabulary_rank(std::string_view text, const rank_list& list) {
    rank_result r;
    double sum = 0.0;
    for (const auto& w : plain_words(text)) {
        ++r.tokens;
        if (const auto k = list.rank_of(w)) {
            ++r.found;
            sum += static_cast<double>(*k);
        }
    }
    if (r.found == 0) throw input_error("vocabulary_rank: no token appears in the rank list");
    r.mean_rank = sum / static_cast<double>(r.found);
    r.coverage = static_cast<double>(r.found) / static_cast<double>(r.tokens);
    return r;
}

struct rank_summary {
    std::size_t n_texts = 0;
    std::size_t n_scored = 0;
    double mean_rank = 0.0;  // mean over texts of each text's mean rank
    double sd_rank = 0.0;
    double mean_coverage = 0.0;
};

inline rank_summary summarize_ranks(const std::vector<std::string>& texts, const rank_list& list) {
    rank_summary s;
    s.n_texts = texts.size();
    std::vector<double> means;
    double cov = 0.0;
    for (const auto& t : texts) {
        try {
            const auto r = vocabulary_rank(t, list);
            means.push_back(r.mean_rank);
            cov += r.coverage;
        } catch (const input_error&) {
        }
    }
    s.n_scored = means.size();
    if (means.empty()) throw input_error("no text could be ranked");
    s.mean_rank = stats::mean(means);
    s.sd_rank = means.size() > 1 ? std::sqrt(stats::variance(means)) : 0.0;
    s.mean_coverage = cov / static_cast<double>(means.size());
    return s;
}

// ------------------------------------------------------------- length

/// Word-count descriptives by veracity for one condition, with the
/// truthful-minus-deceptive Cohen's d and its interval.
struct length_row {
    std::string condition;
    group_stats truthful;
    group_stats deceptive;
    stats::effect_size d;
};

inline length_row length_report(const std::string& condition, const std::vector<const statement*>& statements,
                                double level = 0.99) {
    std::vector<double> t, d;
    for (const auto* s : statements)
        (s->label == veracity::truthful ? t : d).push_back(static_cast<double>(s->word_count()));
    if (t.empty()) throw input_error("length_report: no truthful statements in condition " + condition);
    if (d.empty()) throw input_error("length_report: no deceptive statements in condition " + condition);
    length_row row;
    row.condition = condition;
    row.truthful = describe_values(t);
    row.deceptive = describe_values(d);
    row.d = stats::cohens_d_with_ci(t, d, level);
    return row;
}

}  // namespace decoy::validity
