#pragma once

// Text normalization and bag-of-n-grams features.
//
// Pipeline: tokenize (lowercase, drop stopwords, strip punctuation)
// -> stem each token -> expand to 1..3-grams joined by '_' -> count
// against a frozen FeatureSpace.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/errors.hpp"
#include "decoy/hash.hpp"
#include "decoy/text/porter2.hpp"
#include "decoy/text/stopwords.hpp"
#include "decoy/text/unicode.hpp"

namespace decoy {

using token_sequence = std::vector<std::string>;

inline constexpr char ngram_joiner = '_';

/// Lowercases, folds apostrophes, and splits on whitespace. Punctuation
/// is kept; callers decide what to strip.
inline std::vector<std::u32string> split_lower(std::string_view text) {
    std::vector<std::u32string> words;
    std::u32string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = text::next_code_point(text, i);
        if (text::is_space(cp)) {
            if (!current.empty()) words.push_back(std::move(current));
            current.clear();
        } else {
            current += text::fold_apostrophe(text::to_lower(cp));
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

inline std::string to_utf8(std::u32string_view s) {
    std::string out;
    for (char32_t cp : s) text::append_utf8(out, cp);
    return out;
}

/// Tokenizer for the classifier pipeline. A whitespace run is first
/// trimmed of edge punctuation and compared against the stop list (so
/// contractions such as "don't" match), then every remaining punctuation
/// character is removed.
class tokenizer {
  public:
    tokenizer() : stopwords_(text::stopword_set::snowball_english()) {}
    explicit tokenizer(text::stopword_set stopwords) : stopwords_(std::move(stopwords)) {}

    [[nodiscard]] token_sequence operator()(std::string_view text) const {
        token_sequence out;
        for (const auto& word : split_lower(text)) {
            std::size_t b = 0, e = word.size();
            while (b < e && text::is_punctuation(word[b])) ++b;
            while (e > b && text::is_punctuation(word[e - 1])) --e;
            if (b == e) continue;
            const std::u32string_view core(word.data() + b, e - b);
            if (stopwords_.contains(to_utf8(core))) continue;
            std::string token;
            for (char32_t cp : core)
                if (!text::is_punctuation(cp)) text::append_utf8(token, cp);
            if (token.empty() || stopwords_.contains(token)) continue;
            out.push_back(std::move(token));
        }
        return out;
    }

    [[nodiscard]] const text::stopword_set& stopwords() const { return stopwords_; }

  private:
    text::stopword_set stopwords_;
};

inline token_sequence tokenize(std::string_view text) {
    static const tokenizer default_tokenizer;
    return default_tokenizer(text);
}

/// Lowercase, punctuation-free words with no stopword removal. Used by the
/// validity metrics, which look words up in embedding and rank lists.
inline token_sequence plain_words(std::string_view text) {
    token_sequence out;
    for (const auto& word : split_lower(text)) {
        std::string token;
        for (char32_t cp : word)
            if (!text::is_punctuation(cp)) text::append_utf8(token, cp);
        if (!token.empty()) out.push_back(std::move(token));
    }
    return out;
}

inline token_sequence stem_all(const token_sequence& tokens) {
    token_sequence out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(text::stem(t));
    return out;
}

/// All contiguous n-grams for n in [n_min, n_max]; all unigrams first,
/// then bigrams, and so on, each in input order.
inline std::vector<std::string> extract_ngrams(const token_sequence& tokens, int n_min = 1, int n_max = 3) {
    if (n_min < 1 || n_max < n_min) throw input_error("extract_ngrams: require 1 <= n_min <= n_max");
    std::vector<std::string> out;
    const auto len = static_cast<std::ptrdiff_t>(tokens.size());
    for (int n = n_min; n <= n_max; ++n) {
        for (std::ptrdiff_t i = 0; i + n <= len; ++i) {
            std::string gram = tokens[static_cast<std::size_t>(i)];
            for (int k = 1; k < n; ++k) {
                gram += ngram_joiner;
                gram += tokens[static_cast<std::size_t>(i + k)];
            }
            out.push_back(std::move(gram));
        }
    }
    return out;
}

struct sparse_vector {
    std::vector<std::uint32_t> indices;  // strictly increasing
    std::vector<double> values;

    [[nodiscard]] std::size_t nnz() const { return indices.size(); }
    [[nodiscard]] bool empty() const { return indices.empty(); }
    friend bool operator==(const sparse_vector&, const sparse_vector&) = default;
};

struct feature_config {
    int ngram_min = 1;
    int ngram_max = 3;
    double min_doc_fraction = 0.01;
    double nzv_freq_ratio = 19.0;
    double nzv_unique_pct = 10.0;
    bool apply_nzv = true;
};

/// Frozen stemmed-n-gram vocabulary plus the selection record.
class feature_space {
  public:
    feature_space() = default;

    [[nodiscard]] const std::vector<std::string>& terms() const { return terms_; }
    [[nodiscard]] const std::vector<std::uint32_t>& doc_freq() const { return doc_freq_; }
    [[nodiscard]] const feature_config& config() const { return config_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] std::size_t n_train_docs() const { return n_train_docs_; }
    [[nodiscard]] std::size_t min_doc_count() const { return min_doc_count_; }
    [[nodiscard]] std::size_t pre_nzv_count() const { return pre_nzv_count_; }
    [[nodiscard]] std::size_t post_nzv_count() const { return terms_.size(); }

    /// Index of a term, or -1.
    [[nodiscard]] std::ptrdiff_t index_of(const std::string& term) const {
        const auto it = index_.find(term);
        return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    }

    /// Term counts of a stemmed document's n-gram expansion.
    [[nodiscard]] sparse_vector vectorize(const token_sequence& stemmed) const {
        std::map<std::uint32_t, double> counts;
        for (const auto& gram : extract_ngrams(stemmed, config_.ngram_min, config_.ngram_max)) {
            const auto it = index_.find(gram);
            if (it != index_.end()) counts[it->second] += 1.0;
        }
        sparse_vector v;
        v.indices.reserve(counts.size());
        v.values.reserve(counts.size());
        for (const auto& [i, c] : counts) {
            v.indices.push_back(i);
            v.values.push_back(c);
        }
        return v;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        return {
            {"format", "decoy.feature_space"},
            {"version", 1},
            {"ngram_min", config_.ngram_min},
            {"ngram_max", config_.ngram_max},
            {"min_doc_fraction", config_.min_doc_fraction},
            {"nzv_freq_ratio", config_.nzv_freq_ratio},
            {"nzv_unique_pct", config_.nzv_unique_pct},
            {"apply_nzv", config_.apply_nzv},
            {"n_train_docs", n_train_docs_},
            {"min_doc_count", min_doc_count_},
            {"pre_nzv_count", pre_nzv_count_},
            {"post_nzv_count", terms_.size()},
            {"terms", terms_},
            {"doc_freq", doc_freq_},
        };
    }

    static feature_space from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "decoy.feature_space" || j.value("version", 0) != 1)
            throw input_error("not a version-1 feature space file");
        feature_space s;
        s.config_.ngram_min = j.at("ngram_min").get<int>();
        s.config_.ngram_max = j.at("ngram_max").get<int>();
        s.config_.min_doc_fraction = j.at("min_doc_fraction").get<double>();
        s.config_.nzv_freq_ratio = j.at("nzv_freq_ratio").get<double>();
        s.config_.nzv_unique_pct = j.at("nzv_unique_pct").get<double>();
        s.config_.apply_nzv = j.value("apply_nzv", true);
        s.n_train_docs_ = j.at("n_train_docs").get<std::size_t>();
        s.min_doc_count_ = j.at("min_doc_count").get<std::size_t>();
        s.pre_nzv_count_ = j.at("pre_nzv_count").get<std::size_t>();
        s.terms_ = j.at("terms").get<std::vector<std::string>>();
        s.doc_freq_ = j.at("doc_freq").get<std::vector<std::uint32_t>>();
        if (s.terms_.size() != s.doc_freq_.size()) throw input_error("feature space: terms/doc_freq length mismatch");
        if (j.at("post_nzv_count").get<std::size_t>() != s.terms_.size())
            throw input_error("feature space: post_nzv_count disagrees with term list");
        if (!std::is_sorted(s.terms_.begin(), s.terms_.end()) ||
            std::adjacent_find(s.terms_.begin(), s.terms_.end()) != s.terms_.end())
            throw input_error("feature space: terms must be unique and sorted");
        s.rebuild_index();
        return s;
    }

    /// SHA-256 of the canonical JSON form; models record it to pin their space.
    [[nodiscard]] std::string hash() const { return sha256_hex(to_json().dump()); }

  private:
    friend feature_space build_feature_space(const std::vector<token_sequence>&, const feature_config&);

    void rebuild_index() {
        index_.clear();
        index_.reserve(terms_.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }

    std::vector<std::string> terms_;
    std::vector<std::uint32_t> doc_freq_;
    feature_config config_;
    std::size_t n_train_docs_ = 0;
    std::size_t min_doc_count_ = 0;
    std::size_t pre_nzv_count_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

namespace detail {

struct value_distribution {
    double freq_ratio;   // most common / second most common value count
    double unique_pct;   // 100 * distinct values / documents
    bool zero_variance;
};

/// Distribution of one term's per-document counts, zeros included.
inline value_distribution describe_counts(const std::map<std::uint32_t, std::uint32_t>& nonzero_value_counts,
                                          std::size_t n_docs) {
    std::vector<std::size_t> freqs;
    std::size_t nonzero_docs = 0;
    for (const auto& [value, docs] : nonzero_value_counts) {
        freqs.push_back(docs);
        nonzero_docs += docs;
    }
    if (nonzero_docs < n_docs) freqs.push_back(n_docs - nonzero_docs);
    std::sort(freqs.begin(), freqs.end(), std::greater<>());
    value_distribution d{};
    d.unique_pct = 100.0 * static_cast<double>(freqs.size()) / static_cast<double>(n_docs);
    d.zero_variance = freqs.size() <= 1;
    d.freq_ratio = d.zero_variance ? 0.0 : static_cast<double>(freqs[0]) / static_cast<double>(freqs[1]);
    return d;
}

}  // namespace detail

/// Near-zero-variance rule: too lopsided AND too few distinct values, or constant.
inline bool near_zero_variance(const detail::value_distribution& d, const feature_config& cfg) {
    if (d.zero_variance) return true;
    return d.freq_ratio > cfg.nzv_freq_ratio && d.unique_pct < cfg.nzv_unique_pct;
}

/// Document-frequency filter followed by the near-zero-variance filter.
inline feature_space build_feature_space(const std::vector<token_sequence>& train_docs,
                                         const feature_config& cfg = {}) {
    if (train_docs.empty()) throw input_error("build_feature_space: no training documents");
    if (cfg.min_doc_fraction < 0.0 || cfg.min_doc_fraction > 1.0)
        throw input_error("build_feature_space: min_doc_fraction must lie in [0, 1]");

    const std::size_t n_docs = train_docs.size();
    // presence-based document frequency; the epsilon keeps 0.01 * 100 at 1
    const auto min_count = static_cast<std::size_t>(
        std::max(0.0, std::ceil(cfg.min_doc_fraction * static_cast<double>(n_docs) - 1e-9)));

    std::unordered_map<std::string, std::uint32_t> df;
    std::vector<std::unordered_map<std::string, std::uint32_t>> per_doc(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        for (auto& gram : extract_ngrams(train_docs[d], cfg.ngram_min, cfg.ngram_max)) ++per_doc[d][gram];
        for (const auto& [gram, count] : per_doc[d]) ++df[gram];
    }

    std::vector<std::string> kept;
    for (const auto& [gram, f] : df)
        if (f >= min_count && f > 0) kept.push_back(gram);
    std::sort(kept.begin(), kept.end());
    const std::size_t pre_nzv = kept.size();

    if (cfg.apply_nzv) {
        std::unordered_map<std::string, std::map<std::uint32_t, std::uint32_t>> value_counts;
        std::unordered_set<std::string> candidates(kept.begin(), kept.end());
        for (const auto& doc : per_doc)
            for (const auto& [gram, count] : doc)
                if (candidates.count(gram)) ++value_counts[gram][count];
        std::vector<std::string> survivors;
        for (const auto& term : kept) {
            const auto dist = detail::describe_counts(value_counts[term], n_docs);
            if (!near_zero_variance(dist, cfg)) survivors.push_back(term);
        }
        kept = std::move(survivors);
    }
    if (kept.empty()) throw input_error("empty feature space: every n-gram was filtered out");

    feature_space s;
    s.config_ = cfg;
    s.n_train_docs_ = n_docs;
    s.min_doc_count_ = min_count;
    s.pre_nzv_count_ = pre_nzv;
    s.doc_freq_.reserve(kept.size());
    for (const auto& t : kept) s.doc_freq_.push_back(df.at(t));
    s.terms_ = std::move(kept);
    s.rebuild_index();
    return s;
}

/// tokenize -> stem, the form build_feature_space and vectorize expect.
inline token_sequence prepare_document(std::string_view text, const tokenizer& tok) { return stem_all(tok(text)); }

inline token_sequence prepare_document(std::string_view text) { return stem_all(tokenize(text)); }

}  // namespace decoy
