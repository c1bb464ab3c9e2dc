#pragma once

#include <array>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "decoy/errors.hpp"

namespace decoy::text {

// Snowball English stop list; data/stopwords_en.txt carries the same 175 words.
inline constexpr std::array<std::string_view, 175> snowball_english_stopwords{
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "these",
    "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
    "does", "did", "doing", "would", "should", "could", "ought", "i'm", "you're", "he's", "she's", "it's",
    "we're", "they're", "i've", "you've", "we've", "they've", "i'd", "you'd", "he'd", "she'd", "we'd",
    "they'd", "i'll", "you'll", "he'll", "she'll", "we'll", "they'll", "isn't", "aren't", "wasn't",
    "weren't", "hasn't", "haven't", "hadn't", "doesn't", "don't", "didn't", "won't", "wouldn't", "shan't",
    "shouldn't", "can't", "cannot", "couldn't", "mustn't", "let's", "that's", "who's", "what's", "here's",
    "there's", "when's", "where's", "why's", "how's", "a", "an", "the", "and", "but", "if", "or", "because",
    "as", "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into",
    "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on",
    "off", "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
    "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "will",
};

class stopword_set {
  public:
    stopword_set() = default;

    template <typename Range>
    explicit stopword_set(const Range& words) {
        for (const auto& w : words) words_.emplace(w);
    }

    static stopword_set snowball_english() { return stopword_set(snowball_english_stopwords); }

    /// One word per line; blank lines and lines starting with '#' ignored.
    static stopword_set from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw input_error("cannot open stopword file: " + path);
        stopword_set s;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            s.words_.insert(line);
        }
        return s;
    }

    [[nodiscard]] bool contains(std::string_view w) const { return words_.count(std::string(w)) > 0; }
    [[nodiscard]] std::size_t size() const { return words_.size(); }
    [[nodiscard]] bool empty() const { return words_.empty(); }

  private:
    std::unordered_set<std::string> words_;
};

}  // namespace decoy::text
