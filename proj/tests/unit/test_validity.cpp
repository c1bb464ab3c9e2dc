#include <gtest/gtest.h>

#include <random>

#include "decoy/validity.hpp"
#include "support.hpp"

using namespace decoy;
using namespace decoy::validity;
using testsupport::temp_dir;

namespace {

embedding_provider toy_provider() {
    return embedding_provider::from_map(
        {{"x", {1, 0}}, {"y", {0, 1}}, {"xy", {1, 1}}, {"neg", {-1, 0}}, {"a", {0.9, 0.1}}, {"b", {0.1, 0.9}}},
        "toy");
}

}  // namespace

TEST(Embed, MeanPooling) {
    const auto p = toy_provider();
    EXPECT_EQ(embed("x", p).values, (vec{1, 0}));
    const auto e = embed("X, y!", p);
    EXPECT_EQ(e.values, (vec{0.5, 0.5}));
    EXPECT_DOUBLE_EQ(e.coverage, 1.0);
    EXPECT_DOUBLE_EQ(embed("x unknown", p).coverage, 0.5);
    try {
        embed("nothing known here", p);
        FAIL();
    } catch (const input_error& err) {
        EXPECT_NE(std::string(err.what()).find("unembeddable text"), std::string::npos);
    }
}

TEST(Cosine, Fixtures) {
    EXPECT_NEAR(cosine({1, 2, 3}, {1, 2, 3}), 1.0, 1e-8);
    EXPECT_NEAR(cosine({1, 0}, {0, 1}), 0.0, 1e-8);
    EXPECT_NEAR(cosine({1, 1}, {1, 0}), 0.70710678, 1e-8);
    EXPECT_THROW(cosine({0, 0}, {1, 0}), input_error);
    EXPECT_THROW(cosine({1}, {1, 0}), input_error);
    EXPECT_DOUBLE_EQ(reported_similarity(cosine({1, 0}, {-1, 0})), 0.0);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> pos(0.01, 100);
    for (int t = 0; t < 500; ++t) {
        vec u(8), v(8);
        for (auto& x : u) x = nd(gen);
        for (auto& x : v) x = nd(gen);
        const double c = cosine(u, v);
        EXPECT_NEAR(cosine(v, u), c, 1e-12);
        const double a = pos(gen), b = pos(gen);
        auto su = u, sv = v;
        for (auto& x : su) x *= a;
        for (auto& x : sv) x *= b;
        EXPECT_NEAR(cosine(su, sv), c, 1e-10);
    }
}

TEST(Similarity, IdenticalPairs) {
    const auto p = toy_provider();
    const auto r = similarity_report({{"1", "x y", "x y"}, {"2", "a b", "b a"}}, p);
    EXPECT_NEAR(r.mean, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.share_at(0.80), 1.0);
    EXPECT_DOUBLE_EQ(r.share_at(0.90), 1.0);
    EXPECT_EQ(r.provider, "toy");
}

TEST(Similarity, ThresholdCounting) {
    // cos(theta) = 0.85 and 0.95 via unit vectors at those angles
    const double c1 = 0.85, c2 = 0.95;
    const auto p = embedding_provider::from_map(
        {{"o", {1, 0}}, {"m1", {c1, std::sqrt(1 - c1 * c1)}}, {"m2", {c2, std::sqrt(1 - c2 * c2)}}}, "angles");
    const auto r = similarity_report({{"1", "o", "m1"}, {"2", "o", "m2"}, {"3", "zzz", "o"}}, p);
    EXPECT_DOUBLE_EQ(r.share_at(0.80), 1.0);
    EXPECT_DOUBLE_EQ(r.share_at(0.90), 0.5);
    EXPECT_EQ(r.unembeddable, (std::vector<std::string>{"3"}));
    EXPECT_NEAR(r.mean, 0.9, 1e-12);
}

TEST(Similarity, SharesMonotoneInThreshold) {
    std::mt19937_64 gen(8);
    std::unordered_map<std::string, vec> words;
    std::normal_distribution<double> nd;
    for (int i = 0; i < 50; ++i) words["w" + std::to_string(i)] = {nd(gen), nd(gen), nd(gen)};
    const auto p = embedding_provider::from_map(words, "rand");
    std::vector<text_pair> pairs;
    for (int i = 0; i < 60; ++i)
        pairs.push_back({std::to_string(i), "w" + std::to_string(gen() % 50) + " w" + std::to_string(gen() % 50),
                         "w" + std::to_string(gen() % 50)});
    std::vector<double> th;
    for (int i = 0; i <= 20; ++i) th.push_back(i / 20.0);
    const auto r = similarity_report(pairs, p, th);
    for (std::size_t i = 1; i < r.shares.size(); ++i) EXPECT_LE(r.shares[i].second, r.shares[i - 1].second);
}

TEST(Similarity, CompareConditions) {
    const auto p = toy_provider();
    const auto hi = similarity_report({{"1", "x", "x"}, {"2", "x", "a"}, {"3", "y", "b"}}, p);
    const auto lo = similarity_report({{"1", "x", "xy"}, {"2", "x", "b"}, {"3", "y", "xy"}}, p);
    EXPECT_GT(compare_similarity(hi, lo).d, 0.0);
}

TEST(EmbeddingFile, ParsesWithAndWithoutHeader) {
    temp_dir d;
    const auto with = d.write("w.vec", "3 2\nx 1 0\ny 0 1\nxy 1 1\n");
    const auto p = embedding_provider::from_file(with);
    EXPECT_EQ(p.dimension(), 2u);
    EXPECT_EQ(p.vocabulary_size(), 3u);
    EXPECT_NE(p.fingerprint().find("sha256="), std::string::npos);
    const auto without = d.write("w.txt", "x 1 0 0\ny 0 1 0\n");
    EXPECT_EQ(embedding_provider::from_file(without).dimension(), 3u);
    EXPECT_THROW(embedding_provider::from_file(d.write("bad.txt", "x 1 0\ny 1\n")), input_error);
    EXPECT_THROW(embedding_provider::from_file(d.write("nan.txt", "x 1 zz\n")), input_error);
}

TEST(Rank, Fixtures) {
    std::vector<std::string> words(1000);
    for (std::size_t i = 0; i < words.size(); ++i) words[i] = "w" + std::to_string(i + 1);
    words[0] = "the";
    words[1] = "of";
    words[999] = "zebra";
    const auto list = rank_list::from_words(words);
    const auto r = vocabulary_rank("The of zebra", list);
    EXPECT_NEAR(r.mean_rank, 334.33, 1e-2);
    EXPECT_DOUBLE_EQ(r.coverage, 1.0);
    EXPECT_DOUBLE_EQ(vocabulary_rank("the", list).mean_rank, 1.0);
    const auto partial = vocabulary_rank("the unknownword", list);
    EXPECT_DOUBLE_EQ(partial.coverage, 0.5);
    EXPECT_DOUBLE_EQ(partial.mean_rank, 1.0);
    EXPECT_THROW(vocabulary_rank("nothing listed", list), input_error);
    // order and whitespace invariance
    EXPECT_DOUBLE_EQ(vocabulary_rank("zebra   of\tthe", list).mean_rank, r.mean_rank);
}

TEST(Rank, FileAndSummary) {
    temp_dir d;
    const auto path = d.write("ranks.txt", "the\nof\nand\nzebra\n");
    const auto list = rank_list::from_file(path);
    EXPECT_EQ(list.rank_of("zebra"), 4u);
    const auto s = summarize_ranks({"the of", "zebra", "qqq"}, list);
    EXPECT_EQ(s.n_scored, 2u);
    EXPECT_DOUBLE_EQ(s.mean_rank, (1.5 + 4.0) / 2);
}

TEST(Length, Examples) {
    auto words = [](int n) {
        std::string t;
        for (int k = 0; k < n; ++k) t += "w ";
        return t;
    };
    std::vector<statement> ss;
    int i = 0;
    for (int n : {2, 4, 6}) ss.push_back({"t" + std::to_string(i++), words(n), veracity::truthful, split::test, {}});
    for (int n : {1, 3, 5}) ss.push_back({"d" + std::to_string(i++), words(n), veracity::deceptive, split::test, {}});
    const corpus c(ss);
    const auto row = length_report("original", c.select(split::test));
    EXPECT_NEAR(row.d.d, 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(row.truthful.mean, 4.0);
    EXPECT_LE(row.d.ci_low, row.d.d);

    std::vector<statement> same;
    for (int n : {2, 4, 6}) same.push_back({"t" + std::to_string(i++), words(n), veracity::truthful, split::test, {}});
    for (int n : {2, 4, 6}) same.push_back({"d" + std::to_string(i++), words(n), veracity::deceptive, split::test, {}});
    EXPECT_NEAR(length_report("same", corpus(same).select(split::test)).d.d, 0.0, 1e-12);
    EXPECT_THROW(length_report("empty", corpus(same).select(split::train)), input_error);
}
