#include <gtest/gtest.h>

#include <random>

#include "decoy/report.hpp"

using namespace decoy;
using namespace decoy::report;

namespace {

table classification_table(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0, 1);
    table t{"Classification", classification_columns(), {}, {}};
    for (const char* cond : {"original", "unguided | gpt", "guided", "human_targeted"}) {
        stats::metrics_report r;
        r.condition = cond;
        r.n = 505;
        r.accuracy = u(gen);
        r.auc = u(gen);
        r.auc_ci = std::pair{*r.auc - 0.05 * u(gen), *r.auc + 0.05 * u(gen)};
        if (std::string(cond) == "original") r.auc_ci.reset();
        r.truthful.precision = u(gen);
        r.truthful.recall = u(gen);
        r.deceptive.precision = u(gen);
        r.deceptive.recall = std::string(cond) == "guided" ? std::optional<double>{} : u(gen);
        t.rows.push_back(classification_row(r));
    }
    return t;
}

}  // namespace

TEST(Format, FourDecimals) {
    EXPECT_EQ(fmt(0.5), "0.5000");
    EXPECT_EQ(fmt(0.123456), "0.1235");
    EXPECT_EQ(fmt(-0.00001), "0.0000");
    EXPECT_EQ(fmt(310.66), "310.6600");
    EXPECT_DOUBLE_EQ(round_reported(0.123456), 0.1235);
}

TEST(Markdown, ClassificationShape) {
    std::mt19937_64 gen(1);
    const auto md = to_markdown(classification_table(gen));
    EXPECT_NE(md.find("## Classification"), std::string::npos);
    EXPECT_NE(md.find("| Condition | n | Accuracy | AUC [99% CI] |"), std::string::npos);
    EXPECT_NE(md.find("n/a"), std::string::npos);
    EXPECT_NE(md.find("unguided \\| gpt"), std::string::npos);
}

TEST(Markdown, RoundTripKeepsReportedDigits) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto t = classification_table(gen);
        t.notes = {"Seed 42."};
        const auto back = parse_markdown(to_markdown(t), {t});
        ASSERT_EQ(back.size(), 1u);
        EXPECT_EQ(back[0].rows, reported_rows(t));
        EXPECT_EQ(back[0].notes, t.notes);
    }
}

TEST(Markdown, LengthAndAnovaRoundTrip) {
    validity::length_row lr{"original", {243, 310.66, 98.16}, {262, 274.91, 102.28}, {}};
    lr.d.d = 0.3564;
    lr.d.ci_low = 0.1253;
    lr.d.ci_high = 0.5875;
    table lt{"Length", length_columns(), {length_row_json(lr)}, {}};

    stats::anova_table at;
    at.effects = {{"A", 32.0, 1, 16.0, 0.0161, 0.8}, {"B", 2.0, 1, 1.0, 0.3739, 0.2}};
    at.ss_error = 8.0;
    at.df_error = 4;
    table an{"Anova", anova_columns(), anova_rows(at), {}};

    const auto md = to_markdown(lt) + "\n" + to_markdown(an);
    EXPECT_NE(md.find("310.6600 (98.1600)"), std::string::npos);
    EXPECT_NE(md.find("0.3564 [0.1253; 0.5875]"), std::string::npos);
    const auto back = parse_markdown(md, {lt, an});
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].rows, reported_rows(lt));
    EXPECT_EQ(back[1].rows, reported_rows(an));
    EXPECT_EQ(back[1].rows.back()["effect"], "Residual");
}

TEST(Markdown, RejectsWrongHeaderAndBadCells) {
    table t{"T", anova_columns(), {}, {}};
    EXPECT_THROW(parse_markdown("## T\n\n| Effect | SS |\n| --- | --- |\n", {t}), input_error);
    EXPECT_THROW(parse_markdown("## T\n\n| Effect | SS | df | F | p | Partial eta^2 |\n| --- | --- | --- | --- | --- | --- |\n"
                                "| A | x | 1 | 1 | 1 | 1 |\n",
                                {t}),
                 input_error);
    EXPECT_TRUE(parse_markdown("## Other\n\n| a |\n", {t}).empty());
}

TEST(Validity, RowFromSummaries) {
    validity::similarity_summary s;
    s.n_pairs = 3;
    s.mean = 0.91;
    s.sd = 0.02;
    s.shares = {{0.80, 1.0}, {0.90, 2.0 / 3.0}};
    validity::rank_summary r;
    r.mean_rank = 812.5;
    r.sd_rank = 40.0;
    r.mean_coverage = 0.93;
    table t{"Validity", similarity_columns(), {validity_row("guided", s, r), validity_row("original", std::nullopt, r)}, {}};
    const auto md = to_markdown(t);
    EXPECT_NE(md.find("| guided | 3 | 0.9100 (0.0200) | 1.0000 | 0.6667 | 812.5000 (40.0000) | 0.9300 |"), std::string::npos)
        << md;
    EXPECT_EQ(parse_markdown(md, {t})[0].rows, reported_rows(t));
}

TEST(Manifest, HashesArtifacts) {
    const auto path = (std::filesystem::temp_directory_path() / "decoy_manifest_probe.txt").string();
    std::ofstream(path) << "abc";
    run_manifest m;
    m.command = "train";
    m.seed = 42;
    m.add_output("model", path);
    const auto j = to_json(m);
    EXPECT_EQ(j["outputs"][0]["sha256"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(j["format"], "decoy.run_manifest");
    std::filesystem::remove(path);
    EXPECT_THROW(m.add_input("x", path), input_error);
}
