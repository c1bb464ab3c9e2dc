#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <random>

#include "decoy/stats.hpp"
#include "oracles/oracles.hpp"

using namespace decoy;
using namespace decoy::stats;

TEST(CohensD, Examples) {
    const std::vector<double> a{2, 4, 6}, b{1, 3, 5};
    EXPECT_NEAR(cohens_d(a, b), 0.5, 1e-12);
    EXPECT_NEAR(cohens_d(a, a), 0.0, 1e-12);
    const double d = cohens_d_from_moments(310.66, 98.16, 243, 274.91, 102.28, 262);
    EXPECT_NEAR(d, 0.37, 0.02);
    const auto [lo, hi] = cohens_d_ci(d, 243, 262);
    EXPECT_NEAR(lo, 0.14, 0.03);
    EXPECT_NEAR(hi, 0.60, 0.03);
}

TEST(CohensD, HandComputedFixture) {
    // pooled var = (2*4 + 2*4)/4 = 4, d = 1/2; SE = sqrt(6/9 + 0.25/12)
    const std::vector<double> a{2, 4, 6}, b{1, 3, 5};
    const auto e = cohens_d_with_ci(a, b, 0.95);
    const double se = std::sqrt(6.0 / 9.0 + 0.25 / 12.0);
    const double z = boost::math::quantile(boost::math::normal(), 0.975);
    EXPECT_NEAR(e.ci_low, 0.5 - z * se, 1e-8);
    EXPECT_NEAR(e.ci_high, 0.5 + z * se, 1e-8);
    EXPECT_LE(e.ci_low, e.d);
    EXPECT_GE(e.ci_high, e.d);
}

TEST(CohensD, IntervalExamples) {
    const auto [lo, hi] = cohens_d_ci(0.0, 100, 100);
    EXPECT_NEAR(lo, -hi, 1e-12);
    EXPECT_NEAR(hi, 2.5758293035489 * std::sqrt(0.02), 1e-8);
    const auto [l0, h0] = cohens_d_ci(0.42, 30, 40, 0.0);
    EXPECT_DOUBLE_EQ(l0, 0.42);
    EXPECT_DOUBLE_EQ(h0, 0.42);
}

TEST(CohensD, Errors) {
    const std::vector<double> flat{3, 3, 3}, one{1};
    EXPECT_THROW(cohens_d(flat, flat), input_error);
    EXPECT_THROW(cohens_d(one, flat), input_error);
}

TEST(CohensD, AntisymmetricAndAffineInvariant) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(2 + gen() % 30), b(2 + gen() % 30);
        for (auto& v : a) v = nd(gen) + 0.3;
        for (auto& v : b) v = nd(gen);
        const double d = cohens_d(a, b);
        EXPECT_NEAR(cohens_d(b, a), -d, 1e-12);
        const double shift = nd(gen) * 10, scale = 0.1 + (gen() % 1000) / 100.0;
        auto ta = a, tb = b;
        for (auto& v : ta) v = v * scale + shift;
        for (auto& v : tb) v = v * scale + shift;
        EXPECT_NEAR(cohens_d(ta, tb), d, 1e-9);
    }
}

TEST(NormalQuantile, MatchesBoost) {
    const boost::math::normal n;
    for (double p : {1e-10, 1e-5, 0.001, 0.005, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.975, 0.995, 0.99999})
        EXPECT_NEAR(normal_quantile(p), boost::math::quantile(n, p), 1e-12) << p;
    EXPECT_NEAR(z_critical(0.99), 2.5758293035489004, 1e-12);
}

TEST(Auc, Examples) {
    const std::vector<double> a{3, 4}, b{1, 2}, c{1, 2}, d{0.9, 0.4}, e{0.5, 0.1};
    EXPECT_DOUBLE_EQ(auc(a, b), 1.0);
    EXPECT_DOUBLE_EQ(auc(b, c), 0.5);
    EXPECT_DOUBLE_EQ(auc(d, e), 0.75);
}

TEST(Auc, MatchesBruteForceOnRandomCases) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n1 = 1 + gen() % 200, n2 = 1 + gen() % 200;
        // coarse values force plenty of ties
        const int levels = 1 + static_cast<int>(gen() % 50);
        std::vector<double> t(n1), d(n2);
        for (auto& v : t) v = static_cast<double>(gen() % levels);
        for (auto& v : d) v = static_cast<double>(gen() % levels) - 0.5 * (trial % 3);
        EXPECT_EQ(auc(t, d), oracle::brute_auc(t, d)) << "trial " << trial;
        EXPECT_NEAR(auc(t, d), 1.0 - auc(d, t), 1e-12);
    }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<double> t(80), d(70);
    for (auto& v : t) v = u(gen) + 0.5;
    for (auto& v : d) v = u(gen);
    auto tt = t, td = d;
    for (auto& v : tt) v = std::exp(v) * 3 + 1;
    for (auto& v : td) v = std::exp(v) * 3 + 1;
    EXPECT_DOUBLE_EQ(auc(t, d), auc(tt, td));
}

TEST(AucCi, SeparatedAndNull) {
    std::vector<double> hi_s(100), lo_s(100);
    for (int i = 0; i < 100; ++i) {
        hi_s[i] = 10 + i;
        lo_s[i] = -i;
    }
    const auto [l1, h1] = auc_ci(hi_s, lo_s, {0.99, 500, 1});
    EXPECT_DOUBLE_EQ(h1, 1.0);
    EXPECT_DOUBLE_EQ(l1, 1.0);

    std::mt19937_64 gen(9);
    std::normal_distribution<double> nd;
    std::vector<double> a(200), b(200);
    for (auto& v : a) v = nd(gen);
    for (auto& v : b) v = nd(gen);
    const auto [l2, h2] = auc_ci(a, b, {0.99, 2000, 42});
    EXPECT_LE(l2, 0.5);
    EXPECT_GE(h2, 0.5);
    const auto again = auc_ci(a, b, {0.99, 2000, 42});
    EXPECT_EQ(again.first, l2);
    EXPECT_EQ(again.second, h2);
}

TEST(Confusion, Examples) {
    using V = veracity;
    std::vector<V> all{V::truthful, V::deceptive, V::truthful};
    auto r = confusion_metrics(all, all);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(*r.truthful.precision, 1.0);
    EXPECT_DOUBLE_EQ(*r.deceptive.recall, 1.0);

    std::vector<V> actual(10, V::truthful), pred(10, V::deceptive);
    for (int i = 0; i < 4; ++i) pred[i] = V::truthful;
    actual.push_back(V::deceptive);
    pred.push_back(V::deceptive);
    r = confusion_metrics(pred, actual);
    EXPECT_DOUBLE_EQ(*r.truthful.recall, 0.4);
    EXPECT_DOUBLE_EQ(*r.truthful.precision, 1.0);
    // accuracy equals support-weighted mean of recalls
    EXPECT_NEAR(r.accuracy, (*r.truthful.recall * 10 + *r.deceptive.recall * 1) / 11.0, 1e-12);
}

TEST(Confusion, AbsentClassIsFlagged) {
    using V = veracity;
    std::vector<V> actual{V::truthful, V::truthful}, pred{V::truthful, V::truthful};
    const auto r = confusion_metrics(pred, actual);
    EXPECT_FALSE(r.deceptive.recall.has_value());
    EXPECT_FALSE(r.deceptive.precision.has_value());
    EXPECT_EQ(r.warnings.size(), 2u);
    EXPECT_THROW(confusion_metrics(std::vector<V>{V::truthful}, actual), input_error);
}

TEST(IncompleteBeta, MatchesBoost) {
    for (double a : {0.5, 1.0, 2.5, 10.0, 150.0})
        for (double b : {0.5, 1.0, 3.0, 40.0, 1500.0})
            for (double x : {0.0, 1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0})
                EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10)
                    << a << " " << b << " " << x;
}

TEST(FTail, MatchesBoostAndTables) {
    for (double d1 : {1.0, 2.0, 5.0})
        for (double d2 : {4.0, 20.0, 2986.0})
            for (double f : {0.0, 0.5, 1.0, 4.0, 16.0, 46.0}) {
                const double ref = f == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
                EXPECT_NEAR(f_upper_tail(f, d1, d2), ref, 1e-10) << d1 << " " << d2 << " " << f;
            }
    // F(1, 10) critical value at .05 is 4.9646
    EXPECT_NEAR(f_upper_tail(4.964602743730711, 1, 10), 0.05, 1e-10);
}
