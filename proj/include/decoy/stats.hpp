#pragma once

// Estimators behind every reported number: Cohen's d with a normal-theory
// interval, Mann-Whitney AUC with a bootstrap interval, confusion metrics,
// and the special functions the F test needs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "decoy/corpus.hpp"
#include "decoy/errors.hpp"
#include "decoy/rng.hpp"

namespace decoy::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw input_error("mean of empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance (n-1 denominator).
inline double variance(std::span<const double> x) {
    if (x.size() < 2) throw input_error("variance needs at least two observations");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

// ------------------------------------------------------------ normal

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step against erfc, good to ~1e-15 in double precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw input_error("normal_quantile: p outside [0, 1]");
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

/// Two-sided critical value for a confidence level, e.g. 0.99 -> 2.5758.
inline double z_critical(double level) {
    if (level < 0.0 || level >= 1.0) throw input_error("confidence level must lie in [0, 1)");
    if (level == 0.0) return 0.0;
    return normal_quantile(0.5 + level / 2.0);
}

// ------------------------------------------------------- effect size

struct effect_size {
    double d = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.99;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Standardized mean difference from summary moments; a is the truthful group.
inline double cohens_d_from_moments(double mean_a, double sd_a, std::size_t n_a, double mean_b, double sd_b,
                                    std::size_t n_b) {
    if (n_a < 2 || n_b < 2) throw input_error("cohens_d: each sample needs at least two observations");
    const double pooled_var = ((static_cast<double>(n_a) - 1) * sd_a * sd_a + (static_cast<double>(n_b) - 1) * sd_b * sd_b) /
                              static_cast<double>(n_a + n_b - 2);
    if (!(pooled_var > 0.0)) throw input_error("cohens_d: pooled variance is zero");
    return (mean_a - mean_b) / std::sqrt(pooled_var);
}

inline double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw input_error("cohens_d: each sample needs at least two observations");
    return cohens_d_from_moments(mean(a), std::sqrt(variance(a)), a.size(), mean(b), std::sqrt(variance(b)),
                                 b.size());
}

/// Normal-approximation interval: d +- z * sqrt((n1+n2)/(n1 n2) + d^2 / (2 (n1+n2))).
inline std::pair<double, double> cohens_d_ci(double d, std::size_t n1, std::size_t n2, double level = 0.99) {
    const double n1d = static_cast<double>(n1), n2d = static_cast<double>(n2);
    const double se = std::sqrt((n1d + n2d) / (n1d * n2d) + d * d / (2.0 * (n1d + n2d)));
    const double half = z_critical(level) * se;
    return {d - half, d + half};
}

inline effect_size cohens_d_with_ci(std::span<const double> a, std::span<const double> b, double level = 0.99) {
    effect_size e;
    e.d = cohens_d(a, b);
    std::tie(e.ci_low, e.ci_high) = cohens_d_ci(e.d, a.size(), b.size(), level);
    e.level = level;
    e.n1 = a.size();
    e.n2 = b.size();
    return e;
}

// --------------------------------------------------------------- AUC

/// P(truthful score > deceptive score), ties counted one half. Rank-based,
/// O((n1+n2) log(n1+n2)).
inline double auc(std::span<const double> truthful, std::span<const double> deceptive) {
    if (truthful.empty() || deceptive.empty()) throw input_error("auc: both samples must be non-empty");
    std::vector<std::pair<double, bool>> all;
    all.reserve(truthful.size() + deceptive.size());
    for (double v : truthful) all.emplace_back(v, true);
    for (double v : deceptive) all.emplace_back(v, false);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    // sum of (mid)ranks of the truthful sample
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        std::size_t pos = 0;
        while (j < all.size() && all[j].first == all[i].first) {
            if (all[j].second) ++pos;
            ++j;
        }
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        rank_sum += mid_rank * static_cast<double>(pos);
        i = j;
    }
    const double n1 = static_cast<double>(truthful.size()), n2 = static_cast<double>(deceptive.size());
    const double u = rank_sum - n1 * (n1 + 1) / 2.0;
    return u / (n1 * n2);
}

/// Linear-interpolation (type 7) sample quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw input_error("quantile of empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct bootstrap_options {
    double level = 0.99;
    std::size_t resamples = 2000;
    std::uint64_t seed = 0;
};

/// Stratified bootstrap percentile interval for the AUC. Resample r draws
/// from its own derived seed, so resamples are order-independent.
inline std::pair<double, double> auc_ci(std::span<const double> truthful, std::span<const double> deceptive,
                                        const bootstrap_options& opt = {}) {
    if (truthful.size() < 2 || deceptive.size() < 2) throw input_error("auc_ci: each sample needs at least two scores");
    if (opt.resamples == 0) throw input_error("auc_ci: resamples must be positive");
    std::vector<double> aucs(opt.resamples);
    std::vector<double> t(truthful.size()), d(deceptive.size());
    for (std::size_t r = 0; r < opt.resamples; ++r) {
        rng gen(derive_seed(opt.seed, r));
        for (auto& v : t) v = truthful[gen.below(truthful.size())];
        for (auto& v : d) v = deceptive[gen.below(deceptive.size())];
        aucs[r] = auc(t, d);
    }
    std::sort(aucs.begin(), aucs.end());
    const double alpha = 1.0 - opt.level;
    return {quantile_sorted(aucs, alpha / 2.0), quantile_sorted(aucs, 1.0 - alpha / 2.0)};
}

// ------------------------------------------------------- confusion

struct class_metrics {
    std::optional<double> precision;  // undefined when the class is never predicted
    std::optional<double> recall;     // undefined when the class is absent from the labels
    std::size_t support = 0;
    std::size_t predicted = 0;
    std::size_t true_positive = 0;
};

struct metrics_report {
    std::string condition;
    std::size_t n = 0;
    double accuracy = 0.0;
    std::optional<double> auc;
    std::optional<std::pair<double, double>> auc_ci;
    class_metrics truthful;
    class_metrics deceptive;
    std::vector<std::string> warnings;
};

inline metrics_report confusion_metrics(std::span<const veracity> predicted, std::span<const veracity> actual) {
    if (predicted.size() != actual.size()) throw input_error("confusion_metrics: length mismatch");
    if (actual.empty()) throw input_error("confusion_metrics: no observations");
    metrics_report r;
    r.n = actual.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        auto& cls = actual[i] == veracity::truthful ? r.truthful : r.deceptive;
        auto& pred_cls = predicted[i] == veracity::truthful ? r.truthful : r.deceptive;
        ++cls.support;
        ++pred_cls.predicted;
        if (predicted[i] == actual[i]) {
            ++correct;
            ++cls.true_positive;
        }
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
    for (auto* c : {&r.truthful, &r.deceptive}) {
        const char* name = c == &r.truthful ? "truthful" : "deceptive";
        if (c->support > 0)
            c->recall = static_cast<double>(c->true_positive) / static_cast<double>(c->support);
        else
            r.warnings.push_back(std::string("class ") + name + " absent from labels: recall undefined");
        if (c->predicted > 0)
            c->precision = static_cast<double>(c->true_positive) / static_cast<double>(c->predicted);
        else
            r.warnings.push_back(std::string("class ") + name + " never predicted: precision undefined");
    }
    return r;
}

// ----------------------------------------------- incomplete beta, F

namespace detail {

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double md = m;
        const double m2 = 2.0 * md;
        double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw invariant_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw input_error("incomplete_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper tail P(F > f) of the F distribution with (df1, df2) degrees of freedom.
inline double f_upper_tail(double f, double df1, double df2) {
    if (df1 <= 0.0 || df2 <= 0.0) throw input_error("f_upper_tail: degrees of freedom must be positive");
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

}  // namespace decoy::stats
