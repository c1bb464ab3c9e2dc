#pragma once

// Between-subjects fixed-effects factorial ANOVA (up to three factors) with
// Type II sums of squares, computed as differences of residual sums of
// squares between nested least-squares fits under sum-to-zero coding.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decoy/errors.hpp"
#include "decoy/stats.hpp"

namespace decoy::stats {

struct anova_observation {
    double value = 0.0;
    std::vector<std::string> levels;  // one level label per factor
};

struct anova_effect {
    std::string name;  // "A", "A:B", ...
    double ss = 0.0;
    int df = 0;
    double f = 0.0;
    double p = 1.0;
    double eta_sq = 0.0;  // partial: ss / (ss + ss_error)
};

struct anova_table {
    std::vector<std::string> factors;
    std::vector<anova_effect> effects;
    double ss_error = 0.0;
    int df_error = 0;
    double ss_total = 0.0;  // about the grand mean
    std::string ss_type = "II";
};

namespace detail {

using term = std::vector<std::size_t>;  // factor indices, ascending

inline bool contains_term(const term& outer, const term& inner) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

inline Eigen::MatrixXd design_matrix(const std::vector<term>& terms,
                                     const std::vector<std::vector<std::size_t>>& codes,
                                     const std::vector<std::size_t>& n_levels) {
    const auto n = static_cast<Eigen::Index>(codes.size());
    std::size_t cols = 1;
    for (const auto& t : terms) {
        std::size_t c = 1;
        for (auto f : t) c *= n_levels[f] - 1;
        cols += c;
    }
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = codes[static_cast<std::size_t>(r)];
        Eigen::Index col = 0;
        x(r, col++) = 1.0;
        for (const auto& t : terms) {
            // sum-to-zero contrasts, multiplied across the factors of the term
            std::vector<double> block{1.0};
            for (auto f : t) {
                const std::size_t k = n_levels[f] - 1;
                std::vector<double> contrast(k, 0.0);
                if (row[f] == k)
                    std::fill(contrast.begin(), contrast.end(), -1.0);
                else
                    contrast[row[f]] = 1.0;
                std::vector<double> next;
                next.reserve(block.size() * k);
                for (double b : block)
                    for (double c : contrast) next.push_back(b * c);
                block = std::move(next);
            }
            for (double v : block) x(r, col++) = v;
        }
    }
    return x;
}

inline double residual_ss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    return (y - x * beta).squaredNorm();
}

inline std::string term_name(const term& t, const std::vector<std::string>& factors) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ':';
        s += factors[t[i]];
    }
    return s;
}

}  // namespace detail

/// Main effects and all interactions. Every cell of the full factorial
/// must hold at least one observation.
inline anova_table factorial_anova(const std::vector<anova_observation>& obs, const std::vector<std::string>& factors) {
    const std::size_t k = factors.size();
    if (k < 1 || k > 3) throw input_error("factorial_anova supports one to three factors");
    if (obs.empty()) throw input_error("factorial_anova: no observations");

    std::vector<std::vector<std::string>> levels(k);
    for (const auto& o : obs) {
        if (o.levels.size() != k) throw input_error("factorial_anova: observation has wrong number of factor levels");
        for (std::size_t f = 0; f < k; ++f) levels[f].push_back(o.levels[f]);
    }
    std::vector<std::size_t> n_levels(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(levels[f].begin(), levels[f].end());
        levels[f].erase(std::unique(levels[f].begin(), levels[f].end()), levels[f].end());
        if (levels[f].size() < 2) throw input_error("factor \"" + factors[f] + "\" needs at least two levels");
        n_levels[f] = levels[f].size();
    }

    std::vector<std::vector<std::size_t>> codes;
    codes.reserve(obs.size());
    std::map<std::vector<std::size_t>, std::size_t> cell_counts;
    for (const auto& o : obs) {
        std::vector<std::size_t> c(k);
        for (std::size_t f = 0; f < k; ++f)
            c[f] = static_cast<std::size_t>(std::lower_bound(levels[f].begin(), levels[f].end(), o.levels[f]) -
                                            levels[f].begin());
        ++cell_counts[c];
        codes.push_back(std::move(c));
    }
    // every cell of the full factorial must be populated
    std::vector<std::size_t> cell(k, 0);
    while (true) {
        if (!cell_counts.count(cell)) {
            std::string name;
            for (std::size_t f = 0; f < k; ++f) name += (f ? ", " : "") + factors[f] + "=" + levels[f][cell[f]];
            throw input_error("factorial_anova: empty cell (" + name + ")");
        }
        std::size_t f = 0;
        while (f < k && ++cell[f] == n_levels[f]) cell[f++] = 0;
        if (f == k) break;
    }

    std::vector<detail::term> terms;
    for (std::size_t size = 1; size <= k; ++size)
        for (unsigned mask = 1; mask < (1u << k); ++mask) {
            detail::term t;
            for (std::size_t f = 0; f < k; ++f)
                if (mask & (1u << f)) t.push_back(f);
            if (t.size() == size) terms.push_back(std::move(t));
        }

    Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) y(static_cast<Eigen::Index>(i)) = obs[i].value;

    anova_table out;
    out.factors = factors;
    const Eigen::MatrixXd full = detail::design_matrix(terms, codes, n_levels);
    out.ss_error = detail::residual_ss(full, y);
    out.df_error = static_cast<int>(obs.size()) - static_cast<int>(full.cols());
    out.ss_total = (y.array() - y.mean()).square().sum();
    if (out.df_error < 1) throw input_error("factorial_anova: no residual degrees of freedom");

    for (const auto& t : terms) {
        std::vector<detail::term> reduced;
        for (const auto& other : terms)
            if (!detail::contains_term(other, t)) reduced.push_back(other);
        std::vector<detail::term> augmented = reduced;
        augmented.push_back(t);
        const double rss_without = detail::residual_ss(detail::design_matrix(reduced, codes, n_levels), y);
        const double rss_with = detail::residual_ss(detail::design_matrix(augmented, codes, n_levels), y);

        anova_effect e;
        e.name = detail::term_name(t, factors);
        e.ss = std::max(0.0, rss_without - rss_with);
        e.df = 1;
        for (auto f : t) e.df *= static_cast<int>(n_levels[f] - 1);
        const double ms_error = out.ss_error / out.df_error;
        if (ms_error > 0.0) {
            e.f = (e.ss / e.df) / ms_error;
            e.p = f_upper_tail(e.f, e.df, out.df_error);
        } else {
            e.f = e.ss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            e.p = e.ss > 0.0 ? 0.0 : 1.0;
        }
        e.eta_sq = (e.ss + out.ss_error) > 0.0 ? e.ss / (e.ss + out.ss_error) : 0.0;
        out.effects.push_back(std::move(e));
    }
    return out;
}

}  // namespace decoy::stats
