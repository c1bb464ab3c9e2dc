#pragma once

// Brute-force references shared by the unit tests and the acceptance binary.

#include <limits>
#include <vector>

#include "decoy/svm.hpp"

namespace oracle {

/// Mann-Whitney AUC by enumerating every (truthful, deceptive) pair.
inline double brute_auc(const std::vector<double>& t, const std::vector<double>& d) {
    double s = 0.0;
    for (double a : t)
        for (double b : d) s += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    return s / (static_cast<double>(t.size()) * static_cast<double>(d.size()));
}

/// Zooming grid search over (w1, w2, b) for the 2-feature primal objective.
inline double grid_qp_minimum(const decoy::svm::dense_matrix& x, const std::vector<int>& y, double cost) {
    double cw1 = 0, cw2 = 0, cb = 0, half = 8.0, best = std::numeric_limits<double>::infinity();
    constexpr int steps = 20;
    for (int round = 0; round < 60; ++round) {
        double bw1 = cw1, bw2 = cw2, bb = cb;
        for (int i = -steps; i <= steps; ++i)
            for (int j = -steps; j <= steps; ++j)
                for (int k = -steps; k <= steps; ++k) {
                    const double w[2] = {cw1 + half * i / steps, cw2 + half * j / steps};
                    const double b = cb + half * k / steps;
                    const double f = decoy::svm::primal_objective(x, y, w, b, cost);
                    if (f < best) {
                        best = f;
                        bw1 = w[0];
                        bw2 = w[1];
                        bb = b;
                    }
                }
        cw1 = bw1;
        cw2 = bw2;
        cb = bb;
        half *= 0.6;
    }
    return best;
}

}  // namespace oracle
