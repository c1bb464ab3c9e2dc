#pragma once

// Linear SVM (hinge loss, L2 penalty) trained by dual coordinate descent,
// with stratified k-fold selection of C and a Platt sigmoid fitted to the
// pooled out-of-fold decision values.
//
// The bias is handled as an extra constant feature and is therefore
// regularized along with the weights. Features are standardized with
// training-set moments before solving; the stored weights are mapped back
// to the raw count scale, so predict() works on unscaled vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/corpus.hpp"
#include "decoy/errors.hpp"
#include "decoy/rng.hpp"
#include "decoy/stats.hpp"
#include "decoy/textprep.hpp"

namespace decoy::svm {

/// +1 for truthful, -1 for deceptive.
inline int sign_of(veracity v) { return v == veracity::truthful ? 1 : -1; }

/// Row-major dense design matrix.
struct dense_matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    dense_matrix() = default;
    dense_matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

inline dense_matrix to_dense(std::span<const sparse_vector> xs, std::size_t dim) {
    dense_matrix m(xs.size(), dim);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& x = xs[i];
        if (x.indices.size() != x.values.size()) throw input_error("sparse vector with mismatched arrays");
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            if (x.indices[k] >= dim)
                throw input_error("feature index " + std::to_string(x.indices[k]) + " outside dimension " +
                                  std::to_string(dim));
            m.data[i * dim + x.indices[k]] = x.values[k];
        }
    }
    return m;
}

// ------------------------------------------------------------ solver

struct solver_options {
    double cost = 1.0;
    double bias_feature = 1.0;  // constant appended to every row; 0 disables the bias
    double tolerance = 1e-4;    // projected-gradient gap
    int max_epochs = 5000;
    std::uint64_t seed = 0;
    bool record_trace = false;
    bool shrinking = true;  // skip coordinates stuck at a bound until the active set converges
};

struct solver_result {
    std::vector<double> weights;
    double bias = 0.0;
    int epochs = 0;
    bool converged = false;
    std::vector<double> dual_trace;  // dual objective after each epoch, when requested
};

/// Primal objective 0.5 (|w|^2 + b^2) + C sum_i max(0, 1 - y_i (w.x_i + b)),
/// with b scaled by the bias feature value as the solver sees it.
inline double primal_objective(const dense_matrix& x, std::span<const int> y, std::span<const double> w, double b,
                               double cost, double bias_feature = 1.0) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    const double b_coef = bias_feature != 0.0 ? b / bias_feature : 0.0;
    reg += b_coef * b_coef;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto r = x.row(i);
        const double f = std::inner_product(r.begin(), r.end(), w.begin(), 0.0) + b;
        loss += std::max(0.0, 1.0 - y[i] * f);
    }
    return 0.5 * reg + cost * loss;
}

/// Dual coordinate descent for the L1-loss SVM: minimizes
/// 0.5 a'Qa - e'a subject to 0 <= a_i <= C, visiting coordinates in a
/// seeded random order each epoch.
/// Rows of the form z_i - m, where z_i is sparse and m is a dense shift
/// shared by every row. Centering after scaling keeps z_i sparse.
struct shifted_rows {
    std::vector<sparse_vector> z;
    std::vector<double> shift;  // m; empty means no shift
    std::size_t dim = 0;
};

inline solver_result solve_dual_cd(const shifted_rows& x, std::span<const int> y, const solver_options& opt) {
    const std::size_t n = x.z.size(), d = x.dim;
    if (n == 0) throw input_error("solver: no training rows");
    if (!(opt.cost > 0.0)) throw input_error("solver: C must be positive");
    if (y.size() != n) throw input_error("solver: |X| != |y|");
    const double bf = opt.bias_feature;
    const bool shifted = !x.shift.empty();
    const auto& m = x.shift;
    const double mm = shifted ? std::inner_product(m.begin(), m.end(), m.begin(), 0.0) : 0.0;

    // w = u - s m in the shifted case; um tracks u.m
    std::vector<double> u(d, 0.0);
    double s = 0.0, um = 0.0, wb = 0.0;
    std::vector<double> alpha(n, 0.0), qii(n), mz(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = x.z[i];
        double zz = 0.0;
        for (std::size_t k = 0; k < r.indices.size(); ++k) {
            zz += r.values[k] * r.values[k];
            if (shifted) mz[i] += r.values[k] * m[r.indices[k]];
        }
        qii[i] = zz - 2.0 * mz[i] + mm + bf * bf;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng gen(opt.seed);

    auto materialize = [&] {
        std::vector<double> w(u);
        if (shifted)
            for (std::size_t j = 0; j < d; ++j) w[j] -= s * m[j];
        return w;
    };
    solver_result res;
    auto dual_objective = [&] {
        double ww = wb * wb;
        for (double v : materialize()) ww += v * v;
        return 0.5 * ww - std::accumulate(alpha.begin(), alpha.end(), 0.0);
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::size_t active = n;
    double pg_max_old = inf, pg_min_old = -inf;
    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        for (std::size_t k = active; k > 1; --k) std::swap(order[k - 1], order[static_cast<std::size_t>(gen.below(k))]);
        double pg_max = -inf, pg_min = inf;
        for (std::size_t t = 0; t < active; ++t) {
            const std::size_t i = order[t];
            if (qii[i] <= 0.0) continue;
            const auto& r = x.z[i];
            const double yi = y[i];
            double uz = 0.0;
            for (std::size_t k = 0; k < r.indices.size(); ++k) uz += u[r.indices[k]] * r.values[k];
            const double wx = shifted ? uz - um - s * mz[i] + s * mm : uz;
            const double g = yi * (wx + wb * bf) - 1.0;
            double pg = g;
            if (alpha[i] == 0.0) {
                if (opt.shrinking && g > pg_max_old) {
                    std::swap(order[t--], order[--active]);
                    continue;
                }
                pg = std::min(g, 0.0);
            } else if (alpha[i] == opt.cost) {
                if (opt.shrinking && g < pg_min_old) {
                    std::swap(order[t--], order[--active]);
                    continue;
                }
                pg = std::max(g, 0.0);
            }
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::fabs(pg) > 1e-12) {
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / qii[i], 0.0, opt.cost);
                const double delta = (alpha[i] - old) * yi;
                if (delta != 0.0) {
                    for (std::size_t k = 0; k < r.indices.size(); ++k) u[r.indices[k]] += delta * r.values[k];
                    if (shifted) {
                        um += delta * mz[i];
                        s += delta;
                    }
                    wb += delta * bf;
                }
            }
        }
        res.epochs = epoch + 1;
        if (opt.record_trace) res.dual_trace.push_back(dual_objective());
        if (pg_max - pg_min <= opt.tolerance) {
            if (active == n) {
                res.converged = true;
                break;
            }
            // converged on the shrunk set: recheck everything
            active = n;
            pg_max_old = inf;
            pg_min_old = -inf;
            continue;
        }
        pg_max_old = pg_max > 0.0 ? pg_max : inf;
        pg_min_old = pg_min < 0.0 ? pg_min : -inf;
        // keep u.m from drifting over long runs
        if (shifted && epoch % 64 == 63) um = std::inner_product(u.begin(), u.end(), m.begin(), 0.0);
    }
    res.weights = materialize();
    res.bias = wb * bf;
    return res;
}

inline solver_result solve_dual_cd(const dense_matrix& x, std::span<const int> y, const solver_options& opt) {
    shifted_rows rows;
    rows.dim = x.cols;
    rows.z.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j)
            if (r[j] != 0.0) {
                rows.z[i].indices.push_back(static_cast<std::uint32_t>(j));
                rows.z[i].values.push_back(r[j]);
            }
    }
    return solve_dual_cd(rows, y, opt);
}

// -------------------------------------------------------- calibration

struct platt_params {
    double a = 0.0;
    double b = 0.0;

    /// P(truthful | decision value f) = 1 / (1 + exp(a f + b)).
    [[nodiscard]] double operator()(double f) const {
        const double z = a * f + b;
        if (z >= 0.0) {
            const double e = std::exp(-z);
            return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(z));
    }
};

/// Platt scaling with the Lin-Lin-Weng Newton iteration and Platt's
/// smoothed targets. labels are +1 (truthful) / -1.
inline platt_params fit_platt(std::span<const double> dec, std::span<const int> labels) {
    if (dec.size() != labels.size() || dec.empty()) throw input_error("fit_platt: bad input sizes");
    double prior1 = 0, prior0 = 0;
    for (int l : labels) (l > 0 ? prior1 : prior0) += 1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    const std::size_t n = dec.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

    constexpr int max_iter = 100;
    constexpr double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fa = dec[i] * aa + bb;
            f += fa >= 0 ? t[i] * fa + std::log1p(std::exp(-fa)) : (t[i] - 1) * fa + std::log1p(std::exp(fa));
        }
        return f;
    };
    double fval = objective(a, b);
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fa = dec[i] * a + b;
            double p, q;
            if (fa >= 0) {
                p = std::exp(-fa) / (1.0 + std::exp(-fa));
                q = 1.0 / (1.0 + std::exp(-fa));
            } else {
                p = 1.0 / (1.0 + std::exp(fa));
                q = std::exp(fa) / (1.0 + std::exp(fa));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::fabs(g1) < eps && std::fabs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

// ------------------------------------------------------------- model

struct fold_result {
    std::size_t fold = 0;
    std::size_t n = 0;
    double accuracy = 0.0;
    double auc = 0.0;
};

struct grid_point {
    double cost = 0.0;
    double mean_accuracy = 0.0;
    double mean_auc = 0.0;
};

struct prediction {
    double decision = 0.0;
    veracity label = veracity::deceptive;
    double p_truthful = 0.5;
};

struct trained_model {
    std::vector<double> weights;  // raw count scale, one per feature term
    double bias = 0.0;
    platt_params calibration;
    double cost = 1.0;
    std::vector<fold_result> cv_record;
    std::vector<grid_point> grid;
    std::vector<double> feature_mean;
    std::vector<double> feature_sd;
    std::string space_hash;
    std::uint64_t seed = 0;
    bool standardize = true;
    std::size_t n_truthful = 0;
    std::size_t n_deceptive = 0;
    int final_epochs = 0;
    bool final_converged = false;

    [[nodiscard]] double decision_value(const sparse_vector& x) const {
        double f = bias;
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            if (x.indices[k] >= weights.size())
                throw input_error("feature index " + std::to_string(x.indices[k]) + " outside model dimension");
            f += weights[x.indices[k]] * x.values[k];
        }
        return f;
    }

    [[nodiscard]] prediction predict(const sparse_vector& x) const {
        prediction p;
        p.decision = decision_value(x);
        p.label = p.decision >= 0.0 ? veracity::truthful : veracity::deceptive;
        p.p_truthful = calibration(p.decision);
        return p;
    }
};

inline nlohmann::json to_json(const trained_model& m) {
    nlohmann::json folds = nlohmann::json::array(), grid = nlohmann::json::array();
    for (const auto& f : m.cv_record)
        folds.push_back({{"fold", f.fold}, {"n", f.n}, {"accuracy", f.accuracy}, {"auc", f.auc}});
    for (const auto& g : m.grid)
        grid.push_back({{"C", g.cost}, {"mean_accuracy", g.mean_accuracy}, {"mean_auc", g.mean_auc}});
    return {
        {"format", "decoy.svm_model"},
        {"version", 1},
        {"kernel", "linear"},
        {"weights", m.weights},
        {"bias", m.bias},
        {"calibration", {{"A", m.calibration.a}, {"B", m.calibration.b}}},
        {"C", m.cost},
        {"cv", {{"k", m.cv_record.size()}, {"folds", folds}, {"grid", grid}}},
        {"feature_mean", m.feature_mean},
        {"feature_sd", m.feature_sd},
        {"standardize", m.standardize},
        {"space_hash", m.space_hash},
        {"seed", m.seed},
        {"class_counts", {{"truthful", m.n_truthful}, {"deceptive", m.n_deceptive}}},
        {"solver", {{"name", "dual_coordinate_descent"}, {"epochs", m.final_epochs}, {"converged", m.final_converged}}},
    };
}

inline trained_model model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "decoy.svm_model" || j.value("version", 0) != 1)
        throw input_error("not a version-1 svm model file");
    trained_model m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.calibration = {j.at("calibration").at("A").get<double>(), j.at("calibration").at("B").get<double>()};
    m.cost = j.at("C").get<double>();
    for (const auto& f : j.at("cv").at("folds"))
        m.cv_record.push_back({f.at("fold").get<std::size_t>(), f.at("n").get<std::size_t>(),
                               f.at("accuracy").get<double>(), f.at("auc").get<double>()});
    for (const auto& g : j.at("cv").at("grid"))
        m.grid.push_back({g.at("C").get<double>(), g.at("mean_accuracy").get<double>(), g.at("mean_auc").get<double>()});
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_sd = j.at("feature_sd").get<std::vector<double>>();
    m.standardize = j.at("standardize").get<bool>();
    m.space_hash = j.at("space_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_truthful = j.at("class_counts").at("truthful").get<std::size_t>();
    m.n_deceptive = j.at("class_counts").at("deceptive").get<std::size_t>();
    m.final_epochs = j.at("solver").value("epochs", 0);
    m.final_converged = j.at("solver").value("converged", false);
    if (m.feature_sd.size() != m.weights.size() || m.feature_mean.size() != m.weights.size())
        throw input_error("svm model: weight and moment vectors differ in length");
    return m;
}

/// A model paired with the feature space it was trained on; construction
/// fails if the space's hash differs from the one the model recorded.
class classifier {
  public:
    classifier(trained_model model, feature_space space) : model_(std::move(model)), space_(std::move(space)) {
        if (model_.space_hash != space_.hash())
            throw input_error("feature space hash " + space_.hash() + " does not match model's " + model_.space_hash);
        if (model_.weights.size() != space_.size()) throw input_error("model dimension differs from feature space");
    }

    [[nodiscard]] prediction predict_text(std::string_view text, const tokenizer& tok) const {
        return model_.predict(space_.vectorize(prepare_document(text, tok)));
    }
    [[nodiscard]] prediction predict(const sparse_vector& x) const { return model_.predict(x); }

    [[nodiscard]] const trained_model& model() const { return model_; }
    [[nodiscard]] const feature_space& space() const { return space_; }

  private:
    trained_model model_;
    feature_space space_;
};

// ------------------------------------------------------------ training

struct train_config {
    std::size_t k_folds = 5;
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0};
    std::uint64_t seed = 0;
    bool standardize = true;
    double tolerance = 1e-3;
    int max_epochs = 2000;
    bool parallel_folds = true;
};

/// Stratified fold id per observation; deterministic in the seed.
inline std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);
    if (k < 2) throw input_error("cross-validation needs k >= 2");
    if (k > pos.size() || k > neg.size())
        throw input_error("k = " + std::to_string(k) + " exceeds the smaller class count (" +
                          std::to_string(std::min(pos.size(), neg.size())) + ")");
    rng gen(derive_seed(seed, "folds"));
    gen.shuffle(pos);
    gen.shuffle(neg);
    std::vector<std::size_t> fold(y.size());
    // continue the round-robin across classes so fold sizes stay balanced
    std::size_t next = 0;
    for (auto* cls : {&pos, &neg})
        for (std::size_t idx : *cls) fold[idx] = next++ % k;
    return fold;
}

namespace detail {

struct scaling {
    std::vector<double> mean, sd;
};

inline scaling fit_scaling(std::span<const sparse_vector> xs, std::size_t dim, std::span<const std::size_t> rows) {
    scaling s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double n = static_cast<double>(rows.size());
    std::vector<std::size_t> nnz(dim, 0);
    for (auto r : rows) {
        const auto& x = xs[r];
        for (std::size_t k = 0; k < x.indices.size(); ++k) s.mean[x.indices[k]] += x.values[k];
    }
    for (auto& m : s.mean) m /= n;
    for (auto r : rows) {
        const auto& x = xs[r];
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            const auto j = x.indices[k];
            s.sd[j] += (x.values[k] - s.mean[j]) * (x.values[k] - s.mean[j]);
            ++nnz[j];
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        s.sd[j] += static_cast<double>(rows.size() - nnz[j]) * s.mean[j] * s.mean[j];
        s.sd[j] = rows.size() > 1 ? std::sqrt(s.sd[j] / (n - 1.0)) : 0.0;
    }
    return s;
}

/// (x - mean) / sd as sparse rows plus a shared shift; constant columns become 0.
inline shifted_rows apply_scaling(std::span<const sparse_vector> xs, std::size_t dim,
                                  std::span<const std::size_t> rows, const scaling& s, bool standardize) {
    shifted_rows out;
    out.dim = dim;
    out.z.reserve(rows.size());
    if (standardize) {
        out.shift.assign(dim, 0.0);
        for (std::size_t j = 0; j < dim; ++j)
            if (s.sd[j] > 0.0) out.shift[j] = s.mean[j] / s.sd[j];
    }
    for (auto r : rows) {
        sparse_vector z;
        const auto& x = xs[r];
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            const auto j = x.indices[k];
            if (!standardize) {
                z.indices.push_back(j);
                z.values.push_back(x.values[k]);
            } else if (s.sd[j] > 0.0) {
                z.indices.push_back(j);
                z.values.push_back(x.values[k] / s.sd[j]);
            }
        }
        out.z.push_back(std::move(z));
    }
    return out;
}

struct linear_fit {
    std::vector<double> weights;  // raw scale
    double bias = 0.0;
    int epochs = 0;
    bool converged = false;
};

/// Fit on a subset of rows and express the result on the raw feature scale.
inline linear_fit fit_rows(std::span<const sparse_vector> xs, std::size_t dim, std::span<const int> y,
                           std::span<const std::size_t> rows, const scaling& s, bool standardize, double cost,
                           const train_config& cfg, std::uint64_t seed) {
    const auto scaled = apply_scaling(xs, dim, rows, s, standardize);
    std::vector<int> ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = y[rows[i]];
    solver_options opt;
    opt.cost = cost;
    opt.tolerance = cfg.tolerance;
    opt.max_epochs = cfg.max_epochs;
    opt.seed = seed;
    const auto res = solve_dual_cd(scaled, ys, opt);

    linear_fit fit;
    fit.weights.assign(dim, 0.0);
    fit.bias = res.bias;
    fit.epochs = res.epochs;
    fit.converged = res.converged;
    for (std::size_t j = 0; j < dim; ++j) {
        if (!standardize) {
            fit.weights[j] = res.weights[j];
        } else if (s.sd[j] > 0.0) {
            fit.weights[j] = res.weights[j] / s.sd[j];
            fit.bias -= res.weights[j] * s.mean[j] / s.sd[j];
        }
    }
    return fit;
}

inline double decision(const sparse_vector& x, const linear_fit& fit) {
    double f = fit.bias;
    for (std::size_t k = 0; k < x.indices.size(); ++k) f += fit.weights[x.indices[k]] * x.values[k];
    return f;
}

struct fold_outcome {
    fold_result summary;
    std::vector<std::pair<std::size_t, double>> decisions;  // (row, decision value)
};

inline fold_outcome run_fold(std::span<const sparse_vector> xs, std::size_t dim, std::span<const int> y,
                             std::span<const std::size_t> fold_of, std::size_t fold, double cost,
                             const train_config& cfg) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    const auto s = fit_scaling(xs, dim, train_rows);
    const auto fit = fit_rows(xs, dim, y, train_rows, s, cfg.standardize, cost, cfg, derive_seed(cfg.seed, fold + 1));

    fold_outcome out;
    out.summary.fold = fold;
    out.summary.n = test_rows.size();
    std::vector<double> t_scores, d_scores;
    std::size_t correct = 0;
    for (auto r : test_rows) {
        const double f = decision(xs[r], fit);
        out.decisions.emplace_back(r, f);
        const int pred = f >= 0.0 ? 1 : -1;
        if (pred == y[r]) ++correct;
        (y[r] > 0 ? t_scores : d_scores).push_back(f);
    }
    out.summary.accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
    out.summary.auc = (t_scores.empty() || d_scores.empty()) ? 0.5 : stats::auc(t_scores, d_scores);
    return out;
}

inline std::vector<fold_outcome> run_all_folds(std::span<const sparse_vector> xs, std::size_t dim,
                                               std::span<const int> y, std::span<const std::size_t> fold_of,
                                               double cost, const train_config& cfg) {
    std::vector<fold_outcome> out(cfg.k_folds);
    if (cfg.parallel_folds) {
        std::vector<std::future<fold_outcome>> jobs;
        for (std::size_t f = 0; f < cfg.k_folds; ++f)
            jobs.push_back(
                std::async(std::launch::async, [&, f] { return run_fold(xs, dim, y, fold_of, f, cost, cfg); }));
        for (std::size_t f = 0; f < cfg.k_folds; ++f) out[f] = jobs[f].get();
    } else {
        for (std::size_t f = 0; f < cfg.k_folds; ++f) out[f] = run_fold(xs, dim, y, fold_of, f, cost, cfg);
    }
    return out;
}

inline void check_training_input(std::span<const sparse_vector> xs, std::span<const veracity> labels,
                                 std::size_t dim) {
    if (xs.size() != labels.size()) throw input_error("train: |X| != |y|");
    std::size_t t = 0, d = 0;
    for (auto l : labels) (l == veracity::truthful ? t : d)++;
    if (t == 0 || d == 0) throw input_error("train: labels contain a single class");
    if (t < 2 || d < 2) throw input_error("train: each class needs at least two examples");
    for (const auto& x : xs) {
        if (x.indices.size() != x.values.size()) throw input_error("sparse vector with mismatched arrays");
        for (auto j : x.indices)
            if (j >= dim)
                throw input_error("feature index " + std::to_string(j) + " outside dimension " + std::to_string(dim));
    }
}

}  // namespace detail

/// Stratified k-fold record at one cost value.
inline std::vector<fold_result> cross_validate(std::span<const sparse_vector> xs, std::span<const veracity> labels,
                                               std::size_t dim, double cost, const train_config& cfg) {
    detail::check_training_input(xs, labels, dim);
    std::vector<int> y;
    for (auto l : labels) y.push_back(sign_of(l));
    const auto fold_of = stratified_folds(y, cfg.k_folds, cfg.seed);
    std::vector<fold_result> out;
    for (auto& f : detail::run_all_folds(xs, dim, y, fold_of, cost, cfg)) out.push_back(f.summary);
    return out;
}

/// Grid search over C by mean CV accuracy (ties go to the smaller C), Platt
/// fit on the winning C's out-of-fold decisions, then a final fit on all rows.
inline trained_model train(std::span<const sparse_vector> xs, std::span<const veracity> labels,
                           const feature_space& space, const train_config& cfg = {}) {
    const std::size_t dim = space.size();
    detail::check_training_input(xs, labels, dim);
    if (cfg.c_grid.empty()) throw input_error("train: empty C grid");
    std::vector<int> y;
    for (auto l : labels) y.push_back(sign_of(l));
    const auto fold_of = stratified_folds(y, cfg.k_folds, cfg.seed);

    std::vector<double> grid = cfg.c_grid;
    std::sort(grid.begin(), grid.end());
    trained_model m;
    std::vector<detail::fold_outcome> best;
    double best_acc = -1.0;
    for (double c : grid) {
        if (!(c > 0.0)) throw input_error("train: C values must be positive");
        auto folds = detail::run_all_folds(xs, dim, y, fold_of, c, cfg);
        grid_point g{c, 0.0, 0.0};
        for (const auto& f : folds) {
            g.mean_accuracy += f.summary.accuracy / static_cast<double>(folds.size());
            g.mean_auc += f.summary.auc / static_cast<double>(folds.size());
        }
        m.grid.push_back(g);
        if (g.mean_accuracy > best_acc + 1e-12) {
            best_acc = g.mean_accuracy;
            m.cost = c;
            best = std::move(folds);
        }
    }
    for (const auto& f : best) m.cv_record.push_back(f.summary);

    std::vector<double> oof(xs.size());
    for (const auto& f : best)
        for (const auto& [row, dec] : f.decisions) oof[row] = dec;
    m.calibration = fit_platt(oof, y);

    std::vector<std::size_t> all(xs.size());
    std::iota(all.begin(), all.end(), 0);
    const auto s = detail::fit_scaling(xs, dim, all);
    const auto fit =
        detail::fit_rows(xs, dim, y, all, s, cfg.standardize, m.cost, cfg, derive_seed(cfg.seed, "final"));
    m.weights = fit.weights;
    m.bias = fit.bias;
    m.final_epochs = fit.epochs;
    m.final_converged = fit.converged;
    m.feature_mean = s.mean;
    m.feature_sd = s.sd;
    m.standardize = cfg.standardize;
    m.space_hash = space.hash();
    m.seed = cfg.seed;
    for (auto l : labels) (l == veracity::truthful ? m.n_truthful : m.n_deceptive)++;
    return m;
}

struct ranked_feature {
    std::string term;
    double importance = 0.0;
    double weight = 0.0;
};

/// Terms by |weight| x training SD, descending; ties in lexicographic order.
inline std::vector<ranked_feature> top_features(const trained_model& m, const feature_space& space, std::size_t k = 10) {
    if (m.weights.size() != space.size()) throw input_error("top_features: model/space dimension mismatch");
    std::vector<ranked_feature> all;
    all.reserve(space.size());
    for (std::size_t j = 0; j < space.size(); ++j)
        all.push_back({space.terms()[j], std::fabs(m.weights[j]) * m.feature_sd[j], m.weights[j]});
    std::stable_sort(all.begin(), all.end(), [](const ranked_feature& a, const ranked_feature& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.term < b.term;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace decoy::svm
