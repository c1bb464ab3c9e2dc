// One line per acceptance criterion. Criteria that need the real corpus read
// it from the environment and report SKIP (exit 77) when it is absent:
//   DECOY_CORPUS        corpus JSONL/CSV with id,text,label,split
//   DECOY_SPLIT_FILE    optional id,split sidecar
//   DECOY_MODIFIED      optional released model-targeted rewrites (JSONL)
//   DECOY_RANK_LIST     optional word-frequency rank list
//   DECOY_ATTACK_MT / DECOY_ATTACK_HT  optional regenerated attack records

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>

#include "decoy/anova.hpp"
#include "decoy/attack/engine.hpp"
#include "decoy/pipeline.hpp"
#include "decoy/report.hpp"
#include "decoy/validity.hpp"
#include "oracles/oracles.hpp"
#include "oracles/synthetic.hpp"

using namespace decoy;
namespace fs = std::filesystem;

namespace {

enum class status { pass, fail, skip };

struct outcome {
    status s;
    std::string detail;
};

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

std::string num(double v, int places = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

// ------------------------------------------------------- shared state

std::optional<corpus> real_corpus() {
    static std::optional<corpus> c;
    static bool tried = false;
    if (!tried) {
        tried = true;
        if (const auto path = env("DECOY_CORPUS")) c = load_corpus(*path, std::nullopt, env("DECOY_SPLIT_FILE"));
    }
    return c;
}

svm::train_config default_train() {
    svm::train_config tc;
    tc.seed = derive_seed(42, "train");
    return tc;
}

const fitted_pipeline& real_fit() {
    static std::optional<fitted_pipeline> f;
    if (!f) f = fit_pipeline(*real_corpus(), feature_config{}, default_train());
    return *f;
}

stats::metrics_report score(const svm::classifier& clf, const corpus& evaluated, const std::string& name) {
    const auto truth = evaluated.select(std::nullopt);
    return evaluate_predictions(predict_all(clf, truth), truth, name, {0.99, 2000, derive_seed(42, "bootstrap")});
}

corpus test_only(const corpus& c) {
    std::vector<statement> out;
    for (const auto* s : c.select(split::test)) out.push_back(*s);
    return corpus(std::move(out));
}

// ------------------------------------------------------------ criteria

outcome pipeline_reproduction() {
    if (!real_corpus()) return {status::skip, "DECOY_CORPUS not set"};
    const auto& c = *real_corpus();
    const auto& f = real_fit();
    const svm::classifier clf(f.model, f.space);
    const auto r = score(clf, test_only(c), "original");
    const double auc = r.auc.value_or(NAN);
    const double rt = r.truthful.recall.value_or(NAN), rd = r.deceptive.recall.value_or(NAN);
    const bool ok = std::abs(r.accuracy - 0.64) <= 0.05 && std::abs(auc - 0.67) <= 0.06 && rd >= rt;
    return {ok ? status::pass : status::fail,
            "train " + std::to_string(c.count(split::train, std::nullopt)) + " / test " +
                std::to_string(c.count(split::test, std::nullopt)) + ", accuracy " + num(r.accuracy) + ", AUC " +
                num(auc) + (r.auc_ci ? " [" + num(r.auc_ci->first) + "; " + num(r.auc_ci->second) + "]" : "") +
                ", recall deceptive " + num(rd) + " vs truthful " + num(rt) + ", C " + num(f.model.cost, 2)};
}

outcome feature_scale() {
    if (!real_corpus()) return {status::skip, "DECOY_CORPUS not set"};
    const auto& s = real_fit().space;
    const double pre = static_cast<double>(s.pre_nzv_count()), post = static_cast<double>(s.post_nzv_count());
    const bool ok = std::abs(pre - 1621) <= 0.15 * 1621 && std::abs(post - 321) <= 0.20 * 321;
    return {ok ? status::pass : status::fail,
            "pre-NZV " + std::to_string(s.pre_nzv_count()) + " (target 1621 +/- 15%), post-NZV " +
                std::to_string(s.post_nzv_count()) + " (target 321 +/- 20%)"};
}

outcome descriptives() {
    // the interval machinery can be checked against the reference moments alone
    const double d_pub = stats::cohens_d_from_moments(310.66, 98.16, 243, 274.91, 102.28, 262);
    const auto [lo_pub, hi_pub] = stats::cohens_d_ci(d_pub, 243, 262, 0.99);
    const std::string from_moments = "reference moments give d " + num(d_pub) + " [" + num(lo_pub) + "; " + num(hi_pub) + "]";
    if (!real_corpus()) return {status::skip, "DECOY_CORPUS not set; " + from_moments};
    const auto row = validity::length_report("original", real_corpus()->select(split::test), 0.99);
    auto r2 = [](double v) { return std::round(v * 100) / 100; };
    const bool counts = r2(row.truthful.mean) == 310.66 && r2(row.truthful.sd) == 98.16 &&
                        r2(row.deceptive.mean) == 274.91 && r2(row.deceptive.sd) == 102.28;
    const bool d_ok = std::abs(row.d.d - 0.37) <= 0.02 && std::abs(row.d.ci_low - 0.14) <= 0.03 &&
                      std::abs(row.d.ci_high - 0.60) <= 0.03;
    return {counts && d_ok ? status::pass : status::fail,
            "truthful " + num(row.truthful.mean, 2) + " (" + num(row.truthful.sd, 2) + "), deceptive " +
                num(row.deceptive.mean, 2) + " (" + num(row.deceptive.sd, 2) + "), d " + num(row.d.d) + " [" +
                num(row.d.ci_low) + "; " + num(row.d.ci_high) + "]; " + from_moments};
}

/// Echoes the source text and keeps every prompt it was sent.
class recording_backend final : public attack::completion_backend {
  public:
    attack::completion complete(const attack::completion_request& req) override {
        std::lock_guard lock(mutex_);
        prompts_[req.prompt] = req.source_text;
        return {req.source_text, "stop", fingerprint(), "1970-01-01T00:00:00Z", false};
    }
    [[nodiscard]] std::string fingerprint() const override { return "recording"; }
    [[nodiscard]] std::size_t seen() const { return prompts_.size(); }

  private:
    std::mutex mutex_;
    std::map<std::string, std::string> prompts_;
};

std::vector<attack::adversarial_record> read_released_rewrites(const std::string& path) {
    std::vector<attack::adversarial_record> out;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        if (j.contains("original_id")) {
            out.push_back(attack::record_from_json(j));
            continue;
        }
        attack::adversarial_record r;
        r.original_id = j.at("id").get<std::string>();
        r.kind = attack::variant::model_targeted;
        r.completion_text = j.at("text").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

outcome attack_properties() {
    const bool real = real_corpus().has_value();
    const corpus c = real ? *real_corpus() : decoy_synthetic::synthetic_corpus(160, 60);
    const fitted_pipeline fit = real ? real_fit() : fit_pipeline(c, feature_config{}, default_train());
    const svm::classifier clf(fit.model, fit.space);
    std::vector<std::string> notes;

    // (a) identity rewrites
    attack::attack_config cfg;
    cfg.kind = attack::variant::unguided;
    cfg.seed = 1;
    attack::identity_backend identity;
    const auto ident = attack::run_attack(c, cfg, nullptr, identity);
    const auto before = score(clf, test_only(c), "x");
    const auto after = score(clf, attack::substitute(c, ident.records), "x");
    const bool a_ok = ident.failures.empty() && before.accuracy == after.accuracy && before.auc == after.auc &&
                      before.auc_ci == after.auc_ci && before.truthful.precision == after.truthful.precision &&
                      before.truthful.recall == after.truthful.recall &&
                      before.deceptive.precision == after.deceptive.precision &&
                      before.deceptive.recall == after.deceptive.recall;
    notes.push_back(std::string("(a) identity ") + (a_ok ? "equal" : "DIFFERS"));

    // (b) model-targeted prompts, live then replayed
    std::vector<std::string> top10;
    for (const auto& f : svm::top_features(fit.model, fit.space, 10)) top10.push_back(f.term);
    const auto joined = attack::join_features(top10);
    cfg.kind = attack::variant::model_targeted;
    cfg.temperature = attack::temperature_policy::fixed(0.7);
    const auto cache_dir = fs::temp_directory_path() / ("decoy_accept_cache_" + std::to_string(::getpid()));
    fs::remove_all(cache_dir);
    attack::response_cache cache(cache_dir);
    recording_backend rec;
    attack::caching_backend live(rec, cache);
    const auto live_run = attack::run_attack(c, cfg, &clf, live);
    attack::replay_backend replay(cache);
    const auto replayed = attack::run_attack(c, cfg, &clf, replay);
    fs::remove_all(cache_dir);
    bool b_ok = live_run.failures.empty() && replayed.failures.empty() &&
                live_run.records.size() == c.count(split::test, veracity::deceptive) && rec.seen() == live_run.records.size();
    for (const auto* run : {&live_run, &replayed})
        for (const auto& r : run->records) {
            const int pct = attack::percent_of(clf.predict_text(c.find(r.original_id)->text, tokenizer()).p_truthful);
            b_ok = b_ok && r.p_truthful_pct == pct && r.top_features == top10 &&
                   r.prompt_text.find(std::to_string(pct) + "%") != std::string::npos &&
                   r.prompt_text.find(joined) != std::string::npos;
        }
    b_ok = b_ok && live_run.records == replayed.records;
    notes.push_back("(b) " + std::to_string(live_run.records.size()) + " model-targeted prompts " +
                    (b_ok ? "carry probability and top-10 features" : "MISMATCH"));

    // (c) released rewrites
    bool c_ok = true;
    if (const auto mod = env("DECOY_MODIFIED")) {
        if (!real) return {status::skip, "DECOY_MODIFIED needs DECOY_CORPUS"};
        const auto r = score(clf, attack::substitute(c, read_released_rewrites(*mod)), "model_targeted");
        c_ok = std::abs(r.accuracy - 0.51) <= 0.03;
        notes.push_back("(c) released rewrites accuracy " + num(r.accuracy) + " (target 0.51 +/- 0.03)");
    } else {
        notes.push_back("(c) not run, DECOY_MODIFIED not set");
    }
    std::string detail = real ? "real corpus; " : "synthetic corpus; ";
    for (std::size_t i = 0; i < notes.size(); ++i) detail += (i ? "; " : "") + notes[i];
    return {a_ok && b_ok && c_ok ? status::pass : status::fail, detail};
}

outcome estimator_oracles() {
    std::vector<std::string> bad;
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n1 = 1 + gen() % 200, n2 = 1 + gen() % 200;
        const int levels = 1 + static_cast<int>(gen() % 50);
        std::vector<double> t(n1), d(n2);
        for (auto& v : t) v = static_cast<double>(gen() % levels);
        for (auto& v : d) v = static_cast<double>(gen() % levels) - 0.5 * (trial % 3);
        if (stats::auc(t, d) != oracle::brute_auc(t, d)) {
            bad.push_back("AUC case " + std::to_string(trial));
            break;
        }
    }

    const std::vector<double> a{2, 4, 6}, b{1, 3, 5};
    const auto e = stats::cohens_d_with_ci(a, b, 0.99);
    const double se = std::sqrt(6.0 / 9.0 + 0.25 / 12.0), z = 2.5758293035489004;
    if (std::abs(e.d - 0.5) > 1e-8 || std::abs(e.ci_low - (0.5 - z * se)) > 1e-8 || std::abs(e.ci_high - (0.5 + z * se)) > 1e-8)
        bad.push_back("Cohen's d fixture");

    const std::vector<stats::anova_observation> obs{{1, {"a1", "b1"}}, {3, {"a1", "b1"}}, {2, {"a1", "b2"}}, {4, {"a1", "b2"}},
                                                    {5, {"a2", "b1"}}, {7, {"a2", "b1"}}, {6, {"a2", "b2"}}, {8, {"a2", "b2"}}};
    const auto tab = stats::factorial_anova(obs, {"A", "B"});
    const double want[3] = {16.0, 1.0, 0.0};
    for (int i = 0; i < 3; ++i)
        if (std::abs(tab.effects[static_cast<std::size_t>(i)].f - want[i]) > 1e-8) bad.push_back("ANOVA " + tab.effects[static_cast<std::size_t>(i)].name);

    std::normal_distribution<double> nd(0, 1);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> x(3 + gen() % 20), y(3 + gen() % 20);
        std::vector<stats::anova_observation> o;
        for (auto& v : x) o.push_back({v = nd(gen) + 0.7, {"x"}});
        for (auto& v : y) o.push_back({v = nd(gen), {"y"}});
        const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
        const double sp2 = ((n1 - 1) * stats::variance(x) + (n2 - 1) * stats::variance(y)) / (n1 + n2 - 2);
        const double t = (stats::mean(x) - stats::mean(y)) / std::sqrt(sp2 * (1 / n1 + 1 / n2));
        if (std::abs(stats::factorial_anova(o, {"G"}).effects[0].f - t * t) > 1e-8 * std::max(1.0, t * t)) {
            bad.push_back("F = t^2 case " + std::to_string(trial));
            break;
        }
    }

    double worst = 0.0;
    for (int inst = 0; inst < 4; ++inst) {
        std::mt19937_64 g(static_cast<std::uint64_t>(100 + inst));
        svm::dense_matrix x(10, 2);
        std::vector<int> y(10);
        for (std::size_t i = 0; i < 10; ++i) {
            y[i] = i < 5 ? 1 : -1;
            x.row(i)[0] = nd(g) + 0.8 * y[i];
            x.row(i)[1] = nd(g) - 0.4 * y[i];
        }
        for (double cost : {0.1, 1.0, 10.0}) {
            svm::solver_options opt;
            opt.cost = cost;
            opt.tolerance = 1e-9;
            opt.max_epochs = 100000;
            const auto res = svm::solve_dual_cd(x, y, opt);
            const double f = svm::primal_objective(x, y, res.weights, res.bias, cost);
            worst = std::max(worst, std::abs(f - oracle::grid_qp_minimum(x, y, cost)));
        }
    }
    if (worst > 1e-3) bad.push_back("SVM objective gap " + num(worst, 6));

    std::string detail = "AUC 1000 cases, d fixture, ANOVA 2x2 and F = t^2, SVM grid QP (max gap " + num(worst, 6) + ")";
    if (!bad.empty()) {
        detail += "; failed:";
        for (const auto& s : bad) detail += " " + s;
    }
    return {bad.empty() ? status::pass : status::fail, detail};
}

std::string letters(std::size_t i) {
    std::string w;
    do {
        w += static_cast<char>('a' + i % 26);
        i /= 26;
    } while (i > 0);
    return w + "x";
}

outcome validity_metrics() {
    std::vector<std::string> bad;
    const double c1 = validity::cosine({1, 0}, {1, 0}), c0 = validity::cosine({1, 0}, {0, 1});
    const double c7 = validity::cosine({1, 1}, {1, 0});
    if (std::abs(c1 - 1.0) > 1e-8 || std::abs(c0) > 1e-8 || std::abs(c7 - 0.70710678) > 1e-8) bad.push_back("cosine");

    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    std::unordered_map<std::string, validity::vec> words;
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < 40; ++i) {
        vocab.push_back(letters(i));
        validity::vec v(8);
        for (auto& x : v) x = nd(gen) + 1.0;
        words[vocab.back()] = v;
    }
    const auto provider = validity::embedding_provider::from_map(words, "random");
    std::vector<validity::text_pair> pairs;
    for (int i = 0; i < 200; ++i) {
        std::string a, b;
        for (int k = 0; k < 6; ++k) {
            a += vocab[gen() % vocab.size()] + " ";
            b += vocab[gen() % vocab.size()] + " ";
        }
        pairs.push_back({std::to_string(i), a, b});
    }
    std::vector<double> thresholds;
    for (int k = 0; k <= 20; ++k) thresholds.push_back(k / 20.0);
    const auto summary = validity::similarity_report(pairs, provider, thresholds);
    for (std::size_t k = 1; k < summary.shares.size(); ++k)
        if (summary.shares[k].second > summary.shares[k - 1].second) bad.push_back("shares not monotone");

    std::vector<std::string> ranked;
    for (std::size_t i = 0; i < 1000; ++i) ranked.push_back(letters(i));
    const auto list = validity::rank_list::from_words(ranked);
    const auto r = validity::vocabulary_rank(ranked[0] + " " + ranked[1] + " " + ranked[999], list);
    if (std::abs(r.mean_rank - 334.33) > 1e-2 || r.coverage != 1.0) bad.push_back("rank fixture " + num(r.mean_rank, 2));

    std::string detail = "cosine 1/0/" + num(c7, 8) + ", shares monotone over 21 thresholds, rank fixture " + num(r.mean_rank, 2);
    const auto rl = env("DECOY_RANK_LIST");
    const auto mt = env("DECOY_ATTACK_MT"), ht = env("DECOY_ATTACK_HT");
    if (rl && mt && ht) {
        const auto full = validity::rank_list::from_file(*rl);
        auto mean_of = [&](const std::string& path) {
            std::vector<std::string> texts;
            for (const auto& rec : attack::read_records(path)) texts.push_back(rec.completion_text);
            return validity::summarize_ranks(texts, full).mean_rank;
        };
        const double m = mean_of(*mt), h = mean_of(*ht);
        detail += "; reported only: model-targeted " + num(m, 2) + " vs human-targeted " + num(h, 2) +
                  (m < h ? " (lower)" : " (not lower)");
    } else {
        detail += "; directional rank claim not computed (needs DECOY_RANK_LIST, DECOY_ATTACK_MT, DECOY_ATTACK_HT)";
    }
    if (!bad.empty()) {
        detail += "; failed:";
        for (const auto& s : bad) detail += " " + s;
    }
    return {bad.empty() ? status::pass : status::fail, detail};
}

int run_cli(const fs::path& cwd, const std::string& args) {
    const std::string cmd =
        "cd '" + cwd.string() + "' && '" DECOY_CLI "' " + args + " >>'" + (cwd / "log.txt").string() + "' 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

outcome determinism() {
    const auto root = fs::temp_directory_path() / ("decoy_accept_det_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::string corpus_arg;
    if (const auto p = env("DECOY_CORPUS")) {
        corpus_arg = "--corpus '" + fs::absolute(*p).string() + "'";
        if (const auto s = env("DECOY_SPLIT_FILE")) corpus_arg += " --split-file '" + fs::absolute(*s).string() + "'";
    } else {
        write_corpus(decoy_synthetic::synthetic_corpus(160, 60), (root / "corpus.jsonl").string());
        corpus_arg = "--corpus corpus.jsonl";
    }
    const std::string seed = " --seed 11";
    auto fail = [&](const std::string& step) {
        std::string log;
        try {
            log = read_file((root / "log.txt").string());
        } catch (const std::exception&) {
        }
        fs::remove_all(root);
        return outcome{status::fail, step + " failed: " + log.substr(0, 300)};
    };
    // record the completions once
    if (run_cli(root, "train " + corpus_arg + seed + " --out seed_model") != 0) return fail("train");
    if (run_cli(root, "attack " + corpus_arg + seed +
                          " --variant model_targeted --model seed_model --backend identity --cache cache --out recorded") != 0)
        return fail("recording attack");
    for (const char* run : {"run1", "run2"}) {
        const std::string dir = run;
        if (run_cli(root, "train " + corpus_arg + seed + " --out " + dir + "/model") != 0) return fail("train");
        if (run_cli(root, "attack " + corpus_arg + seed + " --variant model_targeted --model " + dir +
                              "/model --backend replay --cache cache --out " + dir + "/attack") != 0)
            return fail("replay attack");
        if (run_cli(root, "evaluate " + corpus_arg + seed + " --model " + dir + "/model --adversarial " + dir +
                              "/attack/records.jsonl --out " + dir + "/eval") != 0)
            return fail("evaluate");
    }
    std::size_t compared = 0;
    std::vector<std::string> differ;
    for (const auto& entry : fs::recursive_directory_iterator(root / "run1")) {
        if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
        const auto rel = fs::relative(entry.path(), root / "run1");
        const auto other = root / "run2" / rel;
        ++compared;
        if (!fs::exists(other) || read_file(entry.path().string()) != read_file(other.string())) differ.push_back(rel.string());
    }
    fs::remove_all(root);
    std::string detail = std::to_string(compared) + " artifacts compared (manifests excluded)";
    for (const auto& d : differ) detail += "; differs: " + d;
    return {differ.empty() && compared >= 7 ? status::pass : status::fail, detail};
}

struct criterion {
    int id;
    const char* title;
    std::function<outcome()> check;
};

const std::vector<criterion>& criteria() {
    static const std::vector<criterion> all{
        {1, "pipeline reproduction", pipeline_reproduction},
        {2, "feature-space scale", feature_scale},
        {3, "length descriptives", descriptives},
        {4, "attack properties", attack_properties},
        {5, "estimator oracle suite", estimator_oracles},
        {6, "validity metrics", validity_metrics},
        {7, "determinism", determinism},
    };
    return all;
}

status run_one(const criterion& c) {
    outcome o;
    try {
        o = c.check();
    } catch (const std::exception& e) {
        o = {status::fail, std::string("error: ") + e.what()};
    }
    const char* tag = o.s == status::pass ? "PASS" : (o.s == status::fail ? "FAIL" : "SKIP");
    std::cout << tag << " [" << c.id << "] " << c.title << ": " << o.detail << std::endl;
    return o.s;
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (only) {
        for (const auto& c : criteria())
            if (c.id == *only) {
                const auto s = run_one(c);
                return s == status::pass ? 0 : (s == status::skip ? 77 : 1);
            }
        std::cerr << "no criterion " << *only << "\n";
        return 2;
    }
    bool failed = false;
    for (const auto& c : criteria()) failed = run_one(c) == status::fail || failed;
    return failed ? 1 : 0;
}
