#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "decoy/anova.hpp"
#include "decoy/attack/engine.hpp"
#include "decoy/attack/http_backend.hpp"
#include "decoy/csv.hpp"
#include "decoy/pipeline.hpp"
#include "decoy/report.hpp"
#include "decoy/validity.hpp"

#ifndef DECOY_VERSION
#define DECOY_VERSION "0.0.0"
#endif

using namespace decoy;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write " + path.string());
    out << content;
    if (!out) throw input_error("write failed for " + path.string());
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

/// Collects provenance while a command runs and writes it next to the outputs.
class manifest_writer {
  public:
    manifest_writer(std::string command, std::uint64_t seed, fs::path out_dir) : out_dir_(std::move(out_dir)) {
        m_.command = std::move(command);
        m_.seed = seed;
        m_.tool_version = DECOY_VERSION;
        m_.started_at = attack::utc_timestamp();
    }
    report::run_manifest& get() { return m_; }

    void output(const std::string& role, const std::string& name, const std::string& content) {
        const auto p = out_dir_ / name;
        write_text(p, content);
        m_.add_output(role, p.string());
    }

    void finish() {
        m_.finished_at = attack::utc_timestamp();
        write_text(out_dir_ / "manifest.json", pretty(report::to_json(m_)));
    }

  private:
    report::run_manifest m_;
    fs::path out_dir_;
};

struct corpus_options {
    std::string path;
    std::string split_file;
    std::string stopwords;

    void add(CLI::App* app, bool required = true) {
        auto* o = app->add_option("--corpus", path, "statements (.jsonl or .csv)");
        if (required) o->required();
        o->check(CLI::ExistingFile);
        app->add_option("--split-file", split_file, "id,split sidecar overriding record splits")->check(CLI::ExistingFile);
        app->add_option("--stopwords", stopwords, "stopword list, one per line")->check(CLI::ExistingFile);
    }

    [[nodiscard]] corpus load() const {
        return load_corpus(path, std::nullopt,
                           split_file.empty() ? std::optional<std::string>{} : std::optional<std::string>{split_file});
    }
    [[nodiscard]] tokenizer tok() const {
        return stopwords.empty() ? tokenizer() : tokenizer(text::stopword_set::from_file(stopwords));
    }
    void record(report::run_manifest& m) const {
        m.add_input("corpus", path);
        if (!split_file.empty()) m.add_input("split_file", split_file);
        if (!stopwords.empty()) m.add_input("stopwords", stopwords);
    }
};

svm::classifier load_classifier(const std::string& dir, report::run_manifest* m = nullptr) {
    const auto model_path = (fs::path(dir) / "model.json").string();
    const auto space_path = (fs::path(dir) / "space.json").string();
    if (m) {
        m->add_input("model", model_path);
        m->add_input("space", space_path);
    }
    return svm::classifier(svm::model_from_json(read_json(model_path)), feature_space::from_json(read_json(space_path)));
}

json counts_json(const corpus& c) {
    json j = json::object();
    for (auto s : {split::train, split::test})
        for (auto v : {veracity::truthful, veracity::deceptive})
            j[std::string(to_string(s))][std::string(to_string(v))] = c.count(s, v);
    return j;
}

// ------------------------------------------------------------- ingest

struct ingest_cmd {
    corpus_options in;
    std::string out;
    std::uint64_t* seed;

    explicit ingest_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("ingest", "validate a corpus and write a normalized copy");
        in.add(sub);
        sub->add_option("--out", out, "output directory")->required();
        sub->callback([this] { run(); });
    }

    void run() const {
        const auto c = in.load();
        manifest_writer mw("ingest", *seed, out);
        in.record(mw.get());
        json summary{{"n", c.size()}, {"counts", counts_json(c)}, {"source_sha256", c.source().sha256}};
        for (const auto& [k, g] : describe(c, grouping::split_label))
            summary["word_count"][k] = {{"n", g.n}, {"mean", g.mean}, {"sd", g.sd}};
        mw.output("corpus", "corpus.jsonl", to_jsonl(c));
        mw.output("summary", "summary.json", pretty(summary));
        mw.finish();
        std::cout << "ingested " << c.size() << " statements\n";
    }
};

// -------------------------------------------------------------- train

struct train_cmd {
    corpus_options in;
    std::string out;
    std::uint64_t* seed;
    std::size_t folds = 5;
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0};
    double min_doc_fraction = 0.01;
    int ngram_max = 3;
    bool no_nzv = false;
    bool serial = false;

    explicit train_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("train", "fit the n-gram SVM and write model.json, space.json, cv.json");
        in.add(sub);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 100));
        sub->add_option("--c-grid", c_grid, "cost values searched by cross-validation")->delimiter(',');
        sub->add_option("--min-doc-fraction", min_doc_fraction, "minimum share of training documents per term")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--ngram-max", ngram_max, "largest n-gram order")->check(CLI::Range(1, 5));
        sub->add_flag("--no-nzv", no_nzv, "keep near-zero-variance terms");
        sub->add_flag("--serial", serial, "run folds on one thread");
        sub->callback([this] { run(); });
    }

    void run() const {
        const auto c = in.load();
        feature_config fc;
        fc.min_doc_fraction = min_doc_fraction;
        fc.ngram_max = ngram_max;
        fc.apply_nzv = !no_nzv;
        svm::train_config tc;
        tc.k_folds = folds;
        tc.c_grid = c_grid;
        tc.seed = derive_seed(*seed, "train");
        tc.parallel_folds = !serial;
        if (c_grid.empty()) throw input_error("--c-grid is empty");
        for (double v : c_grid)
            if (!(v > 0)) throw input_error("C values must be positive");

        manifest_writer mw("train", *seed, out);
        in.record(mw.get());
        mw.get().config = {{"folds", folds},        {"c_grid", c_grid},     {"min_doc_fraction", min_doc_fraction},
                           {"ngram_max", ngram_max}, {"nzv", !no_nzv},       {"train_seed", tc.seed}};

        const auto fitted = fit_pipeline(c, fc, tc, in.tok());
        const auto model_json = svm::to_json(fitted.model);
        json cv = model_json.at("cv");
        cv["C"] = fitted.model.cost;
        cv["n_features"] = fitted.space.size();
        mw.output("space", "space.json", pretty(fitted.space.to_json()));
        mw.output("model", "model.json", pretty(model_json));
        mw.output("cv", "cv.json", pretty(cv));
        mw.finish();

        double acc = 0.0;
        for (const auto& g : fitted.model.grid)
            if (g.cost == fitted.model.cost) acc = g.mean_accuracy;
        std::cout << "features " << fitted.space.size() << ", C " << fitted.model.cost << ", cv accuracy "
                  << report::fmt(acc) << "\n";
    }
};

// ------------------------------------------------------------- attack

struct attack_cmd {
    corpus_options in;
    std::uint64_t* seed;
    std::string out;
    std::string variant_name = "unguided";
    std::string model_dir;
    std::string backend = "http";
    std::string cache_dir;
    std::string temperature = "uniform(0.01,1.00)";
    int margin = 20;
    std::size_t concurrency = 4;
    std::string model_name = "gpt-4o";
    std::string base_url = "https://api.openai.com/v1";
    double min_interval = 0.0;
    std::size_t top_k = 10;

    explicit attack_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("attack", "rewrite deceptive test statements with a language model");
        in.add(sub);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--variant", variant_name, "unguided, guided, human_targeted or model_targeted")
            ->check(CLI::IsMember({"unguided", "guided", "human_targeted", "model_targeted"}));
        sub->add_option("--model", model_dir, "trained model directory (model_targeted)");
        sub->add_option("--backend", backend, "http, replay or identity")
            ->check(CLI::IsMember({"http", "replay", "identity"}));
        sub->add_option("--cache", cache_dir, "response cache directory");
        sub->add_option("--temperature", temperature, "uniform(lo,hi) or fixed(t)");
        sub->add_option("--max-tokens-margin", margin, "tokens allowed beyond the source length")->check(CLI::NonNegativeNumber);
        sub->add_option("--concurrency", concurrency, "parallel requests")->check(CLI::Range(1, 64));
        sub->add_option("--model-name", model_name, "completion model identifier");
        sub->add_option("--base-url", base_url, "chat-completions endpoint root");
        sub->add_option("--min-interval", min_interval, "seconds between request starts")->check(CLI::NonNegativeNumber);
        sub->add_option("--top-k", top_k, "features shown to model_targeted prompts")->check(CLI::Range(1, 1000));
        sub->callback([this] { run(); });
    }

    void run() const {
        attack::attack_config cfg;
        cfg.kind = attack::parse_variant(variant_name);
        cfg.temperature = attack::parse_temperature_policy(temperature);
        cfg.max_tokens_margin = margin;
        cfg.seed = derive_seed(*seed, "attack");
        cfg.model_name = model_name;
        cfg.concurrency = concurrency;
        cfg.min_request_interval_s = min_interval;
        cfg.top_k = top_k;
        if (cfg.kind == attack::variant::model_targeted && model_dir.empty())
            throw input_error("model_targeted needs --model <trained model directory>");
        if (backend == "replay" && cache_dir.empty()) throw input_error("--backend replay needs --cache");

        const auto c = in.load();
        manifest_writer mw("attack", *seed, out);
        in.record(mw.get());
        std::optional<svm::classifier> clf;
        if (!model_dir.empty()) clf.emplace(load_classifier(model_dir, &mw.get()));

        std::optional<attack::response_cache> cache;
        if (!cache_dir.empty()) cache.emplace(cache_dir);
        std::unique_ptr<attack::completion_backend> inner;
        std::unique_ptr<attack::completion_backend> wrapped;
        if (backend == "replay") {
            inner = std::make_unique<attack::replay_backend>(*cache);
        } else {
            if (backend == "identity") {
                inner = std::make_unique<attack::identity_backend>();
            } else {
                attack::http_options opt;
                opt.base_url = base_url;
                opt.api_key = attack::api_key_from_env();
                if (opt.api_key.empty()) throw input_error("ATTACK_API_KEY is not set");
                inner = std::make_unique<attack::http_backend>(opt);
            }
            if (cache) wrapped = std::make_unique<attack::caching_backend>(*inner, *cache);
        }
        auto& be = wrapped ? *wrapped : *inner;

        mw.get().config = {{"variant", variant_name},     {"backend", backend},      {"temperature", cfg.temperature.describe()},
                           {"max_tokens_margin", margin}, {"model_name", model_name}, {"concurrency", concurrency},
                           {"attack_seed", cfg.seed},     {"top_k", top_k},          {"cache", cache_dir}};
        const auto result = attack::run_attack(c, cfg, clf ? &*clf : nullptr, be, in.tok());

        json failures = json::array();
        for (const auto& f : result.failures)
            failures.push_back({{"id", f.original_id}, {"message", f.message}, {"status", f.status}});
        std::size_t refusals = 0, capped = 0;
        for (const auto& r : result.records) {
            refusals += r.refusal;
            capped += r.length_cap_hit;
        }
        mw.output("records", "records.jsonl", attack::records_to_jsonl(result.records));
        mw.output("failures", "failures.json", pretty(failures));
        mw.finish();
        std::cout << result.records.size() << " rewritten, " << result.failures.size() << " failed, " << refusals
                  << " refusals, " << capped << " length-capped\n";
        for (const auto& f : result.failures) std::cerr << "failed " << f.original_id << ": " << f.message << "\n";
        if (result.records.empty() && !result.failures.empty())
            throw backend_error("every request failed", result.failures.front().status);
    }
};

// ----------------------------------------------------------- evaluate

struct evaluate_cmd {
    corpus_options in;
    std::uint64_t* seed;
    std::string out;
    std::string model_dir;
    std::string predictions;
    std::string adversarial;
    std::string condition;
    std::size_t resamples = 2000;
    double level = 0.99;

    explicit evaluate_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("evaluate", "score a model or a prediction file on the test split");
        in.add(sub);
        sub->add_option("--out", out, "output directory")->required();
        auto* m = sub->add_option("--model", model_dir, "trained model directory");
        auto* p = sub->add_option("--predictions", predictions, "prediction JSONL from another scorer")
                      ->check(CLI::ExistingFile);
        m->excludes(p);
        sub->add_option("--adversarial", adversarial, "attack records replacing the deceptive test statements")
            ->check(CLI::ExistingFile);
        sub->add_option("--condition", condition, "row label in the report");
        sub->add_option("--resamples", resamples, "bootstrap resamples for the AUC interval")->check(CLI::Range(100, 1000000));
        sub->add_option("--level", level, "confidence level")->check(CLI::Range(0.5, 0.9999));
        sub->callback([this] { run(); });
    }

    void run() const {
        if (model_dir.empty() == predictions.empty()) throw input_error("give exactly one of --model or --predictions");
        const auto c = in.load();
        manifest_writer mw("evaluate", *seed, out);
        in.record(mw.get());

        corpus evaluated;
        std::string label = condition.empty() ? "original" : condition;
        if (!adversarial.empty()) {
            const auto records = attack::read_records(adversarial);
            mw.get().add_input("adversarial", adversarial);
            evaluated = attack::substitute(c, records);
            if (condition.empty() && !records.empty()) label = std::string(attack::to_string(records.front().kind));
        } else {
            std::vector<statement> test;
            for (const auto* s : c.select(split::test)) test.push_back(*s);
            evaluated = corpus(std::move(test));
        }
        const auto truth = evaluated.select(std::nullopt);
        if (truth.empty()) throw input_error("no test statements to evaluate");

        std::vector<prediction_record> preds;
        if (!model_dir.empty()) {
            const auto clf = load_classifier(model_dir, &mw.get());
            preds = predict_all(clf, truth, in.tok());
        } else {
            mw.get().add_input("predictions", predictions);
            preds = read_predictions(predictions);
        }
        const stats::bootstrap_options boot{level, resamples, derive_seed(*seed, "bootstrap")};
        const auto r = evaluate_predictions(preds, truth, label, boot);
        mw.get().config = {{"condition", label}, {"resamples", resamples}, {"level", level}, {"bootstrap_seed", boot.seed}};

        const json metrics{{"format", "decoy.metrics"},
                           {"version", 1},
                           {"row", report::classification_row(r)},
                           {"bootstrap", {{"level", level}, {"resamples", resamples}, {"seed", boot.seed}}}};
        report::table t{"Classification", report::classification_columns(), {report::classification_row(r)}, {}};
        if (!model_dir.empty()) mw.output("predictions", "predictions.jsonl", predictions_to_jsonl(preds));
        mw.output("metrics", "metrics.json", pretty(metrics));
        mw.output("report", "report.md", report::to_markdown(t));
        mw.finish();
        std::cout << label << ": accuracy " << report::fmt(r.accuracy);
        if (r.auc) std::cout << ", AUC " << report::fmt(*r.auc);
        std::cout << "\n";
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    }
};

// ----------------------------------------------------------- validate

struct validate_cmd {
    corpus_options in;
    std::uint64_t* seed;
    std::string out;
    std::vector<std::string> adversarial;
    std::string embeddings;
    std::string rank_list_path;
    double level = 0.99;

    explicit validate_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("validate", "similarity, vocabulary rank and length checks on rewrites");
        in.add(sub);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--adversarial", adversarial, "attack records, optionally as name=path");
        sub->add_option("--embeddings", embeddings, "word-vector text file")->check(CLI::ExistingFile);
        sub->add_option("--rank-list", rank_list_path, "frequency-ranked word list, one per line")
            ->check(CLI::ExistingFile);
        sub->add_option("--level", level, "confidence level for d")->check(CLI::Range(0.5, 0.9999));
        sub->callback([this] { run(); });
    }

    void run() const {
        const auto c = in.load();
        manifest_writer mw("validate", *seed, out);
        in.record(mw.get());
        std::optional<validity::embedding_provider> emb;
        std::optional<validity::rank_list> ranks;
        if (!embeddings.empty()) {
            emb = validity::embedding_provider::from_file(embeddings);
            mw.get().add_input("embeddings", embeddings);
        }
        if (!rank_list_path.empty()) {
            ranks = validity::rank_list::from_file(rank_list_path);
            mw.get().add_input("rank_list", rank_list_path);
        }

        std::vector<std::string> original_texts;
        for (const auto* s : c.select(split::test, veracity::deceptive)) original_texts.push_back(s->text);

        report::table sim{"Validity", report::similarity_columns(), {}, {}};
        report::table len{"Length", report::length_columns(), {}, {}};
        if (ranks) sim.rows.push_back(report::validity_row("original", std::nullopt, validity::summarize_ranks(original_texts, *ranks)));
        len.rows.push_back(report::length_row_json(validity::length_report("original", c.select(split::test), level)));

        json contrasts = json::array();
        std::vector<std::pair<std::string, validity::similarity_summary>> summaries;
        for (const auto& spec : adversarial) {
            std::string name, path = spec;
            if (const auto eq = spec.find('='); eq != std::string::npos && !fs::exists(spec)) {
                name = spec.substr(0, eq);
                path = spec.substr(eq + 1);
            }
            const auto records = attack::read_records(path);
            mw.get().add_input("adversarial", path);
            if (name.empty()) name = records.empty() ? path : std::string(attack::to_string(records.front().kind));
            const auto modified = attack::substitute(c, records);

            std::vector<validity::text_pair> pairs;
            std::vector<std::string> texts;
            for (const auto& r : records) {
                const auto* orig = c.find(r.original_id);
                pairs.push_back({r.original_id, orig->text, r.completion_text});
                texts.push_back(r.completion_text);
            }
            std::optional<validity::similarity_summary> s;
            std::optional<validity::rank_summary> rk;
            if (emb) s = validity::similarity_report(pairs, *emb);
            if (ranks) rk = validity::summarize_ranks(texts, *ranks);
            if (s || rk) sim.rows.push_back(report::validity_row(name, s, rk));
            if (s) summaries.emplace_back(name, *s);
            len.rows.push_back(report::length_row_json(validity::length_report(name, modified.select(std::nullopt), level)));
        }
        for (std::size_t i = 0; i < summaries.size(); ++i)
            for (std::size_t j = i + 1; j < summaries.size(); ++j) {
                if (summaries[i].second.pairs.size() < 2 || summaries[j].second.pairs.size() < 2) continue;
                try {
                    const auto d = validity::compare_similarity(summaries[i].second, summaries[j].second, level);
                    contrasts.push_back({{"a", summaries[i].first}, {"b", summaries[j].first}, {"d", d.d},
                                         {"ci_low", d.ci_low}, {"ci_high", d.ci_high}});
                } catch (const input_error& e) {
                    contrasts.push_back({{"a", summaries[i].first}, {"b", summaries[j].first}, {"error", e.what()}});
                }
            }

        json result{{"format", "decoy.validity"},
                    {"version", 1},
                    {"similarity_rows", sim.rows},
                    {"length_rows", len.rows},
                    {"similarity_contrasts", contrasts},
                    {"embeddings", emb ? json(emb->fingerprint()) : json(nullptr)},
                    {"rank_list", ranks ? json(ranks->fingerprint()) : json(nullptr)}};
        std::string md;
        if (!sim.rows.empty()) md += report::to_markdown(sim) + "\n";
        md += report::to_markdown(len);
        mw.output("validity", "validity.json", pretty(result));
        mw.output("report", "validity.md", md);
        mw.finish();
        std::cout << "validated " << adversarial.size() << " rewrite set(s)\n";
    }
};

// ------------------------------------------------------------- report

struct report_cmd {
    std::uint64_t* seed;
    std::string out;
    std::vector<std::string> inputs;
    std::string markdown;
    std::string anova_csv;
    std::string value_column = "value";
    std::vector<std::string> factors;

    explicit report_cmd(std::uint64_t* s) : seed(s) {}

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("report", "merge metrics and validity outputs into report tables");
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--input", inputs, "metrics.json or validity.json files")->check(CLI::ExistingFile);
        sub->add_option("--from-markdown", markdown, "read a report.md back into JSON")->check(CLI::ExistingFile);
        sub->add_option("--anova", anova_csv, "long-format CSV for a factorial ANOVA")->check(CLI::ExistingFile);
        sub->add_option("--value", value_column, "response column of the ANOVA CSV");
        sub->add_option("--factors", factors, "factor columns of the ANOVA CSV")->delimiter(',');
        sub->callback([this] { run(); });
    }

    static std::vector<report::table> specs() {
        return {{"Classification", report::classification_columns(), {}, {}},
                {"Validity", report::similarity_columns(), {}, {}},
                {"Length", report::length_columns(), {}, {}},
                {"Factorial ANOVA", report::anova_columns(), {}, {}}};
    }

    void run() const {
        if (inputs.empty() && markdown.empty() && anova_csv.empty())
            throw input_error("report needs --input, --from-markdown or --anova");
        manifest_writer mw("report", *seed, out);
        std::vector<report::table> tables;
        if (!markdown.empty()) {
            mw.get().add_input("markdown", markdown);
            tables = report::parse_markdown(read_file(markdown), specs());
            if (tables.empty()) throw input_error(markdown + ": no report tables found");
        }
        auto spec = specs();
        for (const auto& path : inputs) {
            const auto j = read_json(path);
            mw.get().add_input("input", path);
            const auto fmt = j.value("format", "");
            if (fmt == "decoy.metrics") {
                spec[0].rows.push_back(j.at("row"));
            } else if (fmt == "decoy.validity") {
                for (const auto& r : j.at("similarity_rows")) spec[1].rows.push_back(r);
                for (const auto& r : j.at("length_rows")) spec[2].rows.push_back(r);
            } else {
                throw input_error(path + ": not a metrics or validity file");
            }
        }
        if (!anova_csv.empty()) {
            if (factors.empty()) throw input_error("--anova needs --factors");
            mw.get().add_input("anova", anova_csv);
            const auto t = csv::parse(read_file(anova_csv));
            const auto vcol = t.column(value_column);
            if (vcol < 0) throw input_error(anova_csv + ": no column \"" + value_column + "\"");
            std::vector<std::ptrdiff_t> fcols;
            for (const auto& f : factors) {
                fcols.push_back(t.column(f));
                if (fcols.back() < 0) throw input_error(anova_csv + ": no column \"" + f + "\"");
            }
            std::vector<stats::anova_observation> obs;
            for (const auto& row : t.rows) {
                stats::anova_observation o;
                try {
                    o.value = std::stod(row[static_cast<std::size_t>(vcol)]);
                } catch (const std::exception&) {
                    throw input_error(anova_csv + ": non-numeric value \"" + row[static_cast<std::size_t>(vcol)] + "\"");
                }
                for (auto fc : fcols) o.levels.push_back(row[static_cast<std::size_t>(fc)]);
                obs.push_back(std::move(o));
            }
            spec[3].rows = report::anova_rows(stats::factorial_anova(obs, factors));
            spec[3].notes.push_back("Type II sums of squares.");
        }
        for (auto& s : spec)
            if (!s.rows.empty()) tables.push_back(std::move(s));

        json tj = json::array();
        std::string md;
        for (const auto& t : tables) {
            tj.push_back(report::to_json(t));
            md += (md.empty() ? "" : "\n") + report::to_markdown(t);
        }
        json inputs_json = json::array();
        for (const auto& r : mw.get().inputs) inputs_json.push_back({{"role", r.role}, {"sha256", r.sha256}});
        mw.output("report_json", "report.json",
                  pretty({{"format", "decoy.report"}, {"version", 1}, {"tables", tj}, {"inputs", inputs_json}}));
        mw.output("report", "report.md", md);
        mw.finish();
        std::cout << "wrote " << tables.size() << " table(s)\n";
    }
};

int exit_for(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deception classifier adversarial testbed"};
    app.set_version_flag("--version", DECOY_VERSION);
    app.set_config("--config", "", "TOML configuration file");
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "master seed; per-stage seeds derive from it");

    ingest_cmd ingest(&seed);
    train_cmd train(&seed);
    attack_cmd attack(&seed);
    evaluate_cmd evaluate(&seed);
    validate_cmd validate(&seed);
    report_cmd rep(&seed);
    ingest.add(app);
    train.add(app);
    attack.add(app);
    evaluate.add(app);
    validate.add(app);
    rep.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(exit_code::usage);
    } catch (const input_error& e) {
        return exit_for(e, static_cast<int>(exit_code::usage));
    } catch (const backend_error& e) {
        return exit_for(e, static_cast<int>(exit_code::backend));
    } catch (const std::exception& e) {
        return exit_for(e, static_cast<int>(exit_code::internal));
    }
    return 0;
}
