#pragma once

// Corpus -> feature space -> model, and model/prediction -> metrics.

#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/corpus.hpp"
#include "decoy/stats.hpp"
#include "decoy/svm.hpp"
#include "decoy/textprep.hpp"

namespace decoy {

struct fitted_pipeline {
    feature_space space;
    svm::trained_model model;
};

inline fitted_pipeline fit_pipeline(const corpus& c, const feature_config& fcfg, const svm::train_config& tcfg,
                                    const tokenizer& tok = tokenizer()) {
    const auto train = c.select(split::train);
    if (train.empty()) throw input_error("corpus has no training statements");
    std::vector<token_sequence> docs;
    std::vector<veracity> labels;
    docs.reserve(train.size());
    for (const auto* s : train) {
        docs.push_back(prepare_document(s->text, tok));
        labels.push_back(s->label);
    }
    fitted_pipeline out{build_feature_space(docs, fcfg), {}};
    std::vector<sparse_vector> xs;
    xs.reserve(docs.size());
    for (const auto& d : docs) xs.push_back(out.space.vectorize(d));
    out.model = svm::train(xs, labels, out.space, tcfg);
    return out;
}

// ------------------------------------------------------- predictions

/// One line of the prediction interchange file. `decision` is absent for
/// scorers without a margin.
struct prediction_record {
    std::string id;
    veracity label = veracity::deceptive;
    double p_truthful = 0.5;
    std::optional<double> decision;
};

inline nlohmann::json to_json(const prediction_record& p) {
    nlohmann::json j{{"id", p.id}, {"label", to_string(p.label)}, {"p_truthful", p.p_truthful}};
    if (p.decision) j["decision"] = *p.decision;
    return j;
}

inline std::string predictions_to_jsonl(const std::vector<prediction_record>& ps) {
    std::string out;
    for (const auto& p : ps) out += to_json(p).dump() + "\n";
    return out;
}

inline std::vector<prediction_record> parse_predictions(const std::string& content, const std::string& origin) {
    std::vector<prediction_record> out;
    std::unordered_map<std::string, bool> seen;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = origin + ":" + std::to_string(lineno) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw input_error(where + "invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
            throw input_error(where + "prediction needs a string \"id\"");
        if (!j.contains("label") || !j["label"].is_string()) throw input_error(where + "prediction needs a \"label\"");
        if (!j.contains("p_truthful") || !j["p_truthful"].is_number())
            throw input_error(where + "prediction needs a numeric \"p_truthful\"");
        prediction_record p;
        p.id = j["id"].get<std::string>();
        p.label = parse_veracity(j["label"].get<std::string>());
        p.p_truthful = j["p_truthful"].get<double>();
        if (!(p.p_truthful >= 0.0 && p.p_truthful <= 1.0)) throw input_error(where + "p_truthful outside [0, 1]");
        if (j.contains("decision") && !j["decision"].is_null()) {
            if (!j["decision"].is_number()) throw input_error(where + "\"decision\" must be numeric");
            p.decision = j["decision"].get<double>();
        }
        if (seen.count(p.id)) throw input_error(where + "duplicate prediction id \"" + p.id + "\"");
        seen[p.id] = true;
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<prediction_record> read_predictions(const std::string& path) {
    return parse_predictions(read_file(path), path);
}

inline std::vector<prediction_record> predict_all(const svm::classifier& clf, const std::vector<const statement*>& ss,
                                                  const tokenizer& tok = tokenizer()) {
    std::vector<prediction_record> out;
    out.reserve(ss.size());
    for (const auto* s : ss) {
        const auto p = clf.predict_text(s->text, tok);
        out.push_back({s->id, p.label, p.p_truthful, p.decision});
    }
    return out;
}

/// Scores predictions against the labels of `truth`. Every statement in
/// `truth` must have exactly one prediction. AUC uses the decision value
/// when all records carry one and p_truthful otherwise.
inline stats::metrics_report evaluate_predictions(const std::vector<prediction_record>& preds,
                                                  const std::vector<const statement*>& truth,
                                                  const std::string& condition,
                                                  const stats::bootstrap_options& boot = {}) {
    std::unordered_map<std::string, const prediction_record*> by_id;
    for (const auto& p : preds) by_id.emplace(p.id, &p);
    std::vector<veracity> predicted, actual;
    std::vector<double> t_scores, d_scores;
    bool all_decisions = true;
    for (const auto* s : truth) {
        const auto it = by_id.find(s->id);
        if (it == by_id.end()) throw input_error("no prediction for statement \"" + s->id + "\"");
        all_decisions = all_decisions && it->second->decision.has_value();
    }
    for (const auto* s : truth) {
        const auto* p = by_id.at(s->id);
        predicted.push_back(p->label);
        actual.push_back(s->label);
        const double score = all_decisions ? *p->decision : p->p_truthful;
        (s->label == veracity::truthful ? t_scores : d_scores).push_back(score);
    }
    auto r = stats::confusion_metrics(predicted, actual);
    r.condition = condition;
    if (!t_scores.empty() && !d_scores.empty()) {
        r.auc = stats::auc(t_scores, d_scores);
        if (t_scores.size() >= 2 && d_scores.size() >= 2) r.auc_ci = stats::auc_ci(t_scores, d_scores, boot);
    } else {
        r.warnings.push_back("AUC undefined: one class absent");
    }
    if (preds.size() > truth.size()) r.warnings.push_back("predictions for ids outside the evaluated set were ignored");
    return r;
}

}  // namespace decoy
