#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "decoy/attack/backend.hpp"
#include "decoy/attack/prompts.hpp"
#include "decoy/corpus.hpp"
#include "decoy/rng.hpp"
#include "decoy/svm.hpp"

namespace decoy::attack {

struct temperature_policy {
    enum class kind { uniform, fixed };
    kind k = kind::fixed;
    double lo = 0.01;
    double hi = 1.00;
    double value = 0.7;

    static temperature_policy uniform(double lo, double hi) {
        if (!(lo >= 0.0 && hi <= 2.0 && lo <= hi)) throw input_error("uniform temperature bounds must satisfy 0 <= lo <= hi <= 2");
        return {kind::uniform, lo, hi, 0.0};
    }
    static temperature_policy fixed(double t) {
        if (!(t >= 0.0 && t <= 2.0)) throw input_error("fixed temperature must lie in [0, 2]");
        return {kind::fixed, 0.0, 0.0, t};
    }

    [[nodiscard]] bool admits(double t) const { return k == kind::fixed ? t == value : (t >= lo && t <= hi); }

    [[nodiscard]] std::string describe() const {
        char buf[64];
        if (k == kind::fixed)
            std::snprintf(buf, sizeof buf, "fixed(%g)", value);
        else
            std::snprintf(buf, sizeof buf, "uniform(%g,%g)", lo, hi);
        return buf;
    }
};

/// Accepts "uniform(lo,hi)", "fixed(t)" or a bare number.
inline temperature_policy parse_temperature_policy(const std::string& s) {
    auto number = [&](const std::string& x) {
        try {
            std::size_t used = 0;
            const double v = std::stod(x, &used);
            if (used != x.size()) throw std::invalid_argument(x);
            return v;
        } catch (const std::exception&) {
            throw input_error("bad temperature policy \"" + s + "\"");
        }
    };
    auto inner = [&](std::string_view prefix) {
        if (s.rfind(prefix, 0) != 0 || s.back() != ')') throw input_error("bad temperature policy \"" + s + "\"");
        return s.substr(prefix.size(), s.size() - prefix.size() - 1);
    };
    if (s.rfind("uniform(", 0) == 0) {
        const auto args = inner("uniform(");
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw input_error("bad temperature policy \"" + s + "\"");
        return temperature_policy::uniform(number(trim(args.substr(0, comma))), number(trim(args.substr(comma + 1))));
    }
    if (s.rfind("fixed(", 0) == 0) return temperature_policy::fixed(number(trim(inner("fixed("))));
    return temperature_policy::fixed(number(s));
}

/// Fixed policies consume no randomness.
inline double sample_temperature(const temperature_policy& p, rng& gen) {
    return p.k == temperature_policy::kind::fixed ? p.value : gen.uniform(p.lo, p.hi);
}

struct attack_config {
    variant kind = variant::unguided;
    temperature_policy temperature = temperature_policy::uniform(0.01, 1.00);
    int max_tokens_margin = 20;
    std::uint64_t seed = 0;
    std::string model_name = "gpt-4o";
    std::size_t concurrency = 4;
    split part = split::test;
    std::size_t top_k = 10;
    double min_request_interval_s = 0.0;
};

struct adversarial_record {
    std::string original_id;
    variant kind = variant::unguided;
    double temperature_used = 0.0;
    int max_tokens_used = 0;
    std::string prompt_text;
    std::string completion_text;
    bool length_cap_hit = false;
    bool refusal = false;
    std::string created_at;
    std::string backend_fingerprint;
    std::optional<int> p_truthful_pct;
    std::optional<std::vector<std::string>> top_features;

    friend bool operator==(const adversarial_record&, const adversarial_record&) = default;
};

struct attack_failure {
    std::string original_id;
    std::string message;
    int status = 0;
};

struct attack_result {
    std::vector<adversarial_record> records;
    std::vector<attack_failure> failures;
};

/// Empty output, or output that opens like a refusal.
inline bool looks_like_refusal(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) return true;
    std::string head;
    for (char c : t.substr(0, 40)) head += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::string_view p : {"i'm sorry", "i am sorry", "i\xe2\x80\x99m sorry", "sorry, but", "i cannot", "i can't",
                               "i can\xe2\x80\x99t", "i won't", "as an ai"})
        if (head.rfind(p, 0) == 0) return true;
    return false;
}

inline nlohmann::json to_json(const adversarial_record& r) {
    nlohmann::json j{
        {"original_id", r.original_id},
        {"variant", to_string(r.kind)},
        {"temperature_used", r.temperature_used},
        {"max_tokens_used", r.max_tokens_used},
        {"prompt_text", r.prompt_text},
        {"completion_text", r.completion_text},
        {"length_cap_hit", r.length_cap_hit},
        {"refusal", r.refusal},
        {"created_at", r.created_at},
        {"backend_fingerprint", r.backend_fingerprint},
    };
    if (r.p_truthful_pct) j["p_truthful_pct"] = *r.p_truthful_pct;
    if (r.top_features) j["top_features"] = *r.top_features;
    return j;
}

inline adversarial_record record_from_json(const nlohmann::json& j) {
    adversarial_record r;
    try {
        r.original_id = j.at("original_id").get<std::string>();
        r.kind = parse_variant(j.at("variant").get<std::string>());
        r.temperature_used = j.at("temperature_used").get<double>();
        r.max_tokens_used = j.at("max_tokens_used").get<int>();
        r.prompt_text = j.value("prompt_text", "");
        r.completion_text = j.at("completion_text").get<std::string>();
        r.length_cap_hit = j.value("length_cap_hit", false);
        r.refusal = j.value("refusal", false);
        r.created_at = j.value("created_at", "");
        r.backend_fingerprint = j.value("backend_fingerprint", "");
        if (j.contains("p_truthful_pct")) r.p_truthful_pct = j["p_truthful_pct"].get<int>();
        if (j.contains("top_features")) r.top_features = j["top_features"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed adversarial record: ") + e.what());
    }
    return r;
}

inline std::string records_to_jsonl(const std::vector<adversarial_record>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    return out;
}

inline std::vector<adversarial_record> read_records(const std::string& path) {
    std::vector<adversarial_record> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw input_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const input_error& e) {
            throw input_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

namespace detail {

struct job {
    const statement* source;
    completion_request request;
    adversarial_record record;
};

}  // namespace detail

/// Rewrites every deceptive statement of the configured split. Temperatures
/// are drawn in corpus order before any request is sent, so they depend only
/// on the seed; requests then run on up to `concurrency` workers.
inline attack_result run_attack(const corpus& c, const attack_config& cfg, const svm::classifier* model,
                                completion_backend& backend, const tokenizer& tok = tokenizer()) {
    if (cfg.max_tokens_margin < 0) throw input_error("max_tokens margin must be >= 0");
    if (cfg.kind == variant::model_targeted && model == nullptr)
        throw input_error("model_targeted attack requires a trained model");
    const auto targets = c.select(cfg.part, veracity::deceptive);
    if (targets.empty())
        throw input_error("no deceptive statements in the " + std::string(to_string(cfg.part)) + " split");

    std::vector<std::string> features;
    if (cfg.kind == variant::model_targeted)
        for (const auto& f : svm::top_features(model->model(), model->space(), cfg.top_k)) features.push_back(f.term);

    rng gen(derive_seed(cfg.seed, "temperature"));
    std::vector<detail::job> jobs;
    jobs.reserve(targets.size());
    for (const statement* s : targets) {
        detail::job j;
        j.source = s;
        prompt_context ctx{s->text, std::nullopt, std::nullopt};
        if (cfg.kind == variant::model_targeted) {
            ctx.p_truthful_pct = percent_of(model->predict_text(s->text, tok).p_truthful);
            ctx.top_features = features;
        }
        auto& r = j.record;
        r.original_id = s->id;
        r.kind = cfg.kind;
        r.temperature_used = sample_temperature(cfg.temperature, gen);
        r.max_tokens_used = static_cast<int>(s->word_count()) + cfg.max_tokens_margin;
        r.prompt_text = build_prompt(cfg.kind, ctx);
        r.p_truthful_pct = ctx.p_truthful_pct;
        r.top_features = ctx.top_features;
        j.request = {cfg.model_name, r.prompt_text, r.temperature_used, r.max_tokens_used, s->text};
        jobs.push_back(std::move(j));
    }

    std::vector<std::optional<adversarial_record>> done(jobs.size());
    std::vector<std::optional<attack_failure>> failed(jobs.size());
    std::atomic<std::size_t> next{0};
    rate_limiter limiter(cfg.min_request_interval_s);
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            auto& j = jobs[i];
            try {
                limiter.acquire();
                const completion out = backend.complete(j.request);
                auto r = j.record;
                r.completion_text = trim(out.text);
                r.refusal = looks_like_refusal(r.completion_text);
                r.length_cap_hit = out.finish_reason == "length" || word_count(r.completion_text) >= static_cast<std::size_t>(r.max_tokens_used);
                r.created_at = out.created_at;
                r.backend_fingerprint = out.backend.empty() ? backend.fingerprint() : out.backend;
                done[i] = std::move(r);
            } catch (const backend_error& e) {
                failed[i] = attack_failure{j.record.original_id, e.what(), e.status()};
            } catch (const input_error& e) {
                failed[i] = attack_failure{j.record.original_id, e.what(), 0};
            }
        }
    };
    const std::size_t n_workers = std::clamp<std::size_t>(cfg.concurrency, 1, jobs.size());
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    attack_result res;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (done[i]) res.records.push_back(std::move(*done[i]));
        if (failed[i]) res.failures.push_back(std::move(*failed[i]));
    }
    std::sort(res.records.begin(), res.records.end(),
              [](const auto& a, const auto& b) { return a.original_id < b.original_id; });
    std::sort(res.failures.begin(), res.failures.end(),
              [](const auto& a, const auto& b) { return a.original_id < b.original_id; });
    return res;
}

/// The corpus with each deceptive statement of `part` replaced by its
/// rewrite; truthful statements and unmatched ids stay as they were.
inline corpus substitute(const corpus& c, const std::vector<adversarial_record>& records, split part = split::test) {
    std::unordered_map<std::string, const adversarial_record*> by_id;
    for (const auto& r : records)
        if (!by_id.emplace(r.original_id, &r).second)
            throw input_error("duplicate adversarial record for \"" + r.original_id + "\"");
    std::vector<statement> out;
    for (const statement* s : c.select(part)) {
        statement copy = *s;
        if (s->label == veracity::deceptive)
            if (auto it = by_id.find(s->id); it != by_id.end()) copy.text = it->second->completion_text;
        out.push_back(std::move(copy));
    }
    for (const auto& [id, r] : by_id) {
        const auto* s = c.find(id);
        if (s == nullptr) throw input_error("adversarial record \"" + id + "\" has no original statement");
        if (s->label != veracity::deceptive) throw input_error("adversarial record \"" + id + "\" rewrites a truthful statement");
    }
    return corpus(std::move(out), c.source());
}

}  // namespace decoy::attack
