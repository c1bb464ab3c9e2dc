#pragma once

// Instruction templates for the four rewrite variants. The statement is
// appended after a blank line.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decoy/errors.hpp"

namespace decoy::attack {

enum class variant { unguided, guided, human_targeted, model_targeted };

inline std::string_view to_string(variant v) {
    switch (v) {
        case variant::unguided: return "unguided";
        case variant::guided: return "guided";
        case variant::human_targeted: return "human_targeted";
        case variant::model_targeted:
        default: return "model_targeted";
    }
}

inline variant parse_variant(std::string_view s) {
    for (auto v : {variant::unguided, variant::guided, variant::human_targeted, variant::model_targeted})
        if (to_string(v) == s) return v;
    throw input_error("unknown attack variant \"" + std::string(s) +
                      "\" (expected unguided|guided|human_targeted|model_targeted)");
}

namespace templates {

inline constexpr std::string_view unguided =
    "Rewrite the following deceptive statement so that it may appear truthful to humans. Keep almost the same "
    "length as the original statement";

inline constexpr std::string_view guided =
    "We know from research that liars prefer to avoid providing details that can be verified whereas "
    "truth-tellers prefer to provide details that can be verified. Verifiable details are (i) activities carried "
    "out with identifiable or named persons who the interviewer can consult, (ii) activities that have been "
    "witnessed by identifiable or named persons who the interviewer can consult, (iii) activities that the "
    "interviewee believes may have been captured on CCTV, and (iv) activities that may have been recorded and "
    "documented, such as using debit cards, mobile phones, or computers. Rewrite the following deceptive text by "
    "adding UNVERIFIABLE DETAILS so that it may appear truthful to humans. Pay attention to add only unverifiable "
    "details. Do not add any verifiable detail. Keep almost the same length as the original statement";

inline constexpr std::string_view human_targeted =
    "Below is a deceptive statement that was written by a human. Your task is to rewrite that statement in such a "
    "way that it appears more truthful to a human. The humans who read and assess the statement will be focusing "
    "on the detailedness and use detailedness as an indicator of truthfulness. For them, more details suggest a "
    "higher probability of truthfulness. Your task is to rewrite the statement so that it appears more truthful to "
    "humans. Finish your statement with a complete sentence and adhere to a similar length as the original "
    "statement when you rewrite it.";

// {features} and {percent} are substituted; the opening and closing
// sentences follow the human-targeted wording.
inline constexpr std::string_view model_targeted =
    "Below is a deceptive statement that was written by a human. Your task is to rewrite that statement in such a "
    "way that it appears more truthful to a machine learning text classifier. That classifier is a bag-of-words "
    "model with the following properties: The most important ngrams (in stemmed format) for the model to make a "
    "decision were: {features}. For the statement below, the model predicted that the probability of this "
    "statement being truthful is {percent}%. Your task is to increase that probability by modifying the "
    "statement. Finish your statement with a complete sentence and adhere to a similar length as the original "
    "statement when you rewrite it.";

/// Phrase each built prompt must contain, per variant.
inline std::string_view anchor(variant v) {
    switch (v) {
        case variant::unguided: return "may appear truthful to humans. Keep almost the same length";
        case variant::guided: return "adding UNVERIFIABLE DETAILS";
        case variant::human_targeted: return "use detailedness as an indicator of truthfulness";
        case variant::model_targeted:
        default: return "bag-of-words model with the following properties";
    }
}

inline std::string_view for_variant(variant v) {
    switch (v) {
        case variant::unguided: return unguided;
        case variant::guided: return guided;
        case variant::human_targeted: return human_targeted;
        case variant::model_targeted:
        default: return model_targeted;
    }
}

}  // namespace templates

struct prompt_context {
    std::string statement_text;
    std::optional<int> p_truthful_pct;
    std::optional<std::vector<std::string>> top_features;
};

/// Nearest integer percentage, halves rounded away from zero.
inline int percent_of(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw input_error("probability outside [0, 1]");
    return static_cast<int>(std::lround(p * 100.0));
}

inline std::string join_features(const std::vector<std::string>& features) {
    std::string out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (i) out += ", ";
        out += features[i];
    }
    return out;
}

inline std::string build_prompt(variant v, const prompt_context& ctx) {
    const bool targeted = v == variant::model_targeted;
    if (targeted && (!ctx.p_truthful_pct || !ctx.top_features))
        throw input_error("model_targeted prompt needs both a truth percentage and the top features");
    if (!targeted && (ctx.p_truthful_pct || ctx.top_features))
        throw input_error(std::string(to_string(v)) + " prompt takes no percentage or feature list");
    if (ctx.statement_text.empty()) throw input_error("build_prompt: empty statement");

    std::string body(templates::for_variant(v));
    if (targeted) {
        if (*ctx.p_truthful_pct < 0 || *ctx.p_truthful_pct > 100) throw input_error("percentage outside 0..100");
        if (ctx.top_features->empty()) throw input_error("model_targeted prompt needs at least one feature");
        const auto replace = [&body](std::string_view key, const std::string& value) {
            const auto pos = body.find(key);
            body.replace(pos, key.size(), value);
        };
        replace("{features}", join_features(*ctx.top_features));
        replace("{percent}", std::to_string(*ctx.p_truthful_pct));
    }
    return body + "\n\n" + ctx.statement_text;
}

}  // namespace decoy::attack
