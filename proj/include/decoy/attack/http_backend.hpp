#pragma once

// OpenAI-compatible chat-completions client. Needs OpenSSL for https URLs.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "decoy/attack/backend.hpp"

namespace decoy::attack {

struct http_options {
    std::string base_url = "https://api.openai.com/v1";  // scheme://host[:port][/prefix]
    std::string api_key;
    int timeout_s = 120;
    retry_policy retry;
};

/// Reads ATTACK_API_KEY; empty when unset.
inline std::string api_key_from_env() {
    const char* k = std::getenv("ATTACK_API_KEY");
    return k ? std::string(k) : std::string();
}

class http_backend final : public completion_backend {
  public:
    explicit http_backend(http_options opt) : opt_(std::move(opt)) {
        const auto scheme_end = opt_.base_url.find("://");
        if (scheme_end == std::string::npos) throw input_error("base URL needs a scheme: " + opt_.base_url);
        const auto path_start = opt_.base_url.find('/', scheme_end + 3);
        origin_ = opt_.base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : opt_.base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    completion complete(const completion_request& req) override {
        return with_retry([&] { return once(req); }, opt_.retry);
    }

    [[nodiscard]] std::string fingerprint() const override { return "chat-completions@" + opt_.base_url; }

  private:
    completion once(const completion_request& req) {
        httplib::Client client(origin_);
        client.set_connection_timeout(opt_.timeout_s, 0);
        client.set_read_timeout(opt_.timeout_s, 0);
        httplib::Headers headers;
        if (!opt_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opt_.api_key);
        const nlohmann::json body{
            {"model", req.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens},
            {"n", 1},
        };
        auto res = client.Post(prefix_ + "/chat/completions", headers, body.dump(), "application/json");
        if (!res) throw backend_error("request to " + origin_ + " failed: " + httplib::to_string(res.error()), 0);
        if (res->status != 200) {
            std::string detail = res->body.substr(0, 300);
            throw backend_error("backend returned HTTP " + std::to_string(res->status) + ": " + detail, res->status);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
            const auto& choice = j.at("choices").at(0);
            completion c;
            const auto& content = choice.at("message").at("content");
            c.text = content.is_null() ? std::string() : trim(content.get<std::string>());
            c.finish_reason = choice.value("finish_reason", "");
            c.backend = fingerprint();
            c.created_at = utc_timestamp();
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw backend_error(std::string("malformed completion response: ") + e.what(), res->status);
        }
    }

    http_options opt_;
    std::string origin_;
    std::string prefix_;
};

}  // namespace decoy::attack
