#pragma once

// Completion backends: an identity echo, a replay-only cache reader, and a
// caching wrapper around any live backend. Live HTTP lives in
// http_backend.hpp so this header carries no TLS dependency.

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "decoy/errors.hpp"
#include "decoy/hash.hpp"

namespace decoy::attack {

struct completion_request {
    std::string model;
    std::string prompt;
    double temperature = 0.7;
    int max_tokens = 0;
    std::string source_text;  // only the identity backend looks at this
};

struct completion {
    std::string text;
    std::string finish_reason;  // "stop", "length", ...
    std::string backend;        // fingerprint of the backend that produced the text
    std::string created_at;
    bool from_cache = false;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Content address of a request: sha256 of the canonical (key-sorted) JSON
/// of model, prompt, temperature and max_tokens.
inline std::string cache_key(const completion_request& r) {
    const nlohmann::json j{
        {"model", r.model}, {"prompt", r.prompt}, {"temperature", r.temperature}, {"max_tokens", r.max_tokens}};
    return sha256_hex(j.dump());
}

class completion_backend {
  public:
    virtual ~completion_backend() = default;
    virtual completion complete(const completion_request& req) = 0;
    [[nodiscard]] virtual std::string fingerprint() const = 0;
};

/// No-op attacker: returns the statement it was asked to rewrite.
class identity_backend final : public completion_backend {
  public:
    completion complete(const completion_request& req) override {
        return {req.source_text, "stop", fingerprint(), utc_timestamp(), false};
    }
    [[nodiscard]] std::string fingerprint() const override { return "identity"; }
};

/// Directory of <key>.json entries. Reads are lock-free; writes go through
/// a temp file and rename under a mutex.
class response_cache {
  public:
    explicit response_cache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw input_error("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }

    [[nodiscard]] std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

    [[nodiscard]] std::optional<completion> load(const std::string& key) const {
        const auto p = path_for(key);
        if (!std::filesystem::exists(p)) return std::nullopt;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(p.string()));
        } catch (const nlohmann::json::exception& e) {
            throw input_error("corrupt cache entry " + p.string() + ": " + e.what());
        }
        if (j.value("key", "") != key) throw input_error("cache entry " + p.string() + " has a mismatched key");
        return completion{j.at("completion").get<std::string>(), j.value("finish_reason", ""),
                          j.value("backend", ""), j.value("created_at", ""), true};
    }

    void store(const std::string& key, const completion_request& req, const completion& c) {
        const nlohmann::json j{
            {"key", key},
            {"request",
             {{"model", req.model}, {"prompt", req.prompt}, {"temperature", req.temperature}, {"max_tokens", req.max_tokens}}},
            {"completion", c.text},
            {"finish_reason", c.finish_reason},
            {"backend", c.backend},
            {"created_at", c.created_at},
        };
        std::lock_guard lock(mutex_);
        const auto final_path = path_for(key);
        const auto tmp = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw input_error("cannot write cache entry " + tmp);
            out << j.dump(2) << '\n';
        }
        std::filesystem::rename(tmp, final_path);
    }

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::mutex mutex_;
};

/// Serves recorded completions only.
class replay_backend final : public completion_backend {
  public:
    explicit replay_backend(response_cache& cache) : cache_(cache) {}

    completion complete(const completion_request& req) override {
        const auto key = cache_key(req);
        if (auto hit = cache_.load(key)) return *hit;
        throw cache_miss_error(key);
    }
    [[nodiscard]] std::string fingerprint() const override { return "replay"; }

  private:
    response_cache& cache_;
};

/// Looks requests up in the cache first and records every live answer.
class caching_backend final : public completion_backend {
  public:
    caching_backend(completion_backend& inner, response_cache& cache) : inner_(inner), cache_(cache) {}

    completion complete(const completion_request& req) override {
        const auto key = cache_key(req);
        if (auto hit = cache_.load(key)) return *hit;
        auto c = inner_.complete(req);
        if (c.backend.empty()) c.backend = inner_.fingerprint();
        if (c.created_at.empty()) c.created_at = utc_timestamp();
        cache_.store(key, req, c);
        ++live_calls_;
        return c;
    }
    [[nodiscard]] std::string fingerprint() const override { return inner_.fingerprint(); }
    [[nodiscard]] std::size_t live_calls() const { return live_calls_; }

  private:
    completion_backend& inner_;
    response_cache& cache_;
    std::atomic<std::size_t> live_calls_{0};
};

// ------------------------------------------------------------ retries

/// 408, 429, 5xx and transport failures (status 0) are worth retrying.
inline bool is_transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

struct retry_policy {
    int attempts = 3;
    double initial_delay_s = 1.0;
    double multiplier = 2.0;
    std::function<void(double)> sleep = [](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
};

template <typename Fn>
auto with_retry(Fn&& fn, const retry_policy& policy) -> decltype(fn()) {
    double delay = policy.initial_delay_s;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const cache_miss_error&) {
            throw;
        } catch (const backend_error& e) {
            if (!is_transient(e.status()) || attempt >= policy.attempts) throw;
        }
        if (policy.sleep) policy.sleep(delay);
        delay *= policy.multiplier;
    }
}

/// Spaces request starts at least `min_interval_s` apart across threads.
class rate_limiter {
  public:
    explicit rate_limiter(double min_interval_s = 0.0) : interval_(min_interval_s) {}

    void acquire() {
        if (interval_ <= 0.0) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            slot = std::max(now, next_);
            next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(interval_));
        }
        std::this_thread::sleep_until(slot);
    }

  private:
    double interval_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_{};
};

}  // namespace decoy::attack
