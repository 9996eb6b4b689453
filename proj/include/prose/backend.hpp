#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prose/errors.hpp"

namespace prose {

// One chat-completion request. `role` tags who is asking (agent, user,
// judge, ...) for logging and temperature selection; it is not part of
// the wire payload or the cache key.
struct ChatRequest {
    std::string system;
    std::string user;
    double temperature = 0.0;
    std::optional<long> sampling_seed;
    std::string model_id;
    std::optional<int> max_tokens;
    std::string role;

    void validate() const;
};

// One request/response round trip. Character counts stand in for token
// counts; provider-reported usage is kept when the wire response has it.
struct ChatExchange {
    ChatRequest request;
    std::string response_text;
    long latency_ms = 0;
    size_t prompt_chars = 0;
    size_t completion_chars = 0;
    std::optional<nlohmann::json> usage;
};

// Content address of a request: SHA-256 over
// (model_id, system, user, temperature, sampling_seed).
std::string request_digest(const ChatRequest& req);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatExchange complete(const ChatRequest& request) = 0;
};

// Deterministic test backend. Rules are matched in order; the first live
// match answers. A request matching no rule raises UnscriptedRequestError
// carrying the request digest.
class ScriptedBackend : public ChatBackend {
public:
    struct Rule {
        // Exactly one of these is set.
        std::optional<std::string> exact;               // full user prompt
        std::optional<std::string> digest;              // request digest
        std::vector<std::string> contains;              // all substrings of user prompt
        std::string response;
        long max_uses = -1;                             // -1 = unlimited
        long uses = 0;
    };

    ScriptedBackend() = default;

    // Loads a JSON script: a list of
    //   {"match": {"exact": s} | {"digest": s} | {"contains": [s, ...]},
    //    "response": s, "max_uses": n?}
    static ScriptedBackend from_file(const std::filesystem::path& path);
    static ScriptedBackend from_json(const nlohmann::json& script);

    void add_exact(std::string user_prompt, std::string response, long max_uses = -1);
    void add_digest(std::string digest, std::string response, long max_uses = -1);
    void add_contains(std::vector<std::string> substrings, std::string response,
                      long max_uses = -1);

    ChatExchange complete(const ChatRequest& request) override;

    long total_calls() const { return total_calls_; }

private:
    std::vector<Rule> rules_;
    long total_calls_ = 0;
};

// Always throws; stands behind the replay cache when networking must be
// provably off.
class FailBackend : public ChatBackend {
public:
    ChatExchange complete(const ChatRequest& request) override;
};

// Content-addressed record/replay cache around another backend. A hit
// bypasses the inner backend entirely; a miss is forwarded and the
// exchange written as one JSON document per request digest.
class ReplayCacheBackend : public ChatBackend {
public:
    ReplayCacheBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cache_dir);

    ChatExchange complete(const ChatRequest& request) override;

    long hits() const { return hits_; }
    long misses() const { return misses_; }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::filesystem::path cache_dir_;
    std::mutex write_mutex_;
    long hits_ = 0;
    long misses_ = 0;
};

std::shared_ptr<ChatBackend> record_replay_wrap(std::shared_ptr<ChatBackend> inner,
                                                const std::filesystem::path& cache_dir);

// Wire client for OpenAI-compatible chat-completion endpoints with bounded
// exponential backoff on transport failures.
struct HttpBackendConfig {
    std::string base_url;     // falls back to $PROSE_API_BASE
    std::string api_key;      // falls back to $PROSE_API_KEY
    int max_attempts = 3;
    int backoff_initial_ms = 250;
};

class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ChatExchange complete(const ChatRequest& request) override;

private:
    HttpBackendConfig config_;
};

}  // namespace prose
