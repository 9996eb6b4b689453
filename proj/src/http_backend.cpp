#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "prose/backend.hpp"

namespace prose {

using json = nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

// Splits "http://host:port/v1" into (scheme://host:port, /v1).
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    size_t path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string path = base_url.substr(path_start);
    if (path == "/") path.clear();
    return {base_url.substr(0, path_start), path};
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) config_.base_url = env_or("PROSE_API_BASE", "");
    if (config_.api_key.empty()) config_.api_key = env_or("PROSE_API_KEY", "");
    if (config_.base_url.empty()) {
        throw ConfigError("no backend base_url configured and PROSE_API_BASE unset");
    }
}

ChatExchange HttpBackend::complete(const ChatRequest& request) {
    request.validate();
    json payload{{"model", request.model_id},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", request.system}},
                               {{"role", "user"}, {"content", request.user}}})},
                 {"temperature", request.temperature}};
    if (request.sampling_seed) payload["seed"] = *request.sampling_seed;
    if (request.max_tokens) payload["max_tokens"] = *request.max_tokens;

    auto [host, prefix] = split_base_url(config_.base_url);
    const std::string path = prefix + "/chat/completions";
    const std::string body = payload.dump();

    std::string last_error;
    int backoff_ms = config_.backoff_initial_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        httplib::Client client(host);
        client.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }
        auto start = std::chrono::steady_clock::now();
        auto res = client.Post(path, headers, body, "application/json");
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        if (res && res->status >= 200 && res->status < 300) {
            try {
                json doc = json::parse(res->body);
                ChatExchange ex;
                ex.request = request;
                ex.response_text =
                    doc.at("choices").at(0).at("message").at("content").get<std::string>();
                ex.latency_ms = elapsed;
                ex.prompt_chars = request.system.size() + request.user.size();
                ex.completion_chars = ex.response_text.size();
                if (doc.contains("usage")) ex.usage = doc["usage"];
                return ex;
            } catch (const json::exception& e) {
                throw BackendError(std::string("malformed completion response: ") + e.what());
            }
        }
        if (res) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            // 4xx other than 429 will not improve on retry.
            if (res->status >= 400 && res->status < 500 && res->status != 429) break;
        } else {
            last_error = "transport error: " + httplib::to_string(res.error());
        }
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    throw BackendError("backend request failed after " + std::to_string(config_.max_attempts) +
                       " attempts: " + last_error);
}

}  // namespace prose
