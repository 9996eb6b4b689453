#include "prose/backend.hpp"

#include <fstream>

#include "prose/sha256.hpp"
#include "prose/types.hpp"

namespace prose {

using json = nlohmann::json;

void ChatRequest::validate() const {
    if (system.empty()) throw ValidationError("chat request has empty system prompt");
    if (user.empty()) throw ValidationError("chat request has empty user prompt");
    if (temperature < 0.0) throw ValidationError("chat request temperature < 0");
}

std::string request_digest(const ChatRequest& req) {
    json key{{"model_id", req.model_id},
             {"system", req.system},
             {"user", req.user},
             {"temperature", req.temperature}};
    if (req.sampling_seed) {
        key["sampling_seed"] = *req.sampling_seed;
    } else {
        key["sampling_seed"] = nullptr;
    }
    return sha256_hex(key.dump());
}

namespace {

ChatExchange make_exchange(const ChatRequest& req, std::string response) {
    ChatExchange ex;
    ex.request = req;
    ex.response_text = std::move(response);
    ex.latency_ms = 0;
    ex.prompt_chars = req.system.size() + req.user.size();
    ex.completion_chars = ex.response_text.size();
    return ex;
}

}  // namespace

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open script file " + path.string());
    json script;
    try {
        in >> script;
    } catch (const json::exception& e) {
        throw StorageError("bad script file " + path.string() + ": " + e.what());
    }
    return from_json(script);
}

ScriptedBackend ScriptedBackend::from_json(const json& script) {
    ScriptedBackend backend;
    for (const auto& entry : script) {
        const json& match = entry.at("match");
        long max_uses = entry.value("max_uses", -1L);
        std::string response = entry.at("response").get<std::string>();
        if (match.contains("exact")) {
            backend.add_exact(match.at("exact").get<std::string>(), response, max_uses);
        } else if (match.contains("digest")) {
            backend.add_digest(match.at("digest").get<std::string>(), response, max_uses);
        } else if (match.contains("contains")) {
            backend.add_contains(match.at("contains").get<std::vector<std::string>>(),
                                 response, max_uses);
        } else {
            throw StorageError("script rule without exact/digest/contains matcher");
        }
    }
    return backend;
}

void ScriptedBackend::add_exact(std::string user_prompt, std::string response, long max_uses) {
    rules_.push_back({std::move(user_prompt), std::nullopt, {}, std::move(response), max_uses, 0});
}

void ScriptedBackend::add_digest(std::string digest, std::string response, long max_uses) {
    rules_.push_back({std::nullopt, std::move(digest), {}, std::move(response), max_uses, 0});
}

void ScriptedBackend::add_contains(std::vector<std::string> substrings, std::string response,
                                   long max_uses) {
    rules_.push_back(
        {std::nullopt, std::nullopt, std::move(substrings), std::move(response), max_uses, 0});
}

ChatExchange ScriptedBackend::complete(const ChatRequest& request) {
    request.validate();
    ++total_calls_;
    std::optional<std::string> req_digest;
    for (auto& rule : rules_) {
        if (rule.max_uses >= 0 && rule.uses >= rule.max_uses) continue;
        bool matched = false;
        if (rule.exact) {
            matched = request.user == *rule.exact;
        } else if (rule.digest) {
            if (!req_digest) req_digest = request_digest(request);
            matched = *req_digest == *rule.digest;
        } else {
            matched = true;
            for (const auto& sub : rule.contains) {
                if (request.user.find(sub) == std::string::npos &&
                    request.system.find(sub) == std::string::npos) {
                    matched = false;
                    break;
                }
            }
        }
        if (matched) {
            ++rule.uses;
            return make_exchange(request, rule.response);
        }
    }
    throw UnscriptedRequestError(request_digest(request), request.user);
}

ChatExchange FailBackend::complete(const ChatRequest& request) {
    throw BackendError("live backend call attempted in replay mode, digest=" +
                       request_digest(request));
}

ReplayCacheBackend::ReplayCacheBackend(std::shared_ptr<ChatBackend> inner,
                                       std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(cache_dir_);
}

ChatExchange ReplayCacheBackend::complete(const ChatRequest& request) {
    request.validate();
    const std::string digest = request_digest(request);
    const auto path = cache_dir_ / (digest + ".json");
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        json doc;
        try {
            in >> doc;
            ChatExchange ex = make_exchange(request, doc.at("response_text").get<std::string>());
            if (doc.contains("usage") && !doc.at("usage").is_null()) ex.usage = doc.at("usage");
            ++hits_;
            return ex;
        } catch (const json::exception& e) {
            throw CacheCorruptionError("corrupt cache entry " + path.string() + ": " + e.what());
        }
    }
    ChatExchange ex = inner_->complete(request);
    ++misses_;
    {
        std::lock_guard<std::mutex> lock(write_mutex_);
        json doc{{"digest", digest},
                 {"model_id", request.model_id},
                 {"system", request.system},
                 {"user", request.user},
                 {"temperature", request.temperature},
                 {"sampling_seed",
                  request.sampling_seed ? json(*request.sampling_seed) : json(nullptr)},
                 {"response_text", ex.response_text},
                 {"usage", ex.usage ? *ex.usage : json(nullptr)}};
        // Write-then-rename so a crashed run never leaves a half entry.
        auto tmp = path;
        tmp += ".tmp";
        std::ofstream out(tmp);
        if (!out) throw StorageError("cannot write cache entry " + tmp.string());
        out << doc.dump(2) << "\n";
        out.close();
        std::filesystem::rename(tmp, path);
    }
    return ex;
}

std::shared_ptr<ChatBackend> record_replay_wrap(std::shared_ptr<ChatBackend> inner,
                                                const std::filesystem::path& cache_dir) {
    return std::make_shared<ReplayCacheBackend>(std::move(inner), cache_dir);
}

}  // namespace prose
