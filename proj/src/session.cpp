#include "prose/session.hpp"

#include <fstream>

#include "prose/errors.hpp"

namespace prose {

using json = nlohmann::json;

void EpisodeLog::event(const std::string& type, json payload) {
    payload["type"] = type;
    events_.push_back(std::move(payload));
}

void EpisodeLog::exchange(const ChatExchange& ex, bool extraction_fallback) {
    json payload{{"role", ex.request.role},
                 {"model_id", ex.request.model_id},
                 {"system", ex.request.system},
                 {"user", ex.request.user},
                 {"temperature", ex.request.temperature},
                 {"sampling_seed",
                  ex.request.sampling_seed ? json(*ex.request.sampling_seed) : json(nullptr)},
                 {"response", ex.response_text},
                 {"latency_ms", ex.latency_ms},
                 {"prompt_chars", ex.prompt_chars},
                 {"completion_chars", ex.completion_chars}};
    if (extraction_fallback) payload["extraction_fallback"] = true;
    event("exchange", std::move(payload));
}

std::string EpisodeLog::to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
        out += e.dump();
        out += "\n";
    }
    return out;
}

void EpisodeLog::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot write episode log " + path.string());
    out << to_jsonl();
}

long EpisodeLog::count_role(const std::string& role) const {
    long n = 0;
    for (const auto& e : events_) {
        if (e.value("type", "") == "exchange" && e.value("role", "") == role) ++n;
    }
    return n;
}

double RoleTemperatures::for_role(const std::string& role) const {
    if (role.rfind("judge", 0) == 0 || role == "verification") return judge;
    return generation;
}

BackendSession::BackendSession(ChatBackend& backend, EpisodeLog& log, std::string model_id,
                               long run_seed, long episode_index, RoleTemperatures temperatures,
                               std::optional<int> max_tokens)
    : backend_(backend),
      log_(log),
      model_id_(std::move(model_id)),
      run_seed_(run_seed),
      episode_index_(episode_index),
      temperatures_(temperatures),
      max_tokens_(max_tokens) {}

ChatExchange BackendSession::complete(const std::string& role, const std::string& system,
                                      const std::string& user) {
    ChatRequest req;
    req.role = role;
    req.model_id = model_id_;
    req.system = system;
    req.user = user;
    req.temperature = temperatures_.for_role(role);
    req.sampling_seed = run_seed_ ^ episode_index_ ^ call_counter_;
    req.max_tokens = max_tokens_;
    ++call_counter_;
    ChatExchange ex = backend_.complete(req);
    log_.exchange(ex);
    return ex;
}

}  // namespace prose
