#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prose/backend.hpp"

namespace prose {

// Ordered JSON-lines trace of one demonstration cycle: retrieval, every
// chat exchange with its role tag, parsed artifacts, verification
// outcomes, and the final memory record.
class EpisodeLog {
public:
    void event(const std::string& type, nlohmann::json payload);
    void exchange(const ChatExchange& ex, bool extraction_fallback = false);

    const std::vector<nlohmann::json>& events() const { return events_; }
    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;

    // Calls of a given role, e.g. to check algorithm call budgets.
    long count_role(const std::string& role) const;

private:
    std::vector<nlohmann::json> events_;
};

// Sampling temperatures by request role. Judges and verifiers score at
// temperature 0; user/agent generation samples at 1.
struct RoleTemperatures {
    double generation = 1.0;
    double judge = 0.0;

    double for_role(const std::string& role) const;
};

// Per-episode view of a backend: stamps model id, temperature, and the
// derived sampling seed (run_seed XOR episode_index XOR call_counter) on
// every request and appends the exchange to the episode log.
class BackendSession {
public:
    BackendSession(ChatBackend& backend, EpisodeLog& log, std::string model_id, long run_seed,
                   long episode_index, RoleTemperatures temperatures = {},
                   std::optional<int> max_tokens = std::nullopt);

    ChatExchange complete(const std::string& role, const std::string& system,
                          const std::string& user);

    // Parse retry budget: a failed parse re-asks the same request with a
    // fresh sampling seed at most `reask_budget` times.
    int reask_budget() const { return reask_budget_; }
    void set_reask_budget(int budget) { reask_budget_ = budget; }

    EpisodeLog& log() { return log_; }
    long calls_made() const { return call_counter_; }
    const std::string& model_id() const { return model_id_; }

private:
    ChatBackend& backend_;
    EpisodeLog& log_;
    std::string model_id_;
    long run_seed_;
    long episode_index_;
    RoleTemperatures temperatures_;
    std::optional<int> max_tokens_;
    long call_counter_ = 0;
    int reask_budget_ = 1;
};

// Runs `parse` on the response of a session call; on ParseError re-asks
// up to the session's budget before rethrowing.
template <typename Parse>
auto complete_parsed(BackendSession& session, const std::string& role, const std::string& system,
                     const std::string& user, Parse parse) {
    int attempts = 1 + session.reask_budget();
    for (int i = 0;; ++i) {
        ChatExchange ex = session.complete(role, system, user);
        try {
            return parse(ex);
        } catch (const ParseError& e) {
            session.log().event("parse_error",
                                {{"role", role}, {"error", e.what()}, {"attempt", i + 1}});
            if (i + 1 >= attempts) throw;
        }
    }
}

}  // namespace prose
