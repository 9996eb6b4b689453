#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prose/engine.hpp"
#include "prose/metrics.hpp"
#include "prose/types.hpp"

namespace prose {

// Ground-truth preference sets keyed by (task kind, topic). Every set has
// exactly four components; summarization has five topics, email four.
class PreferenceRegistry {
public:
    static const PreferenceRegistry& builtin();
    static PreferenceRegistry load(const std::filesystem::path& path);

    const std::vector<std::string>& components(TaskKind kind, const std::string& topic_id) const;
    // Components joined with ", " — the description handed to the Oracle
    // agent and the synthetic user.
    std::string joined(TaskKind kind, const std::string& topic_id) const;

    std::vector<std::string> topics(TaskKind kind) const;
    size_t size() const { return entries_.size(); }
    void validate() const;

    void add(TaskKind kind, const std::string& topic_id, std::vector<std::string> components);

private:
    std::map<std::pair<TaskKind, std::string>, std::vector<std::string>> entries_;
};

// Documents per (task kind, topic), loaded from a directory laid out as
// <dir>/<task_kind>/<topic_id>/*.txt, files in name order.
class Corpus {
public:
    static Corpus load(const std::filesystem::path& dir);

    const std::vector<std::string>& documents(TaskKind kind, const std::string& topic_id) const;
    bool has(TaskKind kind, const std::string& topic_id) const;
    void add(TaskKind kind, const std::string& topic_id, std::vector<std::string> docs);

private:
    std::map<std::pair<TaskKind, std::string>, std::vector<std::string>> docs_;
};

// An agent that PLUME can drive through episodes: complete the task, then
// (optionally) learn from the user demonstration.
class Agent {
public:
    virtual ~Agent() = default;
    virtual std::string kind() const = 0;
    virtual AgentGeneration complete(const TaskInstance& task, BackendSession& session) = 0;
    virtual void learn(const TaskInstance& task, const Demonstration& demonstration,
                       BackendSession& session) {
        (void)task;
        (void)demonstration;
        (void)session;
    }
    // The description the preference-quality metrics are computed on.
    virtual PreferenceDescription last_description() const { return {}; }
};

struct ModelIds {
    std::string agent = "agent-model";
    std::string user = "user-model";
    std::string judge = "judge-model";
};

// Everything an episode needs besides the agent itself.
struct Environment {
    const TemplateSet* templates = &TemplateSet::builtin();
    const PreferenceRegistry* registry = &PreferenceRegistry::builtin();
    std::shared_ptr<ChatBackend> agent_backend;
    std::shared_ptr<ChatBackend> user_backend;   // defaults to agent_backend
    std::shared_ptr<ChatBackend> judge_backend;  // defaults to agent_backend
    ModelIds models;
    RoleTemperatures temperatures;
    std::optional<int> max_tokens;

    ChatBackend& user() const { return *(user_backend ? user_backend : agent_backend); }
    ChatBackend& judge() const { return *(judge_backend ? judge_backend : agent_backend); }
};

struct EpisodeResult {
    std::string user_text;
    std::string agent_text;
    std::string inferred_description;
    std::map<std::string, double> metrics;
    long seed = 0;
    int episode_index = 0;
    bool failed = false;
    std::string error;
};

// Renders the synthetic-human prompt with the ground-truth components and
// extracts the triple-quoted demonstration.
Demonstration synthetic_user_demonstrate(const Environment& env, const TaskInstance& task,
                                         BackendSession& user_session);

// One demonstration cycle: user writes, agent writes independently,
// metrics are captured, then the agent learns.
EpisodeResult run_episode(const Environment& env, Agent& agent, const TaskInstance& task,
                          long seed, int episode_index, EpisodeLog& log);

struct TrackResult {
    std::vector<EpisodeResult> episodes;
    std::vector<EpisodeLog> logs;  // one per episode
    std::unique_ptr<Agent> agent;  // the agent that ran the track
};

using AgentFactory = std::function<std::unique_ptr<Agent>(long seed)>;

// For each seed: a fresh agent and memory, then sequential episodes over
// the topic's documents.
std::vector<TrackResult> run_user_track(const Environment& env, const AgentFactory& factory,
                                        TaskKind kind, const std::string& topic_id,
                                        const std::vector<std::string>& documents,
                                        const std::vector<long>& seeds, int episodes_per_seed);

// PLUME's no-edit protocol: no agent-generated text may ever appear in a
// synthetic-user prompt. Returns the offending event indices (empty =
// invariant holds).
std::vector<size_t> scan_user_isolation(const EpisodeLog& log);

}  // namespace prose
