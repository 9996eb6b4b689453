#include "prose/plume.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "prose/parsers.hpp"

namespace prose {

using json = nlohmann::json;

// --- preference registry ---------------------------------------------------

const PreferenceRegistry& PreferenceRegistry::builtin() {
    static const PreferenceRegistry registry = [] {
        PreferenceRegistry r;
        r.add(TaskKind::summarize, "news_articles",
              {"adopt a step-by-step structure", "include a simile",
               "use ampersands (&) instead of \"and\"s", "write in the style of a children's book"});
        r.add(TaskKind::summarize, "chat_forum_posts",
              {"adopt a header and sub-header structure", "include rhetorical questions",
               "use ALLCAPS to emphasize words", "write in the style of a tweet"});
        r.add(TaskKind::summarize, "encyclopedia_pages",
              {"adopt a rhyming structure", "include modern slang",
               "use semicolons (;) when possible", "write in the style of a screenplay"});
        r.add(TaskKind::summarize, "paper_abstract",
              {"adopt a question-answering style structure", "include personifications",
               "use archaic language", "write in the style of a podcast"});
        r.add(TaskKind::summarize, "movie_review",
              {"adopt a stream-of-consciousness structure", "include onomatopoeias",
               "use imagery", "write in the style of old timey radio"});
        r.add(TaskKind::email, "personal_problem",
              {"be intensely emotional", "include alliterations", "use a formal tone",
               "write in a second person narrative"});
        r.add(TaskKind::email, "paper_review",
              {"be sharply critical", "include several short and punchy sentences",
               "use parenthetical asides", "write using assertive expressions"});
        r.add(TaskKind::email, "paper_tweet",
              {"be blatantly sarcastic", "include hyperboles", "use an informal tone",
               "write in a third person perspective"});
        r.add(TaskKind::email, "paper_summary",
              {"be highly inquisitive", "include several long and flowing sentences",
               "use emojis", "write using conditional expressions"});
        r.validate();
        return r;
    }();
    return registry;
}

PreferenceRegistry PreferenceRegistry::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open preference registry " + path.string());
    json doc;
    in >> doc;
    PreferenceRegistry r;
    for (const auto& [kind_name, topics] : doc.items()) {
        TaskKind kind = task_kind_from_string(kind_name);
        for (const auto& [topic, comps] : topics.items()) {
            r.add(kind, topic, comps.get<std::vector<std::string>>());
        }
    }
    r.validate();
    return r;
}

void PreferenceRegistry::add(TaskKind kind, const std::string& topic_id,
                             std::vector<std::string> components) {
    entries_[{kind, topic_id}] = std::move(components);
}

const std::vector<std::string>& PreferenceRegistry::components(TaskKind kind,
                                                               const std::string& topic_id) const {
    auto it = entries_.find({kind, topic_id});
    if (it == entries_.end()) {
        throw ValidationError("no preference set for " + to_string(kind) + "/" + topic_id);
    }
    return it->second;
}

std::string PreferenceRegistry::joined(TaskKind kind, const std::string& topic_id) const {
    const auto& comps = components(kind, topic_id);
    std::string out;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (i) out += ", ";
        out += comps[i];
    }
    return out;
}

std::vector<std::string> PreferenceRegistry::topics(TaskKind kind) const {
    std::vector<std::string> out;
    for (const auto& [key, comps] : entries_) {
        if (key.first == kind) out.push_back(key.second);
    }
    return out;
}

void PreferenceRegistry::validate() const {
    for (const auto& [key, comps] : entries_) {
        if (comps.size() != 4) {
            throw ValidationError("preference set " + to_string(key.first) + "/" + key.second +
                                  " has " + std::to_string(comps.size()) +
                                  " components, expected 4");
        }
    }
}

// --- corpus ----------------------------------------------------------------

Corpus Corpus::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw StorageError("corpus directory not found: " + dir.string());
    }
    Corpus corpus;
    for (const auto& kind : {TaskKind::summarize, TaskKind::email}) {
        auto kind_dir = dir / to_string(kind);
        if (!std::filesystem::is_directory(kind_dir)) continue;
        for (const auto& topic_entry : std::filesystem::directory_iterator(kind_dir)) {
            if (!topic_entry.is_directory()) continue;
            std::vector<std::filesystem::path> files;
            for (const auto& f : std::filesystem::directory_iterator(topic_entry.path())) {
                if (f.is_regular_file() && f.path().extension() == ".txt") {
                    files.push_back(f.path());
                }
            }
            std::sort(files.begin(), files.end());
            std::vector<std::string> docs;
            for (const auto& f : files) {
                std::ifstream in(f, std::ios::binary);
                docs.emplace_back(std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>());
            }
            corpus.add(kind, topic_entry.path().filename().string(), std::move(docs));
        }
    }
    return corpus;
}

void Corpus::add(TaskKind kind, const std::string& topic_id, std::vector<std::string> docs) {
    docs_[{kind, topic_id}] = std::move(docs);
}

bool Corpus::has(TaskKind kind, const std::string& topic_id) const {
    return docs_.count({kind, topic_id}) > 0;
}

const std::vector<std::string>& Corpus::documents(TaskKind kind,
                                                  const std::string& topic_id) const {
    auto it = docs_.find({kind, topic_id});
    if (it == docs_.end()) {
        throw StorageError("no corpus documents for " + to_string(kind) + "/" + topic_id);
    }
    return it->second;
}

// --- episode protocol ------------------------------------------------------

Demonstration synthetic_user_demonstrate(const Environment& env, const TaskInstance& task,
                                         BackendSession& user_session) {
    VarMap vars = task_selectors(task.kind);
    vars["task_content"] = task.content;
    vars["preference_description"] = env.registry->joined(task.kind, task.topic_id);
    RenderedPrompt prompt = render(env.templates->get("synthetic_human"), vars);
    auto text = complete_parsed(user_session, "synthetic_human", prompt.system, prompt.user,
                                [](const ChatExchange& ex) {
                                    Extraction e = parse_triple_quoted(ex.response_text);
                                    return e.text;
                                });
    Demonstration demo{task, text};
    demo.validate();
    user_session.log().event("demonstration", {{"text", demo.text}});
    return demo;
}

EpisodeResult run_episode(const Environment& env, Agent& agent, const TaskInstance& task,
                          long seed, int episode_index, EpisodeLog& log) {
    EpisodeResult result;
    result.seed = seed;
    result.episode_index = episode_index;
    log.event("episode_start", {{"task_kind", to_string(task.kind)},
                                {"topic_id", task.topic_id},
                                {"user_id", task.user_id},
                                {"seed", seed},
                                {"episode_index", episode_index},
                                {"agent", agent.kind()}});
    try {
        // Phase 1: the user demonstrates, blind to everything the agent
        // has ever produced.
        BackendSession user_session(env.user(), log, env.models.user, seed, episode_index,
                                    env.temperatures, env.max_tokens);
        Demonstration demo = synthetic_user_demonstrate(env, task, user_session);
        result.user_text = demo.text;

        // Phase 2: the agent solves the same task independently.
        BackendSession agent_session(*env.agent_backend, log, env.models.agent, seed,
                                     episode_index, env.temperatures, env.max_tokens);
        AgentGeneration generation = agent.complete(task, agent_session);
        result.agent_text = generation.text;
        result.inferred_description = agent.last_description().text;

        // Metrics before learning, on the pre-learning description.
        const auto& true_comps = env.registry->components(task.kind, task.topic_id);
        JudgeConfig judge_cfg;
        judge_cfg.model_id = env.models.judge;
        judge_cfg.task_kind = task.kind;
        judge_cfg.temperature = env.temperatures.judge;
        judge_cfg.max_tokens = env.max_tokens;
        judge_cfg.on_exchange = [&log](const ChatExchange& ex) { log.exchange(ex); };
        try {
            MetricValue m = ppcm(result.agent_text, true_comps, env.judge(), judge_cfg);
            result.metrics[m.name] = m.value;
        } catch (const Error& e) {
            log.event("metric_failed", {{"metric", metric_names::ppcm}, {"error", e.what()}});
        }
        try {
            MetricValue m =
                pref_similarity(result.inferred_description, true_comps, env.judge(), judge_cfg);
            result.metrics[m.name] = m.value;
        } catch (const Error& e) {
            log.event("metric_failed", {{"metric", metric_names::pref_sim}, {"error", e.what()}});
        }
        result.metrics[metric_names::pref_len] =
            static_cast<double>(pref_length(result.inferred_description));
        result.metrics[metric_names::levenshtein] =
            static_cast<double>(levenshtein(result.agent_text, result.user_text));
        result.metrics[metric_names::ln_levenshtein] =
            ln_levenshtein(result.agent_text, result.user_text);

        json metrics_json(result.metrics);
        log.event("metrics", {{"values", metrics_json}});

        // Phase 3: learning, after metric capture.
        agent.learn(task, demo, agent_session);
    } catch (const Error& e) {
        result.failed = true;
        result.error = e.what();
        log.event("episode_failed", {{"error", result.error}});
    }
    log.event("episode_end", {{"failed", result.failed}});
    return result;
}

std::vector<TrackResult> run_user_track(const Environment& env, const AgentFactory& factory,
                                        TaskKind kind, const std::string& topic_id,
                                        const std::vector<std::string>& documents,
                                        const std::vector<long>& seeds, int episodes_per_seed) {
    if (static_cast<size_t>(episodes_per_seed) > documents.size()) {
        throw ConfigError("topic " + topic_id + " has " + std::to_string(documents.size()) +
                          " documents, need " + std::to_string(episodes_per_seed));
    }
    std::vector<TrackResult> tracks;
    for (long seed : seeds) {
        TrackResult track;
        std::unique_ptr<Agent> agent = factory(seed);
        for (int i = 0; i < episodes_per_seed; ++i) {
            TaskInstance task{kind, topic_id, documents[i], topic_id};
            EpisodeLog log;
            track.episodes.push_back(run_episode(env, *agent, task, seed, i, log));
            track.logs.push_back(std::move(log));
        }
        track.agent = std::move(agent);
        tracks.push_back(std::move(track));
    }
    return tracks;
}

std::vector<size_t> scan_user_isolation(const EpisodeLog& log) {
    // Collect every agent-produced text, then check it never shows up in a
    // synthetic-user prompt.
    std::vector<std::string> agent_texts;
    for (const auto& e : log.events()) {
        if (e.value("type", "") == "parsed_generation") {
            std::string text = e.value("text", "");
            if (text.size() >= 8) agent_texts.push_back(text);
        }
    }
    std::vector<size_t> offending;
    const auto& events = log.events();
    for (size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.value("type", "") != "exchange") continue;
        if (e.value("role", "") != "synthetic_human") continue;
        std::string prompt = e.value("system", "") + "\n" + e.value("user", "");
        for (const auto& text : agent_texts) {
            if (prompt.find(text) != std::string::npos) {
                offending.push_back(i);
                break;
            }
        }
    }
    return offending;
}

}  // namespace prose
