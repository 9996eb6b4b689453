#include "prose/runner.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>
#include <numeric>
#include <set>
#include <sstream>

namespace prose {

using json = nlohmann::json;

std::string to_string(CacheMode m) {
    switch (m) {
        case CacheMode::live: return "live";
        case CacheMode::record: return "record";
        case CacheMode::replay: return "replay";
        case CacheMode::scripted: return "scripted";
    }
    throw ConfigError("bad cache mode");
}

CacheMode cache_mode_from_string(const std::string& s) {
    if (s == "live") return CacheMode::live;
    if (s == "record") return CacheMode::record;
    if (s == "replay") return CacheMode::replay;
    if (s == "scripted") return CacheMode::scripted;
    throw ConfigError("mode: unknown cache mode '" + s + "'");
}

namespace {

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    try {
        if (doc.contains("agent")) cfg.agent = doc.at("agent").get<std::string>();
        if (doc.contains("ablation")) cfg.ablation = doc.at("ablation").get<std::string>();
        if (doc.contains("models")) {
            const auto& m = doc.at("models");
            if (m.contains("agent")) cfg.models.agent = m.at("agent").get<std::string>();
            if (m.contains("user")) cfg.models.user = m.at("user").get<std::string>();
            if (m.contains("judge")) cfg.models.judge = m.at("judge").get<std::string>();
        }
        if (doc.contains("mode")) {
            cfg.mode = cache_mode_from_string(doc.at("mode").get<std::string>());
        }
        if (doc.contains("base_url")) cfg.base_url = doc.at("base_url").get<std::string>();
        if (doc.contains("api_key")) cfg.api_key = doc.at("api_key").get<std::string>();
        if (doc.contains("script_path")) {
            cfg.script_path = doc.at("script_path").get<std::string>();
        }
        if (doc.contains("cache_dir")) cfg.cache_dir = doc.at("cache_dir").get<std::string>();
        if (doc.contains("topics")) {
            for (const auto& t : doc.at("topics")) {
                cfg.topics.emplace_back(task_kind_from_string(t.at("task_kind").get<std::string>()),
                                        t.at("topic_id").get<std::string>());
            }
        }
        if (doc.contains("seeds")) cfg.seeds = doc.at("seeds").get<std::vector<long>>();
        if (doc.contains("max_refinement_steps")) {
            cfg.max_refinement_steps = doc.at("max_refinement_steps").get<int>();
        }
        if (doc.contains("verification_threshold")) {
            cfg.verification_threshold = doc.at("verification_threshold").get<double>();
        }
        if (doc.contains("retrieval_k")) cfg.retrieval_k = doc.at("retrieval_k").get<int>();
        if (doc.contains("cipher_desc_cap")) {
            if (doc.at("cipher_desc_cap").is_null()) {
                cfg.cipher_desc_cap = std::nullopt;
            } else {
                cfg.cipher_desc_cap = doc.at("cipher_desc_cap").get<int>();
            }
        }
        if (doc.contains("episodes_per_seed")) {
            cfg.episodes_per_seed = doc.at("episodes_per_seed").get<int>();
        }
        if (doc.contains("corpus_path")) cfg.corpus_path = doc.at("corpus_path").get<std::string>();
        if (doc.contains("registry_path")) {
            cfg.registry_path = doc.at("registry_path").get<std::string>();
        }
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("max_tokens")) cfg.max_tokens = doc.at("max_tokens").get<int>();
        if (doc.contains("metrics")) {
            cfg.metrics = doc.at("metrics").get<std::vector<std::string>>();
        }
        if (doc.contains("temperatures")) {
            const auto& t = doc.at("temperatures");
            if (t.contains("generation")) {
                cfg.temperatures.generation = t.at("generation").get<double>();
            }
            if (t.contains("judge")) cfg.temperatures.judge = t.at("judge").get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return cfg;
}

json RunConfig::to_json() const {
    json topics_json = json::array();
    for (const auto& [kind, topic] : topics) {
        topics_json.push_back({{"task_kind", to_string(kind)}, {"topic_id", topic}});
    }
    json doc{{"agent", agent},
             {"ablation", ablation},
             {"models",
              {{"agent", models.agent}, {"user", models.user}, {"judge", models.judge}}},
             {"mode", to_string(mode)},
             {"topics", topics_json},
             {"seeds", seeds},
             {"max_refinement_steps", max_refinement_steps},
             {"verification_threshold", verification_threshold},
             {"retrieval_k", retrieval_k},
             {"episodes_per_seed", episodes_per_seed},
             {"corpus_path", corpus_path.string()},
             {"output_dir", output_dir.string()},
             {"temperatures",
              {{"generation", temperatures.generation}, {"judge", temperatures.judge}}}};
    if (!base_url.empty()) doc["base_url"] = base_url;
    if (!script_path.empty()) doc["script_path"] = script_path.string();
    if (!cache_dir.empty()) doc["cache_dir"] = cache_dir.string();
    if (!registry_path.empty()) doc["registry_path"] = registry_path.string();
    if (cipher_desc_cap) {
        doc["cipher_desc_cap"] = *cipher_desc_cap;
    } else {
        doc["cipher_desc_cap"] = nullptr;
    }
    if (max_tokens) doc["max_tokens"] = *max_tokens;
    if (!metrics.empty()) doc["metrics"] = metrics;
    return doc;
}

void RunConfig::validate() const {
    BaselineKind::parse(agent);
    ablation_from_string(ablation);
    if (seeds.empty()) throw ConfigError("seeds: must be non-empty");
    if (max_refinement_steps < 1) throw ConfigError("max_refinement_steps: must be >= 1");
    if (verification_threshold < -2.0 || verification_threshold > 2.0) {
        throw ConfigError("verification_threshold: must lie in [-2, 2]");
    }
    if (retrieval_k < 0) throw ConfigError("retrieval_k: must be >= 0");
    if (episodes_per_seed < 1) throw ConfigError("episodes_per_seed: must be >= 1");
    if (corpus_path.empty()) throw ConfigError("corpus_path: required");
    if (!std::filesystem::exists(corpus_path)) {
        throw ConfigError("corpus_path: not found: " + corpus_path.string());
    }
    if (output_dir.empty()) throw ConfigError("output_dir: required");
    if (mode == CacheMode::scripted && script_path.empty()) {
        throw ConfigError("script_path: required in scripted mode");
    }
    if ((mode == CacheMode::record || mode == CacheMode::replay) && cache_dir.empty()) {
        throw ConfigError("cache_dir: required in record/replay mode");
    }
    for (const auto& m : metrics) {
        if (!is_known_metric(m)) throw ConfigError("metrics: unknown metric '" + m + "'");
    }
}

ProseConfig RunConfig::prose_config() const {
    ProseConfig cfg;
    cfg.max_refinement_steps = max_refinement_steps;
    cfg.verification_threshold = verification_threshold;
    cfg.retrieval_k = retrieval_k;
    cfg.ablation = ablation_from_string(ablation);
    cfg.validate();
    return cfg;
}

std::shared_ptr<ChatBackend> make_backend(const RunConfig& config) {
    switch (config.mode) {
        case CacheMode::scripted:
            return std::make_shared<ScriptedBackend>(
                ScriptedBackend::from_file(config.script_path));
        case CacheMode::live: {
            HttpBackendConfig http;
            http.base_url = config.base_url;
            http.api_key = config.api_key;
            return std::make_shared<HttpBackend>(http);
        }
        case CacheMode::record: {
            HttpBackendConfig http;
            http.base_url = config.base_url;
            http.api_key = config.api_key;
            return record_replay_wrap(std::make_shared<HttpBackend>(http), config.cache_dir);
        }
        case CacheMode::replay:
            // Cache misses hit FailBackend, so a replay run provably never
            // touches the network.
            return record_replay_wrap(std::make_shared<FailBackend>(), config.cache_dir);
    }
    throw ConfigError("bad cache mode");
}

// --- episode record serialization ------------------------------------------

json episode_result_to_json(const EpisodeResult& r, const std::string& agent, TaskKind kind,
                            const std::string& topic_id) {
    return json{{"agent", agent},
                {"task_kind", to_string(kind)},
                {"topic_id", topic_id},
                {"seed", r.seed},
                {"episode_index", r.episode_index},
                {"failed", r.failed},
                {"error", r.error},
                {"user_text", r.user_text},
                {"agent_text", r.agent_text},
                {"inferred_description", r.inferred_description},
                {"metrics", r.metrics}};
}

EpisodeResult episode_result_from_json(const json& doc) {
    EpisodeResult r;
    r.seed = doc.at("seed").get<long>();
    r.episode_index = doc.at("episode_index").get<int>();
    r.failed = doc.value("failed", false);
    r.error = doc.value("error", "");
    r.user_text = doc.value("user_text", "");
    r.agent_text = doc.value("agent_text", "");
    r.inferred_description = doc.value("inferred_description", "");
    if (doc.contains("metrics")) {
        r.metrics = doc.at("metrics").get<std::map<std::string, double>>();
    }
    return r;
}

// --- statistics ------------------------------------------------------------

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw ValidationError("mean of empty series");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / (xs.size() - 1));
}

double standard_error(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    return sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double pooled_standard_error(const std::vector<double>& per_model_variances) {
    if (per_model_variances.empty()) throw ValidationError("pooled SE of empty series");
    return std::sqrt(mean_of(per_model_variances) / per_model_variances.size());
}

// --- summary ---------------------------------------------------------------

SummaryTable summarize(const std::vector<json>& episode_records) {
    // (agent, task_kind) -> metric -> seed -> values
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::map<long, std::vector<double>>>>
        buckets;
    for (const auto& rec : episode_records) {
        if (rec.value("failed", false)) continue;
        std::string agent = rec.value("agent", "?");
        std::string kind = rec.value("task_kind", "?");
        long seed = rec.value("seed", 0L);
        for (const auto& [metric, value] : rec.at("metrics").items()) {
            buckets[{agent, kind}][metric][seed].push_back(value.get<double>());
            buckets[{agent, "tasks_mean"}][metric][seed].push_back(value.get<double>());
        }
    }
    SummaryTable table;
    for (const auto& [key, metrics] : buckets) {
        for (const auto& [metric, by_seed] : metrics) {
            std::vector<double> seed_means;
            for (const auto& [seed, values] : by_seed) seed_means.push_back(mean_of(values));
            SummaryCell cell;
            cell.mean = mean_of(seed_means);
            cell.stderr_ = standard_error(seed_means);
            cell.n_seeds = static_cast<long>(seed_means.size());
            table.rows[key][metric] = cell;
        }
    }
    return table;
}

std::string SummaryTable::to_tsv() const {
    std::set<std::string> metric_set;
    for (const auto& [key, metrics] : rows) {
        for (const auto& [metric, cell] : metrics) metric_set.insert(metric);
    }
    std::ostringstream out;
    out << "method\ttask";
    for (const auto& m : metric_set) out << "\t" << m;
    out << "\n";
    for (const auto& [key, metrics] : rows) {
        out << key.first << "\t" << key.second;
        for (const auto& m : metric_set) {
            auto it = metrics.find(m);
            if (it == metrics.end()) {
                out << "\t";
            } else {
                out << "\t" << fmt(it->second.mean, "%.4f") << " +/- "
                    << fmt(it->second.stderr_, "%.4f");
            }
        }
        out << "\n";
    }
    out << "# standard error over seeds = sample stddev / sqrt(#seeds); "
           "pooled SE across models = sqrt(mean per-model variance / #models)\n";
    return out.str();
}

json SummaryTable::to_json() const {
    json doc = json::array();
    for (const auto& [key, metrics] : rows) {
        json row{{"method", key.first}, {"task", key.second}, {"metrics", json::object()}};
        for (const auto& [metric, cell] : metrics) {
            row["metrics"][metric] = {
                {"mean", cell.mean}, {"stderr", cell.stderr_}, {"n_seeds", cell.n_seeds}};
        }
        doc.push_back(std::move(row));
    }
    return doc;
}

// --- run execution ----------------------------------------------------------

namespace {

std::vector<std::pair<TaskKind, std::string>> resolve_topics(const RunConfig& config,
                                                             const PreferenceRegistry& registry) {
    if (!config.topics.empty()) {
        for (const auto& [kind, topic] : config.topics) {
            registry.components(kind, topic);  // throws if unknown
        }
        return config.topics;
    }
    std::vector<std::pair<TaskKind, std::string>> all;
    for (auto kind : {TaskKind::summarize, TaskKind::email}) {
        for (const auto& topic : registry.topics(kind)) all.emplace_back(kind, topic);
    }
    return all;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    return out;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& config) {
    config.validate();
    const PreferenceRegistry registry = config.registry_path.empty()
                                            ? PreferenceRegistry::builtin()
                                            : PreferenceRegistry::load(config.registry_path);
    const Corpus corpus = Corpus::load(config.corpus_path);
    auto topics = resolve_topics(config, registry);

    Environment env;
    env.registry = &registry;
    env.agent_backend = make_backend(config);
    env.models = config.models;
    env.temperatures = config.temperatures;
    env.max_tokens = config.max_tokens;

    std::filesystem::create_directories(config.output_dir / "logs");
    {
        std::ofstream snapshot(config.output_dir / "config.json");
        snapshot << config.to_json().dump(2) << "\n";
    }

    BaselineKind kind = BaselineKind::parse(config.agent);
    ProseConfig prose_cfg = config.prose_config();

    RunOutcome outcome;
    outcome.output_dir = config.output_dir;
    std::vector<json> records;
    std::ofstream results(config.output_dir / "results.jsonl");

    for (const auto& [task_kind, topic_id] : topics) {
        const auto& docs = corpus.documents(task_kind, topic_id);
        AgentFactory factory = [&](long) {
            return make_agent(kind, *env.templates, registry, prose_cfg, config.cipher_desc_cap);
        };
        auto tracks = run_user_track(env, factory, task_kind, topic_id, docs, config.seeds,
                                     config.episodes_per_seed);
        for (size_t si = 0; si < tracks.size(); ++si) {
            const auto& track = tracks[si];
            for (size_t ei = 0; ei < track.episodes.size(); ++ei) {
                const auto& ep = track.episodes[ei];
                outcome.episodes++;
                if (ep.failed) outcome.failures++;
                json rec = episode_result_to_json(ep, config.agent, task_kind, topic_id);
                results << rec.dump() << "\n";
                records.push_back(std::move(rec));
                std::string log_name = to_string(task_kind) + "_" + sanitize(topic_id) + "_seed" +
                                       std::to_string(config.seeds[si]) + "_ep" +
                                       std::to_string(ei) + ".jsonl";
                track.logs[ei].write(config.output_dir / "logs" / log_name);
            }
        }
    }
    results.close();

    outcome.summary = summarize(records);
    {
        std::ofstream tsv(config.output_dir / "summary.tsv");
        tsv << outcome.summary.to_tsv();
        std::ofstream js(config.output_dir / "summary.json");
        js << outcome.summary.to_json().dump(2) << "\n";
    }
    return outcome;
}

// --- sweep ------------------------------------------------------------------

std::vector<RunOutcome> run_sweep(const RunConfig& config, const std::vector<double>& v_values,
                                  const std::vector<int>& s_values) {
    if (v_values.empty() || s_values.empty()) {
        throw ConfigError("sweep grid must be non-empty on both axes");
    }
    std::vector<RunOutcome> outcomes;
    std::ostringstream table;
    table << "v\tS\tepisodes\tfailures\n";
    for (double v : v_values) {
        for (int s : s_values) {
            std::string cell_name = "v=" + fmt(v, "%g") + "_S=" + std::to_string(s);
            RunConfig cell = config;
            cell.verification_threshold = v;
            cell.max_refinement_steps = s;
            cell.output_dir = config.output_dir / cell_name;
            RunOutcome outcome;
            if (std::filesystem::exists(cell.output_dir / "summary.json")) {
                // Completed on a previous invocation; reuse its artifacts.
                outcome.output_dir = cell.output_dir;
                std::ifstream in(cell.output_dir / "results.jsonl");
                std::vector<json> records;
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    json rec = json::parse(line);
                    outcome.episodes++;
                    if (rec.value("failed", false)) outcome.failures++;
                    records.push_back(std::move(rec));
                }
                outcome.summary = summarize(records);
            } else {
                outcome = run_experiment(cell);
            }
            table << fmt(v, "%g") << "\t" << s << "\t" << outcome.episodes << "\t"
                  << outcome.failures << "\n";
            outcomes.push_back(std::move(outcome));
        }
    }
    std::filesystem::create_directories(config.output_dir);
    std::ofstream out(config.output_dir / "sweep.tsv");
    out << table.str();
    return outcomes;
}

// --- correlate --------------------------------------------------------------

CorrelationStudyResult run_correlate(const RunConfig& config) {
    config.validate();
    const PreferenceRegistry registry = config.registry_path.empty()
                                            ? PreferenceRegistry::builtin()
                                            : PreferenceRegistry::load(config.registry_path);
    const Corpus corpus = Corpus::load(config.corpus_path);
    auto topics = resolve_topics(config, registry);

    auto backend = make_backend(config);
    CorrelationStudyConfig study_cfg;
    study_cfg.seeds = config.seeds;
    study_cfg.agent_model_id = config.models.agent;
    study_cfg.judge_model_id = config.models.judge;
    study_cfg.agent_temperature = config.temperatures.generation;
    study_cfg.max_tokens = config.max_tokens;

    auto content_for = [&](TaskKind kind, const std::string& topic_id) {
        return corpus.documents(kind, topic_id).front();
    };
    CorrelationStudyResult result =
        correlation_study(registry, topics, content_for, *backend, *backend, study_cfg);

    std::filesystem::create_directories(config.output_dir);
    json doc{{"samples", json::array()}, {"rho", json::array()}};
    for (const auto& s : result.samples) {
        doc["samples"].push_back({{"task_kind", to_string(s.task_kind)},
                                  {"topic_id", s.topic_id},
                                  {"subset", s.subset},
                                  {"seed", s.seed},
                                  {"metrics", s.metrics}});
    }
    std::ostringstream tsv;
    tsv << "preference_metric\tgeneration_metric\trho\n";
    for (const auto& [key, rho] : result.rho) {
        doc["rho"].push_back({{"preference_metric", key.first},
                              {"generation_metric", key.second},
                              {"rho", rho}});
        tsv << key.first << "\t" << key.second << "\t" << fmt(rho, "%.4f") << "\n";
    }
    std::ofstream js(config.output_dir / "correlation.json");
    js << doc.dump(2) << "\n";
    std::ofstream tout(config.output_dir / "correlation.tsv");
    tout << tsv.str();
    return result;
}

// --- report -----------------------------------------------------------------

void write_report(const std::vector<std::filesystem::path>& run_dirs,
                  const std::filesystem::path& out_dir) {
    if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
    std::vector<json> records;
    for (const auto& dir : run_dirs) {
        std::ifstream in(dir / "results.jsonl");
        if (!in) throw StorageError("cannot open " + (dir / "results.jsonl").string());
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) records.push_back(json::parse(line));
        }
    }
    std::filesystem::create_directories(out_dir);

    // Learning curve: per (agent, metric, episode index), mean across
    // topics and seeds.
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> curve;
    // Per-topic: per (agent, task kind, topic, metric).
    std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<double>>
        per_topic;
    for (const auto& rec : records) {
        if (rec.value("failed", false)) continue;
        std::string agent = rec.value("agent", "?");
        std::string kind = rec.value("task_kind", "?");
        std::string topic = rec.value("topic_id", "?");
        int ep = rec.value("episode_index", 0);
        for (const auto& [metric, value] : rec.at("metrics").items()) {
            curve[{agent, metric, ep}].push_back(value.get<double>());
            per_topic[{agent, kind, topic, metric}].push_back(value.get<double>());
        }
    }
    {
        std::ofstream out(out_dir / "learning_curve.tsv");
        out << "method\tmetric\tepisode_index\tmean\tstderr\tn\n";
        for (const auto& [key, values] : curve) {
            out << std::get<0>(key) << "\t" << std::get<1>(key) << "\t" << std::get<2>(key)
                << "\t" << fmt(mean_of(values), "%.4f") << "\t"
                << fmt(standard_error(values), "%.4f") << "\t" << values.size() << "\n";
        }
    }
    {
        std::ofstream out(out_dir / "per_topic.tsv");
        out << "method\ttask\ttopic\tmetric\tmean\tstderr\tn\n";
        for (const auto& [key, values] : per_topic) {
            out << std::get<0>(key) << "\t" << std::get<1>(key) << "\t" << std::get<2>(key)
                << "\t" << std::get<3>(key) << "\t" << fmt(mean_of(values), "%.4f") << "\t"
                << fmt(standard_error(values), "%.4f") << "\t" << values.size() << "\n";
        }
    }
    {
        std::ofstream out(out_dir / "summary.tsv");
        out << summarize(records).to_tsv();
    }
}

// --- corpus validation -------------------------------------------------------

std::vector<std::string> validate_corpus(const std::filesystem::path& corpus_path,
                                         const PreferenceRegistry& registry,
                                         int episodes_per_seed) {
    std::vector<std::string> problems;
    Corpus corpus;
    try {
        corpus = Corpus::load(corpus_path);
    } catch (const Error& e) {
        problems.push_back(e.what());
        return problems;
    }
    for (auto kind : {TaskKind::summarize, TaskKind::email}) {
        for (const auto& topic : registry.topics(kind)) {
            std::string where = to_string(kind) + "/" + topic;
            if (!corpus.has(kind, topic)) {
                problems.push_back(where + ": no documents");
                continue;
            }
            const auto& docs = corpus.documents(kind, topic);
            if (docs.size() < static_cast<size_t>(episodes_per_seed)) {
                problems.push_back(where + ": only " + std::to_string(docs.size()) +
                                   " documents, need " + std::to_string(episodes_per_seed));
            }
            for (size_t i = 0; i < docs.size(); ++i) {
                if (trim(docs[i]).empty()) {
                    problems.push_back(where + ": document " + std::to_string(i) + " is empty");
                }
            }
        }
    }
    return problems;
}

}  // namespace prose
