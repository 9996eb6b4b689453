#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prose/baselines.hpp"
#include "prose/plume.hpp"

namespace prose {

enum class CacheMode { live, record, replay, scripted };
std::string to_string(CacheMode m);
CacheMode cache_mode_from_string(const std::string& s);

// Declarative experiment description, loaded from one JSON file. Every
// hyperparameter has a named field carrying the stock default (S=5, k=3,
// v=0.25, five seeds, five episodes per seed).
struct RunConfig {
    std::string agent = "prose";               // npc|oracle|icl|cipher[-k]|prose|prose_icl
    std::string ablation = "Full";             // CE|u|u_a|u_a_S|NV|Full
    ModelIds models;
    CacheMode mode = CacheMode::scripted;
    std::string base_url;                      // live/record
    std::string api_key;
    std::filesystem::path script_path;         // scripted
    std::filesystem::path cache_dir;           // record/replay
    std::vector<std::pair<TaskKind, std::string>> topics;  // empty = whole registry
    std::vector<long> seeds = {0, 1, 2, 3, 4};
    int max_refinement_steps = 5;
    double verification_threshold = 0.25;
    int retrieval_k = 3;
    std::optional<int> cipher_desc_cap = 140;
    int episodes_per_seed = 5;
    std::filesystem::path corpus_path;
    std::filesystem::path registry_path;       // empty = builtin
    std::filesystem::path output_dir;
    std::optional<int> max_tokens;
    std::vector<std::string> metrics;          // empty = all
    RoleTemperatures temperatures;

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    // Throws ConfigError naming the offending field path.
    void validate() const;
    ProseConfig prose_config() const;
};

nlohmann::json episode_result_to_json(const EpisodeResult& r, const std::string& agent,
                                      TaskKind kind, const std::string& topic_id);
EpisodeResult episode_result_from_json(const nlohmann::json& doc);

struct SummaryCell {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n_seeds = 0;
};

// Rows keyed by (method, task kind name or "tasks_mean"), columns by metric.
struct SummaryTable {
    std::map<std::pair<std::string, std::string>, std::map<std::string, SummaryCell>> rows;

    std::string to_tsv() const;
    nlohmann::json to_json() const;
};

double mean_of(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);
// stddev / sqrt(n); 0 for a single seed.
double standard_error(const std::vector<double>& xs);
// sqrt(mean of per-model variances / #models).
double pooled_standard_error(const std::vector<double>& per_model_variances);

// Pure fold over episode records: per metric, a per-seed mean over
// episodes, then mean and standard error over seeds.
SummaryTable summarize(const std::vector<nlohmann::json>& episode_records);

struct RunOutcome {
    long episodes = 0;
    long failures = 0;
    SummaryTable summary;
    std::filesystem::path output_dir;
};

// Executes every (topic, seed) track, writing into config.output_dir:
// config.json snapshot, logs/<kind>_<topic>_seed<k>_ep<i>.jsonl,
// results.jsonl, summary.tsv and summary.json.
RunOutcome run_experiment(const RunConfig& config);

// Cross-product sweep over v and S; cell directories v=<x>_S=<y> under
// config.output_dir. Cells whose summary.json already exists are skipped.
// Writes sweep.tsv comparing cells.
std::vector<RunOutcome> run_sweep(const RunConfig& config, const std::vector<double>& v_values,
                                  const std::vector<int>& s_values);

// Drives the correlation study over the configured topics with the first
// corpus document as content; writes correlation.json and correlation.tsv.
CorrelationStudyResult run_correlate(const RunConfig& config);

// Merges results.jsonl files from run directories into learning-curve
// (metric vs. episode index) and per-topic exports under out_dir.
void write_report(const std::vector<std::filesystem::path>& run_dirs,
                  const std::filesystem::path& out_dir);

// Checks every registry topic has enough non-empty documents.
// Returns human-readable problem strings; empty means valid.
std::vector<std::string> validate_corpus(const std::filesystem::path& corpus_path,
                                         const PreferenceRegistry& registry,
                                         int episodes_per_seed);

// Builds the backend stack a config describes. Replay mode wraps a
// FailBackend so any cache miss is a hard error, proving no network I/O.
std::shared_ptr<ChatBackend> make_backend(const RunConfig& config);

}  // namespace prose
