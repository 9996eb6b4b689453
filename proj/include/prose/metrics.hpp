#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prose/backend.hpp"
#include "prose/prompts.hpp"
#include "prose/types.hpp"

namespace prose {

struct MetricValue {
    std::string name;
    double value = 0.0;
    // Per-component judge scores, when the metric has them.
    std::optional<std::vector<int>> details;
};

// Stable metric registry names.
namespace metric_names {
inline constexpr const char* ppcm = "ppcm";
inline constexpr const char* pref_sim = "pref_sim";
inline constexpr const char* pref_len = "pref_len";
inline constexpr const char* levenshtein = "levenshtein";
inline constexpr const char* ln_levenshtein = "ln_levenshtein";
}  // namespace metric_names

bool is_known_metric(const std::string& name);

// Judge-call settings shared by ppcm and pref_similarity.
struct JudgeConfig {
    std::string model_id = "judge";
    TaskKind task_kind = TaskKind::summarize;
    double temperature = 0.0;
    std::optional<int> max_tokens;
    // Receives every judge exchange, e.g. to append to an episode log.
    std::function<void(const ChatExchange&)> on_exchange;
};

// Mean judge score in [-2, 2] of a generation against each true component.
MetricValue ppcm(const std::string& agent_text, const std::vector<std::string>& true_components,
                 ChatBackend& judge, const JudgeConfig& cfg);

// Mean judge score in [0, 4] of the inferred description against each true
// component. An empty description scores 0 without any judge call.
MetricValue pref_similarity(const std::string& inferred_description,
                            const std::vector<std::string>& true_components, ChatBackend& judge,
                            const JudgeConfig& cfg);

// Unit-cost edit distance over Unicode scalar values.
long levenshtein(const std::string& a, const std::string& b);
// Same, over whitespace-separated tokens.
long levenshtein_tokens(const std::string& a, const std::string& b);
// levenshtein / max(|a|, |b|), with 0/0 -> 0. Always in [0, 1].
double ln_levenshtein(const std::string& a, const std::string& b);

// Unicode scalar count of the description text.
long pref_length(const std::string& description);

// 100 * (value - npc) / (oracle - npc); unclamped.
double percentile_score(double value, double npc_value, double oracle_value);

// Sample Pearson correlation coefficient.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Decodes UTF-8 into Unicode scalar values (invalid bytes pass through as
// single scalars).
std::vector<uint32_t> utf8_scalars(const std::string& s);

// One member of the powerset-conditioned agent population.
struct CorrelationSample {
    TaskKind task_kind = TaskKind::summarize;
    std::string topic_id;
    std::vector<std::string> subset;
    long seed = 0;
    std::map<std::string, double> metrics;
};

struct CorrelationStudyResult {
    std::vector<CorrelationSample> samples;
    // rho keyed by (preference metric, generation metric).
    std::map<std::pair<std::string, std::string>, double> rho;
};

struct CorrelationStudyConfig {
    std::vector<long> seeds = {0, 1, 2, 3, 4};
    std::string agent_model_id = "agent";
    std::string judge_model_id = "judge";
    double agent_temperature = 1.0;
    std::optional<int> max_tokens;
};

class PreferenceRegistry;  // plume.hpp

// For every topic, every subset of its ground-truth set, and every seed:
// generate conditioned on the subset, score preference-quality metrics
// (subset vs. full set) and generation-quality metrics (against a
// full-set reference generation), then correlate each pair across the
// population.
CorrelationStudyResult correlation_study(
    const PreferenceRegistry& registry,
    const std::vector<std::pair<TaskKind, std::string>>& topics,
    const std::function<std::string(TaskKind, const std::string&)>& content_for,
    ChatBackend& agent_backend, ChatBackend& judge_backend, const CorrelationStudyConfig& cfg);

}  // namespace prose
