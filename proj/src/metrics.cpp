#include "prose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "prose/parsers.hpp"
#include "prose/plume.hpp"

namespace prose {

bool is_known_metric(const std::string& name) {
    return name == metric_names::ppcm || name == metric_names::pref_sim ||
           name == metric_names::pref_len || name == metric_names::levenshtein ||
           name == metric_names::ln_levenshtein;
}

namespace {

int judge_one(const PromptTemplate& tmpl, VarMap vars, const LikertScale& scale,
              ChatBackend& judge, const JudgeConfig& cfg, const std::string& role) {
    RenderedPrompt prompt = render(tmpl, vars);
    ChatRequest req;
    req.system = prompt.system;
    req.user = prompt.user;
    req.temperature = cfg.temperature;
    req.model_id = cfg.model_id;
    req.max_tokens = cfg.max_tokens;
    req.role = role;
    ChatExchange ex = judge.complete(req);
    if (cfg.on_exchange) cfg.on_exchange(ex);
    return parse_verdict(ex.response_text, scale).score;
}

}  // namespace

MetricValue ppcm(const std::string& agent_text, const std::vector<std::string>& true_components,
                 ChatBackend& judge, const JudgeConfig& cfg) {
    if (true_components.empty()) throw ValidationError("ppcm needs at least one true component");
    const PromptTemplate& tmpl = TemplateSet::builtin().get("judge_ppcm");
    std::vector<int> scores;
    for (const auto& component : true_components) {
        VarMap vars = task_selectors(cfg.task_kind);
        vars["agent_completion"] = agent_text;
        vars["true_preference"] = component;
        scores.push_back(
            judge_one(tmpl, std::move(vars), LikertScale::ppcm(), judge, cfg, "judge_ppcm"));
    }
    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    return {metric_names::ppcm, mean, scores};
}

MetricValue pref_similarity(const std::string& inferred_description,
                            const std::vector<std::string>& true_components, ChatBackend& judge,
                            const JudgeConfig& cfg) {
    if (true_components.empty()) {
        throw ValidationError("pref_similarity needs at least one true component");
    }
    if (trim(inferred_description).empty()) {
        return {metric_names::pref_sim, 0.0,
                std::vector<int>(true_components.size(), 0)};
    }
    const PromptTemplate& tmpl = TemplateSet::builtin().get("judge_pref_sim");
    std::vector<int> scores;
    for (const auto& component : true_components) {
        VarMap vars = task_selectors(cfg.task_kind);
        vars["inferred_preference"] = inferred_description;
        vars["true_preference"] = component;
        scores.push_back(judge_one(tmpl, std::move(vars), LikertScale::preference_similarity(),
                                   judge, cfg, "judge_pref_sim"));
    }
    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    return {metric_names::pref_sim, mean, scores};
}

std::vector<uint32_t> utf8_scalars(const std::string& s) {
    std::vector<uint32_t> out;
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        size_t len = 1;
        uint32_t cp = c;
        if (c < 0x80) {
            len = 1;
        } else if ((c >> 5) == 0x6) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c >> 4) == 0xE) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c >> 3) == 0x1E) {
            len = 4;
            cp = c & 0x07;
        } else {
            out.push_back(c);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(c);
            ++i;
            continue;
        }
        bool valid = true;
        uint32_t acc = cp;
        for (size_t j = 1; j < len; ++j) {
            unsigned char cc = s[i + j];
            if ((cc >> 6) != 0x2) {
                valid = false;
                break;
            }
            acc = (acc << 6) | (cc & 0x3F);
        }
        if (!valid) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(acc);
        i += len;
    }
    return out;
}

namespace {

template <typename T>
long edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return static_cast<long>(m);
    if (m == 0) return static_cast<long>(n);
    std::vector<long> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0L);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<long>(i);
        for (size_t j = 1; j <= m; ++j) {
            long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

long levenshtein(const std::string& a, const std::string& b) {
    return edit_distance(utf8_scalars(a), utf8_scalars(b));
}

long levenshtein_tokens(const std::string& a, const std::string& b) {
    return edit_distance(whitespace_tokens(a), whitespace_tokens(b));
}

double ln_levenshtein(const std::string& a, const std::string& b) {
    auto sa = utf8_scalars(a);
    auto sb = utf8_scalars(b);
    size_t longest = std::max(sa.size(), sb.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(edit_distance(sa, sb)) / static_cast<double>(longest);
}

long pref_length(const std::string& description) {
    return static_cast<long>(utf8_scalars(description).size());
}

double percentile_score(double value, double npc_value, double oracle_value) {
    double span = oracle_value - npc_value;
    if (span == 0.0) throw ValidationError("percentile_score: oracle and npc anchors coincide");
    return 100.0 * (value - npc_value) / span;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw ValidationError("pearson needs at least two samples");
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValidationError("pearson undefined for a constant series");
    }
    return sxy / std::sqrt(sxx * syy);
}

// --- correlation study -----------------------------------------------------

namespace {

std::string joined_subset(const std::vector<std::string>& subset) {
    std::string out;
    for (size_t i = 0; i < subset.size(); ++i) {
        if (i) out += ", ";
        out += subset[i];
    }
    return out;
}

std::string generate_for_subset(TaskKind kind, const std::string& content,
                                const std::string& description, ChatBackend& backend,
                                const CorrelationStudyConfig& cfg, long sampling_seed) {
    VarMap vars = task_selectors(kind);
    vars["task_content"] = content;
    RenderedPrompt prompt;
    if (description.empty()) {
        prompt = render(TemplateSet::builtin().get("npc"), vars);
    } else {
        vars["preference_description"] = description;
        prompt = render(TemplateSet::builtin().get("agent_generation"), vars);
    }
    ChatRequest req;
    req.system = prompt.system;
    req.user = prompt.user;
    req.temperature = cfg.agent_temperature;
    req.sampling_seed = sampling_seed;
    req.model_id = cfg.agent_model_id;
    req.max_tokens = cfg.max_tokens;
    req.role = description.empty() ? "agent_npc" : "agent_generation";
    ChatExchange ex = backend.complete(req);
    return parse_triple_quoted(ex.response_text).text;
}

}  // namespace

CorrelationStudyResult correlation_study(
    const PreferenceRegistry& registry,
    const std::vector<std::pair<TaskKind, std::string>>& topics,
    const std::function<std::string(TaskKind, const std::string&)>& content_for,
    ChatBackend& agent_backend, ChatBackend& judge_backend, const CorrelationStudyConfig& cfg) {
    if (topics.empty()) throw ValidationError("correlation study needs at least one topic");
    if (cfg.seeds.empty()) throw ValidationError("correlation study needs at least one seed");

    CorrelationStudyResult result;
    for (const auto& [kind, topic_id] : topics) {
        const auto& full = registry.components(kind, topic_id);
        std::string content = content_for(kind, topic_id);

        JudgeConfig judge_cfg;
        judge_cfg.model_id = cfg.judge_model_id;
        judge_cfg.task_kind = kind;
        judge_cfg.max_tokens = cfg.max_tokens;

        for (long seed : cfg.seeds) {
            // Reference text: a generation conditioned on the whole set,
            // shared by every subset sample for this (topic, seed).
            std::string reference = generate_for_subset(kind, content, joined_subset(full),
                                                        agent_backend, cfg, seed);

            const size_t n_subsets = size_t{1} << full.size();
            for (size_t mask = 0; mask < n_subsets; ++mask) {
                std::vector<std::string> subset;
                for (size_t bit = 0; bit < full.size(); ++bit) {
                    if (mask & (size_t{1} << bit)) subset.push_back(full[bit]);
                }
                std::string description = joined_subset(subset);
                long sampling_seed = seed ^ static_cast<long>(mask + 1);
                std::string text = generate_for_subset(kind, content, description, agent_backend,
                                                       cfg, sampling_seed);

                CorrelationSample sample;
                sample.task_kind = kind;
                sample.topic_id = topic_id;
                sample.subset = subset;
                sample.seed = seed;
                sample.metrics[metric_names::ppcm] =
                    ppcm(text, full, judge_backend, judge_cfg).value;
                sample.metrics[metric_names::pref_sim] =
                    pref_similarity(description, full, judge_backend, judge_cfg).value;
                sample.metrics[metric_names::pref_len] =
                    static_cast<double>(pref_length(description));
                sample.metrics[metric_names::levenshtein] =
                    static_cast<double>(levenshtein(text, reference));
                sample.metrics[metric_names::ln_levenshtein] = ln_levenshtein(text, reference);
                result.samples.push_back(std::move(sample));
            }
        }
    }

    const std::vector<std::string> pref_metrics{metric_names::pref_sim, metric_names::pref_len};
    const std::vector<std::string> gen_metrics{metric_names::ppcm, metric_names::levenshtein,
                                               metric_names::ln_levenshtein};
    for (const auto& pm : pref_metrics) {
        for (const auto& gm : gen_metrics) {
            std::vector<double> xs, ys;
            for (const auto& s : result.samples) {
                xs.push_back(s.metrics.at(pm));
                ys.push_back(s.metrics.at(gm));
            }
            result.rho[{pm, gm}] = pearson(xs, ys);
        }
    }
    return result;
}

}  // namespace prose
