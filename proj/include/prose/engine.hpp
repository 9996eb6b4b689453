#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prose/memory.hpp"
#include "prose/prompts.hpp"
#include "prose/session.hpp"
#include "prose/types.hpp"

namespace prose {

// Which parts of the learning loop are active. Full is the complete
// algorithm; CE is the single-step conceptual-equivalent baseline; NV
// skips verification; u / u_a / u_a_S restrict the refinement inputs.
enum class Ablation { CE, u, u_a, u_a_S, NV, Full };

std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);

struct ProseConfig {
    int max_refinement_steps = 5;          // S
    double verification_threshold = 0.25;  // v
    int retrieval_k = 3;
    Ablation ablation = Ablation::Full;
    bool combine_icl = false;

    void validate() const;
    // CE and the single-pass ablations perform exactly one refine call.
    int effective_steps() const;
    bool verification_enabled() const;
};

enum class StopReason { exact_match, description_unchanged, max_steps };
std::string to_string(StopReason r);

struct RefinementTrace {
    std::vector<PreferenceDescription> descriptions;
    std::vector<AgentGeneration> generations;
    StopReason stop_reason = StopReason::max_steps;
};

struct VerificationOutcome {
    PreferenceComponent component;
    std::vector<int> per_demo_scores;
    double mean_score = 0.0;
    bool kept = false;
};

struct CompletionResult {
    AgentGeneration generation;
    PreferenceDescription description;
    std::vector<MemoryRecord> retrieved;
    // Demonstration texts of the retrieved records, oldest-first; the ICL
    // blocks when combine_icl is on.
    std::vector<std::string> example_texts;
};

struct LearningResult {
    MemoryRecord record;
    RefinementTrace trace;
    std::vector<VerificationOutcome> verification;
};

// Threshold pruning: kept iff mean(per-demo scores) >= v. Exposed
// separately so the pruning rule can be property-tested without a backend.
bool component_kept(const std::vector<int>& scores, double threshold);
double mean_score(const std::vector<int>& scores);

// Exact-text union in first-seen order; origin steps of first occurrence win.
std::vector<PreferenceComponent> union_components(std::vector<PreferenceComponent> base,
                                                  const std::vector<PreferenceComponent>& more);

class ProseEngine {
public:
    ProseEngine(const TemplateSet& templates, ProseConfig config);

    const ProseConfig& config() const { return config_; }

    // Retrieval, component aggregation, and preference-conditioned
    // generation. Empty memory degenerates to an unconditioned generation.
    CompletionResult complete_task(const InteractionMemory& memory, const TaskInstance& task,
                                   BackendSession& session) const;

    // One preference-update call. w_a empty means the ablation withholds
    // the agent generation from the prompt.
    PreferenceDescription refine_step(const TaskInstance& task, const Demonstration& w_u,
                                      const std::optional<std::string>& w_a,
                                      const PreferenceDescription& current,
                                      BackendSession& session) const;

    // Splits a description into ordered components via the breakdown prompt.
    std::vector<PreferenceComponent> breakdown(const PreferenceDescription& description,
                                               BackendSession& session) const;

    // Scores one component against one demonstration, in [-2, 2].
    int verify_component(const PreferenceComponent& component,
                         const Demonstration& demonstration, BackendSession& session) const;

    // The full learning loop: iterative refinement, component
    // accumulation, consistency verification, and the memory write.
    LearningResult run_prose_learning(InteractionMemory& memory, const TaskInstance& task,
                                      const Demonstration& w_u, const AgentGeneration& w_a0,
                                      const PreferenceDescription& p_desc0,
                                      const std::vector<MemoryRecord>& retrieved,
                                      BackendSession& session) const;

    // Renders the preference-conditioned (or, for an empty description,
    // unconditioned) task prompt and generates. Shared with the baselines.
    AgentGeneration generate_conditioned(const TaskInstance& task,
                                         const PreferenceDescription& description,
                                         BackendSession& session) const;

    // Few-shot generation from prior demonstrations only.
    AgentGeneration generate_icl(const TaskInstance& task,
                                 const std::vector<MemoryRecord>& examples,
                                 BackendSession& session) const;

    // Combined prompt: inferred description plus the ICL example blocks.
    AgentGeneration generate_combined_icl(const TaskInstance& task,
                                          const PreferenceDescription& description,
                                          const std::vector<MemoryRecord>& examples,
                                          BackendSession& session) const;

    const TemplateSet& templates() const { return templates_; }

private:
    const TemplateSet& templates_;
    ProseConfig config_;
};

// Serializes components as "[a, b]" for the aggregation prompt.
std::string serialize_component_list(const std::vector<PreferenceComponent>& components);

// Renders the numbered ICL example blocks (oldest-first).
std::string render_icl_blocks(TaskKind kind, const std::vector<MemoryRecord>& records);

}  // namespace prose
