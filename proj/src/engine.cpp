#include "prose/engine.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "prose/parsers.hpp"

namespace prose {

using json = nlohmann::json;

// --- config ----------------------------------------------------------------

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::CE: return "CE";
        case Ablation::u: return "u";
        case Ablation::u_a: return "u_a";
        case Ablation::u_a_S: return "u_a_S";
        case Ablation::NV: return "NV";
        case Ablation::Full: return "Full";
    }
    throw ValidationError("bad ablation value");
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "CE") return Ablation::CE;
    if (s == "u") return Ablation::u;
    if (s == "u_a") return Ablation::u_a;
    if (s == "u_a_S") return Ablation::u_a_S;
    if (s == "NV") return Ablation::NV;
    if (s == "Full") return Ablation::Full;
    throw ValidationError("unknown ablation: " + s);
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::exact_match: return "exact_match";
        case StopReason::description_unchanged: return "description_unchanged";
        case StopReason::max_steps: return "max_steps";
    }
    throw ValidationError("bad stop reason");
}

void ProseConfig::validate() const {
    if (max_refinement_steps < 1) throw ValidationError("S must be >= 1");
    if (verification_threshold < -2.0 || verification_threshold > 2.0)
        throw ValidationError("v must be in [-2, 2]");
    if (retrieval_k < 0) throw ValidationError("retrieval_k must be >= 0");
}

int ProseConfig::effective_steps() const {
    switch (ablation) {
        case Ablation::CE:
        case Ablation::u:
        case Ablation::u_a:
            return 1;
        default:
            return max_refinement_steps;
    }
}

bool ProseConfig::verification_enabled() const {
    return ablation != Ablation::NV && ablation != Ablation::CE;
}

// --- pure helpers ----------------------------------------------------------

double mean_score(const std::vector<int>& scores) {
    if (scores.empty()) return 0.0;
    return std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
}

bool component_kept(const std::vector<int>& scores, double threshold) {
    return mean_score(scores) >= threshold;
}

std::vector<PreferenceComponent> union_components(std::vector<PreferenceComponent> base,
                                                  const std::vector<PreferenceComponent>& more) {
    for (const auto& c : more) {
        bool present = false;
        for (const auto& b : base) {
            if (b.text == c.text) {
                present = true;
                break;
            }
        }
        if (!present) base.push_back(c);
    }
    return base;
}

std::string serialize_component_list(const std::vector<PreferenceComponent>& components) {
    std::string out = "[";
    for (size_t i = 0; i < components.size(); ++i) {
        if (i) out += ", ";
        out += components[i].text;
    }
    out += "]";
    return out;
}

std::string render_icl_blocks(TaskKind kind, const std::vector<MemoryRecord>& records) {
    VarMap sel = task_selectors(kind);
    std::ostringstream out;
    for (size_t i = 0; i < records.size(); ++i) {
        if (i) out << "\n\n";
        out << "Example " << i << ":\n\n";
        out << sel["doc_kind_cap"] << ":\n\n";
        out << "[START OF " << sel["doc_kind_upper"] << "]\n";
        out << records[i].task.content << "\n";
        out << "[END OF " << sel["doc_kind_upper"] << "]\n\n";
        out << sel["doc_kind_cap"] << ":\n\n";
        out << "\"\"\"\n" << records[i].demonstration.text << "\n\"\"\"";
    }
    return out.str();
}

// --- engine ----------------------------------------------------------------

ProseEngine::ProseEngine(const TemplateSet& templates, ProseConfig config)
    : templates_(templates), config_(std::move(config)) {
    config_.validate();
}

namespace {

AgentGeneration finish_generation(const std::string& role, const ChatExchange& ex,
                                  const PreferenceDescription& description,
                                  BackendSession& session) {
    Extraction extraction = parse_triple_quoted(ex.response_text);
    if (extraction.used_fallback) {
        session.log().event("extraction_fallback", {{"role", role}});
    }
    AgentGeneration gen;
    gen.text = extraction.text;
    gen.conditioned_on = description;
    gen.step = description.step;
    session.log().event("parsed_generation",
                        {{"role", role}, {"text", gen.text}, {"step", gen.step}});
    return gen;
}

}  // namespace

AgentGeneration ProseEngine::generate_conditioned(const TaskInstance& task,
                                                  const PreferenceDescription& description,
                                                  BackendSession& session) const {
    VarMap vars = task_selectors(task.kind);
    vars["task_content"] = task.content;
    RenderedPrompt prompt;
    std::string role;
    if (description.empty()) {
        prompt = render(templates_.get("npc"), vars);
        role = "agent_npc";
    } else {
        vars["preference_description"] = description.text;
        prompt = render(templates_.get("agent_generation"), vars);
        role = "agent_generation";
    }
    ChatExchange ex = session.complete(role, prompt.system, prompt.user);
    return finish_generation(role, ex, description, session);
}

AgentGeneration ProseEngine::generate_icl(const TaskInstance& task,
                                          const std::vector<MemoryRecord>& examples,
                                          BackendSession& session) const {
    if (examples.empty()) {
        return generate_conditioned(task, {}, session);
    }
    VarMap vars = task_selectors(task.kind);
    vars["task_content"] = task.content;
    vars["example_blocks"] = render_icl_blocks(task.kind, examples);
    RenderedPrompt prompt = render(templates_.get("icl"), vars);
    ChatExchange ex = session.complete("agent_icl", prompt.system, prompt.user);
    return finish_generation("agent_icl", ex, {}, session);
}

AgentGeneration ProseEngine::generate_combined_icl(const TaskInstance& task,
                                                   const PreferenceDescription& description,
                                                   const std::vector<MemoryRecord>& examples,
                                                   BackendSession& session) const {
    if (examples.empty() || description.empty()) {
        // Nothing to combine; fall back to whichever side has signal.
        if (!description.empty()) return generate_conditioned(task, description, session);
        return generate_icl(task, examples, session);
    }
    VarMap vars = task_selectors(task.kind);
    vars["task_content"] = task.content;
    vars["example_blocks"] = render_icl_blocks(task.kind, examples);
    RenderedPrompt prompt = render(templates_.get("icl"), vars);
    prompt.user =
        "You have the following preferences: " + description.text + "\n\n" + prompt.user;
    ChatExchange ex = session.complete("agent_prose_icl", prompt.system, prompt.user);
    return finish_generation("agent_prose_icl", ex, description, session);
}

CompletionResult ProseEngine::complete_task(const InteractionMemory& memory,
                                            const TaskInstance& task,
                                            BackendSession& session) const {
    task.validate();
    CompletionResult result;
    result.retrieved = memory.retrieve_relevant(task, config_.retrieval_k);
    json retrieved_seq = json::array();
    for (const auto& r : result.retrieved) retrieved_seq.push_back(r.sequence_no);
    session.log().event("retrieval",
                        {{"k", config_.retrieval_k}, {"sequence_nos", retrieved_seq}});

    std::vector<PreferenceComponent> unioned;
    for (const auto& r : result.retrieved) {
        unioned = union_components(std::move(unioned), r.components);
    }

    if (!unioned.empty()) {
        VarMap vars{{"preference_list", serialize_component_list(unioned)}};
        RenderedPrompt prompt = render(templates_.get("aggregation"), vars);
        ChatExchange ex = session.complete("aggregation", prompt.system, prompt.user);
        result.description = {trim(ex.response_text), 0};
        session.log().event("parsed_description",
                            {{"role", "aggregation"}, {"text", result.description.text}});
    } else {
        result.description = {"", 0};
    }

    if (config_.combine_icl) {
        for (const auto& r : result.retrieved) result.example_texts.push_back(r.demonstration.text);
    }

    if (config_.combine_icl && !result.retrieved.empty()) {
        result.generation =
            generate_combined_icl(task, result.description, result.retrieved, session);
    } else {
        result.generation = generate_conditioned(task, result.description, session);
    }
    return result;
}

PreferenceDescription ProseEngine::refine_step(const TaskInstance& task, const Demonstration& w_u,
                                               const std::optional<std::string>& w_a,
                                               const PreferenceDescription& current,
                                               BackendSession& session) const {
    VarMap vars = task_selectors(task.kind);
    vars["task_content"] = task.content;
    vars["preference_description"] = current.empty() ? "(none yet)" : current.text;
    vars["assistant_output"] = w_a ? *w_a : "(no prior attempt)";
    vars["user_output"] = w_u.text;
    RenderedPrompt prompt = render(templates_.get("inference_update"), vars);
    auto parsed = complete_parsed(
        session, "inference_update", prompt.system, prompt.user, [](const ChatExchange& ex) {
            std::vector<std::string> parts = parse_preferences_line(ex.response_text);
            std::string text;
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) text += ", ";
                text += parts[i];
            }
            return text;
        });
    PreferenceDescription next{parsed, current.step + 1};
    session.log().event("parsed_description",
                        {{"role", "inference_update"}, {"text", next.text}, {"step", next.step}});
    return next;
}

std::vector<PreferenceComponent> ProseEngine::breakdown(const PreferenceDescription& description,
                                                        BackendSession& session) const {
    if (description.empty()) throw ValidationError("breakdown of empty description");
    VarMap vars{{"inferred_preference_description", description.text}};
    RenderedPrompt prompt = render(templates_.get("breakdown"), vars);
    auto parts = complete_parsed(session, "breakdown", prompt.system, prompt.user,
                                 [](const ChatExchange& ex) {
                                     return parse_preferences_line(ex.response_text);
                                 });
    std::vector<PreferenceComponent> components;
    json logged = json::array();
    for (const auto& p : parts) {
        std::string text = trim(p);
        if (text.empty()) continue;
        components.push_back({text, description.step});
        logged.push_back(text);
    }
    session.log().event("parsed_components", {{"step", description.step}, {"texts", logged}});
    return components;
}

int ProseEngine::verify_component(const PreferenceComponent& component,
                                  const Demonstration& demonstration,
                                  BackendSession& session) const {
    VarMap vars{{"inferred_preference", component.text}, {"user_output", demonstration.text}};
    RenderedPrompt prompt = render(templates_.get("verification"), vars);
    LikertVerdict verdict = complete_parsed(
        session, "verification", prompt.system, prompt.user, [](const ChatExchange& ex) {
            return parse_verdict(ex.response_text, LikertScale::verification());
        });
    return verdict.score;
}

LearningResult ProseEngine::run_prose_learning(InteractionMemory& memory,
                                               const TaskInstance& task, const Demonstration& w_u,
                                               const AgentGeneration& w_a0,
                                               const PreferenceDescription& p_desc0,
                                               const std::vector<MemoryRecord>& retrieved,
                                               BackendSession& session) const {
    w_u.validate();
    LearningResult result;
    RefinementTrace& trace = result.trace;
    trace.descriptions.push_back(p_desc0);
    trace.generations.push_back(w_a0);
    trace.stop_reason = StopReason::max_steps;

    std::vector<PreferenceComponent> accumulated;
    if (!p_desc0.empty()) {
        accumulated = breakdown(p_desc0, session);
    }

    const std::string user_text = trim_trailing(w_u.text);
    PreferenceDescription current_desc = p_desc0;
    AgentGeneration current_gen = w_a0;
    const int steps = config_.effective_steps();

    for (int s = 0; s < steps; ++s) {
        if (trim_trailing(current_gen.text) == user_text) {
            trace.stop_reason = StopReason::exact_match;
            break;
        }
        std::optional<std::string> w_a_input;
        switch (config_.ablation) {
            case Ablation::u:
                w_a_input = std::nullopt;  // comparison generation withheld
                break;
            case Ablation::u_a:
            case Ablation::u_a_S:
                w_a_input = w_a0.text;  // fixed initial generation
                break;
            default:
                w_a_input = current_gen.text;
        }
        PreferenceDescription next = refine_step(task, w_u, w_a_input, current_desc, session);
        if (next.text == current_desc.text) {
            trace.stop_reason = StopReason::description_unchanged;
            break;
        }
        trace.descriptions.push_back(next);
        current_desc = next;
        accumulated = union_components(std::move(accumulated), breakdown(next, session));
        if (config_.ablation == Ablation::Full) {
            current_gen = generate_conditioned(task, current_desc, session);
            trace.generations.push_back(current_gen);
        }
    }

    // Consistency verification over retrieved demonstrations plus the
    // current one, so first-episode components have at least one vote.
    std::vector<PreferenceComponent> surviving;
    if (config_.verification_enabled()) {
        std::vector<Demonstration> demos;
        for (const auto& r : retrieved) demos.push_back(r.demonstration);
        demos.push_back(w_u);
        for (const auto& component : accumulated) {
            VerificationOutcome outcome;
            outcome.component = component;
            for (const auto& demo : demos) {
                outcome.per_demo_scores.push_back(verify_component(component, demo, session));
            }
            outcome.mean_score = mean_score(outcome.per_demo_scores);
            outcome.kept = component_kept(outcome.per_demo_scores, config_.verification_threshold);
            session.log().event("verification_outcome",
                                {{"component", component.text},
                                 {"scores", outcome.per_demo_scores},
                                 {"mean", outcome.mean_score},
                                 {"kept", outcome.kept}});
            if (outcome.kept) surviving.push_back(component);
            result.verification.push_back(std::move(outcome));
        }
    } else {
        surviving = accumulated;
    }

    MemoryRecord record;
    record.task = task;
    record.demonstration = w_u;
    record.components = surviving;
    long seq = memory.insert(record);
    record = memory.records().back();

    json comp_texts = json::array();
    for (const auto& c : record.components) comp_texts.push_back(c.text);
    session.log().event("memory_record", {{"sequence_no", seq},
                                          {"components", comp_texts},
                                          {"stop_reason", to_string(trace.stop_reason)}});
    result.record = record;
    return result;
}

}  // namespace prose
