#include "prose/baselines.hpp"

#include "prose/metrics.hpp"
#include "prose/parsers.hpp"

namespace prose {

BaselineKind BaselineKind::parse(const std::string& name) {
    BaselineKind k;
    if (name == "npc") {
        k.kind = Kind::npc;
    } else if (name == "oracle") {
        k.kind = Kind::oracle;
    } else if (name == "icl") {
        k.kind = Kind::icl;
    } else if (name == "prose") {
        k.kind = Kind::prose;
    } else if (name == "prose_icl" || name == "prose_plus_icl") {
        k.kind = Kind::prose_plus_icl;
    } else if (name.rfind("cipher", 0) == 0) {
        k.kind = Kind::cipher;
        if (name.size() > 7 && name[6] == '-') {
            k.cipher_k = std::stoi(name.substr(7));
        } else {
            k.cipher_k = 1;
        }
        if (k.cipher_k < 1) throw ConfigError("cipher k must be >= 1");
    } else {
        throw ConfigError("unknown agent kind: " + name);
    }
    return k;
}

std::string BaselineKind::name() const {
    switch (kind) {
        case Kind::npc: return "npc";
        case Kind::oracle: return "oracle";
        case Kind::icl: return "icl";
        case Kind::cipher: return "cipher-" + std::to_string(cipher_k);
        case Kind::prose_plus_icl: return "prose_icl";
        case Kind::prose: return "prose";
    }
    throw ConfigError("bad baseline kind");
}

namespace {

ProseConfig engine_defaults() {
    return {};
}

}  // namespace

// --- NPC -------------------------------------------------------------------

NpcAgent::NpcAgent(const TemplateSet& templates) : engine_(templates, engine_defaults()) {}

AgentGeneration NpcAgent::complete(const TaskInstance& task, BackendSession& session) {
    return engine_.generate_conditioned(task, {}, session);
}

// --- Oracle ----------------------------------------------------------------

OracleAgent::OracleAgent(const TemplateSet& templates, const PreferenceRegistry& registry)
    : engine_(templates, engine_defaults()), registry_(registry) {}

AgentGeneration OracleAgent::complete(const TaskInstance& task, BackendSession& session) {
    description_ = {registry_.joined(task.kind, task.topic_id), 0};
    return engine_.generate_conditioned(task, description_, session);
}

// --- ICL -------------------------------------------------------------------

IclAgent::IclAgent(const TemplateSet& templates, int example_count)
    : engine_(templates, engine_defaults()), example_count_(example_count) {}

AgentGeneration IclAgent::complete(const TaskInstance& task, BackendSession& session) {
    auto examples = memory_.retrieve_relevant(task, example_count_);
    return engine_.generate_icl(task, examples, session);
}

void IclAgent::learn(const TaskInstance& task, const Demonstration& demonstration,
                     BackendSession& session) {
    MemoryRecord record;
    record.task = task;
    record.demonstration = demonstration;
    long seq = memory_.insert(record);
    session.log().event("memory_record",
                        {{"sequence_no", seq}, {"components", nlohmann::json::array()}});
}

// --- CIPHER ----------------------------------------------------------------

CipherAgent::CipherAgent(const TemplateSet& templates, int k, std::optional<int> desc_cap_chars)
    : engine_(templates, engine_defaults()), k_(k), desc_cap_chars_(desc_cap_chars) {
    if (k_ < 1) throw ConfigError("cipher k must be >= 1");
}

std::string CipherAgent::kind() const {
    return "cipher-" + std::to_string(k_);
}

AgentGeneration CipherAgent::complete(const TaskInstance& task, BackendSession& session) {
    auto retrieved = memory_.retrieve_relevant(task, k_);
    std::vector<PreferenceComponent> stored;
    for (const auto& r : retrieved) {
        // Each record holds one whole description as its only component.
        stored = union_components(std::move(stored), r.components);
    }
    if (stored.empty()) {
        description_ = {};
        last_generation_ = engine_.generate_conditioned(task, {}, session);
        return last_generation_;
    }
    VarMap vars{{"preference_list", serialize_component_list(stored)}};
    RenderedPrompt prompt = render(engine_.templates().get("aggregation"), vars);
    ChatExchange ex = session.complete("aggregation", prompt.system, prompt.user);
    description_ = {trim(ex.response_text), 0};
    session.log().event("parsed_description",
                        {{"role", "aggregation"}, {"text", description_.text}});
    last_generation_ = engine_.generate_conditioned(task, description_, session);
    return last_generation_;
}

void CipherAgent::learn(const TaskInstance& task, const Demonstration& demonstration,
                        BackendSession& session) {
    // One inference call comparing w_a and w_u; no iteration, breakdown,
    // or verification.
    PreferenceDescription inferred = engine_.refine_step(
        task, demonstration, last_generation_.text, description_, session);
    std::string text = inferred.text;
    if (desc_cap_chars_ && pref_length(text) > *desc_cap_chars_) {
        // Truncate on scalar boundaries.
        std::string capped;
        size_t bytes = 0;
        long count = 0;
        while (bytes < text.size() && count < *desc_cap_chars_) {
            unsigned char c = text[bytes];
            size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
            capped.append(text, bytes, len);
            bytes += len;
            ++count;
        }
        text = capped;
        session.log().event("cipher_description_capped",
                            {{"cap", *desc_cap_chars_}, {"text", text}});
    }
    MemoryRecord record;
    record.task = task;
    record.demonstration = demonstration;
    record.components = {{text, 0}};
    long seq = memory_.insert(record);
    session.log().event("memory_record",
                        {{"sequence_no", seq}, {"components", nlohmann::json::array({text})}});
    description_ = {text, 0};
}

// --- PROSE -----------------------------------------------------------------

ProseAgent::ProseAgent(const TemplateSet& templates, ProseConfig config)
    : engine_(templates, std::move(config)) {}

std::string ProseAgent::kind() const {
    if (engine_.config().combine_icl) return "prose_icl";
    return "prose_" + to_string(engine_.config().ablation);
}

AgentGeneration ProseAgent::complete(const TaskInstance& task, BackendSession& session) {
    CompletionResult result = engine_.complete_task(memory_, task, session);
    description_ = result.description;
    last_generation_ = result.generation;
    last_retrieved_ = result.retrieved;
    return result.generation;
}

void ProseAgent::learn(const TaskInstance& task, const Demonstration& demonstration,
                       BackendSession& session) {
    LearningResult result = engine_.run_prose_learning(memory_, task, demonstration,
                                                       last_generation_, description_,
                                                       last_retrieved_, session);
    (void)result;
}

// --- factory ---------------------------------------------------------------

std::unique_ptr<Agent> make_agent(const BaselineKind& kind, const TemplateSet& templates,
                                  const PreferenceRegistry& registry, const ProseConfig& config,
                                  std::optional<int> cipher_desc_cap) {
    switch (kind.kind) {
        case BaselineKind::Kind::npc:
            return std::make_unique<NpcAgent>(templates);
        case BaselineKind::Kind::oracle:
            return std::make_unique<OracleAgent>(templates, registry);
        case BaselineKind::Kind::icl:
            return std::make_unique<IclAgent>(templates, config.retrieval_k);
        case BaselineKind::Kind::cipher:
            return std::make_unique<CipherAgent>(templates, kind.cipher_k, cipher_desc_cap);
        case BaselineKind::Kind::prose_plus_icl: {
            ProseConfig cfg = config;
            cfg.combine_icl = true;
            return std::make_unique<ProseAgent>(templates, cfg);
        }
        case BaselineKind::Kind::prose:
            return std::make_unique<ProseAgent>(templates, config);
    }
    throw ConfigError("bad baseline kind");
}

}  // namespace prose
