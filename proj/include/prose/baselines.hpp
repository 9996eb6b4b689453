#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prose/plume.hpp"

namespace prose {

struct BaselineKind {
    enum class Kind { npc, oracle, icl, cipher, prose_plus_icl, prose };
    Kind kind = Kind::npc;
    int cipher_k = 1;  // any k >= 1 accepted

    static BaselineKind parse(const std::string& name);
    std::string name() const;
};

// Lower bound: no preference conditioning, no learning, no memory writes.
class NpcAgent : public Agent {
public:
    explicit NpcAgent(const TemplateSet& templates);
    std::string kind() const override { return "npc"; }
    AgentGeneration complete(const TaskInstance& task, BackendSession& session) override;

private:
    ProseEngine engine_;
};

// Upper bound: conditioned on the ground-truth components in registry order.
class OracleAgent : public Agent {
public:
    OracleAgent(const TemplateSet& templates, const PreferenceRegistry& registry);
    std::string kind() const override { return "oracle"; }
    AgentGeneration complete(const TaskInstance& task, BackendSession& session) override;
    PreferenceDescription last_description() const override { return description_; }

private:
    ProseEngine engine_;
    const PreferenceRegistry& registry_;
    PreferenceDescription description_;
};

// Few-shot conditioning on prior demonstrations. Its learning step stores
// the demonstration with an empty component list, so its preference
// similarity is 0 by construction.
class IclAgent : public Agent {
public:
    IclAgent(const TemplateSet& templates, int example_count = 3);
    std::string kind() const override { return "icl"; }
    AgentGeneration complete(const TaskInstance& task, BackendSession& session) override;
    void learn(const TaskInstance& task, const Demonstration& demonstration,
               BackendSession& session) override;
    InteractionMemory& memory() { return memory_; }

private:
    ProseEngine engine_;
    InteractionMemory memory_;
    int example_count_;
};

// Single-step preference inference over the k most recent stored
// descriptions: one generate plus one infer call per episode, no
// breakdown, no verification. Descriptions are stored whole.
class CipherAgent : public Agent {
public:
    CipherAgent(const TemplateSet& templates, int k, std::optional<int> desc_cap_chars = 140);
    std::string kind() const override;
    AgentGeneration complete(const TaskInstance& task, BackendSession& session) override;
    void learn(const TaskInstance& task, const Demonstration& demonstration,
               BackendSession& session) override;
    PreferenceDescription last_description() const override { return description_; }
    InteractionMemory& memory() { return memory_; }

private:
    ProseEngine engine_;
    InteractionMemory memory_;
    int k_;
    std::optional<int> desc_cap_chars_;
    PreferenceDescription description_;
    AgentGeneration last_generation_;
};

// The full learning agent; combine_icl additionally mixes ICL blocks into
// the completion prompt.
class ProseAgent : public Agent {
public:
    ProseAgent(const TemplateSet& templates, ProseConfig config);
    std::string kind() const override;
    AgentGeneration complete(const TaskInstance& task, BackendSession& session) override;
    void learn(const TaskInstance& task, const Demonstration& demonstration,
               BackendSession& session) override;
    PreferenceDescription last_description() const override { return description_; }
    InteractionMemory& memory() { return memory_; }
    const ProseEngine& engine() const { return engine_; }

private:
    ProseEngine engine_;
    InteractionMemory memory_;
    PreferenceDescription description_;
    AgentGeneration last_generation_;
    std::vector<MemoryRecord> last_retrieved_;
};

// Builds the agent a run config names.
std::unique_ptr<Agent> make_agent(const BaselineKind& kind, const TemplateSet& templates,
                                  const PreferenceRegistry& registry, const ProseConfig& config,
                                  std::optional<int> cipher_desc_cap = 140);

}  // namespace prose
