#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prose/types.hpp"

namespace prose {

// A named system/user prompt pair with {placeholder} slots in the user
// skeleton.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string user_skeleton;
};

using VarMap = std::map<std::string, std::string>;

struct RenderedPrompt {
    std::string system;
    std::string user;
};

// Fills {placeholder} slots; throws RenderError naming the first
// unresolved placeholder. Output is byte-stable for identical inputs.
RenderedPrompt render(const PromptTemplate& tmpl, const VarMap& vars);

// Task-kind selector variables ({summary|email}, {article|notes}, ...)
// shared by every template that embeds task content.
VarMap task_selectors(TaskKind kind);

// The fixed template collection: agent_generation, aggregation,
// inference_update, breakdown, verification, judge_ppcm, judge_pref_sim,
// synthetic_human, npc, icl.
class TemplateSet {
public:
    // The compiled-in templates.
    static const TemplateSet& builtin();
    // Load from a directory of <name>.system.txt / <name>.user.txt files.
    static TemplateSet load(const std::filesystem::path& dir);

    const PromptTemplate& get(const std::string& name) const;
    std::vector<std::string> names() const;

    void add(PromptTemplate tmpl);

    // Writes the template files plus manifest.json to a directory.
    void write_to(const std::filesystem::path& dir) const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

// One option of a Likert scale, verbatim label plus numeric mapping.
struct LikertVerdict {
    std::string label;
    int score = 0;
};

// A bijection between verbatim labels and scores.
class LikertScale {
public:
    LikertScale(std::string name, std::vector<LikertVerdict> options);

    const std::string& name() const { return name_; }
    const std::vector<LikertVerdict>& options() const { return options_; }

    int score_for(const std::string& label) const;   // throws ParseError
    const std::string& label_for(int score) const;   // throws ParseError

    // Scores judging how strongly writing exhibits a preference, in [-2, 2].
    static const LikertScale& ppcm();
    // Scores confirming/contradicting a component, in [-2, 2].
    static const LikertScale& verification();
    // Scores similarity between preference descriptions, in [0, 4].
    static const LikertScale& preference_similarity();
    static const std::vector<const LikertScale*>& all();

private:
    std::string name_;
    std::vector<LikertVerdict> options_;
};

}  // namespace prose
