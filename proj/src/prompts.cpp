#include "prose/prompts.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "prose/errors.hpp"

namespace prose {

using json = nlohmann::json;

RenderedPrompt render(const PromptTemplate& tmpl, const VarMap& vars) {
    auto fill = [&](const std::string& text) {
        std::string out;
        out.reserve(text.size());
        size_t pos = 0;
        while (pos < text.size()) {
            size_t open = text.find('{', pos);
            if (open == std::string::npos) {
                out.append(text, pos, std::string::npos);
                break;
            }
            size_t close = text.find('}', open + 1);
            if (close == std::string::npos) {
                out.append(text, pos, std::string::npos);
                break;
            }
            out.append(text, pos, open - pos);
            std::string key = text.substr(open + 1, close - open - 1);
            auto it = vars.find(key);
            if (it == vars.end()) {
                throw RenderError("template '" + tmpl.name +
                                  "' has unresolved placeholder {" + key + "}");
            }
            out.append(it->second);
            pos = close + 1;
        }
        return out;
    };
    return {fill(tmpl.system), fill(tmpl.user_skeleton)};
}

VarMap task_selectors(TaskKind kind) {
    if (kind == TaskKind::summarize) {
        return {{"output_kind", "summary"},
                {"doc_kind", "article"},
                {"doc_kind_cap", "Article"},
                {"doc_kind_upper", "ARTICLE"},
                {"this_these", "this"},
                {"task_verb", "summarize"}};
    }
    return {{"output_kind", "email"},
            {"doc_kind", "notes"},
            {"doc_kind_cap", "Notes"},
            {"doc_kind_upper", "NOTES"},
            {"this_these", "these"},
            {"task_verb", "write an email about"}};
}

namespace {

const char* kWriterSystem =
    "You are an experienced writer. Adapt your writing to heavily emphasize the provided "
    "preferences.";

const char* kInferenceSystem =
    "A user is completing writing tasks. The user has an underlying set of preferences that "
    "explains why they write the way they do.";

const char* kAgentUser = R"PROSE(You have the following preferences: {preference_description}

Using these preferences, write a short {output_kind} about {this_these} {doc_kind}:

[START OF {doc_kind_upper}]
{task_content}
[END OF {doc_kind_upper}]

Encapsulate the {output_kind} in triple quotes
"""
<{output_kind}>
""")PROSE";

const char* kAggregationUser =
    R"PROSE(We are tasked to curate a prompt to guide a specific style of writing. We currently have the following list of preferences related to writing styles:

{preference_list}

Unfortunately, these preferences may overlap or contain redundancies. Please review the list and condense it by combining similar or overlapping preferences, ensuring that the distinct intent behind each one remains clear so that a writer can easily follow them. Ensure the condensed list is concise, non-redundant, and preserves the original level of specificity. When applicable, preserve the exact wording. Return the revised preferences in the same format as the original list.)PROSE";

const char* kInferenceUpdateUser =
    R"PROSE(We received a new task. The task is to {task_verb} the following:
{task_content}

We have previously identified the following preferences:
{preference_description}

Based on these preferences, we wrote this {output_kind}:

{assistant_output}

However, this differs from the user's {output_kind}. The user wrote this {output_kind}:

{user_output}

Refine the list of preferences by adding, removing, or updating preferences in order to better imitate the user.

While refining the preference set, you should:
- Identify and reason about differences between our writing and the user's writing.
- Consider writing traits from distinct quirks to broader stylistic tendencies.
- Provide a concise set of preferences in the imperative form.
- Be precise; make the fewest possible changes to the preference set.
- Do not qualify, dilute, or soften existing preferences.
- Refine only the preferences if a clear difference exists. Otherwise, preserve the current preferences.

Provide a concise set of specific preferences in the imperative form.
After reasoning, output the refined set of preferences on a single new line and prefaced with "Preferences:".)PROSE";

const char* kBreakdownUser = R"PROSE(You inferred the following preference string:

{inferred_preference_description}

Format this preference into a concise set of preferences. Format the final set of preferences as a JSON list on a single line and prefaced with "Preferences:". Each element in the JSON list should be a string. The final output should look like:

Preferences: [<preference 1>,..., <preference i>, ...])PROSE";

const char* kVerificationUser =
    R"PROSE(Validate the following preference: "{inferred_preference}"
against the following writing:

{user_output}

Does the writing confirm or contradict the preference? Select one of the following: strongly confirms the preference, somewhat confirms the preference, is neutral toward the preference, somewhat contradicts the preference, strongly contradicts the preference.
Your final decision should be output on a separate line prefaced with "Verdict:".)PROSE";

const char* kJudgePpcmUser = R"PROSE(You received the following {output_kind}:

"""
{agent_completion}
"""

Does the above {output_kind} exhibit the following preference: {true_preference}?

Identify, analyze, and reason about specific excerpts that show similarities or contradictions of underlying preferences. After reasoning, select one of the following options:

clearly exhibits, somewhat exhibits, neither exhibits nor contradicts, somewhat contradicts, clearly contradicts

Your final selection should be on a new line prefaced with "Verdict:".)PROSE";

const char* kJudgePrefSimUser =
    R"PROSE(You received the following description of a user's writing preferences:

"""
{inferred_preference}
"""

How similar are the inferred preferences to the true writing preferences below?

True preference: {true_preference}?

Analyze how the preferences would impact a user's writing.
After reasoning, select one of the following options:

extremely similar, very similar, moderately similar, slightly similar, not at all similar

Your final selection should be on a new line prefaced with "Verdict:".)PROSE";

const char* kNpcUser = R"PROSE(Write a short {output_kind} about {this_these} {doc_kind}:

[START OF {doc_kind_upper}]
{task_content}
[END OF {doc_kind_upper}])PROSE";

const char* kIclUser = R"PROSE(You have previously observed the following examples:

{example_blocks}

Using the same style as these examples, write a short {output_kind} about {this_these} {doc_kind}:

[START OF {doc_kind_upper}]
{task_content}
[END OF {doc_kind_upper}]

Encapsulate the {output_kind} in triple quotes
"""
<{output_kind}>
""")PROSE";

TemplateSet make_builtin() {
    struct Entry {
        const char* name;
        const char* system;
        const char* user;
    };
    const Entry entries[] = {
        {"agent_generation", kWriterSystem, kAgentUser},
        {"aggregation", kInferenceSystem, kAggregationUser},
        {"inference_update", kInferenceSystem, kInferenceUpdateUser},
        {"breakdown", kInferenceSystem, kBreakdownUser},
        {"verification", kInferenceSystem, kVerificationUser},
        {"judge_ppcm", "You are an experienced editor that is evaluating writing samples.",
         kJudgePpcmUser},
        {"judge_pref_sim",
         "You are an experienced editor that is evaluating how similar writing preferences are.",
         kJudgePrefSimUser},
        {"synthetic_human", kWriterSystem, kAgentUser},
        {"npc", "You are an experienced writer.", kNpcUser},
        {"icl", kWriterSystem, kIclUser},
    };
    TemplateSet set;
    for (const auto& e : entries) {
        set.add({e.name, e.system, e.user});
    }
    return set;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = make_builtin();
    return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw StorageError("cannot open " + (dir / "manifest.json").string());
    json manifest;
    in >> manifest;
    TemplateSet set;
    for (const auto& entry : manifest.at("templates")) {
        std::string name = entry.at("name").get<std::string>();
        set.add({name, read_file(dir / (name + ".system.txt")),
                 read_file(dir / (name + ".user.txt"))});
    }
    return set;
}

void TemplateSet::add(PromptTemplate tmpl) {
    templates_[tmpl.name] = std::move(tmpl);
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw RenderError("unknown template: " + name);
    return it->second;
}

std::vector<std::string> TemplateSet::names() const {
    std::vector<std::string> out;
    for (const auto& [name, tmpl] : templates_) out.push_back(name);
    return out;
}

void TemplateSet::write_to(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json manifest{{"templates", json::array()}};
    for (const auto& [name, tmpl] : templates_) {
        std::ofstream sys(dir / (name + ".system.txt"), std::ios::binary);
        sys << tmpl.system;
        std::ofstream usr(dir / (name + ".user.txt"), std::ios::binary);
        usr << tmpl.user_skeleton;
        manifest["templates"].push_back({{"name", name},
                                         {"system_file", name + ".system.txt"},
                                         {"user_file", name + ".user.txt"}});
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
}

LikertScale::LikertScale(std::string name, std::vector<LikertVerdict> options)
    : name_(std::move(name)), options_(std::move(options)) {
    for (size_t i = 0; i < options_.size(); ++i) {
        for (size_t j = i + 1; j < options_.size(); ++j) {
            if (options_[i].label == options_[j].label || options_[i].score == options_[j].score) {
                throw ValidationError("scale " + name_ + " is not a bijection");
            }
        }
    }
}

int LikertScale::score_for(const std::string& label) const {
    for (const auto& opt : options_) {
        if (opt.label == label) return opt.score;
    }
    throw ParseError("label not in scale " + name_ + ": " + label);
}

const std::string& LikertScale::label_for(int score) const {
    for (const auto& opt : options_) {
        if (opt.score == score) return opt.label;
    }
    throw ParseError("score not in scale " + name_ + ": " + std::to_string(score));
}

const LikertScale& LikertScale::ppcm() {
    static const LikertScale scale("ppcm", {{"clearly exhibits", 2},
                                            {"somewhat exhibits", 1},
                                            {"neither exhibits nor contradicts", 0},
                                            {"somewhat contradicts", -1},
                                            {"clearly contradicts", -2}});
    return scale;
}

const LikertScale& LikertScale::verification() {
    static const LikertScale scale("verification",
                                   {{"strongly confirms the preference", 2},
                                    {"somewhat confirms the preference", 1},
                                    {"is neutral toward the preference", 0},
                                    {"somewhat contradicts the preference", -1},
                                    {"strongly contradicts the preference", -2}});
    return scale;
}

const LikertScale& LikertScale::preference_similarity() {
    static const LikertScale scale("preference_similarity", {{"extremely similar", 4},
                                                             {"very similar", 3},
                                                             {"moderately similar", 2},
                                                             {"slightly similar", 1},
                                                             {"not at all similar", 0}});
    return scale;
}

const std::vector<const LikertScale*>& LikertScale::all() {
    static const std::vector<const LikertScale*> scales{
        &ppcm(), &verification(), &preference_similarity()};
    return scales;
}

}  // namespace prose
