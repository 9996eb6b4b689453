#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prose/parsers.hpp"
#include "prose/runner.hpp"

namespace py = pybind11;

namespace {

const prose::LikertScale& scale_by_name(const std::string& name) {
    for (const auto* scale : prose::LikertScale::all()) {
        if (scale->name() == name) return *scale;
    }
    throw prose::ValidationError("unknown scale: " + name);
}

}  // namespace

PYBIND11_MODULE(_prose, m) {
    m.doc() = "Preference learning from writing demonstrations";

    py::register_exception<prose::Error>(m, "ProseError");

    m.def("levenshtein", &prose::levenshtein, py::arg("a"), py::arg("b"),
          "Unit-cost edit distance over Unicode scalar values.");
    m.def("levenshtein_tokens", &prose::levenshtein_tokens, py::arg("a"), py::arg("b"),
          "Edit distance over whitespace-separated tokens.");
    m.def("ln_levenshtein", &prose::ln_levenshtein, py::arg("a"), py::arg("b"),
          "Length-normalized edit distance in [0, 1].");
    m.def("pref_length", &prose::pref_length, py::arg("description"),
          "Unicode scalar count of a preference description.");
    m.def("percentile_score", &prose::percentile_score, py::arg("value"), py::arg("npc"),
          py::arg("oracle"), "100 * (value - npc) / (oracle - npc), unclamped.");
    m.def("pearson", &prose::pearson, py::arg("xs"), py::arg("ys"),
          "Sample Pearson correlation coefficient.");
    m.def("utf8_scalars", &prose::utf8_scalars, py::arg("text"));

    m.def(
        "parse_triple_quoted",
        [](const std::string& raw) {
            prose::Extraction e = prose::parse_triple_quoted(raw);
            return py::make_tuple(e.text, e.used_fallback);
        },
        py::arg("raw"), "Returns (text, used_fallback).");
    m.def(
        "parse_verdict",
        [](const std::string& raw, const std::string& scale) {
            prose::LikertVerdict v = prose::parse_verdict(raw, scale_by_name(scale));
            return py::make_tuple(v.label, v.score);
        },
        py::arg("raw"), py::arg("scale"),
        "Returns (label, score); scale is one of ppcm, verification, preference_similarity.");
    m.def("parse_preferences_line", &prose::parse_preferences_line, py::arg("raw"));

    m.def(
        "scale_labels",
        [](const std::string& scale) {
            std::vector<std::pair<std::string, int>> out;
            for (const auto& opt : scale_by_name(scale).options()) {
                out.emplace_back(opt.label, opt.score);
            }
            return out;
        },
        py::arg("scale"));

    m.def("template_names", [] { return prose::TemplateSet::builtin().names(); });
    m.def(
        "render_template",
        [](const std::string& name, const std::map<std::string, std::string>& vars) {
            const auto& tmpl = prose::TemplateSet::builtin().get(name);
            prose::RenderedPrompt p = prose::render(tmpl, vars);
            return py::make_tuple(p.system, p.user);
        },
        py::arg("name"), py::arg("vars"), "Returns (system, user).");
    m.def(
        "task_selectors",
        [](const std::string& kind) {
            return prose::task_selectors(prose::task_kind_from_string(kind));
        },
        py::arg("task_kind"));

    m.def(
        "registry_topics",
        [](const std::string& kind) {
            return prose::PreferenceRegistry::builtin().topics(
                prose::task_kind_from_string(kind));
        },
        py::arg("task_kind"));
    m.def(
        "registry_components",
        [](const std::string& kind, const std::string& topic) {
            return prose::PreferenceRegistry::builtin().components(
                prose::task_kind_from_string(kind), topic);
        },
        py::arg("task_kind"), py::arg("topic_id"));
    m.def(
        "registry_joined",
        [](const std::string& kind, const std::string& topic) {
            return prose::PreferenceRegistry::builtin().joined(
                prose::task_kind_from_string(kind), topic);
        },
        py::arg("task_kind"), py::arg("topic_id"));

    m.def("component_kept", &prose::component_kept, py::arg("scores"), py::arg("threshold"),
          "Verification pruning rule: mean(scores) >= threshold.");

    m.def(
        "run_experiment",
        [](const std::string& config_path) {
            prose::RunConfig cfg = prose::RunConfig::load(config_path);
            prose::RunOutcome outcome = prose::run_experiment(cfg);
            py::dict out;
            out["episodes"] = outcome.episodes;
            out["failures"] = outcome.failures;
            out["output_dir"] = outcome.output_dir.string();
            out["summary_tsv"] = outcome.summary.to_tsv();
            return out;
        },
        py::arg("config_path"), "Execute a run config; returns a result dict.");

    m.def(
        "validate_corpus",
        [](const std::string& corpus_path, int episodes) {
            return prose::validate_corpus(corpus_path, prose::PreferenceRegistry::builtin(),
                                          episodes);
        },
        py::arg("corpus_path"), py::arg("episodes") = 5);
}
