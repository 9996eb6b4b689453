#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prose/runner.hpp"

namespace {

struct Overrides {
    std::string agent;
    std::string ablation;
    std::string mode;
    std::string output_dir;
    std::string corpus_path;
    std::string script_path;
    std::string cache_dir;
    std::vector<long> seeds;
    int steps = -1;
    double threshold = -99.0;

    void apply(prose::RunConfig& cfg) const {
        if (!agent.empty()) cfg.agent = agent;
        if (!ablation.empty()) cfg.ablation = ablation;
        if (!mode.empty()) cfg.mode = prose::cache_mode_from_string(mode);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
        if (!script_path.empty()) cfg.script_path = script_path;
        if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
        if (!seeds.empty()) cfg.seeds = seeds;
        if (steps >= 0) cfg.max_refinement_steps = steps;
        if (threshold > -3.0) cfg.verification_threshold = threshold;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--agent", ov.agent, "Agent kind (npc|oracle|icl|cipher[-k]|prose|prose_icl)");
    cmd->add_option("--ablation", ov.ablation, "Ablation (CE|u|u_a|u_a_S|NV|Full)");
    cmd->add_option("--mode", ov.mode, "Backend mode (live|record|replay|scripted)");
    cmd->add_option("--output-dir", ov.output_dir, "Output directory");
    cmd->add_option("--corpus", ov.corpus_path, "Corpus directory");
    cmd->add_option("--script", ov.script_path, "Scripted backend JSON file");
    cmd->add_option("--cache-dir", ov.cache_dir, "Record/replay cache directory");
    cmd->add_option("--seeds", ov.seeds, "Seed list");
    cmd->add_option("--steps", ov.steps, "Max refinement steps (S)");
    cmd->add_option("--threshold", ov.threshold, "Verification threshold (v)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preference learning from writing demonstrations"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* run = app.add_subcommand("run", "Execute the user tracks a config describes");
    run->add_option("config", config_path, "Run config JSON")->required();
    add_override_flags(run, ov);

    auto* sweep = app.add_subcommand("sweep", "Grid sweep over v and S");
    sweep->add_option("config", config_path, "Run config JSON")->required();
    std::vector<double> v_values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<int> s_values{2, 3, 4, 5};
    sweep->add_option("--v-values", v_values, "Verification thresholds");
    sweep->add_option("--s-values", s_values, "Refinement step caps");
    add_override_flags(sweep, ov);

    auto* correlate = app.add_subcommand("correlate", "Metric correlation study");
    correlate->add_option("config", config_path, "Run config JSON")->required();
    add_override_flags(correlate, ov);

    auto* report = app.add_subcommand("report", "Merge run directories into reports");
    std::vector<std::string> run_dirs;
    std::string report_out = "report";
    report->add_option("run_dirs", run_dirs, "Run directories")->required();
    report->add_option("--out", report_out, "Report output directory");

    auto* validate = app.add_subcommand("validate-corpus", "Check corpus coverage");
    std::string corpus_dir;
    std::string registry_path;
    int episodes = 5;
    validate->add_option("corpus", corpus_dir, "Corpus directory")->required();
    validate->add_option("--registry", registry_path, "Preference registry JSON");
    validate->add_option("--episodes", episodes, "Required documents per topic");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            prose::RunConfig cfg = prose::RunConfig::load(config_path);
            ov.apply(cfg);
            prose::RunOutcome outcome = prose::run_experiment(cfg);
            std::cout << "episodes=" << outcome.episodes << " failures=" << outcome.failures
                      << " output=" << outcome.output_dir.string() << "\n";
            return outcome.failures == 0 ? 0 : 1;
        }
        if (sweep->parsed()) {
            prose::RunConfig cfg = prose::RunConfig::load(config_path);
            ov.apply(cfg);
            auto outcomes = prose::run_sweep(cfg, v_values, s_values);
            long failures = 0;
            for (const auto& o : outcomes) failures += o.failures;
            std::cout << "cells=" << outcomes.size() << " failures=" << failures << "\n";
            return failures == 0 ? 0 : 1;
        }
        if (correlate->parsed()) {
            prose::RunConfig cfg = prose::RunConfig::load(config_path);
            ov.apply(cfg);
            auto result = prose::run_correlate(cfg);
            std::cout << "samples=" << result.samples.size() << " pairs=" << result.rho.size()
                      << "\n";
            return 0;
        }
        if (report->parsed()) {
            std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
            prose::write_report(dirs, report_out);
            std::cout << "report written to " << report_out << "\n";
            return 0;
        }
        if (validate->parsed()) {
            const prose::PreferenceRegistry registry =
                registry_path.empty() ? prose::PreferenceRegistry::builtin()
                                      : prose::PreferenceRegistry::load(registry_path);
            auto problems = prose::validate_corpus(corpus_dir, registry, episodes);
            for (const auto& p : problems) std::cerr << p << "\n";
            if (problems.empty()) std::cout << "corpus ok\n";
            return problems.empty() ? 0 : 1;
        }
    } catch (const prose::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
