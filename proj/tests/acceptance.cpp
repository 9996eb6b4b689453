// Acceptance gate: each numbered criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "prose/baselines.hpp"
#include "prose/parsers.hpp"
#include "prose/runner.hpp"
#include "prose/sha256.hpp"

#include "helpers.hpp"

using namespace prose;
using prose::testing::TempDir;
using prose::testing::read_file;
using prose::testing::source_dir;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

RunConfig scripted_config(const std::filesystem::path& out) {
    RunConfig cfg;
    cfg.agent = "prose";
    cfg.mode = CacheMode::scripted;
    cfg.script_path = source_dir() / "tests" / "fixtures" / "full_track_script.json";
    cfg.corpus_path = source_dir() / "data" / "sample_corpus";
    cfg.topics = {{TaskKind::summarize, "news_articles"}};
    cfg.seeds = {7};
    cfg.episodes_per_seed = 5;
    cfg.output_dir = out;
    return cfg;
}

ScriptedBackend fixture_backend() {
    return ScriptedBackend::from_file(source_dir() / "tests" / "fixtures" /
                                      "full_track_script.json");
}

TaskInstance fixture_task() {
    TaskInstance t;
    t.kind = TaskKind::summarize;
    t.topic_id = "news_articles";
    t.user_id = "news_articles";
    t.content = "The harbor ferry schedule was extended through the winter months.";
    return t;
}

Demonstration fixture_demo() {
    Demonstration d;
    d.task = fixture_task();
    d.text = "U0 ferries & fares, a tide like a storybook.";
    return d;
}

// --- criterion 1: scripted determinism --------------------------------------

void criterion_determinism() {
    auto t0 = std::chrono::steady_clock::now();
    TempDir dir("prose_accept1");
    RunConfig a = scripted_config(dir.path / "a");
    RunConfig b = scripted_config(dir.path / "b");
    RunOutcome ra = run_experiment(a);
    RunOutcome rb = run_experiment(b);
    require(ra.episodes == 5 && ra.failures == 0, "run did not complete 5 clean episodes");
    for (int i = 0; i < 5; ++i) {
        std::string name = "summarize_news_articles_seed7_ep" + std::to_string(i) + ".jsonl";
        require(read_file(a.output_dir / "logs" / name) ==
                    read_file(b.output_dir / "logs" / name),
                "episode log " + name + " differs between identical runs");
    }
    require(read_file(a.output_dir / "summary.tsv") == read_file(b.output_dir / "summary.tsv"),
            "summary differs between identical runs");
    require(read_file(a.output_dir / "summary.tsv") ==
                read_file(source_dir() / "tests" / "fixtures" / "golden" / "summary.tsv"),
            "summary differs from the checked-in golden file");
    require(read_file(a.output_dir / "logs" / "summarize_news_articles_seed7_ep0.jsonl") ==
                read_file(source_dir() / "tests" / "fixtures" / "golden" / "episode0.jsonl"),
            "episode 0 log differs from the checked-in golden file");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 5.0, "scripted track took " + std::to_string(secs) + "s (limit 5s)");
}

// --- criterion 2: call accounting -------------------------------------------

void criterion_call_accounting() {
    // CE: exactly 1 refine, 0 verification.
    {
        auto backend = fixture_backend();
        EpisodeLog log;
        BackendSession session(backend, log, "agent-model", 0, 0);
        InteractionMemory memory;
        ProseConfig cfg;
        cfg.ablation = Ablation::CE;
        ProseEngine engine(TemplateSet::builtin(), cfg);
        AgentGeneration gen;
        gen.text = "A0 something different";
        engine.run_prose_learning(memory, fixture_task(), fixture_demo(), gen, {}, {}, session);
        require(log.count_role("inference_update") == 1, "CE refine calls != 1");
        require(log.count_role("verification") == 0, "CE verification calls != 0");
    }
    // Full: <= S refine calls, exactly |components| * |demos| verifications.
    {
        auto backend = fixture_backend();
        EpisodeLog log;
        BackendSession session(backend, log, "agent-model", 0, 0);
        InteractionMemory memory;
        ProseConfig cfg;  // S = 5
        ProseEngine engine(TemplateSet::builtin(), cfg);
        auto completion = engine.complete_task(memory, fixture_task(), session);
        auto result = engine.run_prose_learning(memory, fixture_task(), fixture_demo(),
                                                completion.generation, completion.description,
                                                completion.retrieved, session);
        long refines = log.count_role("inference_update");
        require(refines >= 1 && refines <= cfg.max_refinement_steps,
                "Full refine calls outside [1, S]");
        long demos = static_cast<long>(completion.retrieved.size()) + 1;
        long expected = static_cast<long>(result.verification.size()) * demos;
        require(log.count_role("verification") == expected,
                "Full verification calls != |components| * |demos|");
        require(result.trace.stop_reason == StopReason::description_unchanged,
                "expected the unchanged-description stop");
    }
    // CIPHER: exactly 1 refine per learning step, nothing else.
    {
        auto backend = fixture_backend();
        EpisodeLog log;
        BackendSession session(backend, log, "agent-model", 0, 0);
        CipherAgent agent(TemplateSet::builtin(), 1);
        agent.complete(fixture_task(), session);
        agent.learn(fixture_task(), fixture_demo(), session);
        require(log.count_role("inference_update") == 1, "CIPHER refine calls != 1");
        require(log.count_role("verification") == 0, "CIPHER issued verification calls");
        require(log.count_role("breakdown") == 0, "CIPHER issued breakdown calls");
    }
    // Exact-match stop (after trailing-whitespace trim), zero refines.
    {
        ScriptedBackend backend;  // no calls expected
        EpisodeLog log;
        BackendSession session(backend, log, "agent-model", 0, 0);
        InteractionMemory memory;
        ProseEngine engine(TemplateSet::builtin(), {});
        AgentGeneration gen;
        gen.text = "identical words";
        Demonstration demo = fixture_demo();
        demo.text = "identical words \n";
        auto result =
            engine.run_prose_learning(memory, fixture_task(), demo, gen, {}, {}, session);
        require(result.trace.stop_reason == StopReason::exact_match,
                "expected the exact-match stop");
        require(log.count_role("inference_update") == 0, "exact match still refined");
    }
}

// --- criterion 3: pruning properties ----------------------------------------

void criterion_pruning() {
    std::mt19937 rng(311);
    std::uniform_int_distribution<int> score(-2, 2);
    std::uniform_int_distribution<int> len(1, 10);
    const std::vector<double> boundaries{-2, -1, 0, 0.25, 0.5, 0.75, 1, 2};
    for (int t = 0; t < 1000; ++t) {
        std::vector<int> scores(len(rng));
        for (auto& s : scores) s = score(rng);
        bool prev = true;
        for (double v : boundaries) {
            bool kept = component_kept(scores, v);
            require(kept == (mean_score(scores) >= v), "kept != (mean >= v) at a boundary");
            require(prev || !kept, "kept set is not monotone in v");
            prev = kept;
        }
    }
}

// --- criterion 4: metric oracles --------------------------------------------

long lev_oracle(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b, size_t i,
                size_t j, std::map<std::pair<size_t, size_t>, long>& memo) {
    if (i == a.size()) return static_cast<long>(b.size() - j);
    if (j == b.size()) return static_cast<long>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    long best = lev_oracle(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, lev_oracle(a, b, i + 1, j, memo) + 1);
    best = std::min(best, lev_oracle(a, b, i, j + 1, memo) + 1);
    memo[key] = best;
    return best;
}

void criterion_metric_oracles() {
    std::mt19937 rng(41);
    const std::string alphabet = "abc de";
    auto random_string = [&](int max_len) {
        std::uniform_int_distribution<int> len_dist(0, max_len);
        std::uniform_int_distribution<size_t> ch(0, alphabet.size() - 1);
        std::string s;
        int n = len_dist(rng);
        for (int i = 0; i < n; ++i) s += alphabet[ch(rng)];
        return s;
    };
    for (int i = 0; i < 10000; ++i) {
        std::string a = random_string(20), b = random_string(20);
        auto sa = utf8_scalars(a), sb = utf8_scalars(b);
        std::map<std::pair<size_t, size_t>, long> memo;
        require(levenshtein(a, b) == lev_oracle(sa, sb, 0, 0, memo),
                "levenshtein diverged from the DP oracle");
    }
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    std::uniform_int_distribution<int> n_dist(2, 25);
    for (int t = 0; t < 1000; ++t) {
        int n = n_dist(rng);
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = val(rng);
            ys[i] = val(rng);
        }
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            syy += ys[i] * ys[i];
            sxy += xs[i] * ys[i];
        }
        double den = std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy);
        if (den == 0.0) continue;
        double closed = (n * sxy - sx * sy) / den;
        require(std::abs(pearson(xs, ys) - closed) < 1e-9, "pearson off the closed form");
    }
    // Judge means across every label combination of both scales.
    for (const auto& first : LikertScale::ppcm().options()) {
        for (const auto& second : LikertScale::ppcm().options()) {
            ScriptedBackend judge;
            judge.add_contains({"exhibit the following preference"}, "Verdict: " + first.label,
                               1);
            judge.add_contains({"exhibit the following preference"}, "Verdict: " + second.label,
                               1);
            MetricValue m = ppcm("text", {"a", "b"}, judge, {});
            require(std::abs(m.value - (first.score + second.score) / 2.0) < 1e-12,
                    "ppcm mean mismatch");
        }
    }
    for (const auto& first : LikertScale::preference_similarity().options()) {
        for (const auto& second : LikertScale::preference_similarity().options()) {
            ScriptedBackend judge;
            judge.add_contains({"How similar"}, "Verdict: " + first.label, 1);
            judge.add_contains({"How similar"}, "Verdict: " + second.label, 1);
            MetricValue m = pref_similarity("desc", {"a", "b"}, judge, {});
            require(std::abs(m.value - (first.score + second.score) / 2.0) < 1e-12,
                    "pref_sim mean mismatch");
        }
    }
    require(percentile_score(0.5, 0.5, 2.0) == 0.0, "percentile npc endpoint");
    require(percentile_score(2.0, 0.5, 2.0) == 100.0, "percentile oracle endpoint");
}

// --- criterion 5: parser suite ----------------------------------------------

void criterion_parsers() {
    auto upper = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
    };
    for (const auto* scale : LikertScale::all()) {
        for (const auto& opt : scale->options()) {
            for (const std::string& form : {opt.label, upper(opt.label)}) {
                for (const std::string& suffix : {std::string(), std::string("."),
                                                  std::string("!"), std::string("...")}) {
                    for (const std::string& prefix :
                         {std::string("Verdict:"), std::string("VERDICT:"),
                          std::string("verdict: ")}) {
                        std::string raw = "reasoning\n" + prefix + " " + form + suffix;
                        require(parse_verdict(raw, *scale).score == opt.score,
                                "verdict variant rejected: " + raw);
                    }
                }
            }
        }
    }
    const std::vector<std::string> adversarial{
        "", "clearly exhibits", "The verdict is clearly exhibits", "Verdict clearly exhibits",
        "Verdict:", "Verdict: maybe", "Verdict: clearly", "Verdict: exhibits clearly",
        "Verdict: clearly exhibits extra", "Verdict: strongly confirms the preference",
        "Verdict: 2", "Verdict: +2", "Verdict: clearly_exhibits", "Verdict: clearlyexhibits",
        "Score: clearly exhibits", "verdicts: clearly exhibits", "Verdict; clearly exhibits",
        "no conclusion at all", "Verdict: neither exhibits", "Verdict: tres clair"};
    require(adversarial.size() == 20, "fixture count drifted");
    for (const auto& raw : adversarial) {
        try {
            parse_verdict(raw, LikertScale::ppcm());
            throw CheckFailure("adversarial fixture accepted: " + raw);
        } catch (const ParseError&) {
        }
    }
    require(parse_preferences_line("Preferences: [\"a\", \"b\"]") ==
                std::vector<std::string>{"a", "b"},
            "bracketed list");
    require(parse_preferences_line("Preferences: free text") ==
                std::vector<std::string>{"free text"},
            "free text");
    require(parse_preferences_line("```\nPreferences: [\"f\"]\n```") ==
                std::vector<std::string>{"f"},
            "fenced");
    require(parse_preferences_line("Preferences: [\"old\"]\nPreferences: [\"new\"]") ==
                std::vector<std::string>{"new"},
            "last wins");
}

// --- criterion 6: registry fidelity -----------------------------------------

void criterion_registry() {
    const auto& r = PreferenceRegistry::builtin();
    require(r.size() == 9, "registry must hold 9 preference sets");
    for (auto kind : {TaskKind::summarize, TaskKind::email}) {
        for (const auto& topic : r.topics(kind)) {
            require(r.components(kind, topic).size() == 4,
                    "preference set " + topic + " must have 4 components");
        }
    }
    std::string canon;
    for (auto kind : {TaskKind::email, TaskKind::summarize}) {
        auto topics = r.topics(kind);
        std::sort(topics.begin(), topics.end());
        for (const auto& topic : topics) {
            canon += to_string(kind) + "/" + topic + ":";
            const auto& comps = r.components(kind, topic);
            for (size_t i = 0; i < comps.size(); ++i) {
                if (i) canon += "|";
                canon += comps[i];
            }
            canon += "\n";
        }
    }
    require(sha256_hex(canon) ==
                "4096b66bbfd02bbe0861a4b1e4f70551c22c0dc804c2e753f951e96dd15c4e21",
            "registry text diverged from the pinned checksum");
}

// --- criterion 7: isolation invariant ---------------------------------------

void criterion_isolation() {
    TempDir dir("prose_accept7");
    RunConfig cfg = scripted_config(dir.path / "out");
    run_experiment(cfg);
    for (const auto& entry : std::filesystem::directory_iterator(cfg.output_dir / "logs")) {
        std::ifstream in(entry.path());
        EpisodeLog log;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto doc = nlohmann::json::parse(line);
            std::string type = doc.value("type", "");
            doc.erase("type");
            log.event(type, doc);
        }
        require(scan_user_isolation(log).empty(),
                "agent text leaked into a synthetic-user prompt in " +
                    entry.path().filename().string());
    }
}

// --- criterion 8: optional live smoke ---------------------------------------

void criterion_live_smoke() {
    Environment env;
    HttpBackendConfig http;  // endpoint/key from PROSE_API_BASE / PROSE_API_KEY
    env.agent_backend = std::make_shared<HttpBackend>(http);
    const char* model = std::getenv("PROSE_LIVE_MODEL");
    std::string model_id = model ? model : "gpt-4o-mini";
    env.models = {model_id, model_id, model_id};
    env.max_tokens = 512;
    Corpus corpus = Corpus::load(source_dir() / "data" / "sample_corpus");
    TaskInstance task = fixture_task();
    task.content = corpus.documents(TaskKind::summarize, "news_articles")[0];

    auto mean_ppcm = [&](Agent& agent) {
        double total = 0;
        EpisodeLog log;
        EpisodeResult r = run_episode(env, agent, task, 0, 0, log);
        require(!r.failed, "live episode failed: " + r.error);
        total = r.metrics.at("ppcm");
        return total;
    };
    NpcAgent npc(TemplateSet::builtin());
    OracleAgent oracle(TemplateSet::builtin(), PreferenceRegistry::builtin());
    ProseAgent full(TemplateSet::builtin(), {});
    double npc_score = mean_ppcm(npc);
    double oracle_score = mean_ppcm(oracle);
    // One learning pass before scoring the learned agent a second time.
    mean_ppcm(full);
    double prose_score = mean_ppcm(full);
    require(oracle_score > npc_score, "Oracle PPCM not above NPC PPCM");
    require(prose_score > npc_score, "PROSE PPCM not above NPC PPCM");
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* label;
        std::function<void()> run;
        bool optional;
    };
    const std::vector<Criterion> criteria{
        {1, "scripted determinism (byte-identical logs + summary, <5s)",
         criterion_determinism, false},
        {2, "algorithm call accounting (CE/Full/CIPHER, both stop rules)",
         criterion_call_accounting, false},
        {3, "pruning properties (1,000 random score sets, boundary thresholds)",
         criterion_pruning, false},
        {4, "metric oracles (levenshtein DP, pearson 1e-9, judge means, percentile)",
         criterion_metric_oracles, false},
        {5, "parser suite (15 labels x variants, 20 adversarial fixtures)",
         criterion_parsers, false},
        {6, "registry fidelity (9 sets x 4 components, pinned checksum)",
         criterion_registry, false},
        {7, "isolation invariant (no agent text in user prompts)",
         criterion_isolation, false},
        {8, "live smoke ordering (Oracle > NPC, PROSE > NPC)", criterion_live_smoke, true},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (c.optional && !std::getenv("PROSE_LIVE_SMOKE")) {
            std::cout << "SKIP criterion " << c.number << ": " << c.label
                      << " (set PROSE_LIVE_SMOKE=1 to enable)\n";
            continue;
        }
        try {
            c.run();
            std::cout << "PASS criterion " << c.number << ": " << c.label << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL criterion " << c.number << ": " << c.label << " -- " << e.what()
                      << "\n";
        }
    }
    return failures == 0 ? 0 : 1;
}
