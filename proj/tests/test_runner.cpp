#include <doctest.h>

#include <cmath>
#include <fstream>

#include "prose/runner.hpp"

#include "helpers.hpp"

using namespace prose;
using prose::testing::TempDir;
using prose::testing::read_file;
using prose::testing::source_dir;

namespace {

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

}  // namespace

TEST_CASE("config json roundtrip and validation messages") {
    TempDir dir("prose_cfg");
    RunConfig cfg = scripted_config(dir.path / "out");
    RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.agent == cfg.agent);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.topics == cfg.topics);
    CHECK(back.script_path == cfg.script_path);
    CHECK_NOTHROW(back.validate());

    SUBCASE("missing corpus path") {
        RunConfig bad = cfg;
        bad.corpus_path = dir.path / "nope";
        try {
            bad.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("corpus_path") != std::string::npos);
        }
    }
    SUBCASE("empty seeds") {
        RunConfig bad = cfg;
        bad.seeds.clear();
        try {
            bad.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("seeds") != std::string::npos);
        }
    }
    SUBCASE("unknown metric") {
        RunConfig bad = cfg;
        bad.metrics = {"ppcm", "made_up"};
        try {
            bad.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("made_up") != std::string::npos);
        }
    }
    SUBCASE("scripted mode requires a script") {
        RunConfig bad = cfg;
        bad.script_path.clear();
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
    SUBCASE("unknown agent") {
        RunConfig bad = cfg;
        bad.agent = "wizard";
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("statistics helpers") {
    CHECK(mean_of({1, 2, 3, 4}) == doctest::Approx(2.5));
    CHECK(sample_stddev({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.13809).epsilon(1e-4));
    CHECK(standard_error({1, 2, 3, 4}) ==
          doctest::Approx(sample_stddev({1, 2, 3, 4}) / 2.0));
    CHECK(standard_error({5.0}) == 0.0);
    // Pooling fixture: variances 1, 4, 9 over 3 models.
    CHECK(pooled_standard_error({1, 4, 9}) ==
          doctest::Approx(std::sqrt((1 + 4 + 9) / 3.0 / 3.0)));
    CHECK_THROWS_AS(mean_of({}), ValidationError);
}

TEST_CASE("summarize folds per-seed means then seeds") {
    // Two seeds: seed 0 episodes score 1 and 3 (mean 2); seed 1 scores 4
    // and 6 (mean 5). Row mean 3.5, SE = stddev({2,5})/sqrt(2).
    std::vector<nlohmann::json> records;
    for (auto [seed, value] : std::vector<std::pair<long, double>>{
             {0, 1.0}, {0, 3.0}, {1, 4.0}, {1, 6.0}}) {
        records.push_back({{"agent", "prose"},
                           {"task_kind", "summarize"},
                           {"topic_id", "t"},
                           {"seed", seed},
                           {"episode_index", 0},
                           {"failed", false},
                           {"metrics", {{"ppcm", value}}}});
    }
    SummaryTable table = summarize(records);
    const auto& cell = table.rows.at({"prose", "summarize"}).at("ppcm");
    CHECK(cell.mean == doctest::Approx(3.5));
    CHECK(cell.n_seeds == 2);
    double expect_se = sample_stddev({2.0, 5.0}) / std::sqrt(2.0);
    CHECK(cell.stderr_ == doctest::Approx(expect_se));
    // The tasks-mean row aggregates the same values here.
    CHECK(table.rows.at({"prose", "tasks_mean"}).at("ppcm").mean == doctest::Approx(3.5));
    // Failed episodes are excluded.
    records.push_back({{"agent", "prose"},
                       {"task_kind", "summarize"},
                       {"topic_id", "t"},
                       {"seed", 0},
                       {"episode_index", 1},
                       {"failed", true},
                       {"metrics", {{"ppcm", 1000.0}}}});
    CHECK(summarize(records).rows.at({"prose", "summarize"}).at("ppcm").mean ==
          doctest::Approx(3.5));
}

TEST_CASE("episode result json roundtrip") {
    EpisodeResult r;
    r.seed = 3;
    r.episode_index = 2;
    r.user_text = "u";
    r.agent_text = "a";
    r.inferred_description = "d";
    r.metrics = {{"ppcm", 1.5}};
    auto doc = episode_result_to_json(r, "prose", TaskKind::email, "paper_tweet");
    CHECK(doc.at("agent") == "prose");
    CHECK(doc.at("task_kind") == "email");
    EpisodeResult back = episode_result_from_json(doc);
    CHECK(back.seed == 3);
    CHECK(back.episode_index == 2);
    CHECK(back.metrics.at("ppcm") == 1.5);
    CHECK(back.inferred_description == "d");
}

TEST_CASE("scripted run writes the full artifact layout") {
    TempDir dir("prose_run");
    RunConfig cfg = scripted_config(dir.path / "out");
    RunOutcome outcome = run_experiment(cfg);
    CHECK(outcome.episodes == 5);
    CHECK(outcome.failures == 0);
    CHECK(std::filesystem::exists(cfg.output_dir / "config.json"));
    CHECK(std::filesystem::exists(cfg.output_dir / "results.jsonl"));
    CHECK(std::filesystem::exists(cfg.output_dir / "summary.tsv"));
    CHECK(std::filesystem::exists(cfg.output_dir / "summary.json"));
    for (int i = 0; i < 5; ++i) {
        CHECK(std::filesystem::exists(cfg.output_dir / "logs" /
                                      ("summarize_news_articles_seed7_ep" + std::to_string(i) +
                                       ".jsonl")));
    }

    // Every summary number is recomputable from results.jsonl alone.
    std::ifstream in(cfg.output_dir / "results.jsonl");
    std::vector<nlohmann::json> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) records.push_back(nlohmann::json::parse(line));
    }
    CHECK(records.size() == 5);
    SummaryTable refolded = summarize(records);
    CHECK(refolded.to_tsv() == outcome.summary.to_tsv());
    CHECK(refolded.to_tsv() == read_file(cfg.output_dir / "summary.tsv"));
}

TEST_CASE("report merges run directories") {
    TempDir dir("prose_report");
    RunConfig cfg = scripted_config(dir.path / "run1");
    run_experiment(cfg);
    write_report({dir.path / "run1"}, dir.path / "report");
    CHECK(std::filesystem::exists(dir.path / "report" / "learning_curve.tsv"));
    CHECK(std::filesystem::exists(dir.path / "report" / "per_topic.tsv"));
    std::string curve = read_file(dir.path / "report" / "learning_curve.tsv");
    CHECK(curve.find("prose\tppcm\t0\t") != std::string::npos);
    CHECK(curve.find("prose\tppcm\t4\t") != std::string::npos);
    CHECK_THROWS_AS(write_report({dir.path / "missing"}, dir.path / "r2"), StorageError);
}

TEST_CASE("sweep names cells and resumes completed ones") {
    TempDir dir("prose_sweep");
    RunConfig cfg = scripted_config(dir.path / "sweep");
    auto outcomes = run_sweep(cfg, {0.0, 0.5}, {2, 5});
    CHECK(outcomes.size() == 4);
    CHECK(std::filesystem::exists(dir.path / "sweep" / "v=0_S=2" / "summary.json"));
    CHECK(std::filesystem::exists(dir.path / "sweep" / "v=0.5_S=5" / "summary.json"));
    CHECK(std::filesystem::exists(dir.path / "sweep" / "sweep.tsv"));

    // Tamper with one cell's results; a rerun must not overwrite it.
    auto marker = dir.path / "sweep" / "v=0_S=2" / "marker.txt";
    std::ofstream(marker) << "kept";
    auto again = run_sweep(cfg, {0.0, 0.5}, {2, 5});
    CHECK(again.size() == 4);
    CHECK(read_file(marker) == "kept");
}

TEST_CASE("validate_corpus reports problems") {
    auto ok = validate_corpus(source_dir() / "data" / "sample_corpus",
                              PreferenceRegistry::builtin(), 5);
    CHECK(ok.empty());
    auto too_many = validate_corpus(source_dir() / "data" / "sample_corpus",
                                    PreferenceRegistry::builtin(), 6);
    CHECK(too_many.size() == 9);
    auto missing = validate_corpus(source_dir() / "no_such_dir",
                                   PreferenceRegistry::builtin(), 5);
    CHECK(missing.size() == 1);
}

TEST_CASE("replay cache miss fails hard instead of touching the network") {
    TempDir dir("prose_replay");
    RunConfig cfg = scripted_config(dir.path / "out");
    cfg.mode = CacheMode::replay;
    cfg.cache_dir = dir.path / "cache";
    cfg.script_path.clear();
    auto backend = make_backend(cfg);
    ChatRequest req = prose::testing::sample_request("never cached");
    CHECK_THROWS_AS(backend->complete(req), BackendError);
}
