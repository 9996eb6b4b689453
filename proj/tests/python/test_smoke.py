import json
import os
import pathlib

import pytest

import _prose


ROOT = pathlib.Path(os.environ["PROSE_ROOT"])


def test_edit_distance():
    assert _prose.levenshtein("kitten", "sitting") == 3
    assert _prose.levenshtein("", "abc") == 3
    assert _prose.levenshtein("café", "cafe") == 1
    assert _prose.levenshtein_tokens("a b c", "a x c") == 1
    assert _prose.ln_levenshtein("", "") == 0.0
    assert _prose.ln_levenshtein("ab", "cd") == 1.0


def test_pref_length_counts_scalars():
    assert _prose.pref_length("café") == 4
    assert len(_prose.utf8_scalars("café")) == 4


def test_pearson_and_percentile():
    assert _prose.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert _prose.pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    with pytest.raises(_prose.ProseError):
        _prose.pearson([1, 1, 1], [1, 2, 3])
    assert _prose.percentile_score(0.5, 0.5, 2.0) == 0.0
    assert _prose.percentile_score(2.0, 0.5, 2.0) == 100.0
    assert _prose.percentile_score(2.75, 0.5, 2.0) == pytest.approx(150.0)


def test_parsers():
    text, used_fallback = _prose.parse_triple_quoted('pre """body""" post')
    assert text == "body"
    assert not used_fallback
    label, score = _prose.parse_verdict("Verdict: clearly exhibits", "ppcm")
    assert label == "clearly exhibits"
    assert score == 2
    label, score = _prose.parse_verdict(
        "Verdict: strongly confirms the preference", "verification"
    )
    assert score == 2
    assert _prose.parse_preferences_line('Preferences: ["a", "b"]') == ["a", "b"]
    with pytest.raises(_prose.ProseError):
        _prose.parse_verdict("no verdict here", "ppcm")


def test_registry():
    topics = _prose.registry_topics("summarize")
    assert "news_articles" in topics
    comps = _prose.registry_components("summarize", "news_articles")
    assert len(comps) == 4
    assert 'use ampersands (&) instead of "and"s' in comps
    joined = _prose.registry_joined("summarize", "news_articles")
    assert joined == ", ".join(comps)


def test_component_kept():
    assert _prose.component_kept([2, -2], 0.0)
    assert not _prose.component_kept([2, -2], 0.25)


def test_templates_render():
    names = _prose.template_names()
    assert len(names) == 10
    variables = dict(_prose.task_selectors("summarize"))
    variables["task_content"] = "A short document."
    system, user = _prose.render_template("npc", variables)
    assert "A short document." in user


def test_scripted_run(tmp_path):
    config = {
        "agent": "prose",
        "mode": "scripted",
        "script_path": str(ROOT / "tests" / "fixtures" / "full_track_script.json"),
        "corpus_path": str(ROOT / "data" / "sample_corpus"),
        "topics": [{"task_kind": "summarize", "topic_id": "news_articles"}],
        "seeds": [7],
        "episodes_per_seed": 5,
        "output_dir": str(tmp_path / "out"),
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    outcome = _prose.run_experiment(str(config_path))
    assert outcome["episodes"] == 5
    assert outcome["failures"] == 0
    assert (tmp_path / "out" / "summary.tsv").exists()


def test_validate_corpus():
    problems = _prose.validate_corpus(str(ROOT / "data" / "sample_corpus"), 5)
    assert problems == []
