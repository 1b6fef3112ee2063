"""
Tests for the wildquery command line
"""

import io
import json

import pytest

from wildquery.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, STABILITY_COLUMNS, main

CITIES = "Cities such as Boston, Denver and Austin grew. Officials in Denver and other cities voted."


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def cities(tmp_path):
    path = tmp_path / "cities.txt"
    path.write_text(CITIES, encoding="utf-8")
    return path


# ============================================================================
# CORPUS
# ============================================================================

def test_corpus_build(tmp_path, cities):
    code, out = run("corpus", "build", str(cities), "--out", str(tmp_path / "c.jsonl"))
    assert code == EXIT_OK
    assert out == "1 document, 2 sentences\n"
    assert (tmp_path / "c.jsonl").exists()


def test_corpus_build_missing_path(tmp_path):
    code, _ = run("corpus", "build", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "c.jsonl"))
    assert code == EXIT_USAGE


def test_corpus_synth_is_seeded(tmp_path):
    code, out = run("corpus", "synth", str(tmp_path / "a"), "--seed", "3")
    assert code == EXIT_OK
    docs_dir, truth_path, summary = out.strip().split("\n")
    assert truth_path.endswith("us_states.truth")
    assert summary.endswith("sentences")
    run("corpus", "synth", str(tmp_path / "b"), "--seed", "3")
    first = sorted((tmp_path / "a" / "docs").iterdir())
    second = sorted((tmp_path / "b" / "docs").iterdir())
    assert [p.read_text(encoding="utf-8") for p in first] == [p.read_text(encoding="utf-8") for p in second]


# ============================================================================
# RULES
# ============================================================================

def test_rules_check_builtins():
    code, out = run("rules", "check")
    lines = out.strip().split("\n")
    assert code == EXIT_OK
    assert lines[-1].endswith(" rules") and int(lines[-1].split()[0]) == len(lines) - 1 > 0
    assert all(line.split("\t")[1].endswith("heads") for line in lines[:-1])


def test_rules_check_reports_bad_file(tmp_path):
    path = tmp_path / "bad.rules"
    path.write_text("(.+) such as %\n->\n$3 and other $1\n", encoding="utf-8")
    code, out = run("rules", "check", str(path))
    assert code == EXIT_VALIDATION
    assert out.startswith("error\t")
    assert out.endswith("0 rules\n")


def test_rules_check_empty_file(tmp_path):
    path = tmp_path / "empty.rules"
    path.write_text("# nothing yet\n", encoding="utf-8")
    assert run("rules", "check", str(path)) == (EXIT_OK, "0 rules\n")


# ============================================================================
# QUERY
# ============================================================================

def test_query_npages_with_cutoff(cities):
    code, out = run("query", "--corpus", str(cities), "--rank", "npages", "--cutoff", "2",
                    "--format", "tsv", "--workers", "1", "cities such as %")
    assert code == EXIT_OK
    patterns, tuples = out.split("\n\n")
    assert patterns.split("\n")[0] == "pattern\tweight\tsource"
    assert patterns.split("\n")[1].startswith("cities such as %\t4.000000\t")
    assert tuples.strip().split("\n") == ["rank\tscore\tslot1", "1\t2.000000\tDenver"]


def test_query_json(cities):
    code, out = run("query", "--corpus", str(cities), "--format", "json", "cities such as %")
    document = json.loads(out)
    assert code == EXIT_OK
    assert document["query"] == "cities such as %"
    assert document["rank"] == "pt-hits"
    assert {t["key"][0] for t in document["tuples"]} == {"boston", "denver", "austin"}
    assert all(t["evidence"] for t in document["tuples"])


def test_query_table_is_default(cities):
    code, out = run("query", "--corpus", str(cities), "cities such as %")
    assert code == EXIT_OK
    assert out.startswith("Patterns (")
    assert "Tuples (3)" in out


def test_query_without_slots(cities):
    assert run("query", "--corpus", str(cities), "US states")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ("query", "cities such as %"),
    ("query", "--rank", "pagerank", "--corpus", "x.txt", "cities such as %"),
    ("query", "--rank", "all", "--corpus", "x.txt", "cities such as %"),
    ("query", "--cap", "0", "--corpus", "x.txt", "cities such as %"),
])
def test_query_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_query_bad_query_syntax(cities):
    assert run("query", "--corpus", str(cities), "*cities such as %")[0] == EXIT_USAGE


def test_query_output_is_deterministic(states_dir):
    docs_dir, _ = states_dir
    argv = ("query", "--corpus", str(docs_dir), "--format", "json", "US states such as %")
    assert run(*argv) == run(*argv)


# ============================================================================
# STABILITY AND EVAL
# ============================================================================

def test_stability_small_run():
    code, out = run("stability", "--m", "6", "--n", "30", "--k", "1", "--samples", "20")
    lines = out.strip().split("\n")
    assert code == EXIT_OK
    assert lines[0].split("\t") == list(STABILITY_COLUMNS)
    assert len(lines) == 1 + 2 * 2
    assert lines[0].split("\t")[:8] == ["family", "m", "n", "k", "metric", "observed_max", "bound", "pass"]
    assert all(line.endswith("\tyes\tnpatterns") or line.endswith("\tyes\tnpages") for line in lines[1:])


def test_stability_pt_hits_has_no_bound():
    code, out = run("stability", "--family", "two-community", "--m", "5", "--n", "20",
                    "--k", "1", "--samples", "5", "--scorers", "pt-hits")
    assert code == EXIT_OK
    assert all(line.endswith("\t-\tn/a\tpt-hits") for line in out.strip().split("\n")[1:])


def test_stability_unknown_scorer():
    assert run("stability", "--n", "30", "--scorers", "pagerank")[0] == EXIT_USAGE


def test_eval_missing_truth(tmp_path, cities):
    code, _ = run("eval", "--corpus", str(cities), "--truth", str(tmp_path / "missing.truth"), "cities such as %")
    assert code == EXIT_USAGE


def test_eval_all_rankers(states_dir):
    docs_dir, truth = states_dir
    code, out = run("eval", "--corpus", str(docs_dir), "--truth", str(truth), "--rank", "all",
                    "--subsets", "2", "US states such as %")
    assert code == EXIT_OK
    ranked, subsets = out.split("\n\n")
    rows = ranked.strip().split("\n")
    assert rows[0] == "ranker\trank\trecall\tprecision\ttuple"
    assert {row.split("\t")[0] for row in rows[1:]} == {"pt-hits", "npages", "npatterns", "mi"}
    assert subsets.split("\n")[0] == "subset_size\trank\tmean_precision"
