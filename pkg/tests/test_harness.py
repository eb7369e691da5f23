import copy
import csv
import json
import math

import pytest
import yaml

from senstropy.harness import (
    CHECKS,
    ConfigError,
    aggregate,
    default_scenario_paths,
    emit_report,
    item,
    load_scenario,
    recheck,
    report_json,
    run_verification,
    scenario_from_dict,
)

BASE = {
    "name": "mini-golden",
    "sft": "k=2; A=[[1,1],[1,0]]",
    "measures": ["markov P=[[1/2,1/2],[1,0]]", "orbit 01"],
    "points": {"explicit": [":0", "0:01"],
               "sampled": {"per_measure": 2, "seed": 5, "horizon": 420}},
    "m_range": [2, 4],
    "N": 400,
    "L": 2,
    "checks": {
        "theorem-a": {"abs": 1e-9, "rel": 0.15, "min_pass_fraction": 1.0, "m_tol": 0.05,
                      "verdict_threshold": 0.01},
        "theorem-b": {"abs": 1e-9, "m": [1, 2], "exhaustive_limit": 8},
        "theorem-c": {"abs": 1e-12, "rel": 0.02, "m_e": 1, "m_d": 1, "N_range": [50, 100],
                      "witness_max_period": 3},
        "lemma-3.2": {"abs": 1e-9, "m": [1, 2], "L_direct": 5},
        "lemma-4.1": {"abs": 1e-9, "measures": 5, "seed": 1, "max_weight": 5,
                      "orbit_max_period": 4, "unions": ["0", "00,10", "01"]},
        "lemma-lem1": {"abs": 1e-9},
        "lemma-333": {"abs": 1e-9, "rel": 0.3},
        "corollary-4.5": {"abs": 1e-12, "rel": 0.02, "m_e": 1, "m_d": 1, "N_range": [50, 100],
                          "witness_max_period": 3},
    },
}


def scenario(**patch):
    data = copy.deepcopy(BASE)
    for key, value in patch.items():
        if key.startswith("check_"):
            data["checks"][key[6:].replace("_", "-")].update(value)
        else:
            data[key] = value
    return data


@pytest.fixture(scope="module")
def mini_report():
    return run_verification(scenario_from_dict(scenario()))


def test_mini_scenario_passes(mini_report):
    assert [c.check for c in mini_report.checks] == list(CHECKS)
    assert mini_report.status == "pass" and mini_report.exit_code == 0


def test_json_schema(mini_report):
    data = json.loads(report_json(mini_report))
    assert data["artifact"]["name"] == "senstropy"
    assert data["scenario"]["checks"]["theorem-a"]["rel"] == 0.15
    for c in data["checks"]:
        assert {"check", "lhs", "rhs", "tol", "status"} <= set(c)
        for it in c["items"]:
            assert {"label", "relation", "lhs", "rhs", "tol", "ok", "converged"} <= set(it)
    assert data["status"] == "pass"
    assert "wall" not in report_json(mini_report)


def test_recheck_reproduces_statuses(mini_report):
    data = json.loads(report_json(mini_report))
    assert recheck(data) == {c["check"]: c["status"] for c in data["checks"]}
    # tamper with evidence: the recomputed status follows
    c = next(c for c in data["checks"] if c["check"] == "theorem-c")
    c["items"][-1]["lhs"] = 1.0
    assert recheck(data)["theorem-c"] == "fail"


def test_deterministic_json_and_threads(monkeypatch):
    a = report_json(run_verification(scenario_from_dict(scenario())))
    monkeypatch.setenv("SENSTROPY_THREADS", "4")
    b = report_json(run_verification(scenario_from_dict(scenario())))
    assert a == b


def test_seed_override_changes_points():
    s1 = scenario_from_dict(scenario())
    s2 = scenario_from_dict(scenario(), seed=6)
    assert s2.sample_seed == 6 and s2.echo()["points"]["sampled"]["seed"] == 6
    assert [p.point for p in s1.points if p.source == 0] != \
        [p.point for p in s2.points if p.source == 0]


def test_failing_and_inconclusive_statuses():
    rep = run_verification(scenario_from_dict(scenario(check_theorem_c={"rel": 0.0})))
    statuses = {c.check: c.status for c in rep.checks}
    assert statuses["theorem-c"] == "fail" and rep.exit_code == 1
    assert statuses["lemma-4.1"] == "pass"  # other checks unaffected
    data = scenario(check_theorem_a={"m_tol": 0.0, "rel": 0.9})
    data["checks"] = {"theorem-a": data["checks"]["theorem-a"]}
    rep = run_verification(scenario_from_dict(data))
    assert rep.status == "inconclusive" and rep.exit_code == 3


def test_aggregate_rules():
    ok = item("a", "abs_le", 1.0, 1.0, 0.0)
    bad = item("b", "le", 2.0, 1.0, 0.5)
    assert aggregate([ok, bad], 1.0) == "fail"
    assert aggregate([ok, bad], 0.5) == "pass"
    assert aggregate([item("c", "ge", math.inf, math.inf, 0.0)], 1.0) == "pass"
    assert aggregate([item("d", "within", 1.0, [0.5, 0.9], 0.2)], 1.0) == "pass"
    assert aggregate([item("e", "abs_le", 1.0, 1.0, 0.0, converged=False)], 1.0) == "inconclusive"
    assert aggregate([item("f", "le", 9.0, 1.0, 0.0, informational=True)], 1.0) == "pass"


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"sft": "k=2; A=[[1,1]]"}, "sft"),
        ({"measures": ["markov P=[[1/2,1/2],[1/2,1/2]]"]}, r"measures\[0\]"),
        ({"points": {"explicit": [":1"], "sampled": {"per_measure": 0, "horizon": 1}}},
         "not in the subshift"),
        ({"points": {"explicit": [], "sampled": {"per_measure": 2, "horizon": 420}}}, "seed"),
        ({"points": {"explicit": [], "sampled": {"per_measure": 1, "seed": 1, "horizon": 10}}},
         "horizon"),
        ({"m_range": [4, 2]}, "increasing"),
        ({"check_theorem_a": {"bogus": 1}}, "unknown keys"),
        ({"checks": {"theorem-z": {}}}, "unknown checks"),
        ({"N": 1}, "N"),
    ],
)
def test_config_errors(patch, message):
    with pytest.raises(ConfigError, match=message):
        scenario_from_dict(scenario(**patch))


def test_missing_tolerance_is_config_error():
    data = scenario()
    del data["checks"]["lemma-333"]["rel"]
    with pytest.raises(ConfigError, match="rel"):
        scenario_from_dict(data)


def test_emit_formats(mini_report, tmp_path):
    files = emit_report(mini_report, "csv", tmp_path)
    profiles = [f for f in files if f.parent.name == "profiles"]
    assert profiles
    with profiles[0].open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "value"] and len(rows) > 10
    emit_report(mini_report, "text", tmp_path)
    assert "theorem-b" in (tmp_path / "report.txt").read_text()
    emit_report(mini_report, "json", tmp_path)
    assert json.loads((tmp_path / "timing.json").read_text())["mini-golden"]["total"] > 0
    with pytest.raises(OSError, match="cannot write"):
        emit_report(mini_report, "text", tmp_path / "report.txt" / "sub")


def test_bundled_scenarios_are_valid():
    paths = default_scenario_paths()
    assert {p.stem for p in paths} == {"full_shift", "golden_mean", "single_symbol",
                                       "two_fixed_points"}
    for p in paths:
        sc = load_scenario(p)
        assert set(sc.checks) == set(CHECKS)
        assert len(sc.checks["lemma-4.1"]["unions"]) == 10


def test_load_scenario_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: [unclosed")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_scenario(bad)
    good = tmp_path / "good.yaml"
    good.write_text(yaml.safe_dump(scenario()))
    assert load_scenario(good).name == "mini-golden"
