import copy
import json

import pytest

from rdsir.cli import main
from rdsir.harness import (
    RunManifest,
    ScenarioError,
    builtin_scenario_path,
    ensemble_summary,
    load_scenario,
    run_scenario,
    scenario_from_dict,
)

MICRO = {
    "name": "micro",
    "grid": {"dimension": 1, "lengths": [1.0], "n": [9]},
    "params": {"Lambda": 1.0, "d": 0.1, "b": 0.05, "c": 0.2},
    "noise": {"seed": 1, "dt_noise": 0.01, "window": [-1.0, 2.0],
              "kappa": 1.0, "sigma": 0.1, "gamma0": 2.0, "gamma_max": 5.0},
    "init": {"kind": "flat", "S0": 0.5, "I0": 0.1, "R0": 0.0},
    "run": {"t0": 0.0, "t1": 0.5, "dt": 0.01, "record_every": 5},
    "analysis": {"checks": ["sum-cancellation"], "horizons": [0.5, 1.0], "m_t0": 0.0},
    "ensemble": {"seeds": 2},
}


def _micro(**changes):
    raw = copy.deepcopy(MICRO)
    for key, value in changes.items():
        block, _, leaf = key.partition(".")
        if leaf:
            raw[block][leaf] = value
        else:
            raw[block] = value
    return raw


def test_defaults_are_filled():
    scn = scenario_from_dict(_micro())
    assert scn["noise"]["a0"] == 1.0
    assert scn["analysis"]["tolerances"]["sum_cancel"] == 1e-8
    assert scn["expected_verdict"] == ""


def test_default_dt_rule():
    raw = _micro()
    del raw["run"]["dt"]
    scn = scenario_from_dict(raw)
    # min(10 h^2 / (4 a1), 0.1/(2 gamma_max + 1)) snapped to the noise grid
    expected = min(10 * 0.1**2 / 4.0, 0.1 / 11.0)
    assert scn["run"]["dt"] == pytest.approx(max(1, int(expected / 0.01)) * 0.01)


@pytest.mark.parametrize("changes,fragment", [
    ({"params.d": 0.0}, "params.d"),
    ({"noise.gamma_max": 1.0}, "gamma_max"),
    ({"run.t1": 5.0}, "noise.window"),
    ({"run.dt": 0.015}, "integer multiple"),
    ({"analysis.checks": ["bogus"]}, "bogus"),
    ({"ensemble.seeds": 0}, "seeds"),
    ({"init.kind": "spike"}, "init.kind"),
])
def test_validation_errors_name_the_key(changes, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        scenario_from_dict(_micro(**changes))


def test_unknown_keys_rejected():
    raw = _micro()
    raw["grid"]["spacing"] = 0.1
    with pytest.raises(ScenarioError, match="grid.spacing"):
        scenario_from_dict(raw)
    raw = _micro()
    raw["typo"] = 1
    with pytest.raises(ScenarioError, match="typo"):
        scenario_from_dict(raw)


def test_missing_required_key():
    raw = _micro()
    del raw["noise"]["seed"]
    with pytest.raises(ScenarioError, match="noise.seed"):
        scenario_from_dict(raw)


def test_hash_ignores_key_order():
    a = scenario_from_dict(_micro())
    raw = dict(reversed(list(_micro().items())))
    b = scenario_from_dict(raw)
    assert a.sha256() == b.sha256()


def test_load_scenario_with_overrides(tmp_path):
    f = tmp_path / "micro.json"
    f.write_text(json.dumps(_micro()))
    scn = load_scenario(str(f), overrides=["run.t1=1.0", "ensemble.seeds=1"])
    assert scn["run"]["t1"] == 1.0
    assert scn["ensemble"]["seeds"] == 1
    with pytest.raises(ScenarioError):
        load_scenario(str(f), overrides=["no-equals-sign"])


def test_load_scenario_parse_error(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    with pytest.raises(ScenarioError, match="line 1"):
        load_scenario(str(f))


def test_run_scenario_outputs(tmp_path):
    scn = scenario_from_dict(_micro())
    manifest = run_scenario(scn, str(tmp_path))
    assert manifest.checks_passed
    assert len(manifest.data["seeds"]) == 2
    assert manifest.data["seeds"][0]["seed"] == 1
    assert manifest.data["seeds"][1]["seed"] == 2
    traj = tmp_path / "micro-seed0-trajectory.csv"
    assert traj.exists()
    header = traj.read_text().splitlines()[0]
    assert scn.sha256() in header
    saved = json.loads((tmp_path / "micro-manifest.json").read_text())
    assert saved["scenario_sha256"] == scn.sha256()


def test_run_scenario_deterministic(tmp_path):
    scn = scenario_from_dict(_micro())
    run_scenario(scn, str(tmp_path / "a"))
    run_scenario(scn, str(tmp_path / "b"))
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_ensemble_summary(tmp_path):
    scn = scenario_from_dict(_micro())
    m = run_scenario(scn, str(tmp_path))
    summary = ensemble_summary([m])
    assert summary["n_seeds"] == 2
    assert summary["pass_rates"]["sum-cancellation"] == {"passed": 2, "total": 2}
    assert summary["all_passed"]
    other = RunManifest(data={**m.data, "scenario_sha256": "deadbeef"})
    with pytest.raises(ValueError):
        ensemble_summary([m, other])


def test_builtin_scenarios_all_load():
    for name in ("eradication-1d", "endemic-1d", "gap-1d", "absorbing-1d",
                 "nstar-1d", "meanvalue-1d", "attractor-1d"):
        scn = load_scenario(builtin_scenario_path(name))
        assert scn.name == name


def test_cli_run_and_report(tmp_path, capsys):
    f = tmp_path / "micro.json"
    f.write_text(json.dumps(_micro()))
    out = tmp_path / "out"
    assert main(["run", str(f), "--out", str(out), "--seeds", "1"]) == 0
    assert (out / "micro-manifest.json").exists()
    assert main(["report", str(out / "micro-manifest.json")]) == 0
    captured = capsys.readouterr().out
    assert "pass_rates" in captured


def test_cli_eig(tmp_path, capsys):
    f = tmp_path / "micro.json"
    f.write_text(json.dumps(_micro()))
    assert main(["eig", str(f)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["lambda1_h"] == pytest.approx(data["lambda1_h_analytic"], rel=1e-10)


def test_cli_rejects_bad_scenario(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(_micro(**{"params.d": 0.0})))
    assert main(["run", str(f)]) == 2
    assert "params.d" in capsys.readouterr().err
