"""Scenario configuration, the run orchestrator, and result export.

Scenarios are strict JSON documents: unknown keys are rejected, defaults are
filled in, and every output file embeds the sha256 of the filled scenario so
a manifest fully determines reproduction.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .asymptotics import (
    box_counting_dimension,
    disease_free_solution,
    gronwall_envelope_check,
    persistence_functional,
    project_cloud,
    pullback_attractor_sample,
    stationary_population,
    threshold_report,
    w_growth_check,
)
from .dynamics import ModelParams, StateField, simulate, solve_linear_N
from .randomness import make_diffusion_field, mean_value_m, ou_transmission, sample_wiener_path
from .spatial import build_grid, first_eigenpair


class ScenarioError(ValueError):
    """Configuration parse/validation failure, naming the offending key."""


def _json_default(obj):
    """Convert numpy scalars/arrays so manifests serialize cleanly."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


_CHECK_TOKENS = (
    "eradication-check",
    "persistence-check",
    "sum-cancellation",
    "absorbing-check",
    "nstar",
    "attractor",
    "dimension",
    "meanvalue-check",
    "gap-report",
)

_DEFAULT_TOLERANCES = {
    "I_decay": 1e-6,          # |I(t1)| <= tol * |I0|
    "gronwall": 1e-6,         # envelope margin >= -tol * |I0|
    "R_decay": 1e-4,          # |R(t1)| <= tol * |R0 + I0|
    "S_match": 1e-4,          # |S(t1) - N*(t1)| <= tol * |N*|
    "entry_time": 0.1,        # relative deviation of the absorbing entry time
    "envelope_slack": 1e-6,   # absolute slack of the decay envelope
    "sum_cancel": 1e-8,       # relative S+I+R vs linear N defect
    "w_growth": 1e-3,         # relative slack of the w growth inequality
    "dimension": 0.1,         # box dimension ceiling for collapsed clouds
    "cloud_collapse": 1e-6,   # final/initial cloud diameter ratio
    "m_rel": 0.05,            # |m - gamma0| <= tol * gamma0
    "clamp_fraction": 0.01,   # transmission clamp activation ceiling
}

# (default, required) per key; None default means "must be provided".
_SCHEMA = {
    "name": None,
    "expected_verdict": "",
    "grid": {"dimension": None, "lengths": None, "n": None},
    "params": {"Lambda": None, "d": None, "b": None, "c": None},
    "noise": {
        "seed": None,
        "dt_noise": None,
        "window": None,
        "kappa": 1.0,
        "sigma": 0.0,
        "gamma0": None,
        "gamma_max": None,
        "phi0": 0.0,
        "a0": 1.0,
        "a1": 1.0,
        "profile": "uniform",
        "kappa_a": 1.0,
        "sigma_a": 1.0,
        "phi0_a": 0.0,
    },
    "init": {"kind": "flat", "S0": 1.0, "I0": 0.0, "R0": 0.0},
    "run": {"t0": 0.0, "t1": 10.0, "dt": None, "record_every": 1, "snapshot_times": []},
    "analysis": {
        "checks": [],
        "horizons": [],
        "m_t0": None,
        "T_list": [],
        "cloud_seeds": 6,
        "eps_schedule": [2**-3, 2**-4, 2**-5, 2**-6, 2**-7],
        "nstar_tol": 1e-10,
        "delta": None,
        "tolerances": dict(_DEFAULT_TOLERANCES),
    },
    "ensemble": {"seeds": 1},
}


def _merge_block(raw: dict, schema: dict, prefix: str) -> dict:
    out = {}
    for key in raw:
        if key not in schema:
            raise ScenarioError(f"unknown configuration key {prefix}{key}")
    for key, default in schema.items():
        if isinstance(default, dict) and key != "tolerances":
            sub = raw.get(key, {})
            if not isinstance(sub, dict):
                raise ScenarioError(f"{prefix}{key} must be an object")
            out[key] = _merge_block(sub, default, f"{prefix}{key}.")
        elif key in raw:
            if key == "tolerances":
                tols = dict(default)
                for tk, tv in raw[key].items():
                    if tk not in tols:
                        raise ScenarioError(f"unknown tolerance key {prefix}tolerances.{tk}")
                    tols[tk] = tv
                out[key] = tols
            else:
                out[key] = copy.deepcopy(raw[key])
        else:
            if default is None and key not in ("dt", "m_t0", "delta"):
                raise ScenarioError(f"missing required key {prefix}{key}")
            out[key] = copy.deepcopy(default)
    return out


def _default_dt(filled: dict) -> float:
    """min(10 h^2 / (4 a1), 0.1 / (2 gamma_max + 1)), snapped down to an
    integer multiple of the noise sampling step."""
    grid = filled["grid"]
    hmin = min(L / (n + 1) for L, n in zip(grid["lengths"], grid["n"]))
    noise = filled["noise"]
    dt = min(10.0 * hmin**2 / (4.0 * noise["a1"]), 0.1 / (2.0 * noise["gamma_max"] + 1.0))
    dtn = noise["dt_noise"]
    return max(1, int(dt / dtn)) * dtn


def _validate(filled: dict) -> None:
    p = filled["params"]
    if p["d"] <= 0:
        raise ScenarioError("params.d must be positive")
    if min(p["Lambda"], p["b"], p["c"]) < 0:
        raise ScenarioError("params.Lambda, params.b, params.c must be non-negative")
    noise = filled["noise"]
    lo, hi = noise["window"]
    if not (lo < 0 < hi):
        raise ScenarioError("noise.window must straddle 0")
    if noise["dt_noise"] <= 0:
        raise ScenarioError("noise.dt_noise must be positive")
    if noise["gamma_max"] < noise["gamma0"]:
        raise ScenarioError("noise.gamma_max must be >= noise.gamma0")
    if not (0 < noise["a0"] <= noise["a1"]):
        raise ScenarioError("need 0 < noise.a0 <= noise.a1")
    run = filled["run"]
    if run["t1"] <= run["t0"]:
        raise ScenarioError("run.t1 must exceed run.t0")
    if not (lo <= run["t0"] and run["t1"] <= hi):
        raise ScenarioError("run.t0/run.t1 must lie inside noise.window")
    stride = run["dt"] / noise["dt_noise"]
    if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
        raise ScenarioError("run.dt must be a positive integer multiple of noise.dt_noise")
    if run["record_every"] < 1:
        raise ScenarioError("run.record_every must be >= 1")
    ana = filled["analysis"]
    for token in ana["checks"]:
        if token not in _CHECK_TOKENS:
            raise ScenarioError(f"unknown analysis check {token!r}")
    for tk, tv in ana["tolerances"].items():
        if tv <= 0:
            raise ScenarioError(f"analysis.tolerances.{tk} must be positive")
    if filled["ensemble"]["seeds"] < 1:
        raise ScenarioError("ensemble.seeds must be >= 1")
    init = filled["init"]
    if init["kind"] not in ("flat", "eigen"):
        raise ScenarioError("init.kind must be 'flat' or 'eigen'")
    if min(init["S0"], init["I0"], init["R0"]) < 0:
        raise ScenarioError("init amplitudes must be non-negative")


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with defaults filled in."""

    data: dict

    @property
    def name(self) -> str:
        return self.data["name"]

    def __getitem__(self, key):
        return self.data[key]

    def canonical_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def scenario_from_dict(raw: dict) -> Scenario:
    filled = _merge_block(raw, _SCHEMA, "")
    if filled["run"]["dt"] is None:
        filled["run"]["dt"] = _default_dt(filled)
    if filled["analysis"]["m_t0"] is None:
        filled["analysis"]["m_t0"] = filled["run"]["t0"]
    if not filled["analysis"]["horizons"]:
        span = filled["run"]["t1"] - filled["run"]["t0"]
        filled["analysis"]["horizons"] = [span / 16, span / 8, span / 4, span / 2]
    _validate(filled)
    return Scenario(data=filled)


def load_scenario(path: str, overrides=()) -> Scenario:
    """Load and validate a scenario file; optional dotted-key overrides
    (e.g. 'run.t1=20') are applied before validation."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    for ov in overrides:
        key, _, value = ov.partition("=")
        if not _:
            raise ScenarioError(f"override {ov!r} must look like key=value")
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = json.loads(value)
    return scenario_from_dict(raw)


def builtin_scenario_path(name: str) -> str:
    return os.path.join(os.path.dirname(__file__), "scenarios", f"{name}.json")


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class RunManifest:
    """Aggregated results of one scenario run (all seeds)."""

    data: dict
    path: str = ""

    @property
    def checks_passed(self) -> bool:
        return self.data["checks_passed"]

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.data, fh, sort_keys=True, indent=1, default=_json_default)
        self.path = path


def _initial_state(scn: Scenario, grid, spectral) -> StateField:
    init = scn["init"]
    if init["kind"] == "flat":
        mk = grid.constant_field
    else:
        def mk(amp):
            return amp * spectral.v1
    return StateField(S=np.asarray(mk(init["S0"]), dtype=float),
                      I=np.asarray(mk(init["I0"]), dtype=float),
                      R=np.asarray(mk(init["R0"]), dtype=float), t=scn["run"]["t0"])


def _cloud_seed_states(scn: Scenario, grid, radius: float, seed: int):
    """Deterministic spread of initial states inside the absorbing ball:
    the three pure corners plus random mixtures."""
    n_extra = max(0, scn["analysis"]["cloud_seeds"] - 3)
    unit = grid.constant_field(1.0)
    unit /= grid.norm(unit)
    t0 = -max(scn["analysis"]["T_list"] or [0.0])
    zero = grid.constant_field(0.0)
    states = [
        StateField(S=0.9 * radius * unit, I=zero.copy(), R=zero.copy(), t=t0),
        StateField(S=zero.copy(), I=0.9 * radius * unit, R=zero.copy(), t=t0),
        StateField(S=zero.copy(), I=zero.copy(), R=0.9 * radius * unit, t=t0),
    ]
    rng = np.random.default_rng(seed ^ 0x5EED)
    for _ in range(n_extra):
        wts = rng.dirichlet(np.ones(3))
        scale = rng.uniform(0.3, 0.9) * radius
        states.append(StateField(S=scale * wts[0] * unit, I=scale * wts[1] * unit,
                                 R=scale * wts[2] * unit, t=t0))
    return states


def _csv_header(scn: Scenario, seed: int):
    return (f"scenario_sha256={scn.sha256()} name={scn.name} seed={seed} version={__version__}",)


def run_scenario(scn: Scenario, out_dir: str, seeds: int = None) -> RunManifest:
    """Execute every requested analysis for each ensemble seed and write the
    per-seed CSV outputs plus the aggregate manifest JSON."""
    os.makedirs(out_dir, exist_ok=True)
    grid = build_grid(scn["grid"]["dimension"], scn["grid"]["lengths"], scn["grid"]["n"])
    noise = scn["noise"]
    params = ModelParams(**scn["params"])
    spectral = first_eigenpair(grid, a0=noise["a0"])
    run = scn["run"]
    ana = scn["analysis"]
    tol = ana["tolerances"]
    checks_requested = list(ana["checks"])

    lam_norm = grid.norm(grid.constant_field(params.Lambda))
    beta = spectral.lambda0 + params.d
    pop_scale = lam_norm / beta
    radius = 1.0 + pop_scale  # absorbing-ball bound on |S+I+R|
    delta = ana["delta"] if ana["delta"] is not None else 1e-4 * pop_scale

    n_seeds = seeds if seeds is not None else scn["ensemble"]["seeds"]
    seed_entries = []
    all_passed = True

    for idx in range(n_seeds):
        seed = noise["seed"] + idx
        path = sample_wiener_path(seed, noise["window"][0], noise["window"][1], noise["dt_noise"])
        gamma = ou_transmission(path, noise["gamma0"], noise["kappa"], noise["sigma"],
                                noise["gamma_max"], phi0=noise["phi0"])
        fld = make_diffusion_field(path, noise["a0"], noise["a1"], profile=noise["profile"],
                                   lengths=grid.lengths, kappa=noise["kappa_a"],
                                   sigma=noise["sigma_a"], phi0=noise["phi0_a"])
        m_report = mean_value_m(gamma, path, ana["m_t0"], ana["horizons"])
        thr = threshold_report(params, spectral, noise["a0"], noise["a1"], m_report.m)

        checks = {}
        outputs = []
        errors = []
        traj = None
        try:
            needs_traj = any(c in checks_requested for c in
                             ("eradication-check", "persistence-check", "sum-cancellation", "gap-report"))
            if needs_traj:
                u0 = _initial_state(scn, grid, spectral)
                traj = simulate(grid, run["t0"], run["t1"], u0, path, run["dt"], params,
                                fld, gamma, spectral=spectral, record_every=run["record_every"])
                fname = os.path.join(out_dir, f"{scn.name}-seed{idx}-trajectory.csv")
                traj.to_csv(fname, header_lines=_csv_header(scn, seed))
                outputs.append(fname)
                _write_snapshots(scn, traj, out_dir, idx, seed, outputs)

            if "sum-cancellation" in checks_requested:
                checks["sum-cancellation"] = _check_sum_cancellation(
                    grid, scn, traj, u0, path, params, fld, tol)
            if "eradication-check" in checks_requested:
                checks["eradication-check"] = _check_eradication(
                    grid, scn, traj, u0, path, params, fld, spectral, thr, tol, ana)
            if "persistence-check" in checks_requested:
                checks["persistence-check"] = _check_persistence(
                    traj, spectral, params, noise["a1"], thr, m_report.m, delta, tol)
            if "gap-report" in checks_requested:
                checks["gap-report"] = {
                    "passed": thr.verdict == "gap",
                    "verdict": thr.verdict,
                    "final_int_I": float(traj.int_I[-1]),
                    "final_norm_I_over_initial": float(traj.norm_I[-1] / traj.norm_I[0])
                    if traj.norm_I[0] > 0 else 0.0,
                }
            if "absorbing-check" in checks_requested:
                checks["absorbing-check"] = _check_absorbing(
                    grid, scn, path, params, fld, spectral, pop_scale, radius, tol,
                    out_dir, idx, seed, outputs)
            if "nstar" in checks_requested:
                checks["nstar"] = _check_nstar(grid, scn, path, params, fld, spectral, ana)
            if "attractor" in checks_requested or "dimension" in checks_requested:
                _run_attractor(grid, scn, path, params, fld, gamma, spectral, radius,
                               seed, tol, checks, checks_requested, out_dir, idx, outputs)
            if "meanvalue-check" in checks_requested:
                checks["meanvalue-check"] = {
                    "passed": (m_report.clamp_fraction < tol["clamp_fraction"]
                               and abs(m_report.m - noise["gamma0"]) <= tol["m_rel"] * noise["gamma0"]),
                    "m": m_report.m,
                    "gamma0": noise["gamma0"],
                    "clamp_fraction": m_report.clamp_fraction,
                }
        except Exception as exc:  # record and continue with remaining seeds
            errors.append(f"{type(exc).__name__}: {exc}")

        seed_passed = not errors and all(c["passed"] for c in checks.values())
        all_passed = all_passed and seed_passed
        seed_entries.append({
            "seed": seed,
            "m_estimate": m_report.m,
            "m_sups": list(m_report.sups),
            "clamp_fraction": m_report.clamp_fraction,
            "threshold": thr.to_dict(),
            "checks": checks,
            "errors": errors,
            "outputs": [os.path.basename(p) for p in outputs],
            "passed": seed_passed,
        })

    manifest = RunManifest(data={
        "scenario": scn.data,
        "scenario_sha256": scn.sha256(),
        "version": __version__,
        "spectral": {
            "lambda1_h": spectral.lambda1,
            "lambda0_h": spectral.lambda0,
            "lambda1_continuum": float(sum((np.pi / L) ** 2 for L in grid.lengths)),
        },
        "population_scale": pop_scale,
        "delta": delta,
        "seeds": seed_entries,
        "checks_passed": all_passed,
    })
    manifest.save(os.path.join(out_dir, f"{scn.name}-manifest.json"))
    return manifest


def _write_snapshots(scn, traj, out_dir, idx, seed, outputs):
    for ts in scn["run"]["snapshot_times"]:
        k = int(np.argmin(np.abs(traj.times - ts)))
        st = traj.states[k]
        fname = os.path.join(out_dir, f"{scn.name}-seed{idx}-snapshot-{ts}.csv")
        with open(fname, "w") as fh:
            for line in _csv_header(scn, seed):
                fh.write(f"# {line}\n")
            fh.write(f"# t={st.t:.17g}\nS,I,R\n")
            for s, i, r in zip(st.S, st.I, st.R):
                fh.write(f"{s:.17g},{i:.17g},{r:.17g}\n")
        outputs.append(fname)


def _check_sum_cancellation(grid, scn, traj, u0, path, params, fld, tol):
    run = scn["run"]
    lin = solve_linear_N(grid, run["t0"], run["t1"], u0.N, path, run["dt"], params, fld,
                         record_every=run["record_every"])
    worst = 0.0
    for st, nf in zip(traj.states, lin.fields):
        denom = grid.norm(nf)
        if denom > 0:
            worst = max(worst, grid.norm(st.N - nf) / denom)
    return {"passed": worst <= tol["sum_cancel"], "max_rel_defect": worst}


def _check_eradication(grid, scn, traj, u0, path, params, fld, spectral, thr, tol, ana):
    run = scn["run"]
    gron = gronwall_envelope_check(traj, spectral, params)
    n_star, T_used, _ = disease_free_solution(grid, run["t1"], path, run["dt"], params,
                                              fld, spectral, tol=ana["nstar_tol"])
    n_star_norm = grid.norm(n_star)
    final = traj.final
    i_ratio = traj.norm_I[-1] / traj.norm_I[0] if traj.norm_I[0] > 0 else 0.0
    r_scale = grid.norm(u0.R + u0.I)
    r_ratio = traj.norm_R[-1] / r_scale if r_scale > 0 else 0.0
    s_err = grid.norm(final.S - n_star) / n_star_norm if n_star_norm > 0 else 0.0
    result = {
        "verdict_ok": thr.verdict == "eradication-predicted",
        "I_decay_ratio": float(i_ratio),
        "gronwall_min_margin_rel": gron.min_margin_rel,
        "R_decay_ratio": float(r_ratio),
        "S_vs_nstar_rel": float(s_err),
        "nstar_T_trunc": T_used,
        "max_clamp_mass": float(np.max(traj.clamp_mass)),
    }
    result["passed"] = (result["verdict_ok"]
                        and i_ratio <= tol["I_decay"]
                        and gron.min_margin_rel >= -tol["gronwall"]
                        and r_ratio <= tol["R_decay"]
                        and s_err <= tol["S_match"])
    return result


def _check_persistence(traj, spectral, params, a1, thr, m_est, delta, tol):
    pers = persistence_functional(traj, delta)
    wg = w_growth_check(traj, spectral, params, a1, m_est, rel_slack=tol["w_growth"])
    return {
        "passed": (thr.verdict == "persistence-predicted" and pers.persistent and wg.holds),
        "verdict_ok": thr.verdict == "persistence-predicted",
        "tail_statistic": pers.tail_statistic,
        "delta": delta,
        "w_growth_epsilon": wg.epsilon,
        "w_growth_checked": wg.n_checked,
        "w_growth_min_rel_margin": wg.min_rel_margin,
    }


def _check_absorbing(grid, scn, path, params, fld, spectral, pop_scale, radius, tol,
                     out_dir, idx, seed, outputs):
    run = scn["run"]
    beta = spectral.lambda0 + params.d
    n0_norm = 100.0 * pop_scale
    N0 = n0_norm * spectral.v1
    lin = solve_linear_N(grid, run["t0"], run["t1"], N0, path, run["dt"], params, fld,
                         record_every=run["record_every"])
    t_rel = lin.times - run["t0"]
    envelope = np.exp(-beta * t_rel) * n0_norm + pop_scale
    slack = float(np.min(envelope - lin.norms))
    inside = lin.norms <= radius
    t_pred = math.log(n0_norm) / beta
    entry = float(t_rel[np.argmax(inside)]) if np.any(inside) else float("inf")
    fname = os.path.join(out_dir, f"{scn.name}-seed{idx}-linearN.csv")
    with open(fname, "w") as fh:
        for line in _csv_header(scn, seed):
            fh.write(f"# {line}\n")
        fh.write("t,norm_N,envelope\n")
        for t, n, e in zip(lin.times, lin.norms, envelope):
            fh.write(f"{t:.17g},{n:.17g},{e:.17g}\n")
    outputs.append(fname)
    return {
        "passed": (slack >= -tol["envelope_slack"]
                   and math.isfinite(entry)
                   and abs(entry - t_pred) <= tol["entry_time"] * t_pred),
        "envelope_min_slack": slack,
        "entry_time": entry,
        "entry_time_predicted": t_pred,
    }


def _check_nstar(grid, scn, path, params, fld, spectral, ana):
    run = scn["run"]
    tol = ana["nstar_tol"]
    n0, T0, _ = disease_free_solution(grid, run["t0"], path, run["dt"], params, fld, spectral, tol=tol)
    n1, T1, _ = disease_free_solution(grid, run["t1"], path, run["dt"], params, fld, spectral, tol=tol)
    evolved = solve_linear_N(grid, run["t0"], run["t1"], n0, path, run["dt"], params, fld,
                             record_every=10**9).final
    abs_res = grid.norm(evolved - n1)
    rel_res = abs_res / grid.norm(n1) if grid.norm(n1) > 0 else abs_res
    result = {
        "invariance_residual_abs": abs_res,
        "invariance_residual_rel": rel_res,
        "T_trunc": (T0, T1),
        "passed": abs_res <= 2.0 * tol,
    }
    if fld.time_constant:
        n_stat = stationary_population(grid, path, params, fld, t=run["t1"])
        stat_err = grid.norm(n1 - n_stat) / grid.norm(n_stat)
        result["stationary_rel_error"] = stat_err
        result["passed"] = result["passed"] and stat_err <= 1e-8
    return result


def _run_attractor(grid, scn, path, params, fld, gamma, spectral, radius, seed, tol,
                   checks, checks_requested, out_dir, idx, outputs):
    ana = scn["analysis"]
    T_list = ana["T_list"] or [0.0, 10.0, 50.0]
    states = _cloud_seed_states(scn, grid, radius, seed)
    sample = pullback_attractor_sample(grid, path, states, T_list, scn["run"]["dt"],
                                       params, fld, gamma, spectral)
    fname = os.path.join(out_dir, f"{scn.name}-seed{idx}-cloud.csv")
    with open(fname, "w") as fh:
        for line in _csv_header(scn, seed):
            fh.write(f"# {line}\n")
        fh.write("T,norm_S,norm_I,norm_R,w,S_v1\n")
        for T, proj in zip(sample.T_list, sample.projected):
            for row in proj:
                fh.write(f"{T:.17g}," + ",".join(f"{x:.17g}" for x in row) + "\n")
    outputs.append(fname)
    final_cloud = sample.clouds[-1]
    max_norm_N = max(grid.norm(p.N) for p in final_cloud)
    if "attractor" in checks_requested:
        entry = {
            "diameters": [float(d) for d in sample.diameters],
            "semi_distances": [float(d) for d in sample.semi_distances],
            "final_cloud_max_norm_N": float(max_norm_N),
            "confinement_ok": max_norm_N <= radius * (1.0 + 1e-6),
        }
        collapse_ok = True
        if scn["expected_verdict"] == "eradication-predicted" and sample.diameters[0] > 0:
            ratio = sample.diameters[-1] / sample.diameters[0]
            entry["collapse_ratio"] = float(ratio)
            collapse_ok = ratio <= tol["cloud_collapse"]
        entry["passed"] = entry["confinement_ok"] and collapse_ok
        checks["attractor"] = entry
    if "dimension" in checks_requested:
        report = box_counting_dimension(sample.projected[-1], ana["eps_schedule"])
        checks["dimension"] = {
            "passed": report.dimension <= tol["dimension"],
            "dimension": report.dimension,
            "fit_residual": report.fit_residual,
            "counts": [int(c) for c in report.counts],
        }


def ensemble_summary(manifests) -> dict:
    """Aggregate per-check pass rates and spread statistics across seeds of
    the same scenario."""
    if not manifests:
        raise ValueError("need at least one manifest")
    datas = [m.data if isinstance(m, RunManifest) else m for m in manifests]
    hashes = {d["scenario_sha256"] for d in datas}
    if len(hashes) != 1:
        raise ValueError("manifests come from different scenarios")
    seeds = [s for d in datas for s in d["seeds"]]
    check_names = sorted({name for s in seeds for name in s["checks"]})
    pass_rates = {}
    for name in check_names:
        flags = [s["checks"][name]["passed"] for s in seeds if name in s["checks"]]
        pass_rates[name] = {"passed": sum(flags), "total": len(flags)}
    ms = np.array([s["m_estimate"] for s in seeds])
    summary = {
        "scenario": datas[0]["scenario"]["name"],
        "scenario_sha256": hashes.pop(),
        "n_seeds": len(seeds),
        "pass_rates": pass_rates,
        "m_estimate": {"min": float(ms.min()), "median": float(np.median(ms)),
                       "max": float(ms.max())},
        "all_passed": all(d["checks_passed"] for d in datas),
    }
    tails = [s["checks"]["persistence-check"]["tail_statistic"]
             for s in seeds if "persistence-check" in s["checks"]]
    if tails:
        tails = np.array(tails)
        summary["tail_int_I"] = {"min": float(tails.min()), "median": float(np.median(tails)),
                                 "max": float(tails.max())}
    return summary
