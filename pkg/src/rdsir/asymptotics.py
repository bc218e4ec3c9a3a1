"""Asymptotic diagnostics: the disease-free pullback solution, pullback
attractor samples, eradication/persistence thresholds, the integral
inequality envelope for the infected norm, the persistence functional, and
projected box-counting dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .dynamics import ModelParams, StateField, Trajectory, simulate, solve_linear_N
from .randomness import DiffusionField, NoisePath, TransmissionProcess
from .spatial import Grid, SpectralData


# ---------------------------------------------------------------------------
# disease-free pullback solution


def disease_free_solution(grid: Grid, t: float, path: NoisePath, dt: float,
                          params: ModelParams, fld: DiffusionField,
                          spectral: SpectralData, tol: float = 1e-10,
                          t_trunc0: float = None, max_doublings: int = 12):
    """Truncated pullback integral for the disease-free total population.

    Realized as a linear run from zero data on [t - T, t]; T is doubled until
    two successive results differ by less than tol in the discrete L2 norm.
    Returns (field, T_used, last_diff).
    """
    beta = spectral.lambda0 + params.d
    lam_norm = grid.norm(grid.constant_field(params.Lambda))
    if t_trunc0 is None:
        scale = max(lam_norm / beta, tol)
        t_trunc0 = max(dt, math.log(scale / tol) / beta)
    # align to the step grid
    T = math.ceil(t_trunc0 / dt) * dt
    zero = grid.constant_field(0.0)
    prev = solve_linear_N(grid, t - T, t, zero, path, dt, params, fld,
                          record_every=10**9).final
    for _ in range(max_doublings):
        T *= 2.0
        if path.t_lo > t - T:
            raise ValueError("noise window too short for the requested truncation")
        cur = solve_linear_N(grid, t - T, t, zero, path, dt, params, fld,
                             record_every=10**9).final
        diff = grid.norm(cur - prev)
        if diff < tol:
            return cur, T, diff
        prev = cur
    raise RuntimeError("truncation doubling did not converge")


def stationary_population(grid: Grid, path: NoisePath, params: ModelParams,
                          fld: DiffusionField, t: float = 0.0) -> np.ndarray:
    """Direct sparse solve of (d - A) N = Lambda for time-constant coefficients;
    the oracle for the disease-free solution when a does not depend on time."""
    from .spatial import _Assembler

    A = _Assembler(grid, fld).assemble_at_index(path.absolute_index(t), t).matrix
    M = (params.d * sp.identity(grid.size) - A).tocsc()
    return spsolve(M, grid.constant_field(params.Lambda))


def disease_free_invariance_residual(grid: Grid, t0: float, t1: float, path: NoisePath,
                                     dt: float, params: ModelParams, fld: DiffusionField,
                                     spectral: SpectralData, tol: float = 1e-10) -> float:
    """Relative defect of the invariance N(t1; t0, N*(t0)) = N*(t1)."""
    n_star0, _, _ = disease_free_solution(grid, t0, path, dt, params, fld, spectral, tol)
    n_star1, _, _ = disease_free_solution(grid, t1, path, dt, params, fld, spectral, tol)
    evolved = solve_linear_N(grid, t0, t1, n_star0, path, dt, params, fld,
                             record_every=10**9).final
    denom = grid.norm(n_star1)
    if denom == 0.0:
        return grid.norm(evolved - n_star1)
    return grid.norm(evolved - n_star1) / denom


# ---------------------------------------------------------------------------
# pullback attractor sampling


def state_distance(grid: Grid, p: StateField, q: StateField) -> float:
    """Phase-space distance: sum of componentwise discrete L2 norms."""
    return (grid.norm(p.S - q.S) + grid.norm(p.I - q.I) + grid.norm(p.R - q.R))


def _cloud_diameter(grid: Grid, cloud) -> float:
    dmax = 0.0
    for i in range(len(cloud)):
        for j in range(i + 1, len(cloud)):
            dmax = max(dmax, state_distance(grid, cloud[i], cloud[j]))
    return dmax


def _semi_distance(grid: Grid, cloud_a, cloud_b) -> float:
    """Hausdorff semi-distance dist(A, B) = sup_a inf_b d(a, b)."""
    out = 0.0
    for p in cloud_a:
        out = max(out, min(state_distance(grid, p, q) for q in cloud_b))
    return out


def project_cloud(grid: Grid, cloud, spectral: SpectralData) -> np.ndarray:
    """Project states onto (|S|, |I|, |R|, (I,v1), (S,v1)) for box counting."""
    rows = []
    for p in cloud:
        rows.append((grid.norm(p.S), grid.norm(p.I), grid.norm(p.R),
                     grid.inner(p.I, spectral.v1), grid.inner(p.S, spectral.v1)))
    return np.array(rows)


@dataclass
class AttractorSample:
    """Pullback point clouds phi(T, theta_{-T} omega) applied to the seed set."""

    omega_seed: int
    T_list: tuple
    clouds: list
    diameters: np.ndarray
    semi_distances: np.ndarray  # between consecutive clouds, len == len(T_list) - 1
    projected: list


def pullback_attractor_sample(grid: Grid, path: NoisePath, seeds, T_list,
                              dt: float, params: ModelParams, fld: DiffusionField,
                              gamma: TransmissionProcess, spectral: SpectralData,
                              solver: str = "direct") -> AttractorSample:
    """Evolve every seed state from time -T to 0 under the same noise path,
    for each T in the increasing schedule; the clouds at time 0 sample the
    pullback limit set."""
    T_list = tuple(float(T) for T in T_list)
    clouds = []
    for T in T_list:
        cloud = []
        for u0 in seeds:
            traj = simulate(grid, -T, 0.0, u0, path, dt, params, fld, gamma,
                            spectral=spectral, record_every=10**9, solver=solver)
            cloud.append(traj.final)
        clouds.append(cloud)
    diameters = np.array([_cloud_diameter(grid, c) for c in clouds])
    semi = np.array([_semi_distance(grid, clouds[k + 1], clouds[k])
                     for k in range(len(clouds) - 1)])
    projected = [project_cloud(grid, c, spectral) for c in clouds]
    return AttractorSample(omega_seed=path.seed, T_list=T_list, clouds=clouds,
                           diameters=diameters, semi_distances=semi, projected=projected)


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class ThresholdReport:
    """Eradication/persistence bounds and the verdict for a given time-mean
    transmission estimate."""

    m_estimate: float
    lambda1: float
    lambda0: float
    a0: float
    a1: float
    alpha: float
    eradication_bound: float
    persistence_bound: float
    R0: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "m_estimate": self.m_estimate,
            "lambda1": self.lambda1,
            "lambda0": self.lambda0,
            "a0": self.a0,
            "a1": self.a1,
            "alpha": self.alpha,
            "eradication_bound": self.eradication_bound,
            "persistence_bound": self.persistence_bound,
            "R0": self.R0,
            "verdict": self.verdict,
        }


def threshold_report(params: ModelParams, spectral: SpectralData,
                     a0: float, a1: float, m_estimate: float) -> ThresholdReport:
    """Classify the time-mean transmission value against the two bounds.

    Eradication is predicted for m < a0*lambda1 + d + b + c, persistence for
    m > a1*lambda1 + d + b + c, and the regime in between is reported as the
    theoretically open gap.  R0 uses the unit-coefficient convention
    m / (lambda1 + d + b + c).
    """
    lam1 = spectral.lambda1
    alpha = params.alpha
    lower = a0 * lam1 + alpha
    upper = a1 * lam1 + alpha
    if m_estimate < lower:
        verdict = "eradication-predicted"
    elif m_estimate > upper:
        verdict = "persistence-predicted"
    else:
        verdict = "gap"
    return ThresholdReport(
        m_estimate=m_estimate, lambda1=lam1, lambda0=a0 * lam1, a0=a0, a1=a1,
        alpha=alpha, eradication_bound=lower, persistence_bound=upper,
        R0=m_estimate / (lam1 + alpha), verdict=verdict,
    )


# ---------------------------------------------------------------------------
# envelope and persistence diagnostics


@dataclass
class GronwallReport:
    """Margins of the exponential envelope for the infected-compartment norm."""

    times: np.ndarray
    envelope: np.ndarray
    margins: np.ndarray
    min_margin: float
    min_margin_rel: float  # relative to the initial infected norm

    @property
    def holds(self) -> bool:
        return self.min_margin_rel >= -1e-6


def gronwall_envelope_check(traj: Trajectory, spectral: SpectralData,
                            params: ModelParams) -> GronwallReport:
    """Check |I(t)| <= exp(-(lambda0 + d + b + c)(t - t0) + int gamma) |I(t0)|
    at every recorded time, with the transmission integral by trapezoid."""
    t = traj.times
    rate = spectral.lambda0 + params.alpha
    gam_int = np.concatenate(([0.0], np.cumsum(0.5 * (traj.gamma[1:] + traj.gamma[:-1]) * np.diff(t))))
    env = np.exp(-rate * (t - t[0]) + gam_int) * traj.norm_I[0]
    margins = env - traj.norm_I
    i0 = traj.norm_I[0]
    min_m = float(np.min(margins))
    return GronwallReport(times=t, envelope=env, margins=margins, min_margin=min_m,
                          min_margin_rel=min_m / i0 if i0 > 0 else 0.0)


@dataclass
class PersistenceReport:
    """w(t) series plus the tail statistic of the integrated infected field."""

    times: np.ndarray
    w: np.ndarray
    tail_statistic: float
    delta: float
    persistent: bool


def persistence_functional(traj: Trajectory, delta: float) -> PersistenceReport:
    """Tail statistic: min of int_O I dx over the final half of the run; the
    verdict is 'persistent' when it exceeds the detection floor delta."""
    t = traj.times
    half = t[0] + 0.5 * (t[-1] - t[0])
    tail = float(np.min(traj.int_I[t >= half]))
    return PersistenceReport(times=t, w=traj.w, tail_statistic=tail, delta=delta,
                             persistent=tail > delta)


@dataclass
class WGrowthReport:
    """Result of the eigenfunction-weighted growth inequality check."""

    epsilon: float
    n_checked: int
    min_rel_margin: float
    holds: bool


def w_growth_check(traj: Trajectory, spectral: SpectralData, params: ModelParams,
                   a1: float, m_estimate: float, rel_slack: float = 1e-3) -> WGrowthReport:
    """Whenever the monitored ratio (I+R)/N stays below the admissible epsilon,
    verify w(t) >= exp(-(alpha + lambda1 a1)(t - tau) + (1 - eps) int gamma) w(tau)
    anchored at the start of each below-threshold stretch."""
    lam1 = spectral.lambda1
    alpha = params.alpha
    eps = 0.5 * (m_estimate - lam1 * a1 - alpha) / m_estimate
    if eps <= 0:
        return WGrowthReport(epsilon=eps, n_checked=0, min_rel_margin=float("inf"), holds=True)
    t = traj.times
    below = traj.ratio_IR_over_N <= eps
    gam_int = np.concatenate(([0.0], np.cumsum(0.5 * (traj.gamma[1:] + traj.gamma[:-1]) * np.diff(t))))
    min_rel = float("inf")
    n_checked = 0
    k = 0
    while k < len(t):
        if not below[k] or traj.w[k] <= 0:
            k += 1
            continue
        tau_idx = k
        j = k + 1
        while j < len(t) and below[j]:
            expo = (-(alpha + lam1 * a1) * (t[j] - t[tau_idx])
                    + (1.0 - eps) * (gam_int[j] - gam_int[tau_idx]))
            bound = traj.w[tau_idx] * math.exp(expo)
            min_rel = min(min_rel, (traj.w[j] - bound) / bound)
            n_checked += 1
            j += 1
        k = j
    return WGrowthReport(epsilon=eps, n_checked=n_checked, min_rel_margin=min_rel,
                         holds=(n_checked == 0) or (min_rel >= -rel_slack))


# ---------------------------------------------------------------------------
# box-counting dimension


@dataclass
class BoxCountReport:
    """Least-squares slope of log N_eps against log(1/eps)."""

    eps: np.ndarray
    counts: np.ndarray
    dimension: float
    fit_residual: float


def box_counting_dimension(points: np.ndarray, eps_schedule) -> BoxCountReport:
    """Occupied-box counts of a point cloud over the epsilon schedule, with the
    dimension estimated as the fitted slope of log N_eps vs log(1/eps)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise ValueError("point cloud is empty")
    eps = np.asarray(sorted(eps_schedule, reverse=True), dtype=float)
    if len(eps) < 3:
        raise ValueError("need at least 3 epsilon levels")
    counts = []
    for e in eps:
        boxes = np.floor(points / e)
        counts.append(len(np.unique(boxes, axis=0)))
    counts = np.array(counts)
    x = np.log(1.0 / eps)
    y = np.log(counts.astype(float))
    coeffs = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coeffs, x) - y) ** 2)))
    return BoxCountReport(eps=eps, counts=counts, dimension=float(coeffs[0]),
                          fit_residual=resid)
