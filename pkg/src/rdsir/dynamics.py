"""Time integration of the S/I/R system and of the decoupled linear
total-population equation.

Scheme: first-order IMEX Euler.  Diffusion and the linear decay of each
component are implicit at t+dt (operator assembled at t+dt); the incidence
coupling and recruitment are explicit at t.  The I solve is performed first
and the b/c transfer sources in the S and R updates use the freshly solved
I, so the componentwise sum S+I+R satisfies exactly the same discrete update
as the linear N equation -- the transfer and incidence terms cancel
identically, up to linear-solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, cg

from .randomness import DiffusionField, NoisePath, TransmissionProcess
from .spatial import Grid, SpectralData, _Assembler, first_eigenpair

N_FLOOR = 1e-30  # below this, SI/N is defined as 0 (continuous extension)
SOLVER_TOL = 1e-10


class SimulationBlowupError(RuntimeError):
    """Raised when a step grows a component norm by more than 10x."""


class LinearSolveError(RuntimeError):
    """Raised when a per-step linear solve misses the residual tolerance."""


@dataclass(frozen=True)
class ModelParams:
    """Epidemic coefficients: recruitment, death, reinfection, recovery."""

    Lambda: float
    d: float
    b: float
    c: float

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("d must be positive")
        if self.b < 0 or self.c < 0 or self.Lambda < 0:
            raise ValueError("Lambda, b, c must be non-negative")

    @property
    def alpha(self) -> float:
        """Total removal rate of the infected compartment, d + b + c."""
        return self.d + self.b + self.c


@dataclass(frozen=True)
class StateField:
    """Non-negative gridded (S, I, R) at time t."""

    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    t: float

    def require_nonnegative(self):
        for name, u in (("S", self.S), ("I", self.I), ("R", self.R)):
            if np.min(u) < 0:
                raise ValueError(f"{name} has negative entries")

    @property
    def N(self) -> np.ndarray:
        return self.S + self.I + self.R


def incidence(S: np.ndarray, I: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Standard incidence SI/N with the bounded extension f = 0 where N = 0."""
    S = np.asarray(S, dtype=float)
    I = np.asarray(I, dtype=float)
    R = np.asarray(R, dtype=float)
    if min(S.min(), I.min(), R.min()) < 0:
        raise ValueError("incidence requires non-negative fields")
    N = S + I + R
    out = np.zeros_like(N)
    mask = N > N_FLOOR
    out[mask] = S[mask] * I[mask] / N[mask]
    return out


@dataclass
class Trajectory:
    """Recorded scalars (every record step) plus the recorded fields."""

    grid: Grid
    times: np.ndarray
    norm_S: np.ndarray
    norm_I: np.ndarray
    norm_R: np.ndarray
    norm_N: np.ndarray
    int_I: np.ndarray
    w: np.ndarray
    ratio_IR_over_N: np.ndarray
    gamma: np.ndarray
    clamp_mass: np.ndarray
    states: list = dc_field(default_factory=list)

    @property
    def final(self) -> StateField:
        return self.states[-1]

    def to_csv(self, path, header_lines=()):
        cols = np.column_stack([
            self.times, self.norm_S, self.norm_I, self.norm_R, self.norm_N,
            self.int_I, self.w, self.ratio_IR_over_N, self.gamma,
        ])
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t,norm_S,norm_I,norm_R,norm_N,int_I,w,ratio_IR_over_N,gamma\n")
            for row in cols:
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


class _LinearSolver:
    """SPD solve of M u = rhs to residual tolerance 1e-10 (relative).

    method "direct": cached sparse LU; "cg": conjugate gradient.  Direct
    solves are checked against the same residual tolerance once per matrix.
    """

    def __init__(self, M: sp.csc_matrix, method: str = "direct"):
        self.M = M
        self.method = method
        self._checked = False
        if method == "direct":
            self.lu = splu(M)
        elif method != "cg":
            raise ValueError(f"unknown solver method {method!r}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.method == "direct":
            x = self.lu.solve(rhs)
            if not self._checked:
                nr = np.linalg.norm(rhs)
                if nr > 0 and np.linalg.norm(self.M @ x - rhs) > SOLVER_TOL * nr:
                    raise LinearSolveError("direct solve missed residual tolerance")
                self._checked = True
            return x
        x, info = cg(self.M, rhs, rtol=SOLVER_TOL, atol=0.0)
        if info != 0:
            raise LinearSolveError(f"CG did not converge (info={info})")
        return x


class ImexStepper:
    """Per-step machinery shared by the nonlinear and linear integrators.

    Caches the assembled operator and its factorizations; when the diffusion
    coefficient is constant in time a single factorization is reused.
    """

    def __init__(self, grid: Grid, params: ModelParams, fld: DiffusionField,
                 path: NoisePath, dt: float, solver: str = "direct"):
        if dt <= 0:
            raise ValueError("dt must be positive")
        stride = dt / path.dt
        self.stride = int(round(stride))
        if abs(stride - self.stride) > 1e-9 or self.stride < 1:
            raise ValueError("dt must be a positive integer multiple of the noise sampling step")
        self.grid = grid
        self.params = params
        self.field = fld
        self.path = path
        self.dt = dt
        self.solver = solver
        self.assembler = _Assembler(grid, fld)
        self.identity = sp.identity(grid.size, format="csr")
        self.Lambda_vec = grid.constant_field(params.Lambda)
        self._cache_ai = None
        self._cache = None

    def solvers_at(self, ai: int):
        """(solver with decay d, solver with decay d+b+c) at time index ai."""
        if self._cache is not None and (self.field.time_constant or ai == self._cache_ai):
            return self._cache
        A = self.assembler.assemble_at_index(ai, t=float("nan")).matrix
        p, dt = self.params, self.dt
        M_d = ((1.0 + dt * p.d) * self.identity - dt * A).tocsc()
        M_a = ((1.0 + dt * p.alpha) * self.identity - dt * A).tocsc()
        self._cache = (_LinearSolver(M_d, self.solver), _LinearSolver(M_a, self.solver))
        self._cache_ai = ai
        return self._cache

    def step(self, S, I, R, gamma_n: float, ai_next: int):
        """One IMEX Euler step; returns (S, I, R, clamp_mass)."""
        p, dt, grid = self.params, self.dt, self.grid
        solve_d, solve_a = self.solvers_at(ai_next)
        f = incidence(S, I, R)
        I1 = solve_a.solve(I + dt * gamma_n * f)
        S1 = solve_d.solve(S + dt * (self.Lambda_vec + p.b * I1 - gamma_n * f))
        R1 = solve_d.solve(R + dt * p.c * I1)
        clamp = 0.0
        outs = []
        for u in (S1, I1, R1):
            neg = np.minimum(u, 0.0)
            clamp += grid.norm(neg)
            outs.append(np.maximum(u, 0.0))
        return outs[0], outs[1], outs[2], clamp

    def step_linear(self, N, ai_next: int):
        """One IMEX Euler step of the linear total-population equation."""
        solve_d, _ = self.solvers_at(ai_next)
        return solve_d.solve(N + self.dt * self.Lambda_vec)


def step_imex(state: StateField, dt: float, path: NoisePath, params: ModelParams,
              fld: DiffusionField, gamma: TransmissionProcess, grid: Grid,
              solver: str = "direct") -> StateField:
    """Single IMEX Euler step from state.t to state.t + dt."""
    state.require_nonnegative()
    stepper = ImexStepper(grid, params, fld, path, dt, solver)
    ai = path.absolute_index(state.t)
    g = gamma.at_index(ai)
    S, I, R, _ = stepper.step(state.S, state.I, state.R, g, ai + stepper.stride)
    return StateField(S=S, I=I, R=R, t=state.t + dt)


def _steps_between(t0: float, t1: float, dt: float) -> int:
    n = (t1 - t0) / dt
    ni = int(round(n))
    if abs(n - ni) > 1e-9 * max(1.0, abs(n)) or ni < 0:
        raise ValueError("t1 - t0 must be a non-negative integer multiple of dt")
    return ni


def simulate(grid: Grid, t0: float, t1: float, u0: StateField, path: NoisePath,
             dt: float, params: ModelParams, fld: DiffusionField,
             gamma: TransmissionProcess, spectral: SpectralData = None,
             record_every: int = 1, solver: str = "direct") -> Trajectory:
    """Integrate the S/I/R system from t0 to t1, recording scalar diagnostics
    every ``record_every`` steps (plus the initial and final states).

    Satisfies the evolution-process identities bitwise on grid-aligned times:
    chaining two simulations equals one, and starting at t0 with path omega
    equals starting at 0 with the shifted path theta_{t0} omega.
    """
    u0.require_nonnegative()
    if spectral is None:
        spectral = first_eigenpair(grid, a0=fld.a0)
    stepper = ImexStepper(grid, params, fld, path, dt, solver)
    nsteps = _steps_between(t0, t1, dt)
    ai0 = path.absolute_index(t0)
    if ai0 + nsteps * stepper.stride > path.i_hi:
        raise ValueError("run extends past the sampled noise window")

    S, I, R = (np.array(u0.S, dtype=float), np.array(u0.I, dtype=float),
               np.array(u0.R, dtype=float))
    rows = []
    states = []

    def record(n, g, clamp):
        t = t0 + n * dt
        N = S + I + R
        nN = grid.norm(N)
        mask = N > N_FLOOR
        ratio = float(np.max((I[mask] + R[mask]) / N[mask])) if np.any(mask) else 0.0
        rows.append((t, grid.norm(S), grid.norm(I), grid.norm(R), nN,
                     grid.integral(I), grid.inner(I, spectral.v1), ratio, g, clamp))
        states.append(StateField(S=S.copy(), I=I.copy(), R=R.copy(), t=t))

    record(0, gamma.at_index(ai0), 0.0)
    prev_norm = grid.norm(S + I + R)
    lam_norm = grid.norm(stepper.Lambda_vec)
    for n in range(nsteps):
        ai = ai0 + n * stepper.stride
        g = gamma.at_index(ai)
        S, I, R, clamp = stepper.step(S, I, R, g, ai + stepper.stride)
        norm_now = grid.norm(S + I + R)
        if norm_now > 10.0 * (prev_norm + dt * lam_norm + 1e-300):
            raise SimulationBlowupError(f"norm grew {prev_norm} -> {norm_now} in one step at t={t0 + n * dt}")
        prev_norm = norm_now
        if (n + 1) % record_every == 0 or n + 1 == nsteps:
            record(n + 1, gamma.at_index(ai + stepper.stride), clamp)

    arr = np.array(rows)
    return Trajectory(
        grid=grid, times=arr[:, 0], norm_S=arr[:, 1], norm_I=arr[:, 2],
        norm_R=arr[:, 3], norm_N=arr[:, 4], int_I=arr[:, 5], w=arr[:, 6],
        ratio_IR_over_N=arr[:, 7], gamma=arr[:, 8], clamp_mass=arr[:, 9],
        states=states,
    )


@dataclass
class LinearTrajectory:
    """Recorded total-population fields from the decoupled linear equation."""

    grid: Grid
    times: np.ndarray
    norms: np.ndarray
    fields: list

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]


def solve_linear_N(grid: Grid, t0: float, t1: float, N0: np.ndarray, path: NoisePath,
                   dt: float, params: ModelParams, fld: DiffusionField,
                   record_every: int = 1, solver: str = "direct") -> LinearTrajectory:
    """Integrate N' = Lambda + A(theta_t omega) N - d N with the same IMEX
    scheme and operators as the full system; the oracle for sum cancellation."""
    N = np.array(N0, dtype=float)
    stepper = ImexStepper(grid, params, fld, path, dt, solver)
    nsteps = _steps_between(t0, t1, dt)
    ai0 = path.absolute_index(t0)
    if ai0 + nsteps * stepper.stride > path.i_hi:
        raise ValueError("run extends past the sampled noise window")
    times = [t0]
    norms = [grid.norm(N)]
    fields = [N.copy()]
    for n in range(nsteps):
        ai = ai0 + n * stepper.stride
        N = stepper.step_linear(N, ai + stepper.stride)
        if (n + 1) % record_every == 0 or n + 1 == nsteps:
            times.append(t0 + (n + 1) * dt)
            norms.append(grid.norm(N))
            fields.append(N.copy())
    return LinearTrajectory(grid=grid, times=np.array(times), norms=np.array(norms), fields=fields)
