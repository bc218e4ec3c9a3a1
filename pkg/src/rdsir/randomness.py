"""Driving randomness: seeded two-sided Wiener paths with shift semantics,
the OU-perturbed transmission process, the random diffusion coefficient,
and the asymptotic time-mean estimator.

All objects are immutable after construction and are pure functions of
(seed, parameters), so two runs agree bitwise.  Paths are pre-sampled on a
fixed grid; shifting re-anchors by integer grid arithmetic only, which keeps
the shift cocycle exact.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

# Hard cap on pre-sampled grid length (~256 MB of float64).
MAX_PATH_SAMPLES = 2**25


def _to_index(t: float, dt: float, what: str = "time") -> int:
    """Map a time to its grid index, requiring near-exact alignment."""
    k = t / dt
    ki = int(round(k))
    if abs(k - ki) > 1e-6 * max(1.0, abs(k)):
        raise ValueError(f"{what} {t!r} is not aligned to the sampling grid (dt={dt!r})")
    return ki


@dataclass(frozen=True)
class NoisePath:
    """A sampled two-sided Wiener trajectory with Wiener-shift semantics.

    ``values[j]`` is the sample at absolute grid index ``i_lo + j`` (time
    ``(i_lo + j) * dt`` in the original frame).  ``anchor`` is the absolute
    grid index of the current origin; evaluation subtracts the anchor value,
    so ``value(0) == 0`` always and shifting by ``s`` then ``t`` equals
    shifting by ``s + t`` exactly.
    """

    seed: int
    dt: float
    i_lo: int
    i_hi: int
    anchor: int
    values: np.ndarray

    @property
    def t_lo(self) -> float:
        """Earliest accessible time in the current (shifted) frame."""
        return (self.i_lo - self.anchor) * self.dt

    @property
    def t_hi(self) -> float:
        return (self.i_hi - self.anchor) * self.dt

    @property
    def n_samples(self) -> int:
        return self.i_hi - self.i_lo + 1

    def absolute_index(self, t: float) -> int:
        """Absolute grid index of local time t; raises if outside the window."""
        ai = self.anchor + _to_index(t, self.dt)
        if ai < self.i_lo or ai > self.i_hi:
            raise ValueError(f"time {t} outside sampled window [{self.t_lo}, {self.t_hi}]")
        return ai

    def value(self, t: float) -> float:
        """omega(t) in the current frame (anchored so the value at 0 is 0)."""
        ai = self.absolute_index(t)
        return float(self.values[ai - self.i_lo] - self.values[self.anchor - self.i_lo])

    def increments(self) -> np.ndarray:
        """Increments over consecutive grid cells (shift-invariant)."""
        return np.diff(self.values)

    def shift(self, s: float) -> "NoisePath":
        """The Wiener shift: re-anchor the path at local time s."""
        k = _to_index(s, self.dt, "shift")
        anchor = self.anchor + k
        if anchor < self.i_lo or anchor > self.i_hi:
            raise ValueError(f"shift {s} leaves the sampled window")
        return dataclasses.replace(self, anchor=anchor)


def sample_wiener_path(seed: int, t_lo: float, t_hi: float, dt: float) -> NoisePath:
    """Sample a two-sided Wiener path on [t_lo, t_hi] with step dt.

    Increments are iid N(0, dt); the path is anchored so omega(0) = 0.
    Identical inputs give bit-identical output.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (t_lo < 0 < t_hi):
        raise ValueError("window must satisfy t_lo < 0 < t_hi")
    i_lo = _to_index(t_lo, dt, "t_lo")
    i_hi = _to_index(t_hi, dt, "t_hi")
    n = i_hi - i_lo
    if n + 1 > MAX_PATH_SAMPLES:
        raise ValueError(f"requested grid of {n + 1} samples exceeds cap {MAX_PATH_SAMPLES}")
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal(n) * math.sqrt(dt)
    w = np.concatenate(([0.0], np.cumsum(inc)))
    w -= w[-i_lo]  # anchor omega(0) = 0
    w.flags.writeable = False
    return NoisePath(seed=seed, dt=dt, i_lo=i_lo, i_hi=i_hi, anchor=0, values=w)


def shift(path: NoisePath, s: float) -> NoisePath:
    """Functional form of :meth:`NoisePath.shift`."""
    return path.shift(s)


def ou_trace(path: NoisePath, kappa: float, sigma: float, phi0: float = 0.0) -> np.ndarray:
    """Ornstein-Uhlenbeck trace driven by the path's increments.

    Exact discretization on the path's full grid, starting from phi0 at the
    left edge:  Phi_{n+1} = rho Phi_n + s xi_n  with rho = exp(-kappa dt) and
    s = sigma sqrt((1 - rho^2)/(2 kappa)).  Deterministic given the path.
    Returned array is aligned with the absolute grid (index i_lo first).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    dt = path.dt
    rho = math.exp(-kappa * dt)
    scale = sigma * math.sqrt((1.0 - math.exp(-2.0 * kappa * dt)) / (2.0 * kappa))
    xi = path.increments() / math.sqrt(dt)
    # AR(1) recursion via lfilter: y[n] = rho*y[n-1] + scale*x[n]
    y, _ = lfilter([scale], [1.0, -rho], xi, zi=[rho * phi0])
    phi = np.concatenate(([phi0], y))
    phi.flags.writeable = False
    return phi


@dataclass(frozen=True)
class TransmissionProcess:
    """Bounded transmission-rate trace gamma = clamp(gamma0 + Phi, 0, gamma_max).

    The trace is aligned with the generating path's absolute grid, so it is
    consistent with any shifted view of that path.
    """

    gamma0: float
    kappa: float
    sigma: float
    gamma_max: float
    dt: float
    i_lo: int
    trace: np.ndarray
    clamp_fraction: float

    def at_index(self, ai: int) -> float:
        return float(self.trace[ai - self.i_lo])

    def value(self, path: NoisePath, t: float) -> float:
        """gamma(theta_t omega) for the given (possibly shifted) path view."""
        return self.at_index(path.absolute_index(t))

    def segment(self, ai0: int, ai1: int) -> np.ndarray:
        """Trace values on absolute indices ai0..ai1 inclusive."""
        return self.trace[ai0 - self.i_lo : ai1 - self.i_lo + 1]


def transmission_trace(
    path: NoisePath,
    phi: np.ndarray,
    gamma0: float,
    gamma_max: float,
    kappa: float = float("nan"),
    sigma: float = float("nan"),
) -> TransmissionProcess:
    """Clamp gamma0 + phi into [0, gamma_max] pointwise."""
    if gamma0 < 0:
        raise ValueError("gamma0 must be non-negative")
    if gamma_max < gamma0:
        raise ValueError("gamma_max must be >= gamma0")
    raw = gamma0 + np.asarray(phi, dtype=float)
    clamped = np.clip(raw, 0.0, gamma_max)
    frac = float(np.mean((raw < 0.0) | (raw > gamma_max)))
    clamped.flags.writeable = False
    return TransmissionProcess(
        gamma0=gamma0,
        kappa=kappa,
        sigma=sigma,
        gamma_max=gamma_max,
        dt=path.dt,
        i_lo=path.i_lo,
        trace=clamped,
        clamp_fraction=frac,
    )


def ou_transmission(
    path: NoisePath,
    gamma0: float,
    kappa: float,
    sigma: float,
    gamma_max: float,
    phi0: float = 0.0,
) -> TransmissionProcess:
    """Convenience: OU-perturbed transmission gamma = clamp(gamma0 + Phi)."""
    phi = ou_trace(path, kappa, sigma, phi0)
    return transmission_trace(path, phi, gamma0, gamma_max, kappa=kappa, sigma=sigma)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def spatial_profile(profile: str, coords: np.ndarray, lengths: tuple) -> np.ndarray:
    """Smooth profile rho(x) mapping the domain strictly into (0, 1).

    ``coords`` has shape (npoints, dim).  Known profiles:
      uniform  -- rho = 0.5 everywhere (spatially constant coefficient);
      bump     -- product of 0.05 + 0.9 sin(pi x / L) per axis.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if profile == "uniform":
        return np.full(coords.shape[0], 0.5)
    if profile == "bump":
        rho = np.ones(coords.shape[0])
        for ax, L in enumerate(lengths):
            rho *= 0.05 + 0.9 * np.sin(np.pi * coords[:, ax] / L)
        return rho
    raise ValueError(f"unknown spatial profile {profile!r}")


@dataclass(frozen=True)
class DiffusionField:
    """Random diffusion coefficient a(theta_t omega, x) in (a0, a1).

    Concrete form a = a0 + (a1 - a0) * sigmoid(Phi_a(theta_t omega)) * rho(x)
    with rho mapping strictly into (0, 1).  The temporal driver (the squashed
    OU trace) lives on the generating path's absolute grid.
    """

    a0: float
    a1: float
    profile: str
    lengths: tuple
    dt: float
    i_lo: int
    driver: np.ndarray  # sigmoid(Phi_a), values in (0, 1)
    time_constant: bool

    def rho(self, coords: np.ndarray) -> np.ndarray:
        return spatial_profile(self.profile, coords, self.lengths)

    def at_index(self, ai: int, rho_vals: np.ndarray) -> np.ndarray:
        """Coefficient values at absolute time index ai for precomputed rho."""
        if self.a1 == self.a0:
            return np.full_like(rho_vals, self.a0)
        return self.a0 + (self.a1 - self.a0) * float(self.driver[ai - self.i_lo]) * rho_vals

    def at(self, path: NoisePath, t: float, coords: np.ndarray) -> np.ndarray:
        """a(theta_t omega, x) at the given coordinates."""
        return self.at_index(path.absolute_index(t), self.rho(coords))


def make_diffusion_field(
    path: NoisePath,
    a0: float,
    a1: float,
    profile: str = "uniform",
    lengths: tuple = (1.0,),
    kappa: float = 1.0,
    sigma: float = 1.0,
    phi0: float = 0.0,
) -> DiffusionField:
    """Build the random diffusion coefficient from an OU temporal driver."""
    if not (0 < a0 <= a1):
        raise ValueError("need 0 < a0 <= a1")
    phi = ou_trace(path, kappa, sigma, phi0)
    driver = _sigmoid(phi)
    driver.flags.writeable = False
    constant = a0 == a1 or float(np.ptp(driver)) == 0.0
    return DiffusionField(
        a0=a0,
        a1=a1,
        profile=profile,
        lengths=tuple(lengths),
        dt=path.dt,
        i_lo=path.i_lo,
        driver=driver,
        time_constant=constant,
    )


@dataclass(frozen=True)
class MeanValueReport:
    """Time-mean estimate with the per-horizon sup sequence for inspection."""

    m: float
    horizons: tuple
    sups: tuple
    clamp_fraction: float


def mean_value_m(
    gamma: TransmissionProcess,
    path: NoisePath,
    t0: float,
    horizons,
) -> MeanValueReport:
    """Asymptotic supremal time average of the transmission trace.

    For each horizon n in the (increasing) schedule, computes the sup of the
    running averages (1/(t - t0)) int_{t0}^{t} gamma over windows t - t0 > n
    within the sampled trace; the estimate is the sup for the largest horizon.
    """
    horizons = tuple(float(h) for h in horizons)
    if not horizons or any(h2 <= h1 for h1, h2 in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be a non-empty increasing sequence")
    ai0 = path.absolute_index(t0)
    seg = gamma.trace[ai0 - gamma.i_lo :]
    dt = gamma.dt
    span = (len(seg) - 1) * dt
    if horizons[-1] >= span:
        raise ValueError(f"largest horizon {horizons[-1]} exceeds trace length {span}")
    # cumulative trapezoid integral of gamma from t0
    ci = np.concatenate(([0.0], np.cumsum(0.5 * (seg[1:] + seg[:-1]) * dt)))
    tau = np.arange(len(seg)) * dt
    avg = ci[1:] / tau[1:]
    sups = []
    for h in horizons:
        mask = tau[1:] > h
        sups.append(float(np.max(avg[mask])))
    return MeanValueReport(
        m=sups[-1],
        horizons=horizons,
        sups=tuple(sups),
        clamp_fraction=gamma.clamp_fraction,
    )
