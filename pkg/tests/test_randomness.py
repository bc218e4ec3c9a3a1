import numpy as np
import pytest

from rdsir.randomness import (
    DiffusionField,
    make_diffusion_field,
    mean_value_m,
    ou_trace,
    ou_transmission,
    sample_wiener_path,
    shift,
    spatial_profile,
    transmission_trace,
)


@pytest.fixture
def path():
    return sample_wiener_path(seed=7, t_lo=-2.0, t_hi=4.0, dt=0.01)


def test_path_is_anchored_and_deterministic(path):
    assert path.value(0.0) == 0.0
    again = sample_wiener_path(seed=7, t_lo=-2.0, t_hi=4.0, dt=0.01)
    assert np.array_equal(path.values, again.values)
    other = sample_wiener_path(seed=8, t_lo=-2.0, t_hi=4.0, dt=0.01)
    assert not np.array_equal(path.values, other.values)


def test_path_increment_statistics():
    p = sample_wiener_path(seed=0, t_lo=-50.0, t_hi=50.0, dt=0.01)
    inc = p.increments()
    assert abs(np.mean(inc)) < 5e-3
    assert abs(np.var(inc) - p.dt) < 5e-4


def test_shift_definition(path):
    s = 0.5
    shifted = path.shift(s)
    # theta_s omega (t) = omega(s + t) - omega(s)
    for t in (-0.3, 0.0, 0.25, 1.0):
        assert shifted.value(t) == pytest.approx(path.value(s + t) - path.value(s), abs=0)


def test_shift_cocycle_is_exact(path):
    a = path.shift(0.5).shift(-0.25)
    b = path.shift(0.25)
    assert a.anchor == b.anchor
    for t in (-1.0, 0.0, 0.5):
        assert a.value(t) == b.value(t)


def test_shift_rejects_offgrid_and_out_of_window(path):
    with pytest.raises(ValueError):
        path.shift(0.005)
    with pytest.raises(ValueError):
        path.shift(100.0)


def test_ou_trace_matches_scalar_recursion(path):
    kappa, sigma, phi0 = 1.3, 0.4, 0.2
    phi = ou_trace(path, kappa, sigma, phi0)
    rho = np.exp(-kappa * path.dt)
    scale = sigma * np.sqrt((1.0 - rho**2) / (2.0 * kappa))
    xi = path.increments() / np.sqrt(path.dt)
    ref = np.empty(path.n_samples)
    ref[0] = phi0
    for n in range(len(xi)):
        ref[n + 1] = rho * ref[n] + scale * xi[n]
    assert np.allclose(phi, ref, rtol=0, atol=1e-12)


def test_ou_trace_stationary_variance():
    p = sample_wiener_path(seed=3, t_lo=-1.0, t_hi=500.0, dt=0.01)
    phi = ou_trace(p, kappa=1.0, sigma=0.2)
    tail = phi[len(phi) // 5 :]
    assert np.var(tail) == pytest.approx(0.2**2 / 2.0, rel=0.2)


def test_ou_trace_zero_noise_relaxes(path):
    phi = ou_trace(path, kappa=2.0, sigma=0.0, phi0=1.0)
    assert phi[0] == 1.0
    assert phi[-1] < phi[0]
    assert np.all(np.diff(phi) <= 0)


def test_transmission_clamped_and_fraction(path):
    phi = np.linspace(-3.0, 3.0, path.n_samples)
    g = transmission_trace(path, phi, gamma0=1.0, gamma_max=2.0)
    assert np.min(g.trace) == 0.0
    assert np.max(g.trace) == 2.0
    expected = np.mean((1.0 + phi < 0) | (1.0 + phi > 2.0))
    assert g.clamp_fraction == pytest.approx(expected)


def test_transmission_lookup_consistent_under_shift(path):
    g = ou_transmission(path, gamma0=2.0, kappa=1.0, sigma=0.3, gamma_max=5.0)
    shifted = shift(path, 1.0)
    assert g.value(shifted, -1.0) == g.value(path, 0.0)


def test_transmission_validation(path):
    with pytest.raises(ValueError):
        transmission_trace(path, np.zeros(path.n_samples), gamma0=2.0, gamma_max=1.0)


def test_spatial_profile_strictly_inside_unit_interval():
    x = np.linspace(0.01, 0.99, 50)[:, None]
    for profile in ("uniform", "bump"):
        rho = spatial_profile(profile, x, (1.0,))
        assert np.all(rho > 0.0) and np.all(rho < 1.0)
    with pytest.raises(ValueError):
        spatial_profile("nope", x, (1.0,))


def test_diffusion_field_bounds_and_time_constant(path):
    fld = make_diffusion_field(path, 0.5, 2.0, profile="bump", lengths=(1.0,))
    x = np.linspace(0.05, 0.95, 20)[:, None]
    vals = fld.at(path, 0.5, x)
    assert np.all(vals > 0.5) and np.all(vals < 2.0)
    assert not fld.time_constant
    assert make_diffusion_field(path, 1.0, 1.0).time_constant
    assert make_diffusion_field(path, 0.5, 2.0, sigma=0.0, phi0=0.0).time_constant


def test_mean_value_of_constant_transmission(path):
    g = ou_transmission(path, gamma0=3.0, kappa=1.0, sigma=0.0, gamma_max=10.0)
    rep = mean_value_m(g, path, t0=0.0, horizons=[1.0, 2.0])
    assert rep.m == pytest.approx(3.0, rel=1e-12)
    assert rep.sups == pytest.approx((3.0, 3.0), rel=1e-12)


def test_mean_value_horizon_validation(path):
    g = ou_transmission(path, gamma0=1.0, kappa=1.0, sigma=0.1, gamma_max=5.0)
    with pytest.raises(ValueError):
        mean_value_m(g, path, t0=0.0, horizons=[2.0, 1.0])
    with pytest.raises(ValueError):
        mean_value_m(g, path, t0=0.0, horizons=[10.0])
