import numpy as np
import pytest

from rdsir.dynamics import (
    ModelParams,
    StateField,
    incidence,
    simulate,
    solve_linear_N,
    step_imex,
)
from rdsir.randomness import make_diffusion_field, ou_transmission, sample_wiener_path, shift
from rdsir.spatial import build_grid


@pytest.fixture
def setup():
    grid = build_grid(1, 1.0, 19)
    path = sample_wiener_path(seed=5, t_lo=-2.0, t_hi=4.0, dt=0.01)
    params = ModelParams(Lambda=1.0, d=0.1, b=0.05, c=0.2)
    fld = make_diffusion_field(path, 0.8, 1.2, profile="bump", lengths=grid.lengths)
    gamma = ou_transmission(path, gamma0=3.0, kappa=1.0, sigma=0.2, gamma_max=8.0)
    u0 = StateField(S=grid.constant_field(0.3), I=grid.constant_field(0.1),
                    R=grid.constant_field(0.05), t=0.0)
    return grid, path, params, fld, gamma, u0


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(Lambda=1.0, d=0.0, b=0.0, c=0.0)
    with pytest.raises(ValueError):
        ModelParams(Lambda=-1.0, d=0.1, b=0.0, c=0.0)
    assert ModelParams(Lambda=1.0, d=0.1, b=0.05, c=0.2).alpha == pytest.approx(0.35)


def test_incidence_bounded_extension():
    S = np.array([1.0, 0.0, 2.0])
    I = np.array([0.5, 0.0, 0.0])
    R = np.array([0.5, 0.0, 1.0])
    f = incidence(S, I, R)
    assert f == pytest.approx([0.25, 0.0, 0.0])
    with pytest.raises(ValueError):
        incidence(-S, I, R)


def test_sum_equals_linear_population(setup):
    grid, path, params, fld, gamma, u0 = setup
    traj = simulate(grid, 0.0, 2.0, u0, path, 0.01, params, fld, gamma, record_every=10)
    lin = solve_linear_N(grid, 0.0, 2.0, u0.N, path, 0.01, params, fld, record_every=10)
    worst = max(grid.norm(st.N - nf) / grid.norm(nf)
                for st, nf in zip(traj.states, lin.fields))
    assert worst < 1e-12


def test_states_stay_nonnegative(setup):
    grid, path, params, fld, gamma, u0 = setup
    traj = simulate(grid, 0.0, 2.0, u0, path, 0.01, params, fld, gamma)
    for st in traj.states:
        st.require_nonnegative()
    assert np.max(traj.clamp_mass) == 0.0


def test_two_stage_evolution_matches_single_run(setup):
    grid, path, params, fld, gamma, u0 = setup
    full = simulate(grid, 0.0, 1.0, u0, path, 0.01, params, fld, gamma, record_every=10**9)
    half = simulate(grid, 0.0, 0.5, u0, path, 0.01, params, fld, gamma, record_every=10**9)
    rest = simulate(grid, 0.5, 1.0, half.final, path, 0.01, params, fld, gamma,
                    record_every=10**9)
    assert np.array_equal(full.final.S, rest.final.S)
    assert np.array_equal(full.final.I, rest.final.I)
    assert np.array_equal(full.final.R, rest.final.R)


def test_shift_equivariance_bitwise(setup):
    grid, path, params, fld, gamma, u0 = setup
    a = simulate(grid, 1.0, 2.0, u0, path, 0.01, params, fld, gamma, record_every=10**9)
    b = simulate(grid, 0.0, 1.0, u0, shift(path, 1.0), 0.01, params, fld, gamma,
                 record_every=10**9)
    assert np.array_equal(a.final.I, b.final.I)
    assert np.array_equal(a.final.S, b.final.S)


def test_repeat_run_bitwise_identical(setup):
    grid, path, params, fld, gamma, u0 = setup
    a = simulate(grid, 0.0, 1.0, u0, path, 0.01, params, fld, gamma)
    b = simulate(grid, 0.0, 1.0, u0, path, 0.01, params, fld, gamma)
    assert np.array_equal(a.norm_I, b.norm_I)
    assert np.array_equal(a.final.S, b.final.S)


def test_single_step_matches_simulate(setup):
    grid, path, params, fld, gamma, u0 = setup
    st = step_imex(u0, 0.01, path, params, fld, gamma, grid)
    traj = simulate(grid, 0.0, 0.01, u0, path, 0.01, params, fld, gamma)
    assert np.array_equal(st.S, traj.final.S)
    assert np.array_equal(st.I, traj.final.I)
    assert st.t == pytest.approx(0.01)


def test_dt_must_be_multiple_of_noise_step(setup):
    grid, path, params, fld, gamma, u0 = setup
    with pytest.raises(ValueError):
        simulate(grid, 0.0, 1.0, u0, path, 0.015, params, fld, gamma)


def test_run_outside_window_rejected(setup):
    grid, path, params, fld, gamma, u0 = setup
    with pytest.raises(ValueError):
        simulate(grid, 0.0, 100.0, u0, path, 0.01, params, fld, gamma)


def test_cg_solver_agrees_with_direct(setup):
    grid, path, params, fld, gamma, u0 = setup
    a = simulate(grid, 0.0, 0.2, u0, path, 0.01, params, fld, gamma, solver="direct")
    b = simulate(grid, 0.0, 0.2, u0, path, 0.01, params, fld, gamma, solver="cg")
    assert np.allclose(a.final.I, b.final.I, rtol=0, atol=1e-8)


def test_linear_solver_fixed_point(setup):
    # With a time-constant coefficient, the solution of (d - A) N = Lambda is a
    # fixed point of the linear stepper to solver accuracy.
    grid, path, params, _, _, _ = setup
    from rdsir.asymptotics import stationary_population

    fld = make_diffusion_field(path, 1.0, 1.0)
    n_stat = stationary_population(grid, path, params, fld)
    lin = solve_linear_N(grid, 0.0, 1.0, n_stat, path, 0.01, params, fld, record_every=10**9)
    assert grid.norm(lin.final - n_stat) < 1e-12
