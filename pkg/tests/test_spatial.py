import numpy as np
import pytest

from rdsir.randomness import make_diffusion_field, sample_wiener_path
from rdsir.spatial import (
    assemble_diffusion,
    build_grid,
    first_eigenpair,
    laplacian_eigenvalue_exact,
    negative_laplacian,
)


@pytest.fixture
def path():
    return sample_wiener_path(seed=11, t_lo=-1.0, t_hi=1.0, dt=0.01)


def test_grid_geometry_and_quadrature():
    g = build_grid(1, 1.0, 99)
    assert g.h == (0.01,)
    assert g.size == 99
    one = g.constant_field(1.0)
    assert g.integral(one) == pytest.approx(0.99)
    assert g.norm(one) == pytest.approx(np.sqrt(0.99))
    assert g.inner(one, one) == pytest.approx(0.99)


def test_grid_validation():
    with pytest.raises(ValueError):
        build_grid(3, (1.0, 1.0, 1.0), (9, 9, 9))
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 2)
    with pytest.raises(ValueError):
        build_grid(2, (1.0,), (9, 9))


def test_constant_coefficient_assembly_matches_laplacian(path):
    for dim, lengths, n in ((1, (1.0,), (19,)), (2, (1.0, 0.5), (9, 7))):
        g = build_grid(dim, lengths, n)
        fld = make_diffusion_field(path, 0.7, 0.7, lengths=lengths)
        A = assemble_diffusion(g, fld, path, 0.0).matrix
        ref = -0.7 * negative_laplacian(g)
        assert abs(A - ref).max() < 1e-13


def test_variable_coefficient_assembly_symmetric(path):
    for dim, lengths, n in ((1, (1.0,), (19,)), (2, (1.0, 1.0), (8, 9))):
        g = build_grid(dim, lengths, n)
        fld = make_diffusion_field(path, 0.5, 2.0, profile="bump", lengths=lengths)
        A = assemble_diffusion(g, fld, path, 0.25).matrix
        assert abs(A - A.T).max() == 0.0
        # negative semidefinite: u . A u < 0 for random u
        rng = np.random.default_rng(0)
        u = rng.standard_normal(g.size)
        assert u @ (A @ u) < 0.0


def test_assembly_exact_on_linear_fields(path):
    # For constant a, div(a grad .) applied to a linear-in-x field is zero
    # away from the boundary rows.
    g = build_grid(1, 1.0, 19)
    fld = make_diffusion_field(path, 1.0, 1.0)
    A = assemble_diffusion(g, fld, path, 0.0).matrix
    u = g.points()[:, 0]
    r = A @ u
    assert np.max(np.abs(r[1:-1])) < 1e-12


def test_first_eigenpair_matches_analytic():
    g = build_grid(1, 1.0, 99)
    spec = first_eigenpair(g, a0=0.5)
    assert spec.lambda1 == pytest.approx(laplacian_eigenvalue_exact(g), rel=1e-12)
    assert spec.lambda0 == pytest.approx(0.5 * spec.lambda1)
    assert spec.residual <= 1e-10
    assert np.all(spec.v1 > 0)
    assert g.norm(spec.v1) == pytest.approx(1.0, rel=1e-12)


def test_first_eigenvector_is_discrete_sine():
    g = build_grid(1, 1.0, 49)
    spec = first_eigenpair(g)
    v_ref = np.sin(np.pi * g.axis_points(0))
    v_ref /= g.norm(v_ref)
    assert np.allclose(spec.v1, v_ref, atol=1e-8)


def test_first_eigenpair_2d():
    g = build_grid(2, (1.0, 2.0), (15, 31))
    spec = first_eigenpair(g)
    assert spec.lambda1 == pytest.approx(laplacian_eigenvalue_exact(g), rel=1e-10)
