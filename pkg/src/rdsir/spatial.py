"""Spatial discretization: uniform Dirichlet grids in 1D/2D, the conservative
face-flux assembly of div(a grad .), and the first Dirichlet eigenpair of the
(constant-coefficient) discrete Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .randomness import DiffusionField, NoisePath


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid on a 1D interval or 2D rectangle, Dirichlet BC.

    Fields are stored flat (C order for 2D); boundary values are implicit
    zeros.  Discrete L2 quantities are grid-weighted (cell volume h^dim).
    """

    dimension: int
    lengths: tuple
    n: tuple
    h: tuple = field(init=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if len(self.lengths) != self.dimension or len(self.n) != self.dimension:
            raise ValueError("lengths/n must match the dimension")
        if any(L <= 0 for L in self.lengths):
            raise ValueError("lengths must be positive")
        if any(m < 3 for m in self.n):
            raise ValueError("need at least 3 interior points per axis")
        object.__setattr__(self, "h", tuple(L / (m + 1) for L, m in zip(self.lengths, self.n)))

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axis_points(self, axis: int) -> np.ndarray:
        """Interior point coordinates along one axis."""
        return self.h[axis] * np.arange(1, self.n[axis] + 1)

    def points(self) -> np.ndarray:
        """Interior point coordinates, shape (size, dimension), C order."""
        if self.dimension == 1:
            return self.axis_points(0)[:, None]
        X, Y = np.meshgrid(self.axis_points(0), self.axis_points(1), indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def norm(self, u: np.ndarray) -> float:
        """Discrete L2 norm (grid-weighted)."""
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(self.cell_volume * np.dot(u.ravel(), u.ravel())))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(self.cell_volume * np.dot(np.ravel(u), np.ravel(v)))

    def integral(self, u: np.ndarray) -> float:
        return float(self.cell_volume * np.sum(u))

    def constant_field(self, value: float) -> np.ndarray:
        return np.full(self.size, float(value))


def build_grid(dimension: int, lengths, n) -> Grid:
    """Construct a grid; scalars are accepted for 1D convenience."""
    if np.isscalar(lengths):
        lengths = (float(lengths),)
    if np.isscalar(n):
        n = (int(n),)
    return Grid(dimension=dimension, lengths=tuple(float(L) for L in lengths), n=tuple(int(m) for m in n))


@dataclass(frozen=True)
class DiffusionOperator:
    """Sparse symmetric approximation of div(a(theta_t omega, .) grad .)."""

    grid: Grid
    matrix: sp.csr_matrix
    t: float


def _face_coords(grid: Grid, axis: int) -> np.ndarray:
    """Coordinates of all faces normal to `axis`, shape (nfaces, dim).

    Faces along an axis with m interior points: m+1 of them, including the
    two boundary faces.  2D faces are ordered to match C-ordered cells.
    """
    h = grid.h[axis]
    face_line = h * (np.arange(grid.n[axis] + 1) + 0.5)
    if grid.dimension == 1:
        return face_line[:, None]
    other = 1 - axis
    pts_other = grid.axis_points(other)
    if axis == 0:
        X, Y = np.meshgrid(face_line, pts_other, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])
    X, Y = np.meshgrid(grid.axis_points(0), face_line, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


class _Assembler:
    """Precomputes the stencil pattern and rho at faces; coefficient values
    are filled per time index.  Assembly is by face-flux pairs, so the matrix
    is symmetric by construction."""

    def __init__(self, grid: Grid, fld: DiffusionField):
        self.grid = grid
        self.field = fld
        self.rho_faces = [fld.rho(_face_coords(grid, ax)) for ax in range(grid.dimension)]
        # Index pairs per axis: faces connect cell (left) to cell (right);
        # boundary faces touch a single cell.
        self.patterns = [self._axis_pattern(ax) for ax in range(grid.dimension)]

    def _axis_pattern(self, axis: int):
        grid = self.grid
        if grid.dimension == 1:
            m = grid.n[0]
            left = np.concatenate(([-1], np.arange(m)))
            right = np.concatenate((np.arange(m), [-1]))
            return left, right
        nx, ny = grid.n
        if axis == 0:
            # faces ordered (face_line, y) with face index f in 0..nx
            F, J = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="ij")
            left = np.where(F == 0, -1, (F - 1) * ny + J)
            right = np.where(F == nx, -1, F * ny + J)
        else:
            I, F = np.meshgrid(np.arange(nx), np.arange(ny + 1), indexing="ij")
            left = np.where(F == 0, -1, I * ny + (F - 1))
            right = np.where(F == ny, -1, I * ny + F)
        return left.ravel(), right.ravel()

    def assemble_at_index(self, ai: int, t: float) -> DiffusionOperator:
        grid = self.grid
        size = grid.size
        rows, cols, vals = [], [], []
        for ax in range(grid.dimension):
            w = self.field.at_index(ai, self.rho_faces[ax]) / grid.h[ax] ** 2
            left, right = self.patterns[ax]
            interior = (left >= 0) & (right >= 0)
            li, ri, wi = left[interior], right[interior], w[interior]
            # off-diagonal pair + diagonal sinks for interior faces
            rows.extend([li, ri, li, ri])
            cols.extend([ri, li, li, ri])
            vals.extend([wi, wi, -wi, -wi])
            # boundary faces: diagonal sink only (Dirichlet zero outside)
            bnd = ~interior
            cell = np.where(left[bnd] >= 0, left[bnd], right[bnd])
            rows.append(cell)
            cols.append(cell)
            vals.append(-w[bnd])
        A = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(size, size),
        ).tocsr()
        return DiffusionOperator(grid=grid, matrix=A, t=t)


def assemble_diffusion(grid: Grid, fld: DiffusionField, path: NoisePath, t: float) -> DiffusionOperator:
    """Assemble div(a(theta_t omega, .) grad .) at time t along the path.

    Conservative face-centered stencil with midpoint face values; symmetric
    by pairwise face fluxes; Dirichlet rows eliminated.
    """
    ai = path.absolute_index(t)
    return _Assembler(grid, fld).assemble_at_index(ai, t)


def negative_laplacian(grid: Grid) -> sp.csr_matrix:
    """-Delta^h, the constant-coefficient Dirichlet stencil."""
    size = grid.size
    mats = []
    for ax in range(grid.dimension):
        m = grid.n[ax]
        h2 = grid.h[ax] ** 2
        T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m)) / h2
        mats.append(T)
    if grid.dimension == 1:
        return mats[0].tocsr()
    nx, ny = grid.n
    return (sp.kron(mats[0], sp.identity(ny)) + sp.kron(sp.identity(nx), mats[1])).tocsr()


@dataclass(frozen=True)
class SpectralData:
    """First Dirichlet eigenpair of -Delta^h plus the coercivity rate."""

    lambda1: float
    v1: np.ndarray
    lambda0: float
    a0: float
    residual: float


def first_eigenpair(grid: Grid, a0: float = 1.0, tol: float = 1e-10, max_iter: int = 200) -> SpectralData:
    """First eigenpair of -Delta^h by inverse power iteration (shift 0).

    v1 is sign-fixed positive and normalized in the discrete L2 norm;
    convergence requires residual ||(-Delta^h) v1 - lambda1 v1|| <= tol.
    """
    L = negative_laplacian(grid)
    lu = splu(L.tocsc())
    v = np.ones(grid.size)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        lam = float(v @ (L @ v))
        res = float(np.linalg.norm(L @ v - lam * v))
        if res <= tol:
            break
    else:
        raise RuntimeError(f"inverse power iteration did not reach residual {tol} "
                           f"in {max_iter} iterations (last residual {res})")
    if np.sum(v) < 0:
        v = -v
    v = v / grid.norm(v)
    v.flags.writeable = False
    return SpectralData(lambda1=lam, v1=v, lambda0=a0 * lam, a0=a0, residual=res)


def laplacian_eigenvalue_exact(grid: Grid) -> float:
    """Analytic first eigenvalue of the discrete Dirichlet Laplacian."""
    lam = 0.0
    for ax in range(grid.dimension):
        h = grid.h[ax]
        L = grid.lengths[ax]
        lam += (2.0 / h**2) * (1.0 - np.cos(np.pi * h / L))
    return float(lam)
