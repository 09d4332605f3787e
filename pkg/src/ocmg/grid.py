"""Uniform-grid fields and matrix-free stencil operators.

The domain is the unit square with homogeneous Dirichlet boundary
conditions, discretized by finite differences with mesh step h = 1/N.
A scalar field stores interior nodal values only, as an (N-1) x (N-1)
array ``u`` with the fixed convention

    u[j-1, i-1]  =  value at the grid point (i*h, j*h),   1 <= i, j <= N-1,

i.e. the first array axis walks the x2 direction and the second the x1
direction, so a C-order flatten gives row-major lexicographic ordering
(j outer, i inner).  Boundary values are implicit zeros and never stored.

Operators provided, all matrix-free:

  * five-point Laplacian       L u = (4u_c - u_W - u_E - u_S - u_N) / h^2
  * nine-point mass operator   Q u = (h^2/36) [1 4 1; 4 16 4; 1 4 1] * u
  * the 2x2 block saddle operator

        A (y, p) = ( L y - (M.p)/alpha ,  y + L p )

    where M is an optional {0,1} mask acting entrywise on p (identity
    when absent).  With the mask absent this is the optimality system of
    the quadratic control problem; with a mask it is the generalized
    Jacobian arising from the active-set outer iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform N x N subdivision of the unit square, h = 1/N."""

    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need N >= 2, got N={self.N}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def m(self) -> int:
        """Interior points per direction."""
        return self.N - 1

    @property
    def npoints(self) -> int:
        return self.m * self.m

    def zeros(self) -> np.ndarray:
        return np.zeros((self.m, self.m))

    def check_field(self, u: np.ndarray) -> None:
        if u.shape != (self.m, self.m):
            raise ValueError(f"field shape {u.shape} does not match grid N={self.N}")


@dataclass
class BlockField:
    """(state, adjoint) pair v = (y, p) of scalar fields on one grid."""

    y: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        assert self.y.shape == self.p.shape, "y and p must share one grid"

    def copy(self) -> "BlockField":
        return BlockField(self.y.copy(), self.p.copy())

    def __add__(self, other: "BlockField") -> "BlockField":
        return BlockField(self.y + other.y, self.p + other.p)

    def __sub__(self, other: "BlockField") -> "BlockField":
        return BlockField(self.y - other.y, self.p - other.p)

    def __rmul__(self, a: float) -> "BlockField":
        return BlockField(a * self.y, a * self.p)

    def __iadd__(self, other: "BlockField") -> "BlockField":
        self.y += other.y
        self.p += other.p
        return self

    @staticmethod
    def zeros(grid: GridSpec) -> "BlockField":
        return BlockField(grid.zeros(), grid.zeros())


@dataclass(frozen=True)
class SaddleOperator:
    """Matrix-free A = [[L, -M/alpha], [I, L]]; mask None means M = I."""

    grid: GridSpec
    alpha: float
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.mask is not None:
            self.grid.check_field(self.mask)


def apply_laplacian(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Five-point Laplacian with zero Dirichlet boundary."""
    grid.check_field(u)
    out = 4.0 * u
    out[1:, :] -= u[:-1, :]
    out[:-1, :] -= u[1:, :]
    out[:, 1:] -= u[:, :-1]
    out[:, :-1] -= u[:, 1:]
    out *= grid.N * grid.N  # 1/h^2
    return out


def apply_mass(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Nine-point mass operator (h^2/36)[1 4 1; 4 16 4; 1 4 1].

    The stencil is the tensor product of the 1D weights [1 4 1]/6 scaled
    by h per direction, so it is applied separably.
    """
    grid.check_field(u)
    tmp = 4.0 * u
    tmp[1:, :] += u[:-1, :]
    tmp[:-1, :] += u[1:, :]
    out = 4.0 * tmp
    out[:, 1:] += tmp[:, :-1]
    out[:, :-1] += tmp[:, 1:]
    out *= grid.h * grid.h / 36.0
    return out


def apply_saddle(op: SaddleOperator, v: BlockField) -> BlockField:
    """A v = (L y - (M.p)/alpha, y + L p)."""
    op.grid.check_field(v.y)
    mp = v.p if op.mask is None else op.mask * v.p
    out_y = apply_laplacian(v.y, op.grid)
    out_y -= mp / op.alpha
    out_p = apply_laplacian(v.p, op.grid)
    out_p += v.y
    return BlockField(out_y, out_p)


def residual(op: SaddleOperator, b: BlockField, v: BlockField) -> BlockField:
    """b - A v."""
    return b - apply_saddle(op, v)


def block_norm2(v: BlockField) -> float:
    """Euclidean norm over all 2(N-1)^2 entries."""
    return float(np.sqrt(np.sum(v.y * v.y) + np.sum(v.p * v.p)))
