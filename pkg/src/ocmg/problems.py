"""Benchmark problem data and plain-text field serialization.

Two stock data sets are provided.  The first is a manufactured pair

    y(x) = sin(2 pi x1) sin(2 pi x2) exp(x1 + x2)
    p(x) = sin(2 pi x1) sin(2 pi x2) exp(x1 - x2)

with the sources f, g chosen so that (y, p) solves the unconstrained
first-order system exactly; both factors are separable, so the analytic
Laplacians come from 1D second derivatives.  The second is a sparsity
benchmark with f = 0, an oscillatory target state, and box bounds -30/30.

Field files are line-oriented text: a header "N <value>" followed by one
"i j value" line per interior node, i the x1 index varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BlockField, GridSpec


@dataclass(frozen=True)
class ProblemData:
    f: np.ndarray  # state-equation source
    g: np.ndarray  # target state
    grid: GridSpec

    def __post_init__(self):
        self.grid.check_field(self.f)
        self.grid.check_field(self.g)


def _sep(grid: GridSpec, fac1, fac2) -> np.ndarray:
    # field[j-1, i-1] = fac1(i h) * fac2(j h); axis 0 runs along x2
    t = np.arange(1, grid.N) * grid.h
    return np.outer(fac2(t), fac1(t))


def _u(t):
    return np.sin(2 * np.pi * t) * np.exp(t)


def _upp(t):
    return ((1 - 4 * np.pi**2) * np.sin(2 * np.pi * t)
            + 4 * np.pi * np.cos(2 * np.pi * t)) * np.exp(t)


def _v(t):
    return np.sin(2 * np.pi * t) * np.exp(-t)


def _vpp(t):
    return ((1 - 4 * np.pi**2) * np.sin(2 * np.pi * t)
            - 4 * np.pi * np.cos(2 * np.pi * t)) * np.exp(-t)


def example1_fields(grid: GridSpec, alpha: float) -> tuple[ProblemData, BlockField]:
    """Manufactured sources and the exact continuous solution samples."""
    ystar = _sep(grid, _u, _u)
    pstar = _sep(grid, _u, _v)
    lap_y = _sep(grid, _upp, _u) + _sep(grid, _u, _upp)
    lap_p = _sep(grid, _upp, _v) + _sep(grid, _u, _vpp)
    f = -lap_y - pstar / alpha
    g = -lap_p + ystar
    return ProblemData(f, g, grid), BlockField(ystar, pstar)


def example2_fields(grid: GridSpec) -> ProblemData:
    """Sparsity benchmark: zero source, oscillatory target state."""
    f = np.zeros((grid.m, grid.m))
    g = _sep(grid,
             lambda t: np.sin(2 * np.pi * t) * np.exp(2 * t),
             lambda t: np.sin(2 * np.pi * t)) / 6.0
    return ProblemData(f, g, grid)


def discrete_norm(e: np.ndarray, grid: GridSpec) -> float:
    """Mesh-scaled 2-norm h*||e||_2, the discrete L2 norm on the grid."""
    return grid.h * float(np.linalg.norm(e.ravel()))


def dump_field(path, field: np.ndarray, grid: GridSpec) -> None:
    grid.check_field(field)
    with open(path, "w") as fh:
        fh.write(f"N {grid.N}\n")
        for j in range(1, grid.N):
            for i in range(1, grid.N):
                fh.write(f"{i} {j} {field[j - 1, i - 1]:.17g}\n")


def load_field(path) -> tuple[GridSpec, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "N":
            raise ValueError(f"bad field header in {path}")
        grid = GridSpec(int(header[1]))
        out = np.full((grid.m, grid.m), np.nan)
        count = 0
        for line in fh:
            if not line.strip():
                continue
            i_s, j_s, val = line.split()
            out[int(j_s) - 1, int(i_s) - 1] = float(val)
            count += 1
    if count != grid.m * grid.m or np.isnan(out).any():
        raise ValueError(f"field file {path} does not cover the grid")
    return grid, out
