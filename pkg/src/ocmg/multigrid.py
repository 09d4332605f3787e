"""Geometric multigrid with coarsening by q in {2, 3, 4}.

Hierarchy invariants:

  * every coarse operator is the re-discretization of the saddle system
    with mesh step H = q h (never a Galerkin product);
  * coarsening continues while N is divisible by q and N/q stays at or
    above the coarsest size (default 8), giving the level chains
    256 -> 128 -> 64 -> 32 -> 16 -> 8   (q = 2)
    243 -> 81 -> 27 -> 9                (q = 3)
    256 -> 64 -> 16                     (q = 4);
  * active-set masks are carried down by full-weighting averaging, so a
    coarse Jacobian couples through the local free-set fraction in [0,1]
    rather than through a subsampled {0,1} pattern;
  * the collective Jacobi damping is recomputed per level from that
    level's h (gamma = h^2/(4 sqrt(alpha)) grows on coarse levels);
    the Braess-Sarazin damping is the fixed per-q constant.

Cycles use nu pre-smoothing steps and NO post-smoothing; a W-cycle
recurses twice where a V-cycle recurses once; the coarsest level is a
dense LU direct solve (assembled once per hierarchy).

Transfers are the tensor products of the 1D full-weighting weights
(q - |k|)/q^2, k = -(q-1)..(q-1), and of 1D linear interpolation with
weights (1 - k/q, k/q) between adjacent coarse nodes, boundary values
zero.  They are adjoint up to the fixed factor q^2:
<prolong(c), f> = q^2 <c, restrict(f)>.

The convergence factor of a solve stopped at iteration k is
rho = (||r_k|| / ||r_0||)^(1/k), measured from a seeded uniform(0,1)
random initial guess, matching the benchmark protocol reproduced here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import log

import numpy as np
import scipy.linalg

from .grid import (
    BlockField,
    GridSpec,
    SaddleOperator,
    block_norm2,
    residual,
)
from .lfa import LfaParams, bsr_damping, cjr_optimal
from .oracle import assemble
from .smoothers import SchurSpectral, SmootherSpec, bsr_apply, cjr_apply


@dataclass(frozen=True)
class CycleSpec:
    cycle: str = "W"
    nu_pre: int = 1
    tol: float = 1e-10
    max_iters: int = 100
    seed: int = 0

    nu_post = 0  # fixed: the scheme under study never post-smooths

    def __post_init__(self):
        if self.cycle not in ("V", "W"):
            raise ValueError(f"cycle must be 'V' or 'W', got {self.cycle!r}")
        if self.nu_pre < 1:
            raise ValueError("nu_pre must be >= 1")


@dataclass
class Level:
    grid: GridSpec
    op: SaddleOperator
    smoother: SmootherSpec  # omega resolved
    spectral: SchurSpectral | None  # exact-BSR inner preconditioner cache


@dataclass
class Hierarchy:
    levels: list[Level]
    q: int
    coarse_lu: tuple  # scipy (lu, piv) of the coarsest saddle matrix


@dataclass
class MgResult:
    v: BlockField
    iters: int
    rho: float
    history: list[float]
    converged: bool


def level_sizes(N: int, q: int, coarsest_n: int = 8) -> list[int]:
    """Subdivision counts per level under the coarsening rule."""
    sizes = [N]
    while sizes[-1] % q == 0 and sizes[-1] // q >= coarsest_n:
        sizes.append(sizes[-1] // q)
    return sizes


def _resolve_omega(spec: SmootherSpec, q: int, alpha: float, h: float) -> float:
    if spec.omega is not None:
        return spec.omega
    if spec.kind == "cjr":
        return cjr_optimal(LfaParams(q=q, alpha=alpha, h=h)).omega
    return bsr_damping(q)[0]


def build_hierarchy(N: int, q: int, alpha: float, smoother: SmootherSpec,
                    mask: np.ndarray | None = None,
                    coarsest_n: int = 8) -> Hierarchy:
    """Re-discretized level chain with per-level smoother parameters."""
    if q not in (2, 3, 4):
        raise ValueError(f"coarsening factor must be 2, 3 or 4, got {q}")
    sizes = level_sizes(N, q, coarsest_n)
    if len(sizes) < 2:
        raise ValueError(
            f"N={N} cannot be coarsened by q={q} (needs N divisible by q with "
            f"N/q >= {coarsest_n})")
    levels = []
    lvl_mask = mask
    for n in sizes:
        grid = GridSpec(n)
        op = SaddleOperator(grid, alpha, lvl_mask)
        spec = replace(smoother, omega=_resolve_omega(smoother, q, alpha, grid.h))
        spectral = SchurSpectral(grid, alpha) if spec.kind == "bsr" else None
        levels.append(Level(grid, op, spec, spectral))
        if lvl_mask is not None and n // q >= 2:
            # homogenized coarse coupling: full-weighting average of the
            # mask field; a subsampled {0,1} mask misrepresents thin
            # active-set boundaries and the 1/alpha-weighted correction
            # then amplifies instead of contracting
            lvl_mask = restrict(lvl_mask, q)
    coarse = levels[-1]
    A = assemble("saddle", coarse.grid, alpha=alpha, mask=coarse.op.mask)
    return Hierarchy(levels=levels, q=q, coarse_lu=scipy.linalg.lu_factor(A))


# ---------------------------------------------------------------- transfers

def restrict(fine: np.ndarray, q: int) -> np.ndarray:
    """Tensor-product full weighting onto the q-times-coarser grid."""
    m = fine.shape[0]
    N = m + 1
    if N % q != 0:
        raise ValueError(f"N={N} not divisible by q={q}")
    Nc = N // q
    if Nc < 2:
        raise ValueError(f"coarse grid N={Nc} has no interior points")
    F = np.zeros((N + 1, N + 1))
    F[1:N, 1:N] = fine
    w = (q - np.abs(np.arange(-(q - 1), q))) / q**2
    tmp = np.zeros((Nc - 1, N + 1))
    for k in range(-(q - 1), q):
        tmp += w[k + q - 1] * F[q + k:N - q + k + 1:q, :]
    out = np.zeros((Nc - 1, Nc - 1))
    for k in range(-(q - 1), q):
        out += w[k + q - 1] * tmp[:, q + k:N - q + k + 1:q]
    return out


def prolong(coarse: np.ndarray, q: int) -> np.ndarray:
    """Tensor-product linear interpolation onto the q-times-finer grid."""
    Nc = coarse.shape[0] + 1
    N = q * Nc
    C = np.zeros((Nc + 1, Nc + 1))
    C[1:Nc, 1:Nc] = coarse
    rows = np.arange(Nc) * q
    A = np.zeros((N + 1, Nc + 1))
    for k in range(q):
        t = k / q
        A[rows + k, :] = (1.0 - t) * C[:Nc, :] + t * C[1:, :]
    out = np.zeros((N + 1, N + 1))
    for k in range(q):
        t = k / q
        out[:, rows + k] = (1.0 - t) * A[:, :Nc] + t * A[:, 1:]
    return out[1:N, 1:N]


def _restrict_block(v: BlockField, q: int) -> BlockField:
    return BlockField(restrict(v.y, q), restrict(v.p, q))


def _prolong_block(v: BlockField, q: int) -> BlockField:
    return BlockField(prolong(v.y, q), prolong(v.p, q))


# ---------------------------------------------------------------- cycling

def _relax(r: BlockField, lev: Level) -> BlockField:
    if lev.smoother.kind == "cjr":
        return cjr_apply(r, lev.op, lev.smoother.omega)
    return bsr_apply(r, lev.op, lev.smoother, spectral=lev.spectral)


def _coarse_solve(hier: Hierarchy, b: BlockField) -> BlockField:
    m = hier.levels[-1].grid.m
    x = scipy.linalg.lu_solve(hier.coarse_lu,
                              np.concatenate([b.y.ravel(), b.p.ravel()]))
    n = m * m
    return BlockField(x[:n].reshape(m, m), x[n:].reshape(m, m))


def cycle(hier: Hierarchy, level: int, v: BlockField, b: BlockField,
          spec: CycleSpec) -> BlockField:
    """One recursive cycle from the given level; returns the updated iterate."""
    if level == len(hier.levels) - 1:
        return _coarse_solve(hier, b)
    lev = hier.levels[level]
    for _ in range(spec.nu_pre):
        v = v + _relax(residual(lev.op, b, v), lev)
    rc = _restrict_block(residual(lev.op, b, v), hier.q)
    ec = BlockField.zeros(hier.levels[level + 1].grid)
    for _ in range(1 if spec.cycle == "V" else 2):
        ec = cycle(hier, level + 1, ec, rc, spec)
    return v + _prolong_block(ec, hier.q)


def solve(hier: Hierarchy, b: BlockField, spec: CycleSpec,
          v0: BlockField | None = None) -> MgResult:
    """Cycle to tolerance from a seeded uniform(0,1) random initial guess.

    An explicit v0 overrides the random guess; correction equations are
    best started from zero so the relative tolerance is measured against
    the right-hand side rather than against random-iterate noise.
    """
    g = hier.levels[0].grid
    op = hier.levels[0].op
    if v0 is not None:
        v = v0.copy()
    else:
        rng = np.random.default_rng(spec.seed)
        v = BlockField(rng.uniform(0.0, 1.0, (g.m, g.m)),
                       rng.uniform(0.0, 1.0, (g.m, g.m)))
    r0 = block_norm2(residual(op, b, v))
    history = [r0]
    if r0 == 0.0:
        return MgResult(v, 0, 0.0, history, True)
    rel = 1.0
    k = 0
    for k in range(1, spec.max_iters + 1):
        v = cycle(hier, 0, v, b, spec)
        rn = block_norm2(residual(op, b, v))
        history.append(rn)
        rel = rn / r0
        if rel <= spec.tol or rel > 1e8:  # converged, or clearly diverging
            break
    rho = rel ** (1.0 / k) if k > 0 else 0.0
    return MgResult(v, k, rho, history, rel <= spec.tol)


def eta_ratio(rho_s: float, rho_j: float) -> float:
    """Work-equivalence exponent ln(rho_s)/ln(rho_j) for two factors in (0,1)."""
    if not (0.0 < rho_s < 1.0 and 0.0 < rho_j < 1.0):
        raise ValueError(f"factors must lie in (0,1), got {rho_s}, {rho_j}")
    return log(rho_s) / log(rho_j)
