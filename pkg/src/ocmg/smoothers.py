"""Relaxation updates v <- v + omega * B^{-1} r for the saddle system.

Both smoothers solve their 2(N-1)^2 block system B w = r by eliminating
the first block row, which leaves one scalar problem in the adjoint
correction w_p followed by a cheap back-substitution for w_y.  Writing
r = (r_y, r_p), M for the optional {0,1} mask and D = diag(L) = 4/h^2:

  collective Jacobi, B = [[D, -M/alpha], [I, D]]:
      w_p = (D + D^{-1} M/alpha)^{-1} (r_p - D^{-1} r_y)     pointwise
      w_y = D^{-1} (r_y + (M.w_p)/alpha)

  mass Braess-Sarazin, B = [[Q^{-1}, -M/alpha], [I, L]]:
      (L + Q (M.))/alpha ... the Schur operator S w_p = r_p - Q r_y
      w_y = Q (r_y + (M.w_p)/alpha)

The Schur solve is where the two Braess-Sarazin variants differ:

  * BSR_EXACT runs preconditioned CG to a 1e-12 relative tolerance,
    preconditioned by the exact inverse of the UNMASKED Schur operator.
    That inverse is applied spectrally: the type-I discrete sine basis
    diagonalizes both L (eigenvalues (2 - 2cos(k pi/N))/h^2 summed over
    the two axes) and Q (eigenvalues (h^2/36) prod(4 + 2cos(k pi/N))),
    so one solve is two DSTs and a pointwise division.  Without a mask
    the preconditioner is exact and CG stops after one iteration.
  * IBSR runs a FIXED number of CG iterations (default 2) with the plain
    diagonal preconditioner diag(S) = 4/h^2 + (16 h^2/36) m / alpha.
    The iteration count is part of the method definition, not a
    tolerance: truncating the inner solve is what is being studied.

With a mask present the Schur operator is mildly nonsymmetric (Q M vs
M Q); CG is run unchanged, as a smoother only needs a rough solve, and
the breakdown guard reports any loss of positivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grid import BlockField, GridSpec, SaddleOperator, apply_laplacian, apply_mass


@dataclass(frozen=True)
class SmootherSpec:
    """Scheme kind plus damping and inner-solve policy.

    omega None means "resolved later": the multigrid hierarchy fills in
    the per-level optimum (gamma-dependent for cjr, fixed per q for the
    Braess-Sarazin variants).
    """

    kind: str  # "cjr" | "bsr" | "ibsr"
    omega: float | None = None
    pcg_iters: int = 2  # ibsr only
    exact_tol: float = 1e-12  # bsr only

    def __post_init__(self):
        if self.kind not in ("cjr", "bsr", "ibsr"):
            raise ValueError(f"unknown smoother kind {self.kind!r}")
        if self.omega is not None and self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.pcg_iters < 1:
            raise ValueError("pcg_iters must be >= 1")


@dataclass(frozen=True)
class PcgConfig:
    """rel_tol None selects fixed-count mode: exactly max_iters iterations."""

    max_iters: int
    rel_tol: float | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rel_tol is not None and not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")


class PcgBreakdownError(RuntimeError):
    """Nonpositive curvature <Ap, p> encountered: operator not SPD."""


def pcg(matvec, b: np.ndarray, cfg: PcgConfig, precond=None) -> np.ndarray:
    """Preconditioned conjugate gradients from a zero initial guess."""
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b)
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r) if precond is not None else r
    d = z.copy()
    rz = np.vdot(r, z)
    for _ in range(cfg.max_iters):
        ad = matvec(d)
        dad = np.vdot(d, ad)
        if dad <= 0.0:
            raise PcgBreakdownError(f"curvature <Ad, d> = {dad:.3e} <= 0")
        step = rz / dad
        x += step * d
        r -= step * ad
        norm_r = np.linalg.norm(r)
        if cfg.rel_tol is not None and norm_r <= cfg.rel_tol * norm_b:
            break
        if norm_r == 0.0:  # exact solve mid-run; continuing would divide by zero
            break
        z = precond(r) if precond is not None else r
        rz_new = np.vdot(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x


def cjr_apply(r: BlockField, op: SaddleOperator, omega: float) -> BlockField:
    """One collective Jacobi correction omega * B_J^{-1} r (pointwise 2x2 solves)."""
    d = 4.0 * op.grid.N ** 2
    m = 1.0 if op.mask is None else op.mask
    w_p = (r.p - r.y / d) / (d + m / (op.alpha * d))
    w_y = (r.y + m * w_p / op.alpha) / d
    return BlockField(omega * w_y, omega * w_p)


def schur_apply(w: np.ndarray, op: SaddleOperator) -> np.ndarray:
    """L w + Q (M.w)/alpha, the (masked) Braess-Sarazin Schur operator."""
    mw = w if op.mask is None else op.mask * w
    return apply_laplacian(w, op.grid) + apply_mass(mw, op.grid) / op.alpha


def schur_diag(op: SaddleOperator) -> np.ndarray:
    """Exact diagonal of the Schur operator, the IBSR preconditioner."""
    g = op.grid
    m = np.ones((g.m, g.m)) if op.mask is None else op.mask
    return 4.0 * g.N ** 2 + (16.0 * g.h ** 2 / 36.0) * m / op.alpha


class SchurSpectral:
    """Exact unmasked Schur inverse via the type-I discrete sine transform.

    Self-inverse orthonormal DSTs sandwich a pointwise division by the
    exact eigenvalues; also handy in tests, where discrete sine modes
    realize the Fourier symbols exactly at theta = (k pi/N, l pi/N).
    """

    def __init__(self, grid: GridSpec, alpha: float):
        k = np.arange(1, grid.N)
        c = np.cos(np.pi * k / grid.N)
        lap_1d = (2.0 - 2.0 * c) * grid.N ** 2
        mass_1d = (4.0 + 2.0 * c) * grid.h / 6.0
        self.eig = (lap_1d[:, None] + lap_1d[None, :]
                    + np.outer(mass_1d, mass_1d) / alpha)
        self.grid = grid

    def solve(self, b: np.ndarray) -> np.ndarray:
        bh = scipy.fft.dstn(b, type=1, norm="ortho")
        return scipy.fft.dstn(bh / self.eig, type=1, norm="ortho")

    @staticmethod
    def mode(grid: GridSpec, k: int, l: int) -> np.ndarray:
        """Discrete sine mode sin(k pi x2) sin(l pi x1) on the interior."""
        x = np.arange(1, grid.N) * grid.h
        return np.outer(np.sin(np.pi * k * x), np.sin(np.pi * l * x))


def bsr_apply(r: BlockField, op: SaddleOperator, spec: SmootherSpec,
              spectral: SchurSpectral | None = None) -> BlockField:
    """One Braess-Sarazin correction omega * B_m^{-1} r (exact or truncated)."""
    assert spec.kind in ("bsr", "ibsr")
    assert spec.omega is not None, "omega must be resolved before applying"
    rhs = r.p - apply_mass(r.y, op.grid)
    m = 1.0 if op.mask is None else op.mask
    matvec = lambda w: schur_apply(w, op)
    if spec.kind == "bsr":
        if spectral is None:
            spectral = SchurSpectral(op.grid, op.alpha)
        cfg = PcgConfig(max_iters=max(200, op.grid.m), rel_tol=spec.exact_tol)
        w_p = pcg(matvec, rhs, cfg, precond=spectral.solve)
    else:
        # The truncated solve is seeded with the diagonal-preconditioned
        # right-hand side; the fixed-count CG then runs on the residual
        # system, which is the usual shift for a nonzero initial guess.
        diag = schur_diag(op)
        w0 = rhs / diag
        cfg = PcgConfig(max_iters=spec.pcg_iters, rel_tol=None)
        w_p = w0 + pcg(matvec, rhs - matvec(w0), cfg, precond=lambda v: v / diag)
    w_y = apply_mass(r.y + m * w_p / op.alpha, op.grid)
    return BlockField(spec.omega * w_y, spec.omega * w_p)
