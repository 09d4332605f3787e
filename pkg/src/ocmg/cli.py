"""Command line driver.

Four subcommands:

    lfa    two-grid smoothing-factor report (closed form vs sampled)
    mg     one multigrid solve with a residual-history CSV
    ssn    constrained sparse-control solve with field dumps
    repro  benchmark tables / damping sweep as CSV

Exit status is 0 on success, 1 on validation errors (bad flags, bad
config, incompatible N and q), 2 on solver failures (divergence, stalled
Newton iteration, PCG breakdown).  A config file holds "key = value"
lines; explicit flags win over config values, config values win over
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .grid import BlockField, GridSpec
from .lfa import LfaParams, bsr_damping, cjr_optimal, sampled_optimal
from .multigrid import CycleSpec, build_hierarchy, solve
from .problems import ProblemData, dump_field, example1_fields, example2_fields, load_field
from .smoothers import PcgBreakdownError, SmootherSpec
from .ssn import ControlParams, SolverError, sparsity_fractions, ssn_solve

SCHEMES = ("cjr", "bsr", "ibsr")
CYCLES = ("V", "W")

# benchmark mesh per coarsening ratio: powers of q with h ~ 1/256
TABLE_SIZES = {2: 256, 3: 243, 4: 256}
TABLE_ALPHA = 1e-6

_FIELD_TYPES = {
    "scheme": str, "cycle": str, "out": str, "f_file": str, "g_file": str,
    "N": int, "q": int, "nu": int, "seed": int, "pcg_iters": int,
    "alpha": float, "beta": float, "u0": float, "u1": float,
    "tol": float, "h": float,
}

_DEFAULTS = {
    "lfa": {"scheme": "cjr", "q": 2, "alpha": TABLE_ALPHA, "h": 1.0 / 256},
    "mg": {"scheme": "cjr", "q": 2, "N": 256, "alpha": TABLE_ALPHA,
           "cycle": "W", "nu": 1, "tol": 1e-10, "seed": 0, "pcg_iters": 2},
    "ssn": {"scheme": "ibsr", "q": 2, "N": 128, "alpha": 1e-4, "beta": 1e-3,
            "u0": -30.0, "u1": 30.0, "cycle": "W", "nu": 2, "tol": 1e-10,
            "seed": 0, "pcg_iters": 2},
    "repro": {"out": "."},
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; remap to the validation code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocmg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    lfa = sub.add_parser("lfa", help="smoothing factor report")
    lfa.add_argument("--scheme", choices=("cjr", "bsr"))
    lfa.add_argument("--q", type=int)
    lfa.add_argument("--alpha", type=float)
    lfa.add_argument("--h", type=float)
    lfa.add_argument("--out")
    lfa.add_argument("--config")

    mg = sub.add_parser("mg", help="single multigrid solve")
    for cmd in (mg, sub.add_parser("ssn", help="constrained control solve")):
        cmd.add_argument("--scheme", choices=SCHEMES)
        cmd.add_argument("--q", type=int)
        cmd.add_argument("--N", type=int)
        cmd.add_argument("--alpha", type=float)
        cmd.add_argument("--cycle", choices=CYCLES)
        cmd.add_argument("--nu", type=int)
        cmd.add_argument("--tol", type=float)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--pcg-iters", type=int, dest="pcg_iters")
        cmd.add_argument("--out")
        cmd.add_argument("--config")
        if cmd.prog.endswith("ssn"):
            cmd.add_argument("--beta", type=float)
            cmd.add_argument("--u0", type=float)
            cmd.add_argument("--u1", type=float)

    repro = sub.add_parser("repro", help="benchmark CSVs")
    repro.add_argument("target", choices=("table1", "table2", "sweep"))
    repro.add_argument("--out")
    return parser


def read_config(path: str) -> dict:
    """Parse "key = value" lines; '#' starts a comment."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key or not value.strip():
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                table[key] = _FIELD_TYPES[key](value.strip())
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: bad value for {key!r}: {value.strip()!r}"
                ) from None
    return table


def _merge(args: argparse.Namespace) -> dict:
    opts = vars(args).copy()
    if opts.get("config"):
        for key, value in read_config(opts["config"]).items():
            if opts.get(key) is None:
                opts[key] = value
    for key, value in _DEFAULTS[opts["command"]].items():
        if opts.get(key) is None:
            opts[key] = value
    return opts


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _validate_common(opts: dict, schemes=SCHEMES) -> None:
    # config values bypass argparse choices, so re-check everything
    _check(opts["scheme"] in schemes,
           f"scheme must be one of {', '.join(schemes)}, got {opts['scheme']!r}")
    _check(opts["q"] in (2, 3, 4), f"q must be 2, 3 or 4, got {opts['q']}")
    if "cycle" in opts:
        _check(opts["cycle"] in CYCLES, f"cycle must be V or W, got {opts['cycle']!r}")
        _check(opts["nu"] >= 1, f"nu must be at least 1, got {opts['nu']}")
        _check(opts["tol"] > 0, f"tol must be positive, got {opts['tol']}")
        _check(opts["pcg_iters"] >= 1,
               f"pcg-iters must be at least 1, got {opts['pcg_iters']}")
    _check(opts["alpha"] > 0, f"alpha must be positive, got {opts['alpha']}")


def _load_problem(opts: dict, fallback) -> ProblemData:
    """Example data unless a config supplied both field files."""
    f_file, g_file = opts.get("f_file"), opts.get("g_file")
    if f_file is None and g_file is None:
        return fallback()
    _check(f_file is not None and g_file is not None,
           "f_file and g_file must be given together")
    gf, f = load_field(f_file)
    gg, g = load_field(g_file)
    _check(gf.N == gg.N == opts["N"],
           f"field files are on N={gf.N}/{gg.N}, expected N={opts['N']}")
    return ProblemData(f, g, gf)


def cmd_lfa(opts: dict) -> int:
    _validate_common(opts, schemes=("cjr", "bsr"))
    _check(opts["h"] > 0, f"h must be positive, got {opts['h']}")
    params = LfaParams(q=opts["q"], alpha=opts["alpha"], h=opts["h"])
    if opts["scheme"] == "cjr":
        closed = cjr_optimal(params)
        omega_c, mu_c, theta_c = closed.omega, closed.mu, closed.theta
    else:
        omega_c, mu_c = bsr_damping(opts["q"])
        theta_c = None
    sampled = sampled_optimal(opts["scheme"], params)

    print(f"scheme={opts['scheme']} q={opts['q']} "
          f"alpha={opts['alpha']:g} h={opts['h']:.17g}")
    theta_txt = "" if theta_c is None else \
        f" theta=({theta_c[0]:.6f}, {theta_c[1]:.6f})"
    print(f"closed-form: omega={omega_c:.8f} mu={mu_c:.8f}{theta_txt}")
    print(f"sampled:     omega={sampled.omega:.8f} mu={sampled.mu:.8f}"
          f" theta=({sampled.theta[0]:.6f}, {sampled.theta[1]:.6f})")
    print(f"difference:  |domega|={abs(sampled.omega - omega_c):.3e}"
          f" |dmu|={abs(sampled.mu - mu_c):.3e}")

    if opts.get("out"):
        with open(opts["out"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "q", "alpha", "h", "omega_closed",
                        "mu_closed", "omega_sampled", "mu_sampled",
                        "theta1", "theta2"])
            w.writerow([opts["scheme"], opts["q"], f"{opts['alpha']:.17g}",
                        f"{opts['h']:.17g}", f"{omega_c:.17g}", f"{mu_c:.17g}",
                        f"{sampled.omega:.17g}", f"{sampled.mu:.17g}",
                        f"{sampled.theta[0]:.17g}", f"{sampled.theta[1]:.17g}"])
    return 0


def _write_history(stream, history: list[float]) -> None:
    w = csv.writer(stream)
    w.writerow(["iter", "residual_norm", "rel_residual"])
    for k, rn in enumerate(history):
        w.writerow([k, f"{rn:.17g}", f"{rn / history[0]:.17g}"])


def cmd_mg(opts: dict) -> int:
    _validate_common(opts)
    grid = GridSpec(opts["N"])
    data = _load_problem(opts, lambda: example1_fields(grid, opts["alpha"])[0])
    smoother = SmootherSpec(opts["scheme"], pcg_iters=opts["pcg_iters"])
    hier = build_hierarchy(opts["N"], opts["q"], opts["alpha"], smoother)
    spec = CycleSpec(cycle=opts["cycle"], nu_pre=opts["nu"],
                     tol=opts["tol"], seed=opts["seed"])
    res = solve(hier, BlockField(data.f, data.g), spec)

    print(f"scheme={opts['scheme']} q={opts['q']} N={opts['N']} "
          f"alpha={opts['alpha']:g} cycle={opts['cycle']} nu={opts['nu']}")
    print(f"converged={res.converged} iters={res.iters} rho={res.rho:.3f}")
    if opts.get("out"):
        with open(opts["out"], "w", newline="", encoding="utf-8") as fh:
            _write_history(fh, res.history)
    else:
        _write_history(sys.stdout, res.history)
    if not res.converged:
        print("ocmg: multigrid did not reach tolerance", file=sys.stderr)
        return 2
    return 0


def cmd_ssn(opts: dict) -> int:
    _validate_common(opts)
    _check(opts["beta"] >= 0, f"beta must be nonnegative, got {opts['beta']}")
    grid = GridSpec(opts["N"])
    data = _load_problem(opts, lambda: example2_fields(grid))
    cp = ControlParams(opts["alpha"], opts["beta"], opts["u0"], opts["u1"])
    smoother = SmootherSpec(opts["scheme"], pcg_iters=opts["pcg_iters"])
    spec = CycleSpec(cycle=opts["cycle"], nu_pre=opts["nu"],
                     tol=opts["tol"], seed=opts["seed"])

    print(f"scheme={opts['scheme']} q={opts['q']} N={opts['N']} "
          f"alpha={opts['alpha']:g} beta={opts['beta']:g} "
          f"u0={opts['u0']:g} u1={opts['u1']:g} "
          f"cycle={opts['cycle']} nu={opts['nu']}")
    try:
        res = ssn_solve(data, cp, opts["q"], smoother, spec, tol=opts["tol"])
    except SolverError as exc:
        print(f"ocmg: {exc}", file=sys.stderr)
        if opts.get("out") and exc.state is not None:
            _dump_state(opts["out"], exc.state, grid)
        return 2

    zero, active = sparsity_fractions(res.u, cp)
    print(f"converged={res.converged} newton_iters={res.iters}")
    print(f"baseline_mg_iters={res.baseline_iters}")
    print("jacobian_mg_iters=" + ",".join(str(k) for k in res.mg_iters))
    print(f"zero_fraction={zero:.6f} active_fraction={active:.6f}")
    if opts.get("out"):
        _dump_state(opts["out"], res, grid)
    return 0


def _dump_state(outdir: str, state, grid: GridSpec) -> None:
    os.makedirs(outdir, exist_ok=True)
    for name, field in (("y", state.y), ("p", state.p), ("u", state.u)):
        dump_field(os.path.join(outdir, f"{name}.txt"), field, grid)
    print(f"wrote y.txt p.txt u.txt -> {outdir}")


# ---------------------------------------------------------------------------
# repro: benchmark cell grids


def table1_cells() -> list[dict]:
    return [dict(scheme="cjr", q=q, N=TABLE_SIZES[q], alpha=TABLE_ALPHA,
                 nu=nu, cycle=c, pcg_iters=2)
            for q in (2, 3, 4) for nu in (1, 2, 3) for c in ("W", "V")]


def table2_cells() -> list[dict]:
    cells = [dict(scheme="bsr", q=q, N=TABLE_SIZES[q], alpha=TABLE_ALPHA,
                  nu=nu, cycle=c, pcg_iters=2)
             for q in (2, 3, 4) for nu in (1, 2, 3) for c in ("W", "V")]
    cells += [dict(scheme="ibsr", q=q, N=TABLE_SIZES[q], alpha=TABLE_ALPHA,
                   nu=1, cycle=c, pcg_iters=k)
              for q in (2, 3, 4) for k in (1, 2, 3, 4) for c in ("W", "V")]
    return cells


def sweep_cells() -> list[dict]:
    alphas = [10.0 ** (-e) for e in range(2, 13, 2)]
    return [dict(scheme=s, q=q, N=TABLE_SIZES[q], alpha=a,
                 nu=1, cycle="W", pcg_iters=2)
            for s in ("cjr", "ibsr") for q in (2, 3, 4) for a in alphas]


def _mu_pred(cell: dict) -> float:
    if cell["scheme"] == "cjr":
        params = LfaParams(q=cell["q"], alpha=cell["alpha"], h=1.0 / cell["N"])
        return cjr_optimal(params).mu ** cell["nu"]
    return bsr_damping(cell["q"])[1] ** cell["nu"]


def _measure_cell(cell: dict) -> float:
    """One benchmark solve; failures turn into nan so the table survives."""
    try:
        grid = GridSpec(cell["N"])
        data, _ = example1_fields(grid, cell["alpha"])
        smoother = SmootherSpec(cell["scheme"], pcg_iters=cell["pcg_iters"])
        hier = build_hierarchy(cell["N"], cell["q"], cell["alpha"], smoother)
        res = solve(hier, BlockField(data.f, data.g),
                    CycleSpec(cycle=cell["cycle"], nu_pre=cell["nu"], seed=0))
        return res.rho
    except Exception as exc:  # noqa: BLE001 - isolate per-cell failures
        print(f"ocmg: cell {cell} failed: {exc}", file=sys.stderr)
        return float("nan")


def run_cells(cells: list[dict], workers: int = 1) -> list[dict]:
    """Measure every cell, attach predictions, return sorted rows."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rhos = list(pool.map(_measure_cell, cells))
    else:
        rhos = [_measure_cell(c) for c in cells]
    rows = [dict(cell, mu_pred=_mu_pred(cell), rho_measured=rho)
            for cell, rho in zip(cells, rhos)]
    rows.sort(key=lambda r: (r["scheme"], r["q"], r["nu"], r["cycle"],
                             r["pcg_iters"], -r["alpha"]))
    return rows


def write_rows(path: str, rows: list[dict], with_alpha: bool = False) -> None:
    header = ["q", "N", "scheme", "nu", "cycle", "mu_pred",
              "rho_measured", "pcg_iters"]
    if with_alpha:
        header.append("alpha")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            row = [r["q"], r["N"], r["scheme"], r["nu"], r["cycle"],
                   f"{r['mu_pred']:.3f}", f"{r['rho_measured']:.3f}",
                   r["pcg_iters"]]
            if with_alpha:
                row.append(f"{r['alpha']:.17g}")
            w.writerow(row)


def cmd_repro(opts: dict) -> int:
    workers = int(os.environ.get("OCMG_WORKERS", "1"))
    _check(workers >= 1, f"OCMG_WORKERS must be at least 1, got {workers}")
    target = opts["target"]
    cells = {"table1": table1_cells,
             "table2": table2_cells,
             "sweep": sweep_cells}[target]()
    rows = run_cells(cells, workers=workers)
    os.makedirs(opts["out"], exist_ok=True)
    path = os.path.join(opts["out"], f"{target}.csv")
    write_rows(path, rows, with_alpha=(target == "sweep"))
    bad = sum(1 for r in rows if np.isnan(r["rho_measured"]))
    print(f"wrote {len(rows)} rows -> {path}" +
          (f" ({bad} failed cells recorded as nan)" if bad else ""))
    return 0


_HANDLERS = {"lfa": cmd_lfa, "mg": cmd_mg, "ssn": cmd_ssn, "repro": cmd_repro}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _merge(args)
        return _HANDLERS[opts["command"]](opts)
    except (OSError, ValueError) as exc:
        print(f"ocmg: {exc}", file=sys.stderr)
        return 1
    except (SolverError, PcgBreakdownError, np.linalg.LinAlgError) as exc:
        print(f"ocmg: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
