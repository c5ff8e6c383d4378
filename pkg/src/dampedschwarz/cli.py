"""Command line entry point: ``dampedschwarz <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .geometry import build_decomposition
from .mode_analysis import boundary_preset, convergence_factor_profile, physical_modes, scan_grid
from .model import PhysicalParams, compute_eta, imag_real_ratio
from .output import RHO_COLUMNS, Curve, emit_csv, emit_field_svg, emit_svg_lineplot, field_rows
from .sweep import ConfigError, SweepConfig, load_config, preset_panels, run_sweep

log = logging.getLogger("dampedschwarz")


def _params(args) -> PhysicalParams:
    return PhysicalParams(
        100.0 if args.omega is None else args.omega,
        0.0 if args.r is None else args.r,
        0.0 if args.gamma is None else args.gamma,
    )


def _fmt_c(z: complex) -> str:
    return f"{z.real:.10g}{z.imag:+.10g}i"


def cmd_eta(args) -> int:
    p = _params(args)
    c = compute_eta(p)
    print(f"omega = {p.omega:g}, r = {p.r:g}, gamma = {p.gamma:g} ({p.regime})")
    print(f"eta = {_fmt_c(c.eta)}")
    print(f"sqrt(eta) = {_fmt_c(c.sqrt_eta)}")
    print(f"rhs scale = {_fmt_c(c.rhs_scale)}")
    if p.regime in ("first-order", "viscoelastic"):
        print(f"Im/Re of -eta = {imag_real_ratio(p):.10g}")
    return 0


def _profile_rows(label, p, N, L, bc_name, xi):
    bc = boundary_preset(bc_name)
    pts = convergence_factor_profile(p, build_decomposition(N, L), bc, xi)
    return [
        {
            "preset": label, "bc": bc_name, "omega": p.omega, "r": p.r, "gamma": p.gamma,
            "N": N, "L_nominal": L, "L_effective": L, "xi": q.xi, "xi_over_omega": q.xi / p.omega,
            "rho": q.rho, "diverged": not math.isfinite(q.rho), "note": q.note,
        }
        for q in pts
    ]


def cmd_rho(args) -> int:
    p = _params(args)
    N = 2 if args.N is None else args.N
    L = 0.0 if args.L is None else args.L
    bc = args.bc or "waveguide"
    if args.modes == "physical":
        xi = physical_modes(p.omega)
    else:
        xi = scan_grid(p.omega, args.xi_max_ratio, args.xi_points)
    rows = _profile_rows("rho", p, N, L, bc, xi)
    worst = max(rows, key=lambda r: r["rho"])
    print(f"max rho = {worst['rho']:.6g} at xi/omega = {worst['xi_over_omega']:.4f} ({len(rows)} modes)")
    if args.out:
        meta = {"command": "rho", "omega": p.omega, "r": p.r, "gamma": p.gamma, "N": N, "L": L,
                "bc": bc, "modes": args.modes, "seed": args.seed}
        out = Path(args.out)
        emit_csv(rows, out / "rho.csv", RHO_COLUMNS, meta)
        emit_svg_lineplot(
            [Curve(f"N={N}, L={L:g}", [r["xi_over_omega"] for r in rows], [r["rho"] for r in rows])],
            out / "rho.svg", title=f"{bc}, omega={p.omega:g}, r={p.r:g}, gamma={p.gamma:g}",
            x_label="xi/omega", y_label="rho", logy=True, meta=meta,
        )
        print(f"wrote {out / 'rho.csv'} and {out / 'rho.svg'}")
    return 0


_OVERRIDES = {"omega": "omega", "r": "r", "gamma": "gamma", "N": "N", "L": "L", "bc": "bc",
              "xi_max_ratio": "xi_max_ratio", "xi_points": "xi_points", "modes": "modes", "seed": "seed"}


def _sweep_panels(args) -> list[SweepConfig]:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("sweep: give exactly one of --preset or --config")
    overrides = {k: getattr(args, a) for a, k in _OVERRIDES.items()}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.preset is not None:
        return preset_panels(args.preset, **overrides)
    panels = load_config(args.config)
    out = []
    for cfg in panels:
        kw = {k: v for k, v in overrides.items() if k != cfg.axis}
        if "L" in kw:
            kw["L_rule"] = "fixed"
        out.append(SweepConfig(**{**cfg.to_dict(), **kw, "values": cfg.values}))
    return out


def cmd_sweep(args) -> int:
    panels = _sweep_panels(args)
    results = run_sweep(panels, workers=args.workers)
    out = Path(args.out or "out")
    for cfg, curves in zip(panels, results):
        stem = f"{cfg.preset}_{cfg.panel}"
        meta = {"command": "sweep", **{k: v for k, v in cfg.to_dict().items() if k != "values"},
                "values": " ".join(f"{v:g}" for v in cfg.values)}
        rows = [row for curve in curves for row in curve]
        emit_csv(rows, out / f"{stem}.csv", RHO_COLUMNS, meta)
        plot = [
            Curve(cfg.label(v), [r["xi_over_omega"] for r in c], [r["rho"] for r in c])
            for v, c in zip(cfg.values, curves)
        ]
        emit_svg_lineplot(plot, out / f"{stem}.svg", title=f"{cfg.preset} {cfg.panel} ({cfg.bc})",
                          x_label="xi/omega", y_label="rho", logy=True, meta=meta)
        worst = max(r["rho"] for r in rows)
        print(f"{stem}: {len(cfg.values)} curves, {len(rows)} rows, max rho {worst:.4g}")
    print(f"wrote {2 * len(panels)} files to {out}")
    return 0


def cmd_greens(args) -> int:
    from .fd_solver import greens_field

    p = _params(args)
    bc = args.bc or "cavity"
    fld = greens_field(p, bc, tuple(args.source), n_interior=args.grid)
    out = Path(args.out or "out")
    stem = f"greens_{bc}"
    meta = {"command": "greens", **{k: v for k, v in fld.meta.items() if k != "source"},
            "source": f"{args.source[0]:g} {args.source[1]:g}", "seed": args.seed}
    emit_csv(field_rows(fld), out / f"{stem}.csv", ("x", "y", "re", "im", "abs"), meta)
    emit_field_svg(fld, out / f"{stem}_abs.svg", "abs", f"|u|, {bc}", meta)
    emit_field_svg(fld, out / f"{stem}_real.svg", "real", f"Re u, {bc}", meta)
    print(f"max |u| = {np.abs(fld.values).max():.6g}; wrote {stem}.csv, {stem}_abs.svg, {stem}_real.svg to {out}")
    return 0


def cmd_run_schwarz(args) -> int:
    from .schwarz_runner import per_mode_contraction, predicted_rates, run_schwarz

    p = _params(args)
    N = 2 if args.N is None else args.N
    h = 1.0 / (args.grid + 1)
    L = 4 * h if args.L is None else args.L
    bc = args.bc or "waveguide"
    seed = 0 if args.seed is None else args.seed
    rep = run_schwarz(p, build_decomposition(N, L), boundary_preset(bc), grid=args.grid,
                      max_iters=args.iters, seed=seed)
    meta = {"command": "run-schwarz", "omega": p.omega, "r": p.r, "gamma": p.gamma, "N": N,
            "L_nominal": L, "L_effective": rep.overlap_effective, "overlap_cells": rep.geometry.overlap_cells,
            "bc": bc, "grid": args.grid, "iterations": rep.iterations, "seed": seed}
    out = Path(args.out or "out")
    emit_csv([{"iteration": i, "norm": v} for i, v in enumerate(rep.norms)],
             out / "schwarz_norms.csv", ("iteration", "norm"), meta)
    status = "diverged" if rep.diverged else "ok"
    print(f"rate {rep.rate:.6g} over {rep.iterations} iterations ({status}); snapped L = {rep.overlap_effective:.6g}")
    if not rep.diverged and len(rep.norms) >= 11:
        modes = per_mode_contraction(rep, args.kmax)
        pred = predicted_rates(rep, [m.k for m in modes])
        rows = [{"k": m.k, "observed": m.rate, "predicted": q, "below_floor": m.below_floor}
                for m, q in zip(modes, pred)]
        emit_csv(rows, out / "schwarz_modes.csv", ("k", "observed", "predicted", "below_floor"), meta)
        for r in rows[:5]:
            print(f"  k={r['k']}: observed {r['observed']:.4f}, predicted {r['predicted']:.4f}")
    return 0


def cmd_validate(args) -> int:
    from .validation import run_all

    results = run_all(args.only)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega", type=float, help="angular frequency (default 100)")
    common.add_argument("--r", type=float, help="first-order damping")
    common.add_argument("--gamma", type=float, help="viscoelastic damping")
    common.add_argument("--N", type=int, help="number of strips")
    common.add_argument("--L", type=float, help="overlap width")
    common.add_argument("--bc", help="waveguide or cavity (greens also accepts free_space)")
    common.add_argument("--xi-max-ratio", type=float, default=None, help="scan xi/omega up to this value")
    common.add_argument("--xi-points", type=int, default=None, help="scan grid size")
    common.add_argument("--modes", choices=("physical", "scan"), default=None)
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, metavar="S")
    common.add_argument("--preset", metavar="NAME")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="dampedschwarz", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("eta", parents=[common], help="print eta, sqrt(eta) and the Im/Re ratio").set_defaults(fn=cmd_eta)
    sub.add_parser("rho", parents=[common], help="convergence factor profile").set_defaults(fn=cmd_rho)
    sw = sub.add_parser("sweep", parents=[common], help="figure preset or JSON config sweep")
    sw.add_argument("--config", help="JSON sweep config")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(fn=cmd_sweep)
    gr = sub.add_parser("greens", parents=[common], help="point-source field")
    gr.add_argument("--grid", type=int, default=255, help="interior points per direction")
    gr.add_argument("--source", type=float, nargs=2, default=(0.5, 0.5), metavar=("X", "Y"))
    gr.set_defaults(fn=cmd_greens)
    rs = sub.add_parser("run-schwarz", parents=[common], help="discrete parallel Schwarz iteration")
    rs.add_argument("--grid", type=int, default=255)
    rs.add_argument("--iters", type=int, default=60)
    rs.add_argument("--kmax", type=int, default=None)
    rs.set_defaults(fn=cmd_run_schwarz)
    va = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    va.add_argument("--only", type=int, nargs="+", metavar="K")
    va.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "rho":
        # sweep leaves these unset so presets keep their own values
        args.xi_max_ratio = 2.0 if args.xi_max_ratio is None else args.xi_max_ratio
        args.xi_points = 400 if args.xi_points is None else args.xi_points
        args.modes = args.modes or "scan"
    if args.preset is not None and args.command != "sweep":
        print("error: --preset only applies to sweep", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
