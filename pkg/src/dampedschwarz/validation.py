"""Acceptance suite: ten numbered checks with their tolerances and time limits.

Each check returns a :class:`CheckResult`; a check whose runtime exceeds its
limit fails even if its numbers pass.
"""

from __future__ import annotations

import cmath
import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fd_solver import Grid2D, GridFunction, assemble, boundary_spec, build_rhs, greens_field, solve
from .geometry import build_decomposition
from .mode_analysis import (
    CAVITY,
    WAVEGUIDE,
    assemble_iteration_matrix,
    boundary_preset,
    convergence_factor_profile,
    make_mode,
    max_mode_rho,
    physical_modes,
    scan_grid,
)
from .model import PhysicalParams, RegimeWarning, compute_eta, imag_real_ratio, zeroth_order_approx
from .schwarz_runner import per_mode_contraction, predicted_rates, run_schwarz
from .spectra import power_iteration, spectral_radius

__all__ = ["CheckResult", "CHECKS", "run_check", "run_all", "format_result"]


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def format_result(res: CheckResult) -> str:
    return f"[{res.status}] {res.number:2d} {res.name} ({res.elapsed:.1f}s / {res.limit:.0f}s): {res.detail}"


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


# 1 -------------------------------------------------------------------------


def check_identities():
    errs = {}
    eta = compute_eta(PhysicalParams(100.0, r=1.0)).eta
    errs["eta(100,1,0)"] = abs(eta - complex(-10000.0, 100.0))
    errs["ratio first-order"] = abs(imag_real_ratio(PhysicalParams(100.0, r=1.0)) + 0.01)
    errs["ratio viscoelastic"] = abs(imag_real_ratio(PhysicalParams(100.0, gamma=1e-4)) + 0.01)
    errs["ratio w=50 g=0.003"] = abs(imag_real_ratio(PhysicalParams(50.0, gamma=0.003)) + 0.15)
    ok = all(v <= 1e-12 for v in errs.values())

    # branch: s**2 = eta, Re s >= 0, undamped s = +i omega
    branch_ok = True
    for omega in (1.0, 25.0, 100.0, 400.0):
        for r, g in ((0.0, 0.0), (1.0, 0.0), (0.0, 1e-4), (10.0, 1e-3)):
            c = compute_eta(PhysicalParams(omega, r, g))
            branch_ok &= abs(c.sqrt_eta**2 - c.eta) <= 1e-12 * abs(c.eta)
            branch_ok &= c.sqrt_eta.real >= 0.0
            if r == g == 0.0:
                branch_ok &= c.sqrt_eta == complex(0.0, omega)

    p = PhysicalParams(100.0, gamma=1e-4)
    exact = p.omega**2 / (1 + 1j * p.omega * p.gamma)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RegimeWarning)
        approx = zeroth_order_approx(p, "small")
    approx_err = _rel(approx, exact)
    ok = ok and branch_ok and approx_err <= 1e-3
    worst = max(errs.values())
    return ok, f"max identity error {worst:.2e}; branch ok={branch_ok}; small-regime rel err {approx_err:.2e}"


# 2 -------------------------------------------------------------------------

POWER = 64
POWER_ITERS = 5000
POWER_RTOL = 1e-10
SEEDS = (0, 1, 2)


def _power_radius(M):
    """Power-iteration radius with seed retries; ``None`` if it never converges."""
    for seed in SEEDS:
        res = power_iteration(M, iters=POWER_ITERS, seed=seed, power=POWER, rtol=POWER_RTOL)
        if res.converged:
            return res.radius
    return None


def _assembled_candidates(rng):
    from .sweep import PRESETS

    names = sorted(PRESETS)
    while True:
        panels = PRESETS[names[rng.integers(len(names))]]()
        cfg = panels[rng.integers(len(panels))]
        value = cfg.values[rng.integers(len(cfg.values))]
        params, N, L = cfg.point(value)
        xi = float(rng.choice(physical_modes(params.omega)))
        mode = make_mode(xi, compute_eta(params), build_decomposition(N, L), boundary_preset(cfg.bc))
        yield assemble_iteration_matrix(mode)


def check_eigensolver(n_random=100, n_assembled=50, seed=20240):
    rng = np.random.default_rng(seed)
    worst_r = 0.0
    random_fail = 0
    for _ in range(n_random):
        n = int(rng.integers(2, 51))
        M = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)
        p = _power_radius(M)
        if p is None:
            random_fail += 1
            continue
        worst_r = max(worst_r, _rel(p, spectral_radius(M)))

    # a dominant eigenvalue of multiplicity > 1 with distinct phases stops
    # power iteration from settling; such draws are skipped and counted
    worst_a, used, skipped = 0.0, 0, 0
    for M in _assembled_candidates(rng):
        if used == n_assembled:
            break
        if skipped > 10 * n_assembled:
            break
        p = _power_radius(M)
        if p is None:
            skipped += 1
            continue
        rho = spectral_radius(M)
        worst_a = max(worst_a, _rel(p, rho) if rho > 0 else abs(p))
        used += 1
    ok = random_fail == 0 and worst_r <= 1e-6 and used == n_assembled and worst_a <= 1e-6
    return ok, (
        f"random: {n_random - random_fail}/{n_random} compared, max rel diff {worst_r:.1e}; "
        f"assembled: {used}/{n_assembled} compared, max rel diff {worst_a:.1e}, "
        f"{skipped} skipped (power iteration not converged)"
    )


# 3 -------------------------------------------------------------------------


def check_cavity_divergence():
    p = PhysicalParams(100.0)
    rhos = {}
    for N in (2, 8):
        for L in (0.0, 1 / 300):
            rhos[(N, L)] = max_mode_rho(p, build_decomposition(N, L), CAVITY)
    modal_ok = all(v >= 0.999 for v in rhos.values())
    rep = run_schwarz(p, build_decomposition(8, 1 / 300), CAVITY, grid=255, max_iters=120, seed=0)
    discrete_ok = rep.diverged or rep.rate >= 0.99
    low = min(rhos.values())
    return modal_ok and discrete_ok, (
        f"min max-mode rho {low:.4f}; discrete rate {rep.rate:.4f}, diverged={rep.diverged}, "
        f"snapped L={rep.overlap_effective:.5f}"
    )


# 4 -------------------------------------------------------------------------


def check_damping_monotone():
    omega = 100.0
    xi = scan_grid(omega)
    worst, where = 0.0, None
    for L in (0.0, 1 / 300):
        d = build_decomposition(2, L)
        prof = {
            r: np.array([q.rho for q in convergence_factor_profile(PhysicalParams(omega, r), d, WAVEGUIDE, xi)])
            for r in (0.0, 0.1, 1.0, 10.0)
        }
        for hi, lo in ((0.0, 0.1), (0.1, 1.0), (1.0, 10.0)):
            excess = prof[lo] - prof[hi] - 1e-12
            i = int(np.argmax(excess))
            if excess[i] > worst:
                worst, where = float(excess[i]), (L, lo, hi, xi[i] / omega)
    pointwise_ok = worst <= 0.0

    d = build_decomposition(2, 1 / 300)
    rs = np.array([10.0, 30.0, 100.0, 300.0])
    logm = np.log([max_mode_rho(PhysicalParams(omega, r), d, WAVEGUIDE, xi) for r in rs])
    decay_ok = bool(np.all(np.diff(logm) < 0))
    coef, res, *_ = np.polyfit(np.sqrt(rs), logm, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(rs)) if len(res) else 0.0
    detail = (
        f"log max-rho vs sqrt(r) slope {coef[0]:.4f}, fit rms residual {rms:.3f}, monotone={decay_ok}; "
    )
    if pointwise_ok:
        detail += "pointwise ordering holds"
    else:
        L, lo, hi, ratio = where
        detail += (
            f"pointwise ordering violated by {worst:.3f}: rho(r={lo:g}) > rho(r={hi:g}) "
            f"at xi/omega={ratio:.4f}, L={L:.5f}"
        )
    return pointwise_ok and decay_ok, detail


# 5 -------------------------------------------------------------------------


def check_gamma_r_correspondence():
    omega = 100.0
    d = build_decomposition(2, 0.0)
    xi = scan_grid(omega)
    a = np.array([q.rho for q in convergence_factor_profile(PhysicalParams(omega, gamma=1e-4), d, WAVEGUIDE, xi)])
    b = np.array([q.rho for q in convergence_factor_profile(PhysicalParams(omega, r=1.0), d, WAVEGUIDE, xi)])
    diff = float(np.max(np.abs(a - b)))
    return diff < 0.05, f"max |rho(gamma=1e-4) - rho(r=1)| = {diff:.4f}"


# 6 -------------------------------------------------------------------------


def check_wavenumber_robustness():
    omegas = (50.0, 100.0, 200.0)
    damped, undamped = [], []
    for omega in omegas:
        d = build_decomposition(2, 1.0 / (3.0 * omega))
        damped.append(max_mode_rho(PhysicalParams(omega, r=1.0), d, WAVEGUIDE))
        undamped.append(max_mode_rho(PhysicalParams(omega), d, WAVEGUIDE))
    spread = max(damped) / min(damped)
    larger = all(u > v or not math.isfinite(u) for u, v in zip(undamped, damped))
    return spread < 1.25 and larger, (
        "r=1: " + ", ".join(f"{v:.3f}" for v in damped) + f" (spread {spread:.3f}); "
        "r=0: " + ", ".join(f"{v:.3f}" for v in undamped)
    )


# 7 -------------------------------------------------------------------------


def check_n_scaling():
    p = PhysicalParams(100.0, gamma=1e-3)
    rho = {N: max_mode_rho(p, build_decomposition(N, 0.1 / N), WAVEGUIDE) for N in (4, 8, 16)}
    ratios = [(1 - rho[2 * N]) / (1 - rho[N]) for N in (4, 8)]
    ok = all(0.3 <= q <= 0.8 for q in ratios)
    return ok, (
        "rho " + ", ".join(f"N={N}: {v:.3f}" for N, v in rho.items())
        + "; ratios " + ", ".join(f"{q:.3f}" for q in ratios)
    )


# 8 -------------------------------------------------------------------------


def check_cross_validation(n_interior=255, iters=60):
    p = PhysicalParams(20.0, r=1.0)
    h = 1.0 / (n_interior + 1)
    rep = run_schwarz(p, build_decomposition(2, 4 * h), WAVEGUIDE, grid=n_interior, max_iters=iters, seed=0)
    rates = per_mode_contraction(rep, kmax=5)
    pred = predicted_rates(rep, [m.k for m in rates])
    mode_err = [abs(m.rate - q) / q for m, q in zip(rates, pred)]
    overall = float(max(predicted_rates(rep, range(1, 41))))
    overall_err = abs(rep.rate - overall) / overall
    ok = max(mode_err) <= 0.10 and overall_err <= 0.10
    return ok, (
        "per-mode rel err " + ", ".join(f"{e:.3f}" for e in mode_err)
        + f"; overall {rep.rate:.4f} vs {overall:.4f} (rel {overall_err:.4f})"
    )


# 9 -------------------------------------------------------------------------

RING_WIDTH = 0.1
SOURCE_RADIUS = 0.1


def boundary_ratio(field, source=(0.5, 0.5)) -> float:
    """Max ``|u|`` within ``RING_WIDTH`` of the boundary over max ``|u|`` near the source."""
    u = np.abs(field.to_full())
    n = u.shape[0]
    t = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    wall = np.minimum(np.minimum(X, 1 - X), np.minimum(Y, 1 - Y))
    near = np.hypot(X - source[0], Y - source[1]) <= SOURCE_RADIUS
    return float(u[wall <= RING_WIDTH].max() / u[near].max())


def check_greens_localisation(n_interior=255):
    cases = {"undamped": PhysicalParams(100.0), "r=1": PhysicalParams(100.0, r=1.0),
             "gamma=0.003": PhysicalParams(100.0, gamma=0.003)}
    ok = True
    parts = []
    for bc in ("cavity", "waveguide"):
        q = {k: boundary_ratio(greens_field(p, bc, n_interior=n_interior)) for k, p in cases.items()}
        ok &= q["r=1"] < q["undamped"] and q["gamma=0.003"] < q["undamped"]
        parts.append(f"{bc}: " + ", ".join(f"{k} {v:.3g}" for k, v in q.items()))
    return ok, "; ".join(parts)


# 10 ------------------------------------------------------------------------


def manufactured_error(bc: str, n_interior: int, params=PhysicalParams(10.0, r=1.0)) -> float:
    """Max nodal error for a smooth exact solution with the given outer conditions."""
    coeff = compute_eta(params)
    eta, s = coeff.eta, coeff.sqrt_eta
    grid = Grid2D(n_interior, boundary_spec(bc))
    if bc == "cavity":
        def exact(x, y):
            return np.sin(np.pi * x) * np.sin(2 * np.pi * y) * (1 + 0.5j)
        lap = -5 * np.pi**2
        data = None
    elif bc == "waveguide":
        kappa = 3.0

        def exact(x, y):
            return np.exp(1j * kappa * x) * np.sin(2 * np.pi * y)
        lap = -(kappa**2 + 4 * np.pi**2)
        # d_n u + s u with outward normals -x at x=0 and +x at x=1
        data = {
            "left": lambda y: (s - 1j * kappa) * np.sin(2 * np.pi * y),
            "right": lambda y: (s + 1j * kappa) * cmath.exp(1j * kappa) * np.sin(2 * np.pi * y),
        }
    else:
        raise ValueError(f"no manufactured solution for {bc!r}")
    # lap u - eta u = -rhs_scale f
    src = GridFunction(lambda x, y: -(lap - eta) * exact(x, y) / coeff.rhs_scale)
    u = solve(assemble(grid, coeff), build_rhs(grid, coeff, src, data))
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    return float(np.abs(u - exact(X, Y)).max())


def check_fd_order(grids=(63, 127, 255)):
    orders = {}
    for bc in ("cavity", "waveguide"):
        errs = [manufactured_error(bc, n) for n in grids]
        orders[bc] = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = all(o >= 1.9 for v in orders.values() for o in v)
    return ok, "; ".join(f"{bc} orders " + ", ".join(f"{o:.3f}" for o in v) for bc, v in orders.items())


CHECKS: dict[int, tuple[str, float, Callable]] = {
    1: ("exact identities", 1.0, check_identities),
    2: ("eigensolver oracle equivalence", 10.0, check_eigensolver),
    3: ("undamped cavity divergence", 120.0, check_cavity_divergence),
    4: ("damping monotonicity and decay", 60.0, check_damping_monotone),
    5: ("gamma-r correspondence", 60.0, check_gamma_r_correspondence),
    6: ("wavenumber robustness", 60.0, check_wavenumber_robustness),
    7: ("N-scaling", 60.0, check_n_scaling),
    8: ("end-to-end cross-validation", 120.0, check_cross_validation),
    9: ("Greens-field localisation", 300.0, check_greens_localisation),
    10: ("FD convergence order", 120.0, check_fd_order),
}


def run_check(number: int) -> CheckResult:
    name, limit, fn = CHECKS[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported with its message
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if elapsed > limit:
        ok = False
        detail += f"; exceeded time limit {limit:.0f}s"
    return CheckResult(number, name, bool(ok), detail, elapsed, limit)


def run_all(numbers=None, echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    out = []
    for k in numbers or sorted(CHECKS):
        res = run_check(k)
        if echo is not None:
            echo(format_result(res))
        out.append(res)
    return out
