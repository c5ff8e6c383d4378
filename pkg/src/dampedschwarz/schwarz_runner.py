"""Discrete parallel Schwarz iteration on finite-difference strips.

Each strip solves the five-point problem with Robin data ``(-/+ d_x + s) u``
on its interface lines, taken from the neighbours' previous iterate (Jacobi
ordering). Traces are read off at the neighbour's interface line with a
centred difference, which matches the ghost elimination used inside the
strip, so the monodomain solution is a fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .fd_solver import DIRICHLET as FD_DIRICHLET
from .fd_solver import IMPEDANCE as FD_IMPEDANCE
from .fd_solver import BoundarySpec, Grid2D, assemble, build_rhs, line_system, solve
from .geometry import Decomposition, build_decomposition
from .mode_analysis import DIRICHLET, BoundaryConfig, convergence_factor_profile
from .model import PhysicalParams, compute_eta

__all__ = [
    "Diverged",
    "SnappedGeometry",
    "snap_decomposition",
    "SchwarzReport",
    "ModeRate",
    "run_schwarz",
    "fit_rate",
    "per_mode_contraction",
    "predicted_rates",
    "global_solution",
    "strip_traces",
]

DIVERGENCE_FACTOR = 1e12
FLOOR = 1e-13


class Diverged(ArithmeticError):
    """Trace norms grew past ``DIVERGENCE_FACTOR`` times the initial norm."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SnappedGeometry:
    """Strip node ranges ``[start, stop]`` (global x-indices, inclusive)."""

    n_subdomains: int
    h: float
    overlap_cells: int
    starts: tuple[int, ...]
    stops: tuple[int, ...]

    @property
    def overlap(self) -> float:
        return self.overlap_cells * self.h

    def decomposition(self) -> Decomposition:
        """Uniform decomposition with the snapped overlap, used for predictions."""
        return build_decomposition(self.n_subdomains, self.overlap)


def snap_decomposition(decomp: Decomposition, n_interior: int) -> SnappedGeometry:
    """Snap strip edges to grid lines with an integer overlap of ``round(L/h)`` cells."""
    M = n_interior + 1
    h = 1.0 / M
    N = decomp.n_subdomains
    ell = int(round(decomp.overlap / h))
    starts = [int(round(j * (M - ell) / N)) for j in range(N)]
    stops = [starts[j + 1] + ell for j in range(N - 1)] + [M]
    for j in range(N):
        if stops[j] - starts[j] < 2:
            raise ValueError(f"strip {j} has fewer than two cells at n_interior={n_interior}")
    if N >= 3 and any(stops[j] >= starts[j + 2] for j in range(N - 2)):
        raise ValueError("snapped strips overlap three deep; refine the grid")
    return SnappedGeometry(N, h, ell, tuple(starts), tuple(stops))


class _Strip:
    """Factored strip problem and its index bookkeeping."""

    def __init__(self, j, geo: SnappedGeometry, bc: BoundaryConfig, coeff, ny):
        N = geo.n_subdomains
        self.j = j
        a, b = geo.starts[j], geo.stops[j]
        outer_left = j == 0
        outer_right = j == N - 1
        left_dir = outer_left and bc.left_x == DIRICHLET
        right_dir = outer_right and bc.right_x == DIRICHLET
        self.first = a + 1 if left_dir else a
        self.last = b - 1 if right_dir else b
        self.robin_left = not left_dir
        self.robin_right = not right_dir
        self.has_left_data = not outer_left
        self.has_right_data = not outer_right
        robin = {
            "left": self.robin_left,
            "right": self.robin_right,
            "bottom": False,
            "top": False,
        }
        self.system = line_system(self.last - self.first + 1, ny, geo.h, coeff, robin)
        self.lu = self.system.factor()

    def local(self, i: int) -> int:
        return i - self.first


def _trace(u, p, sign, s, h, incoming=None):
    """Robin trace ``(sign * d_x + s) u`` at local line ``p``.

    On the strip's own Robin line the centred difference would need the ghost
    value, so the eliminated form ``2 s u - g_in`` is used instead.
    """
    if incoming is not None:
        return 2.0 * s * u[p] - incoming
    return sign * (u[p + 1] - u[p - 1]) / (2.0 * h) + s * u[p]


class ModeRate(NamedTuple):
    k: int
    rate: float
    below_floor: bool
    points: int


@dataclass
class SchwarzReport:
    norms: np.ndarray
    rate: float
    diverged: bool
    iterations: int
    seed: int | None
    geometry: SnappedGeometry
    params: PhysicalParams
    bc: BoundaryConfig
    n_interior: int
    traces: np.ndarray = field(repr=False)
    patches: list = field(default_factory=list, repr=False)

    @property
    def overlap_effective(self) -> float:
        return self.geometry.overlap


def fit_rate(values: Sequence[float], fraction: float = 1.0 / 3.0) -> float:
    """Geometric rate by least squares on ``log(values)`` over the trailing ``fraction``."""
    v = np.asarray(values, dtype=float)
    if len(v) == 0 or v[0] == 0.0:
        return 0.0
    if np.any(v == 0.0):
        return 0.0
    m = max(3, int(math.ceil(len(v) * fraction)))
    tail = v[-m:] if len(v) >= m else v
    if len(tail) < 2:
        return 0.0
    n = np.arange(len(tail), dtype=float)
    slope = np.polyfit(n, np.log(tail), 1)[0]
    return float(np.exp(slope))


def _strips_for(params, geo, bc, ny):
    coeff = compute_eta(params)
    return coeff, [_Strip(j, geo, bc, coeff, ny) for j in range(geo.n_subdomains)]


def run_schwarz(
    params: PhysicalParams,
    decomp: Decomposition,
    bc: BoundaryConfig,
    grid: int | Grid2D = 255,
    max_iters: int = 100,
    seed: int | None = 0,
    initial_traces: np.ndarray | None = None,
    source=None,
    order: Sequence[int] | None = None,
    keep_patches: bool = False,
    raise_on_divergence: bool = False,
) -> SchwarzReport:
    """Iterate the parallel Schwarz method and report the contraction.

    Without ``source`` this is the error equation. Initial interface data are
    complex standard normal per node from ``seed`` unless ``initial_traces``
    (shape ``(2N-2, n_interior)``) is given. ``order`` permutes the strip solves
    within an iteration; Jacobi ordering makes the result independent of it.

    Divergence stops the iteration and sets ``report.diverged``; with
    ``raise_on_divergence`` a :class:`Diverged` carrying the report is raised.
    """
    n = grid.n_interior if isinstance(grid, Grid2D) else int(grid)
    geo = snap_decomposition(decomp, n)
    N = geo.n_subdomains
    ny = n
    coeff, strips = _strips_for(params, geo, bc, ny)
    s, h = coeff.sqrt_eta, geo.h

    if initial_traces is None:
        rng = np.random.default_rng(seed)
        g = (rng.standard_normal((2 * N - 2, ny)) + 1j * rng.standard_normal((2 * N - 2, ny))) / math.sqrt(2)
    else:
        g = np.array(initial_traces, dtype=complex)
        if g.shape != (2 * N - 2, ny):
            raise ValueError(f"initial traces must have shape {(2 * N - 2, ny)}, got {g.shape}")

    f_strip = [None] * N
    if source is not None:
        fgrid = Grid2D(n, BoundarySpec(FD_IMPEDANCE, FD_IMPEDANCE, FD_DIRICHLET, FD_DIRICHLET))
        b_all = build_rhs(fgrid, coeff, source)
        for st in strips:
            f_strip[st.j] = b_all[st.first : st.last + 1]

    order = list(range(N)) if order is None else list(order)
    if sorted(order) != list(range(N)):
        raise ValueError("order must be a permutation of the strip indices")

    history = [g.copy()]
    norms = [float(np.linalg.norm(g))]
    initial = norms[0]
    diverged = False
    patches = [None] * N
    it = 0
    for it in range(1, max_iters + 1):
        new = np.empty_like(g)
        for j in order:
            st = strips[j]
            gl = g[j - 1] if st.has_left_data else None
            gr = g[N - 1 + j] if st.has_right_data else None
            b = np.zeros(st.system.shape, dtype=complex) if f_strip[j] is None else f_strip[j].copy()
            if gl is not None:
                b[0] -= 2.0 * gl / h
            if gr is not None:
                b[-1] -= 2.0 * gr / h
            u = solve(st.system, b, lu=st.lu)
            patches[j] = u
            if j < N - 1:
                # left-edge data for strip j+1
                p = st.local(geo.starts[j + 1])
                own = gr if p == st.last - st.first else None
                new[j] = _trace(u, p, -1.0, s, h, own)
            if j > 0:
                # right-edge data for strip j-1
                p = st.local(geo.stops[j - 1])
                own = gl if p == 0 else None
                new[N - 1 + j - 1] = _trace(u, p, 1.0, s, h, own)
        g = new
        history.append(g.copy())
        norms.append(float(np.linalg.norm(g)))
        if initial > 0 and norms[-1] > DIVERGENCE_FACTOR * initial:
            diverged = True
            break
    norms_arr = np.array(norms)
    report = SchwarzReport(
        norms=norms_arr,
        rate=fit_rate(norms_arr),
        diverged=diverged,
        iterations=it,
        seed=seed if initial_traces is None else None,
        geometry=geo,
        params=params,
        bc=bc,
        n_interior=n,
        traces=np.array(history),
        patches=patches if keep_patches else [],
    )
    if diverged and raise_on_divergence:
        raise Diverged(f"trace norm exceeded {DIVERGENCE_FACTOR:g} x initial after {it} iterations", report)
    return report


def _sine_basis(n: int, kmax: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    k = np.arange(1, kmax + 1)
    return math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, k) / (n + 1))


def modal_amplitudes(traces: np.ndarray, kmax: int) -> np.ndarray:
    """Orthonormal sine coefficients, combined over interfaces: shape ``(iters, kmax)``."""
    n = traces.shape[-1]
    coef = traces @ _sine_basis(n, kmax)
    return np.sqrt(np.sum(np.abs(coef) ** 2, axis=1))


def per_mode_contraction(report: SchwarzReport, kmax: int | None = None) -> list[ModeRate]:
    """Observed rate for each lateral sine mode ``k = 1..kmax``.

    ``kmax`` defaults to (and may not exceed) ``n_interior // 4``. A mode is
    fitted over the iterations before its amplitude first drops below
    ``FLOOR`` times the initial trace norm; it is flagged ``below_floor`` if
    fewer than ten such iterations exist.
    """
    n = report.traces.shape[-1]
    cutoff = n // 4
    kmax = cutoff if kmax is None else min(kmax, cutoff)
    if len(report.norms) < 11:
        raise ValueError("need at least 10 recorded iterations")
    amps = modal_amplitudes(report.traces, kmax)
    floor = FLOOR * report.norms[0]
    out = []
    for k in range(1, kmax + 1):
        a = amps[:, k - 1]
        low = np.nonzero(a < floor)[0]
        usable = a[: low[0]] if len(low) else a
        rate = fit_rate(usable) if len(usable) >= 2 else 0.0
        out.append(ModeRate(k, rate, len(usable) < 10, len(usable)))
    return out


def predicted_rates(report: SchwarzReport, ks: Sequence[int]) -> np.ndarray:
    """Mode-analysis factors ``rho(k pi)`` at the snapped overlap."""
    pts = convergence_factor_profile(
        report.params, report.geometry.decomposition(), report.bc, [math.pi * k for k in ks]
    )
    return np.array([p.rho for p in pts])


def global_solution(params: PhysicalParams, bc: BoundaryConfig, n_interior: int, source) -> np.ndarray:
    """Monodomain discrete solution on the strip node layout (impedance sides keep nodes)."""
    spec = BoundarySpec(
        FD_DIRICHLET if bc.left_x == DIRICHLET else FD_IMPEDANCE,
        FD_DIRICHLET if bc.right_x == DIRICHLET else FD_IMPEDANCE,
        FD_DIRICHLET,
        FD_DIRICHLET,
    )
    grid = Grid2D(n_interior, spec)
    coeff = compute_eta(params)
    u = solve(assemble(grid, coeff), build_rhs(grid, coeff, source))
    full = np.zeros((n_interior + 2, n_interior), dtype=complex)
    full[grid.ix] = u
    return full


def strip_traces(u_full: np.ndarray, geo: SnappedGeometry, s: complex) -> np.ndarray:
    """Interface data of a global field in the runner's stacking order."""
    N, h = geo.n_subdomains, geo.h
    g = np.empty((2 * N - 2, u_full.shape[1]), dtype=complex)
    for j in range(N - 1):
        g[j] = _trace(u_full, geo.starts[j + 1], -1.0, s, h)
        g[N - 1 + j] = _trace(u_full, geo.stops[j], 1.0, s, h)
    return g
