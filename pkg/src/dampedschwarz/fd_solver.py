"""Five-point finite differences for ``Lap u - eta u = -f / (1 + i gamma omega)``.

The grid is vertex centred on the unit square with spacing ``h = 1/(n+1)``.
Dirichlet sides carry no unknowns; impedance sides ``d_n u + s u = g`` keep
their boundary nodes and eliminate the ghost node with a centred difference.

Unknowns are ordered line by line in ``x``: the matrix is block tridiagonal
with one block per x-line, and all couplings between lines are multiples of
the identity. It is factored by block LU without pivoting across blocks.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from .model import DampedCoefficient, PhysicalParams, compute_eta

__all__ = [
    "DIRICHLET",
    "IMPEDANCE",
    "SIDES",
    "BoundarySpec",
    "boundary_spec",
    "Grid2D",
    "ComplexField",
    "PointSource",
    "GridFunction",
    "LineSystem",
    "BlockLU",
    "SingularSystem",
    "NonConvergedResidual",
    "ResolutionWarning",
    "line_system",
    "assemble",
    "build_rhs",
    "solve",
    "greens_field",
]

log = logging.getLogger(__name__)

DIRICHLET = "dirichlet"
IMPEDANCE = "impedance"
SIDES = ("left", "right", "bottom", "top")

RESIDUAL_TOL = 1e-8
PIVOT_TOL = 1e-14


class SingularSystem(ArithmeticError):
    pass


class NonConvergedResidual(ArithmeticError):
    pass


class ResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BoundarySpec:
    """Condition on each side; ``left``/``right`` are ``x = 0``/``x = 1``."""

    left: str = DIRICHLET
    right: str = DIRICHLET
    bottom: str = DIRICHLET
    top: str = DIRICHLET

    def __post_init__(self):
        for side in SIDES:
            if getattr(self, side) not in (DIRICHLET, IMPEDANCE):
                raise ValueError(f"{side}: unknown condition {getattr(self, side)!r}")

    def robin(self, side: str) -> bool:
        return getattr(self, side) == IMPEDANCE


_PRESETS = {
    "cavity": BoundarySpec(DIRICHLET, DIRICHLET, DIRICHLET, DIRICHLET),
    "waveguide": BoundarySpec(IMPEDANCE, IMPEDANCE, DIRICHLET, DIRICHLET),
    "free_space": BoundarySpec(IMPEDANCE, IMPEDANCE, IMPEDANCE, IMPEDANCE),
}


def boundary_spec(name: str) -> BoundarySpec:
    try:
        return _PRESETS[name.replace("-", "_")]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}") from None


@dataclass(frozen=True)
class Grid2D:
    n_interior: int
    bc: BoundarySpec = field(default_factory=BoundarySpec)

    def __post_init__(self):
        if self.n_interior < 1:
            raise ValueError("need at least one interior node per direction")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_interior + 1)

    def _index(self, lo: str, hi: str) -> np.ndarray:
        start = 0 if self.bc.robin(lo) else 1
        stop = self.n_interior + 1 if self.bc.robin(hi) else self.n_interior
        return np.arange(start, stop + 1)

    @property
    def ix(self) -> np.ndarray:
        """Global x-indices of the unknown lines."""
        return self._index("left", "right")

    @property
    def iy(self) -> np.ndarray:
        return self._index("bottom", "top")

    @property
    def x(self) -> np.ndarray:
        return self.ix * self.h

    @property
    def y(self) -> np.ndarray:
        return self.iy * self.h

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.ix), len(self.iy))

    def points_per_wavelength(self, omega: float) -> float:
        return 2.0 * math.pi / (omega * self.h)


@dataclass
class ComplexField:
    """Grid function on the unknown nodes, ``values[ix, iy]``."""

    grid: Grid2D
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_full(self) -> np.ndarray:
        """Values on all ``(n+2)**2`` nodes, zeros on Dirichlet sides."""
        n = self.grid.n_interior
        full = np.zeros((n + 2, n + 2), dtype=complex)
        full[np.ix_(self.grid.ix, self.grid.iy)] = self.values
        return full

    def coords(self):
        return np.meshgrid(self.grid.x, self.grid.y, indexing="ij")


@dataclass(frozen=True)
class PointSource:
    """Discrete delta: ``1/h**2`` at the node nearest to ``location``."""

    location: tuple[float, float]

    def __post_init__(self):
        x, y = self.location
        if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
            raise ValueError(f"source location {self.location} outside the open unit square")

    def values(self, grid: Grid2D) -> np.ndarray:
        n = grid.n_interior
        i = min(max(int(round(self.location[0] / grid.h)), 1), n)
        j = min(max(int(round(self.location[1] / grid.h)), 1), n)
        f = np.zeros(grid.shape, dtype=complex)
        f[np.searchsorted(grid.ix, i), np.searchsorted(grid.iy, j)] = 1.0 / grid.h**2
        return f


@dataclass(frozen=True)
class GridFunction:
    """Source given by values, or a callable ``f(x, y)``, on the unknown nodes."""

    func: Callable | np.ndarray

    def values(self, grid: Grid2D) -> np.ndarray:
        if callable(self.func):
            X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
            return np.asarray(self.func(X, Y), dtype=complex)
        v = np.asarray(self.func, dtype=complex)
        if v.shape != grid.shape:
            raise ValueError(f"source shape {v.shape} does not match grid {grid.shape}")
        return v


@dataclass
class LineSystem:
    """Block tridiagonal matrix: ``lo[i] u[i-1] + (Ty + c[i]) u[i] + up[i] u[i+1]``.

    ``Ty`` is the dense (tridiagonal) y-operator shared by all lines, ``c`` the
    per-line diagonal shift, ``lo``/``up`` the scalar couplings between lines.
    """

    Ty: np.ndarray
    c: np.ndarray
    lo: np.ndarray
    up: np.ndarray
    h: float
    s: complex

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.c), self.Ty.shape[0])

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = u @ self.Ty.T + self.c[:, None] * u
        out[1:] += self.lo[1:, None] * u[:-1]
        out[:-1] += self.up[:-1, None] * u[1:]
        return out

    def to_dense(self) -> np.ndarray:
        nx, ny = self.shape
        A = np.zeros((nx * ny, nx * ny), dtype=complex)
        eye = np.eye(ny)
        for i in range(nx):
            sl = slice(i * ny, (i + 1) * ny)
            A[sl, sl] = self.Ty + self.c[i] * eye
            if i > 0:
                A[sl, slice((i - 1) * ny, i * ny)] = self.lo[i] * eye
            if i < nx - 1:
                A[sl, slice((i + 1) * ny, (i + 2) * ny)] = self.up[i] * eye
        return A

    def factor(self) -> "BlockLU":
        return BlockLU(self)


def _second_difference(n: int, h: float, s: complex, robin_lo: bool, robin_hi: bool):
    """1D ``d2/dx2`` on ``n`` nodes; Robin ends via ghost elimination."""
    T = np.zeros((n, n), dtype=complex)
    idx = np.arange(n)
    T[idx, idx] = -2.0 / h**2
    T[idx[1:], idx[:-1]] = 1.0 / h**2
    T[idx[:-1], idx[1:]] = 1.0 / h**2
    if robin_lo:
        T[0, 1] = 2.0 / h**2
        T[0, 0] -= 2.0 * s / h
    if robin_hi:
        T[-1, -2] = 2.0 / h**2
        T[-1, -1] -= 2.0 * s / h
    return T


def line_system(
    nx: int,
    ny: int,
    h: float,
    coeff: DampedCoefficient,
    robin: Mapping[str, bool],
) -> LineSystem:
    """Operator ``Lap - eta`` on an ``nx`` by ``ny`` node block.

    ``robin[side]`` marks sides whose outermost node line is a Robin boundary
    (``d_n u + s u = g``); other sides are Dirichlet just outside the block.
    """
    if nx < 2 and (robin["left"] or robin["right"]):
        raise ValueError("a Robin side needs at least two node lines")
    s = coeff.sqrt_eta
    Ty = _second_difference(ny, h, s, robin["bottom"], robin["top"])
    c = np.full(nx, -2.0 / h**2 - coeff.eta, dtype=complex)
    lo = np.full(nx, 1.0 / h**2, dtype=complex)
    up = np.full(nx, 1.0 / h**2, dtype=complex)
    if robin["left"]:
        c[0] -= 2.0 * s / h
        up[0] = 2.0 / h**2
    if robin["right"]:
        c[-1] -= 2.0 * s / h
        lo[-1] = 2.0 / h**2
    lo[0] = 0.0
    up[-1] = 0.0
    return LineSystem(Ty=Ty, c=c, lo=lo, up=up, h=h, s=s)


def assemble(grid: Grid2D, coeff: DampedCoefficient, bc: BoundarySpec | None = None) -> LineSystem:
    if bc is not None and bc != grid.bc:
        grid = Grid2D(grid.n_interior, bc)
    nx, ny = grid.shape
    return line_system(nx, ny, grid.h, coeff, {side: grid.bc.robin(side) for side in SIDES})


class BlockLU:
    """Block LU of a :class:`LineSystem`, reusable for many right-hand sides.

    Stores ``S_i^{-1}`` for every Schur complement ``S_i = D_i - lo_i up_{i-1} S_{i-1}^{-1}``.
    """

    def __init__(self, system: LineSystem):
        self.system = system
        nx, ny = system.shape
        self.Sinv = np.empty((nx, ny, ny), dtype=complex)
        eye = np.eye(ny, dtype=complex)
        prev = None
        for i in range(nx):
            S = system.Ty + system.c[i] * eye
            if prev is not None:
                S = S - (system.lo[i] * system.up[i - 1]) * prev
            with warnings.catch_warnings():
                # an exact zero pivot is reported below as SingularSystem
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu, piv = scipy.linalg.lu_factor(S, check_finite=False)
            row_scale = np.abs(S).sum(axis=1).max()
            min_pivot = np.abs(np.diag(lu)).min()
            if not min_pivot > PIVOT_TOL * row_scale:
                raise SingularSystem(
                    f"block {i}: pivot {min_pivot:.3g} below {PIVOT_TOL:g} x row scale {row_scale:.3g}"
                )
            prev = scipy.linalg.lu_solve((lu, piv), eye, check_finite=False)
            self.Sinv[i] = prev

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve for ``b`` of shape ``(nx, ny)`` or ``(nx, ny, m)``."""
        sys_ = self.system
        b = np.asarray(b, dtype=complex)
        nx = sys_.shape[0]
        y = np.empty_like(b)
        y[0] = b[0]
        for i in range(1, nx):
            y[i] = b[i] - sys_.lo[i] * (self.Sinv[i - 1] @ y[i - 1])
        x = np.empty_like(b)
        x[-1] = self.Sinv[-1] @ y[-1]
        for i in range(nx - 2, -1, -1):
            x[i] = self.Sinv[i] @ (y[i] - sys_.up[i] * x[i + 1])
        return x


def build_rhs(
    grid: Grid2D,
    coeff: DampedCoefficient,
    source=None,
    boundary_data: Mapping[str, Callable | np.ndarray] | None = None,
) -> np.ndarray:
    """Right-hand side ``-f / (1 + i gamma omega)`` plus Robin data terms.

    ``boundary_data[side]`` gives ``g`` in ``d_n u + s u = g`` along an impedance
    side, as values on that side's nodes or a callable of the coordinate
    along the side.
    """
    b = np.zeros(grid.shape, dtype=complex)
    if source is not None:
        b -= coeff.rhs_scale * source.values(grid)
    for side, g in (boundary_data or {}).items():
        if not grid.bc.robin(side):
            raise ValueError(f"boundary data on non-impedance side {side!r}")
        along = grid.y if side in ("left", "right") else grid.x
        g = np.asarray(g(along) if callable(g) else g, dtype=complex)
        term = 2.0 * g / grid.h
        if side == "left":
            b[0, :] -= term
        elif side == "right":
            b[-1, :] -= term
        elif side == "bottom":
            b[:, 0] -= term
        else:
            b[:, -1] -= term
    return b


def _relative_residual(system: LineSystem, u: np.ndarray, b: np.ndarray) -> float:
    bnorm = np.linalg.norm(b)
    r = np.linalg.norm(system.matvec(u) - b)
    return r / bnorm if bnorm > 0 else r


def solve(system: LineSystem, rhs: np.ndarray, lu: BlockLU | None = None, grid: Grid2D | None = None):
    """Direct solve with a mandatory residual gate.

    Returns a :class:`ComplexField` when ``grid`` is given, else the raw array.
    One step of iterative refinement is taken if the first residual exceeds
    ``RESIDUAL_TOL``.
    """
    rhs = np.asarray(rhs, dtype=complex)
    if lu is None:
        lu = system.factor()
    u = lu.solve(rhs)
    res = _relative_residual(system, u, rhs)
    if not res < RESIDUAL_TOL:
        log.info("residual %.3g above gate, refining", res)
        u = u + lu.solve(rhs - system.matvec(u))
        res = _relative_residual(system, u, rhs)
        if not res < RESIDUAL_TOL:
            raise NonConvergedResidual(f"relative residual {res:.3g} after refinement")
    if grid is None:
        return u
    return ComplexField(grid, u, meta={"residual": float(res)})


def greens_field(
    params: PhysicalParams,
    bc_preset: str,
    source_location=(0.5, 0.5),
    n_interior: int = 255,
) -> ComplexField:
    """Point-source response for the ``cavity``, ``waveguide`` or ``free_space`` preset."""
    grid = Grid2D(n_interior, boundary_spec(bc_preset))
    ppw = grid.points_per_wavelength(params.omega)
    if ppw < 10:
        warnings.warn(f"only {ppw:.1f} points per wavelength", ResolutionWarning, stacklevel=2)
    coeff = compute_eta(params)
    system = assemble(grid, coeff)
    b = build_rhs(grid, coeff, PointSource(tuple(source_location)))
    fld = solve(system, b, grid=grid)
    fld.meta.update(
        omega=params.omega,
        r=params.r,
        gamma=params.gamma,
        bc=bc_preset,
        source=tuple(source_location),
        n_interior=n_interior,
        h=grid.h,
        points_per_wavelength=ppw,
        residual_tol=RESIDUAL_TOL,
    )
    return fld
