"""Fourier-mode convergence factor of the parallel Schwarz method.

For a lateral mode ``sin(xi y)`` the damped Helmholtz equation reduces on each
strip to ``e'' = lambda**2 e`` with ``lambda = sqrt(xi**2 + eta)``. Strip ``j``
is written in the scaled basis

    e_j(x) = A_j exp(-lambda (x - a_j)) + B_j exp(-lambda (b_j - x)),

so every exponential that is ever evaluated has modulus at most one. The
unknowns of the iteration are the Robin data ``(-d/dx + s) e`` at left strip
edges and ``(d/dx + s) e`` at right strip edges, ``s = sqrt(eta)``, stacked as

    (g_left[1], ..., g_left[N-1], g_right[0], ..., g_right[N-2])

with zero-based strip indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Decomposition
from .model import DampedCoefficient, PhysicalParams, compute_eta, principal_sqrt
from .spectra import spectral_radius

__all__ = [
    "IMPEDANCE",
    "DIRICHLET",
    "BoundaryConfig",
    "WAVEGUIDE",
    "CAVITY",
    "boundary_preset",
    "DegenerateMode",
    "SingularLocalSolve",
    "ModeProblem",
    "lambda_of",
    "make_mode",
    "local_solve",
    "apply_iteration",
    "assemble_iteration_matrix",
    "convergence_factor",
    "ProfilePoint",
    "convergence_factor_profile",
    "physical_modes",
    "scan_grid",
    "max_mode_rho",
]

IMPEDANCE = "impedance"
DIRICHLET = "dirichlet"

DEGENERATE_TOL = 1e-12
SINGULAR_TOL = 1e-13


class DegenerateMode(ArithmeticError):
    """``|lambda|`` is numerically zero (cut-off mode)."""


class SingularLocalSolve(ArithmeticError):
    """A strip problem is resonant for this mode."""


@dataclass(frozen=True)
class BoundaryConfig:
    """Outer conditions at ``x = 0`` and ``x = 1``; the lateral sides are Dirichlet."""

    left_x: str = IMPEDANCE
    right_x: str = IMPEDANCE
    lateral_y: str = field(default=DIRICHLET, init=False)

    def __post_init__(self):
        for side in (self.left_x, self.right_x):
            if side not in (IMPEDANCE, DIRICHLET):
                raise ValueError(f"unknown boundary condition {side!r}")

    @property
    def name(self) -> str:
        if self.left_x == self.right_x == IMPEDANCE:
            return "waveguide"
        if self.left_x == self.right_x == DIRICHLET:
            return "cavity"
        return f"{self.left_x}-{self.right_x}"


WAVEGUIDE = BoundaryConfig(IMPEDANCE, IMPEDANCE)
CAVITY = BoundaryConfig(DIRICHLET, DIRICHLET)


def boundary_preset(name: str) -> BoundaryConfig:
    try:
        return {"waveguide": WAVEGUIDE, "cavity": CAVITY}[name]
    except KeyError:
        raise ValueError(f"unknown boundary preset {name!r}; use waveguide or cavity") from None


@dataclass(frozen=True)
class ModeProblem:
    xi: float
    lam: complex
    coeff: DampedCoefficient
    decomp: Decomposition
    bc: BoundaryConfig
    # nonzero when xi was nudged off a cut-off
    xi_shift: float = 0.0

    @property
    def note(self) -> str:
        if self.xi_shift:
            return f"xi perturbed by {self.xi_shift:.3g} (cut-off mode)"
        return ""


def lambda_of(xi: float, coeff: DampedCoefficient) -> complex:
    if xi < 0:
        raise ValueError(f"xi must be nonnegative, got {xi}")
    lam = principal_sqrt(xi * xi + coeff.eta)
    if abs(lam) < DEGENERATE_TOL:
        raise DegenerateMode(f"cut-off mode: |lambda| = {abs(lam):.3g} at xi = {xi}")
    return lam


def make_mode(
    xi: float, coeff: DampedCoefficient, decomp: Decomposition, bc: BoundaryConfig
) -> ModeProblem:
    """Build a :class:`ModeProblem`, nudging ``xi`` upward if it sits on a cut-off."""
    try:
        return ModeProblem(float(xi), lambda_of(xi, coeff), coeff, decomp, bc)
    except DegenerateMode:
        # cut-off needs eta real and negative, so sqrt|eta| is the wavenumber
        shift = 1e-8 * max(1.0, math.sqrt(abs(coeff.eta)))
        xi2 = float(xi) + shift
        return ModeProblem(xi2, lambda_of(xi2, coeff), coeff, decomp, bc, xi_shift=shift)


def _exp_decay(lam: complex, length: float) -> complex:
    arg = -lam * length
    assert arg.real <= 0.0, "growing exponential in mode assembly"
    return complex(np.exp(arg))


def _local_matrix(mode: ModeProblem, j: int) -> np.ndarray:
    """2x2 system rows (left edge, right edge) acting on (A_j, B_j)."""
    lam, s = mode.lam, mode.coeff.sqrt_eta
    N = mode.decomp.n_subdomains
    E = _exp_decay(lam, mode.decomp.width)
    if j == 0 and mode.bc.left_x == DIRICHLET:
        left = (1.0, E)
    else:
        left = (lam + s, (s - lam) * E)
    if j == N - 1 and mode.bc.right_x == DIRICHLET:
        right = (E, 1.0)
    else:
        right = ((s - lam) * E, lam + s)
    return np.array([left, right], dtype=complex)


def _check_local(K: np.ndarray, j: int) -> None:
    det = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    scale = np.linalg.norm(K[0]) * np.linalg.norm(K[1])
    if scale == 0.0 or not abs(det) >= SINGULAR_TOL * scale:
        raise SingularLocalSolve(f"strip {j}: |det| = {abs(det):.3g} (scale {scale:.3g})")


def local_solve(mode: ModeProblem, j: int, g_left: complex, g_right: complex):
    """Coefficients ``(A, B)`` of strip ``j`` for incoming Robin data.

    Data on an outer edge are ignored: the homogeneous outer condition applies.
    """
    N = mode.decomp.n_subdomains
    if not 0 <= j < N:
        raise IndexError(f"strip index {j} out of range for N={N}")
    K = _local_matrix(mode, j)
    _check_local(K, j)
    rhs = np.array(
        [0.0 if j == 0 else g_left, 0.0 if j == N - 1 else g_right], dtype=complex
    )
    A, B = np.linalg.solve(K, rhs)
    return complex(A), complex(B)


def _outgoing_factors(mode: ModeProblem):
    lam, s = mode.lam, mode.coeff.sqrt_eta
    eH = _exp_decay(lam, mode.decomp.nonoverlap_pitch)
    eL = _exp_decay(lam, mode.decomp.overlap)
    near = (lam + s) * eH
    cross = (s - lam) * eL
    return near, cross


def apply_iteration(mode: ModeProblem, g: np.ndarray) -> np.ndarray:
    """One parallel Schwarz sweep on stacked interface data.

    ``g`` may be a vector of length ``2N-2`` or a matrix whose columns are such
    vectors.
    """
    N = mode.decomp.n_subdomains
    g = np.asarray(g, dtype=complex)
    if g.shape[0] != 2 * N - 2:
        raise ValueError(f"expected {2 * N - 2} interface values, got {g.shape[0]}")
    near, cross = _outgoing_factors(mode)
    out = np.zeros_like(g)
    zero = np.zeros_like(g[0])
    for j in range(N):
        K = _local_matrix(mode, j)
        _check_local(K, j)
        gl = g[j - 1] if j > 0 else zero
        gr = g[N - 1 + j] if j < N - 1 else zero
        Kinv = np.linalg.inv(K)
        A = Kinv[0, 0] * gl + Kinv[0, 1] * gr
        B = Kinv[1, 0] * gl + Kinv[1, 1] * gr
        if j < N - 1:
            # left-edge data for strip j+1, evaluated at a_{j+1}
            out[j] = near * A + cross * B
        if j > 0:
            # right-edge data for strip j-1, evaluated at b_{j-1}
            out[N - 1 + j - 1] = cross * A + near * B
    return out


def assemble_iteration_matrix(mode: ModeProblem) -> np.ndarray:
    n = 2 * mode.decomp.n_subdomains - 2
    return apply_iteration(mode, np.eye(n, dtype=complex))


def convergence_factor(mode: ModeProblem) -> float:
    """Spectral radius of the iteration matrix; ``inf`` for resonant strips."""
    try:
        T = assemble_iteration_matrix(mode)
    except SingularLocalSolve:
        return math.inf
    return spectral_radius(T)


class ProfilePoint(NamedTuple):
    xi: float
    rho: float
    note: str = ""


def convergence_factor_profile(
    params: PhysicalParams,
    decomp: Decomposition,
    bc: BoundaryConfig,
    xi_grid: Sequence[float],
) -> list[ProfilePoint]:
    xi_grid = [float(x) for x in xi_grid]
    if any(x < 0 for x in xi_grid):
        raise ValueError("xi grid must be nonnegative")
    if any(b <= a for a, b in zip(xi_grid, xi_grid[1:])):
        raise ValueError("xi grid must be strictly increasing")
    coeff = compute_eta(params)
    points = []
    for xi in xi_grid:
        mode = make_mode(xi, coeff, decomp, bc)
        points.append(ProfilePoint(xi, convergence_factor(mode), mode.note))
    return points


def physical_modes(omega: float, K: int | None = None) -> np.ndarray:
    """Dirichlet lateral frequencies ``k pi``, ``k = 1..K`` (default ``ceil(3 omega / pi)``)."""
    if K is None:
        K = math.ceil(3.0 * omega / math.pi)
    return math.pi * np.arange(1, K + 1, dtype=float)


def scan_grid(omega: float, max_ratio: float = 2.0, points: int = 400) -> np.ndarray:
    """Uniform ``xi`` grid with ``xi/omega`` in ``(0, max_ratio]``."""
    return omega * max_ratio * np.arange(1, points + 1, dtype=float) / points


def max_mode_rho(
    params: PhysicalParams,
    decomp: Decomposition,
    bc: BoundaryConfig,
    xi_grid: Sequence[float] | None = None,
) -> float:
    """Largest per-mode convergence factor, over the physical modes by default."""
    if xi_grid is None:
        xi_grid = physical_modes(params.omega)
    return max(p.rho for p in convergence_factor_profile(params, decomp, bc, xi_grid))
