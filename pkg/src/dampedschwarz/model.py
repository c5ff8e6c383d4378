"""Damped Helmholtz coefficient and related scalar identities.

With a time-harmonic ansatz ``u(x, t) = u(x) exp(i omega t)`` the damped wave
equation ``u_tt + r u_t = Lap u + gamma d/dt Lap u + f`` becomes

    Lap u - eta u = -f / (1 + i gamma omega),
    eta = -omega**2 (1 - i r / omega) / (1 + i gamma omega).

Everything here is a pure function of :class:`PhysicalParams`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "PhysicalParams",
    "DampedCoefficient",
    "compute_eta",
    "principal_sqrt",
    "zeroth_order_approx",
    "imag_real_ratio",
    "RegimeWarning",
]

Regime = Literal["small", "unit", "large"]

# zeroth_order_approx warns when omega*gamma is off its regime by more than this factor
REGIME_FACTOR = 10.0


class RegimeWarning(UserWarning):
    """The requested asymptotic regime does not match omega * gamma."""


@dataclass(frozen=True)
class PhysicalParams:
    """Wavenumber ``omega`` with first-order (``r``) and viscoelastic (``gamma``) damping."""

    omega: float
    r: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("omega", "r", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.r < 0:
            raise ValueError(f"r must be nonnegative, got {self.r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")

    @property
    def regime(self) -> str:
        if self.r == 0 and self.gamma == 0:
            return "undamped"
        if self.gamma == 0:
            return "first-order"
        if self.r == 0:
            return "viscoelastic"
        return "mixed"


@dataclass(frozen=True)
class DampedCoefficient:
    eta: complex
    sqrt_eta: complex
    rhs_scale: complex

    @property
    def s(self) -> complex:
        """Impedance parameter of the Robin conditions (alias of ``sqrt_eta``)."""
        return self.sqrt_eta


def principal_sqrt(z):
    """Square root with ``Re(w) >= 0`` and ``Im(w) >= 0`` whenever ``Re(w) == 0``.

    Works on scalars and numpy arrays. The tie-break puts the negative real axis
    on ``+i|z|**0.5`` regardless of the sign of a zero imaginary part, so the
    undamped impedance is ``+i omega``.
    """
    if np.ndim(z) == 0:
        w = cmath.sqrt(complex(z))
        if w.real == 0.0 and w.imag < 0.0:
            w = -w
        # cmath may return -0.0 real parts; normalise for clean output
        return complex(abs(w.real) if w.real == 0.0 else w.real, w.imag)
    w = np.sqrt(np.asarray(z, dtype=complex))
    flip = (w.real == 0.0) & (w.imag < 0.0)
    w = np.where(flip, -w, w)
    return w.real + 0.0 + 1j * w.imag


def compute_eta(params: PhysicalParams) -> DampedCoefficient:
    omega, r, gamma = params.omega, params.r, params.gamma
    denom = complex(1.0, gamma * omega)
    # numerator written as -omega^2 + i omega r so the gamma = 0 case is exact
    eta = complex(-omega * omega, omega * r) / denom
    return DampedCoefficient(eta=eta, sqrt_eta=principal_sqrt(eta), rhs_scale=1.0 / denom)


def _expected_regime(x: float) -> Regime:
    if x < 1.0 / REGIME_FACTOR:
        return "small"
    if x > REGIME_FACTOR:
        return "large"
    return "unit"


def zeroth_order_approx(params: PhysicalParams, regime: Regime) -> complex:
    """Asymptotic form of ``omega**2 / (1 + i omega gamma)``.

    ``small``: ``omega**2 - i omega**3 gamma`` (omega*gamma << 1)
    ``unit``: ``c omega**2 (1 - i)`` with ``c = 1/(1 + omega**2 gamma**2)``
    ``large``: ``gamma**-2 - i omega / gamma`` (omega*gamma >> 1)

    A :class:`RegimeWarning` is issued when ``omega*gamma`` lies more than a
    factor ``REGIME_FACTOR`` outside the requested regime.
    """
    omega, gamma = params.omega, params.gamma
    if gamma <= 0:
        raise ValueError("zeroth_order_approx needs gamma > 0")
    x = omega * gamma
    if regime not in ("small", "unit", "large"):
        raise ValueError(f"unknown regime {regime!r}")
    expected = _expected_regime(x)
    if expected != regime:
        warnings.warn(
            f"omega*gamma = {x:g} suggests regime {expected!r}, not {regime!r}",
            RegimeWarning,
            stacklevel=2,
        )
    if regime == "small":
        return complex(omega**2, -(omega**3) * gamma)
    if regime == "unit":
        c = 1.0 / (1.0 + x * x)
        return c * omega**2 * complex(1.0, -1.0)
    return complex(gamma**-2, -omega / gamma)


def imag_real_ratio(params: PhysicalParams) -> float:
    """Im/Re of the zeroth-order coefficient ``-eta`` of ``Lap u + (-eta) u``.

    Defined only for a single damping mechanism: equals ``-r/omega`` for
    first-order damping and ``-omega*gamma`` for viscoelastic damping.
    """
    if params.regime in ("undamped", "mixed"):
        raise ValueError(
            "imag_real_ratio needs exactly one of r, gamma nonzero "
            f"(got r={params.r}, gamma={params.gamma})"
        )
    coeff = -compute_eta(params).eta
    return coeff.imag / coeff.real
