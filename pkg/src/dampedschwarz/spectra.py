"""Spectral radius of dense complex matrices.

``spectral_radius`` runs a Householder reduction to upper Hessenberg form
followed by single-shift complex QR iteration with deflation.
``power_iteration`` is an independent estimate used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "NoConvergence",
    "hessenberg",
    "eigvals_qr",
    "spectral_radius",
    "PowerIterationResult",
    "power_iteration",
    "power_iteration_radius",
]


class NoConvergence(ArithmeticError):
    """QR iteration exceeded its sweep budget.

    ``partial`` holds the eigenvalues deflated before giving up.
    """

    def __init__(self, message, partial=None, sweeps=0):
        super().__init__(message)
        self.partial = [] if partial is None else list(partial)
        self.sweeps = sweeps


def _as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hessenberg(M) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (Householder reflections)."""
    H = _as_matrix(M)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k].copy()
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0
    return H


@njit(cache=True)
def _eig2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]], the one closer to ``d`` first."""
    tr_half = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    l1 = tr_half + disc
    l2 = tr_half - disc
    if abs(l1 - d) > abs(l2 - d):
        return l2, l1
    return l1, l2


@njit(cache=True)
def _hqr(H, max_sweeps):
    """Shifted QR on an upper Hessenberg matrix (overwritten).

    Returns ``(eigs, count, sweeps)``; ``count < n`` means the sweep budget ran out.
    """
    n = H.shape[0]
    eps = 2.220446049250313e-16
    anorm = 0.0
    for i in range(n):
        for j in range(n):
            anorm += abs(H[i, j])
    small = eps * anorm
    eigs = np.zeros(n, dtype=np.complex128)
    count = 0
    hi = n - 1
    sweeps = 0
    its = 0
    cs = np.zeros(n)
    ss = np.zeros(n, dtype=np.complex128)
    while hi >= 0:
        # locate the start of the unreduced block ending at hi
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1])
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if sub <= eps * scale or sub <= small:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs[hi] = H[hi, hi]
            count += 1
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            l1, l2 = _eig2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi])
            eigs[hi] = l1
            eigs[lo] = l2
            count += 2
            hi -= 2
            its = 0
            continue
        if sweeps >= max_sweeps:
            break
        sweeps += 1
        its += 1
        if its % 10 == 0:
            # exceptional shift breaks cycles (e.g. +/- symmetric spectra)
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * np.exp(0.7j * its)
        else:
            mu = _eig2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])[0]
        # explicit-shift QR step H - mu I = QR, H <- RQ + mu I on the active block
        for k in range(lo, hi + 1):
            H[k, k] -= mu
        for k in range(lo, hi):
            a = H[k, k]
            b = H[k + 1, k]
            nrm = np.hypot(abs(a), abs(b))
            if nrm == 0.0:
                c = 1.0
                s = 0.0 + 0.0j
            elif a == 0:
                c = 0.0
                s = 1.0 + 0.0j
            else:
                c = abs(a) / nrm
                s = (a / abs(a)) * np.conj(b) / nrm
            for j in range(k, hi + 1):
                x = H[k, j]
                y = H[k + 1, j]
                H[k, j] = c * x + s * y
                H[k + 1, j] = -np.conj(s) * x + c * y
            H[k + 1, k] = 0.0
            cs[k] = c
            ss[k] = s
        for k in range(lo, hi):
            c = cs[k]
            s = ss[k]
            top = min(k + 2, hi)
            for i in range(lo, top + 1):
                x = H[i, k]
                y = H[i, k + 1]
                H[i, k] = c * x + np.conj(s) * y
                H[i, k + 1] = -s * x + c * y
        for k in range(lo, hi + 1):
            H[k, k] += mu
    return eigs, count, sweeps


def eigvals_qr(M, max_sweeps: int | None = None) -> np.ndarray:
    """All eigenvalues of ``M`` by shifted QR on the Hessenberg form.

    Raises :class:`NoConvergence` after ``max_sweeps`` QR sweeps (default ``30 n``).
    """
    H = hessenberg(M)
    n = H.shape[0]
    if max_sweeps is None:
        max_sweeps = 30 * n
    eigs, count, sweeps = _hqr(H, max_sweeps)
    if count < n:
        # eigenvalues are filled from the bottom of H upwards
        raise NoConvergence(
            f"QR iteration did not converge within {max_sweeps} sweeps",
            partial=eigs[n - count :],
            sweeps=sweeps,
        )
    return eigs


def spectral_radius(M, max_sweeps: int | None = None) -> float:
    """Largest eigenvalue modulus of a square complex matrix."""
    A = _as_matrix(M)
    if A.shape[0] == 1:
        return float(abs(A[0, 0]))
    rho = float(np.max(np.abs(eigvals_qr(A, max_sweeps=max_sweeps))))
    row_norm = float(np.abs(A).sum(axis=1).max())
    assert rho <= row_norm * (1.0 + 1e-10) + 1e-300, (rho, row_norm)
    return rho


@dataclass(frozen=True)
class PowerIterationResult:
    radius: float
    iterations: int
    seed: int
    power: int
    stagnated: bool
    converged: bool


def _normalized_power(A: np.ndarray, power: int):
    """``A**power`` as ``(B, log_scale)`` with ``A**power = B * exp(log_scale)``.

    Binary exponentiation with renormalisation keeps high powers of
    strongly contracting or expanding matrices representable.
    """
    n = A.shape[0]
    result = np.eye(n, dtype=complex)
    log_result = 0.0
    base = A.copy()
    log_base = 0.0
    e = power
    while True:
        if e & 1:
            result = result @ base
            log_result += log_base
            s = np.abs(result).max()
            if s == 0.0:
                return result, 0.0
            result /= s
            log_result += np.log(s)
        e >>= 1
        if not e:
            return result, log_result
        base = base @ base
        log_base *= 2.0
        s = np.abs(base).max()
        if s == 0.0:
            return base, 0.0
        base /= s
        log_base += np.log(s)


def power_iteration(
    M,
    iters: int = 200,
    seed: int = 0,
    power: int = 1,
    rtol: float = 1e-9,
) -> PowerIterationResult:
    """Dominant eigenvalue modulus by power iteration from a seeded random start.

    Iterates on ``B = M**power`` and returns ``|mu|**(1/power)`` for the
    Rayleigh quotient ``mu`` of ``B``. An even ``power`` resolves dominant pairs
    ``+/-mu``, which every parallel Schwarz iteration matrix has; larger powers
    also widen small modulus gaps. Iteration stops once the eigen-residual
    ``|B x - mu x|`` falls below ``rtol |mu|``.

    ``stagnated`` is set when the budget runs out without that residual test
    passing. This covers oscillating estimates (dominant pairs) and also
    unitary-like blocks, where the Rayleigh quotient stays constant without
    being an eigenvalue. Callers retry with another seed or trust QR.
    """
    A = _as_matrix(M)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if power < 1:
        raise ValueError("power must be >= 1")
    B, log_scale = _normalized_power(A, power) if power > 1 else (A, 0.0)
    rng = np.random.default_rng(seed)
    n = A.shape[0]
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)

    def radius_of(mu):
        if mu == 0:
            return 0.0
        return float(np.exp((np.log(abs(mu)) + log_scale) / power))

    mu = 0j
    k = 0
    for k in range(1, iters + 1):
        y = B @ x
        mu = complex(np.vdot(x, y))
        ynorm = np.linalg.norm(y)
        if ynorm == 0.0:
            return PowerIterationResult(0.0, k, seed, power, False, True)
        if np.linalg.norm(y - mu * x) <= rtol * abs(mu):
            return PowerIterationResult(radius_of(mu), k, seed, power, False, True)
        x = y / ynorm
    return PowerIterationResult(radius_of(mu), k, seed, power, True, False)


def power_iteration_radius(M, iters: int = 200, seed: int = 0, power: int = 1) -> float:
    return power_iteration(M, iters=iters, seed=seed, power=power).radius
