"""Uniform strip decomposition of (0, 1) with pairwise overlaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "Decomposition",
    "build_decomposition",
    "DecompositionError",
    "InvalidOverlap",
    "TripleOverlap",
]


class DecompositionError(ValueError):
    pass


class InvalidOverlap(DecompositionError):
    pass


class TripleOverlap(DecompositionError):
    pass


@dataclass(frozen=True)
class Decomposition:
    """``N`` strips ``(a_j, b_j)`` with ``a_j = (j-1) H`` and ``b_j = j H + L``.

    Indices in code are zero-based: strip ``j`` covers ``(j*H, (j+1)*H + L)``.
    """

    n_subdomains: int
    overlap: float
    nonoverlap_pitch: float
    intervals: tuple[tuple[float, float], ...] = field(repr=False)

    @property
    def width(self) -> float:
        return self.nonoverlap_pitch + self.overlap

    def interface_positions(self):
        """Trace locations for each interior pair ``(j, j+1)``.

        Returns a list of ``(a_{j+1}, b_j)``: the left edge of strip ``j+1``
        (where strip ``j`` produces left-going data) and the right edge of strip
        ``j`` (where strip ``j+1`` produces right-going data).
        """
        return [
            (self.intervals[j + 1][0], self.intervals[j][1])
            for j in range(self.n_subdomains - 1)
        ]


def build_decomposition(N: int, L: float) -> Decomposition:
    if int(N) != N or N < 2:
        raise DecompositionError(f"need N >= 2 subdomains, got {N!r}")
    N = int(N)
    if not math.isfinite(L) or L < 0 or L >= 1:
        raise InvalidOverlap(f"overlap must satisfy 0 <= L < 1, got {L!r}")
    H = (1.0 - L) / N
    if N >= 3 and L >= H:
        raise TripleOverlap(
            f"overlap L={L:g} >= pitch H={H:g}: three strips would share points"
        )
    intervals = tuple((j * H, (j + 1) * H + L) for j in range(N))
    # pin the ends exactly; (N*H + L) can round off by an ulp
    intervals = ((0.0, intervals[0][1]),) + intervals[1:-1] + ((intervals[-1][0], 1.0),)
    return Decomposition(n_subdomains=N, overlap=float(L), nonoverlap_pitch=H, intervals=intervals)
