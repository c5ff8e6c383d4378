import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dampedschwarz.geometry import (
    DecompositionError,
    InvalidOverlap,
    TripleOverlap,
    build_decomposition,
)


def test_bisection():
    d = build_decomposition(2, 0.0)
    assert d.intervals == ((0.0, 0.5), (0.5, 1.0))
    assert d.interface_positions() == [(0.5, 0.5)]


def test_eight_strips_small_overlap():
    L = 1 / 300
    d = build_decomposition(8, L)
    H = (1 - L) / 8
    assert d.nonoverlap_pitch == H
    assert len(d.intervals) == 8
    for a, b in d.intervals:
        assert b - a == pytest.approx(H + L, abs=1e-12)
    # the overlap equals 1/(3 omega) at omega = 100
    assert d.overlap == pytest.approx(1 / (3 * 100.0), abs=1e-15)


def test_triple_overlap_rejected():
    with pytest.raises(TripleOverlap):
        build_decomposition(4, 0.3)


def test_two_strips_allow_wide_overlap():
    d = build_decomposition(2, 0.6)
    assert d.intervals[0] == pytest.approx((0.0, 0.8))
    assert d.intervals[1] == pytest.approx((0.2, 1.0))


@pytest.mark.parametrize("L", [-0.1, 1.0, 1.5, math.nan])
def test_invalid_overlap(L):
    with pytest.raises(InvalidOverlap):
        build_decomposition(2, L)


@pytest.mark.parametrize("N", [0, 1, 2.5])
def test_invalid_count(N):
    with pytest.raises(DecompositionError):
        build_decomposition(N, 0.0)


@given(N=st.integers(2, 64), frac=st.floats(0.0, 0.999))
def test_layout_identities(N, frac):
    # frac scales L below the triple-overlap bound
    bound = 1.0 / (N + 1) if N >= 3 else 1.0
    L = frac * bound
    assume(L < 1.0)
    d = build_decomposition(N, L)
    H = d.nonoverlap_pitch
    assert H == pytest.approx((1 - L) / N)
    iv = d.intervals
    assert iv[0][0] == 0.0 and iv[-1][1] == 1.0
    for j, (a, b) in enumerate(iv):
        assert a == pytest.approx(j * H, abs=1e-12)
        assert b - a == pytest.approx(H + L, abs=1e-12)
    for j in range(N - 1):
        assert iv[j][1] - iv[j + 1][0] == pytest.approx(L, abs=1e-12)
        assert iv[j + 1][0] - iv[j][0] == pytest.approx(H, abs=1e-12)
    for j in range(N - 2):
        # non-neighbours are disjoint
        assert iv[j][1] <= iv[j + 2][0] + 1e-12
    total = sum(b - a for a, b in iv) - (N - 1) * L
    assert total == pytest.approx(1.0, abs=1e-12)
