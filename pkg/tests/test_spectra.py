import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedschwarz import WAVEGUIDE, PhysicalParams, build_decomposition, compute_eta
from dampedschwarz.mode_analysis import assemble_iteration_matrix, make_mode
from dampedschwarz.spectra import (
    NoConvergence,
    eigvals_qr,
    hessenberg,
    power_iteration,
    power_iteration_radius,
    spectral_radius,
)


def ginibre(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)


def test_identity():
    assert spectral_radius(np.eye(2)) == pytest.approx(1.0, abs=1e-15)


def test_diagonal():
    assert spectral_radius(np.diag([0.5, -2j])) == pytest.approx(2.0, abs=1e-14)


def test_scalar_and_zero():
    assert spectral_radius([[3 - 4j]]) == 5.0
    assert spectral_radius(np.zeros((4, 4))) == 0.0


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), [[np.nan]], [[1.0, np.inf], [0, 1]]])
def test_rejects_bad_matrices(bad):
    with pytest.raises(ValueError):
        spectral_radius(bad)


@pytest.mark.parametrize("n", [2, 3, 7, 20, 60, 150])
def test_eigenvalues_match_numpy(n):
    # numpy's LAPACK driver is the oracle here
    rng = np.random.default_rng(n)
    A = ginibre(rng, n)
    ours = np.sort_complex(eigvals_qr(A))
    ref = np.sort_complex(np.linalg.eigvals(A))
    scale = np.linalg.norm(A, 2)
    # match each reference eigenvalue to its nearest computed one
    d = np.abs(ours[:, None] - ref[None, :]).min(axis=0)
    assert d.max() <= 1e-10 * scale
    assert abs(spectral_radius(A) - np.abs(ref).max()) <= 1e-10 * scale


def test_hessenberg_form_and_similarity():
    rng = np.random.default_rng(3)
    A = ginibre(rng, 9)
    H = hessenberg(A)
    assert np.all(np.tril(H, -2) == 0)
    assert np.trace(H) == pytest.approx(np.trace(A), abs=1e-12)
    assert np.linalg.norm(H) == pytest.approx(np.linalg.norm(A), rel=1e-12)


def test_sweep_budget_exhaustion():
    rng = np.random.default_rng(0)
    with pytest.raises(NoConvergence) as info:
        eigvals_qr(ginibre(rng, 12), max_sweeps=1)
    assert info.value.sweeps >= 1
    assert len(info.value.partial) < 12


def test_random_six_by_six_cross_oracle():
    rng = np.random.default_rng(6)
    A = ginibre(rng, 6)
    res = power_iteration(A, iters=2000, seed=1, power=64)
    assert res.converged
    assert res.radius == pytest.approx(spectral_radius(A), rel=1e-6)


def test_power_identity_one_step():
    res = power_iteration(np.eye(5), iters=10, seed=4)
    assert res.radius == pytest.approx(1.0, abs=1e-15)
    assert res.iterations == 1 and res.converged and not res.stagnated


def test_power_nilpotent():
    N = np.triu(np.ones((3, 3)), 1)
    assert power_iteration_radius(N, iters=10) == pytest.approx(0.0, abs=1e-12)
    assert spectral_radius(N) <= 1e-10


def test_power_deterministic():
    A = ginibre(np.random.default_rng(2), 10)
    assert power_iteration(A, seed=5, power=4) == power_iteration(A, seed=5, power=4)


def test_power_flags_dominant_pair():
    # +1 and -1 tie in modulus; plain power iteration cannot settle
    res = power_iteration(np.diag([1.0, -1.0, 0.3]), iters=100, seed=0)
    assert res.stagnated and not res.converged
    # an even power collapses the pair
    assert power_iteration(np.diag([1.0, -1.0, 0.3]), iters=100, seed=0, power=2).converged


def test_power_rejects_bad_arguments():
    with pytest.raises(ValueError):
        power_iteration(np.eye(2), iters=0)
    with pytest.raises(ValueError):
        power_iteration(np.eye(2), power=0)


def test_assembled_waveguide_matrix():
    p = PhysicalParams(100.0, r=1.0)
    mode = make_mode(math.pi, compute_eta(p), build_decomposition(4, 1 / 300), WAVEGUIDE)
    T = assemble_iteration_matrix(mode)
    res = power_iteration(T, iters=5000, seed=0, power=64)
    assert res.converged
    assert res.radius == pytest.approx(spectral_radius(T), rel=1e-6)


def test_high_power_stays_finite():
    A = 50.0 * ginibre(np.random.default_rng(8), 8)
    res = power_iteration(A, iters=3000, power=64)
    assert math.isfinite(res.radius)
    assert res.radius == pytest.approx(spectral_radius(A), rel=1e-6)


matrices = st.builds(
    lambda seed, n: ginibre(np.random.default_rng(seed), n),
    st.integers(0, 2**32 - 1),
    st.integers(2, 30),
)


@settings(max_examples=40, deadline=None)
@given(A=matrices, seed=st.integers(0, 2**32 - 1))
def test_similarity_invariance(A, seed):
    rng = np.random.default_rng(seed)
    n = A.shape[0]
    # well-conditioned P: identity plus a small perturbation
    P = np.eye(n) + 0.3 * ginibre(rng, n)
    assert np.linalg.cond(P) < 100
    B = np.linalg.solve(P, A @ P)
    assert spectral_radius(B) == pytest.approx(spectral_radius(A), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(A=matrices, c=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_scaling(A, c):
    assert spectral_radius(c * A) == pytest.approx(abs(c) * spectral_radius(A), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(A=matrices)
def test_bounded_by_row_sum_norm(A):
    assert spectral_radius(A) <= np.abs(A).sum(axis=1).max() * (1 + 1e-12)
