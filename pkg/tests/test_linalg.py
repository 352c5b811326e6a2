import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from rbn import linalg, states
from rbn.errors import InvalidDimsError, InvalidOperatorError, NotPositiveSemidefiniteError

Z = np.diag([1.0, -1.0])
KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def test_kron_examples():
    assert np.array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(linalg.kron(Z, Z), np.diag([1, -1, -1, 1]))
    m = linalg.kron(KET0, KET1)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.array_equal(m, expected)


def test_kron_rejects_nonsquare():
    with pytest.raises(InvalidOperatorError):
        linalg.kron(np.ones((2, 3)), np.eye(2))


def test_partial_trace_product_state(rng):
    a = states.random_density_matrix([2], rng).matrix
    b = states.random_density_matrix([3], rng).matrix
    np.testing.assert_allclose(linalg.partial_trace(np.kron(a, b), [2, 3], [0]), a, atol=1e-12)
    np.testing.assert_allclose(linalg.partial_trace(np.kron(a, b), [2, 3], [1]), b, atol=1e-12)


def test_partial_trace_ghz_pair():
    ghz = states.ghz_state().matrix
    expected = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / 2
    np.testing.assert_allclose(linalg.partial_trace(ghz, [2, 2, 2], [0, 1]), expected, atol=1e-12)


def test_partial_trace_maximally_mixed():
    np.testing.assert_allclose(linalg.partial_trace(np.eye(8) / 8, [2, 2, 2], [1]), np.eye(2) / 2)


def test_partial_trace_matches_loop_oracle(rng):
    rho = states.random_density_matrix([2, 3, 2], rng).matrix
    t = rho.reshape(2, 3, 2, 2, 3, 2)
    oracle = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for a2 in range(2):
                for c2 in range(2):
                    oracle[a * 2 + c, a2 * 2 + c2] = sum(t[a, b, c, a2, b, c2] for b in range(3))
    np.testing.assert_allclose(linalg.partial_trace(rho, [2, 3, 2], [0, 2]), oracle, atol=1e-14)


@pytest.mark.parametrize("dims, keep", [([2, 2], [0, 1]), ([2, 3], [0]), ([2, 2], []), ([2, 2], [2])])
def test_partial_trace_invalid(dims, keep):
    with pytest.raises(InvalidDimsError):
        linalg.partial_trace(np.eye(4) / 4, dims, keep)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from([[2, 2], [2, 2, 2], [3, 2], [2, 3, 2]]),
       data=st.data())
def test_partial_trace_preserves_trace(seed, dims, data):
    rho = states.random_density_matrix(dims, np.random.default_rng(seed)).matrix
    keep = data.draw(st.lists(st.integers(0, len(dims) - 1), min_size=1, max_size=len(dims) - 1, unique=True))
    assert abs(np.trace(linalg.partial_trace(rho, dims, keep)) - 1) < 1e-12


def test_eigenvalue_examples():
    np.testing.assert_allclose(linalg.hermitian_eigenvalues(Z), [1, -1])
    np.testing.assert_allclose(linalg.hermitian_eigenvalues(np.eye(8) / 8), [1 / 8] * 8)
    np.testing.assert_allclose(linalg.hermitian_eigenvalues(states.ghz_state().matrix), [1] + [0] * 7,
                               atol=1e-12)


def test_eigenvalues_reject_non_hermitian():
    with pytest.raises(InvalidOperatorError):
        linalg.hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("d", [2, 4, 8])
def test_eigenvalues_recover_conjugated_diagonal(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        diag = rng.normal(size=d)
        u = unitary_group.rvs(d, random_state=rng)
        got = linalg.hermitian_eigenvalues(u @ np.diag(diag) @ u.conj().T)
        np.testing.assert_allclose(got, np.sort(diag)[::-1], atol=1e-9)


def test_von_neumann_examples():
    assert abs(linalg.von_neumann_entropy(states.w_state().matrix)) < 1e-12
    assert linalg.von_neumann_entropy(np.eye(8) / 8) == pytest.approx(3 * math.log(2), abs=1e-12)
    cc = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / 2
    assert linalg.von_neumann_entropy(cc) == pytest.approx(math.log(2), abs=1e-12)


def test_von_neumann_rejects_negative_spectrum():
    with pytest.raises(NotPositiveSemidefiniteError):
        linalg.von_neumann_entropy(np.diag([1.1, -0.1]))


def test_spectrum_entropy_clamps_noise():
    assert linalg.spectrum_entropy(np.array([1.0, -5e-11])) == 0.0


def test_shannon_examples():
    assert linalg.shannon_entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert linalg.shannon_entropy([1, 0]) == 0.0
    assert linalg.shannon_entropy([1 / 3] * 3) == pytest.approx(math.log(3), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8).filter(lambda v: sum(v) > 1e-3))
def test_diagonal_entropy_equals_shannon(weights):
    p = np.array(weights) / sum(weights)
    p[-1] = 1.0 - p[:-1].sum()
    p = np.clip(p, 0, None)
    p /= p.sum()
    assert abs(linalg.von_neumann_entropy(np.diag(p)) - linalg.shannon_entropy(p)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.sampled_from([2, 4, 8]))
def test_entropy_bounds(seed, d):
    rho = states.random_density_matrix([d], np.random.default_rng(seed)).matrix
    s = linalg.von_neumann_entropy(rho)
    assert -1e-12 <= s <= math.log(d) + 1e-12
