import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hessquot.errors import InvalidInputError
from hessquot.sampling import sample_rotations
from hessquot.spectral import diagonal_spectrum, eigh_desc, perturbation, rotate_to_frame, sym_matrix


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_identity():
    spec = eigh_desc(np.eye(3))
    np.testing.assert_array_equal(spec.lam, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(spec.frame.T @ spec.frame, np.eye(3), atol=1e-15)
    assert spec.gap == 0.0 and spec.positive_definite


def test_rotated_diagonal():
    q = _rot(np.pi / 4)
    spec = eigh_desc(q @ np.diag([3.0, 1.0]) @ q.T)
    np.testing.assert_allclose(spec.lam, [3.0, 1.0], atol=1e-10)
    assert spec.gap == pytest.approx(2.0)


def test_rotate_with_identity_frame_is_identity(rng):
    xi = perturbation(rng.standard_normal((2, 2)))
    np.testing.assert_array_equal(rotate_to_frame(xi, diagonal_spectrum([2.0, 1.0])), xi)
    spec = eigh_desc(sample_rotations(rng, 1, 4)[0] @ np.diag([4.0, 3, 2, 1]) @ sample_rotations(rng, 1, 4)[0].T)
    np.testing.assert_allclose(rotate_to_frame(np.eye(4), spec), np.eye(4), atol=1e-14)


def test_upper_triangle_is_authoritative():
    w = np.array([[1.0, 2.0], [99.0, 3.0]])
    np.testing.assert_array_equal(sym_matrix(w), [[1.0, 2.0], [2.0, 3.0]])


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), [[1.0, np.inf], [0.0, 1.0]]])
def test_rejects_bad_input(bad):
    with pytest.raises(InvalidInputError):
        eigh_desc(bad)


def test_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        rotate_to_frame(np.eye(2), eigh_desc(np.eye(3)))


def test_negative_eigenvalue_is_flagged_not_raised():
    spec = eigh_desc(np.diag([1.0, -2.0]))
    assert not spec.positive_definite
    assert spec.lam[-1] == -2.0


sym = arrays(np.float64, (5, 5), elements=st.floats(-1e3, 1e3)).map(lambda a: a + a.T)


@given(sym)
def test_spectrum_invariants(w):
    spec = eigh_desc(w)
    assert np.all(np.diff(spec.lam) <= 0.0)
    q = spec.frame
    assert np.abs(q.T @ q - np.eye(5)).max() <= 1e-12
    tol = 1e-10 * (1.0 + np.abs(w).max())
    assert np.abs(q.T @ w @ q - np.diag(spec.lam)).max() <= tol
    assert np.abs(spec.matrix() - w).max() <= tol
    pos = spec.lam != 0.0
    np.testing.assert_allclose(spec.kappa[pos] * spec.lam[pos], 1.0, rtol=1e-15)


@given(sym, arrays(np.float64, (5, 5), elements=st.floats(-10, 10)))
def test_rotation_preserves_norm_and_trace(w, xi):
    spec = eigh_desc(w)
    xi = perturbation(xi)
    out = rotate_to_frame(xi, spec)
    assert np.array_equal(out, out.T)
    nrm = np.linalg.norm(xi)
    assert np.linalg.norm(out) == pytest.approx(nrm, rel=1e-12, abs=1e-12)
    assert np.trace(out) == pytest.approx(np.trace(xi), rel=1e-12, abs=1e-12 * (1 + nrm))


def test_stable_order_with_ties():
    spec = eigh_desc(np.diag([1.0, 2.0, 2.0, 0.5]))
    np.testing.assert_array_equal(spec.lam, [2.0, 2.0, 1.0, 0.5])
