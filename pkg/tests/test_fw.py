import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraxspin.clifford import CONJUGATE, IDENTITY, STANDARD
from paraxspin.errors import ParaxialDomainError
from paraxspin.fw import (berry_connection_exact, berry_connection_fd,
                          berry_connection_paraxial, berry_curvature, berry_curvature_monopole,
                          curl_fd, diagonalization_residual, fw_angle, fw_energy, fw_matrix,
                          fw_matrix_series, position_commutator_check, projected_connection)

disc = st.tuples(st.floats(0, 0.9), st.floats(0, 2 * np.pi)).map(
    lambda rp: (rp[0] * math.cos(rp[1]), rp[0] * math.sin(rp[1])))
forward = st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.6, 1.5))


def test_energy_examples():
    assert fw_energy((0.0, 0.0), 1.5) == 1.5
    assert fw_energy((0.3, 0.0), 1.5) == pytest.approx(1.469694, abs=1e-6)
    with pytest.raises(ParaxialDomainError):
        fw_energy((1.5, 0.0), 1.5)


def test_identity_at_rest():
    fw = fw_matrix((0.0, 0.0), 1.3)
    np.testing.assert_allclose(fw.matrix, IDENTITY, atol=1e-15)
    assert fw.energy == 1.3
    assert fw.theta == pytest.approx(0.5 / 1.3)


def test_diagonalizes_example():
    assert diagonalization_residual((0.2, 0.1), 1.0) <= 1e-12


def test_hermitian_not_unitary():
    U = fw_matrix((0.2, 0.1), 1.0).matrix
    assert np.abs(U @ U.conj().T - U @ U).max() == 0.0
    assert np.abs(U @ U.conj().T - IDENTITY).max() > 1e-3


def test_pseudo_unitary():
    U = fw_matrix((0.2, 0.1), 1.0).matrix
    np.testing.assert_allclose(U @ STANDARD.m_z @ U, STANDARD.m_z, atol=1e-15)


@settings(max_examples=300)
@given(disc, st.booleans())
def test_diagonalization_random(p, conj):
    mset = CONJUGATE if conj else STANDARD
    fw = fw_matrix(p, 1.0, mset)
    H0 = -mset.m_z + mset.m_z @ mset.dot_perp(p)
    D = fw.inverse @ H0 @ fw.matrix + fw.energy * mset.m_z
    assert max(np.abs(D[:2, 2:]).max(), np.abs(D[2:, :2]).max()) <= 1e-12
    assert np.abs(fw.inverse - np.linalg.inv(fw.matrix)).max() <= 1e-12


@given(disc)
def test_exponential_form_and_angle(p):
    np.testing.assert_allclose(fw_matrix_series(p, 1.0), fw_matrix(p, 1.0).matrix, atol=1e-13)
    r = math.hypot(*p)
    if r > 1e-6:
        assert math.tanh(2 * r * fw_angle(p, 1.0)) == pytest.approx(r, rel=1e-12)


def test_conjugate_set_flips_beta_term():
    p = (0.1, 0.05)
    a, b = berry_connection_exact(p, 1.0), berry_connection_exact(p, 1.0, CONJUGATE)
    assert a[0][0, 0].real == pytest.approx(-b[0][0, 0].real)


def test_connection_at_rest():
    A = berry_connection_exact((0.0, 0.0), 1.0)
    np.testing.assert_allclose(A[0], 0.5j * STANDARD.m_x, atol=1e-16)
    np.testing.assert_allclose(A[1], 0.5j * STANDARD.m_y, atol=1e-16)
    np.testing.assert_array_equal(A[2], 0)


@pytest.mark.parametrize("mset", [STANDARD, CONJUGATE])
def test_connection_matches_finite_difference(mset):
    p = (0.1, 0.05)
    fd = berry_connection_fd(p, 1.0, h=1e-5, mset=mset)
    assert np.abs(fd - berry_connection_exact(p, 1.0, mset)).max() <= 1e-8
    assert np.abs(fd[2]).max() <= 1e-10


def test_connection_fd_converges():
    p = (0.3, -0.2)
    ex = berry_connection_exact(p, 1.2)
    e1 = np.abs(berry_connection_fd(p, 1.2, h=1e-2) - ex).max()
    e2 = np.abs(berry_connection_fd(p, 1.2, h=5e-3) - ex).max()
    assert 3.5 < e1 / e2 < 4.5


def test_paraxial_connection():
    A = berry_connection_paraxial((0.0, 0.0), 1.0)
    np.testing.assert_allclose(A[0], 0.5j * STANDARD.m_x)
    ex = berry_connection_exact((0.05, 0.0), 1.0)
    px = berry_connection_paraxial((0.05, 0.0), 1.0)
    assert np.abs(px - ex).max() / np.abs(ex).max() <= 5e-3
    a1 = berry_connection_paraxial((0.05, 0.02), 1.0) - berry_connection_paraxial((0, 0), 1.0)
    a2 = berry_connection_paraxial((0.05, 0.02), 2.0) - berry_connection_paraxial((0, 0), 2.0)
    # first (beta) term: diagonal blocks only, scaling 1 / p_z^2
    np.testing.assert_allclose(np.diag(a2[0]).real * 4, np.diag(a1[0]).real, atol=1e-15)


def test_paraxial_error_is_second_order():
    def err(s):
        ex = berry_connection_exact((s, 0.0), 1.0)
        return np.abs(berry_connection_paraxial((s, 0.0), 1.0) - ex).max()
    assert 3.5 < err(0.1) / err(0.05) < 4.5


def test_projected_connection_examples():
    np.testing.assert_array_equal(projected_connection([0, 0, 1.0]), [0, 0, 0])
    np.testing.assert_allclose(projected_connection([0.1, 0.2, 1.0]), [-0.05, 0.025, 0])
    np.testing.assert_array_equal(projected_connection([0.1, 0.2, 1.0], -1),
                                  -projected_connection([0.1, 0.2, 1.0], 1))
    with pytest.raises(ParaxialDomainError):
        projected_connection([0.1, 0, 0.0])


def test_projection_of_matrix_connection():
    # elements (1,1), (1,4), (4,1), (4,4) of the beta term give the projected vector
    p = (0.04, -0.03)
    A = berry_connection_paraxial(p, 1.0)
    proj = projected_connection([p[0], p[1], 1.0])
    assert A[0][0, 0].real == pytest.approx(proj[0])
    assert A[1][0, 0].real == pytest.approx(proj[1])
    assert A[0][0, 3] == 0 and A[0][3, 0] == 0
    assert A[0][3, 3].real == pytest.approx(-proj[0])


def test_curvature_examples():
    np.testing.assert_allclose(berry_curvature([0, 0, 1.0]), [0, 0, 0.5])
    np.testing.assert_allclose(berry_curvature([0.1, 0, 1.0]), [0.05, 0, 0.5])
    p = np.array([0.1, 0.2, 1.0])
    assert np.abs(curl_fd(projected_connection, p) - berry_curvature(p)).max() <= 1e-8


@settings(max_examples=100)
@given(forward, st.sampled_from([1, -1]))
def test_transverse_and_odd(p, sigma):
    p = np.array(p)
    a = projected_connection(p, sigma)
    assert abs(a @ p) <= 1e-15
    np.testing.assert_array_equal(projected_connection(p, -sigma), -a)


@settings(max_examples=50)
@given(forward)
def test_curl_identity(p):
    p = np.array(p)
    c = curl_fd(projected_connection, p)
    assert np.abs(c - berry_curvature(p)).max() <= 1e-7 * max(1.0, p[2] ** -4)


def test_monopole_limit():
    p = np.array([0.01, 0.0, 1.0])
    np.testing.assert_allclose(berry_curvature_monopole(p), berry_curvature(p), rtol=2e-4)


def _axes(n=41, h=0.01):
    b = (np.arange(n) - n // 2) * h
    return [b, b, 1.0 + b]


def _gauss(X, Y, Z):
    return np.exp(-(X**2 + Y**2 + (Z - 1) ** 2) / (2 * 0.06**2))


def test_commutator_h2_scaling():
    rep = position_commutator_check(1, _axes(), _gauss)
    assert rep.resolved
    assert 3.5 < rep.ratio < 4.5
    assert rep.residual[2, 2] == 0.0


def test_commutator_without_connection():
    rep = position_commutator_check(0, _axes(), _gauss)
    assert rep.max_residual < 1e-12
