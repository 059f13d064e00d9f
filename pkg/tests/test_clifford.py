import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraxspin.clifford import (BETA, CONJUGATE, STANDARD, DiracMatrixSet, HamiltonianSymbol,
                                assemble_spinor, build_matrices, hamiltonian_matrix, odd_part,
                                plane_wave_eigencheck, rs_from_spinor, spinor_from_rs,
                                verify_clifford)

momentum = st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
zeta = st.floats(-0.1, 0.1)


def test_beta_is_diagonal():
    np.testing.assert_array_equal(build_matrices(False).m_z, np.diag([1, 1, -1, -1]))


def test_cyclic_product_standard():
    m = build_matrices(False)
    np.testing.assert_array_equal(m.m_x @ m.m_y, 1j * m.m_z)


def test_conjugate_negates_my():
    np.testing.assert_array_equal(build_matrices(True).m_y, -build_matrices(False).m_y)
    np.testing.assert_array_equal(build_matrices(True).m_x, build_matrices(False).m_x)


@pytest.mark.parametrize("mset, orient", [(STANDARD, 1), (CONJUGATE, -1)])
def test_clifford_exact(mset, orient):
    rep = verify_clifford(mset)
    assert rep["max"] == 0.0
    assert rep["orientation"] == orient == mset.orientation


def test_corrupted_set_detected():
    mx = STANDARD.m_x.copy()
    mx[0, 1] += 1e-3
    rep = verify_clifford(DiracMatrixSet(mx, STANDARD.m_y, STANDARD.m_z))
    assert rep["max"] >= 1e-3


@pytest.mark.parametrize("F, expected", [
    ((1, 1j, 0), (-2, 0, 0, 0)),
    ((1, -1j, 0), (0, 0, 0, 2)),
    ((0, 0, 1), (0, 1, 1, 0)),
])
def test_spinor_examples(F, expected):
    # E = F / n with B = 0 gives n E + i c B = F
    E = np.array(F, complex) / 1.3
    psi = assemble_spinor(E, np.zeros(3), 1.3)
    np.testing.assert_allclose(psi, expected, atol=1e-15)


def test_spinor_from_magnetic_part():
    # F = i c B alone
    psi = assemble_spinor(np.zeros(3), np.array([0, 0, -1j]) / 2.0, 1.0, c=2.0)
    np.testing.assert_allclose(psi, (0, 1, 1, 0), atol=1e-15)


def test_spinor_rejects_bad_input():
    with pytest.raises(ValueError):
        assemble_spinor([np.nan, 0, 0], [0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        assemble_spinor([1, 0, 0], [0, 0, 0], 0.0)


def test_spinor_broadcasts_over_grids(rng):
    E = rng.normal(size=(3, 5, 4)) + 1j * rng.normal(size=(3, 5, 4))
    B = rng.normal(size=(3, 5, 4))
    psi = assemble_spinor(E, B, 1.2)
    assert psi.shape == (4, 5, 4)
    np.testing.assert_allclose(psi[:, 2, 3], assemble_spinor(E[:, 2, 3], B[:, 2, 3], 1.2))


@given(st.lists(st.floats(-5, 5), min_size=12, max_size=12), st.floats(-3, 3))
def test_assemble_is_linear(v, a):
    v = np.array(v)
    E1, B1, E2, B2 = v[:3], v[3:6], v[6:9], v[9:]
    lhs = assemble_spinor(E1 + a * E2, B1 + a * B2, 1.4)
    rhs = assemble_spinor(E1, B1, 1.4) + a * assemble_spinor(E2, B2, 1.4)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_rs_round_trip(rng):
    F = rng.normal(size=3) + 1j * rng.normal(size=3)
    np.testing.assert_allclose(rs_from_spinor(spinor_from_rs(F)), F, atol=1e-15)


def test_hamiltonian_at_rest():
    H = hamiltonian_matrix(HamiltonianSymbol(1.0, 0.0, (0.0, 0.0)))
    np.testing.assert_array_equal(H, -BETA)


def test_odd_term_forms_agree():
    p = (0.2, 0.1)
    for mset in (STANDARD, CONJUGATE):
        lhs = mset.m_z @ mset.dot_perp(p)
        assert np.abs(lhs - odd_part(p, mset)).max() <= 1e-15


def test_hamiltonian_domain():
    with pytest.raises(ValueError):
        hamiltonian_matrix(HamiltonianSymbol(1.0, 0.0, (0.9, 0.5)))


@settings(max_examples=200)
@given(momentum, zeta, st.booleans())
def test_pseudo_hermitian(p, z, conj):
    mset = CONJUGATE if conj else STANDARD
    H = hamiltonian_matrix(HamiltonianSymbol(1.0, z, p), mset)
    assert np.abs(BETA @ H.conj().T @ BETA - H).max() <= 1e-13


@given(momentum)
def test_odd_part_anticommutes_with_beta(p):
    O = odd_part(p)
    assert np.abs(BETA @ O + O @ BETA).max() <= 1e-15
    assert np.abs(O[:2, :2]).max() == 0 and np.abs(O[2:, 2:]).max() == 0


@given(momentum, st.floats(1.0, 2.0))
def test_spectrum(p, n0):
    H = hamiltonian_matrix(HamiltonianSymbol(n0, 0.0, p))
    E = np.sqrt(n0**2 - p[0] ** 2 - p[1] ** 2)
    ev = np.sort(np.linalg.eigvals(H).real)
    np.testing.assert_allclose(ev, [-E, -E, E, E], atol=1e-12)


def test_eigencheck_forward_plus():
    chk = plane_wave_eigencheck([0, 0, 1], 1, n=1.5)
    assert chk.status == "ok"
    assert chk.residual == 0.0
    np.testing.assert_allclose(chk.spinor, (-6, 0, 0, 0))


def test_eigencheck_forward_minus_needs_conjugate():
    chk = plane_wave_eigencheck([0, 0, 1], -1)
    assert chk.status == "conjugate representation required"
    conj = plane_wave_eigencheck([0, 0, 1], -1, conjugated=True)
    assert conj.status == "ok" and conj.residual == 0.0


def test_eigencheck_tilted():
    th = 0.01
    d = [np.sin(th), 0, np.cos(th)]
    assert plane_wave_eigencheck(d, 1).residual <= 1e-12
    # oracle: the spinor spans the +n eigenspace of M.p found by numerical diagonalization
    psi = plane_wave_eigencheck(d, 1).spinor
    w, v = np.linalg.eigh(STANDARD.dot(np.array(d)))
    top = v[:, w > 0]
    np.testing.assert_allclose(top @ (top.conj().T @ psi), psi, atol=1e-12)


@given(st.floats(0.0, 0.5), st.floats(0, 2 * np.pi), st.sampled_from([1, -1]))
def test_eigencheck_helicity_representation(theta, phi, sigma):
    d = [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    chk = plane_wave_eigencheck(d, sigma, conjugated=sigma < 0)
    assert chk.status == "ok" and chk.residual <= 1e-12


def test_eigencheck_requires_unit_direction():
    with pytest.raises(ValueError):
        plane_wave_eigencheck([0, 0, 2], 1)
