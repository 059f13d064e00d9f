"""
4x4 matrix algebra of the Dirac-like Maxwell operator.

Maxwell's equations in a weakly inhomogeneous medium take the form
``(M . p) Psi = n Psi`` for the spinor Psi built out of the
Riemann-Silberstein vector ``F = n E + i c B``.  This module holds the
matrices, the spinor assembly and the paraxial z-evolution operator H.

Helicity convention
-------------------
With the analytic-signal convention ``exp(-i w t)`` the RS vector of a
*forward* left-circular wave vanishes identically.  Forward left-circular
light is therefore carried by the conjugate vector ``G = n E - i c B`` with
its y-component flipped, which obeys the same equation with the
"conjugate" matrix set ``{M_x, -M_y, M_z}``.  Both representations put the
dominant amplitude in component 1.
"""

from dataclasses import dataclass

import numpy as np

_I2 = np.eye(2)
_Z2 = np.zeros((2, 2))

BETA = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
IDENTITY = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class DiracMatrixSet:
    """The Hermitian matrices M_x, M_y, M_z (= beta) of the Dirac-like form."""

    m_x: np.ndarray
    m_y: np.ndarray
    m_z: np.ndarray
    conjugated: bool = False

    @property
    def beta(self):
        return self.m_z

    @property
    def perp(self):
        return self.m_x, self.m_y

    def dot_perp(self, p_perp):
        """M_perp . p_perp for a single transverse momentum."""
        return self.m_x * p_perp[0] + self.m_y * p_perp[1]

    def dot(self, p):
        return self.m_x * p[0] + self.m_y * p[1] + self.m_z * p[2]

    @property
    def orientation(self):
        """+1 if M_x M_y = i M_z, -1 if the cyclic products are reversed."""
        return -1 if self.conjugated else 1


def build_matrices(conjugated=False):
    m_x = np.block([[_Z2, _I2], [_I2, _Z2]]).astype(complex)
    m_y = 1j * np.block([[_Z2, -_I2], [_I2, _Z2]])
    if conjugated:
        m_y = -m_y
    return DiracMatrixSet(m_x, m_y, BETA.copy(), conjugated)


STANDARD = build_matrices(False)
CONJUGATE = build_matrices(True)


def matrix_set(conjugated):
    return CONJUGATE if conjugated else STANDARD


def verify_clifford(mset):
    """
    Residuals of the Clifford identities for a matrix set.

    Returns a dict with the maximum absolute deviation of ``M_i^2 = 1``,
    ``{M_i, M_j} = 0`` and ``M_i M_j = s i M_k`` (cyclic), where the sign
    ``s`` is the orientation that fits best (reported as ``orientation``).
    Hermiticity is included as well.
    """
    mats = (mset.m_x, mset.m_y, mset.m_z)
    square = max(np.abs(m @ m - IDENTITY).max() for m in mats)
    herm = max(np.abs(m - m.conj().T).max() for m in mats)
    anti = max(np.abs(mats[i] @ mats[j] + mats[j] @ mats[i]).max()
               for i in range(3) for j in range(3) if i != j)

    def cyclic(sign):
        return max(np.abs(mats[i] @ mats[j] - sign * 1j * mats[k]).max()
                   for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)))

    res_plus, res_minus = cyclic(1), cyclic(-1)
    orientation = 1 if res_plus <= res_minus else -1
    cyc = min(res_plus, res_minus)
    return {
        "square": float(square),
        "hermitian": float(herm),
        "anticommutator": float(anti),
        "cyclic": float(cyc),
        "orientation": orientation,
        "max": float(max(square, herm, anti, cyc)),
    }


def assemble_spinor(E, B, n, c=1.0, conjugated=False):
    """
    Build the 4-spinor ``(-F_x + i F_y, F_z, F_z, F_x + i F_y)``.

    ``E`` and ``B`` have shape ``(3, ...)``; trailing axes broadcast, so a
    whole transverse grid can be assembled at once.  With ``conjugated`` the
    vector ``G = n E - i c B`` with flipped y-component is used instead
    of ``F`` (the representation evolved by the conjugate matrix set).
    """
    E = np.asarray(E, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not (np.all(np.isfinite(E)) and np.all(np.isfinite(B))):
        raise ValueError("non-finite field components")
    if not np.all(np.asarray(n) > 0):
        raise ValueError("refractive index must be positive")
    if conjugated:
        F = n * E - 1j * c * B
        F = np.stack([F[0], -F[1], F[2]])
    else:
        F = n * E + 1j * c * B
    return spinor_from_rs(F)


def spinor_from_rs(F):
    F = np.asarray(F, dtype=complex)
    return np.stack([-F[0] + 1j * F[1], F[2], F[2], F[0] + 1j * F[1]])


def rs_from_spinor(psi):
    """Inverse of :func:`spinor_from_rs`; F_z is taken as the mean of c2, c3."""
    psi = np.asarray(psi, dtype=complex)
    fx = 0.5 * (psi[3] - psi[0])
    fy = -0.5j * (psi[0] + psi[3])
    fz = 0.5 * (psi[1] + psi[2])
    return np.stack([fx, fy, fz])


@dataclass(frozen=True)
class HamiltonianSymbol:
    n0: float
    zeta: float
    p_perp: tuple


def hamiltonian_matrix(sym, mset=STANDARD):
    """Return ``H = -(n0 + zeta) beta + beta M_perp . p_perp`` as a 4x4 array."""
    p = np.asarray(sym.p_perp, dtype=float)
    if np.hypot(*p) >= sym.n0 + sym.zeta:
        raise ValueError("|p_perp| must be below the local index")
    beta = mset.m_z
    return -(sym.n0 + sym.zeta) * beta + beta @ mset.dot_perp(p)


def odd_part(p_perp, mset=STANDARD):
    """The odd term written as ``i M_perp . (z x p_perp)``."""
    px, py = p_perp
    # z x p = (-p_y, p_x, 0)
    return 1j * (mset.m_x * (-py) + mset.m_y * px) * mset.orientation


@dataclass(frozen=True)
class EigenCheck:
    status: str
    residual: float = float("nan")
    spinor: np.ndarray = None


def circular_plane_wave(direction, sigma, n=1.0, c=1.0):
    """E and B of a unit circular plane wave travelling along ``direction``."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    e1 = np.cross([0.0, 1.0, 0.0], d)
    if np.linalg.norm(e1) < 1e-12:
        e1 = np.cross(d, [0.0, 0.0, 1.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    E = e1 + 1j * sigma * e2
    B = n * np.cross(d, E) / c
    return E, B


def plane_wave_eigencheck(direction, sigma, n=1.0, conjugated=False, tol=1e-12):
    """
    Check ``(M . p) Psi = n Psi`` for a forward circular plane wave.

    If the assembled spinor vanishes (a forward left-circular wave in the
    standard representation) the status is ``"conjugate representation
    required"`` and no residual is reported.
    """
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    E, B = circular_plane_wave(d, sigma, n)
    psi = assemble_spinor(E, B, n, conjugated=conjugated)
    norm = np.linalg.norm(psi)
    if norm < tol * n:
        return EigenCheck("conjugate representation required", spinor=psi)
    mset = matrix_set(conjugated)
    res = np.linalg.norm(mset.dot(n * d) @ psi - n * psi) / norm
    return EigenCheck("ok", float(res), psi)
