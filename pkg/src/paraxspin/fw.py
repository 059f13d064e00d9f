"""
Foldy-Wouthuysen diagonalization and momentum-space Berry geometry.

The homogeneous operator ``H0 = -n0 beta + beta M_perp . p_perp`` is
brought to ``-E beta`` by the Hermitian (non-unitary) matrix

    U = (n0 + E + M_perp . p_perp) / sqrt(2 E (n0 + E)),   E = sqrt(n0^2 - p_perp^2).

The connection ``i U^{-1} grad_p U`` is available in exact and paraxial
matrix form; after projecting on the two circular polarizations it reduces
to the vector ``(z x p) / (4 p_z^2)`` with curl ``p / (2 p_z^3)``.
"""

from dataclasses import dataclass

import numpy as np

from .clifford import IDENTITY, STANDARD
from .errors import ParaxialDomainError


def fw_energy(p_perp, n0):
    p = float(np.hypot(*p_perp))
    if p >= n0:
        raise ParaxialDomainError(f"|p_perp| = {p:g} must be below n0 = {n0:g}")
    return float(np.sqrt(n0 * n0 - p * p))


@dataclass(frozen=True)
class FwTransform:
    n0: float
    p_perp: tuple
    energy: float
    theta: float
    matrix: np.ndarray
    inverse: np.ndarray


def fw_angle(p_perp, n0):
    """The angle solving ``tanh(2 |p| theta) = |p| / n0`` (limit 1/(2 n0) at p = 0)."""
    p = float(np.hypot(*p_perp))
    fw_energy(p_perp, n0)
    u = p / n0
    if u < 1e-6:
        return 0.5 / n0 * (1.0 + u * u / 3.0)
    return float(np.arctanh(u) / (2.0 * p))


def fw_matrix(p_perp, n0, mset=STANDARD):
    E = fw_energy(p_perp, n0)
    mp = mset.dot_perp(p_perp)
    norm = np.sqrt(2.0 * E * (n0 + E))
    U = ((n0 + E) * IDENTITY + mp) / norm
    # closed-form inverse: U^-1 flips the sign of the kinetic term
    Uinv = ((n0 + E) * IDENTITY - mp) / norm
    return FwTransform(n0, tuple(p_perp), E, fw_angle(p_perp, n0), U, Uinv)


def fw_matrix_series(p_perp, n0, mset=STANDARD):
    """U from the exponential form ``cosh(p theta) + (M.p/p) sinh(p theta)``."""
    p = float(np.hypot(*p_perp))
    th = fw_angle(p_perp, n0)
    x = p * th
    # sinh(x) / p written as th * sinh(x) / x to stay finite as p -> 0
    shc = th * (np.sinh(x) / x if x > 1e-6 else 1.0 + x * x / 6.0)
    return np.cosh(x) * IDENTITY + mset.dot_perp(p_perp) * shc


def diagonalization_residual(p_perp, n0, mset=STANDARD):
    """Max entry of ``U^-1 H0 U + E beta`` (zero when U diagonalizes H0)."""
    fw = fw_matrix(p_perp, n0, mset)
    beta = mset.m_z
    H0 = -n0 * beta + beta @ mset.dot_perp(p_perp)
    D = fw.inverse @ H0 @ fw.matrix + fw.energy * beta
    return float(np.abs(D).max())


def _zcross(p_perp):
    return np.array([-p_perp[1], p_perp[0], 0.0])


def berry_connection_exact(p_perp, n0, mset=STANDARD):
    """
    Matrix-valued connection ``i U^-1 grad_p U`` in closed form.

    Returns an array of shape (3, 4, 4); the z-slot is identically zero since
    U depends on the transverse momentum only.  The beta term changes sign
    with the orientation of the matrix set.
    """
    E = fw_energy(p_perp, n0)
    p = np.array([p_perp[0], p_perp[1], 0.0])
    zc = _zcross(p_perp)
    mp = mset.dot_perp(p_perp)
    mperp = (mset.m_x, mset.m_y, np.zeros((4, 4), complex))
    A = np.empty((3, 4, 4), dtype=complex)
    for j in range(3):
        A[j] = (mset.orientation * mset.m_z * zc[j] / (2 * E * (n0 + E))
                + 1j * mp * p[j] / (2 * E**2 * (n0 + E))
                + 1j * mperp[j] / (2 * E))
    return A


def berry_connection_paraxial(p_perp, p_z, mset=STANDARD):
    """Leading paraxial form of the matrix connection (``E ~ n0 = p_z``)."""
    if p_z <= 0 or np.hypot(*p_perp) >= p_z:
        raise ParaxialDomainError("paraxial connection needs |p_perp| < p_z")
    p = np.array([p_perp[0], p_perp[1], 0.0])
    zc = _zcross(p_perp)
    mp = mset.dot_perp(p_perp)
    mperp = (mset.m_x, mset.m_y, np.zeros((4, 4), complex))
    A = np.empty((3, 4, 4), dtype=complex)
    for j in range(3):
        A[j] = (mset.orientation * mset.m_z * zc[j] / (4 * p_z**2)
                + 1j * mp * p[j] / (4 * p_z**3)
                + 1j * mperp[j] / (2 * p_z))
    return A


def berry_connection_fd(p_perp, n0, h=1e-5, mset=STANDARD):
    """Finite-difference oracle ``i U^-1 dU/dp_j`` (central differences)."""
    Uinv = fw_matrix(p_perp, n0, mset).inverse
    A = np.zeros((3, 4, 4), dtype=complex)
    for j in range(2):
        dp = np.zeros(2)
        dp[j] = h
        Up = fw_matrix(np.add(p_perp, dp), n0, mset).matrix
        Um = fw_matrix(np.subtract(p_perp, dp), n0, mset).matrix
        A[j] = 1j * Uinv @ (Up - Um) / (2 * h)
    # A[2] stays zero: U takes no p_z argument, so its p_z difference quotient vanishes
    return A


def _check_forward(p):
    if np.any(p[..., 2] <= 0):
        raise ParaxialDomainError("p_z must be positive")


def projected_connection(p, sigma=1):
    """``sigma (z x p) / (4 p_z^2)``; p has shape (..., 3)."""
    p = np.asarray(p, dtype=float)
    _check_forward(p)
    pz2 = p[..., 2] ** 2
    out = np.zeros_like(p)
    out[..., 0] = -p[..., 1] / (4 * pz2)
    out[..., 1] = p[..., 0] / (4 * pz2)
    return sigma * out


def berry_curvature(p):
    """Curvature ``p / (2 p_z^3)`` of the projected connection (exact p_z)."""
    p = np.asarray(p, dtype=float)
    _check_forward(p)
    return p / (2 * p[..., 2:3] ** 3)


def berry_curvature_monopole(p):
    """The monopole approximation ``p / (2 |p|^3)`` (uses p ~ p_z)."""
    p = np.asarray(p, dtype=float)
    _check_forward(p)
    return p / (2 * np.linalg.norm(p, axis=-1, keepdims=True) ** 3)


def curl_fd(field, p, h=1e-5):
    """Central-difference curl of a vector field ``field(p) -> (3,)`` at ``p``."""
    p = np.asarray(p, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        J[:, j] = (field(p + dp) - field(p - dp)) / (2 * h)
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


@dataclass(frozen=True)
class CommutatorReport:
    residual: np.ndarray      # (3, 3) max residual per ordered pair (i, j)
    max_residual: float
    coarse_residual: float    # same operator with a 2h stencil
    ratio: float
    resolved: bool


def _dfd(f, axis, h, stride):
    return (np.roll(f, -stride, axis) - np.roll(f, stride, axis)) / (2 * h * stride)


def position_commutator_check(sigma, axes, test_fn, k=1.0, stride=1):
    """
    Check ``[r_i, r_j] = i k^-2 sigma eps_ijk B_k`` on a momentum grid.

    ``axes`` are the three uniform 1D coordinate arrays (same spacing) of the
    momentum grid and ``test_fn(PX, PY, PZ)`` a smooth function that decays
    well inside it.  The physical coordinates act as
    ``r_i f = i/k d_i f + sigma/k A_i f`` with central differences.  The
    residual is evaluated at stride 1 and 2; ``resolved`` flags whether the
    reduction is compatible with h^2 scaling.
    """
    PX, PY, PZ = np.meshgrid(*axes, indexing="ij")
    P = np.stack([PX, PY, PZ], axis=-1)
    h = float(axes[0][1] - axes[0][0])
    f = test_fn(PX, PY, PZ).astype(complex)
    A = projected_connection(P, 1.0)
    B = berry_curvature(P)

    def residuals(s):
        def r(i, g):
            return 1j / k * _dfd(g, i, h, s) + sigma / k * A[..., i] * g

        pad = 2 * s
        inner = (slice(pad, -pad),) * 3
        res = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                comm = r(i, r(j, f)) - r(j, r(i, f))
                expect = np.zeros_like(f)
                for m in range(3):
                    eps = _levi_civita(i, j, m)
                    if eps:
                        expect = expect + 1j / k**2 * sigma * eps * B[..., m] * f
                res[i, j] = np.abs((comm - expect)[inner]).max()
        return res

    fine = residuals(stride)
    coarse = residuals(2 * stride)
    fmax, cmax = float(fine.max()), float(coarse.max())
    ratio = cmax / fmax if fmax > 0 else np.inf
    return CommutatorReport(fine, fmax, cmax, ratio, bool(fmax == 0 or ratio >= 3.0))


def _levi_civita(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2
