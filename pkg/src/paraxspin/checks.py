"""
Self-verification suite behind ``paraxspin verify``.

Each check returns a residual and the tolerance it is held to.  Checks
flagged ``lower_bound`` pass when the value is at least the tolerance
(used for convergence ratios).  Random samples come from
``numpy.random.default_rng(seed)``.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .clifford import (CONJUGATE, IDENTITY, STANDARD, DiracMatrixSet, HamiltonianSymbol,
                       hamiltonian_matrix, odd_part, plane_wave_eigencheck, verify_clifford)
from .fw import (berry_connection_exact, berry_connection_fd, berry_connection_paraxial,
                 berry_curvature, curl_fd, fw_matrix, position_commutator_check,
                 projected_connection)
from .medium import LinearGradient
from .transport import RayState, berry_phase, spin_hall_deflection, trace_ray
from .wave import kinetic_propagator


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    lower_bound: bool = False

    @property
    def passed(self):
        if not math.isfinite(self.value):
            return False
        return self.value >= self.tolerance if self.lower_bound else self.value <= self.tolerance

    def as_dict(self):
        return {**asdict(self), "passed": self.passed}


def random_p_perp(rng, count, n0=1.0, frac=0.9):
    """Uniform samples of the disc |p_perp| <= frac * n0."""
    r = frac * n0 * np.sqrt(rng.uniform(size=count))
    phi = rng.uniform(0, 2 * np.pi, size=count)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _corrupted(mset, amount=1e-3):
    mx = mset.m_x.copy()
    mx[0, 2] += amount
    return DiracMatrixSet(mx, mset.m_y, mset.m_z, mset.conjugated)


def check_clifford(fault=False):
    out = []
    for name, mset in (("clifford_standard", STANDARD), ("clifford_conjugate", CONJUGATE)):
        if fault == name:
            mset = _corrupted(mset)
        out.append(Check(name, verify_clifford(mset)["max"], 1e-15))
    return out


def check_pseudo_hermiticity(rng, count=1000):
    worst = 0.0
    beta = STANDARD.m_z
    for (px, py), zeta in zip(random_p_perp(rng, count, frac=0.8),
                              rng.uniform(-0.1, 0.1, size=count)):
        H = hamiltonian_matrix(HamiltonianSymbol(1.0, zeta, (px, py)))
        worst = max(worst, np.abs(beta @ H.conj().T @ beta - H).max())
    return Check("pseudo_hermiticity", float(worst), 1e-13)


def check_odd_identity(rng, count=200):
    worst = 0.0
    for p in random_p_perp(rng, count):
        for mset in (STANDARD, CONJUGATE):
            lhs = mset.m_z @ mset.dot_perp(p)
            worst = max(worst, np.abs(lhs - odd_part(p, mset)).max())
    return Check("odd_term_identity", float(worst), 1e-15)


def check_eigen():
    worst = plane_wave_eigencheck([0.0, 0.0, 1.0], 1, n=1.5).residual
    th = 0.01
    worst = max(worst, plane_wave_eigencheck([math.sin(th), 0.0, math.cos(th)], 1).residual)
    return Check("plane_wave_eigen", float(worst), 1e-12)


def check_fw(rng, count=1000):
    diag = inv = 0.0
    for p in random_p_perp(rng, count, n0=1.0):
        fw = fw_matrix(p, 1.0)
        H0 = -STANDARD.m_z + STANDARD.m_z @ STANDARD.dot_perp(p)
        D = fw.inverse @ H0 @ fw.matrix + fw.energy * STANDARD.m_z
        diag = max(diag, np.abs(D[:2, 2:]).max(), np.abs(D[2:, :2]).max())
        inv = max(inv, np.abs(fw.inverse - np.linalg.inv(fw.matrix)).max())
    return [Check("fw_diagonalization", float(diag), 1e-12),
            Check("fw_closed_inverse", float(inv), 1e-12)]


def check_connection():
    p = (0.1, 0.05)
    fd = berry_connection_fd(p, 1.0, h=1e-5)
    ex = berry_connection_exact(p, 1.0)
    out = [Check("connection_exact_vs_fd", float(np.abs(fd - ex).max()), 1e-8)]
    ex = berry_connection_exact((0.05, 0.0), 1.0)
    px = berry_connection_paraxial((0.05, 0.0), 1.0)
    rel = np.abs(px - ex).max() / np.abs(ex).max()
    out.append(Check("connection_paraxial_rel", float(rel), 5e-3))
    return out


def check_curvature(rng, count=50):
    worst = trans = 0.0
    for pp in random_p_perp(rng, count, frac=0.5):
        p = np.array([pp[0], pp[1], rng.uniform(0.8, 1.2)])
        c = curl_fd(projected_connection, p)
        worst = max(worst, np.abs(c - berry_curvature(p)).max())
        trans = max(trans, abs(projected_connection(p) @ p))
    return [Check("curvature_curl", float(worst), 1e-8),
            Check("connection_transversality", float(trans), 1e-15)]


def check_commutator(n=41, h=0.01):
    base = (np.arange(n) - n // 2) * h
    axes = [base, base, 1.0 + base]
    rep = position_commutator_check(
        1, axes, lambda X, Y, Z: np.exp(-(X**2 + Y**2 + (Z - 1) ** 2) / (2 * 0.06**2)))
    return Check("commutator_h2_ratio", float(rep.ratio), 3.5, lower_bound=True)


def check_kinetic(rng, count=1000):
    worst = pu = 0.0
    k, dz = 200.0, 0.01
    for mset in (STANDARD, CONJUGATE):
        for p in random_p_perp(rng, count // 2, frac=0.9):
            P = kinetic_propagator(p, dz, k, 1.0, mset)
            K = mset.m_z @ (-IDENTITY + mset.dot_perp(p))
            worst = max(worst, np.abs(P - expm(-1j * k * dz * K)).max())
            pu = max(pu, np.abs(P.conj().T @ mset.m_z @ P - mset.m_z).max())
    return [Check("kinetic_vs_expm", float(worst), 1e-12),
            Check("kinetic_pseudo_unitary", float(pu), 1e-13)]


def check_ray():
    g = 0.01
    med = LinearGradient(1.0, (g, 0, 0), bounds=((-5, 5), (-5, 5), (-1, 20)))
    tr = trace_ray(med, RayState.launch(med, (0, 0, 0), sigma=0), 100.0, 10.0, step=0.05)
    exact = (math.cosh(g * 10.0) - 1.0) / g
    return Check("ray_linear_gradient", float(abs(tr.r[-1, 0] - exact)), 1e-8)


def planar_path(dp=0.1, samples=2001):
    px = np.linspace(0.0, dp, samples)
    return np.column_stack([px, np.zeros_like(px), np.sqrt(1 - px**2)])


def cone_path(theta, samples=4001, turns=1.0):
    phi = np.linspace(0.0, 2 * np.pi * turns, samples)
    s = math.sin(theta)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), np.full_like(phi, math.cos(theta))])


def check_quadratures():
    k = 100.0
    ref = quad(lambda p: 0.5 / (1 - p * p) ** 2, 0.0, 0.1, epsabs=1e-15, epsrel=1e-13)[0] / k
    d = spin_hall_deflection(planar_path(), k, 1)
    rel = abs(d[1] - ref) / ref
    th = 0.05
    closed = 0.25 * math.tan(th) ** 2 * 2 * math.pi
    cone = abs(berry_phase(cone_path(th), 1) - closed) / closed
    return [Check("spin_hall_quadrature_rel", float(rel), 1e-6),
            Check("cone_berry_phase_rel", float(cone), 1e-6)]


def run_checks(seed=0, fault=None):
    """Run every check; ``fault`` names a check whose input is corrupted (test hook)."""
    rng = np.random.default_rng(seed)
    checks = [*check_clifford(fault), check_pseudo_hermiticity(rng), check_odd_identity(rng),
              check_eigen(), *check_fw(rng), *check_connection(), *check_curvature(rng),
              check_commutator(), *check_kinetic(rng), check_ray(), *check_quadratures()]
    names = {c.name for c in checks}
    if fault and fault not in names:
        raise ValueError(f"unknown check {fault!r}")
    for c in checks:
        if c.name == fault and not c.name.startswith("clifford"):
            c.value = c.value - 1.0 if c.lower_bound else c.value + 1e-3 + c.tolerance
    return checks
