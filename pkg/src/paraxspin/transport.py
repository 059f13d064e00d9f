"""
Semiclassical tracing of circularly polarized paraxial rays.

The ray is marched in z.  With ``p`` the dimensionless wave vector
(``|p| = n(r)``) the equations are

    dp/dz   = grad n(r) * n / p_z
    dr_perp/dz = p_perp / p_z + (sigma / k) (B(p) x dp/dz)_perp

with ``B(p) = p / (2 p_z^3)``.  ``p_z`` is never integrated; it is rebuilt
from the dispersion relation at every stage, so ``|p| = n(r)`` holds to
rounding.  Rays bend toward higher index.

Side channels integrated with the ray: the sigma-weighted Berry phase
``sigma * int A.dp``, the anomalous shift ``sigma/k int B x dp`` and the
dynamical phase ``k int p.dr``.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import ParaxialityLost
from .fw import berry_curvature, projected_connection

TRAJECTORY_COLUMNS = ("z", "r_x", "r_y", "r_z", "p_x", "p_y", "p_z", "sigma",
                      "berry_phase", "shift_x", "shift_y", "dyn_phase")


@dataclass
class RayState:
    r: np.ndarray
    p: np.ndarray
    sigma: int = 1
    berry_phase: float = 0.0
    anomalous_shift: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dynamical_phase: float = 0.0

    @classmethod
    def launch(cls, medium, r, p_perp=(0.0, 0.0), sigma=1):
        """State at ``r`` with transverse momentum ``p_perp`` and p_z from dispersion."""
        r = np.asarray(r, dtype=float)
        n = float(medium.index_at(r))
        pz2 = n * n - p_perp[0] ** 2 - p_perp[1] ** 2
        if pz2 <= 0:
            raise ParaxialityLost("launch momentum is not forward")
        return cls(r, np.array([p_perp[0], p_perp[1], math.sqrt(pz2)]), sigma)


@dataclass
class Trajectory:
    z: np.ndarray
    r: np.ndarray            # (N, 3)
    p: np.ndarray            # (N, 3)
    sigma: int
    berry_phase: np.ndarray  # (N,)
    shift: np.ndarray        # (N, 3)
    dyn_phase: np.ndarray    # (N,)
    step: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.z)

    def state(self, i=-1):
        return RayState(self.r[i].copy(), self.p[i].copy(), self.sigma,
                        float(self.berry_phase[i]), self.shift[i].copy(),
                        float(self.dyn_phase[i]))

    def angles(self):
        """Zenith and unwrapped azimuth of the momentum along the path."""
        theta = np.arctan2(np.hypot(self.p[:, 0], self.p[:, 1]), self.p[:, 2])
        phi = np.unwrap(np.arctan2(self.p[:, 1], self.p[:, 0]))
        return theta, phi


def _rhs(medium, k, sigma, anomalous, strict):
    def f(z, y):
        r = np.array([y[0], y[1], z])
        n = float(medium.index_at(r))
        grad = medium.grad_index(r)
        px, py = y[2], y[3]
        if strict:
            pz = medium.n0
        else:
            pz2 = n * n - px * px - py * py
            if pz2 <= 0:
                raise ParaxialityLost(f"p_z vanished at z = {z:g}", z)
            pz = math.sqrt(pz2)
        p = np.array([px, py, pz])
        dp = grad * (n / pz)
        drift = p[:2] / pz
        if sigma != 0:
            shift = (sigma / k) * np.cross(berry_curvature(p), dp)
            berry = sigma * float(projected_connection(p) @ dp)
        else:
            shift = np.zeros(3)
            berry = 0.0
        dr = drift + shift[:2] if anomalous else drift
        dyn = k * (px * dr[0] + py * dr[1] + pz)
        return np.array([dr[0], dr[1], dp[0], dp[1], berry, shift[0], shift[1], dyn])
    return f


def _rk4(f, z, y, h):
    k1 = f(z, y)
    k2 = f(z + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(z + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(z + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def choose_step(medium, state, z_end, max_dp=1e-3, max_step=None):
    """Largest step keeping |dp| per step below ``max_dp`` at launch."""
    span = z_end - state.r[2]
    if max_step is None:
        max_step = span / 10.0
    n = float(medium.index_at(state.r))
    rate = np.linalg.norm(medium.grad_index(state.r)) * n / state.p[2]
    step = max_step if rate == 0 else min(max_step, max_dp / rate)
    return span / math.ceil(span / step - 1e-9)


def trace_ray(medium, init, k, z_end, step=None, max_dp=1e-3, max_step=None,
              zeroth_order=False, strict_paraxial=False, record_every=1):
    """
    Integrate a polarized ray from ``init.r[2]`` to ``z_end`` with RK4.

    ``step`` fixes the step size; otherwise it is chosen so that the
    momentum changes by at most ``max_dp`` per step.  ``zeroth_order``
    drops the anomalous velocity from the motion (the Berry side channels
    are still accumulated as diagnostics).  ``strict_paraxial`` pins
    ``p_z = n0``.
    """
    if init.p[2] <= 0:
        raise ParaxialityLost("initial p_z must be positive", init.r[2])
    n_init = float(medium.index_at(init.r))
    if not strict_paraxial and abs(np.linalg.norm(init.p) - n_init) > 1e-9:
        raise ValueError("initial momentum must satisfy |p| = n(r)")
    z0 = float(init.r[2])
    if z_end <= z0:
        raise ValueError("z_end must exceed the launch plane")
    if step is None:
        step = choose_step(medium, init, z_end, max_dp, max_step)
    if step < 1e-12 * (z_end - z0):
        raise ParaxialityLost("step size underflow", z0)
    nsteps = int(math.ceil((z_end - z0) / step - 1e-9))
    h = (z_end - z0) / nsteps

    f = _rhs(medium, k, init.sigma, not zeroth_order, strict_paraxial)
    y = np.array([init.r[0], init.r[1], init.p[0], init.p[1], init.berry_phase,
                  init.anomalous_shift[0], init.anomalous_shift[1], init.dynamical_phase])
    zs, ys = [z0], [y]
    for i in range(nsteps):
        z = z0 + i * h
        y = _rk4(f, z, y, h)
        if not np.all(np.isfinite(y)):
            raise ParaxialityLost(f"non-finite ray state at z = {z + h:g}", z + h)
        if (i + 1) % record_every == 0 or i == nsteps - 1:
            zs.append(z0 + (i + 1) * h)
            ys.append(y)

    zs = np.array(zs)
    Y = np.array(ys)
    r = np.column_stack([Y[:, 0], Y[:, 1], zs])
    n = medium.index_at(r)
    if strict_paraxial:
        pz = np.full(len(zs), medium.n0)
    else:
        pz = np.sqrt(n * n - Y[:, 2] ** 2 - Y[:, 3] ** 2)
    p = np.column_stack([Y[:, 2], Y[:, 3], pz])
    shift = np.column_stack([Y[:, 5], Y[:, 6], np.zeros(len(zs))])
    meta = {"integrator": "rk4", "steps": nsteps, "k": float(k),
            "zeroth_order": bool(zeroth_order), "strict_paraxial": bool(strict_paraxial)}
    return Trajectory(zs, r, p, init.sigma, Y[:, 4], shift, Y[:, 7], h, meta)


def _momenta(path):
    p = path.p if isinstance(path, Trajectory) else np.asarray(path, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3 or len(p) < 2:
        raise ValueError("need at least two momentum samples of shape (N, 3)")
    return p


def spin_hall_deflection(path, k, sigma):
    """
    Transverse deflection ``sigma/k int (p x dp) / (2 p_z^3)`` by trapezoid.

    ``path`` is a Trajectory or an (N, 3) array of momenta.
    """
    p = _momenta(path)
    g = berry_curvature(p)
    dp = np.diff(p, axis=0)
    gm = 0.5 * (g[1:] + g[:-1])
    d = np.cross(gm, dp).sum(axis=0) * (sigma / k)
    d[2] = 0.0
    return d


def berry_phase(path, sigma):
    """``sigma int A.dp`` along the momentum path by trapezoid."""
    p = _momenta(path)
    a = projected_connection(p)
    dp = np.diff(p, axis=0)
    am = 0.5 * (a[1:] + a[:-1])
    return float(sigma * np.sum(am * dp))


@dataclass(frozen=True)
class RytovAngle:
    tan2: float          # (1/4) int tan^2(theta) dphi
    small_angle: float   # (1/4) int theta^2 dphi
    literature: float    # (1/2) int theta^2 dphi, solid-angle coefficient


def rytov_angle_closed(theta, phi):
    """Rotation angle of the polarization plane from sampled (theta, phi)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.abs(theta).max(initial=0.0) > 0.3:
        warnings.warn("zenith angle above 0.3 rad; small-angle forms are unreliable",
                      stacklevel=2)
    t2 = trapezoid(np.tan(theta) ** 2, phi)
    s2 = trapezoid(theta**2, phi)
    return RytovAngle(0.25 * t2, 0.25 * s2, 0.5 * s2)


@dataclass(frozen=True)
class Phase:
    total: float
    dynamical: float
    berry: float


def total_phase(traj, k, sigma):
    """Dynamical part ``k int p.dr`` plus ``sigma int A.dp`` (the -w t term is dropped)."""
    dr = np.diff(traj.r, axis=0)
    pm = 0.5 * (traj.p[1:] + traj.p[:-1])
    dyn = float(k * np.sum(pm * dr))
    geo = berry_phase(traj, sigma)
    return Phase(dyn + geo, dyn, geo)


def write_trajectory_csv(path, traj, header=None):
    """Write a trajectory with ``# key: value`` header lines and full-precision values."""
    with open(path, "w", newline="") as fh:
        for key, val in (header or {}).items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(traj)):
            row = (traj.z[i], *traj.r[i], *traj.p[i], traj.sigma, traj.berry_phase[i],
                   traj.shift[i, 0], traj.shift[i, 1], traj.dyn_phase[i])
            w.writerow([f"{v:.17e}" if isinstance(v, float) or isinstance(v, np.floating)
                        else str(v) for v in row])


def read_trajectory_csv(path):
    """Inverse of :func:`write_trajectory_csv`; returns (Trajectory, header dict)."""
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
            else:
                rows.append(line)
    data = list(csv.reader(rows))
    if tuple(data[0]) != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected columns {data[0]}")
    a = np.array(data[1:], dtype=float)
    z = a[:, 0]
    step = float(z[1] - z[0]) if len(z) > 1 else 0.0
    traj = Trajectory(z, a[:, 1:4], a[:, 4:7], int(a[0, 7]), a[:, 8],
                      np.column_stack([a[:, 9], a[:, 10], np.zeros(len(z))]),
                      a[:, 11], step)
    return traj, header
