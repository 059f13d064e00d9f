"""
Split-step Fourier integrator for the Dirac-like z-evolution.

The spinor obeys ``d/dz Psi = -i k H Psi`` with
``H = -(n0 + zeta) beta + beta M_perp . p_perp`` and ``p_perp = -i/k grad_perp``.
Each step is a Strang splitting: half a potential step
``exp(i k zeta beta dz/2)`` in position space, the exact kinetic
exponential per transverse Fourier mode, then the second potential half.
The fast carrier ``exp(i k n0 z)`` is factored out.

The kinetic generator ``K = beta (-n0 + M_perp . p_perp)`` squares to
``E^2 = n0^2 - p_perp^2``, so ``exp(-i k dz K) = cos(k dz E) - i sin(k dz E) K / E``
in closed form.  K couples only the component pairs (1, 3) and (2, 4).

Both ``beta`` steps are beta-pseudo-unitary, so the indefinite norm
``sum(|c1|^2 + |c2|^2 - |c3|^2 - |c4|^2) dA`` is conserved up to what the
absorbing boundary and the band limit remove.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .clifford import STANDARD, matrix_set, spinor_from_rs
from .errors import NumericalBreakdown
from .fw import fw_energy


def kinetic_propagator(p_perp, dz, k, n0, mset=STANDARD, carrier=False):
    """
    ``exp(-i k dz K)`` for one transverse mode as a 4x4 matrix.

    With ``carrier=True`` the common factor ``exp(-i k n0 dz)`` is applied,
    which leaves only the slow envelope phase ``exp(i k (E - n0) dz)`` on
    forward modes.
    """
    E = fw_energy(p_perp, n0)
    beta = mset.m_z
    K = beta @ (-n0 * np.eye(4) + mset.dot_perp(p_perp))
    P = np.cos(k * dz * E) * np.eye(4) - 1j * np.sin(k * dz * E) / E * K
    if carrier:
        P = P * np.exp(-1j * k * n0 * dz)
    return P


@dataclass
class FieldGrid:
    x: np.ndarray             # (nx,)
    y: np.ndarray             # (ny,)
    samples: np.ndarray       # (4, nx, ny) complex
    k: float
    n0: float
    z: float = 0.0
    conjugated: bool = False
    absorber: float = 0.1     # absorbing layer width as a fraction of the extent, per side
    absorbed: float = 0.0     # beta-norm removed by the absorbing layer
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def shape(self):
        return self.samples.shape[1:]

    @property
    def spacing(self):
        return float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0])

    @property
    def cell_area(self):
        hx, hy = self.spacing
        return hx * hy

    @property
    def extent(self):
        hx, hy = self.spacing
        return len(self.x) * hx, len(self.y) * hy

    @property
    def mset(self):
        return matrix_set(self.conjugated)

    def mesh(self):
        if "mesh" not in self._cache:
            self._cache["mesh"] = np.meshgrid(self.x, self.y, indexing="ij")
        return self._cache["mesh"]

    def momenta(self):
        """Dimensionless transverse momenta ``k_perp / k`` of the FFT modes."""
        hx, hy = self.spacing
        px = 2 * np.pi * np.fft.fftfreq(len(self.x), hx) / self.k
        py = 2 * np.pi * np.fft.fftfreq(len(self.y), hy) / self.k
        return np.meshgrid(px, py, indexing="ij")

    def interior(self):
        """Boolean mask of the region untouched by the absorbing layer."""
        if "interior" not in self._cache:
            X, Y = self.mesh()
            ax, ay = self._layer_depth(X, Y)
            self._cache["interior"] = (ax == 0) & (ay == 0)
        return self._cache["interior"]

    def _layer_depth(self, X, Y):
        # symmetric about the origin so that x -> -x, y -> -y mirrors preserve the mask
        out = []
        for C, c in ((X, self.x), (Y, self.y)):
            half = -float(c[0])
            width = self.absorber * 2.0 * half
            if width <= 0:
                out.append(np.zeros_like(C))
                continue
            out.append(np.maximum(np.abs(C) - (half - width), 0.0) / width)
        return out

    def copy(self):
        return replace(self, samples=self.samples.copy(), _cache=self._cache)


def make_grid(n, half_width, k, n0, conjugated=False, absorber=0.1, ny=None, half_width_y=None):
    """Empty field on an ``n x ny`` grid spanning ``[-half_width, half_width)``."""
    ny = n if ny is None else ny
    hwy = half_width if half_width_y is None else half_width_y
    x = (np.arange(n) - n // 2) * (2.0 * half_width / n)
    y = (np.arange(ny) - ny // 2) * (2.0 * hwy / ny)
    return FieldGrid(x, y, np.zeros((4, n, ny), complex), float(k), float(n0),
                     conjugated=conjugated, absorber=absorber)


@dataclass(frozen=True)
class BeamSpec:
    waist: float
    center: tuple = (0.0, 0.0)
    tilt: tuple = (0.0, 0.0)
    sigma: int = 1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.waist <= 0:
            raise ValueError("waist must be positive")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if np.hypot(*self.tilt) >= 0.5:
            raise ValueError("tilt must be paraxial (|tilt| < 0.5)")


def init_gaussian_beam(spec, n, half_width, n0, k, absorber=0.1, min_cells=8.0,
                       project_forward=False):
    """
    Circularly polarized Gaussian beam ``exp(-|r - c|^2 / w^2 + i k tilt . r)``.

    The transverse RS field is ``(1, i) * envelope`` in the representation
    selected by ``spec.sigma`` (sigma = -1 uses the conjugate set).  F_z is
    fixed per Fourier mode by the divergence constraint.  With
    ``project_forward`` the backward-branch remainder is projected out.
    """
    conj = spec.sigma < 0
    grid = make_grid(n, half_width, k, n0, conjugated=conj, absorber=absorber)
    h = min(grid.spacing)
    if spec.waist < min_cells * h:
        raise ValueError(f"waist {spec.waist:g} resolved by fewer than {min_cells:g} cells")
    PX, PY = grid.momenta()
    pmax = np.pi / (h * k)
    tilt = np.hypot(*spec.tilt)
    if tilt + 6.0 / (k * spec.waist) >= min(pmax, n0):
        raise ValueError("tilt plus beam bandwidth exceeds the grid band")

    X, Y = grid.mesh()
    dx, dy = X - spec.center[0], Y - spec.center[1]
    env = spec.amplitude * np.exp(-(dx * dx + dy * dy) / spec.waist**2
                                  + 1j * k * (spec.tilt[0] * X + spec.tilt[1] * Y))
    fx_hat = np.fft.fft2(env)
    fy_hat = 1j * fx_hat
    sy = -1.0 if conj else 1.0
    pz = np.sqrt(np.maximum(n0 * n0 - PX**2 - PY**2, 1e-30))
    # divergence-free: p_x F_x + s p_y F_y + p_z F_z = 0 (s = -1 in the mirrored representation)
    fz_hat = -(PX * fx_hat + sy * PY * fy_hat) / pz
    fz_hat[PX**2 + PY**2 >= n0 * n0] = 0.0
    F = np.stack([env, 1j * env, np.fft.ifft2(fz_hat)])
    grid.samples = spinor_from_rs(F)
    if project_forward:
        grid.samples = forward_projection(grid)
    return grid


def forward_projection(grid):
    """Apply ``(E - K) / (2E)`` per mode, keeping only the forward branch."""
    PX, PY = grid.momenta()
    E = np.sqrt(np.maximum(grid.n0**2 - PX**2 - PY**2, 1e-30))
    q = PX - 1j * PY if grid.conjugated else PX + 1j * PY
    n0 = grid.n0
    c = np.fft.fft2(grid.samples, axes=(1, 2))
    out = np.empty_like(c)
    # K on each pair (a, b) = (c1, c3) or (c2, c4): [[-n0, conj(q)], [-q, n0]]
    for a, b in ((0, 2), (1, 3)):
        ka = -n0 * c[a] + np.conj(q) * c[b]
        kb = -q * c[a] + n0 * c[b]
        out[a] = (E * c[a] - ka) / (2 * E)
        out[b] = (E * c[b] - kb) / (2 * E)
    return np.fft.ifft2(out, axes=(1, 2))


def _not_nyquist(grid):
    # the Nyquist row/column of an even grid is its own mirror image, so it
    # would break the y -> -y symmetry between the two matrix sets; drop it
    keep = np.ones(grid.shape, dtype=bool)
    for axis, n in enumerate(grid.shape):
        if n % 2 == 0:
            idx = [slice(None), slice(None)]
            idx[axis] = n // 2
            keep[tuple(idx)] = False
    return keep


def _kinetic_coeffs(grid, dz, band_limit):
    key = ("kin", dz, band_limit)
    if key in grid._cache:
        return grid._cache[key]
    k, n0 = grid.k, grid.n0
    PX, PY = grid.momenta()
    p2 = PX**2 + PY**2
    keep = (p2 < (band_limit * n0) ** 2) & _not_nyquist(grid)
    E = np.sqrt(np.where(keep, n0 * n0 - p2, n0 * n0))
    q = PX - 1j * PY if grid.conjugated else PX + 1j * PY
    cos = np.cos(k * dz * E)
    s = np.sin(k * dz * E) / E
    carrier = np.exp(-1j * k * n0 * dz) * keep
    # exp(-i k dz K) on a pair, K = [[-n0, conj(q)], [-q, n0]]
    coeffs = ((cos + 1j * n0 * s) * carrier, (-1j * s * np.conj(q)) * carrier,
              (1j * s * q) * carrier, (cos - 1j * n0 * s) * carrier)
    grid._cache[key] = coeffs
    return coeffs


def _absorb_mask(grid, dz, strength):
    key = ("mask", dz, strength)
    if key not in grid._cache:
        X, Y = grid.mesh()
        ax, ay = grid._layer_depth(X, Y)
        grid._cache[key] = np.exp(-strength * dz * (ax**4 + ay**4))
    return grid._cache[key]


def beta_norm(grid):
    c = grid.samples
    dens = np.abs(c[0])**2 + np.abs(c[1])**2 - np.abs(c[2])**2 - np.abs(c[3])**2
    return float(dens.sum() * grid.cell_area)


def l2_norm(grid):
    return float((np.abs(grid.samples) ** 2).sum() * grid.cell_area)


@dataclass(frozen=True)
class StepStability:
    forward: tuple      # per-step eigenphase interval of forward modes (rad)
    backward: tuple     # same for backward modes, reduced near the forward band
    gap: float          # smallest circular distance between the two intervals
    stable: bool


def _zeta_range(grid, profile):
    X, Y = grid.mesh()
    zeta = profile.zeta_slice(X, Y, grid.z)
    return float(zeta.min()), float(zeta.max())


def step_stability(grid, profile, dz, band_limit=0.9, margin=0.5):
    """
    Check that forward and backward eigenphases per step stay apart mod 2 pi.

    A split step advances forward modes by ``k dz (E - n0 + zeta)`` and
    backward modes by ``-k dz (E + n0 + zeta)`` (carrier removed).  When
    the two bands overlap modulo 2 pi the splitting resonantly couples them
    and the field grows without bound; ``stable`` requires a gap of at
    least ``margin`` radians.
    """
    k, n0 = grid.k, grid.n0
    PX, PY = grid.momenta()
    p2 = PX**2 + PY**2
    p2 = p2[p2 < (band_limit * n0) ** 2]
    e_min = float(np.sqrt(n0 * n0 - p2.max()))
    zlo, zhi = _zeta_range(grid, profile)
    fwd = (k * dz * (e_min - n0 + zlo), k * dz * zhi)
    bwd = (-k * dz * (2 * n0 + zhi), -k * dz * (e_min + n0 + zlo))
    two_pi = 2 * np.pi
    width_f, width_b = fwd[1] - fwd[0], bwd[1] - bwd[0]
    if width_f + width_b >= two_pi:
        return StepStability(fwd, bwd, 0.0, False)
    # slide the backward band to its image just above the forward band
    shift = np.ceil((fwd[1] - bwd[0]) / two_pi) * two_pi
    lo = bwd[0] + shift
    bwd_img = (lo, lo + width_b)
    gap = min(bwd_img[0] - fwd[1], fwd[0] + two_pi - bwd_img[1])
    return StepStability(fwd, bwd_img, float(gap), bool(gap >= margin))


def suggest_dz(grid, profile, dz_max, band_limit=0.9, margin=0.5, tries=200):
    """Largest stable step ``dz_max / m`` for integer m (so z-ranges stay commensurate)."""
    for m in range(1, tries + 1):
        dz = dz_max / m
        if step_stability(grid, profile, dz, band_limit, margin).stable:
            return dz
    raise ValueError("no stable step found below dz_max")


def step(grid, dz, profile, band_limit=0.9, absorb_strength=10.0, out=None):
    """
    One Strang step of length ``dz``; returns a new FieldGrid (or fills ``out``).

    Modes with ``|p_perp| >= band_limit * n0`` and the Nyquist modes of
    even grids are discarded; the absorbing
    layer damps the field by ``exp(-absorb_strength dz d^4)`` at relative
    depth ``d`` into the layer.  The beta-norm removed by the layer is
    accumulated in ``absorbed``.  No stability check is made here; see
    :func:`step_stability`.
    """
    invariant = _z_invariant(profile)
    half0 = _potential_phase(grid, profile, grid.z, dz, invariant)
    c = grid.samples.copy()
    c[:2] *= half0
    c[2:] *= np.conj(half0)

    a, b, cc, d = _kinetic_coeffs(grid, dz, band_limit)
    f = sfft.fft2(c, axes=(1, 2), overwrite_x=True)
    g = np.empty_like(f)
    for i, j in ((0, 2), (1, 3)):
        g[i] = a * f[i] + b * f[j]
        g[j] = cc * f[i] + d * f[j]
    c = sfft.ifft2(g, axes=(1, 2), overwrite_x=True)

    half1 = half0 if invariant else _potential_phase(grid, profile, grid.z + dz, dz, False)
    c[:2] *= half1
    c[2:] *= np.conj(half1)

    removed = 0.0
    if grid.absorber > 0 and absorb_strength > 0:
        mask = _absorb_mask(grid, dz, absorb_strength)
        dens = (np.abs(c[0])**2 + np.abs(c[1])**2 - np.abs(c[2])**2 - np.abs(c[3])**2)
        removed = float(((1.0 - mask * mask) * dens).sum() * grid.cell_area)
        c *= mask

    if not np.isfinite(c.sum()):
        raise NumericalBreakdown(f"non-finite field after z = {grid.z:g}", grid.z)

    new = out if out is not None else replace(grid, _cache=grid._cache)
    new.samples = c
    new.z = grid.z + dz
    new.absorbed = grid.absorbed + removed
    return new


def _potential_phase(grid, profile, z, dz, cache):
    key = ("pot", id(profile), dz)
    if cache and key in grid._cache:
        return grid._cache[key]
    X, Y = grid.mesh()
    ph = np.exp(0.5j * grid.k * dz * profile.zeta_slice(X, Y, z))
    if cache:
        grid._cache[key] = ph
    return ph


def _z_invariant(profile):
    kind = getattr(profile, "kind", "")
    if kind in ("homogeneous", "grin"):
        return True
    if kind == "linear":
        return profile.gradient[2] == 0
    if kind == "gridded":
        return profile.z_invariant
    return False


def centroid(grid, component=0, threshold=1e-30):
    """
    Intensity-weighted centroid of one spinor component over the interior.

    ``component`` 0 is the dominant circular amplitude (psi_plus in the
    standard set, psi_minus in the conjugate set); 3 is the other circular
    channel.
    """
    I = np.abs(grid.samples[component]) ** 2 * grid.interior()
    tot = I.sum()
    if tot * grid.cell_area <= threshold:
        raise ValueError("component energy below threshold; centroid undefined")
    X, Y = grid.mesh()
    return np.array([(I * X).sum() / tot, (I * Y).sum() / tot])


def momentum_centroid(grid, component=0):
    """Mean dimensionless transverse momentum of one component."""
    f = np.abs(np.fft.fft2(grid.samples[component])) ** 2
    PX, PY = grid.momenta()
    tot = f.sum()
    return np.array([(f * PX).sum() / tot, (f * PY).sum() / tot])


def component_energy(grid, component=0):
    return float((np.abs(grid.samples[component]) ** 2).sum() * grid.cell_area)


def mean_phase(grid, component=0):
    """Phase of the integrated amplitude of one component."""
    return float(np.angle(grid.samples[component].sum()))


def overlap_phase(a, b, component=0):
    """``arg sum(a_c conj(b_c))``: relative phase of two fields on the same grid."""
    return float(np.angle(np.vdot(b.samples[component], a.samples[component])))


PROBE_FIELDS = ("z", "cx", "cy", "px", "py", "energy", "energy_other", "beta_norm",
                "l2_norm", "absorbed", "phase")


@dataclass
class ProbeSeries:
    data: dict
    conjugated: bool = False

    def __getitem__(self, key):
        return self.data[key]

    def __len__(self):
        return len(self.data["z"])


def probe(grid):
    c = centroid(grid, 0)
    pm = momentum_centroid(grid, 0)
    return {"z": grid.z, "cx": c[0], "cy": c[1], "px": pm[0], "py": pm[1],
            "energy": component_energy(grid, 0), "energy_other": component_energy(grid, 3),
            "beta_norm": beta_norm(grid), "l2_norm": l2_norm(grid),
            "absorbed": grid.absorbed, "phase": mean_phase(grid, 0)}


def _nsteps(z_end, z0, dz):
    n = int(round((z_end - z0) / dz))
    if n < 1 or abs(n * dz - (z_end - z0)) > 1e-9 * max(1.0, abs(z_end)):
        raise ValueError("z_end - z must be a positive multiple of dz")
    return n


def _require_stable(grid, profile, dz, band_limit):
    st = step_stability(grid, profile, dz, band_limit)
    if not st.stable:
        raise ValueError(f"dz = {dz:g} couples forward and backward modes (gap {st.gap:.3f} rad); "
                         f"try dz = {suggest_dz(grid, profile, dz, band_limit):g}")


def run_scenario(profile, grid, z_end, dz, probe_every=1, band_limit=0.9,
                 absorb_strength=10.0, callback=None, check_stability=True):
    """
    March ``grid`` to ``z_end`` and record probes every ``probe_every`` steps.

    Returns ``(ProbeSeries, final_grid)``.  ``callback(grid)`` is called at
    every probe (e.g. to write snapshots).
    """
    nsteps = _nsteps(z_end, grid.z, dz)
    if check_stability:
        _require_stable(grid, profile, dz, band_limit)
    rows = [probe(grid)]
    if callback:
        callback(grid)
    g = grid
    for i in range(nsteps):
        g = step(g, dz, profile, band_limit, absorb_strength)
        if (i + 1) % probe_every == 0 or i == nsteps - 1:
            rows.append(probe(g))
            if callback:
                callback(g)
    data = {key: np.array([r[key] for r in rows]) for key in PROBE_FIELDS}
    return ProbeSeries(data, grid.conjugated), g


@dataclass
class PairSeries:
    plus: ProbeSeries
    minus: ProbeSeries
    overlap_phase: np.ndarray

    @property
    def z(self):
        return self.plus["z"]


def launch_pair(spec, n, half_width, n0, k, absorber=0.1, project_forward=False):
    """The sigma = +1 (standard set) and sigma = -1 (conjugate set) fields of one launch."""
    a = init_gaussian_beam(replace(spec, sigma=1), n, half_width, n0, k, absorber,
                           project_forward=project_forward)
    b = init_gaussian_beam(replace(spec, sigma=-1), n, half_width, n0, k, absorber,
                           project_forward=project_forward)
    return a, b


def iter_pair(profile, a, b, z_end, dz, probe_every=1, band_limit=0.9,
              absorb_strength=10.0, check_stability=True):
    """Advance two fields in lockstep, yielding them at z = 0 and at every probe."""
    nsteps = _nsteps(z_end, a.z, dz)
    if check_stability:
        _require_stable(a, profile, dz, band_limit)
    yield a, b
    for i in range(nsteps):
        a = step(a, dz, profile, band_limit, absorb_strength)
        b = step(b, dz, profile, band_limit, absorb_strength)
        if (i + 1) % probe_every == 0 or i == nsteps - 1:
            yield a, b


def run_helicity_pair(profile, spec, n, half_width, k, z_end, dz, probe_every=1,
                      band_limit=0.9, absorb_strength=10.0, absorber=0.1,
                      project_forward=False, callback=None, check_stability=True):
    """
    Propagate the sigma = +1 beam (standard set) and the sigma = -1 beam
    (conjugate set) in lockstep from the same launch geometry, recording
    both probe series and the relative phase of their dominant amplitudes.
    """
    a, b = launch_pair(spec, n, half_width, profile.n0, k, absorber, project_forward)
    rows_a, rows_b, ov = [], [], []
    for a, b in iter_pair(profile, a, b, z_end, dz, probe_every, band_limit,
                          absorb_strength, check_stability):
        rows_a.append(probe(a))
        rows_b.append(probe(b))
        ov.append(overlap_phase(a, b))
        if callback:
            callback(a, b)
    pa = ProbeSeries({key: np.array([r[key] for r in rows_a]) for key in PROBE_FIELDS}, False)
    pb = ProbeSeries({key: np.array([r[key] for r in rows_b]) for key in PROBE_FIELDS}, True)
    return PairSeries(pa, pb, np.array(ov))


@dataclass(frozen=True)
class RotationSeries:
    z: np.ndarray
    angle: np.ndarray
    ambiguous: bool


def rytov_measurement(pair):
    """
    Polarization-plane rotation ``(1/2) arg <psi_plus, psi_minus>`` along z.

    The raw relative phase is unwrapped; ``ambiguous`` is set when any
    probe-to-probe jump exceeds pi/2 (probe cadence too coarse).
    """
    raw = np.asarray(pair.overlap_phase)
    jumps = np.abs(np.angle(np.exp(1j * np.diff(raw))))
    ambiguous = bool(np.any(jumps > np.pi / 2))
    ang = 0.5 * (np.unwrap(raw) - raw[0])
    return RotationSeries(np.asarray(pair.z), ang, ambiguous)
