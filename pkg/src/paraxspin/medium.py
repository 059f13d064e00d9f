"""
Refractive-index profiles ``n(x) = n0 + zeta(x)``.

Every profile is immutable and vectorized: positions have shape ``(..., 3)``.
Construction rejects perturbations larger than ``weak_fraction * n0`` over
the declared domain unless ``allow_strong=True``, in which case the profile
is tagged ``out_of_regime``.
"""

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import MediumDomainError, WeakMediumError

WEAK_FRACTION = 0.1
_AXES = "xyz"


def _bounds(bounds):
    if bounds is None:
        return ((-np.inf, np.inf),) * 3
    out = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(out) != 3 or any(lo >= hi for lo, hi in out):
        raise ValueError("bounds must be three (lo, hi) pairs with lo < hi")
    return out


class Medium:
    kind = "abstract"

    def __init__(self, n0, bounds=None, allow_strong=False):
        if n0 <= 0:
            raise ValueError("n0 must be positive")
        self.n0 = float(n0)
        self.bounds = _bounds(bounds)
        sup = self.sup_zeta()
        self.out_of_regime = bool(not sup <= WEAK_FRACTION * self.n0)
        if self.out_of_regime and not allow_strong:
            raise WeakMediumError(
                f"sup|zeta| = {sup:g} exceeds {WEAK_FRACTION:g} n0 over the domain "
                "(pass allow_strong=True to override)")

    # subclasses implement zeta() and grad_zeta() on arrays of shape (..., 3)
    def zeta(self, x):
        raise NotImplementedError

    def grad_zeta(self, x):
        raise NotImplementedError

    def sup_zeta(self):
        raise NotImplementedError

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise ValueError("positions must have a trailing axis of length 3")
        for i, (lo, hi) in enumerate(self.bounds):
            xi = x[..., i]
            if np.any(xi < lo) or np.any(xi > hi):
                raise MediumDomainError(
                    f"{_AXES[i]} outside [{lo:g}, {hi:g}] (got {xi.min():g}..{xi.max():g})")
        return x

    def index_at(self, x):
        x = self._check(x)
        return self.n0 + self.zeta(x)

    def grad_index(self, x):
        x = self._check(x)
        return self.grad_zeta(x)

    def zeta_slice(self, X, Y, z):
        """zeta on a transverse grid at fixed z (no domain check; used by the wave solver)."""
        pts = np.stack([X, Y, np.full_like(X, z)], axis=-1)
        return self.zeta(pts)

    def params(self):
        return {}

    def describe(self):
        return {"kind": self.kind, "n0": self.n0, **self.params()}


def _corners(bounds):
    lo_hi = [np.array(b) for b in bounds]
    g = np.stack(np.meshgrid(*lo_hi, indexing="ij"), axis=-1)
    return g.reshape(-1, 3)


class Homogeneous(Medium):
    kind = "homogeneous"

    def zeta(self, x):
        return np.zeros(np.shape(x)[:-1])

    def grad_zeta(self, x):
        return np.zeros(np.shape(x))

    def sup_zeta(self):
        return 0.0


class LinearGradient(Medium):
    """``zeta = g . x``; needs a bounded domain along every direction where g != 0."""

    kind = "linear"

    def __init__(self, n0, gradient, bounds=None, allow_strong=False):
        self.gradient = np.asarray(gradient, dtype=float).reshape(3)
        super().__init__(n0, bounds, allow_strong)

    def zeta(self, x):
        return np.asarray(x) @ self.gradient

    def grad_zeta(self, x):
        return np.broadcast_to(self.gradient, np.shape(x)).copy()

    def sup_zeta(self):
        b = np.array(self.bounds)
        sup = 0.0
        for i in range(3):
            if self.gradient[i] != 0:
                sup += abs(self.gradient[i]) * np.abs(b[i]).max()
        return sup

    def params(self):
        return {"gradient": self.gradient.tolist()}


class ParabolicGRIN(Medium):
    """``zeta = -alpha^2 |r_perp - r_c|^2 / 2`` (z-invariant)."""

    kind = "grin"

    def __init__(self, n0, alpha, center=(0.0, 0.0), bounds=None, allow_strong=False):
        self.alpha = float(alpha)
        self.center = np.asarray(center, dtype=float).reshape(2)
        super().__init__(n0, bounds, allow_strong)

    def zeta(self, x):
        d = np.asarray(x)[..., :2] - self.center
        return -0.5 * self.alpha**2 * np.sum(d * d, axis=-1)

    def grad_zeta(self, x):
        x = np.asarray(x)
        g = np.zeros(x.shape)
        g[..., :2] = -self.alpha**2 * (x[..., :2] - self.center)
        return g

    def sup_zeta(self):
        if self.alpha == 0:
            return 0.0
        b = np.array(self.bounds)[:2]
        far = np.abs(b - self.center[:, None]).max(axis=1)
        return 0.5 * self.alpha**2 * float(np.sum(far**2))

    def params(self):
        return {"alpha": self.alpha, "center": self.center.tolist()}


class GaussianDefect(Medium):
    """``zeta = a exp(-|x - x_c|^2 / w^2)``."""

    kind = "gaussian"

    def __init__(self, n0, amplitude, width, center=(0.0, 0.0, 0.0), bounds=None,
                 allow_strong=False):
        if width <= 0:
            raise ValueError("width must be positive")
        self.amplitude = float(amplitude)
        self.width = float(width)
        self.center = np.asarray(center, dtype=float).reshape(3)
        super().__init__(n0, bounds, allow_strong)

    def zeta(self, x):
        d = np.asarray(x) - self.center
        return self.amplitude * np.exp(-np.sum(d * d, axis=-1) / self.width**2)

    def grad_zeta(self, x):
        d = np.asarray(x) - self.center
        z = self.amplitude * np.exp(-np.sum(d * d, axis=-1) / self.width**2)
        return (-2.0 / self.width**2) * z[..., None] * d

    def sup_zeta(self):
        return abs(self.amplitude)

    def params(self):
        return {"amplitude": self.amplitude, "width": self.width,
                "center": self.center.tolist()}


class GriddedProfile(Medium):
    """
    Sampled perturbation with multilinear interpolation.

    ``samples`` is 2D ``(nx, ny)`` for a z-invariant profile or 3D
    ``(nx, ny, nz)``.  The domain is the sample hull.  Gradients are central
    differences of the interpolant with half the grid spacing as step.
    """

    kind = "gridded"

    def __init__(self, n0, samples, spacing, origin, allow_strong=False, method="linear"):
        if method != "linear":
            raise ValueError("only multilinear interpolation is supported")
        self.samples = np.array(samples, dtype=float)
        self.samples.setflags(write=False)
        if self.samples.ndim not in (2, 3):
            raise ValueError("samples must be 2D (z-invariant) or 3D")
        nd = self.samples.ndim
        self.spacing = tuple(float(s) for s in np.broadcast_to(spacing, (nd,)))
        self.origin = tuple(float(o) for o in np.broadcast_to(origin, (nd,)))
        self.axes = [o + h * np.arange(n) for o, h, n in
                     zip(self.origin, self.spacing, self.samples.shape)]
        self._interp = RegularGridInterpolator(self.axes, self.samples, method="linear")
        b = [(a[0], a[-1]) for a in self.axes]
        if nd == 2:
            b.append((-np.inf, np.inf))
        super().__init__(n0, b, allow_strong)

    @property
    def z_invariant(self):
        return self.samples.ndim == 2

    def zeta(self, x):
        x = np.asarray(x, dtype=float)
        pts = x[..., :2] if self.z_invariant else x
        return self._interp(pts)

    def grad_zeta(self, x):
        x = np.asarray(x, dtype=float)
        nd = self.samples.ndim
        g = np.zeros(x.shape)
        for i in range(nd):
            h = 0.5 * self.spacing[i]
            lo, hi = self.bounds[i]
            xp = x.copy()
            xm = x.copy()
            xp[..., i] = np.minimum(x[..., i] + h, hi)
            xm[..., i] = np.maximum(x[..., i] - h, lo)
            g[..., i] = (self.zeta(xp) - self.zeta(xm)) / (xp[..., i] - xm[..., i])
        return g

    def zeta_slice(self, X, Y, z):
        if self.z_invariant and np.shape(X) == self.samples.shape:
            if np.allclose(X[:, 0], self.axes[0]) and np.allclose(Y[0], self.axes[1]):
                return np.asarray(self.samples)
        pts = np.stack([X, Y, np.full_like(X, z)], axis=-1)
        for i, (lo, hi) in enumerate(self.bounds[:2]):
            pts[..., i] = np.clip(pts[..., i], lo, hi)
        return self.zeta(pts)

    def sup_zeta(self):
        return float(np.abs(self.samples).max())

    def params(self):
        return {"shape": list(self.samples.shape), "spacing": list(self.spacing),
                "origin": list(self.origin)}

    @classmethod
    def from_medium(cls, medium, axes, allow_strong=False):
        """Sample an analytic profile on the tensor grid given by ``axes`` (2 or 3 arrays)."""
        axes = [np.asarray(a, dtype=float) for a in axes]
        grids = list(np.meshgrid(*axes, indexing="ij"))
        if len(axes) == 2:
            grids.append(np.zeros_like(grids[0]))
        pts = np.stack(grids, axis=-1)
        spacing = [a[1] - a[0] for a in axes]
        origin = [a[0] for a in axes]
        return cls(medium.n0, medium.zeta(pts), spacing, origin, allow_strong)


def adiabaticity_report(medium, k, region, samples=41, radius=None):
    """
    Statistics of ``|grad n| / (k n)`` over a lattice spanning ``region``.

    ``region`` holds three (lo, hi) pairs; a degenerate pair (lo == hi)
    pins that coordinate.  ``radius`` optionally restricts the lattice to
    ``|r_perp| <= radius``.
    """
    axes = [np.linspace(lo, hi, samples) if hi > lo else np.array([lo])
            for lo, hi in region]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    if radius is not None:
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= radius + 1e-12]
    ratio = (np.linalg.norm(medium.grad_index(pts), axis=-1)
             / (k * medium.index_at(pts)))
    return {"max": float(ratio.max()), "mean": float(ratio.mean()),
            "samples": int(len(ratio)), "k": float(k)}
