"""
Self-describing binary container for gridded media and field snapshots.

Layout (all multi-byte values little-endian):

    line 1   b"PXSPIN-GRID 1\n"
    line 2   one line of UTF-8 JSON terminated by b"\n" with keys
             kind, n0, dims, spacing, origin, planes, dtype ("<f8") and meta
    payload  planes * prod(dims) float64 values, row-major (C order) with
             the plane index slowest

A gridded medium stores one plane of zeta samples.  A field snapshot
stores 8 planes: real and imaginary parts of c1..c4 interleaved as
(Re c1, Im c1, Re c2, ...).
"""

import json

import numpy as np

from .medium import GriddedProfile

MAGIC = b"PXSPIN-GRID 1\n"
_DTYPE = "<f8"


class ContainerError(ValueError):
    pass


def write_container(path, kind, n0, planes, spacing, origin, meta=None):
    planes = np.asarray(planes, dtype=float)
    if planes.ndim < 2:
        raise ContainerError("need an array of shape (planes, *dims)")
    dims = list(planes.shape[1:])
    header = {"kind": kind, "n0": float(n0), "dims": dims,
              "spacing": [float(s) for s in spacing], "origin": [float(o) for o in origin],
              "planes": int(planes.shape[0]), "dtype": _DTYPE, "meta": meta or {}}
    if len(header["spacing"]) != len(dims) or len(header["origin"]) != len(dims):
        raise ContainerError("spacing and origin must match the number of dims")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(np.ascontiguousarray(planes, dtype=_DTYPE).tobytes())


def read_container(path):
    """Return (header dict, array of shape (planes, *dims))."""
    with open(path, "rb") as fh:
        if fh.readline() != MAGIC:
            raise ContainerError(f"{path}: not a PXSPIN-GRID 1 container")
        try:
            header = json.loads(fh.readline().decode())
        except ValueError as exc:
            raise ContainerError(f"{path}: bad header ({exc})") from None
        payload = fh.read()
    if header.get("dtype") != _DTYPE:
        raise ContainerError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    shape = (header["planes"], *header["dims"])
    count = int(np.prod(shape))
    if len(payload) != 8 * count:
        raise ContainerError(f"{path}: payload holds {len(payload) // 8} values, expected {count}")
    return header, np.frombuffer(payload, dtype=_DTYPE).reshape(shape).copy()


def save_medium(path, profile, meta=None):
    write_container(path, "medium", profile.n0, profile.samples[None], profile.spacing,
                    profile.origin, meta)


def load_medium(path, allow_strong=False):
    header, data = read_container(path)
    if header["kind"] != "medium" or header["planes"] != 1:
        raise ContainerError(f"{path}: not a gridded medium")
    return GriddedProfile(header["n0"], data[0], header["spacing"], header["origin"],
                          allow_strong=allow_strong)


def save_snapshot(path, grid, meta=None):
    c = grid.samples
    planes = np.empty((8, *c.shape[1:]))
    planes[0::2] = c.real
    planes[1::2] = c.imag
    info = {"z": grid.z, "k": grid.k, "conjugated": grid.conjugated, **(meta or {})}
    write_container(path, "field", grid.n0, planes, grid.spacing,
                    (float(grid.x[0]), float(grid.y[0])), info)


def load_snapshot(path):
    """Return (header, complex samples of shape (4, nx, ny))."""
    header, data = read_container(path)
    if header["kind"] != "field" or header["planes"] != 8:
        raise ContainerError(f"{path}: not a field snapshot")
    return header, data[0::2] + 1j * data[1::2]
