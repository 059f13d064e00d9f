"""
Scenario configuration files (YAML).

Every key is validated and every error names the key and the line it was
found on (or the line of the enclosing section when a key is missing).
Unknown keys are rejected.  ``emit`` writes the canonical form with all
defaults filled in; parsing that text gives back an equal config.
"""

import hashlib
import math
import os
from dataclasses import dataclass, field

import yaml

from .medium import GaussianDefect, Homogeneous, LinearGradient, ParabolicGRIN

MEDIUM_KINDS = ("homogeneous", "linear", "grin", "gaussian", "gridded")
REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        where = f"{source or '<config>'}:{line}: " if line else f"{source or '<config>'}: "
        super().__init__(where + message)


# key -> (type, default); "section" entries hold a nested schema
_MEDIUM = {
    "kind": ("kind", REQUIRED),
    "n0": ("positive", REQUIRED),
    "gradient": ("vec3", None),
    "alpha": ("float", None),
    "center": ("vec", None),
    "amplitude": ("float", None),
    "width": ("positive", None),
    "file": ("path", None),
    "bounds": ("bounds", None),
    "allow_strong": ("bool", False),
}
_BEAM = {
    "waist": ("positive", 0.5),
    "center": ("vec2", [0.0, 0.0]),
    "tilt": ("vec2", [0.0, 0.0]),
    "amplitude": ("positive", 1.0),
}
_TRACE = {
    "max_dp": ("positive", 1e-3),
    "step": ("positive_or_null", None),
    "record_every": ("count", 1),
}
_GRID = {
    "n": ("count", 256),
    "half_width": ("positive", 5.0),
    "dz": ("positive", 0.01),
    "band_limit": ("fraction", 0.9),
    "absorber": ("fraction", 0.1),
    "absorb_strength": ("nonneg", 10.0),
    "project_forward": ("bool", False),
}
_PROBES = {
    "every": ("count", 10),
    "snapshots_every": ("nonneg_int", 0),
}
_OUTPUT = {"dir": ("str", "out")}
_TOL = {"spin_hall": ("positive", 0.3), "rytov": ("positive", 0.3)}

SCHEMA = {
    "scenario": ("str", REQUIRED),
    "units": ("units", REQUIRED),
    "seed": ("nonneg_int", 0),
    "k": ("positive", REQUIRED),
    "z_end": ("positive", REQUIRED),
    "memory_budget_mb": ("positive", 2048.0),
    "medium": ("section", _MEDIUM),
    "beam": ("section", _BEAM),
    "trace": ("section", _TRACE),
    "grid": ("section", _GRID),
    "probes": ("section", _PROBES),
    "output": ("section", _OUTPUT),
    "tolerances": ("section", _TOL),
}
_OPTIONAL_SECTIONS = {"beam", "trace", "grid", "probes", "output", "tolerances"}

_KIND_KEYS = {
    "homogeneous": set(),
    "linear": {"gradient"},
    "grin": {"alpha"},
    "gaussian": {"amplitude", "width"},
    "gridded": {"file"},
}
_KIND_OPTIONAL = {
    "homogeneous": {"bounds"},
    "linear": {"bounds"},
    "grin": {"center", "bounds"},
    "gaussian": {"center", "bounds"},
    "gridded": set(),
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    units: str
    seed: int
    k: float
    z_end: float
    memory_budget_mb: float
    medium: dict
    beam: dict
    trace: dict
    grid: dict
    probes: dict
    output: dict
    tolerances: dict
    base_dir: str = field(default=".", compare=False)

    def to_dict(self):
        return {name: getattr(self, name) for name in SCHEMA}

    def emit(self):
        d = self.to_dict()
        # unset kind-specific medium parameters are omitted rather than written as null
        d["medium"] = {k: v for k, v in d["medium"].items() if v is not None}
        return yaml.safe_dump(d, sort_keys=True, default_flow_style=None)

    @property
    def hash(self):
        return hashlib.sha256(self.emit().encode()).hexdigest()[:16]

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def build_medium(self):
        m = self.medium
        kind = m["kind"]
        strong = m["allow_strong"]
        if kind == "homogeneous":
            return Homogeneous(m["n0"], m["bounds"], strong)
        if kind == "linear":
            return LinearGradient(m["n0"], m["gradient"], m["bounds"], strong)
        if kind == "grin":
            return ParabolicGRIN(m["n0"], m["alpha"], m["center"] or (0.0, 0.0),
                                 m["bounds"], strong)
        if kind == "gaussian":
            return GaussianDefect(m["n0"], m["amplitude"], m["width"],
                                  m["center"] or (0.0, 0.0, 0.0), m["bounds"], strong)
        from .io import load_medium
        prof = load_medium(self.resolve(m["file"]), allow_strong=strong)
        if abs(prof.n0 - m["n0"]) > 1e-12 * m["n0"]:
            raise ConfigError(f"medium.n0 = {m['n0']} differs from the file's n0 = {prof.n0}")
        return prof


def _line(node):
    return node.start_mark.line + 1


def _scalar(node, key, src):
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"'{key}' must be a scalar", _line(node), src)
    return yaml.safe_load(yaml.serialize(node))


def _number(node, key, src):
    v = _scalar(node, key, src)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"'{key}' must be a finite number", _line(node), src)
    return float(v)


def _vector(node, key, src, size=None):
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError(f"'{key}' must be a list of numbers", _line(node), src)
    out = [_number(item, key, src) for item in node.value]
    if size is not None and len(out) != size:
        raise ConfigError(f"'{key}' must have {size} entries", _line(node), src)
    return out


def _convert(kind, node, key, src):
    if kind in ("str", "path"):
        v = _scalar(node, key, src)
        if not isinstance(v, str) or not v:
            raise ConfigError(f"'{key}' must be a non-empty string", _line(node), src)
        return v
    if kind == "units":
        v = _scalar(node, key, src)
        if v != "transverse":
            raise ConfigError(f"'{key}' must be 'transverse' (lengths in transverse units, "
                              "k dimensionless, |p| = n)", _line(node), src)
        return v
    if kind == "kind":
        v = _scalar(node, key, src)
        if v not in MEDIUM_KINDS:
            raise ConfigError(f"'{key}' must be one of {', '.join(MEDIUM_KINDS)}",
                              _line(node), src)
        return v
    if kind == "bool":
        v = _scalar(node, key, src)
        if not isinstance(v, bool):
            raise ConfigError(f"'{key}' must be true or false", _line(node), src)
        return v
    if kind in ("count", "nonneg_int"):
        v = _scalar(node, key, src)
        lo = 1 if kind == "count" else 0
        if isinstance(v, bool) or not isinstance(v, int) or v < lo:
            raise ConfigError(f"'{key}' must be an integer >= {lo}", _line(node), src)
        return v
    if kind == "positive_or_null":
        if isinstance(node, yaml.ScalarNode) and _scalar(node, key, src) is None:
            return None
        kind = "positive"
    if kind in ("float", "positive", "nonneg", "fraction"):
        v = _number(node, key, src)
        if kind == "positive" and v <= 0:
            raise ConfigError(f"'{key}' must be > 0", _line(node), src)
        if kind == "nonneg" and v < 0:
            raise ConfigError(f"'{key}' must be >= 0", _line(node), src)
        if kind == "fraction" and not 0 <= v < 1:
            raise ConfigError(f"'{key}' must lie in [0, 1)", _line(node), src)
        return v
    if kind == "vec":
        return _vector(node, key, src)
    if kind == "vec2":
        return _vector(node, key, src, 2)
    if kind == "vec3":
        return _vector(node, key, src, 3)
    if kind == "bounds":
        if not isinstance(node, yaml.SequenceNode) or len(node.value) != 3:
            raise ConfigError(f"'{key}' must be three [lo, hi] pairs", _line(node), src)
        pairs = [_vector(item, key, src, 2) for item in node.value]
        if any(lo >= hi for lo, hi in pairs):
            raise ConfigError(f"'{key}' needs lo < hi in every pair", _line(node), src)
        return pairs
    raise AssertionError(kind)


def _section(node, schema, prefix, src):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"'{prefix or 'config'}' must be a mapping", _line(node), src)
    seen = {}
    for knode, vnode in node.value:
        key = knode.value
        name = f"{prefix}.{key}" if prefix else key
        if key not in schema:
            raise ConfigError(f"unknown key '{name}'", _line(knode), src)
        if key in seen:
            raise ConfigError(f"duplicate key '{name}'", _line(knode), src)
        seen[key] = vnode
    out, lines = {}, {}
    for key, (kind, default) in schema.items():
        name = f"{prefix}.{key}" if prefix else key
        if key in seen:
            lines[key] = _line(seen[key])
            if kind == "section":
                out[key], _ = _section(seen[key], default, name, src)
            else:
                out[key] = _convert(kind, seen[key], name, src)
        elif kind == "section":
            if key not in _OPTIONAL_SECTIONS:
                raise ConfigError(f"missing section '{name}'", _line(node), src)
            out[key] = {k: (v[1] if not isinstance(v[1], list) else list(v[1]))
                        for k, v in default.items()}
        elif default is REQUIRED:
            raise ConfigError(f"missing key '{name}'", _line(node), src)
        else:
            out[key] = list(default) if isinstance(default, list) else default
    return out, lines


def _check_medium(m, node, src):
    kind = m["kind"]
    mnode = dict((k.value, v) for k, v in node.value)
    allowed = _KIND_KEYS[kind] | _KIND_OPTIONAL[kind] | {"kind", "n0", "allow_strong"}
    for key, vnode in mnode.items():
        if key not in allowed:
            raise ConfigError(f"'medium.{key}' is not a parameter of kind '{kind}'",
                              _line(vnode), src)
    for key in _KIND_KEYS[kind]:
        if m[key] is None:
            raise ConfigError(f"missing key 'medium.{key}' (required for kind '{kind}')",
                              _line(node), src)
    if m["center"] is not None:
        size = 2 if kind == "grin" else 3
        if len(m["center"]) != size:
            raise ConfigError(f"'medium.center' must have {size} entries for kind '{kind}'",
                              _line(mnode["center"]), src)


def parse_text(text, source=None, base_dir="."):
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if root is None:
        raise ConfigError("empty config", None, source)
    data, _ = _section(root, SCHEMA, "", source)
    mnode = dict((k.value, v) for k, v in root.value)["medium"]
    _check_medium(data["medium"], mnode, source)
    cfg = ScenarioConfig(**data, base_dir=base_dir)
    if cfg.medium["kind"] == "gridded" and not os.path.exists(cfg.resolve(cfg.medium["file"])):
        fnode = dict((k.value, v) for k, v in mnode.value)["file"]
        raise ConfigError(f"'medium.file' not found: {cfg.medium['file']}", _line(fnode), source)
    return cfg


def parse_config(path):
    """Read and validate a scenario file."""
    with open(path) as fh:
        text = fh.read()
    return parse_text(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))
