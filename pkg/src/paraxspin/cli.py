"""
Command-line entry point: ``paraxspin {verify,trace,bpm,compare,batch}``.

Exit codes: 0 success, 1 a verification or comparison check failed,
2 invalid configuration or arguments, 3 numerical-domain failure
(paraxiality lost, unstable step, non-finite field), 4 I/O failure.
"""

import argparse
import csv
import glob
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import UNITS, __version__
from .checks import run_checks
from .config import ConfigError, parse_config
from .errors import (MediumDomainError, NumericalBreakdown, ParaxialDomainError,
                     ParaxialityLost, WeakMediumError)
from .io import ContainerError, save_snapshot
from .transport import (RayState, berry_phase, rytov_angle_closed, spin_hall_deflection,
                        total_phase, trace_ray, write_trajectory_csv)
from .wave import (BeamSpec, beta_norm, centroid, component_energy, iter_pair, launch_pair,
                   mean_phase, momentum_centroid, overlap_phase, step_stability, suggest_dz)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

PROBE_COLUMNS = ("z", "cx_plus", "cy_plus", "cx_minus", "cy_minus", "energy_plus",
                 "energy_minus", "beta_norm", "absorbed_energy", "phase_plus",
                 "phase_minus", "overlap_phase", "rotation", "beta_norm_minus",
                 "absorbed_minus", "px_plus", "py_plus", "px_minus", "py_minus")

# absolute floors below which a predicted or measured value counts as zero
SHIFT_FLOOR = 1e-6      # times the beam waist
ROTATION_FLOOR = 1e-9   # rad


class NumericFailure(RuntimeError):
    pass


def _stamp(cfg, **extra):
    out = {"tool": "paraxspin", "version": __version__, "units": UNITS}
    if cfg is not None:
        out.update(scenario=cfg.scenario, config_hash=cfg.hash, seed=cfg.seed)
    out.update(extra)
    return out


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(v):
    return f"{v:.17e}"


# ---------------------------------------------------------------- verify

def cmd_verify(seed=0, fault=None, out=None):
    checks = run_checks(seed, fault)
    report = {**_stamp(None, seed=seed), "checks": [c.as_dict() for c in checks],
              "passed": all(c.passed for c in checks),
              "failed": [c.name for c in checks if not c.passed]}
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out:
        os.makedirs(out, exist_ok=True)
        _write_json(os.path.join(out, "verify.json"), report)
    return EXIT_OK if report["passed"] else EXIT_CHECK


# ---------------------------------------------------------------- trace

def cmd_trace(cfg, out, zeroth_order=False, strict_paraxial=False):
    medium = cfg.build_medium()
    b, t = cfg.beam, cfg.trace
    r0 = (b["center"][0], b["center"][1], 0.0)
    trajs = {}
    for sigma in (1, 0, -1):
        init = RayState.launch(medium, r0, tuple(b["tilt"]), sigma)
        trajs[sigma] = trace_ray(medium, init, cfg.k, cfg.z_end, step=t["step"],
                                 max_dp=t["max_dp"], zeroth_order=zeroth_order,
                                 strict_paraxial=strict_paraxial,
                                 record_every=t["record_every"])
    os.makedirs(out, exist_ok=True)
    flags = {"zeroth_order": zeroth_order, "strict_paraxial": strict_paraxial}
    header = _stamp(cfg, **flags, k=cfg.k)
    rows = {}
    base = trajs[0]
    theta, phi = base.angles()
    rytov = rytov_angle_closed(theta, phi)
    for sigma, tr in trajs.items():
        name = f"{sigma:+d}" if sigma else "0"
        write_trajectory_csv(os.path.join(out, f"trajectory_sigma{name}.csv"), tr,
                             {**header, "sigma": sigma})
        n = medium.index_at(tr.r)
        ph = total_phase(tr, cfg.k, sigma)
        rows[name] = {
            "final_r": tr.r[-1].tolist(),
            "final_p": tr.p[-1].tolist(),
            "quadrature_shift": spin_hall_deflection(tr, cfg.k, sigma)[:2].tolist(),
            "realized_shift": (tr.r[-1, :2] - base.r[-1, :2]).tolist(),
            "accumulated_shift": tr.shift[-1, :2].tolist(),
            "berry_phase": berry_phase(tr, sigma),
            "dynamical_phase": ph.dynamical,
            "steps": tr.meta["steps"],
            "dispersion_error": float(np.abs(np.linalg.norm(tr.p, axis=1) - n).max()),
        }
    summary = {**header, "z_end": cfg.z_end, "waist": cfg.beam["waist"], "sigma": rows,
               "rytov": {"quarter_tan2": rytov.tan2, "quarter_small_angle": rytov.small_angle,
                         "literature": rytov.literature,
                         "zenith_max": float(theta.max()),
                         "azimuth_span": float(phi[-1] - phi[0])},
               "medium": medium.describe(), "out_of_regime": medium.out_of_regime}
    _write_json(os.path.join(out, "trace_summary.json"), summary)
    return summary


# ---------------------------------------------------------------- bpm

def memory_estimate_mb(n):
    # two fields of 4 complex planes plus FFT scratch, caches and probe temporaries
    return 24 * 4 * 16 * n * n / 2**20


def cmd_bpm(cfg, out, snapshots=False):
    g, b = cfg.grid, cfg.beam
    need = memory_estimate_mb(g["n"])
    if need > cfg.memory_budget_mb:
        raise ConfigError(f"grid n = {g['n']} needs about {need:.0f} MB, above "
                          f"memory_budget_mb = {cfg.memory_budget_mb:g}")
    medium = cfg.build_medium()
    spec = BeamSpec(b["waist"], tuple(b["center"]), tuple(b["tilt"]), 1, b["amplitude"])
    a, m = launch_pair(spec, g["n"], g["half_width"], medium.n0, cfg.k, g["absorber"],
                       g["project_forward"])
    st = step_stability(a, medium, g["dz"], g["band_limit"])
    if not st.stable:
        raise ConfigError(f"grid.dz = {g['dz']:g} is unstable (band gap {st.gap:.3f} rad); "
                          f"largest stable divisor is {suggest_dz(a, medium, g['dz']):g}")
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "probes.csv")
    header = _stamp(cfg, n=g["n"], dz=g["dz"], half_width=g["half_width"], k=cfg.k,
                    out_of_regime=medium.out_of_regime)
    snap_every = cfg.probes["snapshots_every"]
    probe_every = cfg.probes["every"]
    raw0 = prev = None
    unwrapped = 0.0
    z = 0.0
    with open(path, "w", newline="") as fh:
        for key, val in header.items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(PROBE_COLUMNS)
        try:
            for i, (a, m) in enumerate(iter_pair(medium, a, m, cfg.z_end, g["dz"],
                                                 probe_every, g["band_limit"],
                                                 g["absorb_strength"], check_stability=False)):
                z = a.z
                raw = overlap_phase(a, m)
                if raw0 is None:
                    raw0 = prev = raw
                    unwrapped = raw
                else:
                    unwrapped += math.remainder(raw - prev, 2 * math.pi)
                    prev = raw
                ca, cm = centroid(a), centroid(m)
                pa, pm = momentum_centroid(a), momentum_centroid(m)
                row = (a.z, ca[0], ca[1], cm[0], cm[1], component_energy(a), component_energy(m),
                       beta_norm(a), a.absorbed, mean_phase(a), mean_phase(m), raw,
                       0.5 * (unwrapped - raw0), beta_norm(m), m.absorbed,
                       pa[0], pa[1], pm[0], pm[1])
                w.writerow([_fmt(float(v)) for v in row])
                fh.flush()
                if snapshots and (i == 0 or (snap_every and (i * probe_every) % snap_every == 0)):
                    _snapshots(out, a, m, cfg)
            if snapshots:
                _snapshots(out, a, m, cfg)
        except KeyboardInterrupt:
            fh.write(f"# TRUNCATED at z = {z!r}: interrupted\n")
            raise
        except (NumericalBreakdown, ParaxialityLost, FloatingPointError) as exc:
            fh.write(f"# TRUNCATED at z = {z!r}: {exc}\n")
            raise NumericFailure(f"bpm truncated at z = {z:g}: {exc}") from exc
    return path


def _snapshots(out, a, m, cfg):
    for tag, grid in (("plus", a), ("minus", m)):
        fn = os.path.join(out, f"snapshot_{tag}_z{grid.z:012.6f}.pxg")
        save_snapshot(fn, grid, {"scenario": cfg.scenario, "config_hash": cfg.hash,
                                 "version": __version__})


# ---------------------------------------------------------------- compare

def read_probes(path):
    """Return (header dict, column dict, truncated flag) of a probe CSV."""
    header, lines, truncated = {}, [], False
    with open(path) as fh:
        for line in fh:
            if line.startswith("# TRUNCATED"):
                truncated = True
            elif line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0]) != PROBE_COLUMNS:
        raise ContainerError(f"{path}: unexpected probe columns")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(PROBE_COLUMNS))
    return header, {c: data[:, i] for i, c in enumerate(PROBE_COLUMNS)}, truncated


def spin_hall_row(predicted, measured, tol, floor):
    predicted = np.asarray(predicted, float)
    measured = np.asarray(measured, float)
    mag = float(np.linalg.norm(predicted))
    row = {"predicted": predicted.tolist(), "measured": measured.tolist(), "tolerance": tol}
    if mag <= floor:
        row.update(ratio=None, discrepancy=None,
                   passed=bool(np.linalg.norm(measured) <= floor))
        return row
    ratio = float(measured @ predicted) / mag**2
    row.update(ratio=ratio, discrepancy=ratio - 1.0, passed=bool(abs(ratio - 1.0) <= tol))
    return row


def rytov_row(quarter, literature, measured, tol, floor=ROTATION_FLOOR):
    lo, hi = min(quarter, literature), max(quarter, literature)
    band = (lo - tol * abs(lo), hi + tol * abs(hi))
    if max(abs(lo), abs(hi)) <= floor:
        band = (-floor, floor)
    return {"quarter": quarter, "literature": literature, "measured": measured,
            "ratio_to_quarter": measured / quarter if abs(quarter) > floor else None,
            "ratio_to_literature": measured / literature if abs(literature) > floor else None,
            "band": list(band), "tolerance": tol,
            "passed": bool(band[0] <= measured <= band[1])}


def cmd_compare(summary_path, probes_path, out=None, tolerances=None):
    with open(summary_path) as fh:
        summary = json.load(fh)
    header, cols, truncated = read_probes(probes_path)
    for key in ("scenario", "config_hash"):
        if str(summary.get(key)) != header.get(key):
            raise ConfigError(f"{key} mismatch: summary has {summary.get(key)!r}, "
                              f"probes have {header.get(key)!r}")
    z_probe, z_trace = float(cols["z"][-1]), float(summary["z_end"])
    if truncated or abs(z_probe - z_trace) > 1e-9 * max(1.0, z_trace):
        raise ConfigError(f"probe series ends at z = {z_probe:g}, trace at z = {z_trace:g}")
    tol = {"spin_hall": 0.3, "rytov": 0.3, **(tolerances or {})}
    waist = float(summary.get("waist", 1.0))
    measured = 0.5 * np.array([cols["cx_plus"][-1] - cols["cx_minus"][-1],
                               cols["cy_plus"][-1] - cols["cy_minus"][-1]])
    rows = {
        "spin_hall": spin_hall_row(summary["sigma"]["+1"]["quadrature_shift"], measured,
                                   tol["spin_hall"], SHIFT_FLOOR * waist),
        "rytov": rytov_row(summary["rytov"]["quarter_tan2"], summary["rytov"]["literature"],
                           float(cols["rotation"][-1]), tol["rytov"]),
    }
    rows["spin_hall"]["realized_ode_shift"] = summary["sigma"]["+1"]["realized_shift"]
    rows["rytov"]["quarter_small_angle"] = summary["rytov"]["quarter_small_angle"]
    report = {"tool": "paraxspin", "version": __version__, "units": UNITS,
              "scenario": summary["scenario"], "config_hash": summary["config_hash"],
              "z": z_probe, "rows": rows, "passed": all(r["passed"] for r in rows.values())}
    if out:
        os.makedirs(out, exist_ok=True)
        _write_json(os.path.join(out, "comparison.json"), report)
    return report


def format_report(report):
    sh, ry = report["rows"]["spin_hall"], report["rows"]["rytov"]
    lines = [f"scenario {report['scenario']} (config {report['config_hash']}, z = {report['z']:g})"]
    ratio = "n/a" if sh["ratio"] is None else f"{sh['ratio']:+.4f}"
    lines.append(f"  spin Hall  predicted {sh['predicted']}  measured {sh['measured']}  "
                 f"ratio {ratio}  tol {sh['tolerance']}  {'PASS' if sh['passed'] else 'FAIL'}")
    lines.append(f"  rotation   measured {ry['measured']:+.6e}  quarter {ry['quarter']:+.6e}  "
                 f"literature {ry['literature']:+.6e}  band [{ry['band'][0]:+.4e}, "
                 f"{ry['band'][1]:+.4e}]  {'PASS' if ry['passed'] else 'FAIL'}")
    return "\n".join(lines)


# ---------------------------------------------------------------- batch

def run_all(cfg, out, zeroth_order=False, strict_paraxial=False, snapshots=False):
    cmd_trace(cfg, out, zeroth_order, strict_paraxial)
    probes = cmd_bpm(cfg, out, snapshots)
    return cmd_compare(os.path.join(out, "trace_summary.json"), probes, out, cfg.tolerances)


def _batch_one(args):
    path, out, opts = args
    try:
        cfg = _load(path, opts.get("seed"))
        rep = run_all(cfg, os.path.join(out, cfg.scenario), opts["zeroth_order"],
                      opts["strict_paraxial"], opts["snapshots"])
        return path, (EXIT_OK if rep["passed"] else EXIT_CHECK), format_report(rep)
    except Exception as exc:  # collected per scenario, mapped to an exit code below
        return path, _exit_code(exc), f"{path}: {exc}"


def cmd_batch(directory, out, jobs=1, **opts):
    paths = sorted(glob.glob(os.path.join(directory, "*.yaml")))
    if not paths:
        raise ConfigError(f"no *.yaml scenarios in {directory}")
    work = [(p, out, opts) for p in paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_batch_one, work))
    else:
        results = [_batch_one(w) for w in work]
    for _, _, text in results:
        print(text)
    return max(code for _, code, _ in results)


# ---------------------------------------------------------------- plumbing

def _load(path, seed=None):
    cfg = parse_config(path)
    if seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=seed)
    return cfg


def _exit_code(exc):
    if isinstance(exc, (NumericFailure, NumericalBreakdown, ParaxialityLost,
                        ParaxialDomainError, MediumDomainError, FloatingPointError)):
        return EXIT_NUMERIC
    if isinstance(exc, ContainerError):
        return EXIT_IO
    if isinstance(exc, (ConfigError, WeakMediumError, ValueError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def build_parser():
    p = argparse.ArgumentParser(prog="paraxspin", description=__doc__.splitlines()[1])
    p.add_argument("--version", action="version", version=f"paraxspin {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("config")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None)

    v = sub.add_parser("verify", help="run the algebra and geometry self-checks, print JSON")
    common(v, config=False)
    v.add_argument("--inject-fault", default=None, metavar="CHECK",
                   help="corrupt the named check (test hook)")
    for name, helptext in (("trace", "trace sigma = -1, 0, +1 rays"),
                           ("bpm", "run the split-step wave oracle for both helicities")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--zeroth-order", action="store_true")
        sp.add_argument("--strict-paraxial", action="store_true")
        sp.add_argument("--snapshots", action="store_true")
    c = sub.add_parser("compare", help="join a trace summary with bpm probes")
    c.add_argument("summary")
    c.add_argument("probes")
    c.add_argument("--out", default=None)
    c.add_argument("--spin-hall-tol", type=float, default=0.3)
    c.add_argument("--rytov-tol", type=float, default=0.3)
    b = sub.add_parser("batch", help="trace, bpm and compare every *.yaml in a directory")
    b.add_argument("directory")
    b.add_argument("--out", default="out")
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--zeroth-order", action="store_true")
    b.add_argument("--strict-paraxial", action="store_true")
    b.add_argument("--snapshots", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.seed or 0, args.inject_fault, args.out)
        if args.command == "compare":
            rep = cmd_compare(args.summary, args.probes, args.out,
                              {"spin_hall": args.spin_hall_tol, "rytov": args.rytov_tol})
            print(format_report(rep))
            return EXIT_OK if rep["passed"] else EXIT_CHECK
        if args.command == "batch":
            return cmd_batch(args.directory, args.out, args.jobs, seed=args.seed,
                             zeroth_order=args.zeroth_order,
                             strict_paraxial=args.strict_paraxial, snapshots=args.snapshots)
        cfg = _load(args.config, args.seed)
        out = args.out or cfg.resolve(cfg.output["dir"])
        if args.command == "trace":
            s = cmd_trace(cfg, out, args.zeroth_order, args.strict_paraxial)
            print(json.dumps({"trace_summary": os.path.join(out, "trace_summary.json"),
                              "shift_plus": s["sigma"]["+1"]["quadrature_shift"]}))
        else:
            print(json.dumps({"probes": cmd_bpm(cfg, out, args.snapshots)}))
        return EXIT_OK
    except Exception as exc:
        code = _exit_code(exc)
        print(f"paraxspin {args.command}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
