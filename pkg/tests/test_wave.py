import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.linalg import expm

from paraxspin.clifford import CONJUGATE, STANDARD
from paraxspin.errors import NumericalBreakdown
from paraxspin.medium import Homogeneous, LinearGradient, ParabolicGRIN
from paraxspin.wave import (BeamSpec, beta_norm, centroid, forward_projection,
                            init_gaussian_beam, kinetic_propagator, make_grid,
                            momentum_centroid, run_helicity_pair, run_scenario,
                            rytov_measurement, step, step_stability, suggest_dz)

BETA = STANDARD.m_z


def test_propagator_at_rest():
    P = kinetic_propagator((0.0, 0.0), 0.01, 200.0, 1.3)
    np.testing.assert_allclose(P, expm(1j * 200.0 * 0.01 * 1.3 * BETA), atol=1e-14)
    Pc = kinetic_propagator((0.0, 0.0), 0.01, 200.0, 1.3, carrier=True)
    np.testing.assert_allclose(np.diag(Pc)[:2], 1.0, atol=1e-14)


def test_propagator_vs_expm():
    for mset in (STANDARD, CONJUGATE):
        P = kinetic_propagator((0.12, -0.07), 0.01, 200.0, 1.0, mset)
        K = BETA @ (-np.eye(4) + mset.dot_perp((0.12, -0.07)))
        assert np.abs(P - expm(-1j * 2.0 * K)).max() <= 1e-12
        assert np.abs(P.conj().T @ BETA @ P - BETA).max() <= 1e-13


def test_forward_mode_phase():
    # per-step phase of a forward eigenmode is exp(i k (E - n0) dz) with the carrier removed
    p, dz, k = (0.2, 0.1), 0.03, 150.0
    P = kinetic_propagator(p, dz, k, 1.0, carrier=True)
    E = math.sqrt(1 - 0.05)
    w, v = np.linalg.eig(P)
    target = np.exp(1j * k * (E - 1.0) * dz)
    assert np.sum(np.abs(w - target) < 1e-12) == 2


def small_beam(sigma=1, n=64, tilt=(0.0, 0.0), center=(0.0, 0.0), waist=0.5):
    return init_gaussian_beam(BeamSpec(waist, center, tilt, sigma), n, 2.0, 1.0, 100.0)


def test_beam_is_pure_plus():
    g = small_beam()
    c = g.samples
    frac = np.sum(np.abs(c[0]) ** 2) / np.sum(np.abs(c) ** 2)
    assert frac > 0.999
    assert np.abs(c[3]).max() == 0.0
    np.testing.assert_allclose(centroid(g), (0, 0), atol=1e-3 * 0.5)


def test_longitudinal_fraction_small():
    g = small_beam()
    fz = 0.5 * (g.samples[1] + g.samples[2])
    ratio = np.sum(np.abs(fz) ** 2) / np.sum(np.abs(0.5 * g.samples[0]) ** 2)
    # |F_z|^2 / |F_perp|^2 ~ (1 / (k w n0))^2 = 4e-4 up to an O(1) factor
    assert 1e-5 < ratio < 4 * (1 / (100.0 * 0.5)) ** 2


def test_beam_divergence_free():
    for sigma in (1, -1):
        g = small_beam(sigma, tilt=(0.05, -0.03))
        c = np.fft.fft2(g.samples, axes=(1, 2))
        fx, fy, fz = 0.5 * (c[3] - c[0]), -0.5j * (c[0] + c[3]), c[1]
        PX, PY = g.momenta()
        pz = np.sqrt(1 - PX**2 - PY**2)
        div = PX * fx + (-PY if sigma < 0 else PY) * fy + pz * fz
        assert np.abs(div).max() <= 1e-10 * np.abs(fx).max()


def test_shifted_beam_centroid():
    g = small_beam(center=(0.3, 0.0))
    np.testing.assert_allclose(centroid(g), (0.3, 0.0), atol=1e-3 * 0.5)


def test_subgrid_shift_recovered():
    g0 = small_beam()
    h = g0.spacing[0]
    g1 = small_beam(center=(0.01 * h, 0.0))
    d = centroid(g1)[0] - centroid(g0)[0]
    assert d == pytest.approx(0.01 * h, rel=0.1)


def test_beam_validation():
    with pytest.raises(ValueError, match="resolved"):
        init_gaussian_beam(BeamSpec(0.05), 64, 2.0, 1.0, 100.0)
    with pytest.raises(ValueError, match="band"):
        init_gaussian_beam(BeamSpec(0.5, tilt=(0.45, 0.0)), 64, 2.0, 1.0, 100.0)
    with pytest.raises(ValueError):
        BeamSpec(0.5, sigma=0)


def test_centroid_needs_energy():
    g = make_grid(32, 1.0, 100.0, 1.0)
    with pytest.raises(ValueError, match="undefined"):
        centroid(g)


def test_forward_projection_idempotent():
    g = small_beam(tilt=(0.1, 0.0))
    once = forward_projection(g)
    g.samples = once
    np.testing.assert_allclose(forward_projection(g), once, atol=1e-13)


def test_homogeneous_centroid_fixed():
    ser, _ = run_scenario(Homogeneous(1.0), small_beam(), 0.5, 0.01, probe_every=10)
    assert np.abs(ser["cx"]).max() < 1e-12 and np.abs(ser["cy"]).max() < 1e-12


def test_homogeneous_beta_norm_1000_steps():
    ser, _ = run_scenario(Homogeneous(1.0), small_beam(tilt=(0.03, 0.0)), 10.0, 0.01,
                          probe_every=100)
    drift = np.abs(ser["beta_norm"] + ser["absorbed"] - ser["beta_norm"][0]).max()
    assert drift / ser["beta_norm"][0] <= 1e-9


def test_beta_norm_exact_without_absorber():
    g = small_beam(tilt=(0.05, 0.02))
    g.absorber = 0.0
    med = ParabolicGRIN(1.0, 0.05, bounds=((-3, 3), (-3, 3), (-1, 10)))
    b0 = beta_norm(g)
    for _ in range(50):
        g = step(g, 0.01, med)
    assert abs(beta_norm(g) / b0 - 1) < 1e-12


def test_breakdown_reports_last_good_z():
    g = small_beam()
    g.samples[0, 3, 3] = np.nan
    g.z = 1.25
    with pytest.raises(NumericalBreakdown) as exc:
        step(g, 0.01, Homogeneous(1.0))
    assert exc.value.last_good_z == 1.25


def test_second_order_in_dz():
    med = ParabolicGRIN(1.0, 0.1, bounds=((-3, 3), (-3, 3), (-1, 10)))

    def run(dz):
        g = small_beam(tilt=(0.05, 0.0), center=(0.2, 0.0))
        g.absorber = 0.0
        for _ in range(int(round(0.4 / dz))):
            g = step(g, dz, med)
        return g.samples

    # dz = 0.02 is still pre-asymptotic here (k dz n0 = 2 rad)
    ref = run(0.000625)
    e1 = np.abs(run(0.01) - ref).max()
    e2 = np.abs(run(0.005) - ref).max()
    assert 3.6 < e1 / e2 < 4.6


def test_stability_helper():
    g = init_gaussian_beam(BeamSpec(0.4041, (2.0, 0.0), (0.0, 0.1225)), 256, 5.0, 1.5, 200.0)
    med = ParabolicGRIN(1.5, 0.05, bounds=((-5, 5), (-5, 5), (-1, 200)))
    assert not step_stability(g, med, 0.1).stable
    assert step_stability(g, med, 0.05).stable
    assert suggest_dz(g, med, 0.1) == 0.05
    with pytest.raises(ValueError, match="couples"):
        run_scenario(med, g, 1.0, 0.1)


def test_run_scenario_requires_commensurate_range():
    with pytest.raises(ValueError, match="multiple"):
        run_scenario(Homogeneous(1.0), small_beam(), 0.105, 0.01)


@pytest.fixture(scope="module")
def gradient_pair():
    med = LinearGradient(1.0, (0.01, 0, 0), bounds=((-3, 3), (-3, 3), (-1, 5)))
    return run_helicity_pair(med, BeamSpec(0.5), 96, 3.0, 100.0, 2.0, 0.01, probe_every=40)


def test_ehrenfest_momentum_drift(gradient_pair):
    z, px = gradient_pair.plus["z"], gradient_pair.plus["px"]
    rate = np.polyfit(z, px, 1)[0]
    assert rate == pytest.approx(0.01, rel=0.01)


def test_helicities_split_oppositely(gradient_pair):
    ya, yb = gradient_pair.plus["cy"][-1], gradient_pair.minus["cy"][-1]
    assert ya * yb < 0
    assert ya == pytest.approx(-yb, rel=1e-9)
    np.testing.assert_allclose(gradient_pair.plus["cx"], gradient_pair.minus["cx"], rtol=1e-9)


def test_mirror_symmetry():
    med = LinearGradient(1.0, (0.01, 0, 0), bounds=((-3, 3), (-3, 3), (-1, 5)))
    a = small_beam(1, tilt=(0.02, 0.04), center=(0.1, 0.15))
    # the conjugate representation of the mirror image y -> -y
    b = a.copy()
    b.conjugated = True
    b._cache = {}
    b.samples = np.roll(a.samples[:, :, ::-1], 1, axis=2)
    # index j maps to -j mod n, which sends y_j to -y_j on the periodic grid
    np.testing.assert_allclose(np.roll(a.y[::-1], 1)[1:], -a.y[1:])
    for _ in range(100):
        a = step(a, 0.01, med)
        b = step(b, 0.01, med)
    mirrored = np.roll(a.samples[:, :, ::-1], 1, axis=2)
    assert np.abs(b.samples - mirrored).max() <= 1e-10


def test_rotation_homogeneous_zero():
    pair = run_helicity_pair(Homogeneous(1.0), BeamSpec(0.5), 64, 2.0, 100.0, 1.0, 0.01,
                             probe_every=20)
    rot = rytov_measurement(pair)
    assert np.abs(rot.angle).max() < 1e-12
    assert not rot.ambiguous


def test_rotation_flags_ambiguity():
    pair = SimpleNamespace(z=np.arange(4.0), overlap_phase=np.array([0.0, 0.1, 2.2, 2.3]))
    assert rytov_measurement(pair).ambiguous
    pair.overlap_phase = np.array([0.0, 1.5, 3.0, -1.8])
    rot = rytov_measurement(pair)
    assert not rot.ambiguous
    assert rot.angle[-1] == pytest.approx(0.5 * (2 * np.pi - 1.8))


def test_rotation_reverses_with_handedness():
    med = ParabolicGRIN(1.2, 0.05, bounds=((-5, 5), (-5, 5), (-1, 50)))
    w = math.sqrt(2 / (50.0 * 0.05 * math.sqrt(1.2)))
    tilt = math.sqrt(1.2) * 0.05 * 2.0
    out = []
    for sign in (1, -1):
        spec = BeamSpec(w, (2.0, 0.0), (0.0, sign * tilt))
        pair = run_helicity_pair(med, spec, 128, 5.0, 50.0, 20.0, 0.025, probe_every=40)
        out.append(rytov_measurement(pair).angle[-1])
    assert abs(out[0]) > 1e-4
    assert out[1] == pytest.approx(-out[0], rel=1e-8)
