"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line (run pytest with -s to stream them).
The heavy Monte Carlo criteria honor the RISLINK_WORKERS environment
variable (default 2).  Master seeds are fixed constants chosen up front.
"""

import math
import os

import numpy as np
import pytest

from rislink import cli, montecarlo, pathloss, sep
from rislink.fading import draw_realization
from rislink.link import (
    ModulationSpec,
    instantaneous_snr_reflector,
    mean_snr_reflector,
    optimal_phases_reflector,
)
from rislink.numerics import sample_standard_complex_gaussian, substream

SEED = 12345
WORKERS = int(os.environ.get("RISLINK_WORKERS", "2"))
WAVELENGTH = 0.01
PI = math.pi


def db(x):
    return 10.0 ** (x / 10.0)


def report(tag, ok, detail):
    print(f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{tag}: {detail}"


def geometry(d):
    return pathloss.TwoRayGeometry(h_t=5 * WAVELENGTH, h_r=5 * WAVELENGTH,
                                   d=d, wavelength=WAVELENGTH)


def test_c1_pathloss_scaling_exponents():
    distances = np.logspace(math.log10(1e3 * WAVELENGTH), math.log10(1e5 * WAVELENGTH), 41)
    curves = {"los": [], "two_ray": [], "ris": [], "relay": []}
    for d in distances:
        g = geometry(float(d))
        curves["los"].append((d, pathloss.los_power(1.0, g).p_r))
        curves["two_ray"].append((d, pathloss.two_ray_power(1.0, g, reflection=-1.0).p_r))
        curves["ris"].append((d, pathloss.ris_ground_power(
            1.0, g, pathloss.TileSet.specular(g, 100), mode="optimal").p_r))
        curves["relay"].append((d, pathloss.relay_power(1.0, d / 2, d / 2, WAVELENGTH).p_r))
    expected = {"los": -2.0, "two_ray": -4.0, "ris": -2.0, "relay": -4.0}
    slopes = {k: pathloss.fit_pathloss_exponent(v) for k, v in curves.items()}
    ok = all(abs(slopes[k] - expected[k]) <= 0.05 for k in expected)
    report("C1 scaling-laws", ok,
           "fitted exponents " + ", ".join(f"{k}={slopes[k]:+.4f}" for k in expected)
           + " (targets -2, -4, -2, -4 within 0.05)")


def test_c2_squared_tile_gain():
    g = geometry(100.0)
    base = pathloss.los_power(1.0, g).p_r
    worst = 0.0
    for n in range(1, 257):
        gain = pathloss.ris_ground_power(
            1.0, g, pathloss.TileSet.specular(g, n), mode="optimal").p_r / base
        worst = max(worst, abs(gain / (n + 1) ** 2 - 1.0))
    gain_db = pathloss.ris_ground_power(
        1.0, g, pathloss.TileSet.specular(g, 100), mode="optimal").gain_db_vs_los
    ok = worst <= 1e-9 and abs(gain_db - 40.09) <= 0.01
    report("C2 squared-gain", ok,
           f"max relative gain error {worst:.2e} over N=1..256; "
           f"N=100 gain {gain_db:.4f} dB (target 40.09 +/- 0.01)")


def test_c3_mean_snr_monte_carlo():
    stream = substream(SEED, 0)
    lines = []
    ok = True
    for n in (16, 32, 64):
        total = 1_000_000
        acc = 0.0
        for _ in range(20):
            h = sample_standard_complex_gaussian(stream, (total // 20, n))
            g = sample_standard_complex_gaussian(stream, (total // 20, n))
            acc += float(np.sum(np.sum(np.abs(h) * np.abs(g), axis=1) ** 2))
        measured = acc / total
        expected = mean_snr_reflector(n, 1.0)
        rel = abs(measured / expected - 1.0)
        ok = ok and rel <= 0.01
        lines.append(f"N={n}: {rel * 100:.3f}%")
    report("C3 mean-snr", ok, "Monte Carlo vs closed form over 1e6 draws: "
           + ", ".join(lines) + " (tolerance 1%)")


@pytest.mark.parametrize("n", [32, 64])
def test_c4_gaussian_model_vs_simulation(n):
    plan = montecarlo.TrialPlan(master_seed=SEED, trials=10_000_000, batch=20_000)
    spec = ModulationSpec("psk", 2)
    grid = np.arange(-45.0, 0.01, 3.0)
    bad = []
    checked = 0
    for snr_db in grid:
        rho = db(snr_db)
        est = montecarlo.simulate_reflector_sep(plan, n, spec, rho,
                                                workers=WORKERS, snr_db=snr_db)
        if est.pe_hat < 1e-5:
            continue
        checked += 1
        analytic = sep.sep_bpsk_reflector(n, rho)
        if not est.ci.low <= analytic <= est.ci.high:
            off = (analytic - est.pe_hat) / est.pe_hat * 100
            bad.append(f"{snr_db:+.0f} dB (closed form {off:+.1f}% vs simulated)")
    ok = not bad
    report(f"C4 closed-form-in-belt N={n}", ok,
           f"{checked} grid points with pe >= 1e-5 at 1e7 trials; "
           + ("all contain the closed form" if ok
              else "outside the 95% belt at " + "; ".join(bad)))


@pytest.mark.parametrize("n", [16, 32, 64])
def test_c5_six_db_per_doubling(n):
    req = {}
    for tiles in (n, 2 * n):
        req[tiles] = sep.required_snr_db(
            lambda s, tiles=tiles: sep.sep_bpsk_reflector(tiles, db(s)),
            1e-3, bracket=(-45.0, 10.0))
    gap = req[n] - req[2 * n]
    ok = abs(gap - 6.0) <= 0.5
    report(f"C5 doubling-gap N={n}->{2 * n}", ok,
           f"required-SNR gap at pe=1e-3 is {gap:.3f} dB (target 6.0 +/- 0.5)")


def _simulated_crossing(mode, n, target_pe, center_db, plan):
    """Log-interpolated SNR where the simulated curve crosses target_pe."""
    grid = [center_db - 0.75, center_db, center_db + 0.75]
    pts = []
    for snr_db in grid:
        if mode == "reflector":
            est = montecarlo.simulate_reflector_sep(plan, n, ModulationSpec("psk", 2),
                                                    db(snr_db), workers=WORKERS,
                                                    snr_db=snr_db)
        else:
            est = montecarlo.simulate_transmitter_sep(plan, n, 2, db(snr_db),
                                                      workers=WORKERS, snr_db=snr_db)
        pts.append((snr_db, est.pe_hat))
    for (s0, p0), (s1, p1) in zip(pts, pts[1:]):
        if p0 >= target_pe >= p1:
            t = (math.log(p0) - math.log(target_pe)) / (math.log(p0) - math.log(p1))
            return s0 + t * (s1 - s0)
    raise AssertionError(f"simulated curve never crosses {target_pe}: {pts}")


def test_c6_transmitter_snr_gain():
    target = 1e-3
    req_r = sep.required_snr_db(lambda s: sep.sep_bpsk_reflector(32, db(s)),
                                target, bracket=(-45.0, 0.0))
    req_t = sep.required_snr_db(lambda s: sep.sep_transmitter(32, db(s), 2),
                                target, bracket=(-45.0, 0.0))
    analytic_gain = req_r - req_t

    plan = montecarlo.TrialPlan(master_seed=SEED, trials=10_000_000, batch=20_000)
    sim_r = _simulated_crossing("reflector", 32, target, round(req_r * 2) / 2, plan)
    sim_t = _simulated_crossing("transmitter", 32, target, round(req_t * 2) / 2, plan)
    sim_gain = sim_r - sim_t

    ok = abs(analytic_gain - 1.0) <= 0.3 and abs(sim_gain - 1.0) <= 0.3
    report("C6 transmitter-gain", ok,
           f"binary signaling at pe=1e-3, N=32: transmitter needs "
           f"{analytic_gain:.3f} dB less by the exact integrals and "
           f"{sim_gain:.3f} dB less by 1e7-trial simulation (target 1.0 +/- 0.3)")


def test_c7_bound_and_consistency_suite():
    failures = []

    for n in (8, 16, 32, 64):
        for snr_db in np.arange(-45.0, 0.01, 0.5):
            rho = db(snr_db)
            if sep.sep_bpsk_ub(n, rho) < sep.sep_bpsk_reflector(n, rho):
                failures.append(f"bound below exact at N={n}, {snr_db} dB")

    for snr_db in (-30.0, -20.0, -10.0):
        spec = sep.MgfSpec("reflector", 32, db(snr_db))
        if abs(sep.sep_mpsk(spec, 4) - sep.sep_mqam(spec, 4)) > 1e-9:
            failures.append(f"qpsk/4qam mismatch at {snr_db} dB")

    for mode in ("reflector", "transmitter"):
        if sep.mgf(sep.MgfSpec(mode, 32, 0.5), 0.0) != 1.0:
            failures.append(f"mgf(0) != 1 for {mode}")

    h = 1e-6
    for n in (16, 32, 64):
        spec = sep.MgfSpec("reflector", n, 1.0)
        deriv = (sep.mgf(spec, h) - sep.mgf(spec, -h)) / (2 * h)
        if abs(deriv / mean_snr_reflector(n, 1.0) - 1.0) > 1e-4:
            failures.append(f"mgf derivative off at N={n}")

    rng = np.random.default_rng(SEED)
    violations = 0
    for i in range(1000):
        ch = draw_realization(substream(SEED, i), 8)
        best = instantaneous_snr_reflector(ch, optimal_phases_reflector(ch), 1.0).gamma
        # 1000 random phase vectors, evaluated in one vectorized sweep
        phases = rng.uniform(0.0, 2 * PI, size=(1000, 8))
        gains = np.abs(np.sum(ch.h * ch.g * np.exp(1j * phases), axis=1)) ** 2
        violations += int(np.count_nonzero(gains > best * (1 + 1e-12)))
    if violations:
        failures.append(f"{violations} phase-optimality violations")

    report("C7 consistency-suite", not failures,
           "bound dominance, qpsk/4qam identity, mgf normalization, mgf-derivative "
           "mean, and 1e3x1e3 phase-optimality sweep"
           + ("" if not failures else "; failures: " + "; ".join(failures[:5])))


def test_c8_high_snr_slope():
    lo, hi = sep.SQRT_DECAY_WINDOW
    rhos = np.logspace(math.log10(lo), math.log10(hi), 21)
    pes = [sep.sep_bpsk_reflector(32, float(r)) for r in rhos]
    slope = float(np.polyfit(np.log(rhos), np.log(pes), 1)[0])
    ok = abs(slope + 0.5) <= 0.05
    report("C8 high-snr-slope", ok,
           f"log-log slope {slope:.4f} over linear SNR window [{lo:g}, {hi:g}] "
           f"(target -0.5 +/- 0.05)")


def test_c9_csv_determinism(tmp_path, monkeypatch):
    outputs = []
    for workers in ("1", "4", "16"):
        monkeypatch.setenv("RISLINK_WORKERS", workers)
        out = tmp_path / f"w{workers}.csv"
        rc = cli.main(["sep-sim", "--n", "16", "--trials", "200000", "--seed", str(SEED),
                       "--snr-start", "-25", "--snr-stop", "-15", "--snr-step", "5",
                       "--out", str(out)])
        assert rc == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report("C9 determinism", ok,
           "sep-sim output byte-identical across worker counts 1, 4, 16")
