"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``CRITERION n: PASS|FAIL`` line (also collected into the
terminal summary by conftest.py) and then asserts the same condition.

Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time
from dataclasses import replace

import mpmath
import numpy as np
import pytest

from helmsource.bayes import PcnConfig, mh_step, run_chain, summarize
from helmsource.dsm import SamplingGrid, indicator
from helmsource.experiment import anchors_from_peaks, invert, load_bundled, locate, match, simulate
from helmsource.forward import far_field_point, fundamental_solution, near_field_point
from helmsource.measure import MeasurementGeometry, add_noise, aperture_geometry, synthesize, wavenumber_grid
from helmsource.sources import ParameterLayout, Rectangle, layout_for, make_point_config, pack
from helmsource.specfun import bessel_j0, bessel_j1, bessel_y0


def dsm_errors(cfg):
    """Simulate, locate, and return (distance of each true source to its matched peak, n_peaks, seconds)."""
    t0 = time.perf_counter()
    _, noisy = simulate(cfg)
    _, peaks = locate(cfg, noisy)
    elapsed = time.perf_counter() - t0
    truth = cfg.truth.locations
    errs = np.full(len(truth), np.inf)
    for r, c in match(truth, peaks.locations):
        errs[r] = np.linalg.norm(peaks.locations[c] - truth[r])
    return errs, len(peaks), elapsed


def with_aperture(cfg, name):
    g = cfg.geometry
    return replace(cfg, geometry=aperture_geometry(g.regime, name, g.radius or 6.5))


def test_criterion_01_example1_dsm(record):
    base = load_bundled("example1")
    ok, parts = True, []
    for ap in ("S1", "S2", "S3"):
        errs, n, dt = dsm_errors(with_aperture(base, ap))
        good = np.all(errs <= 0.1) and dt < 30
        ok &= bool(good)
        parts.append(f"{ap}: max err {errs.max():.3f} ({n} peaks, {dt:.1f}s)")
    assert record(1, ok, "; ".join(parts) + "  [tol 0.1, < 30 s]")


def test_criterion_02_example2_dsm_far(record):
    base = load_bundled("example2")
    ok, parts = True, []
    for ap, tol in (("S1", 0.1), ("S3", 0.3)):
        errs, n, dt = dsm_errors(with_aperture(base, ap))
        good = np.all(errs <= tol) and dt < 30
        ok &= bool(good)
        parts.append(f"{ap}: errs {np.round(errs, 3).tolist()} tol {tol} ({n} peaks, {dt:.1f}s)")
    assert record(2, ok, "; ".join(parts))


def test_criterion_03_example3_dsm(record):
    errs, n, dt = dsm_errors(load_bundled("example3"))
    ok = np.all(errs <= 0.1) and dt < 60
    assert record(3, ok, f"S1: errs {np.round(errs, 3).tolist()} ({n} peaks, {dt:.1f}s)  [tol 0.1, < 60 s]")


def bayes_run(cfg):
    t0 = time.perf_counter()
    _, noisy = simulate(cfg)
    _, peaks = locate(cfg, noisy)
    chain = invert(cfg, noisy, anchors_from_peaks(cfg, peaks))
    s = summarize(chain)
    return s, chain, time.perf_counter() - t0


def test_criterion_04_example1_bayes(record):
    base = load_bundled("example1")
    truth = pack(base.truth).values
    layout = layout_for(base.truth)
    t_lam, _, t_z = layout.split(truth)
    ok, parts = True, []
    for seed in (0, 1, 2):
        s, chain, dt = bayes_run(base.with_seed(seed))
        lam, _, z = layout.split(s.mean)
        lam_err = np.abs(lam - t_lam) / np.abs(t_lam)
        z_err = np.linalg.norm(z - t_z, axis=1)
        good = lam_err.max() <= 0.10 and z_err.max() <= 0.05 and dt < 300 and chain.accepted > 0
        ok &= bool(good)
        parts.append(f"seed {seed}: lam {np.round(lam, 3).tolist()} max rel {lam_err.max():.3f}, "
                     f"max z err {z_err.max():.4f}, acc {chain.acceptance_rate:.4f}, {dt:.0f}s")
    assert record(4, ok, "; ".join(parts))


def test_criterion_05_example3_bayes(record):
    cfg = load_bundled("example3")
    layout = layout_for(cfg.truth)
    t_lam, t_xi, t_z = layout.split(pack(cfg.truth).values)
    s, chain, dt = bayes_run(cfg)
    lam, xi, z = layout.split(s.mean)
    lam_err = np.abs(lam - t_lam) / np.abs(t_lam)
    xi_err = np.abs(xi - t_xi) / np.abs(t_xi)
    z_err = np.linalg.norm(z - t_z, axis=1)
    ok = lam_err.max() <= 0.1 and xi_err.max() <= 0.1 and z_err.max() <= 0.05 and dt < 600 and chain.accepted > 0
    assert record(5, ok, f"lam {np.round(lam, 4).tolist()} xi {np.round(xi, 4).tolist()} "
                         f"z {np.round(z, 4).tolist()}; max rel lam {lam_err.max():.3f}, xi {xi_err.max():.3f}, "
                         f"z err {z_err.max():.4f}; acc {chain.acceptance_rate:.5f} ({chain.accepted} moves), {dt:.0f}s")


def test_criterion_06_funk_hecke(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    n = 360
    th = 2 * math.pi * np.arange(n) / n
    xhat = np.stack([np.cos(th), np.sin(th)], 1)
    worst = 0.0
    for _ in range(100):
        k = rng.uniform(0.5, 10)
        y = rng.uniform(-4, 4, 2)
        d = rng.normal(size=2)
        d *= rng.uniform(0, 30 / k) / np.linalg.norm(d)
        zp = y + d
        quad = np.sum(np.exp(1j * k * xhat @ (zp - y))) * 2 * math.pi / n
        ref = 2 * math.pi * float(mpmath.besselj(0, k * np.linalg.norm(zp - y)))
        worst = max(worst, abs(quad - ref) / abs(ref))
    dt = time.perf_counter() - t0
    assert record(6, worst < 1e-8 and dt < 1, f"max rel err {worst:.2e} over 100 triples, {dt:.2f}s")


def test_criterion_07_near_kernel_identity(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    R, n = 50.0, 4000
    th = 2 * math.pi * np.arange(n) / n
    gam = R * np.stack([np.cos(th), np.sin(th)], 1)
    ds = 2 * math.pi * R / n
    worst = 0.0
    for _ in range(50):
        k = rng.uniform(2, 10)
        y, zp = rng.uniform(-4, 4, 2), rng.uniform(-4, 4, 2)
        quad = k * np.sum(fundamental_solution(gam, y, k) * np.conj(fundamental_solution(gam, zp, k))) * ds
        ref = float(mpmath.besselj(0, k * np.linalg.norm(y - zp))) / 4
        worst = max(worst, abs(quad - ref) / abs(ref))
    dt = time.perf_counter() - t0
    assert record(7, worst < 0.05 and dt < 5, f"max rel err {worst:.4f} over 50 pairs (R = 50), {dt:.2f}s")


def test_criterion_08_dipole_oracle(record):
    rng = np.random.default_rng(8)
    h = 1e-5
    worst = 0.0
    for _ in range(50):
        z = rng.uniform(-3, 3, 2)
        xi = rng.normal(size=2)
        k = rng.uniform(1, 10)
        a = rng.uniform(0, 2 * math.pi)
        x = 6.5 * np.array([math.cos(a), math.sin(a)])
        xhat = x / 6.5
        for field, at in ((near_field_point, x), (far_field_point, xhat)):
            def mono(zz):
                return field(make_point_config([1.0], [(0, 0)], [zz]), at, k)
            fd = -sum(xi[i] * (mono(z + h * e) - mono(z - h * e)) / (2 * h) for i, e in enumerate(np.eye(2)))
            got = field(make_point_config([0.0], [xi], [z]), at, k)
            worst = max(worst, abs(got - fd) / abs(fd))
    assert record(8, worst < 1e-6, f"max rel err {worst:.2e} over 50 near + 50 far cases")


def test_criterion_09_indicator_properties(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    grid = SamplingGrid(Rectangle(), 15, 15)
    lo, hi, worst_scale = np.inf, -np.inf, 0.0
    for _ in range(1000):
        regime = "near" if rng.random() < 0.5 else "far"
        start = rng.uniform(0, 2 * math.pi)
        width = rng.uniform(0.3, 2 * math.pi)
        m = int(rng.integers(3, 41))
        geom = MeasurementGeometry(regime, (start, start + width), m, 6.5 if regime == "near" else None)
        k1 = rng.uniform(0.5, 10)
        kg = wavenumber_grid(k1, k1 + rng.uniform(0.1, 5), int(rng.integers(2, 6)))
        J = int(rng.integers(1, 4))
        dip = rng.random(J) < 0.3
        cfg = make_point_config(np.where(dip, 0.0, rng.uniform(-9, 9, J)),
                                [tuple(rng.normal(size=2)) if d else (0.0, 0.0) for d in dip],
                                rng.uniform(-3.9, 3.9, (J, 2)))
        data = add_noise(synthesize(cfg, geom, kg), rng.uniform(0, 0.2), int(rng.integers(1 << 30)))
        v = indicator(data, grid).values
        c = complex(*rng.normal(size=2)) * 10 ** rng.uniform(-3, 3)
        vc = indicator(data.with_values(c * data.values), grid).values
        lo, hi = min(lo, v.min()), max(hi, v.max())
        worst_scale = max(worst_scale, np.max(np.abs(vc - v)))
    dt = time.perf_counter() - t0
    ok = lo >= 0 and hi <= 1 and worst_scale <= 1e-12
    assert record(9, ok, f"range [{lo:.3g}, {hi:.15g}], max |I(cu) - I(u)| {worst_scale:.1e} over 1000 datasets, {dt:.0f}s")


def test_criterion_10_pcn_kernel(record):
    layout = ParameterLayout("gaussian", 2)
    s = 2.5
    cfg = PcnConfig(beta=0.3, anchors=[(0, 0), (1, 1)], max_iter=10 ** 5, burn_in=100, intensity_prior_std=s)
    chain = run_chain(None, cfg, layout, potential_fn=lambda v: 0.0)
    std = chain.samples[100:, :4].std(axis=0)
    stat_ok = np.all(np.abs(std / s - 1) <= 0.05)

    rng = np.random.default_rng(10)
    hits = sum(mh_step(np.zeros(4 * 2), 0.0, lambda v: math.log(2), cfg, rng, layout)[2] for _ in range(10 ** 5))
    rate = hits / 10 ** 5
    bern_ok = abs(rate - 0.5) <= 0.02 * 0.5
    assert record(10, stat_ok and bern_ok,
                  f"marginal std / prior std {np.round(std / s, 4).tolist()}; accept rate at ln 2: {rate:.4f}")


def _series_j(n, x):
    """Power series of J_n, summed until terms drop below 1e-40."""
    x = mpmath.mpf(x)
    q = -(x * x) / 4
    term = (x / 2) ** n / mpmath.factorial(n)
    total, m = term, 0
    while abs(term) > mpmath.mpf(10) ** -40 or m < 5:
        m += 1
        term *= q / (m * (m + n))
        total += term
    return total


def _series_y0(x):
    x = mpmath.mpf(x)
    q = x * x / 4
    term, h, tail, m = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), 0
    while True:
        m += 1
        term *= -q / (m * m)
        h += mpmath.mpf(1) / m
        tail -= h * term
        if abs(h * term) < mpmath.mpf(10) ** -40 and m > 5:
            break
    return 2 / mpmath.pi * ((mpmath.log(x / 2) + mpmath.euler) * _series_j(0, x) + tail)


def test_criterion_11_special_functions(record):
    rng = np.random.default_rng(11)
    xs = np.concatenate([[1e-6, 50.0], 10 ** rng.uniform(-6, math.log10(50), 998)])
    worst = {"J0": 0.0, "J1": 0.0, "Y0": 0.0}
    with mpmath.workdps(80):
        for x in xs:
            worst["J0"] = max(worst["J0"], abs(bessel_j0(x) - float(_series_j(0, x))))
            worst["J1"] = max(worst["J1"], abs(bessel_j1(x) - float(_series_j(1, x))))
            worst["Y0"] = max(worst["Y0"], abs(bessel_y0(x) - float(_series_y0(x))))
    ok = max(worst.values()) < 1e-10
    assert record(11, ok, "max abs err " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " on [1e-6, 50]")


def test_criterion_12_noise_statistic(record):
    cfg = make_point_config([6, 5, 7], [(0, 0)] * 3, [(2, 2), (-2, 2), (0, -2)])
    clean = synthesize(cfg, aperture_geometry("near", "S1"), wavenumber_grid(5, 10, 10))
    umax = np.max(np.abs(clean.values))
    stats = [np.mean(np.abs(add_noise(clean, 0.05, s).values - clean.values)) / umax for s in range(100)]
    target = 0.05 * math.sqrt(math.pi / 2)
    rel = abs(np.mean(stats) / target - 1)
    assert record(12, rel <= 0.1, f"mean statistic {np.mean(stats):.5f} vs {target:.5f} (rel diff {rel:.4f}, "
                                  f"per-seed range [{min(stats):.5f}, {max(stats):.5f}])")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
