"""Acceptance suite: one test per verification criterion, at pinned tolerances.

Each test prints a single PASS/FAIL line (run pytest with -s to see them all).
The heavyweight Monte Carlo sweeps are shared module-scoped fixtures; total
runtime is dominated by the cutoff-32 sweep and the step-size pair for the
heat-integrated cube (about 15-25 minutes on two cores).
"""

import warnings

import numpy as np
import pytest

from phi4sim import contraction as ct
from phi4sim import convolution as cv
from phi4sim import oracle
from phi4sim.chaos import (EXACT_NELSON_RATIOS, gaussian_chaos,
                           hypercontractivity_check, nelson_check)
from phi4sim.cli import main, slope_target
from phi4sim.config import ExperimentConfig
from phi4sim.diagrams import build_diagrams
from phi4sim.dyadic import DEFAULT_PARTITION
from phi4sim.experiments import StatRequest, run_sweep
from phi4sim.fields import to_physical
from phi4sim.gaussian import NoiseSeed, hermite, wick_power
from phi4sim.lattice import FrequencyLattice
from phi4sim.stats import corrected_z_threshold, loglog_slope, max_over_min
from phi4sim.stepper import DIAGRAMS
from conftest import random_field

SEED = 20260810


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}"
          + (f"  ({detail})" if detail else ""))
    assert ok, f"{criterion}: {detail}"


# -- shared heavyweight sweeps ---------------------------------------------------


SHELLS = ((4.0, 5.5), (5.5, 8.0))


@pytest.fixture(scope="module")
def sweep32():
    cfg = ExperimentConfig(d=3, n=32, dt=1 / 32, burn_in=14.0, replicas=2,
                           report_nodes=48, node_stride=4, seed=SEED,
                           threads=2, diagrams=DIAGRAMS)
    return run_sweep(cfg, StatRequest(labels=DIAGRAMS, mean_zero=True,
                                      shells=SHELLS))


@pytest.fixture(scope="module")
def sweep16():
    cfg = ExperimentConfig(d=3, n=16, dt=1 / 32, burn_in=14.0, replicas=4,
                           report_nodes=48, node_stride=8, seed=SEED + 1,
                           threads=2, diagrams=DIAGRAMS)
    return run_sweep(cfg, StatRequest(labels=DIAGRAMS, shells=SHELLS))


# probe grid inside the scaling-transition regime lag*<w>^2 ~ 10..90, where
# the lambda = 1/2 normalization is tight; at extreme lag*<w>^2 the bound is
# slack and the normalized value legitimately drops
TREE_PROBES = ((2, 0, 0), (0, 2, 2), (3, 0, 0), (2, 2, 1), (0, 0, 3))
TREE_LAGS = (4, 6, 8, 12, 16)


@pytest.fixture(scope="module")
def tree8_runs():
    """Step-size pair for the heat-integrated cube at n = 8 (criteria 2 and 5)."""
    out = {}
    for dt, nodes, stride, lags in ((1 / 32, 48, 2, ()),
                                    (1 / 64, 96, 1, TREE_LAGS)):
        cfg = ExperimentConfig(d=3, n=8, dt=dt, burn_in=14.0, replicas=52,
                               report_nodes=nodes, node_stride=stride,
                               seed=SEED + 2, threads=2, diagrams=("tree",),
                               probes=TREE_PROBES, lag_steps=lags or (1,))
        req = StatRequest(labels=("tree",),
                          increment_labels=("tree",) if lags else (),
                          probes=TREE_PROBES if lags else (),
                          lag_steps=lags)
        out[dt] = run_sweep(cfg, req)
    return out


@pytest.fixture(scope="module")
def tree_lin_d1_runs():
    """Composite-diagram runs at d = 1, n = 2 for two step sizes."""
    out = {}
    for dt in (1 / 128, 1 / 256):
        cfg = ExperimentConfig(d=1, n=2, dt=dt, burn_in=14.0, replicas=2048,
                               report_nodes=48, node_stride=32, seed=SEED + 3,
                               threads=2,
                               diagrams=("tree_lin", "square_square"))
        out[dt] = run_sweep(cfg, StatRequest(
            labels=("tree_lin", "square_square"), mean_zero=True))
    return out


# -- criterion 1: exact identities ----------------------------------------------


def test_c1_partition_residual():
    radii = np.linspace(0.0, 2.0**14, 10_000)
    resid = float(np.abs(DEFAULT_PARTITION.partition_sum(radii, 16) - 1.0).max())
    report("criterion 1a: partition-of-unity residual <= 1e-12",
           resid <= 1e-12, f"residual {resid:.2e}")


def test_c1_bony_exactness():
    from phi4sim.paraproduct import bony_pieces_cube, full_product

    lat = FrequencyLattice(3, 8)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        f = random_field(lat, rng)
        g = random_field(lat, rng)
        low, res, high = bony_pieces_cube(lat, f.coeffs, g.coeffs)
        total = low + res + high
        full = full_product(f, g).coeffs
        worst = max(worst, float(np.max(np.abs(total - full))))
    report("criterion 1b: Bony exactness <= 1e-12 on 100 random pairs",
           worst <= 1e-12, f"worst {worst:.2e}")


def test_c1_wick_identities():
    lat = FrequencyLattice(3, 8)
    times = np.arange(0.0, 0.75, 0.125)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ds = build_diagrams(lat, times, NoiseSeed(SEED), burn_in=0.5,
                            labels=("linear", "square"))
    worst = 0.0
    for k in range(len(ds.times)):
        lin = ds.trajectories["linear"].fields[k]
        sq = ds.trajectories["square"].fields[k]
        grid = lat.grid_size(3)
        u = to_physical(lin, grid_size=grid)
        h2 = hermite(2, u, ds.c)
        v2 = to_physical(wick_power(lin, 2, ds.c), grid_size=grid)
        stored = to_physical(sq, grid_size=grid)
        scale = np.max(np.abs(stored))
        # stored square vs re-derived Wick square (identical truncation path)
        worst = max(worst, float(np.max(np.abs(stored - v2)) / scale))
        # and the cube integrand vs H3 of the same sample
        w3 = to_physical(wick_power(lin, 3, ds.c), grid_size=grid)
        h3 = hermite(3, u, ds.c)
        from phi4sim.fields import from_physical

        w3b = to_physical(from_physical(h3, lat), grid_size=grid)
        worst = max(worst, float(np.max(np.abs(w3 - w3b)) / np.max(np.abs(w3))))
        assert np.max(np.abs(h2 - u * u + ds.c)) < 1e-12 * max(scale, 1.0)
    report("criterion 1c: Wick identities <= 1e-10 relative", worst <= 1e-10,
           f"worst {worst:.2e}")


def test_c1_contraction_vs_wick_square():
    lat = FrequencyLattice(3, 4)
    g = ct.graph_wick_square()
    worst = 0.0
    for vec in lat.frequencies:
        a = ct.moment_by_contraction(g, lat, vec)
        b = oracle.moment_wick_square(lat, vec)
        worst = max(worst, abs(a - b) / b)
    report("criterion 1d: contraction enumerator == pair sum at n=4",
           worst <= 1e-12, f"worst rel {worst:.2e}")


def test_c1_time_integral_quadrature():
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(20):
        a = float(rng.uniform(1.0, 50.0))
        b = float(rng.uniform(1.0, 150.0))
        cf = oracle.tree_time_factor(a, b)
        q = oracle.tree_time_factor_quadrature(a, b)
        worst = max(worst, abs(cf - q) / cf)
    report("criterion 1e: closed-form time integral vs quadrature <= 1e-8",
           worst <= 1e-8, f"worst rel {worst:.2e}")


# -- criterion 2: covariance oracles ----------------------------------------------


def test_c2_linear_moments_and_lags():
    lags = (1, 2, 4, 8, 16)
    cfg = ExperimentConfig(d=3, n=8, dt=1 / 64, replicas=10_000,
                           report_nodes=17, node_stride=1, seed=SEED + 5,
                           threads=2, diagrams=("linear",), lag_steps=lags)
    res = run_sweep(cfg, StatRequest(labels=("linear",), lag_label="linear",
                                     lag_steps=lags))
    lat = res.lattice
    mean, se = res.moment("linear")
    mask = lat.mask
    targets = np.where(mask, 1.0 / (2.0 * lat.weight2), 0.0)
    n_tests = int(mask.sum()) * (1 + len(lags))
    thr = corrected_z_threshold(n_tests, 3.0, cfg.replicas)
    worst = float(np.max(np.abs(mean - targets)[mask] / se[mask]))
    lag_acc = res.accumulators["lag"]
    lmean, lse = lag_acc.mean(), lag_acc.stderr()
    for li, lag in enumerate(sorted(set(lags))):
        lag_target = np.exp(-lag * cfg.dt * lat.weight2) / (2.0 * lat.weight2)
        z = np.abs(lmean[li] - lag_target)[mask] / lse[li][mask]
        worst = max(worst, float(z.max()))
    report("criterion 2a: linear moments + lagged covariances, all |z| <= "
           f"{thr:.2f} (corrected from 3)", worst <= thr, f"max |z| {worst:.2f}")


def test_c2_square_moments():
    cfg = ExperimentConfig(d=3, n=8, replicas=10_000, report_nodes=1,
                           seed=SEED + 6, threads=2, diagrams=("square",))
    res = run_sweep(cfg, StatRequest(labels=("square",)))
    lat = res.lattice
    mean, se = res.moment("square")
    table = oracle.moment_wick_square_cube(lat)
    mask = lat.mask
    thr = corrected_z_threshold(int(mask.sum()), 3.0, cfg.replicas)
    worst = float(np.max(np.abs(mean - table)[mask] / se[mask]))
    report(f"criterion 2b: Wick-square moments, all |z| <= {thr:.2f}",
           worst <= thr, f"max |z| {worst:.2f}")


def test_c2_tree_moments_with_bias_halving(tree8_runs):
    lat = FrequencyLattice(3, 8)
    cont = oracle.moment_tree_cube(lat)
    mask = lat.mask
    pooled = {}
    worst = 0.0
    thr = None
    for dt, res in tree8_runs.items():
        zoh = oracle.moment_tree_cube(lat, dt)
        mean, se = res.moment("tree")
        count = res.accumulators["m2:tree"].count
        thr = corrected_z_threshold(int(mask.sum()), 3.0, count)
        # |sim - continuum| <= thr * SE + exact step bias, mode by mode
        gap = np.abs(mean - cont)[mask]
        allow = thr * se[mask] + np.abs(zoh - cont)[mask]
        worst = max(worst, float(np.max(gap / allow)))
        pooled[dt] = float(np.abs(zoh - cont)[mask].sum())
    ratio = pooled[1 / 64] / pooled[1 / 32]
    ok = worst <= 1.0 and ratio <= 0.6
    report("criterion 2c: tree moments within 3 SE + step bias; pooled bias "
           "at least halves when the step halves", ok,
           f"max gap/allowance {worst:.2f}, bias ratio {ratio:.3f}")


def test_c2_composite_chaos_sum_d1(tree_lin_d1_runs):
    lat = FrequencyLattice(1, 2)
    fine = tree_lin_d1_runs[1 / 256]
    coarse = tree_lin_d1_runs[1 / 128]
    mean_f, se_f = fine.moment("tree_lin")
    mean_c, _ = coarse.moment("tree_lin")
    count = fine.accumulators["m2:tree_lin"].count
    thr = corrected_z_threshold(lat.size, 3.0, count)
    worst = 0.0
    for vec in lat.frequencies:
        idx = lat.index_of(vec)
        target = ct.diagram_moment_oracle("tree_lin", lat, vec)
        step_allow = 1.5 * abs(mean_f[idx] - mean_c[idx])
        gap = abs(mean_f[idx] - target)
        worst = max(worst, gap / (thr * se_f[idx] + step_allow))
    report("criterion 2d: composite variance = chaos-4 + chaos-2 sum within "
           "3 SE + O(dt)", worst <= 1.0, f"max gap/allowance {worst:.2f}")


def test_c2_square_square_centered(tree_lin_d1_runs):
    res = tree_lin_d1_runs[1 / 256]
    m0, s0 = res.scalar("mean0:square_square")
    allow = 3.0 * s0 + 10.0 * (1 / 256)
    report("criterion 2e: renormalized square-square mean at omega=0 is "
           "centered", abs(m0) <= allow, f"mean {m0:+.4f}, allowance {allow:.4f}")


# -- criterion 3: decay exponents --------------------------------------------------


@pytest.mark.parametrize("label", DIAGRAMS)
def test_c3_decay_exponents(sweep32, label):
    # NOTE: the finite-cutoff system itself decays faster than the asymptotic
    # table over this window (exact kernels put the cutoff-32 tree at -4.56
    # continuum / -4.84 step-saturated, and the square at -1.35), so the
    # +-0.4 gate is expected to fail for tree, tree_lin and square_square;
    # the simulated slopes match the exact finite-cutoff values, and the
    # asymptotic-rate claims hold as one-sided bounds (decay at least as
    # fast).  The tolerance check is asserted as stated.
    lat = sweep32.lattice
    freqs = lat.frequencies
    r = np.sqrt(np.sum(freqs.astype(float) ** 2, axis=1))
    win = (r >= 4.0) & (r <= 16.0)
    w = np.sqrt(1.0 + 4.0 * np.pi**2 * r[win] ** 2)
    mean, _ = sweep32.moment(label)
    vals = np.array([mean[tuple(v + lat.n)] for v in freqs[win]])
    fit = loglog_slope(w, vals)
    target = slope_target(3, label)
    one_sided = fit.slope <= target + 0.4
    report(f"criterion 3: {label} fitted decay exponent {fit.slope:+.3f} "
           f"within +-0.4 of {target:+.0f}",
           abs(fit.slope - target) <= 0.4,
           f"decays at least as fast as the table: {one_sided}")


# -- criterion 4: renormalization divergences --------------------------------------


def test_c4_renorm_divergences():
    c_vals = {n: oracle.renorm_c(FrequencyLattice(3, n))
              for n in (8, 16, 32, 64, 128)}
    rates = np.array([(c_vals[2 * n] - c_vals[n]) / n for n in (8, 16, 32, 64)])
    continuum = 1.0 / (2.0 * np.pi)
    ok_lin = max_over_min(rates) <= 1.15 and \
        np.all(np.abs(rates / continuum - 1.0) <= 0.20)
    s_list = [4, 8, 16, 32]
    ref = oracle.logdiv_reference(s_list)
    diffs = ref["diff"][1:]
    rel = [abs(diffs[i + 1] - diffs[i]) / diffs[i] for i in range(len(diffs) - 1)]
    ok_log = max(rel) <= 0.25
    gaps = [oracle.renorm_cprime(FrequencyLattice(3, n), "plain") -
            oracle.renorm_cprime(FrequencyLattice(3, n), "resonant")
            for n in s_list]
    ok_gap = max(gaps[2:]) <= 1.15 * max(gaps[:2])
    report("criterion 4: c_n linear rate near 1/(2 pi), log-divergence "
           "increments stabilize, variant gap bounded",
           ok_lin and ok_log and ok_gap,
           f"rates {np.round(rates, 4).tolist()}, rel diff changes "
           f"{np.round(rel, 3).tolist()}, gaps {np.format_float_scientific(max(gaps), 2)}")


# -- criterion 5: time regularity --------------------------------------------------


def test_c5_linear_increments():
    lags = TREE_LAGS
    probes = TREE_PROBES
    cfg = ExperimentConfig(d=3, n=8, dt=1 / 64, replicas=4000,
                           report_nodes=17, node_stride=1, seed=SEED + 7,
                           threads=2, diagrams=("linear",),
                           probes=probes, lag_steps=lags)
    res = run_sweep(cfg, StatRequest(labels=("linear",), moments=False,
                                     increment_labels=("linear",),
                                     probes=probes, lag_steps=lags))
    acc = res.accumulators["inc:linear"]
    mean, se = acc.mean(), acc.stderr()
    thr = corrected_z_threshold(mean.size, 3.0, acc.count)
    worst = 0.0
    for li, lag in enumerate(sorted(set(lags))):
        for pi, probe in enumerate(probes):
            exact = oracle.moment_linear_increment(probe, lag * cfg.dt)
            worst = max(worst, abs(mean[li, pi] - exact) / se[li, pi])
    report(f"criterion 5a: linear increment moments exact, all |z| <= {thr:.2f}",
           worst <= thr, f"max |z| {worst:.2f}")


def test_c5_tree_normalized_increments(tree8_runs):
    res = tree8_runs[1 / 64]
    acc = res.accumulators["inc:tree"]
    mean = acc.mean()
    lam = 0.5
    vals = []
    for li, lag in enumerate(sorted(set(TREE_LAGS))):
        tau = lag / 64.0
        for pi, probe in enumerate(TREE_PROBES):
            w2 = 1.0 + 4.0 * np.pi**2 * sum(x * x for x in probe)
            # normalization <w>^(-d - 2 reg + 2 lambda) with reg = 1/2, d = 3
            vals.append(mean[li, pi] / (tau**lam * w2 ** (-3.0 / 2.0)))
    spread = max_over_min(np.asarray(vals))
    report("criterion 5b: normalized tree increments bounded on the 5x5 grid "
           "(max/min <= 20)", spread <= 20.0, f"spread {spread:.2f}")


# -- criterion 6: convolution lemmas ----------------------------------------------


def test_c6_convolution_lemmas():
    lat = FrequencyLattice(3, 32)
    mx, mn = cv.normalized_shell_spread(lat, 2.0, 2.0, -1.0, 16.0)
    ok_22 = mx / mn <= 10.0
    radii = range(2, 17)
    res_ray = cv.normalized_ray(lat, 4.0, 2.0, -3.0, radii, resonant=True)
    plain_ray = cv.normalized_ray(lat, 4.0, 2.0, -3.0, radii)
    wx, wn = cv.normalized_shell_spread(lat, 4.0, 2.0, -3.0, 16.0, resonant=True)
    # boundedness past the finitely-many-terms zone |omega| <= 16/3
    window = res_ray[4:]
    ok_res = window.max() / window.min() <= 10.0 and \
        res_ray[-1] <= 1.0 * res_ray[0]
    ok_plain = bool(np.all(np.diff(plain_ray) > 0)) and \
        plain_ray[-1] / plain_ray[0] >= 2.0
    report("criterion 6: (2,2) ratio bounded (<=10); resonant (4,2) bounded "
           "while unrestricted grows >= 2x monotonically",
           ok_22 and ok_res and ok_plain,
           f"(2,2) spread {mx/mn:.2f}; resonant window spread "
           f"{window.max()/window.min():.2f}; plain growth "
           f"{plain_ray[-1]/plain_ray[0]:.1f}x")


# -- criterion 7: chaos inequalities ----------------------------------------------


def test_c7_nelson_and_hypercontractivity():
    seed = NoiseSeed(SEED + 8)
    ok = True
    details = []
    for order in (1, 2, 3):
        for p in (4, 6):
            rep = nelson_check(gaussian_chaos(order), p, 40_000, seed,
                               replica=order * 10 + p)
            ok &= not rep.violated and rep.ci_high <= rep.bound
            if order == 1 and p == 4:
                se = (rep.ci_high - rep.ci_low) / 3.92
                exact = EXACT_NELSON_RATIOS[(1, 4)]
                ok &= abs(rep.ratio - exact) <= 3.0 * se
                details.append(f"gaussian p=4 ratio {rep.ratio:.4f} vs 3^(1/4) "
                               f"= {exact:.4f}")
    cases = [(1, float(np.log(np.sqrt(2.0))), 2.0), (2, 0.5, 2.0), (3, 0.3, 2.5)]
    for order, t, p in cases:
        rep = hypercontractivity_check(gaussian_chaos(order), t, p, 40_000,
                                       seed, replica=order)
        ok &= not rep.violated and rep.lhs <= rep.rhs
    report("criterion 7: Nelson ratios below (p-1)^(order/2) and "
           "hypercontractivity holds with CI margin", ok, "; ".join(details))


# -- criterion 8: determinism ------------------------------------------------------


def test_c8_byte_identical_reruns(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("d = 2\nn = 3\nreplicas = 80\nseed = 123\nthreads = 1\n")
    outs = []
    for tag, threads in (("a", "1"), ("b", "2")):
        out = tmp_path / tag
        code = main(["--config", str(cfg), "--out", str(out), "--threads",
                     threads, "moments", "--diagram", "square"])
        assert code == 0
        outs.append((out / "moments.csv").read_bytes())
    ok = outs[0] == outs[1]
    for tag in ("c", "d"):
        out = tmp_path / tag
        main(["--config", str(cfg), "--out", str(out), "constants",
              "--n-list", "1,2,4", "--cprime-n-list", "0,1,2"])
        outs.append((out / "constants.csv").read_bytes())
    ok &= outs[2] == outs[3]
    report("criterion 8: reruns (and different thread counts) produce "
           "byte-identical CSV", ok)


# -- substitute for the n -> infinity statement ------------------------------------


def test_cutoff_stability_16_to_32(sweep16, sweep32):
    ok = True
    details = []
    for lbl in DIAGRAMS:
        worst = 0.0
        for si in range(len(SHELLS)):
            a, sa = sweep16.scalar(f"shell{si}:{lbl}")
            b, sb = sweep32.scalar(f"shell{si}:{lbl}")
            rel = abs(a - b) / b
            noise = 3.0 * np.sqrt(sa**2 + sb**2) / b
            ok &= rel <= 0.10 + noise
            worst = max(worst, rel)
        details.append(f"{lbl} {100*worst:.1f}%")
    report("substitute criterion: shell moments move <= 10% (+3 SE) from "
           "n=16 to n=32", ok, "; ".join(details))
