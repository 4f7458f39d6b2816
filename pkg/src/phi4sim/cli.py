"""Command-line verification runner.

Subcommands reproduce the quantitative claims at desk scale and emit CSV
tables plus JSON verdict summaries.  Exit code 0 means every verdict passed,
1 flags a statistical failure, 2 a configuration error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .config import ConfigError, ExperimentConfig, default_probes
from .contraction import EnumerationTooLarge, diagram_moment_oracle
from .convolution import normalized_ray, normalized_shell_spread
from .chaos import (EXACT_NELSON_RATIOS, gaussian_chaos, hypercontractivity_check,
                    nelson_check)
from .diagrams import build_diagrams
from .dyadic import DEFAULT_PARTITION, max_block_index, block_lp_norms, \
    besov_block_profile
from .experiments import StatRequest, run_sweep
from .gaussian import NoiseSeed, STREAM_FIELD, sample_gaussian_field
from .lattice import FrequencyLattice
from .oracle import (logdiv_reference, moment_linear, moment_linear_increment,
                     moment_tree_cube, moment_wick_square_cube, renorm_c,
                     renorm_cprime)
from .reports import CommandReport
from .serialize import save_diagram_set
from .stats import corrected_z_threshold, loglog_slope, max_over_min
from .stepper import DIAGRAMS

# regularity exponent of each diagram at epsilon = 0; per-mode second moments
# decay like <w>^(-d - 2 reg)
REGULARITY = {
    "linear": -0.5,
    "square": -1.0,
    "tree": 0.5,
    "tree_lin": 0.0,
    "square_square": 0.0,
    "tree_square": -0.5,
}


def slope_target(d: int, label: str) -> float:
    return -(d + 2.0 * REGULARITY[label])


def _mode_rows(lattice: FrequencyLattice, cap: float | None):
    """Deterministic list of mode indices reported in per-mode tables."""
    freqs = lattice.frequencies
    radii = np.sqrt(np.sum(freqs.astype(np.float64) ** 2, axis=1))
    if cap is not None and lattice.size > 30_000:
        keep = radii <= cap
        freqs, radii = freqs[keep], radii[keep]
    return freqs, radii


def _composite_oracle(label, lattice, omega, cprime):
    try:
        return diagram_moment_oracle(label, lattice, omega, cprime=cprime,
                                     cap=300_000)
    except EnumerationTooLarge:
        return float("nan")


# -- subcommands ----------------------------------------------------------------


def cmd_constants(cfg: ExperimentConfig, args) -> CommandReport:
    n_list = [int(x) for x in args.n_list.split(",")]
    cp_list = [int(x) for x in args.cprime_n_list.split(",")]
    rep = CommandReport("constants",
                        ["cn-linear-divergence", "cprime-log-divergence",
                         "cprime-variant-gap"],
                        cfg.config_hash(),
                        ["n", "c", "c_over_n", "c_rate", "cprime_plain",
                         "cprime_resonant", "variant_gap", "S_diff"])
    c_vals = {}
    for n in n_list:
        lat = FrequencyLattice(cfg.d, n, cfg.norm)
        c_vals[n] = renorm_c(lat)
    for n in n_list:
        # growth rate (c(2n) - c(n))/n isolates the linear-divergence
        # constant; the raw ratio c/n carries an O(1/n) offset (~0.38/n)
        rate = (c_vals[2 * n] - c_vals[n]) / n if 2 * n in c_vals and n \
            else float("nan")
        rep.add_row(n=n, c=c_vals[n],
                    c_over_n=c_vals[n] / n if n else float("nan"),
                    c_rate=rate, cprime_plain=float("nan"),
                    cprime_resonant=float("nan"), variant_gap=float("nan"),
                    S_diff=float("nan"))
    ref = logdiv_reference(cp_list, d=cfg.d, norm=cfg.norm)
    gaps = []
    for i, n in enumerate(cp_list):
        lat = FrequencyLattice(cfg.d, n, cfg.norm)
        cp_res = renorm_cprime(lat, "resonant")
        gap = ref["S"][i] - cp_res
        gaps.append(gap)
        rep.add_row(n=n, c=c_vals.get(n, renorm_c(lat)), c_over_n=float("nan"),
                    c_rate=float("nan"), cprime_plain=ref["S"][i],
                    cprime_resonant=cp_res, variant_gap=gap,
                    S_diff=ref["diff"][i])
    big = [n for n in n_list if n >= 8 and 2 * n in c_vals]
    rates = np.array([(c_vals[2 * n] - c_vals[n]) / n for n in big])
    continuum = 1.0 / (2.0 * np.pi)
    rep.metrics["c_rates"] = {str(n): float(r) for n, r in zip(big, rates)}
    rep.metrics["c_over_n"] = {str(n): c_vals[n] / n for n in n_list if n >= 8}
    rep.verdict("c_rate_spread_le_15pct",
                len(big) >= 2 and max_over_min(rates) <= 1.15)
    rep.verdict("c_rate_near_continuum_20pct",
                bool(np.all(np.abs(rates / continuum - 1.0) <= 0.20)))
    diffs = [d for d in ref["diff"][1:] if np.isfinite(d)]
    rel_changes = [abs(diffs[i + 1] - diffs[i]) / abs(diffs[i])
                   for i in range(len(diffs) - 1)]
    rep.metrics["S_diff_rel_changes"] = rel_changes
    rep.verdict("cprime_diffs_stabilize_25pct",
                len(rel_changes) >= 1 and max(rel_changes) <= 0.25)
    tail = gaps[len(gaps) // 2:]
    rep.metrics["variant_gaps"] = gaps
    rep.verdict("variant_gap_no_growth",
                max(tail) <= 1.15 * max(gaps[: len(gaps) // 2 + 1]))
    return rep


def _moment_labels(diagram: str) -> tuple[str, ...]:
    if diagram == "all":
        return DIAGRAMS
    if diagram not in DIAGRAMS:
        raise ConfigError(f"unknown diagram {diagram!r}; choose from "
                          f"{', '.join(DIAGRAMS)} or 'all'")
    return (diagram,)


def cmd_moments(cfg: ExperimentConfig, args) -> CommandReport:
    labels = _moment_labels(args.diagram)
    rep = CommandReport("moments",
                        ["linear-covariance", "wick-square-moment",
                         "tree-moment", "composite-moment", "decay-exponent"],
                        cfg.config_hash(),
                        ["diagram", "omega", "abs_omega", "weight", "m2", "se",
                         "oracle", "oracle_step_exact", "z"])
    res = run_sweep(cfg, StatRequest(labels=labels, mean_zero=True))
    lat = res.lattice
    freqs, radii = _mode_rows(lat, cfg.fit_max)
    w2_all = 1.0 + 4.0 * np.pi**2 * radii**2
    small_oracle = cfg.d == 1 and lat.size <= 9
    from .oracle import tree_sum_feasible

    tree_ok = tree_sum_feasible(lat)
    for label in labels:
        mean, se = res.moment(label)
        tree_dt = moment_tree_cube(lat, cfg.dt) if label == "tree" and tree_ok \
            else None
        tree_cont = moment_tree_cube(lat) if label == "tree" and tree_ok else None
        square_tab = moment_wick_square_cube(lat) if label == "square" else None
        z_list = []
        for vec, r, w2 in zip(freqs, radii, w2_all):
            idx = tuple(int(x) + lat.n for x in vec)
            m, s = float(mean[idx]), float(se[idx])
            oracle = float("nan")
            oracle_dt = float("nan")
            if label == "linear":
                oracle = moment_linear(vec)
                oracle_dt = oracle
            elif label == "square":
                oracle = float(square_tab[idx])
                oracle_dt = oracle
            elif label == "tree" and tree_ok:
                oracle = float(tree_cont[idx])
                oracle_dt = float(tree_dt[idx])
            elif small_oracle:
                oracle = _composite_oracle(label, lat, vec, res.cprime)
            z = (m - (oracle_dt if np.isfinite(oracle_dt) else oracle)) / s \
                if s > 0 else float("nan")
            if np.isfinite(z):
                z_list.append(abs(z))
            rep.add_row(diagram=label, omega=tuple(vec), abs_omega=float(r),
                        weight=float(np.sqrt(w2)), m2=m, se=s, oracle=oracle,
                        oracle_step_exact=oracle_dt, z=z)
        window = (radii >= cfg.fit_min) & (radii <= cfg.fit_max)
        if np.count_nonzero(window) >= 8:
            m_win = np.array([mean[tuple(int(x) + lat.n for x in v)]
                              for v in freqs[window]])
            fit = loglog_slope(np.sqrt(w2_all[window]), m_win)
            target = slope_target(cfg.d, label)
            rep.metrics[f"slope:{label}"] = {
                "fitted": fit.slope, "target": target, "stderr": fit.stderr,
                "n_points": fit.n_points}
            rep.verdict(f"slope_ok:{label}", abs(fit.slope - target) <= 0.4)
        if z_list:
            thr = corrected_z_threshold(len(z_list), 3.0, res.accumulators[
                f"m2:{label}"].count)
            rep.metrics[f"max_z:{label}"] = max(z_list)
            rep.metrics[f"z_threshold:{label}"] = thr
            rep.verdict(f"z_ok:{label}", max(z_list) <= thr)
        if label == "square_square":
            m0, s0 = res.scalar("mean0:square_square")
            rep.metrics["mean_zero:square_square"] = {"mean": m0, "se": s0}
            allowance = 10.0 * cfg.dt * max(abs(res.cprime), 1.0)
            rep.verdict("centered:square_square", abs(m0) <= 3 * s0 + allowance)
    return rep


def cmd_time_regularity(cfg: ExperimentConfig, args) -> CommandReport:
    if not 0.0 < args.lam < 1.0:
        raise ConfigError("lambda must lie in (0, 1)")
    labels = _moment_labels(args.diagram)
    probes = cfg.probes or default_probes(cfg.d, cfg.n)
    lag_steps = tuple(int(x) for x in cfg.lag_steps)
    rep = CommandReport("time_regularity",
                        ["time-regularity-linear", "time-regularity-tree"],
                        cfg.config_hash(),
                        ["diagram", "omega", "lag", "mean_inc", "se", "exact",
                         "z", "normalized"])
    res = run_sweep(cfg, StatRequest(labels=labels, moments=False,
                                     increment_labels=labels, probes=probes,
                                     lag_steps=lag_steps))
    for label in labels:
        acc = res.accumulators[f"inc:{label}"]
        mean, se = acc.mean(), acc.stderr()
        z_all, norm_vals = [], []
        d_exp = -cfg.d - 2.0 * REGULARITY[label] + 2.0 * args.lam
        for li, lag in enumerate(sorted(set(lag_steps))):
            tau = lag * cfg.dt
            for pi, probe in enumerate(probes):
                m, s = float(mean[li, pi]), float(se[li, pi])
                w2 = 1.0 + 4.0 * np.pi**2 * sum(x * x for x in probe)
                exact = moment_linear_increment(probe, tau) \
                    if label == "linear" else float("nan")
                z = (m - exact) / s if np.isfinite(exact) and s > 0 else float("nan")
                if np.isfinite(z):
                    z_all.append(abs(z))
                norm = m / (tau**args.lam * w2 ** (d_exp / 2.0))
                norm_vals.append(norm)
                rep.add_row(diagram=label, omega=probe, lag=lag, mean_inc=m,
                            se=s, exact=exact, z=z, normalized=norm)
        if z_all:
            thr = corrected_z_threshold(len(z_all), 3.0, acc.count)
            rep.metrics[f"max_z:{label}"] = max(z_all)
            rep.verdict(f"z_ok:{label}", max(z_all) <= thr)
        spread = max_over_min(np.asarray(norm_vals))
        rep.metrics[f"normalized_spread:{label}"] = spread
        if label != "linear":
            rep.verdict(f"bounded:{label}", spread <= args.ratio_cap)
    return rep


def cmd_besov(cfg: ExperimentConfig, args) -> CommandReport:
    label = args.diagram
    if label not in DIAGRAMS:
        raise ConfigError(f"unknown diagram {label!r}")
    bound = REGULARITY[label] - cfg.d / args.p
    if args.beta >= bound:
        raise ConfigError(
            f"beta = {args.beta} violates beta < regularity - d/p = {bound:.4f}")
    n_list = [int(x) for x in args.n_list.split(",")]
    rep = CommandReport("besov", ["besov-moment-stability"], cfg.config_hash(),
                        ["n", "p", "beta", "mean_norm_p", "se", "replicas"])
    means, rel_ses = [], []
    for n in n_list:
        sub = cfg.replaced(n=n)
        res = run_sweep(sub, StatRequest(labels=(label,), moments=False,
                                         besov=(args.p, args.beta)))
        m, s = res.scalar("besov")
        means.append(m)
        rel_ses.append(s / m if m > 0 else float("inf"))
        rep.add_row(n=n, p=args.p, beta=args.beta, mean_norm_p=m, se=s,
                    replicas=sub.replicas)
    spread = max_over_min(np.asarray(means))
    # high-p norm moments are heavy-tailed; allow the sampling noise of the
    # two estimates entering the ratio on top of the stability tolerance
    noise = 3.0 * np.sqrt(2.0) * max(rel_ses)
    rep.metrics["spread"] = spread
    rep.metrics["noise_allowance"] = noise
    rep.verdict("stable_across_n", spread <= (1.0 + args.tolerance) * (1.0 + noise))
    return rep


def cmd_lemmas(cfg: ExperimentConfig, args) -> CommandReport:
    which = args.which
    lat = FrequencyLattice(cfg.d, cfg.n, cfg.norm)
    if which == "partition":
        rep = CommandReport("lemmas_partition", ["partition-unity"],
                            cfg.config_hash(), ["quantity", "value"])
        kmax = max_block_index(lat)
        radii = np.linspace(0.0, 2.0 ** (kmax + 2), 10_000)
        resid = np.abs(DEFAULT_PARTITION.partition_sum(radii, kmax + 4) - 1.0)
        rep.add_row(quantity="max_partition_residual", value=float(resid.max()))
        rep.verdict("partition_residual_le_1e12", float(resid.max()) <= 1e-12)
        return rep
    if which == "bernstein":
        rep = CommandReport("lemmas_bernstein", ["bernstein"], cfg.config_hash(),
                            ["p", "k", "mean_ratio"])
        seed = NoiseSeed(cfg.seed)
        reps = min(cfg.replicas, 200)
        kmax = max_block_index(lat)
        ratios = {p: np.zeros(kmax + 1) for p in (2, 4)}
        for r in range(reps):
            rng = seed.generator(STREAM_FIELD, r, 0)
            f = sample_gaussian_field(lat, -0.5, rng)
            sup = besov_block_profile(f, cfg.oversample)[1:]
            for p in (2, 4):
                lp = block_lp_norms(f, p, cfg.oversample)[1:]
                k = np.arange(kmax + 1)
                ratios[p] += sup / (2.0 ** (cfg.d * k / p) * lp) / reps
        ok = True
        for p in (2, 4):
            for k in range(kmax + 1):
                rep.add_row(p=p, k=k, mean_ratio=float(ratios[p][k]))
            fit = loglog_slope(2.0 ** np.arange(kmax + 1), ratios[p])
            rep.metrics[f"trend_slope_p{p}"] = fit.slope
            ok &= fit.slope <= 0.05
        rep.verdict("bernstein_constant_no_growth", ok)
        return rep
    if which == "conv":
        rep = CommandReport("lemmas_conv", ["conv-lemma"], cfg.config_hash(),
                            ["abs_omega", "normalized"])
        cap = min(cfg.fit_max, float(cfg.n))
        ray = normalized_ray(lat, 2.0, 2.0, cfg.d - 4.0, range(1, int(cap) + 1))
        for r, v in zip(range(1, int(cap) + 1), ray):
            rep.add_row(abs_omega=r, normalized=float(v))
        mx, mn = normalized_shell_spread(lat, 2.0, 2.0, cfg.d - 4.0, cap)
        rep.metrics["spread"] = mx / mn
        rep.verdict("conv_22_ratio_le_10", mx / mn <= 10.0)
        return rep
    if which == "resonant-conv":
        rep = CommandReport("lemmas_resonant_conv", ["resonant-conv-lemma"],
                            cfg.config_hash(),
                            ["abs_omega", "resonant_normalized",
                             "plain_normalized"])
        cap = min(cfg.fit_max, float(cfg.n))
        radii = range(1, int(cap) + 1)
        decay = cfg.d - 6.0
        res_ray = normalized_ray(lat, 4.0, 2.0, decay, radii, resonant=True)
        plain_ray = normalized_ray(lat, 4.0, 2.0, decay, radii)
        for r, a, b in zip(radii, res_ray, plain_ray):
            rep.add_row(abs_omega=r, resonant_normalized=float(a),
                        plain_normalized=float(b))
        # modes below ~16/3 sit in the finitely-many-terms regime of the
        # restricted bound; the decay normalization applies past it
        mx, mn = normalized_shell_spread(lat, 4.0, 2.0, decay, cap,
                                         resonant=True)
        window = res_ray[3:]
        rep.metrics["resonant_window_spread"] = float(np.max(window) / np.min(window))
        rep.verdict("resonant_42_bounded",
                    float(np.max(window) / np.min(window)) <= 10.0
                    and res_ray[-1] <= 1.5 * res_ray[1])
        i2, i16 = 1, min(15, len(plain_ray) - 1)
        seg = plain_ray[i2: i16 + 1]
        rep.metrics["plain_growth"] = float(seg[-1] / seg[0])
        rep.verdict("plain_42_grows_2x_monotone",
                    bool(np.all(np.diff(seg) > 0)) and seg[-1] / seg[0] >= 2.0)
        return rep
    raise ConfigError(f"unknown lemma check {which!r}")


def cmd_chaos(cfg: ExperimentConfig, args) -> CommandReport:
    seed = NoiseSeed(cfg.seed)
    reps = max(cfg.replicas, 10_000)
    if args.which == "nelson":
        rep = CommandReport("chaos_nelson", ["nelson"], cfg.config_hash(),
                            ["variable", "order", "p", "ratio", "ci_low",
                             "ci_high", "bound", "exact"])
        ok, ok_exact = True, True
        for order in (1, 2, 3):
            var = gaussian_chaos(order)
            for p in (4, 6):
                r = nelson_check(var, p, reps, seed, replica=order * 10 + p,
                                 confidence=cfg.confidence)
                exact = EXACT_NELSON_RATIOS[(order, p)]
                rep.add_row(variable=r.variable, order=order, p=p, ratio=r.ratio,
                            ci_low=r.ci_low, ci_high=r.ci_high, bound=r.bound,
                            exact=exact)
                ok &= not r.violated
                se = (r.ci_high - r.ci_low) / 3.92
                if order == 1 and p == 4:
                    ok_exact = abs(r.ratio - exact) <= 3.0 * max(se, 1e-12)
        rep.verdict("nelson_bounds_hold", ok)
        rep.verdict("gaussian_p4_matches_exact", ok_exact)
        return rep
    if args.which == "hypercontractivity":
        rep = CommandReport("chaos_hyper", ["hypercontractivity"],
                            cfg.config_hash(),
                            ["variable", "order", "t", "p", "q", "lhs", "rhs",
                             "lhs_ci_high", "rhs_ci_low"])
        ok = True
        cases = [(1, float(np.log(np.sqrt(2.0))), 2.0), (2, 0.5, 2.0),
                 (3, 0.3, 2.5)]
        for order, t, p in cases:
            r = hypercontractivity_check(gaussian_chaos(order), t, p, reps,
                                         seed, replica=order,
                                         confidence=cfg.confidence)
            rep.add_row(variable=r.variable, order=order, t=t, p=p, q=r.q,
                        lhs=r.lhs, rhs=r.rhs, lhs_ci_high=r.lhs_ci[1],
                        rhs_ci_low=r.rhs_ci[0])
            ok &= not r.violated
        rep.verdict("hypercontractivity_holds", ok)
        return rep
    raise ConfigError(f"unknown chaos check {args.which!r}")


def cmd_dump(cfg: ExperimentConfig, args) -> CommandReport:
    lat = FrequencyLattice(cfg.d, cfg.n, cfg.norm)
    seed = NoiseSeed(cfg.seed)
    total = cfg.burn_in + args.nodes * cfg.dt
    times = np.arange(0.0, total + cfg.dt / 2, cfg.dt)
    ds = build_diagrams(lat, times, seed, burn_in=cfg.burn_in,
                        cprime_variant=cfg.cprime_variant)
    import os

    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "diagrams.bin")
    save_diagram_set(path, ds)
    rep = CommandReport("dump_diagrams", ["determinism"], cfg.config_hash(),
                        ["quantity", "value"])
    rep.add_row(quantity="path", value=path)
    rep.add_row(quantity="nodes", value=len(ds.times))
    rep.add_row(quantity="c", value=ds.c)
    rep.add_row(quantity="cprime", value=ds.cprime)
    rep.verdict("dump_written", True)
    return rep


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="phi4sim",
        description="construct and statistically verify the renormalized "
                    "diagram processes of the dynamic phi^4 model")
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--seed", type=int, help="override master seed")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--threads", type=int, help="worker pool size")
    ap.add_argument("--format", choices=("csv", "json"), dest="fmt")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="renormalization constants and rates")
    p.add_argument("--n-list", default="0,1,2,4,8,16,32,64")
    p.add_argument("--cprime-n-list", default="0,1,2,4,8,16,32")

    p = sub.add_parser("moments", help="per-mode second moments vs oracles")
    p.add_argument("--diagram", default="all")

    p = sub.add_parser("time-regularity", help="increment moment scaling")
    p.add_argument("--diagram", default="linear")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--ratio-cap", type=float, default=20.0)

    p = sub.add_parser("besov", help="Besov-norm moment stability in n")
    p.add_argument("--diagram", default="linear")
    p.add_argument("--p", type=float, default=8.0)
    p.add_argument("--beta", type=float, default=-0.9)
    p.add_argument("--n-list", default="8,16,32")
    p.add_argument("--tolerance", type=float, default=0.25)

    p = sub.add_parser("lemmas", help="deterministic lemma checks")
    p.add_argument("--which", required=True,
                   choices=("conv", "resonant-conv", "bernstein", "partition"))

    p = sub.add_parser("chaos", help="chaos moment inequalities")
    p.add_argument("--which", required=True,
                   choices=("nelson", "hypercontractivity"))

    p = sub.add_parser("dump-diagrams", help="serialize one diagram set")
    p.add_argument("--nodes", type=int, default=4)
    return ap


COMMANDS = {
    "constants": cmd_constants,
    "moments": cmd_moments,
    "time-regularity": cmd_time_regularity,
    "besov": cmd_besov,
    "lemmas": cmd_lemmas,
    "chaos": cmd_chaos,
    "dump-diagrams": cmd_dump,
}


def load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_text(fh.read())
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for field in ("seed", "out", "threads", "fmt"):
        val = getattr(args, field, None)
        if val is not None:
            overrides[field] = val
    return cfg.replaced(**overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        t0 = time.perf_counter()
        report = COMMANDS[args.command](cfg, args)
        runtime = time.perf_counter() - t0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    base = report.write(cfg.out, cfg.fmt, runtime=runtime)
    for name, ok in report.verdicts.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {report.name}: {name}")
    print(f"report written to {base}.*")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
