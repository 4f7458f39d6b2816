"""Monte Carlo experiment engine: replica scheduling, streaming statistics,
and the estimators behind every CLI subcommand.

Replicas are processed in fixed-size chunks (size set by the config, never by
the worker count) and chunk results are merged in chunk order, so outputs are
bit-identical for any --threads value.  Diagrams without a heat integration
are sampled at a single stationary time (zero bias); integrated diagrams run
trajectories with burn-in and average over reporting nodes, with trajectory
means as the iid unit for standard errors.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .dyadic import besov_grid_size
from .fields import cube_to_grid
from .gaussian import NoiseSeed
from .lattice import FrequencyLattice
from .oracle import renorm_c, renorm_cprime
from .stats import MomentAccumulator
from .stepper import DiagramStepper, INTEGRATED, burn_in_steps

_ZERO_LABELS_NO_BURN = ("linear", "square")


@dataclass(frozen=True)
class StatRequest:
    """What a replica sweep should accumulate."""

    labels: tuple[str, ...]
    moments: bool = True
    lag_label: str | None = None          # full-cube lagged covariances
    increment_labels: tuple[str, ...] = ()  # probe-mode increment moments
    probes: tuple[tuple[int, ...], ...] = ()
    lag_steps: tuple[int, ...] = ()
    besov: tuple[float, float] | None = None  # (p, beta) norm moments
    mean_zero: bool = False               # track mean of the zero coefficient
    # radial shells (lo, hi): per-trajectory shell means of |coeff|^2, so the
    # standard error honestly reflects cross-mode correlation within a path
    shells: tuple[tuple[float, float], ...] = ()

    def needs_nodes(self) -> int:
        if self.lag_label or self.increment_labels:
            return max(self.lag_steps) + 1
        return 1


def needs_integrator(labels) -> bool:
    return any(lbl in INTEGRATED or lbl == "isquare" for lbl in labels)


def plan_constants(cfg: ExperimentConfig):
    lattice = FrequencyLattice(cfg.d, cfg.n, cfg.norm)
    c = renorm_c(lattice)
    cprime = renorm_cprime(lattice, cfg.cprime_variant)
    return lattice, c, cprime


def _chunk_ranges(replicas: int, chunk: int):
    out = []
    start = 0
    while start < replicas:
        out.append((start, min(chunk, replicas - start)))
        start += chunk
    return out


def _probe_flat(lattice: FrequencyLattice, probes) -> np.ndarray:
    idx = []
    for p in probes:
        idx.append(np.ravel_multi_index(lattice.index_of(p), lattice.shape))
    return np.asarray(idx, dtype=np.int64)


def _run_chunk(payload) -> dict:
    """One replica chunk; returns plain arrays so results pickle cheaply."""
    (cfg_text, request, c, cprime, replica0, count) = payload
    cfg = ExperimentConfig.from_text(cfg_text)
    lattice = FrequencyLattice(cfg.d, cfg.n, cfg.norm)
    seed = NoiseSeed(cfg.seed)
    integrate = needs_integrator(request.labels)
    stepper = DiagramStepper(lattice, cfg.dt, c, cprime, seed,
                             replica0=replica0, batch=count,
                             integrate=integrate)
    if integrate:
        stepper.run_burn_in(burn_in_steps(cfg.burn_in, cfg.dt))
    stride = cfg.node_stride
    lag_nodes = sorted(set(request.lag_steps)) if \
        (request.lag_label or request.increment_labels) else []
    if any(lag % stride for lag in lag_nodes):
        raise ValueError("lag steps must be multiples of node_stride")
    backs = [lag // stride for lag in lag_nodes]
    n_nodes = max(cfg.report_nodes, (max(backs) + 1) if backs else 1)
    ring_len = (max(backs) + 1) if backs else 1
    probe_idx = _probe_flat(lattice, request.probes) if request.probes else None
    ring_labels = set(request.increment_labels)
    if request.lag_label:
        ring_labels.add(request.lag_label)

    shape = lattice.shape
    zero_flat = np.ravel_multi_index(lattice.zero_index, shape)
    m2 = {lbl: np.zeros((count,) + shape) for lbl in request.labels} \
        if request.moments else {}
    mean0 = {lbl: np.zeros(count) for lbl in request.labels} \
        if request.mean_zero else {}
    lag_re = np.zeros((count, len(lag_nodes)) + shape) \
        if request.lag_label else None
    inc = {lbl: np.zeros((count, len(lag_nodes), len(probe_idx)))
           for lbl in request.increment_labels}
    besov_acc = np.zeros(count) if request.besov else None
    ring: dict[str, list[np.ndarray]] = {lbl: [] for lbl in ring_labels}

    if request.besov:
        from .dyadic import block_weights

        p_norm, beta = request.besov
        grid = besov_grid_size(lattice, cfg.oversample)
        bw = block_weights(lattice)
        kpow = 2.0 ** (beta * np.arange(-1, bw.shape[0] - 1))

    for node in range(n_nodes):
        out = stepper.node_outputs(request.labels)
        for lbl in request.labels:
            cube = out[lbl]
            if request.moments:
                m2[lbl] += np.abs(cube) ** 2
            if request.mean_zero:
                mean0[lbl] += cube.reshape(count, -1)[:, zero_flat].real
        if request.besov:
            blocks = bw * np.expand_dims(out[request.labels[0]], -lattice.d - 1)
            for b in range(count):
                phys = cube_to_grid(lattice, blocks[b], grid)
                sup = np.max(np.abs(phys), axis=tuple(range(-lattice.d, 0)))
                besov_acc[b] += float(np.max(kpow * sup)) ** p_norm
        for lbl in ring_labels:
            full = lbl == request.lag_label
            vals = out[lbl] if full else out[lbl].reshape(count, -1)[:, probe_idx]
            ring[lbl].append(np.array(vals))
            if len(ring[lbl]) > ring_len:
                ring[lbl].pop(0)
            cur = ring[lbl][-1]
            for li, back in enumerate(backs):
                if len(ring[lbl]) <= back:
                    continue
                past = ring[lbl][-1 - back]
                if full:
                    lag_re[:, li] += (cur * np.conj(past)).real
                if lbl in inc:
                    pv = past if not full else \
                        past.reshape(count, -1)[:, probe_idx]
                    cv = cur if not full else \
                        cur.reshape(count, -1)[:, probe_idx]
                    inc[lbl][:, li] += np.abs(cv - pv) ** 2
        if node < n_nodes - 1:
            for _ in range(stride):
                stepper.advance()

    # normalize per-trajectory means, then report chunk sums of those means
    result: dict = {"count": count}
    if request.moments:
        shell_sel = []
        for lo, hi in request.shells:
            r2 = lattice.abs2.astype(np.float64)
            shell_sel.append(lattice.mask & (r2 >= lo * lo) & (r2 <= hi * hi))
        for lbl in request.labels:
            vals = m2[lbl] / n_nodes
            result[f"m2:{lbl}:sum1"] = vals.sum(axis=0)
            result[f"m2:{lbl}:sum2"] = (vals**2).sum(axis=0)
            flat = vals.reshape(count, -1)
            for si, sel in enumerate(shell_sel):
                sm = flat[:, sel.ravel()].mean(axis=1)
                result[f"shell{si}:{lbl}:sum1"] = sm.sum()
                result[f"shell{si}:{lbl}:sum2"] = (sm**2).sum()
    if request.mean_zero:
        for lbl in request.labels:
            vals = mean0[lbl] / n_nodes
            result[f"mean0:{lbl}:sum1"] = vals.sum()
            result[f"mean0:{lbl}:sum2"] = (vals**2).sum()
    pair_counts = np.array([max(n_nodes - b, 1) for b in backs], dtype=np.float64)
    if request.lag_label:
        lag_re /= pair_counts.reshape((1, -1) + (1,) * lattice.d)
        result["lag:sum1"] = lag_re.sum(axis=0)
        result["lag:sum2"] = (lag_re**2).sum(axis=0)
    for lbl in request.increment_labels:
        inc[lbl] /= pair_counts.reshape((1, -1, 1))
        result[f"inc:{lbl}:sum1"] = inc[lbl].sum(axis=0)
        result[f"inc:{lbl}:sum2"] = (inc[lbl]**2).sum(axis=0)
    if request.besov:
        vals = besov_acc / n_nodes
        result["besov:sum1"] = vals.sum()
        result["besov:sum2"] = (vals**2).sum()
    return result


@dataclass
class SweepResult:
    """Merged accumulators of a replica sweep."""

    config: ExperimentConfig
    lattice: FrequencyLattice
    c: float
    cprime: float
    accumulators: dict

    def moment(self, label: str) -> tuple[np.ndarray, np.ndarray]:
        acc = self.accumulators[f"m2:{label}"]
        return acc.mean(), acc.stderr()

    def scalar(self, key: str) -> tuple[float, float]:
        acc = self.accumulators[key]
        return float(acc.mean()), float(acc.stderr())


def run_sweep(cfg: ExperimentConfig, request: StatRequest) -> SweepResult:
    """Execute a replica sweep, in parallel chunks, with ordered reduction."""
    lattice, c, cprime = plan_constants(cfg)
    cfg_text = cfg.to_text()
    chunks = _chunk_ranges(cfg.replicas, cfg.chunk_size())
    payloads = [(cfg_text, request, c, cprime, r0, cnt) for r0, cnt in chunks]
    if cfg.threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_run_chunk, payloads))
    else:
        results = [_run_chunk(p) for p in payloads]
    merged: dict[str, MomentAccumulator] = {}
    total = 0
    for res in results:  # chunk order fixed: bit-reproducible reduction
        total += res.pop("count")
        for key, val in res.items():
            if key.endswith(":sum1"):
                name = key[:-5]
                acc = merged.setdefault(name, MomentAccumulator())
                acc.sum1 = acc.sum1 + val
            elif key.endswith(":sum2"):
                merged[key[:-5]].sum2 = merged[key[:-5]].sum2 + val
            else:
                merged[key] = val
    for acc in merged.values():
        if isinstance(acc, MomentAccumulator):
            acc.count = total
    return SweepResult(cfg, lattice, c, cprime, merged)
