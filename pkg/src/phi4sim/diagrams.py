"""Diagram sets: the six renormalized processes built from one noise path.

Wraps the streaming stepper into stored trajectories, exposes the
renormalization constants and the heat-integration operator on stored
trajectories, and provides time increments on the reporting window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyLattice
from .fields import SpectralField
from .dyadic import DEFAULT_PARTITION, DyadicPartition
from .gaussian import FieldTrajectory, NoiseSeed
from .oracle import renorm_c, renorm_cprime
from .stepper import DIAGRAMS, DiagramStepper, MIN_BURN_IN, burn_in_steps


@dataclass(frozen=True)
class DiagramSet:
    """All six diagram trajectories from a single seeded noise realization."""

    lattice: FrequencyLattice
    times: np.ndarray
    trajectories: dict[str, FieldTrajectory]
    c: float
    cprime: float
    cprime_plain: float
    provenance: dict

    def __post_init__(self):
        for label, traj in self.trajectories.items():
            if traj.lattice != self.lattice:
                raise ValueError(f"{label}: lattice mismatch")
            if traj.times.shape != np.asarray(self.times).shape or \
                    not np.allclose(traj.times, self.times):
                raise ValueError(f"{label}: time grid mismatch")

    def field(self, label: str, t: float) -> SpectralField:
        traj = self.trajectories[label]
        return traj.fields[traj.node_index(t)]


def heat_integrate(traj: FieldTrajectory, burn_in: float) -> FieldTrajectory:
    """Ancient heat solution of a stored forcing trajectory (zero-order hold).

    J(t + dt) = e^{-dt <w>^2} J(t) + f^(t) (1 - e^{-dt <w>^2}) / <w>^2,
    started from zero at the first node; nodes in the initial burn-in interval
    are consumed but not reported.  The reported values approximate the
    infinite-past integral with O(dt) forcing bias plus an initialization
    transient bounded by e^{-burn_in} at the slowest mode.
    """
    if burn_in < 0:
        raise ValueError("burn-in must be >= 0")
    if traj.times.size < 2:
        raise ValueError("need at least two nodes to integrate")
    if burn_in < MIN_BURN_IN:
        warnings.warn(
            f"burn-in {burn_in} below the configured minimum {MIN_BURN_IN}; "
            "initialization transient may exceed 1e-6", stacklevel=2)
    dt = traj.dt
    skip = burn_in_steps(burn_in, dt)
    if skip >= traj.times.size:
        raise ValueError("burn-in exhausts the whole trajectory")
    lattice = traj.lattice
    decay = np.exp(-dt * lattice.weight2)
    gain = (1.0 - decay) / lattice.weight2
    state = np.zeros(lattice.shape, dtype=np.complex128)
    out = []
    for k in range(traj.times.size):
        if k >= skip:
            out.append(SpectralField(lattice, state.copy()))
        state = decay * state + gain * traj.fields[k].coeffs
    return FieldTrajectory(lattice, traj.times[skip:], tuple(out),
                           label=f"I({traj.label})")


def build_diagrams(lattice: FrequencyLattice, time_grid, seed: NoiseSeed,
                   burn_in: float = MIN_BURN_IN,
                   cprime_variant: str = "resonant", replica: int = 0,
                   labels=DIAGRAMS,
                   partition: DyadicPartition = DEFAULT_PARTITION) -> DiagramSet:
    """Construct the requested diagrams on the post-burn-in reporting window.

    The time grid must be uniform and long enough to contain the burn-in; the
    reporting window is every node at or after time_grid[0] + burn_in.  All
    trajectories are driven by the same (seed, replica) noise path.
    """
    times = np.asarray(time_grid, dtype=np.float64)
    if times.size < 2:
        raise ValueError("time grid needs at least two nodes")
    steps = np.diff(times)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-10, atol=1e-14):
        raise ValueError("time grid must be uniform and increasing")
    dt = float(steps[0])
    skip = burn_in_steps(burn_in, dt)
    if skip >= times.size:
        raise ValueError("grid too short to contain burn-in plus reporting window")
    provenance = {
        "seed": seed.master_seed, "replica": replica, "dt": dt,
        "burn_in": burn_in, "cprime_variant": cprime_variant,
        "warnings": [],
    }
    if burn_in < MIN_BURN_IN:
        provenance["warnings"].append(
            f"burn-in {burn_in} below configured minimum {MIN_BURN_IN}")
    c = renorm_c(lattice)
    cp_res = renorm_cprime(lattice, "resonant", partition)
    cp_plain = renorm_cprime(lattice, "plain", partition)
    cprime = cp_res if cprime_variant == "resonant" else cp_plain
    stepper = DiagramStepper(lattice, dt, c, cprime, seed, replica0=replica,
                             batch=1, partition=partition)
    stepper.run_burn_in(skip)
    report_times = times[skip:]
    collected: dict[str, list[SpectralField]] = {lbl: [] for lbl in labels}
    for k in range(report_times.size):
        outputs = stepper.node_outputs(labels)
        for lbl in labels:
            collected[lbl].append(SpectralField(lattice, outputs[lbl][0].copy()))
        if k + 1 < report_times.size:
            stepper.advance()
    trajectories = {
        lbl: FieldTrajectory(lattice, report_times, tuple(fields), label=lbl)
        for lbl, fields in collected.items()
    }
    return DiagramSet(lattice, report_times, trajectories, c, cprime, cp_plain,
                      provenance)


def time_increment(diagrams: DiagramSet, label: str, s: float, t: float) -> SpectralField:
    """tau^(t, .) - tau^(s, .) on the reporting window."""
    traj = diagrams.trajectories[label]
    fs = traj.fields[traj.node_index(s)]
    ft = traj.fields[traj.node_index(t)]
    return ft - fs
