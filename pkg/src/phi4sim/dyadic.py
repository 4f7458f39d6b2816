"""Dyadic partition of unity, Littlewood-Paley blocks, and Besov-type norms.

The partition is built from a single smooth radial step chi_tilde equal to 1
inside radius 3/4 and 0 outside 4/3.  The annular bump is the telescoping
difference chi(z) = chi_tilde(z/2) - chi_tilde(z), which makes the partition
identity chi_tilde(z) + sum_k chi(z/2^k) = 1 hold exactly (each interior term
is evaluated twice at bit-identical arguments and cancels), and pins the
supports: chi lives on the annulus 3/4 < |z| < 8/3, and blocks two apart never
overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import FrequencyLattice, next_fast_grid_size
from .fields import SpectralField, cube_to_grid

INNER_RADIUS = 0.75
OUTER_RADIUS = 4.0 / 3.0


def _smooth_step(s: np.ndarray, sharpness: float) -> np.ndarray:
    """C^infinity transition from 1 at s <= 0 to 0 at s >= 1."""
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-sharpness / np.maximum(s, 1e-300)), 0.0)
        b = np.where(s < 1, np.exp(-sharpness / np.maximum(1.0 - s, 1e-300)), 0.0)
    out = np.where(s <= 0, 1.0, np.where(s >= 1, 0.0, b / (a + b)))
    return out


@dataclass(frozen=True)
class DyadicPartition:
    """Radial dyadic partition of unity on frequency space.

    chi_k(z) = chi(z / 2^k) for k >= 0 and chi_{-1} = chi_tilde.  `sharpness`
    tunes how steep the transition region is (larger = steeper).
    """

    sharpness: float = 1.0

    def __post_init__(self):
        if self.sharpness <= 0:
            raise ValueError("sharpness must be positive")

    def chi_tilde(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=np.float64))
        s = (r - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS)
        return _smooth_step(s, self.sharpness)

    def chi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        return self.chi_tilde(r / 2.0) - self.chi_tilde(r)

    def chi_k(self, k: int, r) -> np.ndarray:
        """Evaluate the k-th block profile at radius r (k >= -1)."""
        if k < -1:
            raise ValueError("block index must be >= -1")
        if k == -1:
            return self.chi_tilde(r)
        return self.chi(np.asarray(r, dtype=np.float64) / 2.0**k)

    def partition_sum(self, r, kmax: int) -> np.ndarray:
        """chi_tilde(r) + sum_{k=0}^{kmax} chi_k(r); equals 1 once kmax covers r."""
        total = self.chi_tilde(r)
        for k in range(kmax + 1):
            total = total + self.chi_k(k, r)
        return total


def build_partition(transition_profile: float = 1.0) -> DyadicPartition:
    """Deterministic partition with the given transition sharpness."""
    return DyadicPartition(sharpness=float(transition_profile))


DEFAULT_PARTITION = build_partition()


def max_block_index(lattice: FrequencyLattice) -> int:
    """Largest k whose annulus meets the lattice; higher blocks vanish."""
    k = 0
    while INNER_RADIUS * 2.0 ** (k + 1) <= lattice.max_radius:
        k += 1
    return k


@lru_cache(maxsize=None)
def _block_weights(sharpness: float, d: int, n: int, norm: str) -> np.ndarray:
    """chi_k on the ambient cube for k = -1..kmax, stacked along axis 0."""
    lattice = FrequencyLattice(d=d, n=n, norm=norm)
    part = DyadicPartition(sharpness=sharpness)
    kmax = max_block_index(lattice)
    out = np.stack([part.chi_k(k, lattice.radius) for k in range(-1, kmax + 1)])
    out.flags.writeable = False
    return out


def block_weights(lattice: FrequencyLattice,
                  partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """Stacked chi_k arrays on the lattice cube (index 0 is block -1)."""
    return _block_weights(partition.sharpness, lattice.d, lattice.n, lattice.norm)


def lp_block(field: SpectralField, k: int,
             partition: DyadicPartition = DEFAULT_PARTITION) -> SpectralField:
    """Band-pass onto dyadic block k: coefficients multiplied by chi_k(|omega|)."""
    if k < -1:
        raise ValueError("block index must be >= -1")
    lattice = field.lattice
    kmax = max_block_index(lattice)
    if k > kmax:
        return SpectralField(lattice, np.zeros(lattice.shape, dtype=np.complex128))
    w = block_weights(lattice, partition)[k + 1]
    return SpectralField(lattice, field.coeffs * w)


def block_decompose(field: SpectralField,
                    partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """All blocks of a field at once, shape (kmax+2, *lattice.shape)."""
    return block_weights(field.lattice, partition) * field.coeffs


def besov_grid_size(lattice: FrequencyLattice, oversample: int) -> int:
    return next_fast_grid_size(oversample * lattice.side)


def besov_norm(field: SpectralField, alpha: float, oversample: int = 2,
               partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """sup_k 2^{alpha k} ||delta_k f||_oo with the sup taken over a uniform grid.

    The grid has at least (oversample*(2n+1))^d points; the reported value is a
    lower bound on the true sup norm with bias controlled by the oversampling.
    """
    if oversample < 2:
        raise ValueError("oversample must be >= 2 to control the sup-norm bias")
    lattice = field.lattice
    blocks = block_decompose(field, partition)
    grid = besov_grid_size(lattice, oversample)
    phys = cube_to_grid(lattice, blocks, grid)
    sup = np.max(np.abs(phys), axis=tuple(range(-lattice.d, 0)))
    k = np.arange(-1, blocks.shape[0] - 1, dtype=np.float64)
    return float(np.max(2.0 ** (alpha * k) * sup))


def besov_block_profile(field: SpectralField, oversample: int = 2,
                        partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """||delta_k f||_oo for k = -1..kmax (grid sup norms)."""
    lattice = field.lattice
    blocks = block_decompose(field, partition)
    grid = besov_grid_size(lattice, oversample)
    phys = cube_to_grid(lattice, blocks, grid)
    return np.max(np.abs(phys), axis=tuple(range(-lattice.d, 0)))


def block_lp_norms(field: SpectralField, p: float, oversample: int = 2,
                   partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """||delta_k f||_{L^p} on the unit-mass torus, k = -1..kmax."""
    lattice = field.lattice
    blocks = block_decompose(field, partition)
    grid = besov_grid_size(lattice, oversample)
    phys = cube_to_grid(lattice, blocks, grid)
    axes = tuple(range(-lattice.d, 0))
    return np.mean(np.abs(phys) ** p, axis=axes) ** (1.0 / p)


def heat_smoothing_probe(field: SpectralField, alpha: float, beta: float,
                         t_list, oversample: int = 2,
                         partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """||P_t f||_{C^beta} * t^{(beta-alpha)/2} for each t (boundedness probe)."""
    if beta < alpha:
        raise ValueError("need beta >= alpha")
    from .fields import heat_semigroup

    t_arr = np.asarray(t_list, dtype=np.float64)
    if np.any(t_arr <= 0):
        raise ValueError("all probe times must be positive")
    out = np.empty_like(t_arr)
    for i, t in enumerate(t_arr):
        norm = besov_norm(heat_semigroup(field, float(t)), beta, oversample, partition)
        out[i] = norm * t ** ((beta - alpha) / 2.0)
    return out
