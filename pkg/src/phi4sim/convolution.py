"""Weighted frequency convolutions behind the discrete convolution bounds.

convolution_sum evaluates  sum_{w1 + w2 = omega, both in L} <w1>^-a <w2>^-b,
optionally restricted by the comparable-scale weight of (w1, w2).  Full tables
over the doubled frequency range come from FFT convolutions (the restricted
variant decomposes over dyadic block pairs, which keeps it a finite sum of
plain convolutions).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .lattice import FrequencyLattice, next_fast_grid_size
from .dyadic import DEFAULT_PARTITION, DyadicPartition, block_weights
from .paraproduct import ResonantWeight


def _doubled_slice(lattice: FrequencyLattice):
    return tuple([slice(0, 2 * lattice.side - 1)] * lattice.d)


def _linear_conv(lattice: FrequencyLattice, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = next_fast_grid_size(2 * lattice.side - 1)
    fa = np.fft.rfftn(a, s=(size,) * lattice.d, axes=tuple(range(lattice.d)))
    fb = np.fft.rfftn(b, s=(size,) * lattice.d, axes=tuple(range(lattice.d)))
    return np.fft.irfftn(fa * fb, s=(size,) * lattice.d, axes=tuple(range(lattice.d)))[_doubled_slice(lattice)]


@lru_cache(maxsize=8)
def _conv_table_cached(lattice: FrequencyLattice, alpha: float, beta: float,
                       resonant: bool, sharpness: float) -> np.ndarray:
    part = DyadicPartition(sharpness)
    wa = np.where(lattice.mask, lattice.weight2 ** (-alpha / 2.0), 0.0)
    wb = np.where(lattice.mask, lattice.weight2 ** (-beta / 2.0), 0.0)
    if not resonant:
        out = _linear_conv(lattice, wa, wb)
    else:
        blocks = block_weights(lattice, part)
        nblocks = blocks.shape[0]
        out = 0.0
        for k in range(nblocks):
            lo, hi = max(0, k - 1), min(nblocks, k + 2)
            neighbor = blocks[lo:hi].sum(axis=0)
            out = out + _linear_conv(lattice, blocks[k] * wa, neighbor * wb)
    out = np.maximum(out, 0.0)
    out.flags.writeable = False
    return out


def convolution_table(lattice: FrequencyLattice, alpha: float, beta: float,
                      resonant: bool = False,
                      partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """Convolution sums for every omega in the doubled cube [-2n..2n]^d."""
    return _conv_table_cached(lattice, float(alpha), float(beta), bool(resonant),
                              partition.sharpness)


def convolution_sum(lattice: FrequencyLattice, omega, alpha: float, beta: float,
                    resonant: bool = False,
                    partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """Single-frequency convolution sum (from the cached full table)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    if np.any(np.abs(omega) > 2 * lattice.n):
        return 0.0
    idx = tuple(int(w) + 2 * lattice.n for w in omega)
    return float(convolution_table(lattice, alpha, beta, resonant, partition)[idx])


def convolution_sum_direct(lattice: FrequencyLattice, omega, alpha: float,
                           beta: float, resonant: bool = False,
                           partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """Direct summation reference for the FFT tables (small lattices)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    freqs = lattice.frequencies
    w2 = lambda v: 1.0 + 4.0 * np.pi**2 * float(v @ v)
    weight = ResonantWeight(partition)
    total = 0.0
    for w1 in freqs:
        v2 = omega - w1
        if not lattice.contains(v2):
            continue
        term = w2(w1) ** (-alpha / 2.0) * w2(v2) ** (-beta / 2.0)
        if resonant:
            term *= float(weight(w1, v2))
        total += term
    return total


def normalized_ray(lattice: FrequencyLattice, alpha: float, beta: float,
                   decay_exponent: float, radii, resonant: bool = False,
                   partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """S(omega) / <omega>^decay_exponent along the first coordinate axis."""
    vals = []
    for r in radii:
        om = np.zeros(lattice.d, dtype=np.int64)
        om[0] = int(r)
        s = convolution_sum(lattice, om, alpha, beta, resonant, partition)
        w2 = 1.0 + 4.0 * np.pi**2 * float(r) ** 2
        vals.append(s / w2 ** (decay_exponent / 2.0))
    return np.asarray(vals)


def normalized_shell_spread(lattice: FrequencyLattice, alpha: float, beta: float,
                            decay_exponent: float, rmax: float,
                            resonant: bool = False,
                            partition: DyadicPartition = DEFAULT_PARTITION):
    """(max, min) of S(omega)/<omega>^decay over all 0 < |omega| <= rmax."""
    table = convolution_table(lattice, alpha, beta, resonant, partition)
    half = 2 * lattice.n
    axes = [np.arange(-half, half + 1)] * lattice.d
    grids = np.meshgrid(*axes, indexing="ij")
    r2 = sum(g.astype(np.float64) ** 2 for g in grids)
    w2 = 1.0 + 4.0 * np.pi**2 * r2
    sel = (r2 > 0) & (r2 <= rmax * rmax)
    ratio = table[sel] / w2[sel] ** (decay_exponent / 2.0)
    return float(np.max(ratio)), float(np.min(ratio))
