"""Bony decomposition of pointwise products into para- and resonant parts.

All three pieces are computed block-by-block on a de-aliased physical grid and
truncated back to the lattice, so para_low + resonant + para_high recovers the
truncated full product to machine precision.  The resonant frequency weight
sum_{|k-l|<=1} chi_k(w1) chi_l(w2) is exposed separately; it is the smooth
indicator of the comparable-scale region that drives the restricted
convolutions in the diagram moment bounds.
"""

from __future__ import annotations

import numpy as np

from .lattice import FrequencyLattice
from .fields import SpectralField, cube_to_grid, grid_to_cube, _check_same_lattice
from .dyadic import DEFAULT_PARTITION, DyadicPartition, block_weights


class ResonantWeight:
    """Evaluator for the comparable-scale weight (w1, w2) -> [0, 1]."""

    def __init__(self, partition: DyadicPartition = DEFAULT_PARTITION):
        self.partition = partition

    def __call__(self, omega1, omega2) -> np.ndarray:
        r1 = _vector_radius(omega1)
        r2 = _vector_radius(omega2)
        return self.radial(r1, r2)

    def radial(self, r1, r2) -> np.ndarray:
        """Weight as a function of the radii |omega1|, |omega2|."""
        r1 = np.asarray(r1, dtype=np.float64)
        r2 = np.asarray(r2, dtype=np.float64)
        kmax = _active_blocks(max(float(np.max(r1)), float(np.max(r2))))
        total = np.zeros(np.broadcast_shapes(r1.shape, r2.shape))
        chi1 = [self.partition.chi_k(k, r1) for k in range(-1, kmax + 1)]
        chi2 = [self.partition.chi_k(k, r2) for k in range(-1, kmax + 1)]
        for k in range(-1, kmax + 1):
            for l in range(max(-1, k - 1), min(kmax, k + 1) + 1):
                total = total + chi1[k + 1] * chi2[l + 1]
        return total

    def diagonal(self, omega) -> np.ndarray:
        """Weight of a conjugate pair (omega, -omega); identically 1."""
        r = _vector_radius(omega)
        return self.radial(r, r)


def _vector_radius(omega) -> np.ndarray:
    arr = np.asarray(omega, dtype=np.float64)
    if arr.ndim == 0:
        return np.abs(arr)
    return np.sqrt(np.sum(arr * arr, axis=-1))


def _active_blocks(rmax: float) -> int:
    k = 0
    while 0.75 * 2.0 ** (k + 1) <= max(rmax, 1.0):
        k += 1
    return k + 1


def resonant_weight(omega1, omega2,
                    partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """sum_{|k-l|<=1} chi_k(omega1) chi_l(omega2), a value in [0, 1]."""
    return float(ResonantWeight(partition)(omega1, omega2))


# -- block products -----------------------------------------------------------


def _block_phys(lattice: FrequencyLattice, blocks: np.ndarray, grid: int) -> np.ndarray:
    """Physical samples of stacked spectral blocks, batched over the block axis."""
    return cube_to_grid(lattice, blocks, grid)


def _product_grid(lattice: FrequencyLattice) -> int:
    return lattice.grid_size(degree=2)


def bony_pieces_cube(lattice: FrequencyLattice, fcube: np.ndarray, gcube: np.ndarray,
                     partition: DyadicPartition = DEFAULT_PARTITION):
    """(para_low, resonant, para_high) coefficient cubes for f, g coefficient cubes.

    Accepts leading batch axes.  Output is truncated to the lattice and exactly
    Hermitian.
    """
    d = lattice.d
    w = block_weights(lattice, partition)  # (K+2, *shape)
    nblocks = w.shape[0]
    grid = _product_grid(lattice)
    # stack blocks along a fresh axis just before the spatial axes
    fblocks = np.expand_dims(fcube, -d - 1) * w
    gblocks = np.expand_dims(gcube, -d - 1) * w
    fphys = _block_phys(lattice, fblocks, grid)
    gphys = _block_phys(lattice, gblocks, grid)
    low = np.zeros(fphys.shape[:-d - 1] + fphys.shape[-d:])
    res = np.zeros_like(low)
    high = np.zeros_like(low)

    def block(phys, k):
        return phys[(Ellipsis, k) + (slice(None),) * d]

    for l in range(nblocks):
        for k in range(nblocks):
            term = block(fphys, k) * block(gphys, l)
            if k < l - 1:
                low = low + term
            elif k > l + 1:
                high = high + term
            else:
                res = res + term
    return tuple(grid_to_cube(lattice, phys) for phys in (low, res, high))


def para_low(f: SpectralField, g: SpectralField,
             partition: DyadicPartition = DEFAULT_PARTITION) -> SpectralField:
    """Paraproduct of low-frequency f against high-frequency g."""
    _check_same_lattice(f, g)
    low, _, _ = bony_pieces_cube(f.lattice, f.coeffs, g.coeffs, partition)
    return SpectralField(f.lattice, low)


def para_high(f: SpectralField, g: SpectralField,
              partition: DyadicPartition = DEFAULT_PARTITION) -> SpectralField:
    """Paraproduct of high-frequency f against low-frequency g."""
    return para_low(g, f, partition)


def resonant(f: SpectralField, g: SpectralField,
             partition: DyadicPartition = DEFAULT_PARTITION) -> SpectralField:
    """Resonant (comparable-scale) part of the product fg."""
    _check_same_lattice(f, g)
    _, res, _ = bony_pieces_cube(f.lattice, f.coeffs, g.coeffs, partition)
    return SpectralField(f.lattice, res)


def resonant_cube(lattice: FrequencyLattice, fcube: np.ndarray, gcube: np.ndarray,
                  partition: DyadicPartition = DEFAULT_PARTITION) -> np.ndarray:
    """Resonant product on raw coefficient cubes with leading batch axes.

    Cheaper than bony_pieces_cube: only the |k-l| <= 1 pairs are multiplied.
    """
    w = block_weights(lattice, partition)
    nblocks = w.shape[0]
    grid = _product_grid(lattice)
    d = lattice.d
    fblocks = np.expand_dims(fcube, -d - 1) * w
    fphys = _block_phys(lattice, fblocks, grid)
    # neighbor-summed blocks of g: sum_{|l-k|<=1} delta_l g for each k
    gblocks = np.expand_dims(gcube, -d - 1) * w
    neigh = np.zeros_like(gblocks)
    for k in range(nblocks):
        lo, hi = max(0, k - 1), min(nblocks, k + 2)
        neigh[(Ellipsis, k) + (slice(None),) * d] = np.sum(
            gblocks[(Ellipsis, slice(lo, hi)) + (slice(None),) * d], axis=-d - 1)
    gphys = _block_phys(lattice, neigh, grid)
    prod = np.sum(fphys * gphys, axis=-d - 1)
    return grid_to_cube(lattice, prod)


def full_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product fg computed on a de-aliased grid, truncated to the lattice."""
    _check_same_lattice(f, g)
    lattice = f.lattice
    grid = _product_grid(lattice)
    phys = cube_to_grid(lattice, f.coeffs, grid) * cube_to_grid(lattice, g.coeffs, grid)
    return SpectralField(lattice, grid_to_cube(lattice, phys))
