"""Complex Fourier coefficients of real periodic fields, and the heat semigroup.

A SpectralField stores one Hermitian-symmetric coefficient per ambient-cube
frequency of its lattice (zero outside the membership mask).  Physical-space
values live on uniform M^d grids reached by zero-padded inverse FFTs; pointwise
products computed there and transformed back realize exact truncated
convolutions as long as the grid is large enough (see
FrequencyLattice.grid_size).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyLattice, hermitize, next_fast_grid_size


@dataclass(frozen=True)
class SpectralField:
    """Immutable spectral representation of a real field on the torus."""

    lattice: FrequencyLattice
    coeffs: np.ndarray  # complex128, shape lattice.shape, Hermitian-symmetric

    def __post_init__(self):
        if self.coeffs.shape != self.lattice.shape:
            raise ValueError(
                f"coefficient array shape {self.coeffs.shape} does not match "
                f"lattice shape {self.lattice.shape}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficient")
        self.coeffs.flags.writeable = False

    def __getitem__(self, omega) -> complex:
        return complex(self.coeffs[self.lattice.index_of(omega)])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_lattice(self, other)
        return SpectralField(self.lattice, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_lattice(self, other)
        return SpectralField(self.lattice, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.lattice, self.coeffs * float(scalar))

    __rmul__ = __mul__


def _check_same_lattice(f: SpectralField, g: SpectralField) -> None:
    if f.lattice != g.lattice:
        raise ValueError("fields live on different lattices")


def field_from_cube(lattice: FrequencyLattice, cube: np.ndarray,
                    enforce_symmetry: bool = True) -> SpectralField:
    """Wrap an ambient-cube coefficient array, masking and symmetrizing."""
    cube = np.asarray(cube, dtype=np.complex128) * lattice.mask
    if enforce_symmetry:
        cube = hermitize(lattice, cube)
    return SpectralField(lattice, cube)


def zero_field(lattice: FrequencyLattice) -> SpectralField:
    return SpectralField(lattice, np.zeros(lattice.shape, dtype=np.complex128))


def constant_field(lattice: FrequencyLattice, value: float) -> SpectralField:
    cube = np.zeros(lattice.shape, dtype=np.complex128)
    cube[lattice.zero_index] = float(value)
    return SpectralField(lattice, cube)


def mode_pair_field(lattice: FrequencyLattice, omega, amplitude: complex) -> SpectralField:
    """Field with coefficient `amplitude` at omega and its conjugate at -omega."""
    if not lattice.contains(omega):
        raise ValueError(f"{omega} not in lattice")
    cube = np.zeros(lattice.shape, dtype=np.complex128)
    om = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    cube[lattice.index_of(om)] = amplitude
    cube[lattice.index_of(-om)] = np.conj(amplitude)
    if np.all(om == 0):
        cube[lattice.zero_index] = np.real(amplitude)
    return SpectralField(lattice, cube)


# -- padded real FFTs ---------------------------------------------------------
#
# The internal transforms act on arrays with an arbitrary number of leading
# batch axes followed by the d spatial axes.  Spectral data use the ambient
# cube layerout; physical data use M points per dimension.


def _spatial_axes(d: int) -> tuple[int, ...]:
    return tuple(range(-d, 0))


def cube_to_grid(lattice: FrequencyLattice, cube: np.ndarray, grid: int) -> np.ndarray:
    """Evaluate Hermitian cube coefficients on a grid^d physical mesh (real)."""
    d, n = lattice.d, lattice.n
    if grid < lattice.side:
        raise ValueError(f"grid size {grid} too small for cutoff {n} (need >= {lattice.side})")
    batch = cube.shape[:-d]
    half = grid // 2 + 1
    spec = np.zeros(batch + (grid,) * (d - 1) + (half,), dtype=np.complex128)
    pos = lattice.freq_axis % grid  # wrapped positions for the full axes
    sel_spec = tuple(np.ix_(*([pos] * (d - 1)))) if d > 1 else ()
    sel_cube = (slice(None),) * (d - 1)
    # last axis: only nonnegative frequencies 0..n are stored in rfft layout
    spec[(Ellipsis,) + sel_spec + (slice(0, n + 1),)] = \
        cube[(Ellipsis,) + sel_cube + (slice(n, None),)]
    out = np.fft.irfftn(spec, s=(grid,) * d, axes=_spatial_axes(d))
    return out * float(grid) ** d


def grid_to_cube(lattice: FrequencyLattice, phys: np.ndarray) -> np.ndarray:
    """Fourier coefficients of a real grid field, restricted to the lattice.

    The result is exactly Hermitian by construction and masked to the lattice.
    """
    d, n = lattice.d, lattice.n
    grid = phys.shape[-1]
    if any(phys.shape[k] != grid for k in range(-d, 0)):
        raise ValueError("physical grid must be uniform across dimensions")
    if grid < lattice.side:
        raise ValueError(f"grid size {grid} too small for cutoff {n}")
    spec = np.fft.rfftn(phys, axes=_spatial_axes(d)) / float(grid) ** d
    batch = phys.shape[:-d]
    cube = np.zeros(batch + lattice.shape, dtype=np.complex128)
    pos = lattice.freq_axis % grid
    sel_spec = tuple(np.ix_(*([pos] * (d - 1)))) if d > 1 else ()
    sel_cube = (slice(None),) * (d - 1)
    cube[(Ellipsis,) + sel_cube + (slice(n, 2 * n + 1),)] = \
        spec[(Ellipsis,) + sel_spec + (slice(0, n + 1),)]
    # mirror the negative half of the last axis, then make symmetry exact
    lo = [slice(None)] * cube.ndim
    lo[-1] = slice(0, n)
    hi = [slice(None)] * cube.ndim
    for ax in range(-d, -1):
        hi[ax] = slice(None, None, -1)
    hi[-1] = slice(2 * n, n, -1)
    cube[tuple(lo)] = np.conj(cube[tuple(hi)])
    cube *= lattice.mask
    return hermitize(lattice, cube)


def to_physical(field: SpectralField, grid_factor: float = 2.0,
                grid_size: int | None = None) -> np.ndarray:
    """Real grid samples of the field on an oversampled uniform mesh.

    grid_factor scales the natural resolution 2n+1; a factor of 2 is enough
    for alias-free pointwise products up to degree 3 after truncation.  The
    actual size is rounded up to an FFT-friendly value.
    """
    if grid_size is None:
        if grid_factor < 2:
            raise ValueError("grid_factor below 2 risks aliasing in downstream products")
        grid_size = next_fast_grid_size(int(np.ceil(grid_factor * field.lattice.side)))
    return cube_to_grid(field.lattice, field.coeffs, grid_size)


def from_physical(phys: np.ndarray, lattice: FrequencyLattice) -> SpectralField:
    """Project real grid samples onto the lattice (inverse of to_physical)."""
    return SpectralField(lattice, grid_to_cube(lattice, phys))


def heat_semigroup(field: SpectralField, t: float) -> SpectralField:
    """Apply exp(-t <omega>^2) modewise; t = 0 is the identity.

    Negative times are rejected: the zero-extension of the semigroup to t < 0
    belongs to the time-integration layer, not to the propagator itself.
    """
    if t < 0:
        raise ValueError("heat semigroup requires t >= 0")
    factor = np.exp(-t * field.lattice.weight2)
    return SpectralField(field.lattice, field.coeffs * factor)
