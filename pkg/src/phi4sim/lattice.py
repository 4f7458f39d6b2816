"""Truncated integer frequency lattices for real periodic fields on the d-torus.

A cutoff-n lattice holds every integer frequency vector omega with |omega| <= n
(Euclidean ball, the default) or max_i |omega_i| <= n (max-norm cube).  Fields
are stored densely on the ambient cube [-n..n]^d with a membership mask, so all
spectral operations are plain array arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

FOUR_PI_SQ = 4.0 * np.pi**2

# Grid sizes with only 2/3/5 prime factors run much faster through pocketfft.
_FAST_GRID_LIMIT = 1 << 16


def _is_5_smooth(m: int) -> bool:
    for p in (2, 3, 5):
        while m % p == 0:
            m //= p
    return m == 1


def next_fast_grid_size(m: int) -> int:
    """Smallest 5-smooth integer >= m (FFT-friendly physical grid size)."""
    if m < 1:
        return 1
    k = int(m)
    while k < _FAST_GRID_LIMIT:
        if _is_5_smooth(k):
            return k
        k += 1
    raise ValueError(f"no fast grid size found above {m}")


@dataclass(frozen=True)
class FrequencyLattice:
    """Frequencies omega in Z^d with a hard cutoff n and weight <omega>.

    The weight is <omega> = sqrt(1 + 4 pi^2 |omega|^2) >= 1 with |.| the
    Euclidean norm, matching the massive heat kernel exp(-t <omega>^2).
    Enumeration order is C-order over the ambient cube restricted to the
    membership mask, which is deterministic and reproducible.
    """

    d: int = 3
    n: int = 8
    norm: str = "euclidean"  # membership rule: "euclidean" ball or "max" cube

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.n < 0:
            raise ValueError("cutoff n must be >= 0")
        if self.norm not in ("euclidean", "max"):
            raise ValueError(f"unknown norm convention {self.norm!r}")

    # -- geometry ---------------------------------------------------------

    @property
    def side(self) -> int:
        return 2 * self.n + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.d

    @cached_property
    def freq_axis(self) -> np.ndarray:
        """Integer frequencies along one axis, index i <-> frequency i - n."""
        return np.arange(-self.n, self.n + 1)

    @cached_property
    def abs2(self) -> np.ndarray:
        """|omega|^2 as an integer array on the ambient cube."""
        sq = self.freq_axis.astype(np.int64) ** 2
        total = np.zeros(self.shape, dtype=np.int64)
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.side
            total = total + sq.reshape(shape)
        return total

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean membership array on the ambient cube."""
        if self.norm == "max":
            return np.ones(self.shape, dtype=bool)
        return self.abs2 <= self.n * self.n

    @cached_property
    def size(self) -> int:
        """Number of lattice frequencies."""
        return int(self.mask.sum())

    @cached_property
    def weight2(self) -> np.ndarray:
        """<omega>^2 = 1 + 4 pi^2 |omega|^2 on the ambient cube."""
        return 1.0 + FOUR_PI_SQ * self.abs2.astype(np.float64)

    @cached_property
    def weight(self) -> np.ndarray:
        """<omega> on the ambient cube."""
        return np.sqrt(self.weight2)

    @cached_property
    def radius(self) -> np.ndarray:
        """|omega| (Euclidean) on the ambient cube."""
        return np.sqrt(self.abs2.astype(np.float64))

    @property
    def max_radius(self) -> float:
        """Largest |omega| present in the lattice."""
        if self.norm == "max":
            return float(self.n * np.sqrt(self.d))
        return float(self.n)

    # -- indexing helpers ---------------------------------------------------

    def index_of(self, omega) -> tuple[int, ...]:
        """Ambient-cube index of an integer frequency vector."""
        omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
        if omega.shape != (self.d,):
            raise ValueError(f"frequency must have {self.d} components")
        if np.any(np.abs(omega) > self.n):
            raise ValueError(f"frequency {tuple(omega)} outside ambient cube")
        return tuple(int(w) + self.n for w in omega)

    def contains(self, omega) -> bool:
        omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
        if np.any(np.abs(omega) > self.n):
            return False
        return bool(self.mask[self.index_of(omega)])

    def contains_many(self, vecs: np.ndarray) -> np.ndarray:
        """Vectorized membership test for an (..., d) array of frequencies."""
        vecs = np.asarray(vecs, dtype=np.int64)
        inside_cube = np.all(np.abs(vecs) <= self.n, axis=-1)
        if self.norm == "max":
            return inside_cube
        return inside_cube & (np.sum(vecs * vecs, axis=-1) <= self.n * self.n)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """All member frequencies, shape (size, d), in enumeration order."""
        idx = np.argwhere(self.mask)
        return idx - self.n

    @cached_property
    def _flip_flat(self) -> np.ndarray:
        """Flat permutation mapping the cube index of omega to that of -omega."""
        flat = np.arange(self.side**self.d).reshape(self.shape)
        return np.flip(flat, axis=tuple(range(self.d))).ravel()

    @cached_property
    def half_mask(self) -> np.ndarray:
        """One frequency per conjugate pair {omega, -omega}, omega != 0.

        Selected by flat C-order position: omega is kept when its cube index
        precedes that of -omega.  Together with omega = 0 this parameterizes a
        Hermitian field.
        """
        flat = np.arange(self.side**self.d)
        half = (flat < self._flip_flat) & self.mask.ravel()
        return half.reshape(self.shape)

    @cached_property
    def half_indices(self) -> np.ndarray:
        """Flat indices of the half-lattice modes, in enumeration order."""
        return np.flatnonzero(self.half_mask.ravel())

    @cached_property
    def half_indices_conj(self) -> np.ndarray:
        """Flat indices of the mirrored (-omega) partners of half_indices."""
        return self._flip_flat[self.half_indices]

    @property
    def zero_index(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    # -- physical grids -----------------------------------------------------

    def min_grid_size(self, degree: int = 1) -> int:
        """Smallest alias-free grid for pointwise degree-p products.

        A product of p cutoff-n fields has spectrum up to p*n; keeping the
        retained band |omega| <= n uncorrupted requires (p+1)*n + 1 points per
        dimension (degree 3 hence needs >= 4n+1).
        """
        if degree < 1:
            raise ValueError("degree must be >= 1")
        return (degree + 1) * self.n + 1

    def grid_size(self, degree: int = 1) -> int:
        """FFT-friendly grid size for degree-p products."""
        return next_fast_grid_size(self.min_grid_size(degree))


def hermitize(lattice: FrequencyLattice, cube: np.ndarray) -> np.ndarray:
    """Project onto exact Hermitian symmetry: c(-w) = conj(c(w)), c(0) real.

    Acts on the trailing lattice axes; leading axes are batch dimensions.
    """
    axes = tuple(range(cube.ndim - lattice.d, cube.ndim))
    return 0.5 * (cube + np.conj(np.flip(cube, axis=axes)))


def is_hermitian(lattice: FrequencyLattice, cube: np.ndarray, tol: float = 0.0) -> bool:
    axes = tuple(range(cube.ndim - lattice.d, cube.ndim))
    return bool(np.max(np.abs(cube - np.conj(np.flip(cube, axis=axes)))) <= tol)
