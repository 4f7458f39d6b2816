"""Closed-form and brute-force reference moments for the diagram statistics.

Everything here is deterministic: exact one-mode covariances, exact lattice
sums for the Wick square and the heat-integrated Wick cube, and the partial
sums behind the divergent renormalization constants.  These are the values the
Monte Carlo construction is tested against.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .lattice import FOUR_PI_SQ, FrequencyLattice, next_fast_grid_size
from .dyadic import DEFAULT_PARTITION, DyadicPartition
from . import _kernels


def weight2_of(omega) -> float:
    """<omega>^2 = 1 + 4 pi^2 |omega|^2 for an integer frequency vector."""
    arr = np.atleast_1d(np.asarray(omega, dtype=np.float64))
    return float(1.0 + FOUR_PI_SQ * np.dot(arr, arr))


def moment_linear(omega, lag: float = 0.0) -> float:
    """E[ lin^(t, omega) lin^(t + lag, -omega) ] = exp(-lag <w>^2) / (2 <w>^2)."""
    if lag < 0:
        raise ValueError("lag must be >= 0")
    w2 = weight2_of(omega)
    return float(np.exp(-lag * w2) / (2.0 * w2))


def moment_linear_increment(omega, lag: float) -> float:
    """E | lin^(t+lag, omega) - lin^(t, omega) |^2 = (1 - exp(-lag <w>^2)) / <w>^2."""
    if lag < 0:
        raise ValueError("lag must be >= 0")
    w2 = weight2_of(omega)
    return float((1.0 - np.exp(-lag * w2)) / w2)


def tree_time_factor(a: float, b: float) -> float:
    """Closed form of F(a,b) = int_{u,u'<t} e^{-(t-u)a} e^{-(t-u')a} e^{-|u-u'|b}.

    Integrating the ordered region twice gives F(a,b) = 1/(a(a+b)) for
    a > 0, a + b > 0 (continuous at a = b).
    """
    if a <= 0 or a + b <= 0:
        raise ValueError("need a > 0 and a + b > 0")
    return 1.0 / (a * (a + b))


def tree_time_factor_quadrature(a: float, b: float, tmax: float = 60.0) -> float:
    """Adaptive-quadrature evaluation of F(a,b); validation oracle for the closed form.

    The integrand has a kink on the diagonal, so integrate twice the ordered
    region u' < u where it is smooth.
    """
    from scipy.integrate import dblquad

    val, _ = dblquad(
        lambda up, u: np.exp(-a * u - a * up - b * (u - up)),
        0.0, tmax / max(a, 1.0), 0.0, lambda u: u, epsabs=1e-13, epsrel=1e-13,
    )
    return 2.0 * float(val)


# -- orbit reduction under the signed-permutation symmetry group ---------------


@lru_cache(maxsize=None)
def _orbits(lattice: FrequencyLattice):
    """Canonical representatives of lattice frequencies under coordinate
    permutations and sign flips, with orbit sizes and a member -> orbit map."""
    freqs = lattice.frequencies
    canon = np.sort(np.abs(freqs), axis=1)[:, ::-1]
    uniq, inverse, counts = np.unique(canon, axis=0, return_inverse=True,
                                      return_counts=True)
    return uniq.astype(np.int64), inverse.astype(np.int64), counts.astype(np.int64)


def orbit_representatives(lattice: FrequencyLattice):
    """(reps, inverse, counts): reps are canonical members, one per orbit."""
    return _orbits(lattice)


def _member_flat(lattice: FrequencyLattice):
    strides = np.array(
        [lattice.side ** (lattice.d - 1 - k) for k in range(lattice.d)],
        dtype=np.int64,
    )
    return np.ascontiguousarray(lattice.mask.ravel()), strides


# -- Wick square ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _wick_square_table(lattice: FrequencyLattice) -> np.ndarray:
    """E|wick2^(t, omega)|^2 on the doubled cube [-2n..2n]^d via FFT convolution."""
    a = np.where(lattice.mask, 1.0 / (2.0 * lattice.weight2), 0.0)
    size = next_fast_grid_size(2 * lattice.side - 1)
    fa = np.fft.rfftn(a, s=(size,) * lattice.d, axes=tuple(range(lattice.d)))
    conv = np.fft.irfftn(fa * fa, s=(size,) * lattice.d, axes=tuple(range(lattice.d)))
    sel = tuple([slice(0, 2 * lattice.side - 1)] * lattice.d)
    table = 2.0 * conv[sel]
    table.flags.writeable = False
    return table


def moment_wick_square(lattice: FrequencyLattice, omega) -> float:
    """Exact E|wick2^(t, omega)|^2 = 2 sum_{w1+w2=omega, both in L} 1/(4<w1>^2<w2>^2)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    if np.any(np.abs(omega) > 2 * lattice.n):
        return 0.0
    idx = tuple(int(w) + 2 * lattice.n for w in omega)
    return float(max(_wick_square_table(lattice)[idx], 0.0))


def moment_wick_square_cube(lattice: FrequencyLattice) -> np.ndarray:
    """moment_wick_square restricted to the ambient cube of the lattice."""
    table = _wick_square_table(lattice)
    sel = tuple([slice(lattice.n, 3 * lattice.n + 1)] * lattice.d)
    return np.ascontiguousarray(table[sel])


# -- heat-integrated Wick cube -------------------------------------------------


# the orbit-reduced triple sum costs ~ n_orbits * |L|^2 kernel iterations;
# past this budget (n ~ 12 at d = 3) the oracle is declined rather than hung
TREE_SUM_BUDGET = 2e10


def tree_sum_feasible(lattice: FrequencyLattice) -> bool:
    reps, _, _ = _orbits(lattice)
    return len(reps) * float(lattice.size) ** 2 <= TREE_SUM_BUDGET


@lru_cache(maxsize=None)
def _tree_table(lattice: FrequencyLattice, dt: float) -> np.ndarray:
    """E|tree^(t, omega)|^2 for every omega in the ambient cube (orbit-reduced)."""
    reps, inverse, _ = _orbits(lattice)
    if len(reps) * float(lattice.size) ** 2 > TREE_SUM_BUDGET:
        raise ValueError(
            f"tree moment sum infeasible at d={lattice.d}, n={lattice.n}: "
            f"{len(reps)} orbits x {lattice.size}^2 pair terms")
    member, strides = _member_flat(lattice)
    coords = np.ascontiguousarray(lattice.frequencies)
    a_vals = 1.0 + FOUR_PI_SQ * np.sum(reps.astype(np.float64) ** 2, axis=1)
    out = np.zeros(len(reps))
    _kernels.tree_moment_kernel(reps, coords, lattice.n, member, strides,
                                a_vals, float(dt), out)
    cube = np.zeros(lattice.shape)
    cube[lattice.mask] = out[inverse]
    cube.flags.writeable = False
    return cube


def moment_tree(lattice: FrequencyLattice, omega, dt: float = 0.0) -> float:
    """Exact E|tree^(t, omega)|^2.

    6 sum_{w1+w2+w3=omega in L} prod_i 1/(2<w_i>^2) * F(<omega>^2, sum <w_i>^2),
    the triple sum running over lattice members (the cube is truncated to the
    lattice before heat integration, matching the construction).  dt = 0 gives
    the continuous-time value; dt > 0 gives the exact second moment of the
    zero-order-hold integrator on a step-dt grid, whose difference from the
    continuum value is the exact discretization bias.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    if not lattice.contains(omega):
        return 0.0
    return float(_tree_table(lattice, float(dt))[lattice.index_of(omega)])


def moment_tree_cube(lattice: FrequencyLattice, dt: float = 0.0) -> np.ndarray:
    return np.asarray(_tree_table(lattice, float(dt)))


def zoh_time_factor(a: float, b: float, dt: float) -> float:
    """Second-moment kernel of the zero-order-hold heat integrator.

    G^2 (1 + xy) / ((1 - x^2)(1 - xy)) with x = e^{-a dt}, y = e^{-b dt} and
    G = (1 - x)/a; converges to tree_time_factor(a, b) as dt -> 0 with an
    O(dt^2) relative error ((a+b)^2 - a^2) dt^2 / 12 in the resolved regime.
    """
    x = np.exp(-a * dt)
    xy = x * np.exp(-b * dt)
    return float(((1.0 - x) / a) ** 2 * (1.0 + xy) / ((1.0 - x * x) * (1.0 - xy)))


def moment_tree_brute(lattice: FrequencyLattice, omega, dt: float = 0.0) -> float:
    """Direct nested-loop evaluation of moment_tree (small lattices only)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    freqs = lattice.frequencies
    if len(freqs) ** 2 > 5_000_000:
        raise ValueError("lattice too large for the brute-force tree sum")
    a = weight2_of(omega)
    total = 0.0
    for w1 in freqs:
        for w2 in freqs:
            w3 = omega - w1 - w2
            if not lattice.contains(w3):
                continue
            w21, w22, w23 = weight2_of(w1), weight2_of(w2), weight2_of(w3)
            b = w21 + w22 + w23
            factor = zoh_time_factor(a, b, dt) if dt > 0 \
                else tree_time_factor(a, b)
            total += factor / (8.0 * w21 * w22 * w23)
    return 6.0 * total


# -- renormalization constants -------------------------------------------------


def renorm_c(lattice: FrequencyLattice) -> float:
    """Variance of the stationary linear solution: sum_L 1/(2 <omega>^2)."""
    return float(np.sum(np.where(lattice.mask, 1.0 / (2.0 * lattice.weight2), 0.0)))


def _rho_table(lattice: FrequencyLattice, partition: DyadicPartition,
               resonant: bool) -> np.ndarray:
    qmax = lattice.d * (2 * lattice.n) ** 2
    if not resonant:
        return np.ones(qmax + 1)
    from .paraproduct import ResonantWeight

    r = np.sqrt(np.arange(qmax + 1, dtype=np.float64))
    return np.ascontiguousarray(ResonantWeight(partition).radial(r, r))


def renorm_cprime(lattice: FrequencyLattice, variant: str = "resonant",
                  partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """Logarithmically divergent constant normalizing the square-square diagrams.

    plain:    (1/4) sum_{w1, w2 in L} [<w1>^2 <w2>^2 (<w1>^2+<w2>^2+<w1+w2>^2)]^-1
              (the sum frequency w1 + w2 unrestricted).
    resonant: the same sum carrying the comparable-scale weight of the pair
              (w1+w2, -(w1+w2)) and restricted to w1 + w2 in the lattice, which
              makes it exactly half the expectation of the resonant product of
              the heat-integrated Wick square against the Wick square as the
              construction computes it.
    """
    if variant not in ("plain", "resonant"):
        raise ValueError(f"unknown variant {variant!r}")
    resonant = variant == "resonant"
    reps, _, counts = _orbits(lattice)
    coords = np.ascontiguousarray(lattice.frequencies)
    rho = _rho_table(lattice, partition, resonant)
    out = np.zeros(len(reps))
    _kernels.cprime_kernel(reps, counts.astype(np.float64), coords, lattice.n,
                           lattice.norm == "max", resonant, rho, out)
    return float(np.sum(out) / 4.0)


def logdiv_reference(n_list, d: int = 3, norm: str = "euclidean") -> dict:
    """Partial sums S(n) of the divergent triple sum, with log-rate diagnostics.

    Returns columns: n, S(n), successive differences S(n_k) - S(n_{k-1}), and
    S(n)/log(n) where defined.
    """
    n_list = [int(n) for n in n_list]
    s_vals = [renorm_cprime(FrequencyLattice(d=d, n=n, norm=norm), "plain")
              for n in n_list]
    diffs = [float("nan")] + [s_vals[i] - s_vals[i - 1] for i in range(1, len(s_vals))]
    per_log = [s / np.log(n) if n > 1 else float("nan")
               for n, s in zip(n_list, s_vals)]
    return {"n": n_list, "S": s_vals, "diff": diffs, "S_over_log": per_log}
