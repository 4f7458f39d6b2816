"""Seeded Gaussian sampling of the stationary linear solution and Wick powers.

The linear solution is sampled mode-by-mode as the exact stationary
Ornstein-Uhlenbeck process with rate <omega>^2 and stationary variance
E|X(omega)|^2 = 1/(2 <omega>^2): the initial value is drawn from the
stationary law and updates use the exact one-step transition, so marginals
and lagged covariances carry no time-discretization bias at grid times.

Randomness is counter-based: every (replica, step) pair owns an independent
Philox substream, so trajectories are reproducible bit-for-bit regardless of
scheduling, and distinct replicas can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyLattice
from .fields import SpectralField, cube_to_grid, grid_to_cube

# substream purposes; keyed into the Philox key so streams never collide
STREAM_INIT = 0
STREAM_STEP = 1
STREAM_SCALAR = 2
STREAM_FIELD = 3

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseSeed:
    """Master seed plus the substream derivation rule.

    Substreams are Philox generators keyed by (master_seed, purpose, replica)
    with the step index in the counter block, hence mutually independent and
    reproducible on a fixed platform.
    """

    master_seed: int = 0

    def generator(self, purpose: int, replica: int, step: int = 0) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _MASK64,
             ((purpose & 0xFFFF) << 48) ^ (replica & ((1 << 48) - 1))],
            dtype=np.uint64,
        )
        counter = np.array([0, 0, step & _MASK64, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))


@dataclass(frozen=True)
class FieldTrajectory:
    """One SpectralField per node of a uniform time grid."""

    lattice: FrequencyLattice
    times: np.ndarray
    fields: tuple[SpectralField, ...]
    label: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        if len(self.fields) != times.size:
            raise ValueError("one field per time node required")
        if times.size > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError("time grid must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-10, atol=1e-14):
                raise ValueError("time grid must be uniform")
        object.__setattr__(self, "times", times)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def node_index(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if hits.size != 1:
            raise ValueError(f"time {t} is not a grid node")
        return int(hits[0])


# -- Ornstein-Uhlenbeck machinery on the half lattice --------------------------


class ModeSampler:
    """Vectorized stationary OU sampling for all lattice modes at once.

    State arrays carry an arbitrary batch shape followed by the ambient cube;
    conjugate symmetry is enforced constructively from half-lattice draws.
    """

    def __init__(self, lattice: FrequencyLattice, seed: NoiseSeed):
        self.lattice = lattice
        self.seed = seed
        self.w2 = lattice.weight2
        self.half = lattice.half_indices
        self.half_conj = lattice.half_indices_conj
        self.zero_flat = np.ravel_multi_index(lattice.zero_index, lattice.shape)
        w2_half = self.w2.ravel()[self.half]
        # stationary std of each real/imag component; zero mode is purely real
        self.init_std_half = np.sqrt(1.0 / (4.0 * w2_half))
        self.init_std_zero = np.sqrt(0.5)

    def _assemble(self, half_vals: np.ndarray, zero_val: np.ndarray) -> np.ndarray:
        """Build a Hermitian cube from half-mode complex values (batched)."""
        batch = half_vals.shape[:-1]
        flat = np.zeros(batch + (self.lattice.side**self.lattice.d,), dtype=np.complex128)
        flat[..., self.half] = half_vals
        flat[..., self.half_conj] = np.conj(half_vals)
        flat[..., self.zero_flat] = zero_val
        out = flat.reshape(batch + self.lattice.shape)
        out *= self.lattice.mask
        return out

    def _draw(self, rng: np.random.Generator, batch: tuple[int, ...]):
        nh = self.half.size
        z = rng.standard_normal(batch + (2, nh + 1))
        half = z[..., 0, :nh] + 1j * z[..., 1, :nh]
        zero = z[..., 0, nh]
        return half, zero

    def stationary(self, replica: int, batch_size: int | None = None,
                   step: int = 0) -> np.ndarray:
        """Draw from the exact stationary law (one replica or a replica block)."""
        if batch_size is None:
            rng = self.seed.generator(STREAM_INIT, replica, step)
            half, zero = self._draw(rng, ())
            return self._assemble(half * self.init_std_half, zero * self.init_std_zero)
        rows = []
        for r in range(replica, replica + batch_size):
            rng = self.seed.generator(STREAM_INIT, r, step)
            half, zero = self._draw(rng, ())
            rows.append((half * self.init_std_half, zero * self.init_std_zero))
        half = np.stack([h for h, _ in rows])
        zero = np.stack([z for _, z in rows])
        return self._assemble(half, zero)

    def transition(self, dt: float):
        """(decay factor cube, per-component innovation stds on the half modes)."""
        if dt <= 0:
            raise ValueError("time step must be positive")
        decay = np.exp(-dt * self.w2)
        w2_half = self.w2.ravel()[self.half]
        var_half = (1.0 - np.exp(-2.0 * dt * w2_half)) / (2.0 * w2_half)
        std_half = np.sqrt(var_half / 2.0)
        std_zero = np.sqrt((1.0 - np.exp(-2.0 * dt)) / 2.0)
        return decay, std_half, std_zero

    def epoch_length(self) -> int:
        """Steps drawn per substream block; fixed by the lattice size only."""
        return int(min(256, max(1, (1 << 20) // (self.half.size + 1))))

    def _epoch_draws(self, replica: int, epoch: int,
                     batch_size: int | None) -> np.ndarray:
        """Raw standard normals for one epoch, shape ([B,] L, 2, nh+1).

        Each replica consumes its own (seed, replica, epoch) substream, so
        values never depend on how replicas are batched together.
        """
        nh = self.half.size
        length = self.epoch_length()
        if batch_size is None:
            rng = self.seed.generator(STREAM_STEP, replica, epoch)
            return rng.standard_normal((length, 2, nh + 1))
        out = np.empty((batch_size, length, 2, nh + 1))
        for i in range(batch_size):
            rng = self.seed.generator(STREAM_STEP, replica + i, epoch)
            out[i] = rng.standard_normal((length, 2, nh + 1))
        return out

    def innovation(self, replica: int, step: int, std_half, std_zero,
                   batch_size: int | None = None,
                   epoch_cache: dict | None = None) -> np.ndarray:
        """Innovation cube(s) for the exact OU update arriving at `step`.

        Step indices start at 1 for the first update.  An optional dict cache
        holds the current epoch's draws to amortize substream setup.
        """
        length = self.epoch_length()
        epoch, offset = divmod(step - 1, length)
        if epoch_cache is not None and epoch_cache.get("epoch") == epoch:
            draws = epoch_cache["draws"]
        else:
            draws = self._epoch_draws(replica, epoch, batch_size)
            if epoch_cache is not None:
                epoch_cache["epoch"] = epoch
                epoch_cache["draws"] = draws
        z = draws[..., offset, :, :]
        nh = self.half.size
        half = (z[..., 0, :nh] + 1j * z[..., 1, :nh]) * std_half
        zero = z[..., 0, nh] * std_zero
        return self._assemble(half, zero)

    def advance(self, state: np.ndarray, replica: int, step: int, dt: float,
                batch_size: int | None = None,
                epoch_cache: dict | None = None) -> np.ndarray:
        decay, std_half, std_zero = self.transition(dt)
        return state * decay + self.innovation(replica, step, std_half, std_zero,
                                               batch_size, epoch_cache)


def sample_stationary_linear(lattice: FrequencyLattice, time_grid,
                             seed: NoiseSeed, replica: int = 0,
                             label: str = "linear") -> FieldTrajectory:
    """Exact-in-law stationary trajectory of the linear solution.

    Modewise: X(t + dt) = exp(-dt <w>^2) X(t) + eta with eta complex Gaussian
    of variance (1 - exp(-2 dt <w>^2)) / (2 <w>^2), conjugate-paired across
    +-omega and purely real at omega = 0.
    """
    times = np.asarray(time_grid, dtype=np.float64)
    if times.size == 0:
        raise ValueError("empty time grid")
    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-10, atol=1e-14):
            raise ValueError("time grid must be uniform and increasing")
    sampler = ModeSampler(lattice, seed)
    state = sampler.stationary(replica)
    fields = [SpectralField(lattice, state)]
    cache: dict = {}
    for k in range(1, times.size):
        state = sampler.advance(state, replica, k, float(times[k] - times[k - 1]),
                                epoch_cache=cache)
        fields.append(SpectralField(lattice, state))
    return FieldTrajectory(lattice, times, tuple(fields), label)


def sample_gaussian_field(lattice: FrequencyLattice, regularity: float,
                          rng: np.random.Generator) -> SpectralField:
    """Centered Gaussian field with E|f^(omega)|^2 = <omega>^(-d-2*regularity).

    Such a field is a C^(regularity-) sample; used for synthetic regularity
    experiments.
    """
    sampler_like = lattice.weight2 ** (-(lattice.d + 2.0 * regularity) / 4.0)
    half = lattice.half_indices
    conj = lattice.half_indices_conj
    zero_flat = np.ravel_multi_index(lattice.zero_index, lattice.shape)
    flat = np.zeros(lattice.side**lattice.d, dtype=np.complex128)
    amp = sampler_like.ravel()
    z = rng.standard_normal((2, half.size + 1))
    flat[half] = (z[0, :-1] + 1j * z[1, :-1]) * amp[half] / np.sqrt(2.0)
    flat[conj] = np.conj(flat[half])
    flat[zero_flat] = z[0, -1] * amp[zero_flat]
    cube = flat.reshape(lattice.shape) * lattice.mask
    return SpectralField(lattice, cube)


# -- Hermite / Wick calculus ---------------------------------------------------


def hermite(p: int, x, T) -> np.ndarray:
    """Generalized Hermite polynomial H_p(x, T).

    Defined by H_0 = 1 and H_p = x H_{p-1} - T dH_{p-1}/dx, equivalently the
    stable three-term recursion H_p = x H_{p-1} - (p-1) T H_{p-2}; H_2 = x^2-T,
    H_3 = x^3 - 3xT.
    """
    if p < 0:
        raise ValueError("order must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    prev = np.ones(np.broadcast_shapes(x.shape, T.shape))
    if p == 0:
        return prev
    cur = x * prev
    for order in range(2, p + 1):
        prev, cur = cur, x * cur - (order - 1) * T * prev
    return cur


def wick_power(f: SpectralField, p: int, c: float) -> SpectralField:
    """Renormalized pointwise power H_p(f(x), c), truncated back to the lattice.

    p = 2 with c equal to the lattice variance sum is the Wick square; p = 3
    gives the Wick cube integrand.  Computed on a grid that is alias-free for
    degree-p products.
    """
    if p not in (2, 3):
        raise ValueError(f"unsupported Wick power {p}")
    if c < 0:
        raise ValueError("renormalization constant must be >= 0")
    lattice = f.lattice
    grid = lattice.grid_size(degree=p)
    phys = cube_to_grid(lattice, f.coeffs, grid)
    return SpectralField(lattice, grid_to_cube(lattice, hermite(p, phys, c)))
