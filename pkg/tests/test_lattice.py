import numpy as np
import pytest
from hypothesis import given, strategies as st

from phi4sim.lattice import (FrequencyLattice, hermitize, is_hermitian,
                             next_fast_grid_size)


def test_contains_zero_and_negation(lat3_4):
    assert lat3_4.contains((0, 0, 0))
    for omega in lat3_4.frequencies[::7]:
        assert lat3_4.contains(-omega)


def test_weight_formula(lat3_4):
    idx = lat3_4.index_of((1, 2, 0))
    assert lat3_4.weight2[idx] == 1.0 + 4.0 * np.pi**2 * 5.0
    assert np.all(lat3_4.weight >= 1.0)


def test_euclidean_vs_max_ball():
    ball = FrequencyLattice(d=2, n=3)
    cube = FrequencyLattice(d=2, n=3, norm="max")
    assert not ball.contains((3, 3))
    assert cube.contains((3, 3))
    assert cube.size == 49


def test_enumeration_deterministic():
    a = FrequencyLattice(d=3, n=3).frequencies
    b = FrequencyLattice(d=3, n=3).frequencies
    assert np.array_equal(a, b)


def test_half_lattice_partition(lat3_4):
    half = lat3_4.half_indices
    conj = lat3_4.half_indices_conj
    zero = np.ravel_multi_index(lat3_4.zero_index, lat3_4.shape)
    combined = np.concatenate([half, conj, [zero]])
    member = np.flatnonzero(lat3_4.mask.ravel())
    assert sorted(combined) == sorted(member)


def test_contains_many_matches_scalar(lat3_4, rng):
    vecs = rng.integers(-6, 7, size=(50, 3))
    batch = lat3_4.contains_many(vecs)
    single = np.array([lat3_4.contains(v) for v in vecs])
    assert np.array_equal(batch, single)


@given(st.integers(min_value=1, max_value=4000))
def test_next_fast_grid_size(m):
    k = next_fast_grid_size(m)
    assert k >= m
    r = k
    for p in (2, 3, 5):
        while r % p == 0:
            r //= p
    assert r == 1


def test_hermitize_projects(lat3_4, rng):
    cube = rng.standard_normal(lat3_4.shape) + 1j * rng.standard_normal(lat3_4.shape)
    h = hermitize(lat3_4, cube)
    assert is_hermitian(lat3_4, h, tol=1e-14)
    assert np.allclose(hermitize(lat3_4, h), h)


def test_validation_errors():
    with pytest.raises(ValueError):
        FrequencyLattice(d=0, n=2)
    with pytest.raises(ValueError):
        FrequencyLattice(d=3, n=-1)
    with pytest.raises(ValueError):
        FrequencyLattice(d=3, n=2, norm="taxicab")


def test_grid_size_rules(lat3_8):
    assert lat3_8.min_grid_size(3) == 4 * 8 + 1
    assert lat3_8.grid_size(3) >= lat3_8.min_grid_size(3)
    assert lat3_8.min_grid_size(2) == 3 * 8 + 1
