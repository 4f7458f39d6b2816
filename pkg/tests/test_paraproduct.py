import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phi4sim.fields import constant_field, mode_pair_field, zero_field
from phi4sim.lattice import FrequencyLattice, is_hermitian
from phi4sim.paraproduct import (ResonantWeight, full_product, para_high,
                                 para_low, resonant, resonant_weight)
from conftest import random_field


def test_bony_exactness(lat3_4, rng):
    for _ in range(10):
        f, g = random_field(lat3_4, rng), random_field(lat3_4, rng)
        total = para_low(f, g).coeffs + resonant(f, g).coeffs + \
            para_high(f, g).coeffs
        assert np.max(np.abs(total - full_product(f, g).coeffs)) < 1e-12


def test_constants_case(lat3_4):
    f, g = constant_field(lat3_4, 2.0), constant_field(lat3_4, -1.5)
    assert np.max(np.abs(para_low(f, g).coeffs)) == 0.0
    assert np.max(np.abs(para_high(f, g).coeffs)) == 0.0
    r = resonant(f, g)
    assert np.isclose(r.coeffs[lat3_4.zero_index], -3.0)


def test_zero_factor(lat3_4, rng):
    f = random_field(lat3_4, rng)
    z = zero_field(lat3_4)
    for op in (para_low, para_high, resonant):
        assert np.max(np.abs(op(f, z).coeffs)) == 0.0


def test_resonant_symmetry_and_hermitian(lat3_4, rng):
    f, g = random_field(lat3_4, rng), random_field(lat3_4, rng)
    a, b = resonant(f, g), resonant(g, f)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-13
    assert is_hermitian(lat3_4, a.coeffs, tol=1e-14)


def test_bilinearity(lat3_4, rng):
    f1, f2, g = (random_field(lat3_4, rng) for _ in range(3))
    lhs = resonant(f1 + f2, g).coeffs
    rhs = resonant(f1, g).coeffs + resonant(f2, g).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_lattice_mismatch(lat3_4, rng):
    f = random_field(lat3_4, rng)
    g = zero_field(FrequencyLattice(3, 3))
    with pytest.raises(ValueError):
        resonant(f, g)


def test_weight_range_and_symmetry():
    w = ResonantWeight()
    assert w((0, 0, 0), (0, 0, 0)) == 1.0
    assert resonant_weight((100, 0, 0), (1, 0, 0)) == 0.0
    vals = []
    rng = np.random.default_rng(0)
    for _ in range(60):
        a = rng.integers(-20, 21, size=3)
        b = rng.integers(-20, 21, size=3)
        va, vb = float(w(a, b)), float(w(b, a))
        assert 0.0 <= va <= 1.0 + 1e-15
        assert np.isclose(va, vb, atol=1e-14)
        vals.append(va)
    assert max(vals) > 0


@given(st.integers(min_value=0, max_value=200),
       st.integers(min_value=0, max_value=200))
@settings(max_examples=150, deadline=None)
def test_weight_vanishing_region(r1, r2):
    # outside the unit-scale ball the weight needs |w1|/|w2| in [9/64, 64/9]
    w = ResonantWeight()
    val = float(w.radial(np.float64(r1), np.float64(r2)))
    assert 0.0 <= val <= 1.0 + 1e-15
    if (r1 > 8 / 3 or r2 > 8 / 3) and (r2 == 0 or r1 == 0 or
                                       not 9 / 64 <= r1 / r2 <= 64 / 9):
        assert val == 0.0


def test_weight_diagonal_is_one():
    w = ResonantWeight()
    r = np.linspace(0.0, 300.0, 1000)
    assert np.max(np.abs(w.radial(r, r) - 1.0)) <= 1e-12


def test_single_mode_consistency(lat3_8):
    w1, w2 = (2, 0, 0), (0, 2, 0)
    a, b = 0.7 + 0.2j, -0.3 + 0.5j
    f, g = mode_pair_field(lat3_8, w1, a), mode_pair_field(lat3_8, w2, b)
    r = resonant(f, g)
    expect = resonant_weight(w1, w2) * a * b
    assert abs(r[(2, 2, 0)] - expect) < 1e-13
