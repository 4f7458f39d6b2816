import numpy as np
from hypothesis import given, settings, strategies as st

from phi4sim import convolution as cv
from phi4sim.lattice import FrequencyLattice


def test_single_point_lattice():
    lat = FrequencyLattice(3, 0)
    assert cv.convolution_sum(lat, (0, 0, 0), 1.0, 5.0) == 1.0
    assert cv.convolution_sum(lat, (1, 0, 0), 1.0, 5.0) == 0.0


@given(st.integers(min_value=-8, max_value=8),
       st.integers(min_value=-8, max_value=8),
       st.integers(min_value=-8, max_value=8),
       st.booleans())
@settings(max_examples=25, deadline=None)
def test_table_matches_direct(x, y, z, resonant):
    lat = FrequencyLattice(3, 4)
    om = (x, y, z)
    a = cv.convolution_sum(lat, om, 2.0, 2.0, resonant)
    b = cv.convolution_sum_direct(lat, om, 2.0, 2.0, resonant)
    assert np.isclose(a, b, rtol=1e-10, atol=1e-16)


def test_resonant_below_plain(lat3_8):
    for om in [(2, 1, 0), (5, 0, 0), (0, 3, 3)]:
        r = cv.convolution_sum(lat3_8, om, 4.0, 2.0, resonant=True)
        p = cv.convolution_sum(lat3_8, om, 4.0, 2.0, resonant=False)
        assert 0.0 < r <= p + 1e-15


def test_lemma_contrast_small_scale():
    # the restricted sum keeps full decay where the unrestricted saturates
    lat = FrequencyLattice(3, 16)
    radii = range(2, 9)
    plain = cv.normalized_ray(lat, 4.0, 2.0, -3.0, radii)
    res = cv.normalized_ray(lat, 4.0, 2.0, -3.0, radii, resonant=True)
    assert plain[-1] / plain[0] > 2.0
    assert np.all(np.diff(plain) > 0)
    assert res[-1] <= 1.5 * res[0]


def test_shell_spread_22(lat3_8):
    mx, mn = cv.normalized_shell_spread(lat3_8, 2.0, 2.0, -1.0, 8.0)
    assert mx / mn <= 10.0
