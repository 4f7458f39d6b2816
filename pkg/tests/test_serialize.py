import warnings

import numpy as np
import pytest

from phi4sim.diagrams import build_diagrams
from phi4sim.gaussian import NoiseSeed
from phi4sim.lattice import FrequencyLattice
from phi4sim.serialize import load_diagram_set, save_diagram_set


def test_roundtrip(tmp_path):
    lat = FrequencyLattice(2, 2)
    times = np.arange(0.0, 2.5, 0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ds = build_diagrams(lat, times, NoiseSeed(3), burn_in=2.0)
    path = tmp_path / "set.bin"
    save_diagram_set(str(path), ds)
    back = load_diagram_set(str(path))
    assert back.lattice == ds.lattice
    assert np.allclose(back.times, ds.times)
    assert back.c == ds.c and back.cprime == ds.cprime
    for lbl, traj in ds.trajectories.items():
        for fa, fb in zip(traj.fields, back.trajectories[lbl].fields):
            assert np.array_equal(fa.coeffs, fb.coeffs)


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOTADIAGRAM\n" + b"0" * 64)
    with pytest.raises(ValueError, match="not a diagram-set"):
        load_diagram_set(str(p))
