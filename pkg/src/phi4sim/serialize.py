"""Deterministic binary container for diagram sets.

Layout: magic line, a JSON header (lattice descriptor, time grid, labels,
constants, provenance, array manifest), then the raw little-endian coefficient
arrays in manifest order.  No timestamps anywhere, so identical runs produce
identical bytes.
"""

from __future__ import annotations

import json

import numpy as np

from .lattice import FrequencyLattice
from .fields import SpectralField
from .gaussian import FieldTrajectory
from .diagrams import DiagramSet

MAGIC = b"PHI4DIAGSET/1\n"


def save_diagram_set(path: str, ds: DiagramSet) -> None:
    labels = sorted(ds.trajectories)
    manifest = []
    blobs = []
    for label in labels:
        traj = ds.trajectories[label]
        arr = np.stack([f.coeffs for f in traj.fields]).astype("<c16")
        manifest.append({"label": label, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = {
        "lattice": {"d": ds.lattice.d, "n": ds.lattice.n, "norm": ds.lattice.norm},
        "times": [float(t) for t in ds.times],
        "constants": {"c": ds.c, "cprime": ds.cprime,
                      "cprime_plain": ds.cprime_plain},
        "provenance": ds.provenance,
        "arrays": manifest,
    }
    head = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(head).to_bytes(8, "little"))
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def load_diagram_set(path: str) -> DiagramSet:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a diagram-set file")
        head_len = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(head_len).decode())
        lat = FrequencyLattice(**header["lattice"])
        times = np.asarray(header["times"])
        trajectories = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape))
            arr = np.frombuffer(fh.read(count * 16), dtype="<c16").reshape(shape)
            fields = tuple(SpectralField(lat, np.ascontiguousarray(arr[i]))
                           for i in range(shape[0]))
            trajectories[entry["label"]] = FieldTrajectory(
                lat, times, fields, label=entry["label"])
    consts = header["constants"]
    return DiagramSet(lat, times, trajectories, consts["c"], consts["cprime"],
                      consts["cprime_plain"], header["provenance"])
