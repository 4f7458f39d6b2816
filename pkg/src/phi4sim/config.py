"""Experiment configuration: a flat key = value text format, strictly parsed.

Unknown keys are rejected; values round-trip losslessly (ints, floats, strings
and comma/semicolon lists).  The canonical serialization doubles as the input
to the config hash embedded in every report.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def _parse_probes(text: str) -> tuple[tuple[int, ...], ...]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            out.append(tuple(int(x) for x in part.split(",")))
    return tuple(out)


def _fmt_probes(probes) -> str:
    return ";".join(",".join(str(x) for x in p) for p in probes)


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale experiment profile; defaults follow the verification suite."""

    d: int = 3
    n: int = 8
    norm: str = "euclidean"
    dt: float = 1.0 / 64.0
    burn_in: float = 14.0
    replicas: int = 10_000
    report_nodes: int = 1          # trajectory nodes averaged per replica
    node_stride: int = 4           # grid steps between reporting nodes
    seed: int = 0
    diagrams: tuple[str, ...] = ("linear", "square")
    probes: tuple[tuple[int, ...], ...] = ()   # increment/lag probe modes
    lag_steps: tuple[int, ...] = (1, 2, 4, 8, 16)
    fit_min: float = 4.0
    fit_max: float = 16.0
    oversample: int = 2
    cprime_variant: str = "resonant"
    confidence: float = 0.95
    threads: int = 1
    out: str = "out"
    fmt: str = "csv"

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ConfigError("d must be >= 1 and n >= 0")
        if self.dt <= 0 or self.burn_in < 0:
            raise ConfigError("dt must be > 0 and burn_in >= 0")
        if self.replicas < 1 or self.report_nodes < 1 or self.node_stride < 1:
            raise ConfigError("replicas, report_nodes, node_stride must be >= 1")
        if self.norm not in ("euclidean", "max"):
            raise ConfigError(f"unknown norm {self.norm!r}")
        if self.cprime_variant not in ("plain", "resonant"):
            raise ConfigError(f"unknown cprime variant {self.cprime_variant!r}")
        if not 0.5 < self.confidence < 1.0:
            raise ConfigError("confidence must be in (0.5, 1)")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        from .stepper import DIAGRAMS

        for lbl in self.diagrams:
            if lbl not in DIAGRAMS:
                raise ConfigError(f"unknown diagram {lbl!r}")
        for p in self.probes:
            if len(p) != self.d:
                raise ConfigError(f"probe {p} has wrong dimension")

    # -- text round trip -----------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "probes":
                v = _fmt_probes(v)
            elif f.name in ("diagrams",):
                v = ",".join(v)
            elif f.name == "lag_steps":
                v = ",".join(str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            kwargs[key] = _convert(key, val)
        return cls(**kwargs)

    def replaced(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def config_hash(self) -> str:
        """Hash of the result-determining fields (emission knobs excluded:
        out, threads and fmt change where/how results land, never the values)."""
        lines = [ln for ln in self.to_text().splitlines()
                 if not ln.startswith(("out ", "threads ", "fmt "))]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]

    def chunk_size(self) -> int:
        """Replica block advanced together; fixed by the lattice size alone so
        that reduction order (and hence output bytes) never depends on the
        worker count."""
        cube_bytes = 16 * (2 * self.n + 1) ** self.d
        return int(max(1, min(64, (1 << 21) // cube_bytes)))


def _convert(key: str, val: str):
    if key == "probes":
        return _parse_probes(val)
    if key == "diagrams":
        return tuple(s.strip() for s in val.split(",") if s.strip())
    if key == "lag_steps":
        return tuple(int(s) for s in val.split(",") if s.strip())
    if key in ("d", "n", "replicas", "report_nodes", "node_stride", "seed",
               "oversample", "threads"):
        try:
            return int(val)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer, got {val!r}") from exc
    if key in ("dt", "burn_in", "fit_min", "fit_max", "confidence"):
        try:
            return float(val)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected float, got {val!r}") from exc
    return val


def default_probes(d: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Deterministic probe modes spanning |omega| from 1 to n along mixed axes."""
    raw = [(1,) + (0,) * (d - 1), (0,) * (d - 1) + (2,)]
    if d >= 2:
        raw.append((2,) * min(d, 2) + (0,) * (d - 2))
    raw.append((0,) * (d - 1) + (min(4, n),))
    raw.append((min(3, n),) * (d > 0) + (min(2, n),) * (d - 1))
    out = []
    for p in raw:
        p = tuple(p)[:d]
        if len(p) < d:
            p = p + (0,) * (d - len(p))
        if sum(x * x for x in p) <= n * n and p not in out and any(p):
            out.append(p)
    return tuple(out)
