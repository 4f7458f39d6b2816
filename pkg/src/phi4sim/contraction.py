"""Exact second moments of diagram chaos components by Wick-pairing enumeration.

A ContractionGraph describes one homogeneous-chaos component of a diagram as a
rooted kernel graph: noise leaves carrying free frequencies, internal vertices
whose times are integrated out, heat-kernel edges pointing from later to
earlier times, comparable-scale weights, and truncation constraints.  The
second moment at frequency omega is the sum over all bijective pairings of the
leaves of the graph against the leaves of its complex-conjugate copy at
-omega; each pairing glues the two copies into a closed graph whose time
integral is a rational function of the squared weights, evaluated exactly by a
down-set recursion over the partial order of integration variables.

Frequencies on edges are integer linear combinations of the leaf/internal
symbols and the root frequency; Kirchhoff conservation at every vertex is a
structural invariant checked by `validate`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyLattice
from .dyadic import DEFAULT_PARTITION, DyadicPartition
from .paraproduct import ResonantWeight

ROOT = "root"

# vertex kinds
INTERNAL = "internal"  # time integrated, belongs to one copy
LEAF = "leaf"          # noise insertion, глued against the opposite copy
CONTRACTED = "contracted"  # an already-contracted pair inside one copy


@dataclass(frozen=True)
class Combo:
    """Integer linear form  root_coeff * omega + sum_i coeffs[i] * symbol_i."""

    root: int
    coeffs: tuple[int, ...]

    def canonical(self, n_leaves: int) -> tuple[int, ...]:
        """Coefficients after substituting omega = sum of leaf symbols."""
        out = list(self.coeffs)
        for i in range(n_leaves):
            out[i] += self.root
        return tuple(out)

    def __neg__(self) -> "Combo":
        return Combo(-self.root, tuple(-c for c in self.coeffs))

    def __add__(self, other: "Combo") -> "Combo":
        return Combo(self.root + other.root,
                     tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))


def combo(n_symbols: int, *terms: tuple[int, int], root: int = 0) -> Combo:
    """Build a Combo over n_symbols from (symbol index, coefficient) terms."""
    coeffs = [0] * n_symbols
    for idx, c in terms:
        coeffs[idx] += c
    return Combo(root, tuple(coeffs))


@dataclass(frozen=True)
class Edge:
    upper: str  # later endpoint (ROOT or a vertex name)
    lower: str  # earlier endpoint
    freq: Combo


@dataclass(frozen=True)
class ContractionGraph:
    """One chaos component: k noise leaves, internal vertices, kernel edges.

    `multiplicity` is the combinatorial prefactor of the component (identical
    contraction terms); `resonant_pairs` lists frequency pairs carrying the
    comparable-scale weight; `lattice_constraints` lists internal line
    frequencies that the construction truncates to the lattice (leaf symbols
    and internal symbols are constrained automatically).
    """

    name: str
    n_leaves: int
    n_internal_symbols: int
    multiplicity: int
    vertices: tuple[tuple[str, str], ...]  # (name, kind), excluding the root
    edges: tuple[Edge, ...]
    resonant_pairs: tuple[tuple[Combo, Combo], ...] = ()
    lattice_constraints: tuple[Combo, ...] = ()

    @property
    def n_symbols(self) -> int:
        return self.n_leaves + self.n_internal_symbols

    @property
    def leaf_names(self) -> tuple[str, ...]:
        return tuple(name for name, kind in self.vertices if kind == LEAF)

    def validate(self) -> None:
        """Check per-vertex frequency conservation (Kirchhoff rule).

        With in-edges counted + and out-edges counted -, the net flux must be
        the leaf's own symbol at a leaf, zero at internal and contracted
        vertices, and -omega at the root (all modulo omega = sum of leaf
        symbols).
        """
        kinds = dict(self.vertices)
        zero = (0,) * self.n_symbols
        names = [ROOT] + [name for name, _ in self.vertices]
        leaf_index: dict[str, int] = {}
        for name, kind in self.vertices:
            if kind == LEAF:
                leaf_index[name] = len(leaf_index)
        if len(leaf_index) != self.n_leaves:
            raise ValueError(f"{self.name}: leaf count mismatch")
        for v in names:
            net = [0] * self.n_symbols
            seen = False
            for e in self.edges:
                if e.upper not in names or e.lower not in names:
                    raise ValueError(f"{self.name}: edge endpoint missing")
                if e.lower == v:
                    seen = True
                    for i, c in enumerate(e.freq.canonical(self.n_leaves)):
                        net[i] += c
                if e.upper == v:
                    seen = True
                    for i, c in enumerate(e.freq.canonical(self.n_leaves)):
                        net[i] -= c
            if v == ROOT:
                expect = [-1] * self.n_leaves + [0] * self.n_internal_symbols
            elif kinds[v] == LEAF:
                expect = [0] * self.n_symbols
                expect[leaf_index[v]] = 1
            else:
                expect = list(zero)
            if not seen:
                raise ValueError(f"{self.name}: isolated vertex {v}")
            if net != expect:
                raise ValueError(
                    f"{self.name}: frequency conservation fails at {v}: "
                    f"net {net} != {expect}")


class EnumerationTooLarge(ValueError):
    """Raised when a pairing enumeration would exceed the configured cap."""


def _down_set_integral(n_vertices: int, edges: list[tuple[int, int, float]]) -> float:
    """Integral over all time orderings of prod exp(-(t_up - t_lo) * rate).

    Vertices are indexed 0..n-1 (free times below the common root time); an
    upper index of -1 denotes the root.  Summing over linear extensions of the
    induced partial order turns into a recursion over down-sets: the earliest
    block S contributes 1/cut(S) where cut(S) is the total rate entering S
    from outside.
    """
    full = frozenset(range(n_vertices))
    memo: dict[frozenset, float] = {frozenset(): 1.0}

    def solve(s: frozenset) -> float:
        val = memo.get(s)
        if val is not None:
            return val
        cut = 0.0
        for up, lo, rate in edges:
            if lo in s and (up == -1 or up not in s):
                cut += rate
        total = 0.0
        for v in s:
            # v is maximal in s when no edge descends to it from inside s
            if any(lo == v and up != -1 and up in s for up, lo, _ in edges):
                continue
            total += solve(s - {v})
        if cut <= 0:
            raise ValueError("graph component not anchored to the root")
        val = total / cut
        memo[s] = val
        return val

    return solve(full)


def _down_set_structure(n_vertices: int, edge_ends: list[tuple[int, int]]):
    """Down-closed subsets (as bitmasks, ascending popcount) with, per subset,
    the maximal vertices and the indices of edges crossing into it."""
    subsets = []
    for s in range(1, 1 << n_vertices):
        down_closed = all(
            not (up != -1 and (s >> up) & 1 and not (s >> lo) & 1)
            for up, lo in edge_ends)
        if down_closed:
            subsets.append(s)
    subsets.sort(key=int.bit_count)
    structure = []
    for s in subsets:
        cut_idx = [i for i, (up, lo) in enumerate(edge_ends)
                   if (s >> lo) & 1 and (up == -1 or not (s >> up) & 1)]
        maximal = [v for v in range(n_vertices) if (s >> v) & 1 and not any(
            lo == v and up != -1 and (s >> up) & 1 for up, lo in edge_ends)]
        structure.append((s, cut_idx, maximal))
    return structure


def _down_set_integral_batch(n_vertices: int, edge_ends: list[tuple[int, int]],
                             rates: np.ndarray) -> np.ndarray:
    """Vectorized down-set recursion: rates has shape (n_edges, A)."""
    structure = _down_set_structure(n_vertices, edge_ends)
    a = rates.shape[1]
    table: dict[int, np.ndarray] = {0: np.ones(a)}
    for s, cut_idx, maximal in structure:
        cut = rates[cut_idx].sum(axis=0)
        total = np.zeros(a)
        for v in maximal:
            total += table[s & ~(1 << v)]
        table[s] = total / cut
    return table[(1 << n_vertices) - 1]


def second_moment(graph: ContractionGraph, lattice: FrequencyLattice, omega,
                  right: ContractionGraph | None = None,
                  partition: DyadicPartition = DEFAULT_PARTITION,
                  cap: int = 2_000_000) -> float:
    """Exact E[ X^(t, omega) * conj(Y^(t, omega)) ] for chaos components X, Y.

    Y defaults to X; distinct chaos orders are orthogonal and return 0.  The
    estimate `pairings * assignments` is checked against `cap` before
    enumerating; the error message carries the size estimate.
    """
    left = graph
    right = right if right is not None else graph
    if left.n_leaves != right.n_leaves:
        return 0.0
    k = left.n_leaves
    d = lattice.d
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    freqs = lattice.frequencies
    m_l, m_r = left.n_internal_symbols, right.n_internal_symbols
    n_free = (k - 1) + m_l + m_r
    n_assign = len(freqs) ** n_free if n_free else 1
    estimate = math.factorial(k) * n_assign
    if estimate > cap:
        raise EnumerationTooLarge(
            f"{left.name} x {right.name}: {math.factorial(k)} pairings x "
            f"{n_assign} assignments = {estimate} > cap {cap}")

    # assignment table: (A, k + m_l + m_r, d), leaf symbols then internals
    if n_free:
        grids = np.meshgrid(*([np.arange(len(freqs))] * n_free), indexing="ij")
        choice = np.stack([g.ravel() for g in grids], axis=1)
        parts = freqs[choice]  # (A, n_free, d)
    else:
        parts = np.zeros((1, 0, d), dtype=np.int64)
    lead = parts[:, : k - 1]
    last_leaf = omega - lead.sum(axis=1)
    syms = np.concatenate([lead, last_leaf[:, None], parts[:, k - 1:]], axis=1)
    keep = lattice.contains_many(last_leaf)

    weight = ResonantWeight(partition)

    def copy_factors(g: ContractionGraph, sym_sel, om):
        """(A,) weight product and membership mask for one copy."""
        w = np.ones(sym_sel.shape[0])
        ok = np.ones(sym_sel.shape[0], dtype=bool)
        for ca, cb in g.resonant_pairs:
            va = ca.root * om + np.tensordot(sym_sel, ca.coeffs, axes=(1, 0))
            vb = cb.root * om + np.tensordot(sym_sel, cb.coeffs, axes=(1, 0))
            ra = np.sqrt(np.sum(va.astype(np.float64) ** 2, axis=-1))
            rb = np.sqrt(np.sum(vb.astype(np.float64) ** 2, axis=-1))
            w = w * weight.radial(ra, rb)
        for c in g.lattice_constraints:
            v = c.root * om + np.tensordot(sym_sel, c.coeffs, axes=(1, 0))
            ok &= lattice.contains_many(v)
        return w, ok

    left_syms = syms[:, : k + m_l]
    wl, okl = copy_factors(left, left_syms, omega)
    keep &= okl & (wl > 0.0)
    syms = syms[keep]
    wl = wl[keep]
    if syms.shape[0] == 0:
        return 0.0
    left_syms = syms[:, : k + m_l]
    internal_r = syms[:, k + m_l:]

    # glued vertex indexing: left internals, right internals, contracted pairs
    left_internal = [name for name, kind in left.vertices if kind != LEAF]
    right_internal = [name for name, kind in right.vertices if kind != LEAF]
    l_index = {name: i for i, name in enumerate(left_internal)}
    r_index = {name: len(left_internal) + i for i, name in enumerate(right_internal)}
    pair_base = len(left_internal) + len(right_internal)
    n_glued = pair_base + k
    left_pos = {name: i for i, name in enumerate(left.leaf_names)}
    right_pos = {name: i for i, name in enumerate(right.leaf_names)}

    total = 0.0
    for sigma in itertools.permutations(range(k)):
        r_leaf = -syms[:, list(sigma)]
        right_syms = np.concatenate([r_leaf, internal_r], axis=1)
        wr, okr = copy_factors(right, right_syms, -omega)
        sel = okr & (wr > 0.0)
        if not np.any(sel):
            continue
        edge_ends: list[tuple[int, int]] = []
        rate_rows = []
        for is_right, g, s_arr, om, v_index, leaf_pos in (
                (False, left, left_syms[sel], omega, l_index, left_pos),
                (True, right, right_syms[sel], -omega, r_index, right_pos)):

            def glued(endpoint: str) -> int:
                if endpoint == ROOT:
                    return -1
                if endpoint in leaf_pos:
                    j = leaf_pos[endpoint]
                    return pair_base + (sigma[j] if is_right else j)
                return v_index[endpoint]

            for e in g.edges:
                vec = e.freq.root * om + np.tensordot(s_arr, e.freq.coeffs,
                                                      axes=(1, 0))
                rate_rows.append(
                    1.0 + 4.0 * np.pi**2 * np.sum(vec.astype(np.float64) ** 2,
                                                  axis=-1))
                edge_ends.append((glued(e.upper), glued(e.lower)))
        vals = _down_set_integral_batch(n_glued, edge_ends, np.stack(rate_rows))
        total += float(np.sum(wl[sel] * wr[sel] * vals))
    return float(left.multiplicity * right.multiplicity * total)

# -- the standard component graphs ---------------------------------------------
#
# Leaf symbols come first (index 0..k-1), internal contraction frequencies
# after.  Edge frequency conventions follow Kirchhoff conservation with the
# root frequency equal to the sum of the leaf symbols.


def _c(n_symbols: int, *terms, root: int = 0) -> Combo:
    return combo(n_symbols, *terms, root=root)


def graph_linear() -> ContractionGraph:
    """Chaos-1 graph of the stationary linear solution."""
    return ContractionGraph(
        name="linear", n_leaves=1, n_internal_symbols=0, multiplicity=1,
        vertices=(("A", LEAF),),
        edges=(Edge(ROOT, "A", _c(1, (0, 1))),),
    )


def graph_wick_square() -> ContractionGraph:
    """Chaos-2 graph of the Wick square."""
    return ContractionGraph(
        name="wick_square", n_leaves=2, n_internal_symbols=0, multiplicity=1,
        vertices=(("A", LEAF), ("B", LEAF)),
        edges=(Edge(ROOT, "A", _c(2, (0, 1))), Edge(ROOT, "B", _c(2, (1, 1)))),
    )


def graph_tree() -> ContractionGraph:
    """Chaos-3 graph of the heat-integrated Wick cube."""
    return ContractionGraph(
        name="tree", n_leaves=3, n_internal_symbols=0, multiplicity=1,
        vertices=(("V", INTERNAL), ("A", LEAF), ("B", LEAF), ("C", LEAF)),
        edges=(
            Edge(ROOT, "V", _c(3, root=1)),
            Edge("V", "A", _c(3, (0, 1))),
            Edge("V", "B", _c(3, (1, 1))),
            Edge("V", "C", _c(3, (2, 1))),
        ),
    )


def graph_tree_lin_chaos4() -> ContractionGraph:
    """Chaos-4 part of (tree resonant linear)."""
    nu1 = _c(4, (0, 1), (1, 1), (2, 1))
    return ContractionGraph(
        name="tree_lin_chaos4", n_leaves=4, n_internal_symbols=0, multiplicity=1,
        vertices=(("V", INTERNAL), ("A", LEAF), ("B", LEAF), ("C", LEAF), ("D", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(4, (0, 1))),
            Edge("V", "B", _c(4, (1, 1))),
            Edge("V", "C", _c(4, (2, 1))),
            Edge(ROOT, "D", _c(4, (3, 1))),
        ),
        resonant_pairs=((nu1, _c(4, (3, 1))),),
        lattice_constraints=(nu1,),
    )


def graph_tree_lin_chaos2() -> ContractionGraph:
    """Chaos-2 part of (tree resonant linear): one leaf contracted."""
    nu1 = _c(3, (0, 1), (1, 1), (2, 1))  # symbols: s0, s1 leaves; c = symbol 2
    return ContractionGraph(
        name="tree_lin_chaos2", n_leaves=2, n_internal_symbols=1, multiplicity=3,
        vertices=(("V", INTERNAL), ("C", CONTRACTED), ("A", LEAF), ("B", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(3, (0, 1))),
            Edge("V", "B", _c(3, (1, 1))),
            Edge("V", "C", _c(3, (2, 1))),
            Edge(ROOT, "C", _c(3, (2, -1))),
        ),
        resonant_pairs=((nu1, _c(3, (2, -1))),),
        lattice_constraints=(nu1,),
    )


def graph_square_square_chaos4() -> ContractionGraph:
    """Chaos-4 part of (heat-integrated square resonant square)."""
    nu1 = _c(4, (0, 1), (1, 1))
    nu2 = _c(4, (2, 1), (3, 1))
    return ContractionGraph(
        name="square_square_chaos4", n_leaves=4, n_internal_symbols=0,
        multiplicity=1,
        vertices=(("V", INTERNAL), ("A", LEAF), ("B", LEAF), ("C", LEAF), ("D", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(4, (0, 1))),
            Edge("V", "B", _c(4, (1, 1))),
            Edge(ROOT, "C", _c(4, (2, 1))),
            Edge(ROOT, "D", _c(4, (3, 1))),
        ),
        resonant_pairs=((nu1, nu2),),
        lattice_constraints=(nu1, nu2),
    )


def graph_square_square_chaos2() -> ContractionGraph:
    """Chaos-2 part of (heat-integrated square resonant square)."""
    nu1 = _c(3, (0, 1), (2, 1))   # s0 inner leaf, s1 outer leaf, c = symbol 2
    nu2 = _c(3, (1, 1), (2, -1))
    return ContractionGraph(
        name="square_square_chaos2", n_leaves=2, n_internal_symbols=1,
        multiplicity=4,
        vertices=(("V", INTERNAL), ("C", CONTRACTED), ("A", LEAF), ("B", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(3, (0, 1))),
            Edge("V", "C", _c(3, (2, 1))),
            Edge(ROOT, "C", _c(3, (2, -1))),
            Edge(ROOT, "B", _c(3, (1, 1))),
        ),
        resonant_pairs=((nu1, nu2),),
        lattice_constraints=(nu1, nu2),
    )


def graph_tree_square_chaos5() -> ContractionGraph:
    """Chaos-5 part of (tree resonant square)."""
    nu1 = _c(5, (0, 1), (1, 1), (2, 1))
    nu2 = _c(5, (3, 1), (4, 1))
    return ContractionGraph(
        name="tree_square_chaos5", n_leaves=5, n_internal_symbols=0,
        multiplicity=1,
        vertices=(("V", INTERNAL), ("A", LEAF), ("B", LEAF), ("C", LEAF),
                  ("D", LEAF), ("E", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(5, (0, 1))),
            Edge("V", "B", _c(5, (1, 1))),
            Edge("V", "C", _c(5, (2, 1))),
            Edge(ROOT, "D", _c(5, (3, 1))),
            Edge(ROOT, "E", _c(5, (4, 1))),
        ),
        resonant_pairs=((nu1, nu2),),
        lattice_constraints=(nu1, nu2),
    )


def graph_tree_square_chaos3() -> ContractionGraph:
    """Chaos-3 part of (tree resonant square): one cube leg glued to the square."""
    nu1 = _c(4, (0, 1), (1, 1), (3, 1))  # s0, s1 cube leaves; s2 outer; c = 3
    nu2 = _c(4, (2, 1), (3, -1))
    return ContractionGraph(
        name="tree_square_chaos3", n_leaves=3, n_internal_symbols=1,
        multiplicity=6,
        vertices=(("V", INTERNAL), ("C", CONTRACTED), ("A", LEAF), ("B", LEAF),
                  ("D", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(4, (0, 1))),
            Edge("V", "B", _c(4, (1, 1))),
            Edge("V", "C", _c(4, (3, 1))),
            Edge(ROOT, "C", _c(4, (3, -1))),
            Edge(ROOT, "D", _c(4, (2, 1))),
        ),
        resonant_pairs=((nu1, nu2),),
        lattice_constraints=(nu1, nu2),
    )


def graph_tree_square_chaos1_raw() -> ContractionGraph:
    """Chaos-1 part of (tree resonant square) BEFORE renormalization.

    The renormalized component is 6*(this graph with multiplicity 1) minus the
    divergent-constant multiple of the linear graph; see
    tree_square_chaos1_moment.
    """
    nu1 = _c(3, (0, 1), (1, 1), (2, 1))  # s0 free leaf; c1 = 1, c2 = 2
    nu2 = _c(3, (1, -1), (2, -1))
    return ContractionGraph(
        name="tree_square_chaos1", n_leaves=1, n_internal_symbols=2,
        multiplicity=6,
        vertices=(("V", INTERNAL), ("C1", CONTRACTED), ("C2", CONTRACTED),
                  ("A", LEAF)),
        edges=(
            Edge(ROOT, "V", nu1),
            Edge("V", "A", _c(3, (0, 1))),
            Edge("V", "C1", _c(3, (1, 1))),
            Edge(ROOT, "C1", _c(3, (1, -1))),
            Edge("V", "C2", _c(3, (2, 1))),
            Edge(ROOT, "C2", _c(3, (2, -1))),
        ),
        resonant_pairs=((nu1, nu2),),
        lattice_constraints=(nu1, nu2),
    )


def tree_square_chaos1_moment(lattice: FrequencyLattice, omega, cprime: float,
                              partition: DyadicPartition = DEFAULT_PARTITION,
                              cap: int = 500_000) -> float:
    """E|chaos-1 part of the renormalized (tree resonant square)|^2.

    The component is G - 6 c' lin^ with G the raw chaos-1 graph (multiplicity
    6 included), so the moment expands into graph-graph, graph-linear and
    linear-linear terms.
    """
    from .oracle import moment_linear

    raw = graph_tree_square_chaos1_raw()
    lin = graph_linear()
    gg = second_moment(raw, lattice, omega, partition=partition, cap=cap)
    gx = second_moment(raw, lattice, omega, right=lin, partition=partition, cap=cap)
    xx = moment_linear(omega)
    return gg - 2.0 * 6.0 * cprime * gx + 36.0 * cprime**2 * xx


DIAGRAM_GRAPHS: dict[str, tuple] = {
    "linear": (graph_linear(),),
    "square": (graph_wick_square(),),
    "tree": (graph_tree(),),
    "tree_lin": (graph_tree_lin_chaos4(), graph_tree_lin_chaos2()),
    "square_square": (graph_square_square_chaos4(), graph_square_square_chaos2()),
    "tree_square": (graph_tree_square_chaos5(), graph_tree_square_chaos3()),
}


def moment_by_contraction(graph: ContractionGraph, lattice: FrequencyLattice,
                          omega, partition: DyadicPartition = DEFAULT_PARTITION,
                          cap: int = 500_000) -> float:
    """Exact second moment of one chaos component at frequency omega."""
    graph.validate()
    return second_moment(graph, lattice, omega, partition=partition, cap=cap)


def diagram_moment_oracle(label: str, lattice: FrequencyLattice, omega,
                          cprime: float | None = None,
                          partition: DyadicPartition = DEFAULT_PARTITION,
                          cap: int = 500_000) -> float:
    """Total E|diagram^(t, omega)|^2 as a sum of orthogonal chaos components.

    For tree_square the renormalized chaos-1 component needs the divergence
    constant actually used by the construction.
    """
    if label not in DIAGRAM_GRAPHS:
        raise ValueError(f"unknown diagram {label!r}")
    total = 0.0
    for g in DIAGRAM_GRAPHS[label]:
        total += second_moment(g, lattice, omega, partition=partition, cap=cap)
    if label == "tree_square":
        if cprime is None:
            raise ValueError("tree_square oracle needs the renormalization constant")
        total += tree_square_chaos1_moment(lattice, omega, cprime, partition, cap)
    return total


def brute_tree_lin_chaos4(lattice: FrequencyLattice, omega,
                          partition: DyadicPartition = DEFAULT_PARTITION) -> float:
    """Independent nested-summation oracle for the chaos-4 tree/linear moment.

    Re-derives the glued time integral by hand instead of the down-set
    recursion: contracted pairs reduce to kernels exp(-|t_a - t_b| l)/(2 l)
    and the remaining double integral over the two cube times splits into two
    ordered wedges, each a product of two reciprocals.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=np.int64))
    weight = ResonantWeight(partition)
    freqs = lattice.frequencies
    total = 0.0
    for s0 in freqs:
        for s1 in freqs:
            for s2 in freqs:
                s3 = omega - s0 - s1 - s2
                if not lattice.contains(s3):
                    continue
                s = [np.asarray(s0), np.asarray(s1), np.asarray(s2),
                     np.asarray(s3)]
                nu1 = s[0] + s[1] + s[2]
                if not lattice.contains(nu1):
                    continue
                w_left = float(weight(nu1, s[3]))
                if w_left == 0.0:
                    continue
                a_left = 1.0 + 4.0 * np.pi**2 * float(nu1 @ nu1)
                lam = [1.0 + 4.0 * np.pi**2 * float(v @ v) for v in s]
                for sigma in itertools.permutations(range(4)):
                    nu1r = -(s[sigma[0]] + s[sigma[1]] + s[sigma[2]])
                    if not lattice.contains(nu1r):
                        continue
                    w_right = float(weight(nu1r, -s[sigma[3]]))
                    if w_right == 0.0:
                        continue
                    a_right = 1.0 + 4.0 * np.pi**2 * float(nu1r @ nu1r)
                    # classify each contracted pair by its two attachment times
                    alpha, beta, both = a_left, a_right, 0.0
                    prefac = 1.0
                    for j in range(4):
                        i = sigma[j]
                        lam_j = lam[i]
                        prefac /= 2.0 * lam_j
                        left_at_u = i < 3   # cube legs attach at the cube time
                        right_at_up = j < 3
                        if left_at_u and right_at_up:
                            both += lam_j
                        elif left_at_u:
                            alpha += lam_j
                        elif right_at_up:
                            beta += lam_j
                        # root-root pairs contribute a constant kernel
                    wedge = (1.0 / (alpha + both) + 1.0 / (beta + both)) \
                        / (alpha + beta)
                    total += w_left * w_right * prefac * wedge
    return float(total)
