"""Rounding of {0, 1/2, 1} matrices with prefix error at most 1/2.

The 1/2-entries of every row are paired consecutively (1st with 2nd, 3rd
with 4th, ...), likewise for every column. Pairs are the edges of an
auxiliary graph on the 1/2-entries; every vertex has at most one row edge
and one column edge, so components are paths or cycles, and cycles
alternate row/column edges and are therefore even. A proper 2-coloring
sends one 1/2 of each pair down and the other up, which cancels the error
of every completed pair inside an initial interval.

Layers are stored doubled (``twice`` holds 0, 1, 2) so everything stays
in small integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, InvariantError

__all__ = [
    "HalfLayer",
    "AuxGraph",
    "ColorPolicy",
    "build_aux_graph",
    "color_components",
    "round_half_layer",
    "DOWN",
    "UP",
]

DOWN = 0
UP = 1

# layers with at most this many cells go through the pure-Python scan
SCAN_CUTOFF = 400


@dataclass(frozen=True, eq=False)
class HalfLayer:
    """Matrix over {0, 1/2, 1}, stored as ``twice`` = 2 * entry."""

    twice: np.ndarray

    def __post_init__(self):
        t = self.twice
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise DomainError(f"layer must be 2-D and non-empty, got shape {t.shape}")
        bad = (t < 0) | (t > 2)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DomainError("entry not in {0, 1/2, 1}", int(i) + 1, int(j) + 1)

    @classmethod
    def from_values(cls, rows) -> "HalfLayer":
        doubled = []
        for i, row in enumerate(rows, 1):
            out = []
            for j, v in enumerate(row, 1):
                d = 2 * Fraction(v)
                if d not in (0, 1, 2):
                    raise DomainError(f"{v} not in {{0, 1/2, 1}}", i, j)
                out.append(int(d))
            doubled.append(out)
        return cls(np.array(doubled, dtype=np.int8))

    @property
    def shape(self) -> tuple[int, int]:
        return self.twice.shape

    def values(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), 2) for v in row] for row in self.twice]


@dataclass(frozen=True, eq=False)
class AuxGraph:
    """Pairing graph on the 1/2-entries of a layer.

    Vertices are numbered in row-major order of their positions, so the
    smallest vertex id of a component is its lexicographically smallest
    cell. ``row_mate``/``col_mate`` hold the partner vertex or -1.
    ``component`` numbers components by their anchor (smallest vertex).
    ``parity`` is each vertex's side of the bipartition, 0 at the anchor.
    """

    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray
    row_mate: np.ndarray
    col_mate: np.ndarray
    component: np.ndarray
    anchors: np.ndarray
    parity: np.ndarray
    cyclic: np.ndarray = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.rows)

    @property
    def num_components(self) -> int:
        return len(self.anchors)

    def vertices(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def neighbors(self, v: int) -> list[tuple[int, str]]:
        out = []
        if self.row_mate[v] >= 0:
            out.append((int(self.row_mate[v]), "row"))
        if self.col_mate[v] >= 0:
            out.append((int(self.col_mate[v]), "col"))
        return out

    def edges(self) -> list[tuple[int, int, str]]:
        out = []
        for v in range(self.num_vertices):
            for u, kind in self.neighbors(v):
                if v < u:
                    out.append((v, u, kind))
        return out

    def component_sizes(self) -> np.ndarray:
        return np.bincount(self.component, minlength=self.num_components)

    def components(self) -> list[list[tuple[int, int]]]:
        """Cells of each component, components in anchor order, cells row-major."""
        groups = [[] for _ in range(self.num_components)]
        for v, c in enumerate(self.component.tolist()):
            groups[c].append((int(self.rows[v]), int(self.cols[v])))
        return groups


@dataclass
class ColorPolicy:
    """Which of the two 2-colorings each component gets.

    ``canonical`` colors every anchor DOWN. ``randomized`` flips a fair coin
    per component, drawn as one ``rng.integers(0, 2, size=k)`` call per
    layer with coins in anchor order.
    """

    kind: str = "canonical"
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.kind not in ("canonical", "randomized"):
            raise ValueError(f"unknown color policy {self.kind!r}")
        if self.kind == "randomized" and self.rng is None:
            raise ValueError("randomized policy needs a random generator")

    @classmethod
    def canonical(cls) -> "ColorPolicy":
        return cls("canonical")

    @classmethod
    def randomized(cls, seed_or_rng) -> "ColorPolicy":
        rng = seed_or_rng
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(seed_or_rng)
        return cls("randomized", rng)

    def flips(self, count: int) -> np.ndarray | None:
        if self.kind == "canonical" or count == 0:
            return None
        return self.rng.integers(0, 2, size=count, dtype=np.int8)


def _pair_consecutive(line: np.ndarray, count: np.ndarray) -> np.ndarray:
    """Mate index within a line-sorted vertex sequence, -1 if unpaired.

    ``line`` is the (sorted) line id of each vertex in sequence order and
    ``count`` the number of 1/2-entries per line.
    """
    size = len(line)
    seq = np.arange(size)
    start = np.cumsum(count) - count
    rank = seq - start[line]
    first = seq[(rank % 2 == 0) & (rank + 1 < count[line])]
    mate = np.full(size, -1, dtype=np.int64)
    mate[first] = first + 1
    mate[first + 1] = first
    return mate


def build_aux_graph(layer: HalfLayer | np.ndarray) -> AuxGraph:
    """Pairing graph of a layer, with components and anchor-relative parity."""
    twice = layer.twice if isinstance(layer, HalfLayer) else layer
    m, n = twice.shape
    mask = twice == 1
    flat = np.flatnonzero(mask)
    nv = len(flat)
    rows, cols = np.divmod(flat, n)

    row_mate = _pair_consecutive(rows, np.bincount(rows, minlength=m))

    # column-major sequence of the same vertices
    ordinal = np.full(m * n, -1, dtype=np.int64)
    ordinal[flat] = np.arange(nv)
    cm = np.flatnonzero(mask.T)
    cm_col, cm_row = np.divmod(cm, m)
    cm_ids = ordinal[cm_row * n + cm_col]
    seq_mate = _pair_consecutive(cm_col, np.bincount(cm_col, minlength=n))
    col_mate = np.full(nv, -1, dtype=np.int64)
    has = seq_mate >= 0
    col_mate[cm_ids[has]] = cm_ids[seq_mate[has]]

    component, anchors, parity = _bipartite_components(nv, row_mate, col_mate)
    degree2 = (row_mate >= 0) & (col_mate >= 0)
    open_ends = np.bincount(component[~degree2], minlength=len(anchors))
    return AuxGraph(
        shape=(m, n),
        rows=rows,
        cols=cols,
        row_mate=row_mate,
        col_mate=col_mate,
        component=component,
        anchors=anchors,
        parity=parity,
        cyclic=open_ends == 0,
    )


def _bipartite_components(nv, row_mate, col_mate):
    """Components and 2-coloring via the bipartite double cover.

    Vertex v has copies v and v + nv; an edge u-w joins u to w + nv and
    u + nv to w. A component is bipartite iff its two copies stay apart,
    and then v sits on the anchor's side iff v and the anchor share a
    double-cover component.
    """
    if nv == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty.astype(np.int8)
    ids = np.arange(nv)
    src = []
    dst = []
    for mate in (row_mate, col_mate):
        keep = mate > ids
        u, w = ids[keep], mate[keep]
        src += [u, u + nv]
        dst += [w + nv, w]
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    adj = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(2 * nv, 2 * nv))
    _, label = connected_components(adj, directed=False)
    lo, hi = label[:nv], label[nv:]
    if (lo == hi).any():
        v = int(np.flatnonzero(lo == hi)[0])
        raise InvariantError(f"odd cycle through vertex {v} in pairing graph")
    key = np.minimum(lo, hi)
    first = np.full(2 * nv, nv, dtype=np.int64)
    np.minimum.at(first, key, ids)
    anchor = first[key]
    is_anchor = anchor == ids
    anchors = ids[is_anchor]
    rank = np.cumsum(is_anchor) - 1
    component = rank[anchor]
    parity = (lo != lo[anchor]).astype(np.int8)
    return component, anchors, parity


def color_components(graph: AuxGraph, policy: ColorPolicy | None = None) -> np.ndarray:
    """Per-vertex color (DOWN=0 / UP=1); adjacent vertices always differ."""
    policy = policy or ColorPolicy.canonical()
    colors = graph.parity.copy()
    flips = policy.flips(graph.num_components)
    if flips is not None:
        colors ^= flips[graph.component]
    return colors


def round_half_layer(layer: HalfLayer | np.ndarray, policy: ColorPolicy | None = None) -> np.ndarray:
    """Round a {0, 1/2, 1} layer to {0, 1} with every prefix error <= 1/2.

    Accepts a :class:`HalfLayer` or its doubled ``int8`` array. Returns an
    ``int8`` 0/1 array.
    """
    twice = layer.twice if isinstance(layer, HalfLayer) else layer
    policy = policy or ColorPolicy.canonical()
    if twice.size <= SCAN_CUTOFF:
        m, n = twice.shape
        out = _round_scan(twice.tolist(), m, n, policy)
        return np.array(out, dtype=np.int8)
    return _round_vectorized(twice, policy)


def _round_vectorized(twice: np.ndarray, policy: ColorPolicy) -> np.ndarray:
    graph = build_aux_graph(twice)
    y = (twice == 2).astype(np.int8)
    if graph.num_vertices:
        flat = graph.rows * twice.shape[1] + graph.cols
        y.reshape(-1)[flat] = color_components(graph, policy)
    return y


def _round_scan(twice: list[list[int]], m: int, n: int, policy: ColorPolicy) -> list[list[int]]:
    """Single-pass version on nested lists, same output as the vectorized path.

    Columns are scanned left to right, top to bottom; a column keeps its
    last unpaired 1/2, and each row keeps a pointer to its last unpaired
    1/2 (None for even parity).
    """
    size = m * n
    row_mate = [-1] * size
    col_mate = [-1] * size
    open_row = [None] * m
    for j in range(n):
        open_col = None
        for i in range(m):
            if twice[i][j] != 1:
                continue
            v = i * n + j
            if open_col is None:
                open_col = v
            else:
                col_mate[v] = open_col
                col_mate[open_col] = v
                open_col = None
            u = open_row[i]
            if u is None:
                open_row[i] = v
            else:
                row_mate[v] = u
                row_mate[u] = v
                open_row[i] = None

    y = [[1 if t == 2 else 0 for t in row] for row in twice]
    color = {}
    comp_of = {}
    ncomp = 0
    for i in range(m):
        row = twice[i]
        for j in range(n):
            if row[j] != 1:
                continue
            v = i * n + j
            if v in color:
                continue
            # v is the smallest cell of its component
            color[v] = DOWN
            comp_of[v] = ncomp
            for mates in ((row_mate, col_mate), (col_mate, row_mate)):
                cur, c = v, DOWN
                step = 0
                while True:
                    nxt = mates[step % 2][cur]
                    if nxt < 0:
                        break
                    c ^= 1
                    if nxt == v:
                        if c != DOWN:
                            raise InvariantError(f"odd cycle through cell {divmod(v, n)}")
                        break
                    if nxt in color:
                        if color[nxt] != c:
                            raise InvariantError(f"odd cycle through cell {divmod(nxt, n)}")
                        break
                    color[nxt] = c
                    comp_of[nxt] = ncomp
                    cur = nxt
                    step += 1
            ncomp += 1

    flips = policy.flips(ncomp)
    for v, c in color.items():
        if flips is not None:
            c ^= int(flips[comp_of[v]])
        i, j = divmod(v, n)
        y[i][j] = c
    return y
