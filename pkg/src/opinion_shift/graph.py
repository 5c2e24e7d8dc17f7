"""Weighted directed graphs, leader configurations and leader-equivalent graphs.

Nodes are stored as dense integer ids ``0..n-1``; the external label of every
node is kept so results can be reported in the caller's vocabulary. An
undirected graph is represented as a bidirectional digraph with symmetric
weights.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ParseError, ValidationError


class WeightedDigraph:
    """Immutable weighted digraph with positive edge weights.

    Parallel edges are merged by summing their weights and self-loops are
    rejected. An edge ``(u, v)`` means that ``u`` follows ``v``: the opinion of
    ``u`` drifts toward the opinion of ``v``.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : iterable of (int, int, float)
        Directed edges ``(source, target, weight)`` over ids ``0..n-1``.
    labels : sequence of str, optional
        External labels, defaults to ``"0", "1", ...``.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int, float]],
                 labels: Sequence[str] | None = None):
        if n < 1:
            raise ValidationError("a graph needs at least one node")
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = [str(lab) for lab in labels]
        if len(labels) != n:
            raise ValidationError(f"expected {n} labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise ValidationError("node labels must be unique")
        self._labels = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(labels)}

        merged: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise ValidationError(f"self-loop at node {labels[u]!r} is not allowed")
            if not np.isfinite(w) or w <= 0:
                raise ValidationError(
                    f"edge ({labels[u]!r}, {labels[v]!r}) has non-positive weight {w}")
            merged[(u, v)] = merged.get((u, v), 0.0) + w

        keys = sorted(merged)
        self.n = n
        self._src = np.array([k[0] for k in keys], dtype=np.intp)
        self._dst = np.array([k[1] for k in keys], dtype=np.intp)
        self._wgt = np.array([merged[k] for k in keys], dtype=float)
        for arr in (self._src, self._dst, self._wgt):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_undirected(cls, n, edges, labels=None):
        """Build a bidirectional graph from undirected ``(u, v[, w])`` pairs."""
        directed = []
        for e in edges:
            u, v = e[0], e[1]
            w = e[2] if len(e) > 2 else 1.0
            directed.append((u, v, w))
            directed.append((v, u, w))
        return cls(n, directed, labels)

    @classmethod
    def from_adjacency(cls, adj, labels=None):
        adj = np.asarray(adj, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValidationError("adjacency matrix must be square")
        if np.any(adj < 0):
            raise ValidationError("adjacency weights must be non-negative")
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], zip(rows, cols, adj[rows, cols]), labels)

    # -- basic queries --------------------------------------------------

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def m(self) -> int:
        """Number of directed edges after merging."""
        return len(self._wgt)

    def label(self, node: int) -> str:
        return self._labels[node]

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise ValidationError(f"unknown node label {label!r}") from None

    def edges(self):
        """Iterate over ``(source, target, weight)`` triples in sorted order."""
        return zip(self._src.tolist(), self._dst.tolist(), self._wgt.tolist())

    @cached_property
    def _out(self):
        out = [[] for _ in range(self.n)]
        for u, v, w in self.edges():
            out[u].append((v, w))
        return out

    @cached_property
    def _in(self):
        inn = [[] for _ in range(self.n)]
        for u, v, w in self.edges():
            inn[v].append((u, w))
        return inn

    def out_neighbors(self, u: int) -> list[tuple[int, float]]:
        return list(self._out[u])

    def in_neighbors(self, v: int) -> list[tuple[int, float]]:
        return list(self._in[v])

    def weight(self, u: int, v: int) -> float:
        for t, w in self._out[u]:
            if t == v:
                return w
        return 0.0

    # -- matrices -------------------------------------------------------

    @cached_property
    def _adjacency(self):
        a = np.zeros((self.n, self.n))
        a[self._src, self._dst] = self._wgt
        a.setflags(write=False)
        return a

    def adjacency(self) -> np.ndarray:
        """Dense adjacency ``A[u, v] = w(u, v)`` (read-only view)."""
        return self._adjacency

    def out_degree(self) -> np.ndarray:
        """Weighted out-degree vector ``d``."""
        return self._adjacency.sum(axis=1)

    def laplacian(self) -> np.ndarray:
        """Out-degree Laplacian ``L = D - A`` (a fresh, writable array)."""
        return np.diag(self.out_degree()) - self._adjacency

    def sparse_adjacency(self) -> csr_matrix:
        return csr_matrix((self._wgt, (self._src, self._dst)), shape=(self.n, self.n))

    def is_symmetric(self) -> bool:
        a = self._adjacency
        return bool(np.array_equal(a, a.T))

    def total_weight(self) -> float:
        return float(self._wgt.sum())

    def __repr__(self):
        return f"WeightedDigraph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self._src, other._src)
                and np.array_equal(self._dst, other._dst)
                and np.allclose(self._wgt, other._wgt, rtol=1e-12, atol=0))

    __hash__ = None


def load_edge_list(text, undirected=False, dedupe=False) -> WeightedDigraph:
    """Parse a whitespace-separated edge list.

    Each non-comment line is ``u v [w]``; ``#`` starts a comment and the weight
    defaults to 1. Labels are arbitrary tokens and receive ids in order of first
    appearance. With ``undirected`` every edge is mirrored. With ``dedupe``
    repeated edges keep the weight of their first occurrence instead of being
    summed.
    """
    if isinstance(text, str):
        stream = io.StringIO(text)
    else:
        stream = text
    index: dict[str, int] = {}
    labels: list[str] = []
    edges = []
    seen = set()

    def node(tok):
        if tok not in index:
            index[tok] = len(labels)
            labels.append(tok)
        return index[tok]

    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {raw.rstrip()!r}", lineno)
        u_tok, v_tok = fields[0], fields[1]
        w = 1.0
        if len(fields) == 3:
            try:
                w = float(fields[2])
            except ValueError:
                raise ParseError(f"weight {fields[2]!r} is not a number", lineno) from None
        if not np.isfinite(w) or w <= 0:
            raise ValidationError(f"line {lineno}: non-positive weight {fields[2]}")
        if u_tok == v_tok:
            raise ValidationError(f"line {lineno}: self-loop at node {u_tok!r}")
        u, v = node(u_tok), node(v_tok)
        pairs = [(u, v), (v, u)] if undirected else [(u, v)]
        for a, b in pairs:
            if dedupe:
                if (a, b) in seen:
                    continue
                seen.add((a, b))
            edges.append((a, b, w))
    if not labels:
        raise ValidationError("edge list contains no edges")
    return WeightedDigraph(len(labels), edges, labels)


def write_edge_list(g: WeightedDigraph) -> str:
    lines = [f"# nodes {g.n} edges {g.m}"]
    for u, v, w in g.edges():
        lines.append(f"{g.label(u)} {g.label(v)} {w:.17g}")
    return "\n".join(lines) + "\n"


def is_strongly_connected(g: WeightedDigraph) -> bool:
    if g.n == 1:
        return True
    ncomp, _ = connected_components(g.sparse_adjacency(), directed=True, connection="strong")
    return ncomp == 1


# -- leader configuration ----------------------------------------------------


class Model(str, enum.Enum):
    ABSOLUTE = "absolute"
    INFLUENCED = "influenced"


def as_kappa(kappa, n: int) -> np.ndarray:
    """Normalize a stubbornness spec (scalar, mapping or vector) to a length-n vector."""
    if kappa is None:
        return np.ones(n)
    if np.isscalar(kappa):
        vec = np.full(n, float(kappa))
    elif isinstance(kappa, Mapping):
        vec = np.ones(n)
        for k, val in kappa.items():
            vec[int(k)] = float(val)
    else:
        vec = np.asarray(kappa, dtype=float).copy()
        if vec.shape != (n,):
            raise ValidationError(f"stubbornness vector must have length {n}")
    if not np.all(np.isfinite(vec)) or np.any(vec <= 0):
        raise ValidationError("stubbornness values must be positive and finite")
    return vec


@dataclass(frozen=True)
class LeaderConfig:
    """Disjoint party leader sets and the system model.

    ``kappa`` holds per-node stubbornness for the influenced model (entries of
    non-leaders are ignored); it is ignored entirely for the absolute model.
    """

    s0: frozenset
    s1: frozenset
    model: Model = Model.ABSOLUTE
    kappa: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "s0", frozenset(int(v) for v in self.s0))
        object.__setattr__(self, "s1", frozenset(int(v) for v in self.s1))
        object.__setattr__(self, "model", Model(self.model))
        if not self.s0:
            raise ValidationError("leader set S0 must be nonempty")
        if self.s0 & self.s1:
            raise ValidationError(f"S0 and S1 overlap at {sorted(self.s0 & self.s1)}")
        if self.kappa is not None:
            k = np.asarray(self.kappa, dtype=float)
            if np.any(k <= 0) or not np.all(np.isfinite(k)):
                raise ValidationError("stubbornness values must be positive and finite")

    @classmethod
    def for_graph(cls, g: WeightedDigraph, s0, s1, model=Model.ABSOLUTE, kappa=None):
        cfg = cls(frozenset(s0), frozenset(s1), Model(model),
                  as_kappa(kappa, g.n) if Model(model) is Model.INFLUENCED else None)
        cfg.check(g)
        return cfg

    def check(self, g: WeightedDigraph):
        for v in self.s0 | self.s1:
            if not 0 <= v < g.n:
                raise ValidationError(f"leader id {v} is outside 0..{g.n - 1}")
        if self.model is Model.INFLUENCED:
            if self.kappa is None or len(self.kappa) != g.n:
                raise ValidationError("influenced model needs a stubbornness vector of length n")

    @property
    def leaders(self) -> frozenset:
        return self.s0 | self.s1

    def followers(self, n: int) -> list[int]:
        lead = self.leaders
        return [v for v in range(n) if v not in lead]


@dataclass(frozen=True)
class EquivalentGraph:
    """Leader-equivalent graph with two single absolute leaders."""

    graph: WeightedDigraph
    s0_id: int
    s1_id: int
    origin_map: dict


def build_equivalent(g: WeightedDigraph, cfg: LeaderConfig) -> EquivalentGraph:
    """Construct the leader-equivalent graph for either model.

    Absolute model: every party's leaders are contracted into one node; edge
    weights into and out of a contracted set are summed and edges inside a set
    vanish. Influenced model: two virtual absolute leaders are appended and
    each influenced leader ``u`` gets edges to and from its party node with
    weight ``kappa[u]``. The back edges never affect the dynamics; they keep the
    result strongly connected.
    """
    cfg.check(g)
    if not cfg.s0 or not cfg.s1:
        raise ValidationError("both leader sets must be nonempty to build an equivalent graph")

    if cfg.model is Model.ABSOLUTE:
        followers = cfg.followers(g.n)
        s0_id, s1_id = len(followers), len(followers) + 1
        origin = {v: i for i, v in enumerate(followers)}
        origin.update({v: s0_id for v in cfg.s0})
        origin.update({v: s1_id for v in cfg.s1})
        edges = []
        for u, v, w in g.edges():
            a, b = origin[u], origin[v]
            if a != b:
                edges.append((a, b, w))
        labels = [g.label(v) for v in followers] + ["s0'", "s1'"]
        labels = _dedupe_labels(labels)
        return EquivalentGraph(WeightedDigraph(len(followers) + 2, edges, labels), s0_id, s1_id, origin)

    kappa = cfg.kappa
    s0_id, s1_id = g.n, g.n + 1
    edges = list(g.edges())
    for u in sorted(cfg.s0):
        edges += [(u, s0_id, kappa[u]), (s0_id, u, kappa[u])]
    for u in sorted(cfg.s1):
        edges += [(u, s1_id, kappa[u]), (s1_id, u, kappa[u])]
    labels = _dedupe_labels(list(g.labels) + ["s0'", "s1'"])
    origin = {v: v for v in range(g.n)}
    return EquivalentGraph(WeightedDigraph(g.n + 2, edges, labels), s0_id, s1_id, origin)


def _dedupe_labels(labels):
    out, seen = [], set()
    for lab in labels:
        while lab in seen:
            lab = lab + "'"
        seen.add(lab)
        out.append(lab)
    return out


# -- named graphs ------------------------------------------------------------


def path_graph(n: int) -> WeightedDigraph:
    return WeightedDigraph.from_undirected(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> WeightedDigraph:
    return WeightedDigraph.from_undirected(n, [(i, (i + 1) % n) for i in range(n)])


def directed_cycle(n: int) -> WeightedDigraph:
    return WeightedDigraph(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def complete_graph(n: int) -> WeightedDigraph:
    return WeightedDigraph.from_undirected(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> WeightedDigraph:
    """Star with center ``0`` and ``leaves`` leaves."""
    return WeightedDigraph.from_undirected(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> WeightedDigraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return WeightedDigraph.from_undirected(10, outer + spokes + inner)


CUBIC_GRAPHS = {"petersen": petersen_graph, "k4": lambda: complete_graph(4)}


def gadget_graph(cubic: WeightedDigraph, star_weight: float = 3.0) -> tuple[WeightedDigraph, int]:
    """Join a star center to every node of a connected 3-regular graph.

    The cubic nodes keep their ids and edges get weight 1; the center is
    appended as the last node and is joined in both directions to every cubic
    node with ``star_weight``. Returns the graph and the center id.
    """
    if not cubic.is_symmetric():
        raise ValidationError("gadget input must be undirected (symmetric)")
    deg = np.count_nonzero(cubic.adjacency(), axis=1)
    if np.any(deg != 3):
        bad = [cubic.label(i) for i in np.flatnonzero(deg != 3)]
        raise ValidationError(f"gadget input is not 3-regular; offending nodes {bad}")
    if not is_strongly_connected(cubic):
        raise ValidationError("gadget input must be connected")
    center = cubic.n
    edges = [(u, v, 1.0) for u, v, _ in cubic.edges()]
    for u in range(cubic.n):
        edges += [(center, u, star_weight), (u, center, star_weight)]
    labels = _dedupe_labels(list(cubic.labels) + ["center"])
    return WeightedDigraph(cubic.n + 1, edges, labels), center


def is_vertex_cover(g: WeightedDigraph, nodes) -> bool:
    nodes = set(nodes)
    return all(u in nodes or v in nodes for u, v, _ in g.edges())
