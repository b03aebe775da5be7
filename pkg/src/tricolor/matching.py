"""Minimum-weight perfect matching with boundary vertices.

Highlighted vertices are paired with each other or with the boundary.  Two
exact backends are offered:

``blossom``
    the textbook reduction: a complete graph on the highlighted vertices
    plus one virtual boundary copy each (copies joined by zero-weight
    edges), solved with networkx's blossom implementation.
``sparse``
    PyMatching's sparse blossom on the original graph, much faster for
    Monte Carlo.

Either way each matched pair is realised by an explicit shortest path, and
paths never run through a boundary vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
import pymatching
import scipy.sparse

from .kernels import dijkstra

BOUNDARY = -1


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with nonnegative edge weights and boundary vertices.

    Edges whose weight is negative (the sentinel) are treated as absent.
    """

    num_vertices: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    boundary: np.ndarray  # bool per vertex

    @cached_property
    def live(self) -> np.ndarray:
        return np.flatnonzero(self.weight >= 0)

    @cached_property
    def csr(self):
        e = self.live
        a = np.concatenate([self.u[e], self.v[e]])
        b = np.concatenate([self.v[e], self.u[e]])
        ids = np.concatenate([e, e])
        order = np.lexsort((b, a))
        a, b, ids = a[order], b[order], ids[order]
        indptr = np.searchsorted(a, np.arange(self.num_vertices + 1)).astype(np.int64)
        return indptr, b.astype(np.int64), self.weight[ids].astype(np.float64), ids.astype(np.int64)

    def edge_between(self, x: int, y: int) -> int:
        """Cheapest live edge joining ``x`` and ``y``."""
        indptr, indices, w, ids = self.csr
        lo, hi = indptr[x], indptr[x + 1]
        hit = np.flatnonzero(indices[lo:hi] == y)
        if not len(hit):
            raise KeyError((x, y))
        return int(ids[lo + hit[np.argmin(w[lo + hit])]])

    def reweighted(self, weight: np.ndarray) -> WeightedGraph:
        """Same topology with new weights; reuses the adjacency when the live set is unchanged."""
        g = WeightedGraph(self.num_vertices, self.u, self.v, weight, self.boundary)
        if "csr" in self.__dict__ and np.array_equal(self.weight >= 0, weight >= 0):
            indptr, indices, _, ids = self.csr
            g.__dict__["live"] = self.live
            g.__dict__["csr"] = (indptr, indices, weight[ids].astype(np.float64), ids)
        return g


@dataclass
class ShortestPaths:
    source: int
    dist: np.ndarray
    pred: np.ndarray

    def path(self, graph: WeightedGraph, target: int) -> list[int]:
        """Edge ids from ``source`` to ``target`` (empty if equal)."""
        if not np.isfinite(self.dist[target]):
            raise ValueError(f"vertex {target} unreachable from {self.source}")
        out = []
        x = target
        while x != self.source:
            y = int(self.pred[x])
            out.append(graph.edge_between(y, x))
            x = y
        out.reverse()
        return out


def shortest_paths(graph: WeightedGraph, source: int) -> ShortestPaths:
    """Exact single-source shortest paths; unreachable vertices get ``inf``."""
    indptr, indices, w, _ = graph.csr
    dist, pred = dijkstra(indptr, indices, w, int(source), graph.boundary)
    return ShortestPaths(int(source), dist, pred)


@dataclass
class PairingProblem:
    graph: WeightedGraph
    highlighted: np.ndarray


@dataclass
class Pairing:
    """Matched pairs ``(a, b)``; ``b`` is the boundary vertex reached for boundary matches."""

    pairs: list = field(default_factory=list)
    paths: list = field(default_factory=list)
    to_boundary: list = field(default_factory=list)
    weight: float = 0.0

    def edges(self) -> np.ndarray:
        """Edge multiset of all paths reduced mod 2."""
        cnt: dict[int, int] = {}
        for p in self.paths:
            for e in p:
                cnt[e] = cnt.get(e, 0) ^ 1
        return np.array(sorted(e for e, c in cnt.items() if c), dtype=np.int64)


def _nearest_boundary(sp: ShortestPaths, boundary: np.ndarray) -> int:
    bs = np.flatnonzero(boundary)
    if len(bs) == 0:
        return BOUNDARY
    d = sp.dist[bs]
    k = int(np.argmin(d))  # first minimum: smallest id on ties
    return int(bs[k]) if np.isfinite(d[k]) else BOUNDARY


def _realise(graph: WeightedGraph, matched, trees: dict, paths: dict | None = None) -> Pairing:
    out = Pairing()
    for a, b in matched:
        hit = paths.get((a, b)) if paths is not None else None
        if hit is None:
            sp = trees.get(a)
            if sp is None:
                sp = trees[a] = shortest_paths(graph, a)
            tb = b == BOUNDARY
            if tb:
                b = _nearest_boundary(sp, graph.boundary)
                if b == BOUNDARY:
                    raise ValueError(f"vertex {a} cannot reach the boundary")
            hit = (b, tb, sp.path(graph, b), float(sp.dist[b]))
            if paths is not None:
                paths[(a, BOUNDARY if tb else b)] = hit
        b, tb, path, w = hit
        out.pairs.append((a, b))
        out.to_boundary.append(tb)
        out.paths.append(path)
        out.weight += w
    return out


def _blossom_pairs(graph: WeightedGraph, hl: list[int], trees: dict) -> list[tuple[int, int]]:
    k = len(hl)
    for h in hl:
        if h not in trees:
            trees[h] = shortest_paths(graph, h)
    g = nx.Graph()
    bdist = []
    for i, h in enumerate(hl):
        b = _nearest_boundary(trees[h], graph.boundary)
        bdist.append(np.inf if b == BOUNDARY else float(trees[h].dist[b]))
    finite = [x for i, h in enumerate(hl) for x in [bdist[i]] + [float(trees[h].dist[o]) for o in hl] if np.isfinite(x)]
    big = 1.0 + 2.0 * (max(finite) if finite else 0.0) * max(k, 1)
    for i in range(k):
        if np.isfinite(bdist[i]):
            g.add_edge(i, k + i, weight=big - bdist[i])
        for j in range(i + 1, k):
            d = float(trees[hl[i]].dist[hl[j]])
            if np.isfinite(d):
                g.add_edge(i, j, weight=big - d)
            g.add_edge(k + i, k + j, weight=big)
    m = nx.max_weight_matching(g, maxcardinality=True)
    if len(m) * 2 != 2 * k:
        raise ValueError("no perfect matching exists")
    out = []
    for a, b in sorted(tuple(sorted(e)) for e in m):
        if a < k and b < k:
            out.append((hl[a], hl[b]))
        elif a < k:
            out.append((hl[a], BOUNDARY))
    return sorted(out)


class Matcher:
    """Reusable sparse-blossom matcher for one weighted graph."""

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        bnd = graph.boundary
        e = graph.live
        touched = np.zeros(graph.num_vertices, dtype=bool)
        touched[graph.u[e]] = True
        touched[graph.v[e]] = True
        nb = touched & ~bnd
        self.det = np.full(graph.num_vertices, -1, dtype=np.int64)
        self.det[nb] = np.arange(int(nb.sum()))
        self.vert = np.flatnonzero(nb)
        e = e[~(bnd[graph.u[e]] & bnd[graph.v[e]])]
        u, v = graph.u[e], graph.v[e]
        # one column per edge; boundary edges keep a single nonzero
        iu, iv = self.det[u], self.det[v]
        rows = np.concatenate([iu[iu >= 0], iv[iv >= 0]])
        cols = np.concatenate([np.flatnonzero(iu >= 0), np.flatnonzero(iv >= 0)])
        h = scipy.sparse.csc_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)),
                                    shape=(len(self.vert), len(e)))
        m = pymatching.Matching.from_check_matrix(h, weights=graph.weight[e].astype(float))
        self.matching = m
        self.trees: dict[int, ShortestPaths] = {}
        self.paths: dict = {}

    def pairs(self, highlighted) -> list[tuple[int, int]]:
        hl = np.asarray(highlighted, dtype=np.int64)
        if len(hl) == 0:
            return []
        syn = np.zeros(len(self.vert), dtype=np.uint8)
        idx = self.det[hl]
        if np.any(idx < 0):
            raise ValueError("highlighted vertex is not in the graph")
        syn[idx] = 1
        arr = self.matching.decode_to_matched_dets_array(syn)
        out = []
        for a, b in arr:
            a = int(self.vert[a])
            b = BOUNDARY if b < 0 else int(self.vert[b])
            out.append((a, b) if b == BOUNDARY or a < b else (b, a))
        return sorted(out)

    def solve(self, highlighted) -> Pairing:
        return _realise(self.graph, self.pairs(highlighted), self.trees, self.paths)


def mwpm(problem: PairingProblem, backend: str = "blossom") -> Pairing:
    """Exact minimum-weight pairing of the highlighted vertices."""
    hl = sorted(int(h) for h in problem.highlighted)
    if len(set(hl)) != len(hl):
        raise ValueError("highlighted vertices must be distinct")
    if any(problem.graph.boundary[h] for h in hl):
        raise ValueError("boundary vertices cannot be highlighted")
    if not hl:
        return Pairing()
    trees: dict = {}
    if backend == "blossom":
        return _realise(problem.graph, _blossom_pairs(problem.graph, hl, trees), trees)
    if backend == "sparse":
        return Matcher(problem.graph).solve(hl)
    raise ValueError(f"unknown backend {backend!r}")


def brute_force_weight(problem: PairingProblem) -> float:
    """Minimum pairing weight by exhausting all pairings (small instances only)."""
    hl = sorted(int(h) for h in problem.highlighted)
    trees = {h: shortest_paths(problem.graph, h) for h in hl}
    bd = {h: trees[h].dist[_nearest_boundary(trees[h], problem.graph.boundary)]
          if _nearest_boundary(trees[h], problem.graph.boundary) != BOUNDARY else np.inf for h in hl}

    def best(rest: tuple) -> float:
        if not rest:
            return 0.0
        a, others = rest[0], rest[1:]
        out = bd[a] + best(others)
        for i, b in enumerate(others):
            out = min(out, trees[a].dist[b] + best(others[:i] + others[i + 1:]))
        return out

    return float(best(tuple(hl)))
