"""Exact matching against brute force, and the shortest-path kernels."""

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricolor import kernels
from tricolor.decoder import restricted_graph
from tricolor.harness import _dual
from tricolor.matching import (
    BOUNDARY,
    Matcher,
    PairingProblem,
    WeightedGraph,
    brute_force_weight,
    mwpm,
    shortest_paths,
)


def _random_graph(rng, n=14, m=30):
    g = nx.gnm_random_graph(n, m, seed=int(rng.integers(1 << 30)))
    g.add_edges_from((i, i + 1) for i in range(n - 1))
    u, v = np.array(list(g.edges)).T
    bnd = np.zeros(n, bool)
    bnd[rng.choice(n, 2, replace=False)] = True
    w = rng.integers(1, 9, len(u)).astype(float)
    return WeightedGraph(n, u.astype(np.int64), v.astype(np.int64), w, bnd)


def _path_weight(graph, pairing):
    return sum(graph.weight[e] for p in pairing.paths for e in p)


def test_empty_and_validation():
    g = restricted_graph(_dual(5), "RG")
    assert mwpm(PairingProblem(g, np.array([], dtype=np.int64))).pairs == []
    bnd = int(np.flatnonzero(g.boundary)[0])
    with pytest.raises(ValueError):
        mwpm(PairingProblem(g, np.array([bnd])))
    with pytest.raises(ValueError):
        mwpm(PairingProblem(g, np.array([0])), backend="nope")


def test_mwpm_equals_brute_force_lattice():
    # 1000 instances with at most 8 highlighted vertices on restricted lattices
    rng = np.random.default_rng(2024)
    dual = _dual(7)
    graphs = {}
    for pair in ("RG", "RB", "GB"):
        g = restricted_graph(dual, pair)
        graphs[pair] = g.reweighted(rng.integers(1, 6, len(g.u)).astype(float))
    count = 0
    for i in range(1000):
        g = graphs[("RG", "RB", "GB")[i % 3]]
        cand = np.flatnonzero(~g.boundary & np.isin(np.arange(g.num_vertices), np.concatenate([g.u, g.v])))
        k = int(rng.integers(1, 9))
        hl = rng.choice(cand, k, replace=False)
        prob = PairingProblem(g, hl)
        want = brute_force_weight(prob)
        for backend in ("blossom", "sparse"):
            got = mwpm(prob, backend)
            assert got.weight == pytest.approx(want)
            assert _path_weight(g, got) == pytest.approx(want)
        count += 1
    assert count == 1000


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_mwpm_equals_brute_force_random(seed, k):
    rng = np.random.default_rng(seed)
    g = _random_graph(rng)
    cand = np.flatnonzero(~g.boundary)
    hl = rng.choice(cand, min(k, len(cand)), replace=False)
    prob = PairingProblem(g, hl)
    want = brute_force_weight(prob)
    for backend in ("blossom", "sparse"):
        got = mwpm(prob, backend)
        assert got.weight == pytest.approx(want)
        # every highlighted vertex is covered exactly once
        ends = sorted(a for a, _ in got.pairs) + sorted(b for (_, b), tb in zip(got.pairs, got.to_boundary) if not tb)
        assert sorted(ends) == sorted(hl.tolist())


def test_paths_avoid_boundary():
    rng = np.random.default_rng(0)
    for _ in range(30):
        g = _random_graph(rng)
        src = int(np.flatnonzero(~g.boundary)[0])
        sp = shortest_paths(g, src)
        for t in range(g.num_vertices):
            if not np.isfinite(sp.dist[t]):
                continue
            path = sp.path(g, t)
            inner = set()
            x = src
            for e in path:
                x = int(g.v[e]) if int(g.u[e]) == x else int(g.u[e])
                inner.add(x)
            inner.discard(t)
            assert not g.boundary[sorted(inner)].any()


def test_dijkstra_matches_networkx():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = _random_graph(rng)
        g = WeightedGraph(g.num_vertices, g.u, g.v, g.weight, np.zeros(g.num_vertices, bool))
        nxg = nx.Graph()
        for a, b, w in zip(g.u, g.v, g.weight):
            if not nxg.has_edge(a, b) or nxg[a][b]["weight"] > w:
                nxg.add_edge(int(a), int(b), weight=w)
        ref = nx.single_source_dijkstra_path_length(nxg, 0)
        sp = shortest_paths(g, 0)
        for v, dv in ref.items():
            assert sp.dist[v] == pytest.approx(dv)


@pytest.mark.skipif(not kernels.USE_NUMBA, reason="numba disabled")
def test_dijkstra_kernels_agree():
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = _random_graph(rng, 40, 90)
        indptr, indices, w, _ = g.csr
        outs = []
        for fn in (kernels._dijkstra_numba, kernels._dijkstra_numpy):
            dist = np.empty(g.num_vertices)
            pred = np.empty(g.num_vertices, np.int64)
            fn(indptr, indices, w, 3, g.boundary, dist, pred)
            outs.append((dist, pred))
        assert np.array_equal(outs[0][0], outs[1][0])
        assert np.array_equal(outs[0][1], outs[1][1])


def test_matcher_reuse_and_boundary_marker():
    dual = _dual(5)
    g = restricted_graph(dual, "RB")
    m = Matcher(g)
    v = int(m.vert[0])
    a = m.pairs([v])
    assert a == [(v, BOUNDARY)]
    assert m.solve([v]).to_boundary == [True]
