"""Matching graphs, fault-enumerated edge weights and space-time graphs."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricolor.circuit import CNOT, DATA, IDLE, build_memory_circuit
from tricolor.graph import (
    DIAGONAL,
    FLAG,
    FLAG_ST,
    LATTICE,
    SENTINEL,
    SPATIAL,
    VERTICAL,
    EdgeWeightPolynomial,
    build_spacetime_graph,
    class_coefficients,
    compute_edge_weights,
    enumerate_edges,
    highlighted_vertices,
    single_pair_diagonals,
    reference_rows,
    weight_two_pairs,
)
from tricolor.harness import _catalog, _schedule
from tricolor.lattice import COLOR_PAIRS, color_pair


@pytest.fixture(scope="module")
def catalog():
    return _catalog(5)


@pytest.fixture(scope="module")
def blind():
    return enumerate_edges(_schedule(5), ignore_flags=True)


@given(st.lists(st.fractions(Fraction(0), Fraction(1, 3)), max_size=5), st.floats(0.0, 1.0))
def test_polynomial_is_odd_parity_probability(rates, p):
    poly = EdgeWeightPolynomial(tuple(rates))
    qs = [float(r) * p for r in rates]
    exact = 0.0
    for bits in itertools.product((0, 1), repeat=len(qs)):
        if sum(bits) % 2:
            exact += math.prod(q if b else 1 - q for q, b in zip(qs, bits))
    assert poly(p) == pytest.approx(exact, abs=1e-12)
    assert sum(float(c) * p**k for k, c in enumerate(poly.expand())) == pytest.approx(exact, abs=1e-9)
    assert poly.coefficient == sum(rates, Fraction(0))


def test_two_location_diagonal_polynomial(blind):
    diags = single_pair_diagonals(blind)
    assert diags
    for *_, poly in diags:
        assert poly.expand() == [0, Fraction(8, 15), Fraction(-32, 225)]
        p = 1e-3
        assert poly(p) == pytest.approx(8 * p / 15 * (1 - 4 * p / 15), rel=1e-12)


def test_cnot_only_diagonal_coefficients(blind):
    cc = class_coefficients(blind, {CNOT})
    for pair in COLOR_PAIRS:
        assert cc[(pair, "diagonal")] == {Fraction(8, 15), Fraction(16, 15), Fraction(8, 5)}
    rows = reference_rows(blind, {CNOT}, "flag-blind-cnot")
    assert all(r["present"] for r in rows if r["class"] == "diagonal")


def test_every_fault_maps_to_an_edge(catalog):
    assert set(catalog.unmapped.values()) == {0}


def test_idle_data_fault_never_diagonal(catalog):
    sched = catalog.schedule
    circ, _ = build_memory_circuit(sched, 3)
    for table in catalog.diagonal.values():
        for locs in table.values():
            for loc in locs:
                assert not (circ.kind[loc] == IDLE and sched.roles[circ.q0[loc]] == DATA)


def test_graph_structure(catalog):
    dual = catalog.graphs["RG"].dual
    for pair, g in catalog.graphs.items():
        cols = color_pair(pair)
        assert set(dual.colors[g.vertices].tolist()) == set(cols)
        for e in np.flatnonzero(g.kind == FLAG):
            e1, e2 = g.projection[e]
            shared = set(dual.edges[e1].tolist()) & set(dual.edges[e2].tolist())
            assert len(shared) == 1
            (a, b) = g.edges[e]
            assert dual.colors[a] == dual.colors[b]
        for e in np.flatnonzero(g.kind == LATTICE):
            assert len(g.projection[e]) == 1
    assert weight_two_pairs(catalog.schedule)


def test_spacetime_graph_and_weights(catalog):
    base = catalog.graphs["RB"]
    diag = sorted(catalog.diagonal[("X", "RB")])
    stg = build_spacetime_graph(base, 4, diag)
    assert stg.num_vertices == 4 * base.num_vertices
    w = compute_edge_weights(stg, catalog, 1e-3, "X")
    flag = stg.kind == FLAG_ST
    assert (w[flag] == SENTINEL).all()
    assert (w[~flag] > 0).all()
    assert (stg.kind == VERTICAL).sum() == 3 * (~np.isin(base.vertices, base.boundary)).sum()
    assert (stg.kind == DIAGONAL).sum() == 3 * len(diag)
    vert = np.flatnonzero(stg.kind == VERTICAL)[:5]
    assert stg.flatten(vert).size == 0
    sp = np.flatnonzero(stg.kind == SPATIAL)[:3]
    assert stg.flatten(np.concatenate([sp, sp])).size == 0
    with pytest.raises(ValueError):
        compute_edge_weights(stg, catalog, 0.0, "X")


def test_weights_decrease_with_p(catalog):
    stg = build_spacetime_graph(catalog.graphs["GB"], 2, sorted(catalog.diagonal[("Z", "GB")]))
    lo = compute_edge_weights(stg, catalog, 1e-4, "Z")
    hi = compute_edge_weights(stg, catalog, 1e-2, "Z")
    live = lo != SENTINEL
    assert (lo[live] > hi[live]).all()


def test_highlighted_vertices():
    ev = np.zeros((3, 5), np.uint8)
    ev[0, 2] = ev[2, 1] = 1
    assert highlighted_vertices(ev) == [(2, 1), (1, 3)]
