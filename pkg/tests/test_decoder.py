"""Restriction decoders: code capacity and space time."""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricolor.decoder import (
    ADAPTED,
    NAIVE,
    Lifter,
    Link,
    RestrictionDecoder,
    decode_2d,
    find_components,
    lift_color,
    xor_edges,
)
from tricolor.harness import CircuitRunner, _dual, corrects, naive_counterexamples, single_fault_failures
from tricolor.lattice import BLUE, GREEN, RED


@pytest.fixture(scope="module")
def decoders(dual7):
    return {v: RestrictionDecoder(dual7, v) for v in (ADAPTED, NAIVE)}


def test_empty_syndrome_gives_identity(dual5):
    for v in (ADAPTED, NAIVE):
        assert not decode_2d(dual5, [], v).any()


def test_lift_color():
    assert lift_color([RED, RED]) == GREEN
    assert lift_color([RED, GREEN]) == BLUE
    assert lift_color([BLUE, RED]) == GREEN
    with pytest.raises(ValueError):
        lift_color([RED])
    with pytest.raises(ValueError):
        lift_color([GREEN, GREEN])


def test_xor_edges():
    assert xor_edges([np.array([1, 2, 3]), [3, 4], np.array([1])]).tolist() == [2, 4]


def test_components_do_not_merge_through_boundary():
    e = np.zeros(0, np.int64)
    links = [
        Link("RG", (1, 100), (RED, GREEN), (False, True), e),
        Link("RB", (2, 100), (RED, BLUE), (False, True), e),
        Link("GB", (1, 2), (GREEN, BLUE), (False, False), e),
        Link("RG", (5, 6), (RED, GREEN), (False, False), e),
    ]
    comps = find_components(links)
    assert [c.links for c in comps] == [[0, 1, 2], [3]]
    assert comps[0].terminals == sorted([GREEN, BLUE]) and comps[0].is_chain
    assert not comps[1].is_chain


@pytest.mark.parametrize("d", (5, 7))
def test_single_errors_corrected(d):
    dec = RestrictionDecoder(_dual(d), ADAPTED)
    for q in range(dec.dual.n):
        assert corrects(dec, [q], [q])


def test_naive_fails_a_weight_two_error(dual7):
    # the naive decoder only guarantees weight (d - 3) // 4 = 1 at d = 7
    bad = naive_counterexamples(7, 2, limit=5, backend="blossom")
    assert bad and all(len(qs) == 2 for qs in bad)
    h = dual7.lattice.check_matrix
    for qs in bad:
        for backend in ("sparse", "blossom"):
            assert corrects(RestrictionDecoder(dual7, ADAPTED, backend), qs)
        # the failing pairing is a minimum-weight one: it ties with the sparse backend's
        e = np.zeros(dual7.n, np.uint8)
        e[list(qs)] = 1
        syn = np.flatnonzero((h @ e) & 1)
        w = [sum(len(ln.edges) for ln in RestrictionDecoder(dual7, NAIVE, b).links(syn))
             for b in ("sparse", "blossom")]
        assert w[0] == w[1]
        assert not corrects(RestrictionDecoder(dual7, NAIVE, "blossom"), qs)


def test_naive_separation_default_backend(decoders):
    bad = naive_counterexamples(7, 3, limit=1)
    assert bad
    assert corrects(decoders[ADAPTED], bad[0])
    assert not corrects(decoders[NAIVE], bad[0])


def test_lifter_minimum_weight(dual5):
    lift = Lifter(dual5)
    for v in range(dual5.num_faces):
        edges = lift.edges_at(v)
        for r in (1, 2):
            for sub in itertools.combinations(edges, r):
                q = lift.lift(v, sub)
                if q is None:
                    continue
                # brute force over all qubit subsets around v
                tris = dual5.star[v]
                best = None
                for k in range(len(tris) + 1):
                    for qs in itertools.combinations(tris, k):
                        cnt = {}
                        for t in qs:
                            for e in dual5.triangle_edges[t]:
                                if e >= 0 and e in edges:
                                    cnt[int(e)] = cnt.get(int(e), 0) ^ 1
                        if {e for e, c in cnt.items() if c} == set(sub):
                            best = k
                            break
                    if best is not None:
                        break
                assert len(q) == best


@given(st.lists(st.integers(0, 36), min_size=1, max_size=6, unique=True))
def test_correction_reproduces_syndrome(dual7, decoders, qubits):
    h = dual7.lattice.check_matrix
    e = np.zeros(dual7.n, np.uint8)
    e[qubits] = 1
    syn = np.flatnonzero((h @ e) & 1)
    for dec in decoders.values():
        res = dec.decode(syn)
        if res.ok:
            assert np.array_equal((h @ res.correction.astype(np.uint8)) & 1, (h @ e) & 1)


def test_backends_agree(dual5):
    rng = np.random.default_rng(3)
    a = RestrictionDecoder(dual5, ADAPTED, "sparse")
    b = RestrictionDecoder(dual5, ADAPTED, "blossom")
    h = dual5.lattice.check_matrix
    for _ in range(60):
        e = (rng.random(dual5.n) < 0.1).astype(np.uint8)
        syn = np.flatnonzero((h @ e) & 1)
        ra, rb = a.decode(syn), b.decode(syn)
        assert ra.ok == rb.ok
        # same weight pairings may differ, but both must fix the syndrome
        if ra.ok:
            assert np.array_equal((h @ ra.correction) & 1, (h @ rb.correction) & 1)


def test_trace_is_json(dual5):
    res = RestrictionDecoder(dual5).decode([0, 1])
    data = res.to_json()
    assert data["variant"] == ADAPTED
    assert isinstance(res.dumps(), str)


@pytest.fixture(scope="module")
def runner5():
    return CircuitRunner(5, 1e-3, flag_scheme="renorm")


def test_measurement_flip_gives_identity(runner5):
    exp = runner5.experiment
    for bi, stack in enumerate("XZ"):
        for face in (0, 4, 8):
            slot = exp.layout.anc[2, bi, face]
            gate = int(np.flatnonzero(exp.circuit.meas_slot == slot)[0])
            b = exp.sample(1, 0.0, forced=[(gate, "flip")])
            s = b.syndrome[stack][0]
            ev = s[1:] ^ s[:-1]
            assert ev.sum() == 2
            res = runner5.decoders[stack].decode(ev, {k: v[0] for k, v in b.flags.items()}, runner5.flag_face)
            assert res.ok and not res.correction.any()


def test_spacetime_rejects_bad_shape(runner5):
    with pytest.raises(ValueError):
        runner5.decoders["X"].decode(np.zeros((2, 3), np.uint8))


@pytest.mark.parametrize("scheme", ["direct", "renorm"])
def test_single_faults_never_fail_with_flags(scheme):
    assert single_fault_failures(5, scheme) == []


def test_single_faults_fail_without_flags():
    # flags are needed: some single fault defeats the flag-blind decoder at d = 3
    assert single_fault_failures(3, "off")
