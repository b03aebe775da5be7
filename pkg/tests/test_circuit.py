"""Flag circuits, lattice schedules and fault propagation."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricolor.circuit import (
    CNOT,
    DATA,
    IDLE,
    build_lattice_schedule,
    build_memory_circuit,
    build_round_schedule,
    build_stabilizer_circuit,
    fault_catalog,
    flag_error_table,
    local_schedule,
    max_residual_weight,
    measured_operator,
    reference_labels,
    propagate_faults,
    verify_flag_property,
)
from tricolor.decoder import direct_flag_corrections
from tricolor.harness import REFERENCE_DIRECT_TABLE, _schedule, direct_table_matches_reference, verify_flags
from tricolor.lattice import build_lattice


@pytest.mark.parametrize("d", (3, 5, 7, 9))
def test_qubit_count(d):
    sched = build_lattice_schedule(build_lattice(d))
    # data + one ancilla per face + one flag per owned edge
    assert sched.num_qubits == (3 * d - 1) ** 2 // 4
    assert sum(len(f) for f in sched.flags) == sum(f.weight // 2 for f in sched.lattice.faces)


@pytest.mark.parametrize("basis", "XZ")
def test_round_has_no_conflicts(basis):
    circ = build_round_schedule(_schedule(7), basis)
    assert circ.conflicts() == []
    assert circ.depth == 8


def test_memory_circuit_layout():
    sched = _schedule(5)
    circ, lay = build_memory_circuit(sched, 3)
    assert circ.conflicts() == []
    assert lay.anc.shape == (3, 2, sched.lattice.num_faces)
    assert len(np.unique(lay.anc)) == lay.anc.size
    assert circ.num_measurements == 3 * 2 * (sched.lattice.num_faces + lay.flag.shape[2])
    # every data qubit is busy or idle at every step
    busy = np.zeros((circ.depth, circ.num_qubits), bool)
    for g in circ.gates:
        for q in g.qubits:
            busy[g.step, q] = True
    assert busy[:, sched.roles == DATA].all()


@pytest.mark.parametrize("basis", "XZ")
def test_measured_operator_is_the_face(basis):
    sched = _schedule(7)
    for face in sched.lattice.faces:
        if face.index % 3:
            continue
        circ = build_stabilizer_circuit(local_schedule(sched, face.index), basis, face.index)
        assert sorted(measured_operator(circ).tolist()) == sorted(circ.data_qubits.tolist())


def _distinct_circuits(d=7):
    sched = _schedule(d)
    seen = {}
    for face in sched.lattice.faces:
        loc = local_schedule(sched, face.index)
        seen.setdefault((sched.tags[face.index], loc), face)
    return sched, seen


def test_flag_properties_all_circuits():
    rows = verify_flags(7)
    assert {r["tag"] for r in rows} >= {"bulk", "b1", "b2", "b3"}
    for r in rows:
        assert r["one_flag"], r
        assert r["max_residual_1"] <= 2, r
        if r["weight"] == 6:
            assert r["two_flag"], r
            assert r["max_residual_2"] <= 3, r
            assert r["direct_table_matches_reference"], r


def test_w6_reference_labels():
    sched = _schedule(7)
    f = next(f for f in sched.lattice.faces if f.weight == 6)
    loc = local_schedule(sched, f.index)
    lab = reference_labels(loc)
    assert sorted(lab["flags"].values()) == [0, 1, 2]
    assert sorted(lab["qubits"].values()) == sorted(loc.data_qubits)
    # alter the reference table and it must stop matching
    direct = direct_flag_corrections(sched)
    pos = {q: i for i, q in enumerate(f.qubits)}
    table = {(h, pat): tuple(pos[q] for q in qs) for (h, ff, pat), qs in direct.items() if ff == f.index}
    assert direct_table_matches_reference(loc, table)
    assert ("f1", "f3") in REFERENCE_DIRECT_TABLE
    table[("X", (1, 1, 1))] = (0,)
    assert not direct_table_matches_reference(loc, table)


def test_unflagged_circuit_fails_the_flag_check():
    # Without flags a single ancilla fault spreads to weight 3 > 1.
    sched = _schedule(7)
    f = next(f for f in sched.lattice.faces if f.weight == 6)
    circ = build_stabilizer_circuit(local_schedule(sched, f.index), "Z", f.index)
    cat = fault_catalog(circ)
    unflag = ~cat.record[:, 1:].any(axis=1)
    heavy = [i for i in range(len(cat)) if min(cat.data_z[i].sum(), 6 - cat.data_z[i].sum()) > 1]
    assert heavy, "some single fault must spread"
    assert not unflag[heavy].any()
    assert verify_flag_property(circ, 1)[0]


def test_flag_error_table_single_flags():
    sched = _schedule(7)
    f = next(f for f in sched.lattice.faces if f.weight == 6)
    circ = build_stabilizer_circuit(local_schedule(sched, f.index), "Z", f.index)
    table = flag_error_table(circ)
    # unflagged faults leave at most one error
    assert all(s.count("Z") <= 1 for s in table[(0, 0, 0)])
    assert max_residual_weight(circ, 1) == 2


def test_catalog_matches_direct_propagation():
    sched = _schedule(5)
    f = sched.lattice.faces[0]
    circ = build_stabilizer_circuit(local_schedule(sched, f.index), "X", f.index)
    cat = fault_catalog(circ)
    for i in range(0, len(cat), 7):
        eff = propagate_faults(circ, [(int(cat.gate[i]), cat.payload[i])])
        assert np.array_equal(eff.residual.x, cat.data_x[i])
        assert np.array_equal(eff.residual.z, cat.data_z[i])
        assert np.array_equal(eff.record, cat.record[i])


@given(st.lists(st.tuples(st.integers(0, 10_000), st.sampled_from(["XI", "IZ", "YY", "ZX"])), max_size=4))
def test_propagation_is_linear(faults):
    sched = _schedule(3)
    circ = build_stabilizer_circuit(local_schedule(sched, 1), "Z", 1)
    cnots = np.flatnonzero(circ.kind == CNOT)
    fs = [(int(cnots[g % len(cnots)]), pay) for g, pay in faults]
    total = propagate_faults(circ, fs)
    x = np.zeros_like(total.residual.x)
    z = np.zeros_like(total.residual.z)
    rec = np.zeros_like(total.record)
    for f in fs:
        e = propagate_faults(circ, [f])
        x ^= e.residual.x
        z ^= e.residual.z
        rec ^= e.record
    assert np.array_equal(x, total.residual.x)
    assert np.array_equal(z, total.residual.z)
    assert np.array_equal(rec, total.record)


def test_idle_data_fault_is_local():
    sched = _schedule(5)
    circ, _ = build_memory_circuit(sched, 1)
    idle = [g for g in range(circ.num_gates) if circ.kind[g] == IDLE and sched.roles[circ.q0[g]] == DATA]
    for g in idle[::11]:
        e = propagate_faults(circ, [(g, "Y")])
        assert e.residual.weight == 1
