"""Noise sampling and Pauli-frame histories."""

import os
import subprocess
import sys

import numpy as np
import pytest

from tricolor.circuit import CNOT, MEAS_Z, propagate_faults
from tricolor.harness import _schedule
from tricolor.sim import MemoryExperiment, NoiseModel, run_history, sample_code_capacity


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(1.5)
    with pytest.raises(ValueError):
        NoiseModel(0.1, "biased")
    probs = NoiseModel(0.03).location_probability(np.arange(6))
    assert probs.tolist() == pytest.approx([0.02, 0.02, 0.03, 0.02, 0.02, 0.03])


def test_capacity_zero_rate():
    x, z = sample_code_capacity(19, 0.0, np.random.default_rng(0), 100)
    assert not x.any() and not z.any()


def test_capacity_frequencies():
    p = 0.3
    x, z = sample_code_capacity(50, p, np.random.default_rng(1), 4000)
    n = x.size
    for frac, want in (((x & ~z).sum() / n, p / 3), ((x & z).sum() / n, p / 3), ((~x & z & 1).sum() / n, p / 3)):
        assert abs(frac - want) < 4 * np.sqrt(want / n)


def test_noiseless_history_is_trivial():
    exp = MemoryExperiment(_schedule(5), 3)
    h, res = run_history(exp, NoiseModel(0.0))
    for b in "XZ":
        assert not h.syndrome[b].any()
        assert not h.flags[b].any()
    assert res.weight == 0
    with pytest.raises(ValueError):
        run_history(exp, NoiseModel(0.1, "capacity"))


def test_forced_fault_matches_propagation():
    exp = MemoryExperiment(_schedule(5), 2)
    circ = exp.circuit
    cnot = int(np.flatnonzero(circ.kind == CNOT)[40])
    for pay in ("XZ", "YI", "IY"):
        batch = exp.sample(2, 0.0, forced=[(cnot, pay)])
        eff = propagate_faults(circ, [(cnot, pay)])
        lay = exp.layout
        assert np.array_equal(batch.residual_x[1], eff.residual.x)
        assert np.array_equal(batch.residual_z[0], eff.residual.z)
        for bi, b in enumerate("XZ"):
            assert np.array_equal(batch.syndrome[b][0, 1:], eff.record[lay.anc[:, bi, :]])
            assert np.array_equal(batch.flags[b][1], eff.record[lay.flag[:, bi, :]])


def test_measurement_flip_is_a_timelike_pair():
    exp = MemoryExperiment(_schedule(5), 3)
    g = exp.layout.anc[0, 1, 2]
    gate = int(np.flatnonzero((exp.circuit.meas_slot == g))[0])
    assert exp.circuit.kind[gate] == MEAS_Z
    h, res = run_history(exp, NoiseModel(0.0), forced=[(gate, "flip")])
    ev = h.detection_events("Z")
    assert np.argwhere(ev).tolist() == [[0, 2], [1, 2]]
    assert res.weight == 0


def test_last_round_noiseless():
    exp = MemoryExperiment(_schedule(3), 2)
    last = exp.layout.round_gate_start[1]
    assert exp._noisy.max() < last
    b = exp.sample(200, 0.2, np.random.default_rng(3))
    # the final round sees the residual exactly
    h = exp.schedule.lattice.check_matrix
    assert np.array_equal(b.syndrome["Z"][:, -1], (b.residual_x @ h.T) & 1)
    assert np.array_equal(b.syndrome["X"][:, -1], (b.residual_z @ h.T) & 1)


def test_sampling_is_seeded():
    exp = MemoryExperiment(_schedule(3), 2)
    a = exp.sample(50, 0.01, np.random.default_rng(9))
    b = exp.sample(50, 0.01, np.random.default_rng(9))
    assert np.array_equal(a.syndrome["X"], b.syndrome["X"])
    assert np.array_equal(a.residual_z, b.residual_z)


def test_fault_rate_per_location():
    exp = MemoryExperiment(_schedule(3), 2)
    rng = np.random.default_rng(5)
    g, r, *_ = exp._sample_faults(2000, 0.01, rng)
    kinds = exp.circuit.kind[exp._noisy]
    expect = NoiseModel(0.01).location_probability(kinds).sum() * 2000
    # CNOT faults are two operand entries minus identity halves; count gates instead
    got = len(set(zip(g.tolist(), r.tolist())))
    assert abs(got - expect) < 5 * np.sqrt(expect)


_NUMPY_SCRIPT = """
import numpy as np
from tricolor.harness import _schedule
from tricolor.sim import MemoryExperiment
b = MemoryExperiment(_schedule(3), 2).sample(64, 0.02, np.random.default_rng(4))
print(int(b.syndrome['X'].sum()), int(b.syndrome['Z'].sum()), int(b.flags['X'].sum()), int(b.residual_x.sum()), int(b.residual_z.sum()))
"""


def test_numba_and_numpy_agree():
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, TRICOLOR_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", _NUMPY_SCRIPT], env=env, check=True,
                                   capture_output=True, text=True).stdout)
    assert outs[0] == outs[1]
