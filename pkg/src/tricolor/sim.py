"""Noise sampling and Pauli-frame execution of syndrome-extraction histories.

Every circuit here is Clifford and starts from a code state, so tracking the
Pauli frame of the errors is exact.  Measurement outcomes are reported as
flips relative to the noiseless reference run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circuit import (
    CNOT,
    IDLE,
    MEAS_X,
    MEAS_Z,
    PREP_X,
    PREP_Z,
    ROUND_STEPS,
    LatticeSchedule,
    MemoryLayout,
    build_memory_circuit,
)
from .lattice import DualLattice, PauliMask

CAPACITY = "capacity"
CIRCUIT = "circuit"

# the 15 two-qubit payloads as (x0, z0, x1, z1), index order IX, IY, ... ZZ
_PAULI_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
CNOT_PAYLOADS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]
_CNOT_BITS = np.array([_PAULI_XZ[s[0]] + _PAULI_XZ[s[1]] for s in CNOT_PAYLOADS], dtype=np.uint8)
_ONE_BITS = np.array([_PAULI_XZ[c] for c in "XYZ"], dtype=np.uint8)


@dataclass(frozen=True)
class NoiseModel:
    """Physical error rate ``p`` and model kind.

    ``capacity``: each data qubit suffers X, Y or Z with probability p/3.
    ``circuit``: two-qubit gates are followed by one of the 15 non-identity
    Paulis with probability p/15 each; idles (and single-qubit gates, of
    which the circuits have none) by X, Y or Z with p/3 each; preparations
    and measurements flip with probability 2p/3.
    """

    p: float
    kind: str = CIRCUIT

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.kind not in (CAPACITY, CIRCUIT):
            raise ValueError(f"unknown noise kind {self.kind!r}")

    def location_probability(self, kind: np.ndarray) -> np.ndarray:
        """Fault probability per gate of the given kinds."""
        p = self.p
        table = np.zeros(6)
        table[CNOT] = p
        table[IDLE] = p
        table[[PREP_Z, PREP_X, MEAS_Z, MEAS_X]] = 2 * p / 3
        return table[kind]


# --------------------------------------------------------------------------
# Code capacity
# --------------------------------------------------------------------------


def sample_code_capacity(dual: DualLattice | int, p: float, rng: np.random.Generator, shots: int | None = None):
    """I.i.d. depolarizing data errors.

    Returns a :class:`PauliMask` when ``shots`` is None, otherwise a pair of
    ``(shots, n)`` uint8 arrays ``(x, z)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    n = dual if isinstance(dual, (int, np.integer)) else dual.n
    r = rng.random((1 if shots is None else shots, n))
    # [0, p/3) X, [p/3, 2p/3) Y, [2p/3, p) Z
    x = (r < 2 * p / 3).astype(np.uint8)
    z = ((r >= p / 3) & (r < p)).astype(np.uint8)
    if shots is None:
        return PauliMask(x[0], z[0])
    return x, z


# --------------------------------------------------------------------------
# Circuit-level histories
# --------------------------------------------------------------------------


@dataclass
class SyndromeHistory:
    """Stabilizer and flag outcomes of one memory run.

    ``syndrome[b]`` has shape ``(T + 1, num_faces)`` with row 0 the
    reference σ_0; ``flags[b]`` has shape ``(T, num_flags)``.  ``b`` is
    ``"X"`` or ``"Z"``, the type of stabilizer measured.
    """

    syndrome: dict
    flags: dict
    rounds: int

    def detection_events(self, basis: str) -> np.ndarray:
        """``(T, num_faces)`` array of σ_{t-1} ⊕ σ_t for t = 1..T."""
        s = self.syndrome[basis]
        return s[1:] ^ s[:-1]


@dataclass
class HistoryBatch:
    """Many independent histories stacked along axis 0."""

    syndrome: dict  # basis -> (shots, T + 1, faces)
    flags: dict  # basis -> (shots, T, num_flags)
    residual_x: np.ndarray
    residual_z: np.ndarray
    rounds: int

    def __len__(self) -> int:
        return self.residual_x.shape[0]

    def history(self, i: int) -> SyndromeHistory:
        return SyndromeHistory(
            {b: v[i] for b, v in self.syndrome.items()},
            {b: v[i] for b, v in self.flags.items()},
            self.rounds,
        )

    def residual(self, i: int) -> PauliMask:
        return PauliMask(self.residual_x[i].copy(), self.residual_z[i].copy())


@dataclass
class MemoryExperiment:
    """A compiled T-round memory circuit ready for batched sampling.

    Round ``T`` is noiseless when ``noiseless_last`` is set.  With
    ``ideal_sigma0`` the reference σ_0 is the all-zero noiseless outcome;
    otherwise an extra noisy round is run first and its outcomes serve as
    σ_0.
    """

    schedule: LatticeSchedule
    rounds: int
    noiseless_last: bool = True
    ideal_sigma0: bool = True
    circuit: object = field(init=False, repr=False)
    layout: MemoryLayout = field(init=False, repr=False)

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("T must be >= 1")
        extra = 0 if self.ideal_sigma0 else 1
        self.circuit, self.layout = build_memory_circuit(self.schedule, self.rounds + extra)
        total = self.rounds + extra
        stop = self.layout.round_gate_start[total - 1] if self.noiseless_last else self.circuit.num_gates
        self._noisy = np.arange(stop, dtype=np.int64)

    @property
    def data_qubits(self) -> np.ndarray:
        return self.circuit.data_qubits

    def gate_of(self, round_index: int, step: int, qubit: int) -> int:
        """Gate index acting on ``qubit`` at ``step`` of a 1-based round (0 = extra σ_0 round)."""
        shift = 0 if self.ideal_sigma0 else 1
        t = 2 * ROUND_STEPS * (round_index - 1 + shift) + step
        hit = np.flatnonzero((self.circuit.step == t) & ((self.circuit.q0 == qubit) | (self.circuit.q1 == qubit)))
        if len(hit) != 1:
            raise ValueError(f"no unique gate on qubit {qubit} at step {t}")
        return int(hit[0])

    def _sample_faults(self, shots: int, p: float, rng: np.random.Generator):
        circ = self.circuit
        gates = self._noisy
        kind = circ.kind[gates]
        prob = NoiseModel(p).location_probability(kind)
        hit = rng.random((shots, len(gates))) < prob
        rows, cols = np.nonzero(hit)
        g = gates[cols]
        k = circ.kind[g]
        parts_row, parts_q, parts_x, parts_z, parts_g = [], [], [], [], []

        sel = k == CNOT
        if sel.any():
            pay = _CNOT_BITS[rng.integers(0, 15, sel.sum())]
            gg, rr = g[sel], rows[sel]
            for j, q in ((0, circ.q0[gg]), (1, circ.q1[gg])):
                parts_row.append(rr), parts_q.append(q), parts_g.append(gg)
                parts_x.append(pay[:, 2 * j]), parts_z.append(pay[:, 2 * j + 1])
        sel = k == IDLE
        if sel.any():
            pay = _ONE_BITS[rng.integers(0, 3, sel.sum())]
            gg = g[sel]
            parts_row.append(rows[sel]), parts_q.append(circ.q0[gg]), parts_g.append(gg)
            parts_x.append(pay[:, 0]), parts_z.append(pay[:, 1])
        for kk, bits in ((PREP_Z, (1, 0)), (PREP_X, (0, 1)), (MEAS_Z, (0, 0)), (MEAS_X, (0, 0))):
            sel = k == kk
            if sel.any():
                gg = g[sel]
                m = int(sel.sum())
                parts_row.append(rows[sel]), parts_q.append(circ.q0[gg]), parts_g.append(gg)
                parts_x.append(np.full(m, bits[0], np.uint8)), parts_z.append(np.full(m, bits[1], np.uint8))
        if not parts_g:
            e = np.zeros(0, np.int64)
            return e, e, e, np.zeros(0, np.uint8), np.zeros(0, np.uint8)
        return (
            np.concatenate(parts_g), np.concatenate(parts_row), np.concatenate(parts_q),
            np.concatenate(parts_x).astype(np.uint8), np.concatenate(parts_z).astype(np.uint8),
        )

    def _forced(self, faults, shots: int):
        """Expand ``(gate, payload)`` pairs into injections on every row."""
        circ = self.circuit
        gs, qs, xs, zs = [], [], [], []
        for g, payload in faults:
            k = int(circ.kind[g])
            ops = (int(circ.q0[g]), int(circ.q1[g])) if k == CNOT else (int(circ.q0[g]),)
            if payload == "flip":
                payload = {PREP_Z: "X", PREP_X: "Z"}.get(k, "I")
                if k in (MEAS_Z, MEAS_X):
                    gs.append(g), qs.append(ops[0]), xs.append(0), zs.append(0)
                    continue
            if len(payload) != len(ops):
                raise ValueError(f"payload {payload!r} does not match gate {g}")
            for q, c in zip(ops, payload):
                bx, bz = _PAULI_XZ[c]
                if bx or bz:
                    gs.append(g), qs.append(q), xs.append(bx), zs.append(bz)
        n = len(gs)
        rows = np.repeat(np.arange(shots, dtype=np.int64), n)
        tile = lambda a, dt: np.tile(np.asarray(a, dtype=dt), shots)  # noqa: E731
        return tile(gs, np.int64), rows, tile(qs, np.int64), tile(xs, np.uint8), tile(zs, np.uint8)

    def sample(self, shots: int, p: float, rng: np.random.Generator | None = None, forced=()) -> HistoryBatch:
        """Run ``shots`` independent histories at rate ``p``.

        ``forced`` is a list of ``(gate, payload)`` faults applied to every
        shot on top of the sampled ones (payload as in
        :func:`tricolor.circuit.propagate_faults`).
        """
        circ = self.circuit
        parts = []
        if p > 0:
            if rng is None:
                raise ValueError("rng required for p > 0")
            parts.append(self._sample_faults(shots, p, rng))
        if forced:
            parts.append(self._forced(forced, shots))
        if parts:
            g, r, q, x, z = (np.concatenate(c) for c in zip(*parts))
        else:
            g = r = q = np.zeros(0, np.int64)
            x = z = np.zeros(0, np.uint8)
        order = np.argsort(g, kind="stable")
        ptr = np.searchsorted(g[order], np.arange(circ.num_gates + 1)).astype(np.int64)
        fx = np.zeros((circ.num_qubits, shots), dtype=np.uint8)
        fz = np.zeros((circ.num_qubits, shots), dtype=np.uint8)
        rec = np.zeros((circ.num_measurements, shots), dtype=np.uint8)
        kernels.propagate(circ.kind, circ.q0, circ.q1, circ.meas_slot, ptr,
                          r[order], q[order], x[order], z[order], fx, fz, rec)
        lay = self.layout
        nf = lay.anc.shape[2]
        syn, flags = {}, {}
        for bi, b in enumerate("XZ"):
            s = rec[lay.anc[:, bi, :]]  # (rounds, faces, shots)
            s = np.transpose(s, (2, 0, 1))
            f = np.transpose(rec[lay.flag[:, bi, :]], (2, 0, 1))
            if self.ideal_sigma0:
                s = np.concatenate([np.zeros((shots, 1, nf), np.uint8), s], axis=1)
            else:
                f = f[:, 1:]
            syn[b] = np.ascontiguousarray(s)
            flags[b] = np.ascontiguousarray(f)
        dq = circ.data_qubits
        return HistoryBatch(syn, flags, fx[dq].T.copy(), fz[dq].T.copy(), self.rounds)


def run_history(experiment: MemoryExperiment, noise: NoiseModel, rng: np.random.Generator | None = None, forced=()):
    """One history: returns ``(SyndromeHistory, residual PauliMask)``."""
    if noise.kind != CIRCUIT:
        raise ValueError("run_history needs the circuit-level model")
    batch = experiment.sample(1, noise.p, rng, forced)
    return batch.history(0), batch.residual(0)
