"""Flagged syndrome-extraction circuits and the full-round schedule.

Every face gets one syndrome ancilla and one flag per owned edge: a face of
color ``c`` owns the edges it shares with faces (or the boundary) of color
``c - 1``.  Weight-6 faces therefore carry three flags, weight-4 faces two.

A Z-type measurement round looks like this for one face, steps 0 to 7::

    0     prep |0> on the ancilla, |+> on the flags
    1..6  CNOT flag -> ancilla, data -> flag, flag -> ancilla
    7     measure the ancilla in Z and the flags in X

The X-type round reverses every CNOT and swaps the preparation and
measurement bases.  A full round is the X round followed by the Z round.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, product

import numpy as np

from . import kernels
from .kernels import CNOT, IDLE, MEAS_X, MEAS_Z, PREP_X, PREP_Z
from .lattice import COLOR_NAMES, ColorLattice, Face, PauliMask

__all__ = [
    "PREP_Z", "PREP_X", "CNOT", "MEAS_Z", "MEAS_X", "IDLE", "GATE_NAMES",
    "DATA", "ANCILLA", "FLAG", "ROUND_STEPS",
    "Gate", "Circuit", "FaceSchedule", "LatticeSchedule", "FaultEffect",
    "face_flag_pairs", "bulk_face_schedule", "build_lattice_schedule",
    "build_stabilizer_circuit", "build_round_schedule", "build_memory_circuit",
    "single_fault_basis", "propagate_faults", "verify_flag_property",
    "flag_error_table", "measured_operator", "reference_labels",
]

GATE_NAMES = ("PrepZ", "PrepX", "CNOT", "MeasZ", "MeasX", "Idle")
DATA, ANCILLA, FLAG = 0, 1, 2
ROLE_NAMES = ("data", "ancilla", "flag")
ROUND_STEPS = 8

# Ancilla CNOT steps for the three flags of a hexagon.  Flags are indexed
# f1, f2, f3: f1 and f3 wrap the first two ancilla slots, f2 the last one.
# Each flag touches its two data qubits strictly between its ancilla CNOTs.
_W6_ANCILLA = ((1, 4), (3, 6), (2, 5))
_W6_DATA = ((2, 3), (4, 5), (3, 4))


@dataclass(frozen=True)
class Gate:
    kind: int
    qubits: tuple[int, ...]
    step: int

    def __str__(self) -> str:
        return f"{self.step:3d} {GATE_NAMES[self.kind]:5s} " + " ".join(map(str, self.qubits))


@dataclass(frozen=True)
class FaceSchedule:
    """Timing of one face's circuit inside an 8-step basis round.

    ``pairs[k]`` are the two data qubits (in CNOT order) coupled to flag
    ``k``; ``ancilla_steps[k]`` and ``data_steps[k]`` are the steps of the
    flag-ancilla and flag-data CNOTs.  Qubit entries may be global ids or
    positions within the face, depending on the caller.
    """

    pairs: tuple[tuple[int, int], ...]
    ancilla_steps: tuple[tuple[int, int], ...]
    data_steps: tuple[tuple[int, int], ...]

    @property
    def num_flags(self) -> int:
        return len(self.pairs)

    @property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(q for pr in self.pairs for q in pr)

    def data_times(self) -> dict[int, int]:
        return {q: t for pr, ts in zip(self.pairs, self.data_steps) for q, t in zip(pr, ts)}

    def validate(self) -> None:
        busy_a = [t for ts in self.ancilla_steps for t in ts]
        if len(set(busy_a)) != len(busy_a):
            raise ValueError("ancilla used twice in one step")
        for (a0, a1), (d0, d1) in zip(self.ancilla_steps, self.data_steps):
            if not (1 <= a0 < d0 < d1 < a1 <= ROUND_STEPS - 2):
                raise ValueError(f"flag steps out of order: {(a0, d0, d1, a1)}")
        if len(set(self.data_qubits)) != len(self.data_qubits):
            raise ValueError("data qubit coupled to two flags of one face")


@dataclass(frozen=True, eq=False)
class Circuit:
    """Timestep-ordered gate list with qubit roles.

    Arrays ``kind``, ``q0``, ``q1`` and ``step`` are the packed gate list
    handed to the propagation kernel; ``meas_slot[g]`` indexes the
    measurement record for measurement gates and is -1 otherwise.
    """

    num_qubits: int
    roles: np.ndarray
    kind: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    step: np.ndarray
    meas_slot: np.ndarray
    meas_qubit: np.ndarray
    basis: str
    face: int | None = None
    data_qubits: np.ndarray = field(default=None, repr=False)
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def num_gates(self) -> int:
        return len(self.kind)

    @property
    def num_measurements(self) -> int:
        return len(self.meas_qubit)

    @property
    def depth(self) -> int:
        return int(self.step.max()) + 1 if len(self.step) else 0

    @property
    def gates(self) -> list[Gate]:
        out = []
        for k, a, b, s in zip(self.kind.tolist(), self.q0.tolist(), self.q1.tolist(), self.step.tolist()):
            out.append(Gate(k, (a, b) if k == CNOT else (a,), s))
        return out

    def conflicts(self) -> list[tuple[int, int]]:
        """(step, qubit) pairs where a qubit is touched more than once."""
        seen: dict[tuple[int, int], int] = {}
        for g in self.gates:
            for q in g.qubits:
                seen[(g.step, q)] = seen.get((g.step, q), 0) + 1
        return sorted(k for k, v in seen.items() if v > 1)

    def to_json(self) -> dict:
        return {
            "basis": self.basis,
            "face": self.face,
            "num_qubits": self.num_qubits,
            "roles": [ROLE_NAMES[r] for r in self.roles.tolist()],
            "gates": [
                {"step": g.step, "kind": GATE_NAMES[g.kind], "qubits": list(g.qubits)} for g in self.gates
            ],
        }

    def dumps(self) -> str:
        lines = [f"# basis={self.basis} qubits={self.num_qubits} gates={self.num_gates}"]
        lines += [str(g) for g in self.gates if g.kind != IDLE]
        return "\n".join(lines)


class _Builder:
    def __init__(self, roles):
        self.roles = np.asarray(roles, dtype=np.int8)
        self.kind: list[int] = []
        self.q0: list[int] = []
        self.q1: list[int] = []
        self.step: list[int] = []

    def add(self, kind, step, a, b=-1):
        self.kind.append(kind)
        self.q0.append(a)
        self.q1.append(b)
        self.step.append(step)

    def fill_idles(self, t0: int, t1: int, qubits) -> None:
        touched = set()
        for k, a, b, s in zip(self.kind, self.q0, self.q1, self.step):
            if t0 <= s < t1:
                touched.add((s, a))
                if k == CNOT:
                    touched.add((s, b))
        for s in range(t0, t1):
            for q in qubits:
                if (s, q) not in touched:
                    self.add(IDLE, s, q)

    def build(self, basis, face=None, data_qubits=None, meta=None) -> Circuit:
        kind = np.array(self.kind, dtype=np.int64)
        step = np.array(self.step, dtype=np.int64)
        # stable sort by step keeps insertion order within a step
        order = np.argsort(step, kind="stable")
        kind, step = kind[order], step[order]
        q0 = np.array(self.q0, dtype=np.int64)[order]
        q1 = np.array(self.q1, dtype=np.int64)[order]
        is_meas = (kind == MEAS_Z) | (kind == MEAS_X)
        meas_slot = np.full(len(kind), -1, dtype=np.int64)
        meas_slot[is_meas] = np.arange(int(is_meas.sum()))
        circ = Circuit(
            num_qubits=len(self.roles),
            roles=self.roles,
            kind=kind,
            q0=q0,
            q1=q1,
            step=step,
            meas_slot=meas_slot,
            meas_qubit=q0[is_meas],
            basis=basis,
            face=face,
            data_qubits=np.flatnonzero(self.roles == DATA) if data_qubits is None else data_qubits,
            meta=meta or {},
        )
        bad = circ.conflicts()
        if bad:
            raise ValueError(f"schedule conflict at (step, qubit) {bad[0]} ({len(bad)} total)")
        return circ


def _emit_face(b: _Builder, basis: str, sched: FaceSchedule, ancilla: int, flags, t0: int) -> None:
    """Append one face's gates to ``b``; data qubits in ``sched`` are global ids."""
    if basis == "Z":
        b.add(PREP_Z, t0, ancilla)
        for f in flags:
            b.add(PREP_X, t0, f)
    else:
        b.add(PREP_X, t0, ancilla)
        for f in flags:
            b.add(PREP_Z, t0, f)
    for f, pr, ta, td in zip(flags, sched.pairs, sched.ancilla_steps, sched.data_steps):
        for t in ta:
            if basis == "Z":
                b.add(CNOT, t0 + t, f, ancilla)
            else:
                b.add(CNOT, t0 + t, ancilla, f)
        for q, t in zip(pr, td):
            if basis == "Z":
                b.add(CNOT, t0 + t, q, f)
            else:
                b.add(CNOT, t0 + t, f, q)
    last = t0 + ROUND_STEPS - 1
    if basis == "Z":
        b.add(MEAS_Z, last, ancilla)
        for f in flags:
            b.add(MEAS_X, last, f)
    else:
        b.add(MEAS_X, last, ancilla)
        for f in flags:
            b.add(MEAS_Z, last, f)


# --------------------------------------------------------------------------
# Face geometry
# --------------------------------------------------------------------------


def face_flag_pairs(lattice: ColorLattice, face: Face) -> tuple[tuple[int, int], ...]:
    """Data-qubit pairs of the edges owned by ``face`` (one flag each).

    The edge between angular slots ``k`` and ``k+1`` faces the neighbour in
    direction ``60(k+1)`` degrees, whose color is ``c+1`` for even and
    ``c+2`` for odd direction index; the face owns it when that color is
    ``c-1``.  The boundary edge of a truncated face is owned when the shared
    boundary vertex of its end qubits has color ``c-1``.
    """
    c = face.color
    own = (c - 1) % 3
    nf = lattice.num_faces
    qs, sl = face.qubits, face.slots
    w = len(qs)
    pairs = []
    for i in range(w):
        a, b = i, (i + 1) % w
        qa, qb = qs[a], qs[b]
        if (sl[b] - sl[a]) % 6 == 1:
            j = sl[b] % 6
            if j % 2 == 1:
                pairs.append((qa, qb))
        else:
            shared = set(lattice.triangles[qa]) & set(lattice.triangles[qb])
            if any(v >= nf and lattice.vertex_colors[v] == own for v in shared):
                pairs.append((qa, qb))
    return tuple(pairs)


def bulk_face_schedule(face: Face, pairs, tau) -> FaceSchedule:
    """Schedule of a face from its color's slot-timing rule.

    ``tau`` maps angular slot to the data-CNOT step.  The flag whose pair
    has the earliest data steps takes ancilla steps ``(1, 4)``, the middle
    one ``(2, 5)`` and the latest ``(3, 6)``.
    """
    slot_of = dict(zip(face.qubits, face.slots))
    rows = []
    for pr in pairs:
        ts = sorted((tau[slot_of[q]], q) for q in pr)
        rows.append((tuple(t for t, _ in ts), tuple(q for _, q in ts)))
    order = sorted(range(len(rows)), key=lambda k: rows[k][0])
    anc = {}
    for rank, k in enumerate(order):
        anc[k] = (1 + rank, 4 + rank)
    sched = FaceSchedule(
        pairs=tuple(rows[k][1] for k in range(len(rows))),
        ancilla_steps=tuple(anc[k] for k in range(len(rows))),
        data_steps=tuple(rows[k][0] for k in range(len(rows))),
    )
    sched.validate()
    return sched


def reference_labels(sched: FaceSchedule) -> dict:
    """Map a weight-6 face schedule onto the f1/f2/f3 and q1..q6 labels.

    f1 owns ancilla steps (1, 4), f3 owns (2, 5) and f2 owns (3, 6).  Within
    each pair, the qubit touched second is the one a lone flag can leave a
    single-qubit error on: q1 for f1, q4 for f2, q6 for f3.
    """
    if sched.num_flags != 3:
        raise ValueError("reference labels are defined for weight-6 faces only")
    by_anc = {ta: k for k, ta in enumerate(sched.ancilla_steps)}
    f1, f3, f2 = by_anc[(1, 4)], by_anc[(2, 5)], by_anc[(3, 6)]
    p1, p2, p3 = sched.pairs[f1], sched.pairs[f2], sched.pairs[f3]
    return {
        "flags": {"f1": f1, "f2": f2, "f3": f3},
        "qubits": {"q1": p1[1], "q2": p1[0], "q3": p2[0], "q4": p2[1], "q5": p3[0], "q6": p3[1]},
    }


# --------------------------------------------------------------------------
# Lattice-wide schedule
# --------------------------------------------------------------------------

# Default slot -> data-CNOT step for each color (index = angular slot).
# Picked from ``search_bulk_timings``: the uniform choice, which gives the
# same edge coefficients in all three restricted graphs.
DEFAULT_TAU = ((2, 3, 3, 4, 4, 5),) * 3


@dataclass(frozen=True, eq=False)
class LatticeSchedule:
    """Qubit layout plus one :class:`FaceSchedule` per face (global ids).

    Qubits are numbered data first, then one ancilla per face, then flags
    face by face.  ``tags[f]`` names the schedule variant of face ``f``:
    ``"bulk"``, ``"b1"``/``"b2"``/``"b3"`` for weight-4 faces on the red,
    green and blue boundaries, or ``"corner"`` for faces touching two.
    """

    lattice: ColorLattice
    faces: tuple[FaceSchedule, ...]
    ancilla: np.ndarray
    flags: tuple[tuple[int, ...], ...]
    tags: tuple[str, ...]
    tau: tuple[tuple[int, ...], ...]

    @property
    def num_qubits(self) -> int:
        return self.lattice.n + len(self.ancilla) + sum(len(f) for f in self.flags)

    @cached_property
    def roles(self) -> np.ndarray:
        r = np.full(self.num_qubits, FLAG, dtype=np.int8)
        r[: self.lattice.n] = DATA
        r[self.ancilla] = ANCILLA
        return r

    @cached_property
    def flag_owner(self) -> np.ndarray:
        """Face id for every qubit that is a flag, -1 elsewhere."""
        own = np.full(self.num_qubits, -1, dtype=np.int64)
        for f, fl in enumerate(self.flags):
            own[list(fl)] = f
        return own


def _boundary_tag(face: Face) -> str:
    if face.weight == 6:
        return "bulk"
    if len(face.boundaries) == 1:
        return "b" + str(face.boundaries[0] + 1)
    return "corner"


def _w4_candidates(pairs):
    """All depth-8 timings of a two-flag face, as FaceSchedule objects."""
    out = []
    anc_pairs = [(a, b) for a in range(1, 7) for b in range(a + 3, 7)]
    for (a0, a1), (b0, b1) in product(anc_pairs, repeat=2):
        if len({a0, a1, b0, b1}) < 4:
            continue
        for d0 in combinations(range(a0 + 1, a1), 2):
            for d1 in combinations(range(b0 + 1, b1), 2):
                for o0, o1 in product((False, True), repeat=2):
                    p0 = pairs[0][::-1] if o0 else pairs[0]
                    p1 = pairs[1][::-1] if o1 else pairs[1]
                    out.append(FaceSchedule((p0, p1), ((a0, a1), (b0, b1)), (d0, d1)))
    return out


def _tau_options():
    """The 48 hexagon timings: pair slot classes A, B, C and in-pair order."""
    pairs = ((0, 1), (2, 3), (4, 5))
    steps = ((2, 3), (3, 4), (4, 5))
    out = []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for bits in product((0, 1), repeat=3):
            tau = [0] * 6
            for k, pr in enumerate(pairs):
                s = steps[perm[k]]
                first, second = (pr[1], pr[0]) if bits[k] else pr
                tau[first], tau[second] = s
            out.append(tuple(tau))
    return out


def bulk_timings_valid(tau) -> bool:
    """Every bulk data qubit sees three distinct CNOT steps."""
    for c in range(3):
        up = (tau[c][0], tau[(c + 1) % 3][2], tau[(c + 2) % 3][4])
        down = (tau[c][1], tau[(c + 1) % 3][5], tau[(c + 2) % 3][3])
        if len(set(up)) < 3 or len(set(down)) < 3:
            return False
    return True


def search_bulk_timings():
    """All valid (tau_R, tau_G, tau_B) triples."""
    opts = _tau_options()
    return [t for t in product(opts, repeat=3) if bulk_timings_valid(t)]


def build_lattice_schedule(lattice: ColorLattice, tau=None, w4_rank=None) -> LatticeSchedule:
    """Assign a timing to every face.

    Hexagons follow ``tau`` (one slot -> step map per color).  Weight-4
    faces are then solved as a small constraint problem: each boundary type
    gets one shared timing (translation symmetry), corners are solved
    individually; every candidate must keep the data-qubit steps distinct
    and raise at most one flag per single fault.  Among those, timings that
    leave no idle step between a data qubit's CNOTs are preferred.

    Raises
    ------
    ValueError
        If no conflict-free assignment exists.
    """
    tau = DEFAULT_TAU if tau is None else tau
    n = lattice.n
    nf = lattice.num_faces
    pairs = [face_flag_pairs(lattice, f) for f in lattice.faces]
    scheds: list[FaceSchedule | None] = [None] * nf
    tags = [_boundary_tag(f) for f in lattice.faces]
    for f in lattice.faces:
        if f.weight == 6:
            scheds[f.index] = bulk_face_schedule(f, pairs[f.index], tau[f.color])
        elif f.weight != 4:
            raise ValueError(f"unexpected face weight {f.weight}")

    used: dict[int, set] = {q: set() for q in range(n)}
    for s in scheds:
        if s is not None:
            for q, t in s.data_times().items():
                used[q].add(t)

    def fits(s: FaceSchedule) -> bool:
        return all(t not in used[q] for q, t in s.data_times().items())

    def gaps(s: FaceSchedule) -> int:
        # idle steps between a data qubit's CNOTs; a fault there lands in
        # different rounds for different faces and adds diagonal edges
        out = 0
        for q, t in s.data_times().items():
            ts = used[q] | {t}
            out += max(ts) - min(ts) + 1 - len(ts)
        return out

    def commit(fid, s):
        scheds[fid] = s
        for q, t in s.data_times().items():
            used[q].add(t)

    rank = w4_rank or _w4_rank
    groups: dict[str, list[int]] = {}
    for f in lattice.faces:
        if f.weight == 4:
            groups.setdefault(tags[f.index], []).append(f.index)
    # boundary types first, corners last
    for tag in sorted(groups, key=lambda t: (t == "corner", t)):
        fids = groups[tag]
        if tag == "corner":
            for fid in fids:
                cands = [s for s in _w4_candidates(pairs[fid]) if fits(s) and _single_flag_ok(s)]
                if not cands:
                    raise ValueError(f"no valid weight-4 timing for corner face {fid}")
                commit(fid, min(cands, key=lambda s: (gaps(s), rank(lattice, fid, s))))
            continue
        # a shared variant: describe candidates relative to face geometry
        proto = fids[0]
        best = None
        for s in _w4_candidates(pairs[proto]):
            if not _single_flag_ok(s):
                continue
            variant = [_transfer(lattice, proto, s, fid) for fid in fids]
            if all(fits(v) for v in variant) and _disjoint_variants(variant):
                key = (sum(gaps(v) for v in variant), rank(lattice, proto, s))
                if best is None or key < best[0]:
                    best = (key, variant)
        if best is None:
            raise ValueError(f"no shared weight-4 timing for boundary {tag}")
        for fid, v in zip(fids, best[1]):
            commit(fid, v)

    ancilla = np.arange(n, n + nf, dtype=np.int64)
    flags = []
    nxt = n + nf
    for s in scheds:
        flags.append(tuple(range(nxt, nxt + s.num_flags)))
        nxt += s.num_flags
    return LatticeSchedule(lattice, tuple(scheds), ancilla, tuple(flags), tuple(tags), tuple(map(tuple, tau)))


def _transfer(lattice, proto: int, s: FaceSchedule, fid: int) -> FaceSchedule:
    """Copy a timing from face ``proto`` to a face of identical shape."""
    src = lattice.faces[proto]
    dst = lattice.faces[fid]
    by_slot = dict(zip(dst.slots, dst.qubits))
    slot_of = dict(zip(src.qubits, src.slots))
    pairs = tuple(tuple(by_slot[slot_of[q]] for q in pr) for pr in s.pairs)
    return FaceSchedule(pairs, s.ancilla_steps, s.data_steps)


def _disjoint_variants(variant) -> bool:
    seen = set()
    for v in variant:
        for q, t in v.data_times().items():
            if (q, t) in seen:
                return False
            seen.add((q, t))
    return True


def _w4_rank(lattice, fid, s: FaceSchedule):
    # prefer compact timings, then lexicographic for determinism
    span = max(t for ts in s.ancilla_steps for t in ts) - min(t for ts in s.ancilla_steps for t in ts)
    return (span, s.ancilla_steps, s.data_steps, s.pairs)


@lru_cache(maxsize=None)
def _single_flag_ok_cached(key) -> bool:
    pairs, anc, dat = key
    s = FaceSchedule(pairs, anc, dat)
    for basis in "XZ":
        circ = build_stabilizer_circuit(s, basis)
        for eff in _single_fault_effects(circ):
            wt = _reduced_weight(eff[0], circ)
            if wt > 1 and not eff[1][1:].any():
                return False
    return True


def _single_flag_ok(s: FaceSchedule) -> bool:
    # relabel data to local positions so the cache sees shape only
    loc = {q: i for i, q in enumerate(sorted(s.data_qubits))}
    pairs = tuple(tuple(loc[q] for q in pr) for pr in s.pairs)
    return _single_flag_ok_cached((pairs, s.ancilla_steps, s.data_steps))


# --------------------------------------------------------------------------
# Circuit builders
# --------------------------------------------------------------------------


def local_schedule(sched: LatticeSchedule, fid: int) -> FaceSchedule:
    """Face ``fid``'s timing with data qubits renumbered 0..w-1 in face order."""
    face = sched.lattice.faces[fid]
    pos = {q: i for i, q in enumerate(face.qubits)}
    s = sched.faces[fid]
    return FaceSchedule(tuple(tuple(pos[q] for q in pr) for pr in s.pairs), s.ancilla_steps, s.data_steps)


def build_stabilizer_circuit(sched: FaceSchedule, basis: str, face: int | None = None) -> Circuit:
    """Stand-alone circuit for one face.

    ``sched`` must use local data positions ``0..w-1``; the ancilla is qubit
    ``w`` and flags follow in schedule order.  Idles fill every untouched
    (step, qubit) slot of the 8-step round.
    """
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    w = len(sched.data_qubits)
    if w not in (4, 6):
        raise ValueError(f"unsupported face weight {w}")
    if sorted(sched.data_qubits) != list(range(w)):
        raise ValueError("schedule must use local data positions")
    sched.validate()
    nfl = sched.num_flags
    roles = [DATA] * w + [ANCILLA] + [FLAG] * nfl
    b = _Builder(roles)
    _emit_face(b, basis, sched, w, list(range(w + 1, w + 1 + nfl)), 0)
    b.fill_idles(0, ROUND_STEPS, range(len(roles)))
    return b.build(basis, face=face, data_qubits=np.arange(w), meta={"flags": list(range(w + 1, w + 1 + nfl))})


def _emit_round(b: _Builder, sched: LatticeSchedule, basis: str, t0: int) -> None:
    for fid, s in enumerate(sched.faces):
        _emit_face(b, basis, s, int(sched.ancilla[fid]), sched.flags[fid], t0)
    b.fill_idles(t0, t0 + ROUND_STEPS, range(sched.num_qubits))


def build_round_schedule(sched: LatticeSchedule, basis: str) -> Circuit:
    """One 8-step round measuring every stabilizer of type ``basis``.

    Raises
    ------
    ValueError
        On any qubit used twice in a step, naming the first conflict.
    """
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    b = _Builder(sched.roles)
    _emit_round(b, sched, basis, 0)
    return b.build(basis)


@dataclass(frozen=True, eq=False)
class MemoryLayout:
    """Measurement-record indices of a multi-round circuit.

    ``anc[j, b, f]`` is the record slot of face ``f``'s ancilla in round
    ``j`` and basis ``b`` (0 = X, 1 = Z); ``flag[j][b]`` lists the slots of
    all flags in :attr:`LatticeSchedule.flags` order.
    """

    rounds: int
    anc: np.ndarray
    flag: np.ndarray  # (rounds, 2, num_flags)
    flag_face: np.ndarray  # face owning each flag column
    round_gate_start: np.ndarray  # first gate index of each round


def build_memory_circuit(sched: LatticeSchedule, rounds: int) -> tuple[Circuit, MemoryLayout]:
    """``rounds`` full rounds, each an X round followed by a Z round."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    b = _Builder(sched.roles)
    for j in range(rounds):
        _emit_round(b, sched, "X", 2 * ROUND_STEPS * j)
        _emit_round(b, sched, "Z", 2 * ROUND_STEPS * j + ROUND_STEPS)
    circ = b.build("XZ", meta={"rounds": rounds})
    slot = {}
    is_meas = circ.meas_slot >= 0
    for g in np.flatnonzero(is_meas):
        slot[(int(circ.step[g]), int(circ.q0[g]))] = int(circ.meas_slot[g])
    nf = sched.lattice.num_faces
    flat_flags = [q for fl in sched.flags for q in fl]
    anc = np.zeros((rounds, 2, nf), dtype=np.int64)
    flag = np.zeros((rounds, 2, len(flat_flags)), dtype=np.int64)
    for j in range(rounds):
        for bi in range(2):
            t = 2 * ROUND_STEPS * j + ROUND_STEPS * bi + ROUND_STEPS - 1
            anc[j, bi] = [slot[(t, int(a))] for a in sched.ancilla]
            flag[j, bi] = [slot[(t, q)] for q in flat_flags]
    starts = np.searchsorted(circ.step, 2 * ROUND_STEPS * np.arange(rounds))
    layout = MemoryLayout(rounds, anc, flag, sched.flag_owner[flat_flags], starts)
    return circ, layout


# --------------------------------------------------------------------------
# Fault propagation
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FaultEffect:
    """Outcome of propagating a fault set through a circuit."""

    residual: PauliMask
    record: np.ndarray

    @property
    def syndrome_flip(self) -> bool:
        """Flip of the first ancilla measurement (single-face circuits)."""
        return bool(self.record[0])

    @property
    def flags(self) -> tuple[int, ...]:
        return tuple(int(b) for b in self.record[1:])


def _run(circ: Circuit, rows: int, gates, qubits, xs, zs, rowidx):
    """Propagate ``rows`` frames with the given injections; returns frames and record."""
    gates = np.asarray(gates, dtype=np.int64)
    order = np.argsort(gates, kind="stable")
    gates = gates[order]
    ptr = np.searchsorted(gates, np.arange(circ.num_gates + 1)).astype(np.int64)
    fx = np.zeros((circ.num_qubits, rows), dtype=np.uint8)
    fz = np.zeros((circ.num_qubits, rows), dtype=np.uint8)
    rec = np.zeros((circ.num_measurements, rows), dtype=np.uint8)
    kernels.propagate(
        circ.kind, circ.q0, circ.q1, circ.meas_slot, ptr,
        np.asarray(rowidx, dtype=np.int64)[order], np.asarray(qubits, dtype=np.int64)[order],
        np.asarray(xs, dtype=np.uint8)[order], np.asarray(zs, dtype=np.uint8)[order],
        fx, fz, rec,
    )
    return fx, fz, rec


_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def propagate_faults(circ: Circuit, faults) -> FaultEffect:
    """Propagate a set of faults and report the residual data error and record.

    ``faults`` is an iterable of ``(gate_index, payload)``; the payload is a
    Pauli string with one letter per gate operand (applied after the gate)
    or ``"flip"`` for a measurement or preparation flip.
    """
    gs, qs, xs, zs = [], [], [], []
    for g, payload in faults:
        k = int(circ.kind[g])
        ops = (int(circ.q0[g]), int(circ.q1[g])) if k == CNOT else (int(circ.q0[g]),)
        if payload == "flip":
            if k in (MEAS_Z, MEAS_X):
                gs.append(g), qs.append(ops[0]), xs.append(0), zs.append(0)
                continue
            if k == PREP_Z:
                payload = "X"
            elif k == PREP_X:
                payload = "Z"
            else:
                raise ValueError(f"gate {g} cannot flip")
        if len(payload) != len(ops):
            raise ValueError(f"payload {payload!r} does not match gate arity {len(ops)}")
        for q, p in zip(ops, payload):
            bx, bz = _PAULI_BITS[p]
            if bx or bz:
                gs.append(g), qs.append(q), xs.append(bx), zs.append(bz)
    fx, fz, rec = _run(circ, 1, gs, qs, xs, zs, [0] * len(gs))
    dq = circ.data_qubits
    return FaultEffect(PauliMask(fx[dq, 0].copy(), fz[dq, 0].copy()), rec[:, 0].copy())


@dataclass(frozen=True, eq=False)
class FaultCatalog:
    """Every single fault of a circuit with its propagated effect.

    ``coeff[i]`` is the fault's probability divided by ``p``, as a
    (numerator, denominator) pair over 15 (CNOT 1/15, idle 5/15, flips
    10/15).  Effects: ``data_x``/``data_z`` (faults x data qubits) and
    ``record`` (faults x measurements).
    """

    gate: np.ndarray
    payload: tuple[str, ...]
    coeff15: np.ndarray  # probability / p in units of 1/15
    data_x: np.ndarray
    data_z: np.ndarray
    record: np.ndarray

    def __len__(self) -> int:
        return len(self.gate)


_CNOT_PAYLOADS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]


def single_fault_basis(circ: Circuit, gates=None):
    """Propagate the X and Z basis faults of every gate operand.

    Returns ``(index, data_x, data_z, record)`` where ``index`` maps
    ``(gate, operand, 'X'|'Z')`` and ``(gate, 'flip')`` to a row.
    Faults are linear, so any Pauli payload is the XOR of basis rows.
    """
    gates = range(circ.num_gates) if gates is None else gates
    index = {}
    gs, qs, xs, zs, rows = [], [], [], [], []
    r = 0
    for g in gates:
        k = int(circ.kind[g])
        if k in (MEAS_Z, MEAS_X):
            index[(g, "flip")] = r
            gs.append(g), qs.append(int(circ.q0[g])), xs.append(0), zs.append(0), rows.append(r)
            r += 1
            continue
        ops = (int(circ.q0[g]), int(circ.q1[g])) if k == CNOT else (int(circ.q0[g]),)
        for i, q in enumerate(ops):
            for p, (bx, bz) in (("X", (1, 0)), ("Z", (0, 1))):
                index[(g, i, p)] = r
                gs.append(g), qs.append(q), xs.append(bx), zs.append(bz), rows.append(r)
                r += 1
    fx, fz, rec = _run(circ, r, gs, qs, xs, zs, rows)
    dq = circ.data_qubits
    return index, fx[dq].T.copy(), fz[dq].T.copy(), rec.T.copy()


def fault_catalog(circ: Circuit, gates=None) -> FaultCatalog:
    """All single faults of the circuit-level model with their effects."""
    index, bx, bz, brec = single_fault_basis(circ, gates)
    gate_ids = sorted({key[0] for key in index})
    rows_sel: list[list[int]] = []
    gate_l, pay_l, coeff_l = [], [], []
    for g in gate_ids:
        k = int(circ.kind[g])
        if k in (MEAS_Z, MEAS_X):
            rows_sel.append([index[(g, "flip")]])
            gate_l.append(g), pay_l.append("flip"), coeff_l.append(10)
        elif k in (PREP_Z, PREP_X):
            p = "X" if k == PREP_Z else "Z"
            rows_sel.append([index[(g, 0, p)]])
            gate_l.append(g), pay_l.append("flip"), coeff_l.append(10)
        elif k == IDLE:
            for p in "XYZ":
                sel = [index[(g, 0, c)] for c in "XZ" if c in _PAULI_EXPAND[p]]
                rows_sel.append(sel)
                gate_l.append(g), pay_l.append(p), coeff_l.append(5)
        else:
            for pay in _CNOT_PAYLOADS:
                sel = [index[(g, i, c)] for i, p in enumerate(pay) for c in "XZ" if c in _PAULI_EXPAND[p]]
                rows_sel.append(sel)
                gate_l.append(g), pay_l.append(pay), coeff_l.append(1)
    n = len(rows_sel)
    width = max(len(s) for s in rows_sel) if n else 1
    sel = np.full((n, width), -1, dtype=np.int64)
    for i, s in enumerate(rows_sel):
        sel[i, : len(s)] = s
    def combine(basis):
        pad = np.vstack([basis, np.zeros((1, basis.shape[1]), dtype=np.uint8)])
        out = np.zeros((n, basis.shape[1]), dtype=np.uint8)
        for c in range(width):
            out ^= pad[sel[:, c]]
        return out
    return FaultCatalog(
        gate=np.array(gate_l, dtype=np.int64),
        payload=tuple(pay_l),
        coeff15=np.array(coeff_l, dtype=np.int64),
        data_x=combine(bx),
        data_z=combine(bz),
        record=combine(brec),
    )


_PAULI_EXPAND = {"I": "", "X": "X", "Z": "Z", "Y": "XZ"}


def _single_fault_effects(circ: Circuit):
    cat = fault_catalog(circ)
    for i in range(len(cat)):
        yield (cat.data_x[i], cat.data_z[i]), cat.record[i]


def _reduced_weight(dxz, circ: Circuit) -> int:
    """Weight of a face-local residual, minimized over the face stabilizers."""
    x, z = dxz
    best = None
    for sx in (0, 1):
        for sz in (0, 1):
            w = int(np.count_nonzero((x ^ sx) | (z ^ sz)))
            best = w if best is None else min(best, w)
    return best


def measured_operator(circ: Circuit) -> np.ndarray:
    """Data qubits whose basis-conjugate single Pauli flips the ancilla outcome.

    For a Z-type circuit an X on each data qubit is injected at the start;
    the returned support should equal the face.
    """
    err = "X" if circ.basis == "Z" else "Z"
    first = {}
    for g in range(circ.num_gates):
        q = int(circ.q0[g])
        if circ.kind[g] in (PREP_Z, PREP_X) and q not in first:
            first[q] = g
    out = []
    for q in circ.data_qubits.tolist():
        g0 = next(g for g in range(circ.num_gates) if circ.q0[g] == q or circ.q1[g] == q)
        # inject before the data qubit's first gate by faulting the step-0 idle
        if circ.kind[g0] == IDLE:
            eff = propagate_faults(circ, [(g0, err)])
            if eff.record[0]:
                out.append(q)
    return np.array(out, dtype=np.int64)


def verify_flag_property(circ: Circuit, t: int):
    """Exhaustively check the t-flag property of a single-face circuit.

    Returns ``(True, None)`` or ``(False, counterexample)`` where the
    counterexample lists the fault indices into :func:`fault_catalog`.
    A fault set of size ``v <= t`` fails if no flag is raised and the
    residual error has reduced weight above ``v``.
    """
    if t not in (1, 2):
        raise ValueError("t must be 1 or 2")
    cat = fault_catalog(circ)
    flags = cat.record[:, 1:]
    n = len(cat)
    x, z = cat.data_x, cat.data_z

    def wt(xx, zz):
        ws = [np.count_nonzero((xx ^ sx) | (zz ^ sz), axis=-1) for sx in (0, 1) for sz in (0, 1)]
        return np.minimum.reduce(ws)

    w1 = wt(x, z)
    bad = np.flatnonzero((w1 > 1) & ~flags.any(axis=1))
    if len(bad):
        return False, (int(bad[0]),)
    if t == 2:
        for i in range(n):
            xx = x[i] ^ x[i:]
            zz = z[i] ^ z[i:]
            fl = (flags[i] ^ flags[i:]).any(axis=1)
            w2 = wt(xx, zz)
            bad = np.flatnonzero((w2 > 2) & ~fl)
            if len(bad):
                return False, (i, i + int(bad[0]))
    return True, None


def max_residual_weight(circ: Circuit, faults: int, per_type: bool = False) -> int:
    """Largest reduced residual weight over all sets of 1 or 2 faults.

    By default the whole Pauli residual is reduced jointly.  With
    ``per_type`` the X and Z parts are reduced and weighed separately (they
    are decoded separately), and the larger part counts.
    """
    cat = fault_catalog(circ)
    x, z = cat.data_x, cat.data_z

    def wt(xx, zz):
        if per_type:
            w = circ.data_qubits.size
            wx = np.count_nonzero(xx, axis=-1)
            wz = np.count_nonzero(zz, axis=-1)
            return np.maximum(np.minimum(wx, w - wx), np.minimum(wz, w - wz))
        ws = [np.count_nonzero((xx ^ sx) | (zz ^ sz), axis=-1) for sx in (0, 1) for sz in (0, 1)]
        return np.minimum.reduce(ws)

    best = int(wt(x, z).max())
    if faults == 2:
        for i in range(len(cat)):
            best = max(best, int(wt(x[i] ^ x[i:], z[i] ^ z[i:]).max()))
    return best


def flag_error_table(circ: Circuit) -> dict[tuple[int, ...], list[str]]:
    """Flag pattern -> distinct residual data errors from single faults.

    Only the error type the circuit spreads is listed: Z errors for a Z
    circuit, X errors for an X circuit.  Each residual is reduced modulo
    the face stabilizer to its lighter representative (ties go to the
    lexicographically smaller bit string).  Keys are flag bit tuples in
    flag order; ``(0, ..., 0)`` collects the unflagged faults.
    """
    cat = fault_catalog(circ)
    part = cat.data_z if circ.basis == "Z" else cat.data_x
    letter = "Z" if circ.basis == "Z" else "X"
    table: dict[tuple[int, ...], set] = {}
    for i in range(len(cat)):
        pat = tuple(int(b) for b in cat.record[i, 1:])
        e = part[i]
        e2 = e ^ 1
        if (e2.sum(), tuple(e2)) < (e.sum(), tuple(e)):
            e = e2
        table.setdefault(pat, set()).add("".join(letter if b else "I" for b in e))
    return {k: sorted(v, key=lambda s: (len(s) - s.count("I"), s)) for k, v in sorted(table.items())}
