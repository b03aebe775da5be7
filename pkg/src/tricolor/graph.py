"""Matching graphs, space-time graphs and fault-enumerated edge weights.

Edges and weights are not hardcoded: a three-round memory circuit is built,
every single fault of its middle round is propagated, and each fault's
detection pattern is mapped onto the restricted graphs.  Unflagged faults
set the base weights; flagged faults, grouped by flag outcome, give the
flag-conditioned edge set used by :func:`renormalize`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .circuit import (
    LatticeSchedule,
    build_memory_circuit,
    build_stabilizer_circuit,
    fault_catalog,
    local_schedule,
)
from .lattice import COLOR_NAMES, COLOR_PAIRS, DualLattice, build_dual, color_pair, restrict

LATTICE, FLAG = 0, 1
SPATIAL, FLAG_ST, VERTICAL, DIAGONAL = 0, 1, 2, 3
KIND_NAMES = ("spatial", "flag", "vertical", "diagonal")

# weight marking an edge that must not be used (unflagged flag edges)
SENTINEL = -1.0

STACKS = ("X", "Z")  # type of stabilizer whose history is decoded


# --------------------------------------------------------------------------
# 2D matching graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatchingGraph:
    """Restricted lattice plus flag edges for one color pair.

    ``edges`` hold dual vertex ids.  ``projection[e]`` lists the dual edges
    an edge stands for: itself for lattice edges, the two restricted
    lattice edges ``e1, e2`` for a flag edge.
    """

    pair: str
    dual: DualLattice = field(repr=False)
    vertices: np.ndarray
    boundary: tuple[int, int]
    edges: np.ndarray
    kind: np.ndarray
    projection: tuple[tuple[int, ...], ...]
    flag_face: np.ndarray

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def local(self) -> dict[int, int]:
        """Dual vertex id -> position in :attr:`vertices`."""
        return {int(v): i for i, v in enumerate(self.vertices)}

    @cached_property
    def lookup(self) -> dict[tuple[int, int], int]:
        """Sorted dual-vertex pair -> edge index."""
        return {(int(min(u, v)), int(max(u, v))): i for i, (u, v) in enumerate(self.edges)}

    def to_json(self) -> dict:
        return {
            "pair": self.pair,
            "vertices": self.vertices.tolist(),
            "boundary": list(self.boundary),
            "edges": [
                {"id": i, "u": int(u), "v": int(v), "kind": ("lattice", "flag")[int(k)],
                 "projection": list(self.projection[i])}
                for i, ((u, v), k) in enumerate(zip(self.edges, self.kind))
            ],
        }


def weight_two_pairs(sched: LatticeSchedule) -> list[tuple[int, int, int]]:
    """``(face, qa, qb)`` for every weight-2 residual a single flagged fault can leave.

    Read off the flag-error tables of both circuit types of every face;
    qubit ids are global.
    """
    out = set()
    cache = {}
    for face in sched.lattice.faces:
        loc = local_schedule(sched, face.index)
        key = (loc.pairs, loc.ancilla_steps, loc.data_steps)
        if key not in cache:
            found = set()
            for basis in "XZ":
                cat = fault_catalog(build_stabilizer_circuit(loc, basis))
                part = cat.data_z if basis == "Z" else cat.data_x
                for row, flags in zip(part, cat.record[:, 1:]):
                    if not flags.any():
                        continue
                    for e in (row, row ^ 1):
                        if e.sum() == 2:
                            found.add(tuple(int(i) for i in np.flatnonzero(e)))
            cache[key] = found
        for a, b in cache[key]:
            out.add((face.index, face.qubits[a], face.qubits[b]))
    return sorted(out)


def build_matching_graph(dual: DualLattice, pair: str, flag_pairs=()) -> MatchingGraph:
    """Restricted lattice edges plus the flag edges implied by ``flag_pairs``.

    A weight-2 error on qubits ``qa, qb`` of one face highlights the two
    same-colored corners ``k1, k2`` not shared by their triangles.  In every
    restricted graph holding that color and the color of a shared corner
    ``m``, a flag edge ``k1 - k2`` is added that projects onto
    ``(k1, m), (m, k2)``.
    """
    rl = restrict(dual, pair)
    cols = rl.colors
    edges = [tuple(int(x) for x in e) for e in rl.edges]
    kind = [LATTICE] * len(edges)
    proj = [(int(e),) for e in rl.edge_ids]
    owner = [-1] * len(edges)
    seen = set()
    for face, qa, qb in flag_pairs:
        ta, tb = set(dual.triangles[qa].tolist()), set(dual.triangles[qb].tolist())
        shared = ta & tb
        if len(shared) != 2:
            raise ValueError(f"qubits {qa}, {qb} do not share a lattice edge")
        k1, k2 = (ta - tb).pop(), (tb - ta).pop()
        if dual.colors[k1] not in cols or dual.is_boundary(k1) and dual.is_boundary(k2):
            continue
        for m in sorted(shared):
            if dual.colors[m] not in cols:
                continue
            e1 = dual.edge_index.get((min(k1, m), max(k1, m)))
            e2 = dual.edge_index.get((min(k2, m), max(k2, m)))
            key = (min(k1, k2), max(k1, k2))
            if e1 is None or e2 is None or key in seen:
                continue
            seen.add(key)
            edges.append(key)
            kind.append(FLAG)
            proj.append((int(e1), int(e2)))
            owner.append(int(face))
    return MatchingGraph(
        pair=rl.pair,
        dual=dual,
        vertices=rl.vertices,
        boundary=rl.boundary,
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        kind=np.array(kind, dtype=np.int8),
        projection=tuple(proj),
        flag_face=np.array(owner, dtype=np.int64),
    )


# --------------------------------------------------------------------------
# Edge weight polynomials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeWeightPolynomial:
    """Probability that an odd number of independent locations fire an edge.

    ``rates[i]`` is location ``i``'s probability of producing exactly this
    edge, divided by ``p``.  Then ``P(p) = (1 - prod(1 - 2 r_i p)) / 2``,
    whose leading term is ``sum(r_i) p``.
    """

    rates: tuple[Fraction, ...]

    @property
    def coefficient(self) -> Fraction:
        return sum(self.rates, Fraction(0))

    @property
    def order(self) -> int:
        return 1 if self.rates else 0

    def expand(self) -> list[Fraction]:
        """Coefficients of ``P`` in increasing powers of ``p`` (constant first)."""
        prod = [Fraction(1)]
        for r in self.rates:
            nxt = [Fraction(0)] * (len(prod) + 1)
            for i, c in enumerate(prod):
                nxt[i] += c
                nxt[i + 1] -= 2 * r * c
            prod = nxt
        out = [-c / 2 for c in prod]
        out[0] += Fraction(1, 2)
        return out

    def __call__(self, p: float) -> float:
        prod = 1.0
        for r in self.rates:
            prod *= 1.0 - 2.0 * float(r) * p
        return 0.5 * (1.0 - prod)

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.expand()):
            if c:
                terms.append(f"{c}" + ("" if k == 0 else "p" if k == 1 else f"p^{k}"))
        return " + ".join(terms) or "0"


def _poly(locs: dict) -> EdgeWeightPolynomial:
    return EdgeWeightPolynomial(tuple(Fraction(int(c), 15) for _, c in sorted(locs.items())))


# --------------------------------------------------------------------------
# Fault enumeration
# --------------------------------------------------------------------------


@dataclass
class EdgeCatalog:
    """Fault-enumerated edges of every restricted graph and stack.

    Keys are ``(stack, pair)``.  ``spatial`` maps a 2D edge index to
    ``{location: rate * 15}``; ``vertical`` maps a local vertex;
    ``diagonal`` maps ``(lower local vertex, upper local vertex)``.
    ``flagged`` maps ``(half, face, pattern)`` to a dict
    ``(kind, key, offset) -> rate * 15`` where ``offset`` is the layer
    relative to the flag's round.  ``unmapped`` counts fault weight (in
    p/15) whose pattern is not a single edge.
    """

    schedule: LatticeSchedule = field(repr=False)
    graphs: dict
    spatial: dict
    vertical: dict
    diagonal: dict
    flagged: dict
    unmapped: dict

    def polynomials(self, stack: str, pair: str) -> dict:
        """``(kind, key) -> EdgeWeightPolynomial`` for the unflagged edges."""
        k = (stack, pair)
        out = {}
        for e, locs in self.spatial[k].items():
            out[(SPATIAL, e)] = _poly(locs)
        for v, locs in self.vertical[k].items():
            out[(VERTICAL, v)] = _poly(locs)
        for uv, locs in self.diagonal[k].items():
            out[(DIAGONAL, uv)] = _poly(locs)
        return out


def _full_syndrome(dual: DualLattice, bits: np.ndarray) -> set:
    """Dual vertices (boundary included) touched an odd number of times."""
    cnt = np.zeros(dual.num_vertices, dtype=np.int64)
    for q in np.flatnonzero(bits):
        cnt[dual.triangles[q]] += 1
    return set(np.flatnonzero(cnt & 1).tolist())


def build_graphs(dual: DualLattice, sched: LatticeSchedule | None = None) -> dict[str, MatchingGraph]:
    pairs = weight_two_pairs(sched) if sched is not None else ()
    return {c: build_matching_graph(dual, c, pairs) for c in COLOR_PAIRS}


def enumerate_edges(sched: LatticeSchedule, graphs: dict | None = None, ignore_flags: bool = False) -> EdgeCatalog:
    """Propagate every single fault of one round and sort it onto graph edges.

    With ``ignore_flags`` flag outcomes are disregarded, so flagged faults
    feed the base weights too (the ``flagged`` table is then empty).
    """
    lat = sched.lattice
    dual = build_dual(lat)
    graphs = graphs or build_graphs(dual, sched)
    circ, lay = build_memory_circuit(sched, 3)
    window = np.arange(lay.round_gate_start[1], lay.round_gate_start[2])
    cat = fault_catalog(circ, window)
    nf = lat.num_faces
    colors = dual.colors
    flag_face = lay.flag_face
    face_cols = {f: np.flatnonzero(flag_face == f) for f in range(nf)}

    spatial = {(s, c): defaultdict(lambda: defaultdict(int)) for s in STACKS for c in COLOR_PAIRS}
    vertical = {(s, c): defaultdict(lambda: defaultdict(int)) for s in STACKS for c in COLOR_PAIRS}
    diagonal = {(s, c): defaultdict(lambda: defaultdict(int)) for s in STACKS for c in COLOR_PAIRS}
    flagged = {(s, c): defaultdict(lambda: defaultdict(int)) for s in STACKS for c in COLOR_PAIRS}
    unmapped = {(s, c): 0 for s in STACKS for c in COLOR_PAIRS}

    for i in range(len(cat)):
        rec = cat.record[i]
        loc = int(cat.gate[i])
        w15 = int(cat.coeff15[i])
        # flags raised in the faulty round (index 1)
        flag_key = None
        for hi, half in enumerate("" if ignore_flags else "XZ"):
            bits = rec[lay.flag[1, hi]]
            if bits.any():
                face = int(flag_face[np.flatnonzero(bits)[0]])
                pattern = tuple(int(b) for b in bits[face_cols[face]])
                flag_key = (half, face, pattern)
        for si, stack in enumerate(STACKS):
            sig = rec[lay.anc[:, si, :]]  # (3, faces)
            det = sig.copy()
            det[1:] ^= sig[:-1]
            events = [(int(t), int(f)) for t, f in zip(*np.nonzero(det))]
            bits = cat.data_z[i] if stack == "X" else cat.data_x[i]
            for pair in COLOR_PAIRS:
                g = graphs[pair]
                cols = color_pair(pair)
                ev = [(t, f) for t, f in events if colors[f] in cols]
                if not ev:
                    continue
                hit = _classify(g, dual, ev, bits, cols)
                key = (stack, pair)
                if hit is None:
                    if flag_key is None:
                        unmapped[key] += w15
                    continue
                kind, ekey, t0 = hit
                if flag_key is not None:
                    flagged[key][flag_key][(kind, ekey, t0 - 1)] += w15
                elif kind in (SPATIAL, FLAG_ST):
                    if kind == FLAG_ST:
                        unmapped[key] += w15
                    else:
                        spatial[key][ekey][loc] += w15
                elif kind == VERTICAL:
                    vertical[key][ekey][loc] += w15
                else:
                    diagonal[key][ekey][loc] += w15

    def freeze(d):
        return {k: {kk: dict(vv) for kk, vv in v.items()} for k, v in d.items()}

    return EdgeCatalog(sched, graphs, freeze(spatial), freeze(vertical), freeze(diagonal),
                       freeze(flagged), unmapped)


def _classify(g: MatchingGraph, dual: DualLattice, ev, bits, cols):
    """Map restricted detection events to ``(kind, key, layer)`` or None."""
    if len(ev) == 1:
        (t, f), = ev
        bnd = [v for v in _full_syndrome(dual, bits) if dual.is_boundary(v) and dual.colors[v] in cols]
        if len(bnd) != 1:
            return None
        e = g.lookup.get((min(f, bnd[0]), max(f, bnd[0])))
        if e is None:
            return None
        return (SPATIAL if g.kind[e] == LATTICE else FLAG_ST), e, t
    if len(ev) != 2:
        return None
    (t1, u), (t2, w) = sorted(ev)
    if t1 == t2:
        e = g.lookup.get((min(u, w), max(u, w)))
        if e is None:
            return None
        return (SPATIAL if g.kind[e] == LATTICE else FLAG_ST), e, t1
    if t2 - t1 != 1:
        return None
    if u == w:
        return VERTICAL, g.local[u], t1
    e = g.lookup.get((min(u, w), max(u, w)))
    if e is None or g.kind[e] != LATTICE:
        return None
    return DIAGONAL, (g.local[u], g.local[w]), t1


def enumerate_diagonal_edges(catalog: EdgeCatalog, pair: str, stack: str = "X") -> dict:
    """Diagonal edges of one graph: ``(lower dual vertex, upper dual vertex) -> polynomial``."""
    g = catalog.graphs[pair]
    return {
        (int(g.vertices[a]), int(g.vertices[b])): _poly(locs)
        for (a, b), locs in sorted(catalog.diagonal[(stack, pair)].items())
    }


# --------------------------------------------------------------------------
# Space-time graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpaceTimeGraph:
    """``T`` copies of a 2D graph joined by vertical and diagonal edges.

    Vertex ``(local, t)`` has id ``t * nv + local`` with ``t`` 0-based.
    ``image[e]`` is the 2D edge an edge flattens to (-1 for vertical);
    ``layer[e]`` is its lower layer.
    """

    base: MatchingGraph
    rounds: int
    u: np.ndarray
    v: np.ndarray
    kind: np.ndarray
    image: np.ndarray
    layer: np.ndarray
    key: tuple

    @property
    def num_vertices(self) -> int:
        return self.base.num_vertices * self.rounds

    @property
    def num_edges(self) -> int:
        return len(self.u)

    @cached_property
    def is_boundary(self) -> np.ndarray:
        b = np.isin(self.base.vertices, self.base.boundary)
        return np.tile(b, self.rounds)

    @cached_property
    def index(self) -> dict:
        """``(kind, key, layer) -> edge id``."""
        return {(int(k), kk, int(t)): i for i, (k, kk, t) in enumerate(zip(self.kind, self.key, self.layer))}

    def vertex(self, dual_vertex: int, t: int) -> int:
        return t * self.base.num_vertices + self.base.local[int(dual_vertex)]

    def split(self, sid: int) -> tuple[int, int]:
        """Space-time id -> (dual vertex, 0-based layer)."""
        t, loc = divmod(int(sid), self.base.num_vertices)
        return int(self.base.vertices[loc]), t

    def flatten(self, edge_ids) -> np.ndarray:
        """g∘f: dual edge ids (mod 2) of a multiset of space-time edges."""
        cnt = defaultdict(int)
        for e in edge_ids:
            im = self.image[e]
            if im < 0:
                continue
            for de in self.base.projection[im]:
                cnt[de] ^= 1
        return np.array(sorted(k for k, v in cnt.items() if v), dtype=np.int64)

    def to_json(self, weights=None) -> dict:
        out = {"pair": self.base.pair, "rounds": self.rounds, "edges": []}
        for i in range(self.num_edges):
            a, ta = self.split(self.u[i])
            b, tb = self.split(self.v[i])
            row = {"id": i, "u": [a, ta], "v": [b, tb], "kind": KIND_NAMES[int(self.kind[i])],
                   "projection": [] if self.image[i] < 0 else list(self.base.projection[self.image[i]])}
            if weights is not None:
                row["weight"] = None if weights[i] == SENTINEL else float(weights[i])
            out["edges"].append(row)
        return out


def build_spacetime_graph(base: MatchingGraph, rounds: int, diagonals=()) -> SpaceTimeGraph:
    """Space-time graph with ``rounds`` layers; ``diagonals`` are local (lower, upper) pairs."""
    nv = base.num_vertices
    bnd = np.isin(base.vertices, base.boundary)
    us, vs, kinds, imgs, layers, keys = [], [], [], [], [], []
    loc = np.array([base.local[int(x)] for x in base.edges.ravel()], dtype=np.int64).reshape(-1, 2)
    for t in range(rounds):
        for e, (a, b) in enumerate(loc):
            us.append(t * nv + a), vs.append(t * nv + b)
            kinds.append(SPATIAL if base.kind[e] == LATTICE else FLAG_ST)
            imgs.append(e), layers.append(t), keys.append(e)
    for t in range(rounds - 1):
        for a in np.flatnonzero(~bnd):
            us.append(t * nv + a), vs.append((t + 1) * nv + a)
            kinds.append(VERTICAL), imgs.append(-1), layers.append(t), keys.append(int(a))
        for a, b in diagonals:
            e = base.lookup[(min(int(base.vertices[a]), int(base.vertices[b])),
                             max(int(base.vertices[a]), int(base.vertices[b])))]
            us.append(t * nv + a), vs.append((t + 1) * nv + b)
            kinds.append(DIAGONAL), imgs.append(e), layers.append(t), keys.append((int(a), int(b)))
    return SpaceTimeGraph(
        base=base,
        rounds=rounds,
        u=np.array(us, dtype=np.int64),
        v=np.array(vs, dtype=np.int64),
        kind=np.array(kinds, dtype=np.int8),
        image=np.array(imgs, dtype=np.int64),
        layer=np.array(layers, dtype=np.int64),
        key=tuple(keys),
    )


def compute_edge_weights(st: SpaceTimeGraph, catalog: EdgeCatalog, p: float, stack: str,
                         missing: float | None = None) -> np.ndarray:
    """``-log P_e`` for every edge; flag edges get :data:`SENTINEL`.

    Edges no single fault produces get ``missing`` (default: the weight of
    a probability ``p**2``).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    polys = catalog.polynomials(stack, st.base.pair)
    fallback = -2.0 * math.log(p) if missing is None else missing
    cache = {}
    w = np.empty(st.num_edges)
    for i, (k, key) in enumerate(zip(st.kind, st.key)):
        k = int(k)
        if k == FLAG_ST:
            w[i] = SENTINEL
            continue
        ck = (k, key)
        if ck not in cache:
            poly = polys.get(ck)
            cache[ck] = fallback if poly is None else -math.log(poly(p))
        w[i] = cache[ck]
    return w


def observed_flags(flags: dict, flag_face: np.ndarray) -> list[tuple[int, str, int, tuple]]:
    """``(round, half, face, pattern)`` for every flagged circuit of a history (rounds 1-based)."""
    out = []
    faces = np.unique(flag_face)
    cols = {int(f): np.flatnonzero(flag_face == f) for f in faces}
    for half in "XZ":
        arr = flags[half]
        for j in np.flatnonzero(arr.any(axis=1)):
            row = arr[j]
            for f in np.unique(flag_face[np.flatnonzero(row)]):
                out.append((int(j) + 1, half, int(f), tuple(int(b) for b in row[cols[int(f)]])))
    return out


def renormalize(st: SpaceTimeGraph, weights: np.ndarray, catalog: EdgeCatalog, flags, p: float,
                stack: str, alpha: float = 1.0) -> tuple[np.ndarray, int]:
    """Per-trial weights given the observed flags.

    ``flags`` lists ``(round, half, face, pattern)``.  Each flagged circuit
    whose outcome leaves a footprint in this stack joins ``m`` of its
    earliest layer.  Edges in the flag-consistent set get ``-log P_f`` with
    ``P_f`` the summed probability of the single faults producing that
    flag outcome and edge.  Every other edge touching a flagged layer is
    multiplied by ``p**(alpha * m)``.  Unflagged flag edges keep the
    sentinel.  Returns the new weights and the total ``m``.
    """
    table = catalog.flagged[(stack, st.base.pair)]
    idx = st.index
    prob = {}
    m = np.zeros(st.rounds, dtype=np.int64)
    for j, half, face, pattern in flags:
        entries = table.get((half, face, pattern))
        if not entries:
            continue
        hits = {}
        for (kind, key, off), c15 in entries.items():
            layer = j - 1 + off
            e = idx.get((kind, key, layer))
            if e is not None:
                hits[e] = hits.get(e, 0.0) + c15 * p / 15.0
        if not hits:
            continue
        m[min(int(st.layer[e]) for e in hits)] += 1
        for e, pr in hits.items():
            prob[e] = max(prob.get(e, 0.0), pr)
    if not prob:
        return weights, 0
    out = weights.copy()
    lo = m[st.layer]
    hi = np.where(st.kind >= VERTICAL, m[np.minimum(st.layer + 1, st.rounds - 1)], lo)
    boost = np.maximum(lo, hi) * alpha * -math.log(p)
    live = out != SENTINEL
    out[live] += boost[live]
    for e, pr in prob.items():
        out[e] = -math.log(pr)
    return out, int(m.sum())


# --------------------------------------------------------------------------
# Highlighted vertices
# --------------------------------------------------------------------------


def highlighted_vertices(detection_events: np.ndarray) -> list[tuple[int, int]]:
    """W as ``(face, t)`` pairs, ``t`` 1-based, from a ``(T, faces)`` event array."""
    t, f = np.nonzero(detection_events)
    return sorted(zip(f.tolist(), (t + 1).tolist()), key=lambda x: (x[1], x[0]))


def restrict_highlighted(W, dual: DualLattice, pair: str) -> list[tuple[int, int]]:
    cols = color_pair(pair)
    return [(f, t) for f, t in W if dual.colors[f] in cols]


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def _vertex_tag(dual: DualLattice, v: int) -> str:
    if dual.is_boundary(v):
        return "v" + COLOR_NAMES[int(dual.colors[v])]
    face = dual.lattice.faces[v]
    tag = COLOR_NAMES[face.color] + str(face.weight)
    if face.boundaries:
        tag += "@" + "".join(COLOR_NAMES[b] for b in face.boundaries)
    return tag


def coefficient_rows(catalog: EdgeCatalog) -> list[dict]:
    """One row per unflagged edge with its exact leading coefficient."""
    dual = catalog.graphs["RG"].dual
    rows = []
    for stack in STACKS:
        for pair in COLOR_PAIRS:
            g = catalog.graphs[pair]
            for (kind, key), poly in sorted(catalog.polynomials(stack, pair).items(), key=lambda x: (x[0][0], str(x[0][1]))):
                if kind == SPATIAL:
                    a, b = (int(x) for x in g.edges[key])
                elif kind == VERTICAL:
                    a = b = int(g.vertices[key])
                else:
                    a, b = int(g.vertices[key[0]]), int(g.vertices[key[1]])
                bulk = all(not dual.is_boundary(x) and not dual.lattice.faces[x].boundaries for x in (a, b))
                rows.append({
                    "stack": stack, "pair": pair, "kind": KIND_NAMES[kind], "u": a, "v": b,
                    "u_tag": _vertex_tag(dual, a), "v_tag": _vertex_tag(dual, b), "bulk": bulk,
                    "coefficient": poly.coefficient, "locations": len(poly.rates), "polynomial": str(poly),
                })
    return rows


def coefficient_csv(rows) -> str:
    buf = io.StringIO()
    cols = ["stack", "pair", "kind", "u", "v", "u_tag", "v_tag", "bulk", "coefficient", "locations", "polynomial"]
    w = csv.DictWriter(buf, fieldnames=cols)
    w.writeheader()
    for r in rows:
        w.writerow({k: str(r[k]) for k in cols})
    return buf.getvalue()


def dumps_graph(st: SpaceTimeGraph, weights=None) -> str:
    return json.dumps(st.to_json(weights), indent=1)


# Reference leading coefficients of the edge-weight table, keyed
# by its edge labels.  ``cls`` is the edge class the label refers to and
# ``pairs`` the restricted graphs it is quoted for.
REFERENCE_COEFFICIENTS = (
    ("e1", Fraction(44, 15), "spatial-bulk", COLOR_PAIRS),
    ("e2", Fraction(52, 15), "spatial-bulk", COLOR_PAIRS),
    ("eC1RG", Fraction(12, 5), "spatial-boundary", ("RG",)),
    ("emw6", Fraction(76, 15), "vertical-w6", COLOR_PAIRS),
    ("emw4", Fraction(64, 15), "vertical-w4", COLOR_PAIRS),
    ("eRGC1D1", Fraction(8, 15), "diagonal", ("RG",)),
    ("eRGC1D2", Fraction(16, 15), "diagonal", ("RG",)),
    ("eRGb2D1", Fraction(8, 5), "diagonal", ("RG",)),
    ("eBC1RB", Fraction(44, 15), "spatial-boundary", ("RB",)),
    ("eb1RB", Fraction(52, 15), "spatial-boundary", ("RB",)),
    ("eC1D1RB", Fraction(8, 15), "diagonal", ("RB",)),
    ("eC2RB", Fraction(16, 15), "spatial-boundary", ("RB",)),
    ("eb2D1RB", Fraction(8, 5), "diagonal", ("RB",)),
    ("eeGB", Fraction(12, 5), "spatial-boundary", ("GB",)),
    ("eBC1GB", Fraction(44, 15), "spatial-boundary", ("GB",)),
    ("eBb1GB", Fraction(52, 15), "spatial-boundary", ("GB",)),
    ("eC1D1GB", Fraction(8, 15), "diagonal", ("GB",)),
    ("eb2D1GB", Fraction(8, 5), "diagonal", ("GB",)),
    ("eC1D2GB", Fraction(16, 15), "diagonal", ("GB",)),
)
REFERENCE_COLUMNS = ("label", "pair", "class", "reference", "model", "present", "enumerated")


def _edge_class(dual: DualLattice, kind: str, a: int, b: int) -> str:
    if kind == "vertical":
        return "vertical-w%d" % dual.lattice.faces[a].weight
    if kind == "diagonal":
        return "diagonal"
    bulk = all(not dual.is_boundary(x) and not dual.lattice.faces[x].boundaries for x in (a, b))
    return "spatial-bulk" if bulk else "spatial-boundary"


def class_coefficients(catalog: EdgeCatalog, gate_kinds=None) -> dict:
    """``(pair, class) -> set`` of leading coefficients, both stacks.

    With ``gate_kinds`` only faults on gates of those kinds contribute,
    which is how the reference table was tabulated (CNOT failures only).
    """
    circ, _ = build_memory_circuit(catalog.schedule, 3)
    dual = catalog.graphs["RG"].dual
    out: dict = defaultdict(set)
    for (stack, pair), table in (
        *((k, ("spatial", v)) for k, v in catalog.spatial.items()),
        *((k, ("vertical", v)) for k, v in catalog.vertical.items()),
        *((k, ("diagonal", v)) for k, v in catalog.diagonal.items()),
    ):
        kind, edges = table
        g = catalog.graphs[pair]
        for key, locs in edges.items():
            if kind == "spatial":
                a, b = (int(x) for x in g.edges[key])
            elif kind == "vertical":
                a = b = int(g.vertices[key])
            else:
                a, b = int(g.vertices[key[0]]), int(g.vertices[key[1]])
            rate = sum(Fraction(w, 15) for loc, w in locs.items()
                       if gate_kinds is None or int(circ.kind[loc]) in gate_kinds)
            if rate:
                out[(pair, _edge_class(dual, kind, a, b))].add(rate)
    return dict(out)


def reference_rows(catalog: EdgeCatalog, gate_kinds=None, model: str = "full") -> list[dict]:
    """Compare each reference coefficient with the enumerated ones of its class."""
    found = class_coefficients(catalog, gate_kinds)
    rows = []
    for label, coeff, cls, pairs in REFERENCE_COEFFICIENTS:
        for pair in pairs:
            vals = sorted(found.get((pair, cls), ()))
            rows.append({
                "label": label, "pair": pair, "class": cls, "reference": coeff, "model": model,
                "present": coeff in vals, "enumerated": " ".join(str(v) for v in vals),
            })
    return rows


def single_pair_diagonals(catalog: EdgeCatalog) -> list[tuple]:
    """Diagonal edges fed by exactly two locations of rate 4p/15 each.

    Their polynomial is ``(8p/15)(1 - 4p/15)``.
    """
    out = []
    for (stack, pair), edges in catalog.diagonal.items():
        for key, locs in edges.items():
            if sorted(locs.values()) == [4, 4]:
                out.append((stack, pair, key, _poly(locs)))
    return out


def table_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns))
    w.writeheader()
    for r in rows:
        w.writerow({k: str(r[k]) for k in columns})
    return buf.getvalue()
