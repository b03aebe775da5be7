"""Restriction decoders for the triangular color code.

The adapted decoder matches highlighted vertices in all three restricted
graphs, groups the matched paths into connected components, and lifts:

* chains with an endpoint on ``v_R`` (the set Sigma) are lifted on their
  own, at the vertices of a color chosen from their endpoints;
* every other RG and RB path is merged into one edge set rho and lifted at
  its red vertices.

The naive decoder matches in RG and RB only and lifts everything at the
red vertices, ``v_R`` included.  Both work unchanged on space-time
histories once each matched path is flattened onto the dual lattice.

Corrections are the symmetric difference of the local lifts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graph import (
    FLAG,
    SENTINEL,
    EdgeCatalog,
    build_spacetime_graph,
    compute_edge_weights,
    observed_flags,
    renormalize,
)
from .lattice import BLUE, COLOR_NAMES, GREEN, RED, DualLattice, color_pair, restrict
from .matching import BOUNDARY, Matcher, WeightedGraph, mwpm, PairingProblem

ADAPTED, NAIVE = "adapted", "naive"
VARIANTS = (ADAPTED, NAIVE)
_PAIRS = {ADAPTED: ("RG", "RB", "GB"), NAIVE: ("RG", "RB")}


# --------------------------------------------------------------------------
# Matched paths and components
# --------------------------------------------------------------------------


@dataclass
class Link:
    """One matched pair realised as a path on the dual lattice.

    Endpoint keys are hashable vertex labels (``(face, layer)`` in space
    time); every boundary endpoint gets its own key, so components never
    pass through the boundary.
    """

    pair: str
    ends: tuple
    colors: tuple[int, int]
    boundary: tuple[bool, bool]
    edges: np.ndarray  # dual edge ids, reduced mod 2


@dataclass
class Component:
    links: list[int]
    terminals: list[int]  # colors of the boundary endpoints

    @property
    def is_chain(self) -> bool:
        return bool(self.terminals)


def find_components(links: list[Link]) -> list[Component]:
    """Connected components of the pairing multigraph.

    Uses union-find on endpoint keys; boundary endpoints are never merged.
    """
    ids: dict = {}
    parent: list[int] = []

    def node(k) -> int:
        i = ids.get(k)
        if i is None:
            i = ids[k] = len(parent)
            parent.append(i)
        return i

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    link_node = []
    for ln in links:
        a = node(object())  # the link itself
        link_node.append(a)
        for k, b in zip(ln.ends, ln.boundary):
            if not b:
                ra, rb = find(a), find(node(k))
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for i, a in enumerate(link_node):
        groups.setdefault(find(a), []).append(i)
    out = []
    for members in groups.values():
        terms = [c for i in members for c, b in zip(links[i].colors, links[i].boundary) if b]
        out.append(Component(sorted(members), sorted(terms)))
    out.sort(key=lambda c: c.links[0])
    return out


def lift_color(terminals: list[int]) -> int:
    """Color at which a chain touching ``v_R`` is lifted."""
    if len(terminals) != 2:
        raise ValueError(f"a chain needs two boundary endpoints, got {len(terminals)}")
    a, b = terminals
    if a == b == RED:
        return GREEN
    rest = {RED, GREEN, BLUE} - {a, b}
    if len(rest) != 1:
        raise ValueError("a chain in Sigma must end on v_R")
    return rest.pop()


def xor_edges(arrays) -> np.ndarray:
    """Symmetric difference of edge-id collections."""
    acc: set = set()
    for a in arrays:
        for e in (a.tolist() if isinstance(a, np.ndarray) else a):
            acc ^= {e}
    return np.array(sorted(acc), dtype=np.int64)


# --------------------------------------------------------------------------
# Local lift
# --------------------------------------------------------------------------


def _gf2_solve(rows: list[int], rhs: list[int], nvar: int):
    """Particular solution and kernel basis of ``A x = b`` over GF(2) (bitmask rows)."""
    rows = list(rows)
    rhs = list(rhs)
    pivots = []
    r = 0
    for col in range(nvar):
        bit = 1 << col
        sel = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        rhs[r], rhs[sel] = rhs[sel], rhs[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
                rhs[i] ^= rhs[r]
        pivots.append(col)
        r += 1
    if any(rhs[i] for i in range(r, len(rows))):
        return None, []
    x = 0
    for i, col in enumerate(pivots):
        if rhs[i]:
            x |= 1 << col
    kernel = []
    for col in range(nvar):
        if col in pivots:
            continue
        k = 1 << col
        for i, pc in enumerate(pivots):
            if rows[i] & (1 << col):
                k |= 1 << pc
        kernel.append(k)
    return x, kernel


class Lifter:
    """Minimum-weight local lifts on a dual lattice.

    At vertex ``v`` the unknowns are the triangles (qubits) around ``v`` and
    there is one parity equation per dual edge at ``v``: the chosen
    triangles must contain exactly the requested edges an odd number of
    times.  Among all solutions the one with fewest qubits wins, ties going
    to the lexicographically smallest qubit list.  Results are cached.
    """

    def __init__(self, dual: DualLattice):
        self.dual = dual
        self._cache: dict = {}
        self._local: dict = {}

    def _setup(self, v: int):
        if v in self._local:
            return self._local[v]
        dual = self.dual
        c = int(dual.colors[v])
        tris = dual.star[v]
        pos = {(0, 1): 0, (0, 2): 1, (1, 2): 2}
        mine = [pos[tuple(sorted((c, o)))] for o in range(3) if o != c]
        eq: dict[int, int] = {}
        for j, q in enumerate(tris):
            for k in mine:
                e = int(dual.triangle_edges[q, k])
                if e >= 0:
                    eq[e] = eq.get(e, 0) | (1 << j)
        edges = sorted(eq)
        out = (tris, edges, [eq[e] for e in edges])
        self._local[v] = out
        return out

    def edges_at(self, v: int) -> list[int]:
        return self._setup(v)[1]

    def lift(self, v: int, edges) -> np.ndarray | None:
        """Qubits of the minimum lift at ``v`` of the given incident edges, or None."""
        key = (v, frozenset(int(e) for e in edges))
        if key in self._cache:
            return self._cache[key]
        tris, all_edges, rows = self._setup(v)
        want = key[1]
        if not want <= set(all_edges):
            raise ValueError(f"edges {sorted(want - set(all_edges))} are not incident to vertex {v}")
        x, kernel = _gf2_solve(rows, [int(e in want) for e in all_edges], len(tris))
        if x is None:
            res = None
        else:
            if len(kernel) > 16:
                raise ValueError(f"lift kernel at vertex {v} too large to search")
            best = None
            for r in range(len(kernel) + 1):
                for combo in combinations(kernel, r):
                    y = x
                    for k in combo:
                        y ^= k
                    qs = tuple(int(tris[j]) for j in range(len(tris)) if y >> j & 1)
                    cand = (len(qs), qs)
                    if best is None or cand < best:
                        best = cand
            res = np.array(best[1], dtype=np.int64)
        self._cache[key] = res
        return res


def _incidence(dual: DualLattice, edges: np.ndarray, color: int, include_boundary: bool) -> dict:
    out: dict[int, list[int]] = {}
    for e in edges:
        for v in dual.edges[e]:
            v = int(v)
            if dual.colors[v] != color or (dual.is_boundary(v) and not include_boundary):
                continue
            out.setdefault(v, []).append(int(e))
    return out


# --------------------------------------------------------------------------
# Decoding result
# --------------------------------------------------------------------------


@dataclass
class DecodeResult:
    variant: str
    correction: np.ndarray  # bool per qubit
    links: list[Link] = field(default_factory=list)
    components: list[Component] = field(default_factory=list)
    sigma: list[int] = field(default_factory=list)
    rho: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    lifts: list = field(default_factory=list)  # (vertex, source, qubits)
    ok: bool = True
    message: str = ""

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "ok": self.ok,
            "message": self.message,
            "correction": np.flatnonzero(self.correction).tolist(),
            "links": [
                {"pair": ln.pair, "ends": [list(e) if isinstance(e, tuple) else e for e in ln.ends],
                 "colors": [COLOR_NAMES[c] for c in ln.colors], "boundary": list(ln.boundary),
                 "edges": ln.edges.tolist()}
                for ln in self.links
            ],
            "components": [
                {"links": c.links, "terminals": [COLOR_NAMES[t] for t in c.terminals],
                 "in_sigma": i in self.sigma}
                for i, c in enumerate(self.components)
            ],
            "rho": self.rho.tolist(),
            "lifts": [{"vertex": v, "source": s, "qubits": q.tolist()} for v, s, q in self.lifts],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, default=str)


def lift_links(dual: DualLattice, lifter: Lifter, links: list[Link], variant: str = ADAPTED) -> DecodeResult:
    """Turn matched paths into a qubit correction."""
    corr = np.zeros(dual.n, dtype=bool)
    res = DecodeResult(variant, corr, links=links)

    def apply(edges, color, source, include_boundary=False):
        for v, inc in sorted(_incidence(dual, edges, color, include_boundary).items()):
            q = lifter.lift(v, inc)
            if q is None:
                res.ok = False
                res.message = f"no lift at vertex {v} ({source})"
                continue
            corr[q] ^= True
            res.lifts.append((v, source, q))

    if variant == NAIVE:
        res.rho = xor_edges(ln.edges for ln in links if ln.pair in ("RG", "RB"))
        apply(res.rho, RED, "rho", include_boundary=True)
        return res
    if variant != ADAPTED:
        raise ValueError(f"unknown decoder variant {variant!r}")

    res.components = comps = find_components(links)
    in_sigma = set()
    for i, comp in enumerate(comps):
        if comp.is_chain and RED in comp.terminals:
            if len(comp.terminals) != 2:
                res.ok = False
                res.message = f"component {i} has {len(comp.terminals)} boundary endpoints"
                continue
            res.sigma.append(i)
            in_sigma.update(comp.links)
            gamma = xor_edges(links[j].edges for j in comp.links)
            apply(gamma, lift_color(comp.terminals), f"sigma{i}")
    res.rho = xor_edges(links[j].edges for j in range(len(links))
                        if j not in in_sigma and links[j].pair in ("RG", "RB"))
    apply(res.rho, RED, "rho")
    return res


# --------------------------------------------------------------------------
# Code capacity
# --------------------------------------------------------------------------


def restricted_graph(dual: DualLattice, pair: str, weights=None) -> WeightedGraph:
    """Restricted lattice as a :class:`WeightedGraph` over all dual vertex ids.

    Edge ``i`` of the graph is ``restrict(dual, pair).edge_ids[i]``.
    """
    rl = restrict(dual, pair)
    bnd = np.zeros(dual.num_vertices, dtype=bool)
    bnd[list(rl.boundary)] = True
    e = rl.edges
    w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=float)
    return WeightedGraph(dual.num_vertices, e[:, 0].copy(), e[:, 1].copy(), w, bnd)


class RestrictionDecoder:
    """Code-capacity decoder for one Pauli type (the code is self-dual).

    Parameters
    ----------
    dual : DualLattice
    variant : {"adapted", "naive"}
    backend : {"sparse", "blossom"}
        ``sparse`` keeps one PyMatching instance per restricted graph;
        ``blossom`` solves every instance with the networkx reference.
    """

    def __init__(self, dual: DualLattice, variant: str = ADAPTED, backend: str = "sparse"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown decoder variant {variant!r}")
        self.dual = dual
        self.variant = variant
        self.backend = backend
        self.pairs = _PAIRS[variant]
        self.lifter = Lifter(dual)
        self.graphs = {c: restricted_graph(dual, c) for c in self.pairs}
        self.edge_ids = {c: restrict(dual, c).edge_ids for c in self.pairs}
        self._keep = {c: np.isin(dual.colors, color_pair(c)) for c in self.pairs}
        self.matchers = {c: Matcher(g) for c, g in self.graphs.items()} if backend == "sparse" else {}

    def links(self, syndrome) -> list[Link]:
        dual = self.dual
        syndrome = np.asarray(syndrome, dtype=np.int64)
        out = []
        for pair in self.pairs:
            hl = syndrome[self._keep[pair][syndrome]]
            if not len(hl):
                continue
            if self.backend == "sparse":
                pr = self.matchers[pair].solve(hl)
            else:
                pr = mwpm(PairingProblem(self.graphs[pair], hl), "blossom")
            ids = self.edge_ids[pair]
            for (a, b), path, tb in zip(pr.pairs, pr.paths, pr.to_boundary):
                out.append(Link(pair, (a, b), (int(dual.colors[a]), int(dual.colors[b])),
                                (False, bool(tb)), ids[path]))
        return out

    def decode(self, syndrome) -> DecodeResult:
        """Correction (bool per qubit) for the highlighted face ids ``syndrome``."""
        res = lift_links(self.dual, self.lifter, self.links(syndrome), self.variant)
        if res.ok:
            got = (self.dual.lattice.check_matrix @ res.correction.astype(np.int64)) & 1
            want = np.zeros(self.dual.num_faces, dtype=np.int64)
            want[np.asarray(syndrome, dtype=np.int64)] = 1
            if not np.array_equal(got, want):
                res.ok = False
                res.message = "correction does not reproduce the syndrome"
        return res


def decode_2d(dual: DualLattice, syndrome, variant: str = ADAPTED) -> np.ndarray:
    """One-shot convenience wrapper returning the correction."""
    return RestrictionDecoder(dual, variant).decode(syndrome).correction


# --------------------------------------------------------------------------
# Space time
# --------------------------------------------------------------------------


class SpaceTimeDecoder:
    """Decoder for one stack of a memory experiment.

    ``catalog`` supplies graphs and fault-derived weights; ``rounds`` is the
    number of detection layers.  With ``flag_scheme="renorm"`` the weights
    of each history are renormalized from its observed flags; any other
    value decodes with the base weights.
    """

    def __init__(self, catalog: EdgeCatalog, rounds: int, p: float, stack: str,
                 variant: str = ADAPTED, flag_scheme: str = "renorm", alpha: float = 1.0):
        if variant not in VARIANTS:
            raise ValueError(f"unknown decoder variant {variant!r}")
        self.catalog = catalog
        self.rounds = rounds
        self.p = p
        self.stack = stack
        self.variant = variant
        self.flag_scheme = flag_scheme
        self.alpha = alpha
        self.pairs = _PAIRS[variant]
        dual = catalog.graphs["RG"].dual
        self.dual = dual
        self.lifter = Lifter(dual)
        self.st = {}
        self.weights = {}
        self.matchers = {}
        self._mid = {}
        self._base = {}
        for pair in self.pairs:
            diag = sorted(catalog.diagonal[(stack, pair)])
            st = build_spacetime_graph(catalog.graphs[pair], rounds, diag)
            self.st[pair] = st
            self.weights[pair] = compute_edge_weights(st, catalog, p, stack)
            self._base[pair] = self._graph(pair, self.weights[pair])
            self.matchers[pair] = Matcher(self._base[pair])
            base = catalog.graphs[pair]
            mid = np.full(base.num_edges, -1, dtype=np.int64)
            for e in np.flatnonzero(base.kind == FLAG):
                e1, e2 = base.projection[e]
                (m,) = set(dual.edges[e1].tolist()) & set(dual.edges[e2].tolist())
                if dual.is_boundary(m):
                    mid[e] = m
            self._mid[pair] = mid
        self.last_m = 0

    def _graph(self, pair: str, w: np.ndarray) -> WeightedGraph:
        st = self.st[pair]
        return WeightedGraph(st.num_vertices, st.u, st.v, w, st.is_boundary)

    def decode(self, events: np.ndarray, flags=None, flag_face=None) -> DecodeResult:
        """Decode a ``(rounds, faces)`` detection-event array.

        ``flags`` is the ``{half: (rounds, nflags)}`` record of the history
        (used only by the renormalization scheme).
        """
        dual = self.dual
        events = np.asarray(events)
        if events.shape != (self.rounds, dual.num_faces):
            raise ValueError(f"expected events of shape {(self.rounds, dual.num_faces)}, got {events.shape}")
        seen = []
        if self.flag_scheme == "renorm" and flags is not None:
            seen = observed_flags(flags, flag_face)
        self.last_m = 0
        tt, ff = np.nonzero(events)
        links = []
        for pair in self.pairs:
            st = self.st[pair]
            cols = color_pair(pair)
            sel = np.isin(dual.colors[ff], cols)
            if not sel.any():
                continue
            hl = [st.vertex(f, t) for f, t in zip(ff[sel], tt[sel])]
            matcher = self.matchers[pair]
            if seen:
                w, m = renormalize(st, self.weights[pair], self.catalog, seen, self.p, self.stack, self.alpha)
                if m:
                    matcher = Matcher(self._base[pair].reweighted(w))
                    self.last_m += m
            pr = matcher.solve(hl)
            for (a, b), path, tb in zip(pr.pairs, pr.paths, pr.to_boundary):
                links += self._split(pair, a, b, path, tb)
        return lift_links(dual, self.lifter, links, self.variant)

    def _split(self, pair: str, a: int, b: int, path, to_boundary: bool) -> list[Link]:
        """Flatten one matched path into links.

        A flag edge whose projection runs through a boundary vertex cuts
        the path there, so each piece ends on the boundary as a lattice
        path would.
        """
        st = self.st[pair]
        dual = self.dual
        colors = dual.colors
        mids = self._mid[pair]
        out = []
        start, start_bnd = st.split(a), False
        cur = a
        piece: list = []
        for e in path:
            im = int(st.image[e])
            m = int(mids[im]) if im >= 0 else -1
            if m < 0:
                piece.append(st.flatten([e]))
            else:
                here = st.split(cur)
                e1, e2 = st.base.projection[im]
                if here[0] not in dual.edges[e1]:
                    e1, e2 = e2, e1
                end = (m, here[1])
                out.append(Link(pair, (start, end), (int(colors[start[0]]), int(colors[m])),
                                (start_bnd, True), xor_edges(piece + [[e1]])))
                start, start_bnd, piece = end, True, [[e2]]
            cur = int(st.v[e]) if int(st.u[e]) == cur else int(st.u[e])
        end = st.split(b)
        out.append(Link(pair, (start, end), (int(colors[start[0]]), int(colors[end[0]])),
                        (start_bnd, bool(to_boundary)), xor_edges(piece)))
        return out


# --------------------------------------------------------------------------
# Direct flag corrections
# --------------------------------------------------------------------------


def _reduced(bits: np.ndarray) -> np.ndarray:
    """Lighter of ``bits`` and its complement (reduction modulo the face)."""
    return bits if bits.sum() <= len(bits) - bits.sum() else bits ^ 1


def direct_flag_corrections(sched) -> dict:
    """``(half, face, pattern) -> global qubits`` for the direct scheme.

    For each flag pattern the candidates are the data errors single faults
    with that pattern leave (the identity included).  The chosen correction
    minimises the worst reduced weight left behind, then maximises the
    probability of an exact fix, then has the fewest qubits.
    """
    from .circuit import build_stabilizer_circuit, fault_catalog, local_schedule

    out = {}
    cache = {}
    for face in sched.lattice.faces:
        loc = local_schedule(sched, face.index)
        key = (loc.pairs, loc.ancilla_steps, loc.data_steps)
        if key not in cache:
            table = {}
            for half in "XZ":
                cat = fault_catalog(build_stabilizer_circuit(loc, half))
                part = cat.data_z if half == "Z" else cat.data_x
                mass: dict = {}
                for row, rec, c in zip(part, cat.record, cat.coeff15):
                    flags = tuple(int(b) for b in rec[1:])
                    if any(flags):
                        k = tuple(int(b) for b in _reduced(row.astype(np.uint8)))
                        mass.setdefault(flags, {}).setdefault(k, 0)
                        mass[flags][k] += int(c)
                for flags, opts in mass.items():
                    errs = {k: np.array(k, dtype=np.uint8) for k in opts}

                    def score(k):
                        worst = max(int(_reduced(errs[k] ^ e).sum()) for e in errs.values())
                        return worst, -opts[k], int(errs[k].sum()), k

                    best = min(errs, key=score)
                    table[(half, flags)] = tuple(int(i) for i in np.flatnonzero(errs[best]))
            cache[key] = table
        for (half, flags), qs in cache[key].items():
            out[(half, face.index, flags)] = tuple(face.qubits[i] for i in qs)
    return out
