"""Triangular 6.6.6 color code lattice and its dual.

Face centers of the hexagonal lattice live on a triangular lattice with axial
coordinates ``(col, row)``; the six neighbours of a point are the offsets
``±(1, 0), ±(0, 1), ±(1, 1)`` and the face color is ``(col + row) % 3``.
Data qubits are the triangles of that lattice.  The code region is the
triangle cut out by three constant-color lines, each of which collapses into
one boundary vertex of the dual lattice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

RED, GREEN, BLUE = 0, 1, 2
COLOR_NAMES = "RGB"
COLOR_PAIRS = ("RG", "RB", "GB")

TRIVIAL = "trivial"
LOGICAL_X = "logical-X"
LOGICAL_Y = "logical-Y"
LOGICAL_Z = "logical-Z"
NOT_IN_NORMALIZER = "not in normalizer"

_SQRT3_2 = np.sqrt(3.0) / 2.0


def color_pair(pair: str) -> tuple[int, int]:
    """Parse ``"RG"``-style labels into a sorted color tuple."""
    if len(pair) != 2 or any(c not in COLOR_NAMES for c in pair) or pair[0] == pair[1]:
        raise ValueError(f"invalid color pair {pair!r}")
    a, b = sorted(COLOR_NAMES.index(c) for c in pair)
    return a, b


def _cartesian(col: float, row: float) -> tuple[float, float]:
    return col - 0.5 * row, _SQRT3_2 * row


@dataclass(frozen=True)
class Face:
    """One stabilizer face of the primal lattice.

    ``qubits`` are listed counter-clockwise starting from the smallest angular
    slot; ``slots`` gives each qubit's angular slot ``k`` (angle 30 + 60k
    degrees from the face center), which is what the circuit schedules key on.
    ``boundaries`` lists the colors of the code boundaries the face touches.
    """

    index: int
    color: int
    center: tuple[int, int]
    qubits: tuple[int, ...]
    slots: tuple[int, ...]
    boundaries: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True, eq=False)
class PauliMask:
    """X and Z parts of a Pauli operator on the data qubits (phases dropped)."""

    x: np.ndarray
    z: np.ndarray

    @classmethod
    def identity(cls, n: int) -> PauliMask:
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_string(cls, paulis: str) -> PauliMask:
        x = np.array([c in "XY" for c in paulis], dtype=np.uint8)
        z = np.array([c in "ZY" for c in paulis], dtype=np.uint8)
        return cls(x, z)

    @classmethod
    def from_support(cls, n: int, qubits, kind: str) -> PauliMask:
        mask = cls.identity(n)
        for q in qubits:
            if kind in "XY":
                mask.x[q] ^= 1
            if kind in "ZY":
                mask.z[q] ^= 1
        return mask

    def __len__(self) -> int:
        return len(self.x)

    def __mul__(self, other: PauliMask) -> PauliMask:
        return PauliMask(self.x ^ other.x, self.z ^ other.z)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliMask)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def to_string(self) -> str:
        return "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z))


@dataclass(frozen=True, eq=False)
class ColorLattice:
    """Primal lattice: data qubits at hexagonal-lattice vertices, stabilizer faces.

    ``triangles[q]`` holds the three face-center points (axial coordinates) of
    data qubit ``q``; points on a boundary line are stored as-is and resolved
    to boundary vertices by :func:`build_dual`.
    """

    distance: int
    coords: np.ndarray  # (n, 2) int: 3 * centroid in axial coordinates
    faces: tuple[Face, ...]
    triangles: tuple[tuple[int, int, int], ...]  # dual vertex ids per qubit, sorted by color
    num_vertices: int  # faces + 3 boundary vertices
    vertex_colors: np.ndarray
    vertex_points: tuple  # axial point for faces, None for boundary vertices
    z_logical: np.ndarray = field(repr=False)
    x_logical: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def check_matrix(self) -> np.ndarray:
        """Face-by-qubit incidence; the same matrix serves both Pauli types."""
        h = np.zeros((self.num_faces, self.n), dtype=np.uint8)
        for f in self.faces:
            h[f.index, list(f.qubits)] = 1
        return h

    def boundary_vertex(self, color: int) -> int:
        return self.num_faces + color


def _region(d: int) -> tuple[set, int, int, int]:
    k = (d - 1) // 2
    lo1, hi2, lo3 = 0, 3 * k + 2, -1
    span = 3 * k + 6
    pts = set()
    for c in range(-span, span + 1):
        for r in range(-span, span + 1):
            if c + r >= lo1 and 2 * c - r <= hi2 and c - 2 * r >= lo3:
                pts.add((c, r))
    return pts, lo1, hi2, lo3


def build_lattice(d: int) -> ColorLattice:
    """Build the distance-``d`` triangular color code lattice.

    Raises
    ------
    ValueError
        If ``d`` is even or smaller than 3.
    """
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d!r}")
    d = int(d)
    pts, lo1, hi2, lo3 = _region(d)

    def boundary_color(p):
        c, r = p
        if c + r == lo1:
            return RED
        if 2 * c - r == hi2:
            return GREEN
        if c - 2 * r == lo3:
            return BLUE
        return None

    interior = sorted((p for p in pts if boundary_color(p) is None), key=lambda p: (p[1], p[0]))
    face_id = {p: i for i, p in enumerate(interior)}
    nf = len(interior)

    def vid(p):
        b = boundary_color(p)
        return nf + b if b is not None else face_id[p]

    tris = []
    for c, r in pts:
        for tri in (((c, r), (c + 1, r), (c + 1, r + 1)), ((c, r), (c, r + 1), (c + 1, r + 1))):
            if all(p in pts for p in tri):
                tris.append(tri)
    # order qubits row-major by centroid
    tris.sort(key=lambda t: (sum(p[1] for p in t), sum(p[0] for p in t)))

    coords = np.array(
        [(sum(p[0] for p in t), sum(p[1] for p in t)) for t in tris], dtype=np.int64
    )
    vcolors = np.array([(p[0] + p[1]) % 3 for p in interior] + [RED, GREEN, BLUE], dtype=np.int8)
    triangles = []
    for t in tris:
        ids = sorted((vid(p) for p in t), key=lambda v: vcolors[v])
        triangles.append(tuple(ids))

    members: list[list[int]] = [[] for _ in range(nf)]
    touches: list[set] = [set() for _ in range(nf)]
    for q, tri in enumerate(triangles):
        for v in tri:
            if v < nf:
                members[v].append(q)
        for v in tri:
            for w in tri:
                if v < nf and w >= nf:
                    touches[v].add(int(vcolors[w]))

    faces = []
    for i, p in enumerate(interior):
        cx, cy = _cartesian(*p)
        slotted = []
        for q in members[i]:
            qx, qy = _cartesian(coords[q][0] / 3.0, coords[q][1] / 3.0)
            ang = np.degrees(np.arctan2(qy - cy, qx - cx)) % 360.0
            slotted.append((int(round((ang - 30.0) / 60.0)) % 6, q))
        slotted.sort()
        faces.append(
            Face(
                index=i,
                color=int(vcolors[i]),
                center=p,
                qubits=tuple(q for _, q in slotted),
                slots=tuple(s for s, _ in slotted),
                boundaries=tuple(sorted(touches[i])),
            )
        )

    n = len(tris)
    # Logical representatives: the qubits along the red side.
    side = np.zeros(n, dtype=np.uint8)
    for q, tri in enumerate(triangles):
        if nf + RED in tri:
            side[q] = 1
    return ColorLattice(
        distance=d,
        coords=coords,
        faces=tuple(faces),
        triangles=tuple(triangles),
        num_vertices=nf + 3,
        vertex_colors=vcolors,
        vertex_points=tuple(interior) + (None, None, None),
        z_logical=side.copy(),
        x_logical=side.copy(),
    )


@dataclass(frozen=True, eq=False)
class DualLattice:
    """Dual lattice: colored vertices, edges and one triangle per data qubit.

    Vertex ids ``0 .. F-1`` are stabilizer faces; ``F, F+1, F+2`` are the
    boundary vertices ``v_R, v_G, v_B``.  Edges between two boundary vertices
    are excluded from ``edges``; ``triangle_edges`` marks them with ``-1``.
    """

    lattice: ColorLattice
    colors: np.ndarray
    edges: np.ndarray  # (E, 2), rows sorted
    triangles: np.ndarray  # (n, 3) vertex ids ordered R, G, B
    triangle_edges: np.ndarray  # (n, 3) edge ids, -1 for excluded edges
    star: tuple[np.ndarray, ...]  # qubits incident to each vertex
    edge_index: dict

    @property
    def num_vertices(self) -> int:
        return len(self.colors)

    @property
    def num_faces(self) -> int:
        return self.lattice.num_faces

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def boundary(self) -> tuple[int, int, int]:
        f = self.num_faces
        return f, f + 1, f + 2

    def is_boundary(self, v: int) -> bool:
        return v >= self.num_faces

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]

    def neighbors(self, v: int) -> list[int]:
        return self._adjacency[v]

    @cached_property
    def _adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(int(v))
            adj[v].append(int(u))
        return [sorted(a) for a in adj]

    @cached_property
    def edge_triangles(self) -> tuple[tuple[int, ...], ...]:
        """Qubits (triangles) incident to each edge."""
        out: list[list[int]] = [[] for _ in range(len(self.edges))]
        for q, row in enumerate(self.triangle_edges):
            for e in row:
                if e >= 0:
                    out[e].append(q)
        return tuple(tuple(sorted(x)) for x in out)

    def to_json(self) -> dict:
        lat = self.lattice
        return {
            "distance": lat.distance,
            "num_data_qubits": lat.n,
            "vertices": [
                {
                    "id": v,
                    "color": COLOR_NAMES[int(self.colors[v])],
                    "boundary": bool(self.is_boundary(v)),
                    "point": None if lat.vertex_points[v] is None else list(lat.vertex_points[v]),
                }
                for v in range(self.num_vertices)
            ],
            "edges": self.edges.tolist(),
            "qubits": [
                {"id": q, "coord": lat.coords[q].tolist(), "triangle": self.triangles[q].tolist()}
                for q in range(lat.n)
            ],
            "faces": [
                {
                    "id": f.index,
                    "color": COLOR_NAMES[f.color],
                    "qubits": list(f.qubits),
                    "slots": list(f.slots),
                    "boundaries": [COLOR_NAMES[b] for b in f.boundaries],
                }
                for f in lat.faces
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def build_dual(lattice: ColorLattice) -> DualLattice:
    tri = np.array(lattice.triangles, dtype=np.int64)
    nf = lattice.num_faces
    edge_set = set()
    for row in tri:
        for u, v in combinations(sorted(row.tolist()), 2):
            if u >= nf and v >= nf:
                continue
            edge_set.add((u, v))
    edges = np.array(sorted(edge_set), dtype=np.int64).reshape(-1, 2)
    index = {(int(u), int(v)): i for i, (u, v) in enumerate(edges)}
    tri_edges = np.full((len(tri), 3), -1, dtype=np.int64)
    for q, row in enumerate(tri):
        # edge opposite corner k: RG -> 2, RB -> 1, GB -> 0 ordering by pair
        for j, (a, b) in enumerate(((0, 1), (0, 2), (1, 2))):
            u, v = sorted((int(row[a]), int(row[b])))
            tri_edges[q, j] = index.get((u, v), -1)
    star = [[] for _ in range(lattice.num_vertices)]
    for q, row in enumerate(tri):
        for v in row:
            star[v].append(q)
    return DualLattice(
        lattice=lattice,
        colors=lattice.vertex_colors,
        edges=edges,
        triangles=tri,
        triangle_edges=tri_edges,
        star=tuple(np.array(sorted(s), dtype=np.int64) for s in star),
        edge_index=index,
    )


@dataclass(frozen=True, eq=False)
class RestrictedLattice:
    pair: str
    colors: tuple[int, int]
    vertices: np.ndarray
    edge_ids: np.ndarray  # indices into DualLattice.edges
    dual: DualLattice = field(repr=False)

    @property
    def edges(self) -> np.ndarray:
        return self.dual.edges[self.edge_ids]

    @property
    def boundary(self) -> tuple[int, int]:
        return tuple(self.dual.num_faces + c for c in self.colors)


def restrict(dual: DualLattice, pair: str) -> RestrictedLattice:
    """Keep only the vertices of the two colors in ``pair`` and the edges between them."""
    cols = color_pair(pair)
    keep = np.isin(dual.colors, cols)
    verts = np.flatnonzero(keep)
    eids = np.flatnonzero(keep[dual.edges[:, 0]] & keep[dual.edges[:, 1]])
    return RestrictedLattice(pair="".join(COLOR_NAMES[c] for c in cols), colors=cols,
                             vertices=verts, edge_ids=eids, dual=dual)


def syndrome_of(dual: DualLattice, mask: PauliMask, basis: str) -> np.ndarray:
    """Stabilizer vertices of the given type flipped by ``mask``.

    ``basis="Z"`` returns the Z-type stabilizers anticommuting with the X part
    (the bit-flip syndrome); ``basis="X"`` uses the Z part.
    """
    if basis == "Z":
        bits = mask.x
    elif basis == "X":
        bits = mask.z
    else:
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    if len(bits) != dual.n:
        raise ValueError("mask length does not match the lattice")
    parity = (dual.lattice.check_matrix @ bits.astype(np.int64)) & 1
    return np.flatnonzero(parity)


def logical_class(dual: DualLattice, mask: PauliMask) -> str:
    if len(syndrome_of(dual, mask, "Z")) or len(syndrome_of(dual, mask, "X")):
        return NOT_IN_NORMALIZER
    lat = dual.lattice
    flips_x = int(mask.x @ lat.z_logical) & 1
    flips_z = int(mask.z @ lat.x_logical) & 1
    return (TRIVIAL, LOGICAL_X, LOGICAL_Z, LOGICAL_Y)[flips_x + 2 * flips_z]
