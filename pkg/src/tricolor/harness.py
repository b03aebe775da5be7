"""Monte Carlo experiments, threshold estimates and distance checks.

Trials are split into chunks of fixed size; chunk ``k`` of point
``(d, p)`` draws from ``SeedSequence(seed, spawn_key=(d, p_index, k))``, so
results do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from statistics import NormalDist, median

import numpy as np

from . import __version__
from ._accel import USE_NUMBA
from .circuit import (
    build_lattice_schedule,
    build_stabilizer_circuit,
    local_schedule,
    max_residual_weight,
    reference_labels,
    verify_flag_property,
)
from .decoder import ADAPTED, NAIVE, VARIANTS, RestrictionDecoder, SpaceTimeDecoder, direct_flag_corrections
from .graph import STACKS, enumerate_edges, observed_flags
from .lattice import build_dual, build_lattice
from .sim import CAPACITY, CIRCUIT, MemoryExperiment, sample_code_capacity

FLAG_SCHEMES = ("renorm", "direct", "off")
# Fixed result columns.  ``failures`` counts logical failures including
# ``invalid`` trials, where the decoder returned no syndrome-valid
# correction.  Wall times go to the manifest so the CSV stays
# byte-identical across reruns.
CSV_COLUMNS = (
    "noise", "distance", "p", "basis", "decoder", "flag_scheme", "alpha", "rounds",
    "trials", "failures", "invalid", "rate", "ci_low", "ci_high", "seed",
)


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a Monte Carlo run.

    ``rounds`` of None means ``d + 1`` for circuit noise.  ``chunk`` is the
    number of trials per independently seeded chunk.
    """

    noise: str = CAPACITY
    distances: list = field(default_factory=lambda: [5, 7, 9])
    ps: list = field(default_factory=lambda: [0.1])
    trials: int = 1000
    decoder: str = ADAPTED
    flag_scheme: str = "renorm"
    alpha: float = 1.0
    rounds: int | None = None
    seed: int = 0
    workers: int = 1
    chunk: int = 1000
    out: str | None = None

    def __post_init__(self):
        if self.noise not in (CAPACITY, CIRCUIT):
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.decoder not in VARIANTS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.flag_scheme not in FLAG_SCHEMES:
            raise ValueError(f"unknown flag scheme {self.flag_scheme!r}")
        if self.trials < 1 or self.chunk < 1 or self.workers < 1:
            raise ValueError("trials, chunk and workers must be positive")
        for d in self.distances:
            if d < 3 or d % 2 == 0:
                raise ValueError(f"distance must be odd and >= 3, got {d}")
        for p in self.ps:
            if not 0.0 < p < 1.0:
                raise ValueError(f"p must lie in (0, 1), got {p}")
        self.distances = [int(d) for d in self.distances]
        self.ps = [float(p) for p in self.ps]

    def rounds_for(self, d: int) -> int:
        return d + 1 if self.rounds is None else int(self.rounds)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        return cls.from_json(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# Statistics
# --------------------------------------------------------------------------


def wilson_interval(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial rate."""
    if trials <= 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + level / 2)
    ph = failures / trials
    den = 1 + z * z / trials
    mid = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    # the bounds are exact at the extremes; rounding would push them inside
    lo = 0.0 if failures == 0 else max(0.0, mid - half)
    hi = 1.0 if failures == trials else min(1.0, mid + half)
    return lo, hi


@dataclass
class ThresholdEstimate:
    value: float | None
    low: float | None
    high: float | None
    crossings: list

    def __str__(self) -> str:
        if self.value is None:
            return "no crossing"
        return f"{self.value:.5g} (crossings {self.low:.5g} .. {self.high:.5g})"


def crossing_points(ps, rate_a, rate_b) -> list[float]:
    """Values of p where two log-rate curves cross (linear interpolation in p)."""
    out = []
    pts = [(p, a, b) for p, a, b in zip(ps, rate_a, rate_b) if a > 0 and b > 0]
    for (p0, a0, b0), (p1, a1, b1) in zip(pts, pts[1:]):
        f0 = math.log(a0) - math.log(b0)
        f1 = math.log(a1) - math.log(b1)
        if f0 == 0:
            out.append(p0)
        elif f0 * f1 < 0:
            out.append(p0 + (p1 - p0) * f0 / (f0 - f1))
    if pts:
        p, a, b = pts[-1]
        if a == b and (not out or out[-1] != p):
            out.append(p)
    return out


def estimate_threshold(rows, basis: str | None = None) -> ThresholdEstimate:
    """Median of the crossings of consecutive distances' curves."""
    sel = [r for r in rows if basis is None or r["basis"] == basis]
    by_d: dict = {}
    for r in sel:
        by_d.setdefault(int(r["distance"]), {})[float(r["p"])] = float(r["rate"])
    ds = sorted(by_d)
    cross = []
    for d1, d2 in zip(ds, ds[1:]):
        ps = sorted(set(by_d[d1]) & set(by_d[d2]))
        cross += crossing_points(ps, [by_d[d1][p] for p in ps], [by_d[d2][p] for p in ps])
    if not cross:
        return ThresholdEstimate(None, None, None, [])
    return ThresholdEstimate(float(median(cross)), min(cross), max(cross), cross)


# --------------------------------------------------------------------------
# Runners
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _dual(d: int):
    return build_dual(build_lattice(d))


@lru_cache(maxsize=None)
def _schedule(d: int):
    return build_lattice_schedule(_dual(d).lattice)


@lru_cache(maxsize=None)
def _catalog(d: int):
    return enumerate_edges(_schedule(d))


def _fails(dual, residual: np.ndarray, logical: np.ndarray) -> bool:
    h = dual.lattice.check_matrix
    return bool(((h @ residual) & 1).any() or int(residual @ logical) & 1)


class CapacityRunner:
    """Code-capacity trials: depolarizing data noise, X and Z decoded apart.

    A trial fails if either Pauli type ends in a logical operator or the
    decoder returns an invalid correction.  ``run`` returns
    ``{basis: (failures, invalid)}``.
    """

    bases = ("XZ",)

    def __init__(self, d: int, p: float, variant: str = ADAPTED):
        self.dual = _dual(d)
        self.p = p
        self.decoder = RestrictionDecoder(self.dual, variant)

    def outcome(self, x: np.ndarray, z: np.ndarray) -> tuple[bool, bool]:
        """``(failed, invalid)`` for one depolarizing error."""
        dual = self.dual
        h = dual.lattice.check_matrix
        lat = dual.lattice
        failed = invalid = False
        for err, logical in ((x, lat.z_logical), (z, lat.x_logical)):
            if not err.any():
                continue
            res = self.decoder.decode(np.flatnonzero((h @ err) & 1))
            if not res.ok:
                failed = invalid = True
            elif _fails(dual, err ^ res.correction, logical):
                failed = True
        return failed, invalid

    def run(self, shots: int, rng: np.random.Generator) -> dict:
        x, z = sample_code_capacity(self.dual, self.p, rng, shots)
        f = v = 0
        for i in range(shots):
            a, b = self.outcome(x[i], z[i])
            f += a
            v += b
        return {"XZ": (f, v)}


class CircuitRunner:
    """Circuit-level memory trials.

    Each history is decoded in both stacks.  Basis ``X`` counts failures of
    the X-stabilizer stack (logical Z errors), basis ``Z`` the converse.
    """

    bases = STACKS

    def __init__(self, d: int, p: float, rounds: int | None = None, variant: str = ADAPTED,
                 flag_scheme: str = "renorm", alpha: float = 1.0):
        if flag_scheme not in FLAG_SCHEMES:
            raise ValueError(f"unknown flag scheme {flag_scheme!r}")
        self.dual = _dual(d)
        self.p = p
        self.rounds = d + 1 if rounds is None else rounds
        self.flag_scheme = flag_scheme
        sched = _schedule(d)
        cat = _catalog(d)
        self.experiment = MemoryExperiment(sched, self.rounds)
        self.flag_face = self.experiment.layout.flag_face
        # at p = 0 nothing is ever decoded; any rate gives valid weights
        wp = p if p > 0 else 1e-3
        self.decoders = {s: SpaceTimeDecoder(cat, self.rounds, wp, s, variant, flag_scheme, alpha)
                         for s in STACKS}
        self.direct = direct_flag_corrections(sched) if flag_scheme == "direct" else {}

    def apply_direct(self, syndrome: dict, flags: dict, res_x: np.ndarray, res_z: np.ndarray) -> None:
        """Apply the direct flag corrections in place.

        An X-half flag of round j leaves an X error seen by the Z checks from
        round j on; a Z-half flag is seen by the X checks from round j + 1.
        """
        h = self.dual.lattice.check_matrix
        for j, half, face, pattern in observed_flags(flags, self.flag_face):
            qs = self.direct.get((half, face, pattern))
            if not qs:
                continue
            c = np.zeros(self.dual.n, dtype=np.uint8)
            c[list(qs)] = 1
            s = ((h @ c) & 1).astype(np.uint8)
            if half == "X":
                syndrome["Z"][j:] ^= s
                res_x ^= c
            else:
                syndrome["X"][j + 1:] ^= s
                res_z ^= c

    def outcome(self, syndrome: dict, flags: dict, res_x: np.ndarray, res_z: np.ndarray) -> dict:
        """``{basis: (failed, invalid)}`` for one history (arrays may be modified)."""
        if self.flag_scheme == "direct":
            self.apply_direct(syndrome, flags, res_x, res_z)
        lat = self.dual.lattice
        out = {}
        for stack, err, logical in (("X", res_z, lat.x_logical), ("Z", res_x, lat.z_logical)):
            s = syndrome[stack]
            events = s[1:] ^ s[:-1]
            if not events.any() and not err.any():
                out[stack] = (False, False)
                continue
            r = self.decoders[stack].decode(events, flags, self.flag_face)
            if r.ok:
                out[stack] = (_fails(self.dual, err ^ r.correction.astype(np.uint8), logical), False)
            else:
                out[stack] = (True, True)
        return out

    def run(self, shots: int, rng: np.random.Generator) -> dict:
        batch = self.experiment.sample(shots, self.p, rng)
        fails = {b: [0, 0] for b in STACKS}
        for i in range(shots):
            syn = {b: v[i].copy() for b, v in batch.syndrome.items()}
            flg = {b: v[i] for b, v in batch.flags.items()}
            o = self.outcome(syn, flg, batch.residual_x[i].copy(), batch.residual_z[i].copy())
            for b in STACKS:
                fails[b][0] += o[b][0]
                fails[b][1] += o[b][1]
        return {b: tuple(v) for b, v in fails.items()}


_RUNNERS: dict = {}


def _runner(cfg_items: tuple, d: int, p: float):
    cfg = dict(cfg_items)
    key = (cfg_items, d, p)
    if key not in _RUNNERS:
        if cfg["noise"] == CAPACITY:
            _RUNNERS[key] = CapacityRunner(d, p, cfg["decoder"])
        else:
            rounds = d + 1 if cfg["rounds"] is None else cfg["rounds"]
            _RUNNERS[key] = CircuitRunner(d, p, rounds, cfg["decoder"], cfg["flag_scheme"], cfg["alpha"])
    return _RUNNERS[key]


def _run_chunk(task):
    cfg_items, d, pi, p, k, shots, seed = task
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(d, pi, k)))
    t = time.perf_counter()
    res = _runner(cfg_items, d, p).run(shots, rng)
    return d, pi, res, shots, time.perf_counter() - t


def _chunks(trials: int, size: int):
    k = 0
    while trials > 0:
        yield k, min(size, trials)
        trials -= size
        k += 1


def run_montecarlo(config: ExperimentConfig, progress=None) -> list[dict]:
    """Run every ``(d, p)`` point of ``config`` and return one row per basis.

    When ``config.out`` is set, ``<out>.csv`` and ``<out>.manifest.json`` are
    written as well.
    """
    keep = ("noise", "decoder", "flag_scheme", "alpha", "rounds")
    cfg_items = tuple((k, getattr(config, k)) for k in keep)
    tasks = [
        (cfg_items, d, pi, p, k, n, config.seed)
        for d in config.distances
        for pi, p in enumerate(config.ps)
        for k, n in _chunks(config.trials, config.chunk)
    ]
    acc: dict = {}
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = pool.map(_run_chunk, tasks)
            for r in results:
                _accumulate(acc, r, progress)
    else:
        for task in tasks:
            _accumulate(acc, _run_chunk(task), progress)
    rows = []
    for d in config.distances:
        for pi, p in enumerate(config.ps):
            fails, trials, wall = acc[(d, pi)]
            for basis in sorted(fails):
                nf, nbad = fails[basis]
                lo, hi = wilson_interval(nf, trials)
                rows.append({
                    "noise": config.noise, "distance": d, "p": p, "basis": basis,
                    "decoder": config.decoder,
                    "flag_scheme": config.flag_scheme if config.noise == CIRCUIT else "",
                    "alpha": config.alpha if config.noise == CIRCUIT else "",
                    "rounds": config.rounds_for(d) if config.noise == CIRCUIT else "",
                    "trials": trials, "failures": nf, "invalid": nbad, "rate": nf / trials,
                    "ci_low": lo, "ci_high": hi, "wall_time": wall, "seed": config.seed,
                })
    if config.out:
        write_results(rows, config)
    return rows


def _accumulate(acc, result, progress):
    d, pi, res, shots, wall = result
    fails, trials, t = acc.get((d, pi), ({}, 0, 0.0))
    for b, (f, bad) in res.items():
        a0, b0 = fails.get(b, (0, 0))
        fails[b] = (a0 + int(f), b0 + int(bad))
    acc[(d, pi)] = (fails, trials + shots, t + wall)
    if progress is not None:
        progress(d, pi, shots)


def graph_hash(d: int) -> str:
    return hashlib.sha256(_dual(d).dumps().encode()).hexdigest()[:16]


def write_results(rows, config: ExperimentConfig) -> tuple[Path, Path]:
    base = Path(config.out)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in CSV_COLUMNS})
    man = {
        "package": "tricolor",
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": config.to_json(),
        "graph_hash": {str(d): graph_hash(d) for d in config.distances},
        "numba": USE_NUMBA,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "rows": len(rows),
        "csv": csv_path.name,
        "wall_time": [
            {"distance": r["distance"], "p": r["p"], "basis": r["basis"], "seconds": round(r["wall_time"], 3)}
            for r in rows
        ],
    }
    man_path = base.with_suffix(".manifest.json")
    man_path.write_text(json.dumps(man, indent=1))
    return csv_path, man_path


def read_results(path) -> list[dict]:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("distance", "trials", "failures", "invalid"):
            r[k] = int(r[k])
        for k in ("p", "rate", "ci_low", "ci_high"):
            r[k] = float(r[k])
    return rows


# --------------------------------------------------------------------------
# Distance checks
# --------------------------------------------------------------------------


@dataclass
class DistanceReport:
    """Per-weight counts of decoding failures; ``examples`` keep the first few."""

    distance: int
    variant: str
    checked: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    examples: dict = field(default_factory=dict)

    def min_failing_weight(self) -> int | None:
        bad = [w for w, f in self.failures.items() if f]
        return min(bad) if bad else None


def corrects(decoder: RestrictionDecoder, x, z=()) -> bool:
    """Whether ``decoder`` corrects the Pauli error with X part on ``x`` and Z part on ``z``."""
    dual = decoder.dual
    lat = dual.lattice
    for qs, logical in ((x, lat.z_logical), (z, lat.x_logical)):
        if not len(qs):
            continue
        e = np.zeros(dual.n, dtype=np.uint8)
        e[list(qs)] = 1
        res = decoder.decode(np.flatnonzero((lat.check_matrix @ e) & 1))
        if not res.ok or _fails(dual, e ^ res.correction.astype(np.uint8), logical):
            return False
    return True


def exhaustive_distance_check(d: int, max_weight: int, variant: str = ADAPTED,
                              weights=None, paulis: bool = False, keep: int = 5) -> DistanceReport:
    """Decode every error of weight ``1..max_weight`` (or of the given weights).

    X and Z parts are decoded independently, and the X part of a weight-w
    Pauli error is an X error of weight at most w.  With ``paulis=False``
    only X errors are enumerated, which therefore decides the same
    pass/fail question ``3**w`` times faster; ``paulis=True`` walks every
    Pauli error.
    """
    dec = RestrictionDecoder(_dual(d), variant)
    rep = DistanceReport(d, variant)
    n = dec.dual.n
    for w in (weights or range(1, max_weight + 1)):
        rep.checked[w] = rep.failures[w] = 0
        rep.examples[w] = []
        for qs in itertools.combinations(range(n), w):
            for ps in (itertools.product("XYZ", repeat=w) if paulis else ("X" * w,)):
                x = [q for q, c in zip(qs, ps) if c in "XY"]
                z = [q for q, c in zip(qs, ps) if c in "ZY"]
                rep.checked[w] += 1
                if not corrects(dec, x, z):
                    rep.failures[w] += 1
                    if len(rep.examples[w]) < keep:
                        rep.examples[w].append("".join(f"{c}{q}" for q, c in zip(qs, ps)))
    return rep


def sampled_distance_check(d: int, weight: int, samples: int, rng: np.random.Generator,
                           variant: str = ADAPTED, keep: int = 5) -> DistanceReport:
    """Decode ``samples`` uniformly random Pauli errors of one weight."""
    dec = RestrictionDecoder(_dual(d), variant)
    rep = DistanceReport(d, variant, {weight: 0}, {weight: 0}, {weight: []})
    n = dec.dual.n
    for _ in range(samples):
        qs = rng.choice(n, weight, replace=False).tolist()
        ps = ["XYZ"[i] for i in rng.integers(0, 3, weight)]
        x = [q for q, c in zip(qs, ps) if c in "XY"]
        z = [q for q, c in zip(qs, ps) if c in "ZY"]
        rep.checked[weight] += 1
        if not corrects(dec, x, z):
            rep.failures[weight] += 1
            if len(rep.examples[weight]) < keep:
                rep.examples[weight].append("".join(f"{c}{q}" for q, c in zip(qs, ps)))
    return rep


def naive_counterexamples(d: int = 7, weight: int = 3, limit: int = 1, backend: str = "sparse"):
    """X errors the adapted decoder corrects but the naive one does not.

    Minimum-weight pairings are often degenerate, and which one a backend
    returns decides some naive outcomes: at ``d = 7`` the ``blossom``
    backend already loses two weight-2 errors, ``sparse`` none.
    """
    dual = _dual(d)
    ad, nv = RestrictionDecoder(dual, ADAPTED, backend), RestrictionDecoder(dual, NAIVE, backend)
    out = []
    for w in range(1, weight + 1):
        for qs in itertools.combinations(range(dual.n), w):
            if not corrects(nv, qs) and corrects(ad, qs):
                out.append(qs)
                if len(out) >= limit:
                    return out
    return out


# --------------------------------------------------------------------------
# Flag-circuit verification
# --------------------------------------------------------------------------

# Direct-scheme table of the weight-6 circuit in f1/f2/f3, q1..q6 labels;
# patterns not listed map to the identity.
REFERENCE_DIRECT_TABLE = {("f1",): ("q1",), ("f2",): ("q4",), ("f3",): ("q6",), ("f1", "f3"): ("q3", "q4")}


def direct_table_matches_reference(loc_sched, table: dict) -> bool:
    """Whether a weight-6 face's direct corrections equal the reference table.

    ``table`` maps ``(half, pattern)`` to local data positions.
    """
    lab = reference_labels(loc_sched)
    fl, qs = lab["flags"], lab["qubits"]
    for bits in itertools.product((0, 1), repeat=3):
        if not any(bits):
            continue
        names = tuple(sorted(n for n, k in fl.items() if bits[k]))
        want = sorted(qs[q] for q in REFERENCE_DIRECT_TABLE.get(names, ()))
        for half in "XZ":
            if sorted(table.get((half, bits), ())) != want:
                return False
    return True


def verify_flags(d: int = 7) -> list[dict]:
    """Check every distinct face circuit of the distance-``d`` layout.

    One row per (schedule variant, basis): the exhaustive 1- and 2-flag
    checks, the largest reduced residual over single faults and over
    fault pairs (X and Z parts weighed apart, as they are decoded apart;
    ``max_pauli_residual_2`` reduces the joint Pauli instead), and for weight-6 faces whether the direct-correction table
    equals the reference one.
    """
    sched = _schedule(d)
    direct = direct_flag_corrections(sched)
    rows, seen = [], set()
    for face in sched.lattice.faces:
        loc = local_schedule(sched, face.index)
        key = (sched.tags[face.index], loc.pairs, loc.ancilla_steps, loc.data_steps)
        if key in seen:
            continue
        seen.add(key)
        pos = {q: i for i, q in enumerate(face.qubits)}
        table = {(h, pat): tuple(pos[q] for q in qs)
                 for (h, f, pat), qs in direct.items() if f == face.index}
        ref = direct_table_matches_reference(loc, table) if face.weight == 6 else None
        for basis in "XZ":
            circ = build_stabilizer_circuit(loc, basis, face.index)
            rows.append({
                "face": face.index, "tag": sched.tags[face.index], "weight": face.weight, "basis": basis,
                "flags": loc.num_flags,
                "one_flag": verify_flag_property(circ, 1)[0],
                "two_flag": verify_flag_property(circ, 2)[0],
                "max_residual_1": max_residual_weight(circ, 1),
                "max_residual_2": max_residual_weight(circ, 2, per_type=True),
                "max_pauli_residual_2": max_residual_weight(circ, 2),
                "direct_table_matches_reference": ref,
            })
    return rows


def single_fault_failures(d: int, flag_scheme: str = "renorm", rounds: int | None = None,
                          p: float = 1e-5, variant: str = ADAPTED) -> list[tuple]:
    """Inject every single circuit fault of a memory run and decode it.

    Faults with identical effects are decoded once.  Returns
    ``(gate, payload, basis)`` for each fault that ends in a logical
    failure; an empty list means the single-fault distance is intact.
    ``p`` only sets the edge weights.
    """
    from .circuit import fault_catalog

    run = CircuitRunner(d, p, rounds, variant, flag_scheme)
    exp, lay = run.experiment, run.experiment.layout
    cat = fault_catalog(exp.circuit, exp._noisy)
    verdict: dict = {}
    out = []
    for i in range(len(cat)):
        key = (cat.data_x[i].tobytes(), cat.data_z[i].tobytes(), cat.record[i].tobytes())
        if key not in verdict:
            rec = cat.record[i]
            syn, flg = {}, {}
            for bi, b in enumerate("XZ"):
                s = rec[lay.anc[:, bi, :]].astype(np.uint8)
                syn[b] = np.vstack([np.zeros((1, s.shape[1]), np.uint8), s])
                flg[b] = rec[lay.flag[:, bi, :]].astype(np.uint8)
            o = run.outcome(syn, flg, cat.data_x[i].astype(np.uint8), cat.data_z[i].astype(np.uint8))
            verdict[key] = [b for b in STACKS if o[b][0]]
        for b in verdict[key]:
            out.append((int(cat.gate[i]), cat.payload[i], b))
    return out
