"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--distance 7] [--shots 1000] [--repeat 5]

Both implementations run on identical inputs and their outputs are
compared before any timing is reported.  The first numba call (compile or
cache load) is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tricolor import kernels
from tricolor.harness import CircuitRunner


def _best(fn, repeat: int) -> float:
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def propagate_inputs(d: int, shots: int, p: float = 2e-3, seed: int = 0):
    exp = CircuitRunner(d, p).experiment
    circ = exp.circuit
    g, r, q, x, z = exp._sample_faults(shots, p, np.random.default_rng(seed))
    order = np.argsort(g, kind="stable")
    ptr = np.searchsorted(g[order], np.arange(circ.num_gates + 1)).astype(np.int64)
    args = (circ.kind, circ.q0, circ.q1, circ.meas_slot, ptr, r[order], q[order], x[order], z[order])
    shape = ((circ.num_qubits, shots), (circ.num_measurements, shots))
    return args, shape


def run_propagate(fn, args, shape):
    fx = np.zeros(shape[0], np.uint8)
    fz = np.zeros(shape[0], np.uint8)
    rec = np.zeros(shape[1], np.uint8)
    fn(*args, fx, fz, rec)
    return fx, fz, rec


def dijkstra_inputs(d: int):
    dec = CircuitRunner(d, 2e-3).decoders["X"]
    g = dec._base["RG"]
    indptr, indices, w, _ = g.csr
    return indptr, indices, w, g.boundary


def run_dijkstra(fn, graph, sources):
    indptr, indices, w, blocked = graph
    n = len(indptr) - 1
    out = []
    for s in sources:
        dist = np.empty(n)
        pred = np.empty(n, np.int64)
        fn(indptr, indices, w, int(s), blocked, dist, pred)
        out.append((dist, pred))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--distance", type=int, default=7)
    ap.add_argument("--shots", type=int, default=1000)
    ap.add_argument("--sources", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.USE_NUMBA:
        print("numba is disabled (TRICOLOR_DISABLE_NUMBA set or numba missing); nothing to compare")
        return 1

    pargs, shape = propagate_inputs(args.distance, args.shots)
    a = run_propagate(kernels._propagate_numba, pargs, shape)
    b = run_propagate(kernels._propagate_numpy, pargs, shape)
    assert all(np.array_equal(u, v) for u, v in zip(a, b)), "propagate kernels disagree"

    graph = dijkstra_inputs(args.distance)
    nb = np.flatnonzero(~graph[3])
    sources = nb[np.linspace(0, len(nb) - 1, args.sources).astype(int)]
    a = run_dijkstra(kernels._dijkstra_numba, graph, sources)
    b = run_dijkstra(kernels._dijkstra_numpy, graph, sources)
    assert all(np.array_equal(u[0], v[0]) and np.array_equal(u[1], v[1]) for u, v in zip(a, b)), \
        "dijkstra kernels disagree"

    rows = [
        ("propagate", f"d={args.distance} shots={args.shots} gates={len(pargs[0])}",
         _best(lambda: run_propagate(kernels._propagate_numba, pargs, shape), args.repeat),
         _best(lambda: run_propagate(kernels._propagate_numpy, pargs, shape), args.repeat)),
        ("dijkstra", f"d={args.distance} vertices={len(graph[0]) - 1} sources={len(sources)}",
         _best(lambda: run_dijkstra(kernels._dijkstra_numba, graph, sources), args.repeat),
         _best(lambda: run_dijkstra(kernels._dijkstra_numpy, graph, sources), args.repeat)),
    ]
    print(f"{'kernel':10s} {'input':45s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, desc, tn, tp in rows:
        print(f"{name:10s} {desc:45s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
