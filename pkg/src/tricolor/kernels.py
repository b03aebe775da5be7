"""Hot loops: Pauli-frame propagation and Dijkstra.

Each kernel has a numba implementation and a numpy fallback with identical
semantics; the module-level names dispatch on :data:`tricolor._accel.USE_NUMBA`.
"""

from __future__ import annotations

import heapq

import numpy as np

from ._accel import USE_NUMBA, njit

PREP_Z, PREP_X, CNOT, MEAS_Z, MEAS_X, IDLE = range(6)

INF = np.inf


# --------------------------------------------------------------------------
# Pauli frames
#
# Frames are uint8 arrays of shape (num_qubits, rows).  Injections are given
# in CSR form keyed by gate index: for gate g, entries ptr[g]:ptr[g+1] of
# (row, qubit, xbit, zbit) are XORed into the frame right after the gate;
# for measurement gates the entry flips the recorded outcome instead.
# --------------------------------------------------------------------------


@njit
def _propagate_numba(kind, q0, q1, meas_slot, ptr, inj_row, inj_qubit, inj_x, inj_z, fx, fz, record):
    rows = fx.shape[1]
    for g in range(kind.shape[0]):
        k = kind[g]
        a = q0[g]
        if k == CNOT:
            b = q1[g]
            for r in range(rows):
                fx[b, r] ^= fx[a, r]
                fz[a, r] ^= fz[b, r]
        elif k == PREP_Z or k == PREP_X:
            for r in range(rows):
                fx[a, r] = 0
                fz[a, r] = 0
        elif k == MEAS_Z:
            m = meas_slot[g]
            for r in range(rows):
                record[m, r] = fx[a, r]
        elif k == MEAS_X:
            m = meas_slot[g]
            for r in range(rows):
                record[m, r] = fz[a, r]
        for i in range(ptr[g], ptr[g + 1]):
            r = inj_row[i]
            if k == MEAS_Z or k == MEAS_X:
                record[meas_slot[g], r] ^= 1
            else:
                q = inj_qubit[i]
                fx[q, r] ^= inj_x[i]
                fz[q, r] ^= inj_z[i]


def _propagate_numpy(kind, q0, q1, meas_slot, ptr, inj_row, inj_qubit, inj_x, inj_z, fx, fz, record):
    for g in range(len(kind)):
        k = kind[g]
        a = q0[g]
        if k == CNOT:
            b = q1[g]
            fx[b] ^= fx[a]
            fz[a] ^= fz[b]
        elif k == PREP_Z or k == PREP_X:
            fx[a] = 0
            fz[a] = 0
        elif k == MEAS_Z:
            record[meas_slot[g]] = fx[a]
        elif k == MEAS_X:
            record[meas_slot[g]] = fz[a]
        lo, hi = ptr[g], ptr[g + 1]
        if lo == hi:
            continue
        rows = inj_row[lo:hi]
        if k == MEAS_Z or k == MEAS_X:
            np.bitwise_xor.at(record[meas_slot[g]], rows, 1)
        else:
            qs = inj_qubit[lo:hi]
            np.bitwise_xor.at(fx, (qs, rows), inj_x[lo:hi])
            np.bitwise_xor.at(fz, (qs, rows), inj_z[lo:hi])


def propagate(kind, q0, q1, meas_slot, ptr, inj_row, inj_qubit, inj_x, inj_z, fx, fz, record):
    """Run the frames ``fx``/``fz`` through the gate list in place."""
    fn = _propagate_numba if USE_NUMBA else _propagate_numpy
    fn(kind, q0, q1, meas_slot, ptr, inj_row, inj_qubit, inj_x, inj_z, fx, fz, record)


# --------------------------------------------------------------------------
# Dijkstra on a CSR graph
# --------------------------------------------------------------------------


@njit
def _dijkstra_numba(indptr, indices, weights, source, blocked, dist, pred):
    n = indptr.shape[0] - 1
    for i in range(n):
        dist[i] = np.inf
        pred[i] = -1
    dist[source] = 0.0
    done = np.zeros(n, dtype=np.bool_)
    # binary heap of (distance, vertex) pairs
    hd = np.empty(weights.shape[0] + n + 1, dtype=np.float64)
    hv = np.empty(weights.shape[0] + n + 1, dtype=np.int64)
    size = 1
    hd[0] = 0.0
    hv[0] = source
    while size > 0:
        du = hd[0]
        u = hv[0]
        size -= 1
        if size > 0:
            # sift the last element down from the root
            ld = hd[size]
            lv = hv[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and (hd[c + 1] < hd[c] or (hd[c + 1] == hd[c] and hv[c + 1] < hv[c])):
                    c += 1
                if hd[c] < ld or (hd[c] == ld and hv[c] < lv):
                    hd[i] = hd[c]
                    hv[i] = hv[c]
                    i = c
                else:
                    break
            hd[i] = ld
            hv[i] = lv
        if done[u]:
            continue
        done[u] = True
        if blocked[u] and u != source:
            continue
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            nd = du + weights[j]
            if nd < dist[v] or (nd == dist[v] and not done[v] and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                # sift up
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) // 2
                    if hd[p] > nd or (hd[p] == nd and hv[p] > v):
                        hd[i] = hd[p]
                        hv[i] = hv[p]
                        i = p
                    else:
                        break
                hd[i] = nd
                hv[i] = v


def _dijkstra_numpy(indptr, indices, weights, source, blocked, dist, pred):
    dist[:] = np.inf
    pred[:] = -1
    dist[source] = 0.0
    done = np.zeros(len(dist), dtype=bool)
    heap = [(0.0, int(source))]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if blocked[u] and u != source:
            continue
        lo, hi = indptr[u], indptr[u + 1]
        for v, w in zip(indices[lo:hi].tolist(), weights[lo:hi].tolist()):
            nd = du + w
            if nd < dist[v] or (nd == dist[v] and not done[v] and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))


def dijkstra(indptr, indices, weights, source, blocked=None):
    """Single-source shortest paths; ties broken towards the smaller predecessor id.

    Vertices flagged in ``blocked`` are reached but never expanded, so no
    path passes through them.
    """
    n = len(indptr) - 1
    dist = np.empty(n, dtype=np.float64)
    pred = np.empty(n, dtype=np.int64)
    if blocked is None:
        blocked = np.zeros(n, dtype=np.bool_)
    fn = _dijkstra_numba if USE_NUMBA else _dijkstra_numpy
    fn(indptr, indices, weights, int(source), blocked, dist, pred)
    return dist, pred
