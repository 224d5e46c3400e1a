"""Pure numpy implementations of the compiled kernels (same contracts)."""
from __future__ import annotations

import math

import numpy as np

SNAP_REL = 1e-9


def pivot(T: np.ndarray, r: int, c: int) -> None:
    """Gauss-Jordan pivot of tableau ``T`` on entry (r, c), in place."""
    row = T[r] / T[r, c]
    row[c] = 1.0
    col = T[:, c].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[nz] -= col[nz, None] * row[None, :]
        T[nz, c] = 0.0
    T[r] = row


def vcc_counts(A: float, R: float) -> tuple[int, int]:
    q = A / (math.pi * R * R)
    k = round(q)
    if abs(q - k) <= SNAP_REL * max(q, 1.0):
        return k, k + 1
    return math.ceil(q), math.ceil(q)


def capex_scan(radii, ap_cost, A, N, c_U, n_R_min, n_R_max):
    if c_U < 0:
        return _capex_scan_loop(radii, ap_cost, A, N, c_U, n_R_min, n_R_max)
    # with c_U >= 0 only n_R_min can win at each radius, so the scan vectorizes
    R = np.asarray(radii, dtype=float)
    ca = np.asarray(ap_cost, dtype=float)
    if R.size == 0 or (n_R_max >= 0 and n_R_max < n_R_min):
        return (False, 0.0, -1, -1, -1)
    q = A / (math.pi * R * R)
    k = np.rint(q)
    snapped = np.abs(q - k) <= SNAP_REL * np.maximum(q, 1.0)
    lo = np.where(snapped, k, np.ceil(q)).astype(np.int64)
    hi = np.where(snapped, k + 1, lo).astype(np.int64)
    m = np.where(lo // 2 >= n_R_min, lo, hi)  # smallest admissible count
    ok = m // 2 >= n_R_min
    if not ok.any():
        return (False, 0.0, -1, -1, -1)
    cost = (ca * q + c_U * (float(n_R_min) + 1.0)) / N
    idx = np.flatnonzero(ok)
    order = np.lexsort((m[idx] - n_R_min, -R[idx], cost[idx]))  # stable: first index wins ties
    i = int(idx[order[0]])
    return (True, float(cost[i]), int(m[i] - n_R_min), int(n_R_min), i)


def _capex_scan_loop(radii, ap_cost, A, N, c_U, n_R_min, n_R_max):
    best_key = None
    best = (False, 0.0, -1, -1, -1)
    for i, (R, ca) in enumerate(zip(np.asarray(radii, float), np.asarray(ap_cost, float))):
        R, ca = float(R), float(ca)
        q = A / (math.pi * R * R)
        lo, hi = vcc_counts(A, R)
        for m in range(lo, hi + 1):
            top = m // 2 if n_R_max < 0 else min(m // 2, n_R_max)
            if top < n_R_min:
                continue
            nr = np.arange(n_R_min, top + 1, dtype=np.float64)
            costs = (ca * q + c_U * (nr + 1.0)) / N
            j = int(np.argmin(costs))  # first minimum -> smallest n_R
            n_R = n_R_min + j
            key = (float(costs[j]), n_R, -R, m - n_R)
            if best_key is None or key < best_key:
                best_key = key
                best = (True, float(costs[j]), m - n_R, n_R, i)
    return best
