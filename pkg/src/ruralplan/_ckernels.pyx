# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: simplex pivoting and the exhaustive CAPEX grid scan.

Both functions mirror ``_pykernels`` operation for operation so the two
backends agree bit for bit.
"""
from libc.math cimport M_PI, ceil, fabs, llround

cdef double SNAP_REL = 1e-9


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c):
    """Gauss-Jordan pivot of tableau ``T`` on entry (r, c), in place."""
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1], i, j
    cdef double p = T[r, c], f
    for j in range(n):
        T[r, j] = T[r, j] / p
    T[r, c] = 1.0
    for i in range(m):
        if i == r:
            continue
        f = T[i, c]
        if f == 0.0:
            continue
        for j in range(n):
            T[i, j] = T[i, j] - f * T[r, j]
        T[i, c] = 0.0


cdef inline void _vcc_counts(double A, double R, long long *lo, long long *hi):
    cdef double q = A / (M_PI * R * R)
    cdef long long k = llround(q)
    cdef double scale = q if q > 1.0 else 1.0
    if fabs(q - <double>k) <= SNAP_REL * scale:
        lo[0] = k
        hi[0] = k + 1
    else:
        lo[0] = <long long>ceil(q)
        hi[0] = lo[0]


def capex_scan(double[::1] radii, double[::1] ap_cost, double A, double N, double c_U,
               long long n_R_min, long long n_R_max):
    """Exhaustive scan of every radius and every admissible (n_A, n_R) pair.

    Returns ``(found, cost_per_user, n_A, n_R, radius_index)``; ties go to
    smaller n_R, then larger radius, then smaller n_A. With ``c_U >= 0`` only
    the smallest admissible relay count is priced at each (R, m), since every
    larger count costs at least as much and loses the tie-break.
    """
    cdef Py_ssize_t i, best_i = -1
    cdef long long m, lo, hi, nR, top, best_nA = -1, best_nR = -1
    cdef double R, q, ca, cost, best_cost = 0.0, best_R = 0.0
    cdef bint better
    for i in range(radii.shape[0]):
        R = radii[i]
        ca = ap_cost[i]
        q = A / (M_PI * R * R)
        _vcc_counts(A, R, &lo, &hi)
        for m in range(lo, hi + 1):
            top = m // 2
            if n_R_max >= 0 and n_R_max < top:
                top = n_R_max
            nR = n_R_min
            while nR <= top:
                cost = (ca * q + c_U * (<double>nR + 1.0)) / N
                if best_i < 0:
                    better = True
                elif cost != best_cost:
                    better = cost < best_cost
                elif nR != best_nR:
                    better = nR < best_nR
                elif R != best_R:
                    better = R > best_R
                else:
                    better = (m - nR) < best_nA
                if better:
                    best_i, best_cost, best_R, best_nR, best_nA = i, cost, R, nR, m - nR
                if c_U >= 0.0:
                    # cost cannot fall as n_R grows: larger relay counts at this (R, m) are dominated
                    break
                nR += 1
    return best_i >= 0, best_cost, best_nA, best_nR, best_i
