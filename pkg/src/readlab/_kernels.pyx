# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float kernels; see readlab._kernels_py for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def read_norm_batch(double[:, ::1] X, double[:, ::1] V, double[::1] r):
    cdef Py_ssize_t k = X.shape[0], d = X.shape[1], M = V.shape[0]
    cdef Py_ssize_t a, i, n
    cdef double sup, acc, dot, v
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] res = out
    for a in range(k):
        sup = 0.0
        for i in range(d):
            v = fabs(X[a, i])
            if v > sup:
                sup = v
        acc = 0.0
        for n in range(M):
            dot = 0.0
            for i in range(d):
                dot += V[n, i] * X[a, i]
            acc += r[n] * fabs(dot)
        res[a] = sup + acc
    return out


def covering_radius(double[:, ::1] mesh, double[:, ::1] dirs):
    cdef Py_ssize_t K = mesh.shape[0], d = mesh.shape[1], P = dirs.shape[0]
    cdef Py_ssize_t a, p, i
    cdef double worst = 0.0, best, dist
    for a in range(K):
        best = 1e300
        for p in range(P):
            dist = 0.0
            for i in range(d):
                dist += fabs(mesh[a, i] - dirs[p, i])
                if dist >= best:
                    break
            if dist < best:
                best = dist
        if best > worst:
            worst = best
    return worst


def l1_distances(double[:, ::1] dirs, double[::1] center):
    cdef Py_ssize_t P = dirs.shape[0], d = dirs.shape[1], p, i
    cdef double acc
    out = np.empty(P, dtype=np.float64)
    cdef double[::1] res = out
    for p in range(P):
        acc = 0.0
        for i in range(d):
            acc += fabs(dirs[p, i] - center[i])
        res[p] = acc
    return out
