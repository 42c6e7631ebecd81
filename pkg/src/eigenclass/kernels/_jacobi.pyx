# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cyclic-by-row Jacobi eigensolver for dense symmetric matrices."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef double _off_norm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s += a[i, j] * a[i, j]
    return sqrt(2.0 * s)


cdef int _jacobi(double[:, ::1] a, double[:, ::1] v, Py_ssize_t n,
                 int max_sweeps, double tol) noexcept nogil:
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double apq, theta, t, c, s, akp, akq
    for sweep in range(max_sweeps):
        if _off_norm(a, n) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # A <- A J (columns p, q)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                # A <- J^T A (rows p, q)
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq
    if _off_norm(a, n) <= tol:
        return max_sweeps
    return -1


def jacobi_eigh(a_in, int max_sweeps, double tol):
    """Return (eigenvalues, eigenvectors as columns, sweeps used or -1)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] av = a
    cdef double[:, ::1] vv = v
    cdef int sweeps
    with nogil:
        sweeps = _jacobi(av, vv, n, max_sweeps, tol)
    return np.diag(a).copy(), v, sweeps
