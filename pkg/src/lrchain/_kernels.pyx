# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: LAPACK divide-and-conquer factorizations and tail sums.

The bidiagonal and tridiagonal divide-and-conquer drivers (``dbdsdc``,
``dstedc``) are not wrapped by scipy's Python LAPACK layer, so they are
called here through ``scipy.linalg.cython_lapack``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport dbdsdc, dstedc

cnp.import_array()

BACKEND = "compiled"


def bidiagonal_svd(double[::1] diag, double[::1] sub):
    """SVD of the lower-bidiagonal matrix with ``diag`` and ``sub``.

    Returns ``(P, s, Q)`` with ``B = P @ np.diag(s) @ Q.T``, ``s`` descending.
    """
    cdef int n = diag.shape[0]
    if sub.shape[0] != n - 1:
        raise ValueError("sub must have length len(diag) - 1")
    cdef double[::1] d = np.array(diag, dtype=np.float64)
    cdef double[::1] e = np.zeros(max(n, 1), dtype=np.float64)
    cdef int i
    for i in range(n - 1):
        e[i] = sub[i]
    U = np.zeros((n, n), dtype=np.float64, order="F")
    VT = np.zeros((n, n), dtype=np.float64, order="F")
    cdef double[::1, :] u_view = U
    cdef double[::1, :] vt_view = VT
    cdef double[::1] work = np.empty(3 * n * n + 4 * n, dtype=np.float64)
    cdef int[::1] iwork = np.empty(8 * n, dtype=np.intc)
    cdef double q_dummy = 0.0
    cdef int iq_dummy = 0
    cdef int info = 0
    cdef char uplo = b"L"
    cdef char compq = b"I"
    with nogil:
        dbdsdc(&uplo, &compq, &n, &d[0], &e[0], &u_view[0, 0], &n,
               &vt_view[0, 0], &n, &q_dummy, &iq_dummy, &work[0], &iwork[0], &info)
    if info != 0:
        raise np.linalg.LinAlgError(f"dbdsdc failed (info={info})")
    return U, np.asarray(d), VT.T


def tridiagonal_eigh(double[::1] diag, double[::1] off):
    """Eigenpairs of a real symmetric tridiagonal matrix, ascending."""
    cdef int n = diag.shape[0]
    if off.shape[0] != n - 1:
        raise ValueError("off must have length len(diag) - 1")
    cdef double[::1] d = np.array(diag, dtype=np.float64)
    cdef double[::1] e = np.zeros(max(n, 1), dtype=np.float64)
    cdef int i
    for i in range(n - 1):
        e[i] = off[i]
    Z = np.zeros((n, n), dtype=np.float64, order="F")
    cdef double[::1, :] z_view = Z
    cdef int lwork = 1 + 4 * n + n * n
    cdef int liwork = 3 + 5 * n
    cdef double[::1] work = np.empty(lwork, dtype=np.float64)
    cdef int[::1] iwork = np.empty(liwork, dtype=np.intc)
    cdef int info = 0
    cdef char compz = b"I"
    with nogil:
        dstedc(&compz, &n, &d[0], &e[0], &z_view[0, 0], &n,
               &work[0], &lwork, &iwork[0], &liwork, &info)
    if info != 0:
        raise np.linalg.LinAlgError(f"dstedc failed (info={info})")
    return np.asarray(d), Z


def tail_correlations(const double[:, :] rows):
    """``C[k, t] = 2 sqrt(sum_{m >= 2k+1} rows[m, t]**2)`` for 0-based ``k``.

    Accumulates from the last row upward.
    """
    cdef Py_ssize_t dim = rows.shape[0]
    cdef Py_ssize_t nt = rows.shape[1]
    if dim % 2:
        raise ValueError("walk dimension must be even")
    out = np.empty((dim // 2, nt), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t m, t
    cdef double acc, x
    with nogil:
        for t in range(nt):
            acc = 0.0
            m = dim - 1
            while m >= 0:
                x = rows[m, t]
                acc = acc + x * x
                if m % 2 == 1:
                    c[(m - 1) // 2, t] = 2.0 * sqrt(acc)
                m -= 1
    return out


def tail_probabilities(const double[:, :] prob):
    """``PR[k, t] = sum_{k' > k} prob[k', t]``, accumulated from the end."""
    cdef Py_ssize_t n = prob.shape[0]
    cdef Py_ssize_t nt = prob.shape[1]
    out = np.empty((n, nt), dtype=np.float64)
    cdef double[:, ::1] pr = out
    cdef Py_ssize_t k, t
    cdef double acc
    with nogil:
        for t in range(nt):
            acc = 0.0
            k = n - 1
            while k >= 0:
                pr[k, t] = acc
                acc = acc + prob[k, t]
                k -= 1
    return out
