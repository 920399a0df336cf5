"""Pure numpy/scipy fallback for the compiled kernels in ``_kernels.pyx``."""

import numpy as np
from scipy import linalg

BACKEND = "python"


def bidiagonal_svd(diag, sub):
    diag = np.asarray(diag, dtype=np.float64)
    sub = np.asarray(sub, dtype=np.float64)
    n = diag.shape[0]
    if sub.shape[0] != n - 1:
        raise ValueError("sub must have length len(diag) - 1")
    B = np.diag(diag)
    B[np.arange(1, n), np.arange(n - 1)] = sub
    P, s, QT = linalg.svd(B, lapack_driver="gesdd", check_finite=False)
    return P, s, QT.T


def tridiagonal_eigh(diag, off):
    diag = np.asarray(diag, dtype=np.float64)
    off = np.asarray(off, dtype=np.float64)
    if off.shape[0] != diag.shape[0] - 1:
        raise ValueError("off must have length len(diag) - 1")
    T = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return linalg.eigh(T, driver="evd", check_finite=False)


def tail_correlations(rows):
    rows = np.asarray(rows, dtype=np.float64)
    if rows.shape[0] % 2:
        raise ValueError("walk dimension must be even")
    tail = np.cumsum(rows[::-1] ** 2, axis=0)[::-1]
    return 2.0 * np.sqrt(tail[1::2])


def tail_probabilities(prob):
    prob = np.asarray(prob, dtype=np.float64)
    out = np.zeros_like(prob)
    out[:-1] = np.cumsum(prob[:0:-1], axis=0)[::-1]
    return out
