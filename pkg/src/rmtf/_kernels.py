"""Compiled inner loops for binary extension fields (q = 2, m <= 63).

Elements are bit-packed in uint64 exactly as in rmtf.field; the defining
modulus is passed as a packed uint64 with its leading degree-m bit set.
Each kernel mirrors a pure-Python reference implementation in rmtf.field or
rmtf.linalg, and the test suite cross-checks the two routes on random inputs.

This module is imported lazily (first use of a fast-path operation) because
pulling in numba costs more than a second of interpreter time.
"""

import numpy as np
from numba import njit

_U1 = np.uint64(1)


@njit("uint64(uint64, uint64, uint64, uint64)", cache=True)
def gf2m_mul(a, b, f, m):
    """ Product in F_{2^m}: shift-and-add with a reduction after every shift. """
    r = np.uint64(0)
    while b:
        if b & _U1:
            r ^= a
        b >>= _U1
        a <<= _U1
        if (a >> m) & _U1:
            a ^= f
    return r


@njit("uint64(uint64, uint64, uint64)", cache=True)
def gf2m_inv(a, f, m):
    """ Inverse by Fermat: the square-and-multiply chain for 2^m - 2. """
    t = a
    for _ in range(np.int64(m) - 2):  # int64: m = 1 must give an empty range
        t = gf2m_mul(gf2m_mul(t, t, f, m), a, f, m)
    return gf2m_mul(t, t, f, m)


@njit("void(uint64[:, :], uint64[:, :], uint64[:, :], uint64, uint64)", cache=True)
def gf2m_matmul(A, B, C, f, m):
    """ C = A @ B over F_{2^m}; C must be zero-filled with matching shape. """
    rows, inner = A.shape
    cols = B.shape[1]
    for i in range(rows):
        for j in range(cols):
            acc = np.uint64(0)
            for k in range(inner):
                if A[i, k] and B[k, j]:
                    acc ^= gf2m_mul(A[i, k], B[k, j], f, m)
            C[i, j] = acc


@njit("int64(uint64[:, :], int64[:], uint64, uint64)", cache=True)
def gf2m_rref(M, pivots, f, m):
    """Reduce M in place to reduced row echelon form over F_{2^m}.

    Pivot search takes the first nonzero entry below the current row.
    Returns the rank; pivots[:rank] receives the pivot column indexes.
    """
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if M[i, c]:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(cols):
                tmp = M[r, j]
                M[r, j] = M[p, j]
                M[p, j] = tmp
        if M[r, c] != _U1:
            pinv = gf2m_inv(M[r, c], f, m)
            for j in range(c, cols):
                M[r, j] = gf2m_mul(M[r, j], pinv, f, m)
        for i in range(rows):
            if i != r and M[i, c]:
                coef = M[i, c]
                for j in range(c, cols):
                    if M[r, j]:
                        M[i, j] ^= gf2m_mul(coef, M[r, j], f, m)
        pivots[r] = c
        r += 1
    return r
