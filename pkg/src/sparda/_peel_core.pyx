# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled erasure-peeling kernel.

Index-only peeling over a sparse parity-check matrix in CSR form: given an
erasure pattern, repeatedly resolve checks with exactly one erased member
until no such check remains.  The surviving erased positions are the maximal
stopping set contained in the pattern (empty iff peeling decodes).
"""

import numpy as np


def peel_residual(int n_rows, int n_cols,
                  int[::1] row_ptr, int[::1] row_idx,
                  int[::1] col_ptr, int[::1] col_idx,
                  unsigned char[::1] erased):
    """Return the sorted residual erased positions as an int32 array.

    ``erased`` is a length-n_cols 0/1 mask; it is not modified.
    """
    cdef int i, j, p, q, row, pos, top
    cdef unsigned char[::1] state = np.array(erased, dtype=np.uint8, copy=True)
    cdef int[::1] count = np.zeros(n_rows, dtype=np.int32)
    cdef int[::1] stack = np.empty(n_rows, dtype=np.int32)
    cdef unsigned char[::1] queued = np.zeros(n_rows, dtype=np.uint8)

    for i in range(n_rows):
        for p in range(row_ptr[i], row_ptr[i + 1]):
            if state[row_idx[p]]:
                count[i] += 1

    top = 0
    for i in range(n_rows):
        if count[i] == 1:
            stack[top] = i
            top += 1
            queued[i] = 1

    while top > 0:
        top -= 1
        row = stack[top]
        queued[row] = 0
        if count[row] != 1:
            continue
        pos = -1
        for p in range(row_ptr[row], row_ptr[row + 1]):
            if state[row_idx[p]]:
                pos = row_idx[p]
                break
        if pos < 0:
            continue
        state[pos] = 0
        for q in range(col_ptr[pos], col_ptr[pos + 1]):
            j = col_idx[q]
            count[j] -= 1
            if count[j] == 1 and not queued[j]:
                stack[top] = j
                top += 1
                queued[j] = 1

    out = []
    for i in range(n_cols):
        if state[i]:
            out.append(i)
    return np.asarray(out, dtype=np.int32)
