"""Pure-Python fallback for the erasure-peeling kernel.

Same contract as the compiled version in ``_peel_core.pyx``; used when the
extension is unavailable or when SPARDA_PURE_PYTHON is set.
"""

import numpy as np


def peel_residual(n_rows, n_cols, row_ptr, row_idx, col_ptr, col_idx, erased):
    """Return the sorted residual erased positions as an int32 array."""
    state = bytearray(bytes(erased))
    count = [0] * n_rows
    row_ptr = memoryview(np.ascontiguousarray(row_ptr, dtype=np.int32))
    row_idx = memoryview(np.ascontiguousarray(row_idx, dtype=np.int32))
    col_ptr = memoryview(np.ascontiguousarray(col_ptr, dtype=np.int32))
    col_idx = memoryview(np.ascontiguousarray(col_idx, dtype=np.int32))

    for i in range(n_rows):
        c = 0
        for p in range(row_ptr[i], row_ptr[i + 1]):
            if state[row_idx[p]]:
                c += 1
        count[i] = c

    stack = [i for i in range(n_rows) if count[i] == 1]
    while stack:
        row = stack.pop()
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
            if count[j] == 1:
                stack.append(j)

    return np.asarray([i for i in range(n_cols) if state[i]], dtype=np.int32)
