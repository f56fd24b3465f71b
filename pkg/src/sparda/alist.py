"""Reader/writer for the conventional alist text format.

Layout: "n r", "max_col_deg max_row_deg", the n column degrees, the r row
degrees, then per-column and per-row adjacency lists with 1-based indices,
zero-padded to the maximum degree (padding zeros are ignored on read).
"""

from __future__ import annotations

from .codes import ParameterError, SparseParityMatrix


def to_alist(H: SparseParityMatrix) -> str:
    max_col = max(len(c) for c in H.cols)
    max_row = max(len(r) for r in H.rows)
    lines = [
        f"{H.n_cols} {H.n_rows}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in H.cols),
        " ".join(str(len(r)) for r in H.rows),
    ]
    for c in H.cols:
        padded = [i + 1 for i in c] + [0] * (max_col - len(c))
        lines.append(" ".join(map(str, padded)))
    for r in H.rows:
        padded = [j + 1 for j in r] + [0] * (max_row - len(r))
        lines.append(" ".join(map(str, padded)))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> SparseParityMatrix:
    tokens = text.split()
    if len(tokens) < 4:
        raise ParameterError("truncated alist")
    it = iter(tokens)

    def take(count):
        out = []
        for _ in range(count):
            try:
                out.append(int(next(it)))
            except StopIteration:
                raise ParameterError("truncated alist") from None
        return out

    n, r = take(2)
    max_col, max_row = take(2)
    col_degs = take(n)
    row_degs = take(r)
    cols = []
    for d in col_degs:
        entries = take(max_col)
        cols.append([x - 1 for x in entries if x > 0])
        if len(cols[-1]) != d:
            raise ParameterError("column degree mismatch in alist")
    rows = []
    for d in row_degs:
        entries = take(max_row)
        rows.append([x - 1 for x in entries if x > 0])
        if len(rows[-1]) != d:
            raise ParameterError("row degree mismatch in alist")
    return SparseParityMatrix(r, n, rows, cols)


def write_alist(H: SparseParityMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_alist(H))


def read_alist(path) -> SparseParityMatrix:
    with open(path) as fh:
        return from_alist(fh.read())
