"""Text serialization for matrices with mode structure.

Format::

    dims: d1 d2 ... dK
    order: n
    <n rows of n whitespace-separated entries, 17 significant digits>
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MatrixFormatError
from .linalg import ModeDims, SymMatrix


def write_matrix(path, matrix: SymMatrix, dims: ModeDims) -> None:
    n = matrix.order
    lines = [
        "dims: " + " ".join(str(d) for d in dims.dims),
        f"order: {n}",
    ]
    for row in matrix.a:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> tuple[SymMatrix, ModeDims]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise MatrixFormatError("matrix file must start with 'dims:' and 'order:' lines")
    if not lines[0].startswith("dims:"):
        raise MatrixFormatError("first line must be 'dims: d1 d2 ...'")
    if not lines[1].startswith("order:"):
        raise MatrixFormatError("second line must be 'order: n'")
    try:
        dims = tuple(int(tok) for tok in lines[0].split(":", 1)[1].split())
        order = int(lines[1].split(":", 1)[1].strip())
    except ValueError as exc:
        raise MatrixFormatError(f"malformed header: {exc}") from exc
    if not dims:
        raise MatrixFormatError("dims line lists no dimensions")
    product = 1
    for d in dims:
        product *= d
    if product != order:
        raise MatrixFormatError(f"dims {dims} imply order {product}, header says {order}")
    body = lines[2:]
    if len(body) != order:
        raise MatrixFormatError(f"expected {order} matrix rows, found {len(body)}")
    rows = []
    for i, line in enumerate(body):
        toks = line.split()
        if len(toks) != order:
            raise MatrixFormatError(f"row {i + 1} has {len(toks)} entries, expected {order}")
        try:
            rows.append([float(tok) for tok in toks])
        except ValueError as exc:
            raise MatrixFormatError(f"row {i + 1}: {exc}") from exc
    try:
        matrix = SymMatrix(np.array(rows))
        mode_dims = ModeDims(dims)
    except Exception as exc:
        raise MatrixFormatError(f"invalid matrix content: {exc}") from exc
    return matrix, mode_dims
