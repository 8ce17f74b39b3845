"""Plain-text output writers.

Diagnostics CSV: header ``t,mass,momx,momy,energy,minh,l2H``, one row per
record, every number with 17 significant digits.

Field dump: a comment header, then one block per element::

    # element <k>
    <x> <y> <h> <hu> <hv> <b>     # (n*n) lines, xi index outer, eta index inner

Blocks are separated by a blank line.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .diagnostics import DiagnosticsRecord


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def diagnostics_csv(records: Iterable[DiagnosticsRecord]) -> str:
    lines = [DiagnosticsRecord.header()] + [r.row() for r in records]
    return "\n".join(lines) + "\n"


def write_diagnostics(records: Iterable[DiagnosticsRecord], path) -> Path:
    return _write(path, diagnostics_csv(records))


def field_dump(W, geo, bottom, t: float) -> str:
    W = np.asarray(W, dtype=float)
    b = np.broadcast_to(bottom, W.shape[:-1])
    n = W.shape[1]
    out = [f"# t = {float(t):.17g}", f"# elements = {W.shape[0]}, nodes per element = {n * n}",
           "# columns: x y h hu hv b"]
    for k in range(W.shape[0]):
        out.append(f"# element {k}")
        cols = np.column_stack([geo.x[k].ravel(), geo.y[k].ravel(), W[k].reshape(-1, 3), b[k].ravel()])
        out.extend(" ".join(format(v, ".17g") for v in row) for row in cols)
        out.append("")
    return "\n".join(out)


def write_field(W, geo, bottom, t: float, path) -> Path:
    return _write(path, field_dump(W, geo, bottom, t))


def read_field(path):
    """Inverse of :func:`write_field`: returns ``(t, data)`` with data shaped ``(K, n*n, 6)``."""
    text = Path(path).read_text().splitlines()
    t = float(text[0].split("=", 1)[1])
    blocks, cur = [], None
    for line in text[1:]:
        if line.startswith("# element "):
            cur = []
            blocks.append(cur)
        elif line and not line.startswith("#"):
            cur.append([float(v) for v in line.split()])
    return t, np.array(blocks)
