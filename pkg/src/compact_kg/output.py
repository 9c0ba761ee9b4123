"""CSV and metadata writers. Floats use repr-free fixed formats so that
identical runs produce byte-identical files."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import KGError


def _open(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path, path.open("w", newline="")
    except OSError as exc:
        raise KGError(f"cannot write {path}: {exc}") from exc


def write_rows(path, header, rows):
    path, fh = _open(path)
    try:
        with fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise KGError(f"cannot write {path}: {exc}") from exc
    return path


def write_text(path, text: str):
    path, fh = _open(path)
    try:
        with fh:
            fh.write(text)
    except OSError as exc:
        raise KGError(f"cannot write {path}: {exc}") from exc
    return path


def write_solution(path, u):
    """(j, x_j, u_j) for a GridFunction."""
    x = u.grid.x
    rows = ([j, f"{x[j]:.16e}", f"{v:.16e}"] for j, v in enumerate(u.values.tolist()))
    return write_rows(path, ["j", "x", "u"], rows)


def write_energy(path, series):
    rows = ([n, f"{t:.10e}", f"{e:.16e}"] for n, t, e in series)
    return write_rows(path, ["n", "t", "E"], rows)


def write_stability(path, report):
    rows = ([l, f"{lam:.10e}", f"{c:.10e}", f"{th:.16e}"] for l, lam, c, th, _ in report.rows())
    return write_rows(path, ["l", "lambda", "c", "theta"], rows)
