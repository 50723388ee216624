"""Table and matrix serialization for reproducible runs.

CSV files follow RFC 4180 (comma separator, CRLF records) with reals
printed to 17 significant digits so a round trip is bit-faithful. JSON
documents always carry schema_version and the fully resolved
configuration of the run that produced them, with keys sorted, so a
saved document is enough to reproduce its run byte for byte. NaN never
reaches JSON; it becomes null.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .model import FitnessVector, SymmetricMatrix

__all__ = [
    "SCHEMA_VERSION",
    "fmt_float",
    "csv_lines",
    "write_csv",
    "json_document",
    "write_json",
    "write_fitness_csv",
    "save_matrix",
    "write_matrix_csv",
]

SCHEMA_VERSION = "1"


def fmt_float(x: float) -> str:
    """17 significant digits, enough to reproduce any double exactly."""
    return f"{x:.17g}"


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return fmt_float(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    if not isinstance(value, str):
        raise TypeError(f"no CSV cell encoding for {type(value).__name__}")
    text = value
    if any(c in text for c in ',"\r\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def csv_lines(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """One RFC 4180 document as a string, CRLF separators included."""
    out = [",".join(_cell(h) for h in header)]
    for row in rows:
        out.append(",".join(_cell(v) for v in row))
    return "\r\n".join(out) + "\r\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.write_text(csv_lines(header, rows), newline="")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if not math.isfinite(v) else v
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, complex):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def json_document(config: dict[str, Any], **payload: Any) -> str:
    """Serialized document with schema_version and the resolved config."""
    doc = {"schema_version": SCHEMA_VERSION, "config": _jsonable(config)}
    for key, value in payload.items():
        doc[key] = _jsonable(value)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, config: dict[str, Any], **payload: Any) -> Path:
    path = Path(path)
    path.write_text(json_document(config, **payload))
    return path


def write_fitness_csv(path: str | Path, fv: FitnessVector) -> Path:
    """(j, x_j) with j counting from 1 at the hub."""
    return write_csv(path, ("j", "x_j"), ((j + 1, x) for j, x in enumerate(fv.x)))


def save_matrix(path: str | Path, M: SymmetricMatrix, meta: dict[str, Any]) -> tuple[Path, Path]:
    """Binary dump plus a .meta.json sidecar naming what was dumped.

    The sidecar always records n and kind; callers add alpha, epsilon_n,
    and seed so the file is reproducible from its own metadata.
    """
    path = Path(path)
    if path.suffix != ".npy":
        path = path.with_suffix(path.suffix + ".npy")
    np.save(path, M.entries)
    sidecar = path.with_suffix(".meta.json")
    doc = {"n": M.n, "kind": M.kind}
    doc.update(meta)
    sidecar.write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")
    return path, sidecar


def write_matrix_csv(path: str | Path, M: SymmetricMatrix, meta: dict[str, Any]) -> Path:
    """Row-major CSV dump with a single '#'-prefixed header line.

    The header carries n, kind, and the caller's metadata as key=value
    pairs. Strictly speaking RFC 4180 has no comment lines; the leading
    '#' keeps the body parseable by anything that skips comments.
    """
    path = Path(path)
    doc = {"n": M.n, "kind": M.kind}
    doc.update(meta)
    head = "# " + " ".join(f"{k}={v}" for k, v in sorted(doc.items()))
    body = csv_lines(
        tuple(f"c{j}" for j in range(M.n)),
        (row for row in M.entries),
    )
    path.write_text(head + "\r\n" + body, newline="")
    return path
