"""JSON encoding of quivers, representations and reports.

Complex matrices are nested row-major lists of ``[re, im]`` pairs.  Floats are
written with ``repr`` precision so every artifact reloads bit-exactly.
"""

from __future__ import annotations

import json
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CometError, ShapeMismatch
from .quiver import CometQuiver, quiver_from_dict
from .rep import Representation, check_representation

SOLUTION_FORMAT = "cometquiver.solution/1"


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ShapeMismatch("matrices must be nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_representation(rep: Representation) -> dict:
    return {
        "x": [[[encode_matrix(m) for m in e] for e in arm] for arm in rep.x],
        "y": [[[encode_matrix(m) for m in e] for e in arm] for arm in rep.y],
        "a": [encode_matrix(m) for m in rep.a],
        "b": [encode_matrix(m) for m in rep.b],
    }


def decode_representation(q: CometQuiver, doc: dict) -> Representation:
    unknown = set(doc) - {"x", "y", "a", "b"}
    if unknown:
        raise CometError(f"unknown representation fields: {sorted(unknown)}")

    def nest(key):
        return tuple(tuple(tuple(decode_matrix(m) for m in e) for e in arm) for arm in doc.get(key, []))

    rep = Representation(
        q,
        nest("x"),
        nest("y"),
        tuple(decode_matrix(m) for m in doc.get("a", [])),
        tuple(decode_matrix(m) for m in doc.get("b", [])),
    )
    check_representation(rep, atol=1e-9)
    return rep


def versions() -> dict:
    return {
        "cometquiver": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def stamp(q: CometQuiver | None, seed=None) -> dict:
    out = {"versions": versions(), "seed": seed}
    if q is not None:
        out["quiver_hash"] = q.digest()
    return out


def solution_document(q, rep, alpha, residual=None, meta=None) -> dict:
    doc = {
        "format": SOLUTION_FORMAT,
        "quiver": q.to_dict(),
        "alpha": [float(a) for a in np.asarray(alpha, dtype=float)],
        "representation": encode_representation(rep),
    }
    if residual is not None:
        doc["residual"] = residual.to_dict() if hasattr(residual, "to_dict") else residual
    if meta is not None:
        doc["meta"] = meta
    return doc


def load_solution(doc: dict):
    """Return (quiver, representation, alpha) from a solution document."""
    if "quiver" not in doc or "representation" not in doc:
        raise CometError("solution document needs 'quiver' and 'representation'")
    q = quiver_from_dict(doc["quiver"])
    rep = decode_representation(q, doc["representation"])
    alpha = np.asarray(doc.get("alpha", []), dtype=float)
    return q, rep, alpha


def _clean(obj):
    # JSON has no inf/nan; map them to null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _clean(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(_clean(obj), indent=indent, allow_nan=False)


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")
