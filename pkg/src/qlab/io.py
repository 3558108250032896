"""JSON files for ensembles and rank-1 POVMs.

Ensemble file (schema_version "1")::

    {"schema_version": "1", "dim": 2,
     "states": [[{"re": 1.0, "im": 0.0}, {"re": 0.0, "im": 0.0}], ...],
     "probs": [0.5, ...],
     "fiducial": [...]}            # optional, written by the SIC command

A POVM file has the same layout with "weights" in place of "probs"; each
element is weight * |state><state|, and completeness replaces the
sum-to-one check.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ensembles import Ensemble
from .operators import Povm, validate_povm

SCHEMA_VERSION = "1"
FILE_TOL = 1e-9


class FileFormatError(ValueError):
    pass


def complex_record(z: complex) -> dict:
    # float repr is the shortest string that round-trips exactly
    return {"re": float(z.real), "im": float(z.imag)}


def vector_records(vec) -> list[dict]:
    return [complex_record(z) for z in np.asarray(vec, dtype=complex)]


def _parse_vector(rec, where: str, dim: int) -> np.ndarray:
    if not isinstance(rec, list):
        raise FileFormatError(f"{where}: expected a list of complex records")
    if len(rec) != dim:
        raise FileFormatError(f"{where}: length {len(rec)} does not match dim {dim}")
    out = np.empty(dim, dtype=complex)
    for k, z in enumerate(rec):
        try:
            out[k] = complex(float(z["re"]), float(z["im"]))
        except (TypeError, KeyError, ValueError):
            raise FileFormatError(f"{where}[{k}]: expected {{\"re\": float, \"im\": float}}") \
                from None
    return out


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") \
            from None
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: top level must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FileFormatError(f"{path}: field 'schema_version': expected \"1\", got {version!r}")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FileFormatError(f"{path}: field 'dim': expected a positive integer")
    return doc


def _read_states(doc: dict, path, key: str):
    dim = doc["dim"]
    states = doc.get("states")
    weights = doc.get(key)
    if not isinstance(states, list) or not states:
        raise FileFormatError(f"{path}: field 'states': expected a nonempty list")
    if not isinstance(weights, list) or len(weights) != len(states):
        raise FileFormatError(f"{path}: field '{key}': expected {len(states)} numbers")
    kets = np.array([_parse_vector(s, f"{path}: states[{i}]", dim) for i, s in enumerate(states)])
    try:
        w = np.array([float(x) for x in weights])
    except (TypeError, ValueError):
        raise FileFormatError(f"{path}: field '{key}': entries must be numbers") from None
    norms = np.linalg.norm(kets, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1) > FILE_TOL)
    if bad.size:
        raise FileFormatError(f"{path}: states[{bad[0]}]: not normalized (norm {norms[bad[0]]!r})")
    return kets / norms[:, None], w


def write_ensemble(path, p: Ensemble, fiducial=None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dim": p.dim,
        "states": [vector_records(k) for k in p.kets],
        "probs": [float(x) for x in p.probs],
    }
    if fiducial is not None:
        doc["fiducial"] = vector_records(fiducial)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_ensemble(path) -> Ensemble:
    doc = _read_json(path)
    kets, probs = _read_states(doc, path, "probs")
    if np.any(probs < 0) or abs(probs.sum() - 1) > FILE_TOL:
        raise FileFormatError(f"{path}: field 'probs': must be nonnegative and sum to 1")
    return Ensemble(kets, probs / probs.sum())


def read_fiducial(path) -> np.ndarray | None:
    doc = _read_json(path)
    if "fiducial" not in doc:
        return None
    return _parse_vector(doc["fiducial"], f"{path}: fiducial", doc["dim"])


def write_povm(path, weights, directions) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dim": int(np.asarray(directions).shape[1]),
        "states": [vector_records(v) for v in directions],
        "weights": [float(w) for w in weights],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_povm(path) -> Povm:
    doc = _read_json(path)
    kets, weights = _read_states(doc, path, "weights")
    if np.any(weights < 0):
        raise FileFormatError(f"{path}: field 'weights': must be nonnegative")
    povm = Povm.from_rank_one(weights, kets)
    check = validate_povm(povm, tol=FILE_TOL)
    if not check:
        raise FileFormatError(
            f"{path}: elements do not sum to the identity "
            f"(residual {check.completeness_residual:.3g})")
    return povm
