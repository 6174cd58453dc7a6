"""JSON schemas for operators, instances, configs and result records.

Complex scalars are serialized as ``[re, im]`` pairs; complex matrices as
nested lists of pairs.  Result records are written with sorted keys and a
fixed indentation so identical (config, seed) runs produce byte-identical
files.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any

import numpy as np

from .applications import LinearSystemInstance
from .pauli import OperatorError, PauliOperator, build_operator, diagonal_operator


class ConfigError(ValueError):
    """Config or instance file failed to parse; message carries field context."""


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_operator(spec: dict, field: str = "operator") -> PauliOperator:
    """{"n": int, "terms": [{"coeff": float, "word": "XYZ.."}]}"""
    try:
        n = int(spec["n"])
        terms = [(float(t["coeff"]), str(t["word"])) for t in spec["terms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{field}: expected {{n, terms:[{{coeff, word}}]}} "
                          f"({exc})") from exc
    try:
        op = build_operator(terms)
    except OperatorError as exc:
        raise ConfigError(f"{field}: {exc}") from exc
    if op.n != n:
        raise ConfigError(f"{field}: declared n={n} but words have length {op.n}")
    return op


def complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def pair_to_complex(pair, field: str) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair, 0.0)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ConfigError(f"{field}: expected [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def parse_complex_matrix(rows, field: str) -> np.ndarray:
    try:
        return np.array([[pair_to_complex(entry, field) for entry in row]
                         for row in rows], dtype=complex)
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"{field}: malformed complex matrix ({exc})") from exc


def parse_complex_vector(entries, field: str) -> np.ndarray:
    return np.array([pair_to_complex(e, field) for e in entries], dtype=complex)


def parse_linear_system(spec: dict) -> LinearSystemInstance:
    try:
        a = parse_complex_matrix(spec["A"], "instance.A")
        b = parse_complex_vector(spec["b"], "instance.b")
    except KeyError as exc:
        raise ConfigError(f"instance: linear system needs field {exc}") from exc
    kappa = float(spec.get("kappa") or
                  1.0 / np.linalg.svd(a, compute_uv=False).min())
    return LinearSystemInstance(a=a, b=b, kappa=kappa)


def parse_synthetic(spec: dict, gamma: float | None = None):
    """Synthetic diagonal instance: eigenvalues (entries may be the string
    "gamma", filled from the sweep grid) plus eigenbasis overlaps."""
    raw = spec.get("eigenvalues")
    if not raw:
        raise ConfigError("instance: synthetic instance needs eigenvalues")
    values = []
    for entry in raw:
        if entry == "gamma":
            if gamma is None:
                raise ConfigError('instance: eigenvalue placeholder "gamma" '
                                  "used outside a gamma sweep")
            values.append(float(gamma))
        else:
            values.append(float(entry))
    dim = len(values)
    n = max(1, math.ceil(math.log2(dim)))
    padded = values + [max(values)] * (2 ** n - dim)
    operator = diagonal_operator(padded)
    weights = spec.get("overlaps")
    if weights is None:
        raise ConfigError("instance: synthetic instance needs overlaps")
    weights = np.array([float(w) for w in weights], dtype=float)
    if weights.size != dim or abs(weights.sum() - 1.0) > 1e-9 or weights.min() < 0:
        raise ConfigError("instance: overlaps must be a distribution over the "
                          "declared eigenvalues")
    padded_w = np.zeros(2 ** n)
    padded_w[:dim] = weights
    return operator, padded_w


def json_safe(value):
    """Recursively convert report intermediates to JSON-serializable values."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.complexfloating, complex)):
        return complex_to_pair(complex(value))
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    return value


def write_record(record: dict, path: str) -> None:
    """Atomic, deterministic persistence (sorted keys, fixed indent)."""
    payload = json.dumps(json_safe(record), sort_keys=True, indent=2) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
