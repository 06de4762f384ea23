"""JSON model files and CSV series I/O.

A model file looks like::

    {
      "family": "gexp", "m": 1, "n": 0,
      "params": {"omega": 0.2, "mu": 0.0, "e": [0.5], "d": 0.7},
      "bounds": {"omega": [0.02, 1.0], "mu": [-0.5, 0.5], "e": [[0.05, 1.5]], "d": [0.1, 3.0]},
      "innovation": {"gamma": 0.5}
    }

Vector blocks (``a``, ``b``, ``e``, ``f``) are lists; their bounds are lists
of ``[lo, hi]`` pairs.  GEXP/GHYP files may set ``"free_f": true`` (then
``params.f`` is estimated) or give fixed exponents in ``params.f``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from archpmle.exceptions import ArchError, DomainError
from archpmle.params import ParamVector, check_bounds, default_bounds
from archpmle.weights import KERNEL, RATIONAL, Family, ModelSpec, WeightParams, validate

__all__ = ["ModelFile", "ModelFileError", "load_model", "parse_model", "read_series", "write_atomic", "write_csv"]


class ModelFileError(DomainError):
    """Invalid model file; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ModelFile:
    spec: ModelSpec
    theta: ParamVector
    gamma: float
    bounds: np.ndarray
    bounds_given: bool


def _real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError(path, "expected a number")
    v = float(value)
    if not math.isfinite(v):
        raise ModelFileError(path, "must be finite")
    return v


def _int(doc: dict, key: str, default: int) -> int:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ModelFileError(key, "expected a nonnegative integer")
    return v


def _vector(params: dict, key: str, length: int) -> np.ndarray:
    path = f"params.{key}"
    if key not in params:
        raise ModelFileError(path, "missing")
    raw = params[key]
    if not isinstance(raw, list):
        raise ModelFileError(path, "expected a list")
    if len(raw) != length:
        raise ModelFileError(path, f"expected {length} values, got {len(raw)}")
    return np.array([_real(v, f"{path}[{i}]") for i, v in enumerate(raw)])


def _pair(raw, path: str) -> tuple[float, float]:
    if not isinstance(raw, list) or len(raw) != 2:
        raise ModelFileError(path, "expected [lo, hi]")
    lo, hi = _real(raw[0], f"{path}[0]"), _real(raw[1], f"{path}[1]")
    if lo >= hi:
        raise ModelFileError(path, "needs lo < hi")
    return lo, hi


def _blocks(spec: ModelSpec) -> list[tuple[str, int]]:
    fam = spec.family
    if fam in RATIONAL:
        out = [("a", spec.m), ("b", spec.n)]
    elif fam in KERNEL:
        out = [("e", spec.m)] + ([("f", spec.m)] if spec.free_f else [])
    else:
        return []
    if fam is not Family.GARCH:
        out.append(("d", 0))
    return out


def parse_model(doc) -> ModelFile:
    """Validate a decoded model document.

    Raises
    ------
    ModelFileError
        With the dotted path of the first offending field.
    """
    if not isinstance(doc, dict):
        raise ModelFileError("<root>", "expected a JSON object")
    if "family" not in doc:
        raise ModelFileError("family", "missing")
    fam = doc["family"]
    if not isinstance(fam, str) or fam not in {f.value for f in Family}:
        raise ModelFileError("family", f"unknown family {fam!r}")
    family = Family(fam)
    m, n = _int(doc, "m", 0), _int(doc, "n", 0)
    params = doc.get("params")
    if not isinstance(params, dict):
        raise ModelFileError("params", "missing or not an object")
    free_f = doc.get("free_f", False)
    if not isinstance(free_f, bool):
        raise ModelFileError("free_f", "expected true or false")
    fixed_f: tuple[float, ...] = ()
    if family in KERNEL and not free_f and "f" in params:
        fixed_f = tuple(_vector(params, "f", m))
    try:
        spec = ModelSpec(family, m, n, free_f, fixed_f)
    except ArchError as exc:
        raise ModelFileError("family", str(exc)) from None

    omega = _real(params["omega"], "params.omega") if "omega" in params else None
    if omega is None:
        raise ModelFileError("params.omega", "missing")
    mu = _real(params.get("mu", 0.0), "params.mu")
    parts = {}
    for key, length in _blocks(spec):
        if key == "d":
            if "d" not in params:
                raise ModelFileError("params.d", "missing")
            parts["d"] = _real(params["d"], "params.d")
        else:
            parts[key] = _vector(params, key, length)
    zeta = spec.pack(WeightParams(**parts)) if spec.r else np.zeros(0)
    try:
        validate(spec, zeta)
        theta = ParamVector(spec, omega, mu, zeta)
    except ArchError as exc:
        raise ModelFileError("params", str(exc)) from None

    gamma = 0.5
    if "innovation" in doc:
        inn = doc["innovation"]
        if not isinstance(inn, dict):
            raise ModelFileError("innovation", "expected an object")
        gamma = _real(inn.get("gamma", 0.5), "innovation.gamma")
        if gamma <= 0:
            raise ModelFileError("innovation.gamma", "must be positive")

    box = default_bounds(spec)
    given = "bounds" in doc
    if given:
        raw = doc["bounds"]
        if not isinstance(raw, dict):
            raise ModelFileError("bounds", "expected an object")
        rows: list[tuple[float, float]] = []
        for key in ("omega", "mu"):
            if key not in raw:
                raise ModelFileError(f"bounds.{key}", "missing")
            rows.append(_pair(raw[key], f"bounds.{key}"))
        for key, length in _blocks(spec):
            path = f"bounds.{key}"
            if key not in raw:
                raise ModelFileError(path, "missing")
            if key == "d":
                rows.append(_pair(raw[key], path))
            else:
                if not isinstance(raw[key], list) or len(raw[key]) != length:
                    raise ModelFileError(path, f"expected {length} [lo, hi] pairs")
                rows += [_pair(p, f"{path}[{i}]") for i, p in enumerate(raw[key])]
        try:
            box = check_bounds(spec, rows)
        except ArchError as exc:
            raise ModelFileError("bounds", str(exc)) from None
    theta.bounds = box
    return ModelFile(spec=spec, theta=theta, gamma=gamma, bounds=box, bounds_given=given)


def load_model(path) -> ModelFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(str(path), f"cannot read: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(str(path), f"invalid JSON: {exc}") from None
    return parse_model(doc)


def read_series(path) -> np.ndarray:
    """Read the ``y`` column of a CSV file with a header row."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DomainError(f"{path}: empty file")
            header = [h.strip() for h in header]
            if "y" not in header:
                raise DomainError(f"{path}: no 'y' column in header")
            col = header.index("y")
            vals = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    vals.append(float(row[col]))
                except (ValueError, IndexError):
                    raise DomainError(f"{path}: line {lineno}: bad y value") from None
    except OSError as exc:
        raise DomainError(f"{path}: cannot read: {exc.strerror}") from None
    y = np.array(vals, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError(f"{path}: non-finite y values")
    return y


def fmt(v: float) -> str:
    return "%.17g" % v


def write_atomic(path, text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: list[str], columns: list[np.ndarray], index_from: int = 1) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    cols = [np.asarray(c) for c in columns]
    for i in range(cols[0].shape[0] if cols else 0):
        buf.write(",".join([str(i + index_from)] + [fmt(c[i]) for c in cols]) + "\n")
    write_atomic(path, buf.getvalue())
