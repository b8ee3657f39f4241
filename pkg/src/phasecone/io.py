"""On-disk formats for fields and operators.

A payload is a pair of files sharing a stem: ``stem.json`` is the header and
``stem.bin`` (little-endian float64) or ``stem.csv`` holds the data as
interleaved (re, im) pairs, row-major in the first index. Headers record the
grid ``(L, M)`` for fields and the dimension ``N`` for operators.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .fock import DensityState, FockOperator, certify
from .phase import ComplexField, PhaseGrid
from .transforms import CharFunction, WignerField

FORMAT_VERSION = 1
_FIELD_TYPES = {"generic": ComplexField, "char": CharFunction, "wigner": WignerField}


def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".json", ".bin", ".csv") else path


def header_path(path) -> Path:
    return _stem(path).with_suffix(".json")


def _write_data(stem: Path, values: np.ndarray, fmt: str) -> Path:
    flat = np.empty(values.size * 2, dtype="<f8")
    flat[0::2] = values.real.ravel()
    flat[1::2] = values.imag.ravel()
    if fmt == "bin":
        target = stem.with_suffix(".bin")
        target.write_bytes(flat.tobytes())
    elif fmt == "csv":
        target = stem.with_suffix(".csv")
        pairs = flat.reshape(-1, 2)
        target.write_text("".join(f"{re:.17g},{im:.17g}\n" for re, im in pairs))
    else:
        raise ValueError(f"unknown data format {fmt!r}")
    return target


def _read_data(stem: Path, fmt: str, shape: tuple[int, int]) -> np.ndarray:
    if fmt == "bin":
        flat = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype="<f8")
    elif fmt == "csv":
        flat = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", dtype=float, ndmin=2).ravel()
    else:
        raise ValueError(f"unknown data format {fmt!r}")
    size = shape[0] * shape[1]
    if flat.size != 2 * size:
        raise ValueError(f"{stem}: expected {2 * size} floats, found {flat.size}")
    return (flat[0::2] + 1j * flat[1::2]).reshape(shape)


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def save_field(path, field: ComplexField, fmt: str = "bin") -> list[Path]:
    """Write ``field`` and return the emitted paths (header first)."""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "kind": "field",
        "version": FORMAT_VERSION,
        "side": field.side,
        "L": field.grid.half_extent,
        "M": field.grid.points,
        "format": fmt,
    }
    if isinstance(field, CharFunction):
        header["source_dim"] = field.source_dim
    data = _write_data(stem, field.values, fmt)
    return [write_json(stem.with_suffix(".json"), header), data]


def save_operator(path, op: FockOperator, fmt: str = "bin") -> list[Path]:
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "kind": "operator",
        "version": FORMAT_VERSION,
        "N": op.dim,
        "state": isinstance(op, DensityState),
        "format": fmt,
    }
    data = _write_data(stem, op.matrix, fmt)
    return [write_json(stem.with_suffix(".json"), header), data]


def read_header(path) -> dict:
    return json.loads(header_path(path).read_text())


def load_field(path) -> ComplexField:
    stem = _stem(path)
    h = read_header(stem)
    if h.get("kind") != "field":
        raise ValueError(f"{stem} does not hold a field")
    grid = PhaseGrid(float(h["L"]), int(h["M"]))
    values = _read_data(stem, h["format"], (grid.points, grid.points))
    cls = _FIELD_TYPES.get(h.get("side", "generic"), ComplexField)
    kwargs = {"source_dim": int(h.get("source_dim", 0))} if cls is CharFunction else {}
    return cls(grid, values, **kwargs)


def load_operator(path, as_state: bool | None = None) -> FockOperator:
    """Read an operator; density matrices are re-certified unless ``as_state=False``."""
    stem = _stem(path)
    h = read_header(stem)
    if h.get("kind") != "operator":
        raise ValueError(f"{stem} does not hold an operator")
    N = int(h["N"])
    m = _read_data(stem, h["format"], (N, N))
    if as_state is None:
        as_state = bool(h.get("state", False))
    return certify(m) if as_state else FockOperator(m)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
