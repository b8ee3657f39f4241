"""Run configuration and experiment records for the command-line tools."""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import GridTooCoarse
from .io import sha256_file, write_json
from .phase import PhaseGrid
from .semigroups import TwirlingQuadrature

ENV_VAR = "PHASECONE_CONFIG"
MANIFEST = "manifest.json"


@dataclass(frozen=True)
class RunConfig:
    """Flat settings shared by every CLI verb; keys mirror the long flags."""

    fock_dim: int = 64
    half_extent: float = 10.0
    points: int = 128
    psd_tol: float = 1e-9
    psd_tol_field: float = 1e-6
    quad_scheme: str = "gauss_hermite"
    quad_order: int = 20
    quad_samples: int = 100_000
    seed: int = 0
    outdir: str = "."
    threads: int = 0

    def __post_init__(self):
        need = math.ceil(2 * self.half_extent**2 / math.pi)
        if self.points < need:
            raise GridTooCoarse(f"points = {self.points} violates M >= 2 L^2 / pi = {need} for L = {self.half_extent:g}")
        PhaseGrid(self.half_extent, self.points)
        self.quadrature()

    @property
    def grid(self) -> PhaseGrid:
        return PhaseGrid(self.half_extent, self.points)

    def quadrature(self) -> TwirlingQuadrature:
        return TwirlingQuadrature(self.quad_scheme, self.quad_order, self.quad_samples, self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        unknown = set(data) - set(cls.keys())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> RunConfig:
        """Defaults, then the JSON file (``path`` or ``$PHASECONE_CONFIG``), then ``overrides``."""
        data: dict = {}
        path = path or os.environ.get(ENV_VAR)
        if path:
            data.update(json.loads(Path(path).read_text()))
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    def with_overrides(self, **kw) -> RunConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass
class ExperimentRecord:
    """What a command did: settings, timing, emitted files with hashes and the verdicts."""

    command: str
    config: dict
    started: float = field(default_factory=time.time)
    wall_time: float = 0.0
    files: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def add(self, *paths) -> None:
        for p in paths:
            self.files[str(Path(p).resolve())] = sha256_file(p)

    def finish(self, outdir) -> Path:
        """Stamp the wall time and append this record to ``outdir/manifest.json``."""
        self.wall_time = time.time() - self.started
        # paths are stored relative to the manifest so the directory can move
        self.files = {os.path.relpath(p, Path(outdir).resolve()): h for p, h in self.files.items()}
        target = Path(outdir) / MANIFEST
        runs = json.loads(target.read_text())["runs"] if target.exists() else []
        runs.append(asdict(self))
        return write_json(target, {"runs": runs})


def check_manifest(outdir) -> list[tuple[str, str]]:
    """Return ``(path, problem)`` pairs; empty when every latest hash still matches."""
    target = Path(outdir) / MANIFEST
    if not target.exists():
        return [(str(target), "missing manifest")]
    latest: dict[str, str] = {}
    for run in json.loads(target.read_text())["runs"]:
        latest.update(run["files"])
    problems = []
    for path, digest in latest.items():
        full = Path(outdir) / path
        if not full.exists():
            problems.append((path, "missing"))
        elif sha256_file(full) != digest:
            problems.append((path, "hash mismatch"))
    return problems
