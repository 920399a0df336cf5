"""CSV fields, JSON manifests and run configuration."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from lrchain.opw import CorrelationField

EXPERIMENTS = ("tfim", "tb", "ensemble", "analyze", "oracle-check", "labels")
ANALYSES = ("lightcone", "stationarity", "kthresh", "hss")
FLOAT_FORMAT = "%.17g"


@dataclass
class RunConfig:
    """Every input of a run.  Times are in units of tau; sites are 1-based."""

    experiment: str
    n_qubits: int | None = None
    n_sites: int | None = None
    coupling: float | None = None
    couplings: list[float] | None = None
    hopping: float | None = None
    model: str = "tfim"
    center: float | None = None
    width: float | None = None
    configs: int | None = None
    seed: int = 0
    times: list[float] | None = None
    time_grid: dict[str, float] | None = None
    sites: str | None = None
    out: str = "."
    prefix: str | None = None
    analysis: str | None = None
    input: str | None = None
    levels: list[float] | None = None
    window: list[float] | None = None
    fit_level: float | None = None
    time: float | None = None
    time_a: float | None = None
    time_b: float | None = None
    tol: float = 0.01
    min_site: int = 1
    threshold: float = 0.2
    trials: int = 50
    max_time: float = 20.0
    max_coupling: float = 2.0
    threads: int | None = None
    progress: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.model not in ("tfim", "tb"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.analysis is not None and self.analysis not in ANALYSES:
            raise ValueError(f"unknown analysis {self.analysis!r}; expected one of {ANALYSES}")
        if self.times is not None and self.time_grid is not None:
            raise ValueError("give either explicit times or a time grid, not both")
        if self.times is not None:
            self.times = [float(t) for t in self.times]
            if not self.times:
                raise ValueError("empty time list")
            if not all(math.isfinite(t) for t in self.times):
                raise ValueError("times must be finite")
        if self.time_grid is not None:
            grid = {k: self.time_grid[k] for k in ("start", "stop", "count")}
            if int(grid["count"]) < 1:
                raise ValueError("time grid needs count >= 1")
            if not (math.isfinite(grid["start"]) and math.isfinite(grid["stop"])):
                raise ValueError("time grid bounds must be finite")
            self.time_grid = {"start": float(grid["start"]), "stop": float(grid["stop"]), "count": int(grid["count"])}

    def time_array(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=np.float64)
        if self.time_grid is not None:
            g = self.time_grid
            return np.linspace(g["start"], g["stop"], int(g["count"]))
        raise ValueError("no times given (use --times or --tgrid)")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        if isinstance(data.get("config"), dict):
            data = data["config"]  # a manifest
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def parse_float_list(text: str | None) -> list[float] | None:
    if text is None:
        return None
    out = [float(x) for x in str(text).split(",") if x.strip()]
    if not out:
        raise ValueError(f"empty list {text!r}")
    return out


def parse_time_grid(text: str | None) -> dict[str, float] | None:
    """``"start:stop:count"`` (inclusive) into a grid dict."""
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"time grid must be start:stop:count, got {text!r}")
    return {"start": float(parts[0]), "stop": float(parts[1]), "count": int(parts[2])}


def write_fields(path: str | Path, *cfs: CorrelationField) -> Path:
    """Long-format CSV: ``site, t_over_tau, <quantity>...``; fields must share a grid."""
    if not cfs:
        raise ValueError("nothing to write")
    base = cfs[0]
    for cf in cfs[1:]:
        if not (np.array_equal(cf.sites, base.sites) and np.array_equal(cf.times, base.times)):
            raise ValueError("fields written together must share sites and times")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site", "t_over_tau", *[cf.quantity for cf in cfs]])
        for j, t in enumerate(base.times):
            for i, k in enumerate(base.sites):
                writer.writerow([int(k), FLOAT_FORMAT % t, *[FLOAT_FORMAT % cf.values[i, j] for cf in cfs]])
    return path


def read_fields(path: str | Path) -> dict[str, CorrelationField]:
    """Inverse of :func:`write_fields`; returns one field per value column."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["site", "t_over_tau"] or len(header) < 3:
            raise ValueError(f"{path}: expected header site,t_over_tau,<quantity>...")
        rows = [r for r in reader if r]
    data = np.array([[float(x) for x in r] for r in rows]) if rows else np.empty((0, len(header)))
    sites = np.unique(data[:, 0].astype(np.int64))
    times = np.unique(data[:, 1])
    si = np.searchsorted(sites, data[:, 0].astype(np.int64))
    ti = np.searchsorted(times, data[:, 1])
    out = {}
    for c, name in enumerate(header[2:], start=2):
        values = np.full((sites.size, times.size), np.nan)
        values[si, ti] = data[:, c]
        if np.isnan(values).any():
            raise ValueError(f"{path}: column {name} does not cover a full (site, time) grid")
        out[name] = CorrelationField(sites, times, values, quantity=name)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")
    return path


def load_config(path: str | Path) -> dict[str, Any]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    if isinstance(data.get("config"), dict):
        data = data["config"]
    return data


@dataclass
class Manifest:
    config: dict[str, Any]
    outputs: list[str]
    wall_clock_s: float
    started_utc: str
    version: str
    backend: str
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        cfg = self.config
        return {
            "lrchain_version": self.version,
            "backend": self.backend,
            "experiment": cfg.get("experiment"),
            "started_utc": self.started_utc,
            "wall_clock_s": self.wall_clock_s,
            "base_seed": cfg.get("seed"),
            "n_configs": cfg.get("configs"),
            "outputs": self.outputs,
            "config": cfg,
            **self.extra,
        }
