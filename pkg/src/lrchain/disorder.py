"""Uniform bond disorder and deterministic configuration averages.

Each configuration draws its bonds from its own PCG64 stream seeded with
``SeedSequence(base_seed, spawn_key=(config_index,))``, so any configuration
can be regenerated alone and configurations may be evaluated in any order or
in parallel.  Averages are always reduced in ascending ``config_index``;
above ``PAIRWISE_THRESHOLD`` configurations the reduction is a fixed binary
tree instead of a running sum.  Reordering the configuration set changes
results only at the ~1e-13 rounding level.
"""

from __future__ import annotations

import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from lrchain.opw import ChainSpec, CorrelationField, _check_times, _site_index, build_walk_matrix, correlation_field
from lrchain.tight_binding import TbChainSpec, TbPropagator

PAIRWISE_THRESHOLD = 1000
MAX_SEED = 2**64 - 1


class ConfigurationError(RuntimeError):
    """A single disorder configuration failed; the ensemble is aborted."""

    def __init__(self, config_index: int, cause: BaseException):
        super().__init__(f"disorder configuration {config_index} failed: {cause!r}")
        self.config_index = config_index
        self.cause = cause


@dataclass(frozen=True)
class DisorderModel:
    """Bonds uniform on ``[center - width/2, center + width/2)``."""

    center: float
    width: float
    n_configs: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.center) and np.isfinite(self.width)):
            raise ValueError("center and width must be finite")
        if self.center < 0:
            raise ValueError("center must be non-negative")
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if self.width > 2 * self.center * (1 + 1e-12):
            raise ValueError(f"width {self.width} > 2 * center {self.center} would allow negative bonds")
        if int(self.n_configs) != self.n_configs or self.n_configs < 1:
            raise ValueError("n_configs must be a positive integer")
        if int(self.base_seed) != self.base_seed or not 0 <= self.base_seed <= MAX_SEED:
            raise ValueError("base_seed must be an integer in [0, 2**64)")
        object.__setattr__(self, "n_configs", int(self.n_configs))
        object.__setattr__(self, "base_seed", int(self.base_seed))

    def to_dict(self) -> dict:
        return asdict(self)


def configuration_rng(base_seed: int, config_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(base_seed, spawn_key=(config_index,))))


def sample_configuration(model: DisorderModel, config_index: int, n_bonds: int) -> np.ndarray:
    if not 0 <= config_index < model.n_configs:
        raise IndexError(f"config_index {config_index} outside 0..{model.n_configs - 1}")
    u = configuration_rng(model.base_seed, config_index).random(n_bonds)
    values = model.center + model.width * (u - 0.5)
    # rounding at u = 0 with width = 2 * center can land a hair below zero
    return np.maximum(values, 0.0)


def _worker_count(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("LRCHAIN_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


class _TreeSum:
    """Binary-counter pairwise summation with deterministic shape."""

    def __init__(self):
        self._stack: list[tuple[int, np.ndarray]] = []

    def add(self, x: np.ndarray) -> None:
        level, acc = 0, x
        while self._stack and self._stack[-1][0] == level:
            _, prev = self._stack.pop()
            acc = prev + acc
            level += 1
        self._stack.append((level, acc))

    def total(self) -> np.ndarray:
        acc = None
        for _, part in reversed(self._stack):
            acc = part if acc is None else part + acc
        return acc


def _reduce_mean(
    evaluate: Callable[[int], np.ndarray],
    indices: Sequence[int],
    threads: int | None,
    progress: bool,
) -> np.ndarray:
    indices = list(indices)
    if not indices:
        raise ValueError("no configurations to average")
    pairwise = len(indices) > PAIRWISE_THRESHOLD
    tree = _TreeSum() if pairwise else None
    running = None
    workers = _worker_count(threads)
    started = time.monotonic()

    def guarded(i: int) -> np.ndarray:
        try:
            return evaluate(i)
        except Exception as exc:  # noqa: BLE001
            raise ConfigurationError(i, exc) from exc

    def consume(n_done: int, value: np.ndarray) -> None:
        nonlocal running
        if tree is not None:
            tree.add(value)
        else:
            running = value.copy() if running is None else running + value
        if progress and (n_done % max(1, len(indices) // 20) == 0 or n_done == len(indices)):
            print(
                f"[lrchain] {n_done}/{len(indices)} configurations ({time.monotonic() - started:.1f}s)",
                file=sys.stderr,
                flush=True,
            )

    if workers == 1:
        for n_done, i in enumerate(indices, 1):
            consume(n_done, guarded(i))
    else:
        window = 4 * workers
        n_done = 0
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for start in range(0, len(indices), window):
                # map yields in submission order, so the reduction order is fixed
                for value in pool.map(guarded, indices[start : start + window]):
                    n_done += 1
                    consume(n_done, value)

    total = tree.total() if tree is not None else running
    return total / len(indices)


def _indices(model: DisorderModel, config_indices: Iterable[int] | None) -> list[int]:
    if config_indices is None:
        return list(range(model.n_configs))
    out = [int(i) for i in config_indices]
    for i in out:
        if not 0 <= i < model.n_configs:
            raise IndexError(f"config_index {i} outside 0..{model.n_configs - 1}")
    return out


def ensemble_average(
    model: DisorderModel,
    n_qubits: int,
    times,
    sites=None,
    *,
    config_indices: Iterable[int] | None = None,
    threads: int | None = None,
    progress: bool = False,
) -> CorrelationField:
    """Configuration-averaged ``C_k(t)``; each configuration covers the whole time grid."""
    times = _check_times(times)
    sites = _site_index(sites, n_qubits)
    indices = _indices(model, config_indices)

    def evaluate(i: int) -> np.ndarray:
        spec = ChainSpec(n_qubits, sample_configuration(model, i, n_qubits - 1), baseline=model.center)
        return correlation_field(build_walk_matrix(spec), times, sites).values

    mean = _reduce_mean(evaluate, indices, threads, progress)
    return CorrelationField(
        sites,
        times,
        mean,
        quantity="C_bar",
        ensemble_size=len(indices),
        metadata={
            "model": "tfim",
            "n_qubits": int(n_qubits),
            "disorder": model.to_dict(),
            "config_indices": _describe_indices(indices),
        },
    )


def tb_ensemble_average(
    model: DisorderModel,
    n_sites: int,
    times,
    sites=None,
    *,
    config_indices: Iterable[int] | None = None,
    threads: int | None = None,
    progress: bool = False,
) -> tuple[CorrelationField, CorrelationField]:
    """Configuration-averaged ``P`` and ``P_R`` for the hopping-disordered chain."""
    times = _check_times(times)
    sites = _site_index(sites, n_sites)
    indices = _indices(model, config_indices)

    def evaluate(i: int) -> np.ndarray:
        spec = TbChainSpec(n_sites, sample_configuration(model, i, n_sites - 1))
        prob, right = TbPropagator(spec).probabilities(times)
        return np.stack([prob[sites - 1], right[sites - 1]])

    mean = _reduce_mean(evaluate, indices, threads, progress)
    meta = {
        "model": "tb",
        "n_sites": int(n_sites),
        "disorder": model.to_dict(),
        "config_indices": _describe_indices(indices),
    }
    return (
        CorrelationField(sites, times, mean[0], quantity="P_bar", ensemble_size=len(indices), metadata=dict(meta)),
        CorrelationField(sites, times, mean[1], quantity="P_R_bar", ensemble_size=len(indices), metadata=dict(meta)),
    )


def _describe_indices(indices: Sequence[int]) -> dict | list[int]:
    if list(indices) == list(range(indices[0], indices[0] + len(indices))):
        return {"start": int(indices[0]), "stop": int(indices[0] + len(indices))}
    return [int(i) for i in indices]
