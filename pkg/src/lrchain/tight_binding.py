"""Single particle on an open tight-binding chain with random hopping.

``H = -sum_k gamma_k (|k+1><k| + |k><k+1|)`` with zero on-site energies.
Hoppings are stored relative to ``gamma_0`` and time is in units of
``tau = pi hbar / gamma_0``, so ``H t / hbar = pi (t/tau) H / gamma_0``.
The particle starts on site 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lrchain._backend import kernels
from lrchain.opw import CorrelationField, _check_times, _site_index


@dataclass(frozen=True)
class TbChainSpec:
    """Hopping chain: ``hoppings[k-1] = gamma_k / gamma_0`` for bond (k, k+1)."""

    n_sites: int
    hoppings: tuple[float, ...]
    baseline: float = 1.0

    def __post_init__(self):
        hoppings = tuple(float(h) for h in np.asarray(self.hoppings, dtype=float).ravel())
        object.__setattr__(self, "hoppings", hoppings)
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if len(hoppings) != self.n_sites - 1:
            raise ValueError(f"expected {self.n_sites - 1} hoppings, got {len(hoppings)}")
        arr = np.asarray(hoppings)
        if not np.all(np.isfinite(arr)):
            raise ValueError("hoppings must be finite")
        # zero only severs a bond; the widest disorder distribution reaches it
        if np.any(arr < 0):
            raise ValueError("hoppings must be non-negative")

    @classmethod
    def uniform(cls, n_sites: int, hopping: float = 1.0) -> "TbChainSpec":
        return cls(n_sites, (float(hopping),) * (n_sites - 1))

    def to_dict(self) -> dict:
        return {"n_sites": self.n_sites, "hoppings": list(self.hoppings), "baseline": self.baseline}


@dataclass
class TbState:
    amplitudes: np.ndarray
    time: float

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


class TbPropagator:
    """One eigendecomposition of the hopping matrix, evaluated at any time."""

    def __init__(self, spec: TbChainSpec):
        self.spec = spec
        hop = -np.asarray(spec.hoppings, dtype=np.float64)
        self.energies, self.vectors = kernels.tridiagonal_eigh(np.zeros(spec.n_sites), np.ascontiguousarray(hop))
        self.vectors = np.ascontiguousarray(self.vectors)
        self._overlap = self.vectors[0].copy()

    def amplitudes(self, times) -> np.ndarray:
        """``Psi[k, j]`` for each time ``times[j]``."""
        times = _check_times(times)
        phase = np.exp(-1j * math.pi * np.outer(self.energies, times))
        return self.vectors @ (self._overlap[:, None] * phase)

    def probabilities(self, times) -> tuple[np.ndarray, np.ndarray]:
        psi = self.amplitudes(times)
        prob = np.ascontiguousarray(psi.real**2 + psi.imag**2)
        return prob, kernels.tail_probabilities(prob)


def tb_evolve(spec: TbChainSpec, t_over_tau: float) -> TbState:
    if not math.isfinite(t_over_tau):
        raise ValueError("time must be finite")
    psi = TbPropagator(spec).amplitudes([t_over_tau])[:, 0]
    return TbState(psi, float(t_over_tau))


def tb_probabilities(state: TbState) -> tuple[np.ndarray, np.ndarray]:
    """``P(k) = |Psi(k)|^2`` and ``P_R(k) = sum_{k' > k} P(k')``."""
    prob = np.abs(state.amplitudes) ** 2
    return prob, kernels.tail_probabilities(prob[:, None])[:, 0]


def tb_fields(spec: TbChainSpec, times, sites=None) -> tuple[CorrelationField, CorrelationField]:
    """``P`` and ``P_R`` fields on a (site, time) grid."""
    times = _check_times(times)
    sites = _site_index(sites, spec.n_sites)
    prob, right = TbPropagator(spec).probabilities(times)
    meta = {"chain": spec.to_dict()}
    return (
        CorrelationField(sites, times, prob[sites - 1], quantity="P", metadata=dict(meta)),
        CorrelationField(sites, times, right[sites - 1], quantity="P_R", metadata=dict(meta)),
    )
