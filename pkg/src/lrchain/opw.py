"""Operator Pauli walk for the transverse-field Ising chain.

Nested commutators of ``H' = -sum_k J'_k Z_k Z_{k+1} - sum_k X_k`` with
``Z_1`` stay inside the 2 N_q Pauli strings

    Z1, Y1, X1 Z2, X1 Y2, X1 X2 Z3, ..., X1 ... X_{N-1} Y_N

and the Heisenberg dynamics of ``Z_1`` reduces to the exponential of a
skew-symmetric tridiagonal "walk" matrix ``A`` whose super-diagonal
alternates ``1, J'_1, 1, J'_2, ..., 1``.  The correlation function is read
off the first row ``u(t)`` of ``exp(-2 pi (t/tau) A)``::

    C_k(t) = 2 sqrt( sum_{m >= 2k} u_m(t)^2 )      (1-based m, k)

Evaluating ``u`` at arbitrary time
----------------------------------
``A`` is similar (through ``diag(i^m)``) to ``i T`` with ``T`` the real
symmetric tridiagonal matrix carrying the same off-diagonal.  ``T`` has zero
diagonal, so it is bipartite: in the even/odd ordering it reads
``[[0, B], [B^T, 0]]`` with ``B`` the N_q x N_q lower bidiagonal matrix
(diagonal 1, sub-diagonal J'_k).  With ``B = P diag(s) Q^T`` and p = P[0]::

    u_{2i}   =  (-1)^i     sum_j P[i, j] p_j cos(theta s_j)
    u_{2i+1} = -(-1)^i     sum_j Q[i, j] p_j sin(theta s_j)

(0-based i, theta = 2 pi t/tau).  One SVD serves every time point and
nothing is stepped in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy import linalg

from lrchain._backend import kernels

__all__ = [
    "ChainSpec",
    "WalkMatrix",
    "CorrelationField",
    "build_walk_matrix",
    "pauli_string_labels",
    "correlation_row",
    "correlation_rows",
    "correlation_at",
    "correlation_field",
    "dense_correlation_row",
    "parse_sites",
]

TWO_PI = 2.0 * math.pi
DENSE_CHECK_MAX_DIM = 512


@dataclass(frozen=True)
class ChainSpec:
    """Open TFIM chain in units of the transverse field.

    Parameters
    ----------
    n_qubits : int
        Chain length N_q.
    couplings : sequence of float
        Bond couplings J'_k = J_k / gamma, k = 1..N_q-1.
    baseline : float, optional
        Nominal coupling J'_0 the bonds were drawn around (provenance only).
    """

    n_qubits: int
    couplings: tuple[float, ...]
    baseline: float | None = None

    def __post_init__(self):
        couplings = tuple(float(c) for c in np.asarray(self.couplings, dtype=float).ravel())
        object.__setattr__(self, "couplings", couplings)
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        object.__setattr__(self, "n_qubits", int(self.n_qubits))
        if len(couplings) != self.n_qubits - 1:
            raise ValueError(
                f"expected {self.n_qubits - 1} couplings for {self.n_qubits} qubits, got {len(couplings)}"
            )
        arr = np.asarray(couplings)
        if not np.all(np.isfinite(arr)):
            raise ValueError("couplings must be finite")
        if np.any(arr < 0):
            raise ValueError("couplings must be non-negative")

    @classmethod
    def homogeneous(cls, n_qubits: int, coupling: float) -> "ChainSpec":
        return cls(n_qubits, (float(coupling),) * (n_qubits - 1), baseline=float(coupling))

    @property
    def coupling_array(self) -> np.ndarray:
        return np.asarray(self.couplings, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "couplings": list(self.couplings), "baseline": self.baseline}


@dataclass(frozen=True, eq=False)
class WalkMatrix:
    """Skew-symmetric tridiagonal generator of the operator walk.

    ``offdiag`` holds ``A[m, m+1]`` (= ``-A[m+1, m]``).  The spectral data
    ``left``, ``singular_values``, ``right`` is the SVD of the bidiagonal
    half-block described in the module docstring.
    """

    spec: ChainSpec
    offdiag: np.ndarray
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.spec.n_qubits

    @property
    def n_qubits(self) -> int:
        return self.spec.n_qubits

    def dense(self) -> np.ndarray:
        """Materialize ``A``; only for checks on small chains."""
        return np.diag(self.offdiag, 1) - np.diag(self.offdiag, -1)


@dataclass
class CorrelationField:
    """A quantity sampled on a (site, time) grid; ``values[i, j]`` at ``sites[i]``, ``times[j]``.

    ``sites`` are 1-based.  ``quantity`` names the CSV value column
    (``C``, ``C_bar``, ``P``, ``P_R``, ...).
    """

    sites: np.ndarray
    times: np.ndarray
    values: np.ndarray
    quantity: str = "C"
    ensemble_size: int = 1
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.sites.size, self.times.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.sites.size} sites, {self.times.size} times)"
            )

    def column(self, t_over_tau: float) -> np.ndarray:
        """Profile over ``sites`` at one sampled time."""
        return self.values[:, self._time_index(t_over_tau)]

    def at_time(self, t_over_tau: float) -> "CorrelationField":
        j = self._time_index(t_over_tau)
        return CorrelationField(
            self.sites.copy(),
            self.times[j : j + 1].copy(),
            self.values[:, j : j + 1].copy(),
            quantity=self.quantity,
            ensemble_size=self.ensemble_size,
            metadata=dict(self.metadata),
        )

    def _time_index(self, t_over_tau: float) -> int:
        hits = np.nonzero(np.isclose(self.times, t_over_tau, rtol=1e-12, atol=1e-12))[0]
        if hits.size == 0:
            raise KeyError(f"time {t_over_tau} not on the grid")
        return int(hits[0])


def build_walk_matrix(spec: ChainSpec) -> WalkMatrix:
    n = spec.n_qubits
    couplings = spec.coupling_array
    offdiag = np.ones(2 * n - 1)
    offdiag[1::2] = couplings
    left, s, right = kernels.bidiagonal_svd(np.ones(n), np.ascontiguousarray(couplings))
    return WalkMatrix(
        spec=spec,
        offdiag=offdiag,
        left=np.ascontiguousarray(left),
        singular_values=np.asarray(s),
        right=np.ascontiguousarray(right),
    )


def pauli_string_labels(spec: ChainSpec | int) -> list[str]:
    """Node labels of the walk, in walk order (``X1X2Z3`` style, identities dropped)."""
    n = spec if isinstance(spec, int) else spec.n_qubits
    labels = []
    for k in range(1, n + 1):
        prefix = "".join(f"X{j}" for j in range(1, k))
        labels.append(f"{prefix}Z{k}")
        labels.append(f"{prefix}Y{k}")
    return labels


def _check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if times.ndim != 1:
        raise ValueError("times must be a scalar or 1-D")
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    return times


def correlation_rows(walk: WalkMatrix, times) -> np.ndarray:
    """First row of ``exp(-2 pi t A)`` for each time; shape ``(2 N_q, len(times))``."""
    times = _check_times(times)
    theta = TWO_PI * times
    p0 = walk.left[0]
    phase = np.outer(walk.singular_values, theta)
    n = walk.n_qubits
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)[:, None]
    rows = np.empty((2 * n, times.size))
    rows[0::2] = sign * (walk.left @ (p0[:, None] * np.cos(phase)))
    rows[1::2] = -sign * (walk.right @ (p0[:, None] * np.sin(phase)))
    return rows


def correlation_row(walk: WalkMatrix, t_over_tau: float) -> np.ndarray:
    if np.ndim(t_over_tau) != 0:
        raise ValueError("correlation_row takes a single time; use correlation_rows")
    return correlation_rows(walk, [t_over_tau])[:, 0]


def _site_index(sites, n_qubits: int) -> np.ndarray:
    if sites is None:
        return np.arange(1, n_qubits + 1)
    sites = np.atleast_1d(np.asarray(sites))
    if sites.size and (not np.issubdtype(sites.dtype, np.integer)):
        if not np.all(sites == np.round(sites)):
            raise ValueError("site indices must be integers")
        sites = sites.astype(np.int64)
    if sites.size == 0:
        raise ValueError("empty site list")
    if sites.min() < 1 or sites.max() > n_qubits:
        raise ValueError(f"site indices must lie in 1..{n_qubits}")
    return sites.astype(np.int64)


def correlation_field(walk: WalkMatrix, times, sites=None) -> CorrelationField:
    """``C_k(t)`` for every requested site and time, each time evaluated independently."""
    times = _check_times(times)
    sites = _site_index(sites, walk.n_qubits)
    rows = correlation_rows(walk, times)
    full = kernels.tail_correlations(rows)
    return CorrelationField(
        sites=sites,
        times=times,
        values=np.minimum(full[sites - 1], 2.0),
        quantity="C",
        metadata={"chain": walk.spec.to_dict()},
    )


def correlation_at(walk: WalkMatrix, t_over_tau: float, sites=None) -> np.ndarray:
    """``C_k`` at a single time for the given 1-based sites."""
    if np.ndim(t_over_tau) != 0:
        raise ValueError("correlation_at takes a single time")
    return correlation_field(walk, [t_over_tau], sites).values[:, 0]


def dense_correlation_row(walk: WalkMatrix, t_over_tau: float) -> np.ndarray:
    """Row 1 of ``exp(-2 pi t A)`` by dense scaling-and-squaring (cross-check path)."""
    if walk.dim > DENSE_CHECK_MAX_DIM:
        raise ValueError(f"dense cross-check limited to dim <= {DENSE_CHECK_MAX_DIM}")
    if not math.isfinite(t_over_tau):
        raise ValueError("time must be finite")
    return linalg.expm(-TWO_PI * t_over_tau * walk.dense())[0]


def parse_sites(text: str | Iterable[int] | None, n_max: int | None = None) -> np.ndarray | None:
    """Parse ``"1..600"``, ``"1,5,9"`` or ``"1..50,100"`` into 1-based sites."""
    if text is None:
        return None
    if not isinstance(text, str):
        return np.asarray(list(text), dtype=np.int64)
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i = int(lo) if lo else 1
            if hi:
                hi_i = int(hi)
            elif n_max is not None:
                hi_i = n_max
            else:
                raise ValueError(f"open range {part!r} needs a chain length")
            if hi_i < lo_i:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("empty site specification")
    return np.asarray(out, dtype=np.int64)
