"""Brute-force reference for ``C_k(t) = ||[Z_1(t), Z_k]||`` on short chains.

Basis convention: site 1 is the leftmost Kronecker factor, i.e. the most
significant bit of the computational-basis index, and ``|0>`` is the
``Z = +1`` state.  ``Z_1(t) = U^dagger Z_1 U`` with
``U = exp(-i pi (t/tau) H')``.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
from scipy import linalg

from lrchain.opw import ChainSpec

MAX_QUBITS = 12

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1j], [1j, 0.0]])
Z = np.diag([1.0, -1.0])
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"exact oracle is capped at {MAX_QUBITS} qubits, got {n_qubits}")


def site_operator(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """``op`` acting on 1-based ``site`` of an ``n_qubits`` register."""
    if not 1 <= site <= n_qubits:
        raise ValueError(f"site {site} outside 1..{n_qubits}")
    factors = [I2] * n_qubits
    factors[site - 1] = op
    return reduce(np.kron, factors)


def pauli_string(label: str, n_qubits: int) -> np.ndarray:
    """Dense matrix of a label like ``"X1X2Y3"`` (unlisted sites are identity)."""
    factors = [I2] * n_qubits
    i = 0
    while i < len(label):
        letter = label[i]
        j = i + 1
        while j < len(label) and label[j].isdigit():
            j += 1
        site = int(label[i + 1 : j])
        if letter not in "XYZ" or not 1 <= site <= n_qubits:
            raise ValueError(f"bad Pauli label {label!r}")
        factors[site - 1] = PAULI[letter]
        i = j
    return reduce(np.kron, factors).astype(complex)


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense dimensionless ``H' = -sum J'_k Z_k Z_{k+1} - sum X_k`` (real symmetric)."""
    n = spec.n_qubits
    _check_size(n)
    dim = 2**n
    # ZZ terms are diagonal: z_k = +1 for bit 0, -1 for bit 1 (site 1 = MSB)
    idx = np.arange(dim)
    z = 1.0 - 2.0 * ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1)
    H = np.zeros((dim, dim))
    if n > 1:
        diag = -(z[:, :-1] * z[:, 1:]) @ spec.coupling_array
        H[idx, idx] = diag
    for k in range(n):
        flipped = idx ^ (1 << (n - 1 - k))
        H[idx, flipped] -= 1.0
    return H


class ExactOracle:
    """Eigendecomposition of ``H'`` reused for every time and site."""

    def __init__(self, spec: ChainSpec):
        _check_size(spec.n_qubits)
        self.spec = spec
        self.n_qubits = spec.n_qubits
        self.hamiltonian = build_hamiltonian(spec)
        self.energies, self.vectors = linalg.eigh(self.hamiltonian)
        z1 = np.repeat([1.0, -1.0], 2 ** (self.n_qubits - 1))
        # Z_1 in the energy eigenbasis; real because H' is real symmetric
        self._z1_eig = self.vectors.T @ (z1[:, None] * self.vectors)

    def propagator(self, t_over_tau: float) -> np.ndarray:
        phase = np.exp(-1j * math.pi * t_over_tau * self.energies)
        return (self.vectors * phase) @ self.vectors.T

    def heisenberg_z1(self, t_over_tau: float) -> np.ndarray:
        if not math.isfinite(t_over_tau):
            raise ValueError("time must be finite")
        phase = np.exp(1j * math.pi * t_over_tau * self.energies)
        # <a|U^dag Z1 U|b> in the eigenbasis picks up exp(i pi t (E_a - E_b))
        inner = self._z1_eig * np.outer(phase, phase.conj())
        return self.vectors @ inner @ self.vectors.T

    def correlation(self, t_over_tau: float, k: int, method: str = "gram") -> float:
        return float(self.correlations(t_over_tau, [k], method=method)[0])

    def correlations(self, t_over_tau: float, sites=None, method: str = "gram") -> np.ndarray:
        """Spectral norm ``||[Z_1(t), Z_k]||`` for each 1-based site.

        ``Z_k`` is diagonal with +-1 blocks, so the commutator only couples
        the two blocks and its norm is twice the largest singular value of
        the off-diagonal block ``B`` of ``Z_1(t)``.

        ``method="gram"`` takes that singular value from the top eigenvalue
        of ``B B^dagger``; ``"svd"`` runs a dense SVD of ``B``; ``"eig"``
        takes the largest ``|eigenvalue|`` of the full anti-Hermitian
        commutator.  All three agree to rounding.
        """
        n = self.n_qubits
        sites = range(1, n + 1) if sites is None else sites
        a = self.heisenberg_z1(t_over_tau)
        out = []
        for k in sites:
            if not 1 <= k <= n:
                raise ValueError(f"site {k} outside 1..{n}")
            if method in ("gram", "svd"):
                left, right = 2 ** (k - 1), 2 ** (n - k)
                block = a.reshape(left, 2, right, left, 2, right)[:, 0, :, :, 1, :]
                block = block.reshape(left * right, left * right)
                if method == "svd":
                    out.append(2.0 * linalg.svdvals(block, check_finite=False)[0])
                else:
                    gram = block @ block.conj().T
                    top = linalg.eigvalsh(
                        gram, subset_by_index=[gram.shape[0] - 1] * 2, driver="evx", check_finite=False
                    )[0]
                    out.append(2.0 * math.sqrt(max(top, 0.0)))
            elif method == "eig":
                zk = np.diag(site_operator(Z, k, n))
                comm = a * (zk[None, :] - zk[:, None])
                w = linalg.eigvalsh(1j * comm, check_finite=False)
                out.append(np.abs(w).max())
            else:
                raise ValueError(f"unknown method {method!r}")
        return np.asarray(out)


def heisenberg_z1(spec: ChainSpec, t_over_tau: float) -> np.ndarray:
    return ExactOracle(spec).heisenberg_z1(t_over_tau)


def exact_correlation(spec: ChainSpec, t_over_tau: float, k: int) -> float:
    return ExactOracle(spec).correlation(t_over_tau, k)


def exact_field(spec: ChainSpec, times, sites=None) -> np.ndarray:
    """``C[k, t]`` over a grid; rows follow ``sites`` (default all)."""
    oracle = ExactOracle(spec)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    cols = [oracle.correlations(t, sites) for t in times]
    return np.stack(cols, axis=1)
