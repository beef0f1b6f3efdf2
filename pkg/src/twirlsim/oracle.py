"""Brute-force reference values from dense diagonalization.

Used as ground truth by tests and by the ``algebraic`` columns of the CLI.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadIndex, TooManyQubits
from .linalg import HermitianEigenDecomposition, hermitian_eig
from .pauli import MAX_QUBITS, PauliString, PauliSum, to_dense


@dataclass(frozen=True)
class SpectralOracle:
    hamiltonian: PauliSum
    decomposition: HermitianEigenDecomposition

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    def eigenvector(self, k: int) -> np.ndarray:
        self._check(k)
        return np.array(self.decomposition.vector(k))

    def expand(self, amps) -> np.ndarray:
        """Coefficients of a state in the eigenbasis."""
        return self.decomposition.eigenvectors.conj().T @ np.asarray(getattr(amps, "amplitudes", amps))

    def _check(self, k: int) -> None:
        if not 0 <= k < self.dim:
            raise BadIndex(f"eigenstate index {k} out of range 0..{self.dim - 1}")


def exact_eigenpairs(h: PauliSum) -> SpectralOracle:
    if h.n_qubits > MAX_QUBITS:
        raise TooManyQubits(f"{h.n_qubits} qubits > {MAX_QUBITS}")
    return SpectralOracle(h, hermitian_eig(to_dense(h)))


def exact_matrix_element(o: SpectralOracle, i: int, j: int, q: PauliString) -> complex:
    """``<E_j| q |E_i>``."""
    o._check(i)
    o._check(j)
    vi, vj = o.decomposition.vector(i), o.decomposition.vector(j)
    return complex(np.vdot(vj, q.to_dense() @ vi))


def exact_twirl_multipliers(o: SpectralOracle, tau: float, offset: float = 0.0) -> np.ndarray:
    """Per-eigenstate filter factors ``(1 + exp(-i tau (E_j - offset))) / 2``."""
    return 0.5 * (1.0 + np.exp(-1j * tau * (o.eigenvalues - offset)))


def real_part_combination(o: SpectralOracle, i: int, j: int, q: PauliString) -> float:
    """``<E_j|q|E_i> + <E_i|q|E_j>``, what the real-part circuit measures."""
    v = exact_matrix_element(o, i, j, q) + exact_matrix_element(o, j, i, q)
    return float(v.real)


def imag_part_combination(o: SpectralOracle, i: int, j: int, q: PauliString) -> float:
    """``-i<E_j|q|E_i> + i<E_i|q|E_j>``, what the imaginary-part circuit measures."""
    v = -1j * exact_matrix_element(o, i, j, q) + 1j * exact_matrix_element(o, j, i, q)
    return float(v.real)
