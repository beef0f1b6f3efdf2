"""Dense complex linear algebra for registers of at most four qubits.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
Matrices are small (at most 16x16), so no sparse or blocked algorithms are
used anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import NotHermitian, SingularInput

HERMITIAN_TOL = 1e-10
SINGULAR_TOL = 1e-8
# Components whose magnitude is within this of the maximum count as tied
# when fixing the phase of a vector; the lowest index wins.
PHASE_TIE_TOL = 1e-2


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class PolarResult:
    unitary_factor: np.ndarray
    hermitian_factor: np.ndarray
    deviation_norm: float

    def __post_init__(self):
        object.__setattr__(self, "unitary_factor", _frozen(self.unitary_factor))
        object.__setattr__(self, "hermitian_factor", _frozen(self.hermitian_factor))


def kron(*factors) -> np.ndarray:
    """Tensor product; the first factor acts on qubit 0 (most significant)."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(a)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_unitary(a, tol: float = 1e-10) -> bool:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def fix_phase(vec, tie_tol: float = PHASE_TIE_TOL) -> np.ndarray:
    """Rotate ``vec`` so its largest-magnitude component is real and positive.

    Components within ``tie_tol`` of the maximum magnitude are treated as
    tied and the lowest index is used, which keeps the choice stable when
    two entries are equal up to noise (e.g. Bell-like eigenvectors).
    """
    v = np.asarray(vec, dtype=complex)
    mags = np.abs(v)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return v.copy()
    k = int(np.flatnonzero(mags >= top - tie_tol)[0])
    return v * (np.conj(v[k]) / mags[k])


def hermitian_eig(a) -> HermitianEigenDecomposition:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix of shape {m.shape} is not square")
    if not is_hermitian(m):
        err = float(np.max(np.abs(m - m.conj().T)))
        raise NotHermitian(f"asymmetry {err:.3e} exceeds {HERMITIAN_TOL:.0e}")
    herm = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(herm)
    v = np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])])
    return HermitianEigenDecomposition(w, v)


def unitary_exp(h, tau: float) -> np.ndarray:
    """Return ``exp(-i * tau * h)`` for Hermitian ``h``."""
    dec = hermitian_eig(h)
    v = dec.eigenvectors
    return (v * np.exp(-1j * tau * dec.eigenvalues)) @ v.conj().T


def polar_unitarize(m) -> PolarResult:
    """Nearest unitary (Frobenius norm) to a square nonsingular matrix.

    With the SVD ``m = W S V^H`` the unitary factor is ``W V^H`` and the
    positive factor ``V S V^H``, so that ``m = U P``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise SingularInput(f"polar decomposition needs a square matrix, got {a.shape}")
    w, s, vh = np.linalg.svd(a)
    if s[-1] <= SINGULAR_TOL:
        raise SingularInput(f"smallest singular value {s[-1]:.3e} <= {SINGULAR_TOL:.0e}")
    u = w @ vh
    p = (vh.conj().T * s) @ vh
    p = 0.5 * (p + p.conj().T)
    return PolarResult(u, p, float(np.linalg.norm(a - u)))
