"""Eigenvector reconstruction from Pauli expectations and excitation unitaries.

Both model Hamiltonians are real symmetric, so their eigenvectors can be
taken real.  Reconstruction fits a real unit vector ``v`` to measured
values ``m_k`` of Pauli strings ``Q_k`` by minimizing
``sum_k (v^T Q_k v - m_k)^2``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    DimensionMismatch,
    MissingStates,
    NotOrthogonal,
    RankDeficient,
)
from .linalg import fix_phase, polar_unitarize
from .pauli import PauliString, PauliSum, exact_expectation
from .statevector import StateVector, apply_unitary

VALUE_SLACK = 0.01
TIE_TOL = 1e-6
DISTINCT_OVERLAP = 0.99
COS_PHI_SNAP = 0.99
ORTHO_TOL = 0.05
MIN_STARTS = 16

LARGEST_POSITIVE = "largest-magnitude component positive (near ties: lowest index)"
FIRST_NONNEGATIVE = "first component non-negative"


@dataclass(frozen=True)
class ExpectationDataset:
    """Measured Pauli expectations ``(string, value, shots)``.

    Values may overshoot [-1, 1] by shot noise; anything beyond
    ``1 + VALUE_SLACK`` in magnitude is rejected.
    """

    entries: tuple[tuple[PauliString, float, int], ...]

    def __post_init__(self):
        clean = []
        for q, v, shots in self.entries:
            q = q if isinstance(q, PauliString) else PauliString.parse(q)
            v = float(v)
            if not math.isfinite(v) or abs(v) > 1.0 + VALUE_SLACK:
                raise ValueError(f"expectation {v!r} of {q} outside [-1, 1]")
            if int(shots) < 0:
                raise ValueError(f"negative shot count for {q}")
            clean.append((q, v, int(shots)))
        if len({q.n_qubits for q, _, _ in clean}) > 1:
            raise DimensionMismatch("dataset mixes Pauli strings of different lengths")
        object.__setattr__(self, "entries", tuple(clean))

    @classmethod
    def from_values(cls, labels: Iterable[str], values: Iterable[float], shots: int = 0) -> "ExpectationDataset":
        return cls(tuple((PauliString.parse(lbl), v, shots) for lbl, v in zip(labels, values, strict=True)))

    @property
    def n_qubits(self) -> int:
        return self.entries[0][0].n_qubits if self.entries else 0

    def value(self, label: str) -> float:
        for q, v, _ in self.entries:
            if q.factors == label:
                return v
        raise KeyError(label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pauli_label", "value", "shots"])
        for q, v, shots in self.entries:
            w.writerow([q.label, repr(v), shots])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExpectationDataset":
        rows = list(csv.DictReader(io.StringIO(text)))
        missing = {"pauli_label", "value", "shots"} - set(rows[0].keys() if rows else ())
        if missing:
            raise ValueError(f"dataset CSV lacks columns {sorted(missing)}")
        return cls(tuple((PauliString.parse(r["pauli_label"]), float(r["value"]), int(r["shots"])) for r in rows))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def load(cls, path: str | Path) -> "ExpectationDataset":
        return cls.from_csv(Path(path).read_text())


@dataclass(frozen=True)
class RealStateEstimate:
    amplitudes: np.ndarray
    residual: float
    sign_convention: str = LARGEST_POSITIVE
    cos_phi: float | None = None

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=float)
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def to_state(self) -> StateVector:
        return StateVector.from_amplitudes(self.amplitudes, normalize=True)


def _real_operators(data: ExpectationDataset) -> tuple[list[np.ndarray], np.ndarray]:
    ops, vals = [], []
    for q, v, _ in data.entries:
        d = q.to_dense().real
        ops.append(0.5 * (d + d.T))
        vals.append(v)
    return ops, np.array(vals)


def _spectral_guess(ops: list[np.ndarray], vals: np.ndarray, dim: int) -> np.ndarray:
    rho = np.eye(dim) / dim
    for op, v in zip(ops, vals):
        rho = rho + v * op / dim
    _, vecs = np.linalg.eigh(rho)
    return vecs[:, -1]


def _cos_phi(data: ExpectationDataset) -> float | None:
    """``cos(phi)`` of ``(a, b e^{i phi})`` implied by <Z> and <X>, if both present."""
    try:
        z, x = data.value("Z"), data.value("X")
    except KeyError:
        return None
    z = min(max(z, -1.0), 1.0)
    ab2 = 2.0 * math.sqrt((1.0 + z) / 2.0) * math.sqrt((1.0 - z) / 2.0)
    if ab2 < 1e-3:
        return None
    return x / ab2


def reconstruct_real_state(
    data: ExpectationDataset, dim: int, extra_starts: int = 8, seed: int = 0
) -> RealStateEstimate:
    """Least-squares fit of a real unit vector to Pauli expectations.

    Starts from every sign pattern of the top eigenvector of the linear
    density-matrix estimate, plus random starts (at least 16 in total).
    Raises :class:`RankDeficient` when two sign-inequivalent minimizers fit
    equally well, or when (for one qubit) the data imply a clearly complex
    relative phase.
    """
    if dim not in (2, 4):
        raise ValueError(f"dim must be 2 or 4, got {dim}")
    if not data.entries:
        raise ValueError("empty dataset")
    if 2**data.n_qubits != dim:
        raise DimensionMismatch(f"{data.n_qubits}-qubit data for dimension {dim}")

    cos_phi = None
    if dim == 2:
        cos_phi = _cos_phi(data)
        if cos_phi is not None and abs(cos_phi) <= COS_PHI_SNAP:
            raise RankDeficient(f"|cos(phi)| = {abs(cos_phi):.4f} is not close to 1; state is not real")

    ops, vals = _real_operators(data)
    guess = _spectral_guess(ops, vals, dim)
    # v and -v give the same expectations, so fix the first sign
    starts = [guess * np.array((1.0, *s)) for s in itertools.product((1.0, -1.0), repeat=dim - 1)]
    rng = np.random.default_rng(seed)
    n_random = max(extra_starts, MIN_STARTS - len(starts))
    starts += [rng.standard_normal(dim) for _ in range(n_random)]

    stack = np.array(ops)

    def residuals(x):
        v = x / np.linalg.norm(x)
        return stack @ v @ v - vals

    def jacobian(x):
        r = np.linalg.norm(x)
        v = x / r
        av = stack @ v
        return 2.0 * (av - np.outer(av @ v, v)) / r

    # Levenberg-Marquardt needs at least as many residuals as unknowns
    method = "lm" if len(vals) >= dim else "trf"
    fits = []
    for k, x0 in enumerate(starts):
        res = least_squares(residuals, x0, jac=jacobian, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        v = res.x / np.linalg.norm(res.x)
        fits.append((math.sqrt(float(np.mean(res.fun**2))), k, v))
    fits.sort(key=lambda f: (f[0], f[1]))
    best_rms, _, best = fits[0]
    for rms, _, v in fits[1:]:
        if rms - best_rms > TIE_TOL:
            break
        if abs(v @ best) < DISTINCT_OVERLAP:
            raise RankDeficient(
                f"data fit {np.round(best, 4)} and {np.round(v, 4)} equally well (rms {best_rms:.2e})"
            )
    snapped = None if cos_phi is None else math.copysign(1.0, cos_phi)
    if dim == 2:
        # same gauge as the closed form (a, b e^{i phi}) with a >= 0
        lead = best[np.flatnonzero(np.abs(best) > 1e-9)[0]]
        return RealStateEstimate(best * math.copysign(1.0, lead), best_rms, FIRST_NONNEGATIVE, snapped)
    return RealStateEstimate(fix_phase(best).real, best_rms, LARGEST_POSITIVE, snapped)


def bloch_real_state(z: float, x: float) -> RealStateEstimate:
    """Closed-form one-qubit estimate from <Z> and <X>.

    Writes the state as ``(a, b e^{i phi})`` with ``a, b >= 0``, solves
    ``a^2 - b^2 = <Z>`` and ``2 a b cos(phi) = <X>``, then snaps
    ``cos(phi)`` to +-1.  The first component is kept non-negative.
    """
    zc = min(max(z, -1.0), 1.0)
    a, b = math.sqrt((1.0 + zc) / 2.0), math.sqrt((1.0 - zc) / 2.0)
    if 2 * a * b < 1e-3:
        return RealStateEstimate(np.array([a, b]), 0.0, FIRST_NONNEGATIVE, None)
    cphi = x / (2 * a * b)
    if abs(cphi) <= COS_PHI_SNAP:
        raise RankDeficient(f"|cos(phi)| = {abs(cphi):.4f} is not close to 1")
    sign = math.copysign(1.0, cphi)
    resid = math.sqrt(((2 * a * b * sign - x) ** 2) / 2.0)
    return RealStateEstimate(np.array([a, sign * b]), resid, FIRST_NONNEGATIVE, sign)


# ---------------------------------------------------------------------------
# excitation unitaries


@dataclass(frozen=True)
class ExcitationUnitary:
    """Unitary exchanging eigenstates ``i`` and ``j`` and fixing the rest."""

    matrix: np.ndarray
    source: str
    pair: tuple[int, int]
    unitarization_deviation: float
    raw: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("matrix", "raw"):
            val = getattr(self, name)
            if val is not None:
                a = np.array(val, dtype=complex)
                a.flags.writeable = False
                object.__setattr__(self, name, a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    @classmethod
    def from_matrix(cls, m, source: str = "file", pair: tuple[int, int] = (0, 1)) -> "ExcitationUnitary":
        """Wrap a given (approximately unitary) matrix, unitarizing it first."""
        raw = np.asarray(m, dtype=complex)
        pol = polar_unitarize(raw)
        return cls(pol.unitary_factor, source, pair, pol.deviation_norm, raw)


def _as_vector(s) -> np.ndarray:
    if isinstance(s, RealStateEstimate):
        return np.asarray(s.amplitudes, dtype=complex)
    return np.asarray(getattr(s, "amplitudes", s), dtype=complex).reshape(-1)


def build_excitation_unitary(states: Sequence, i: int, j: int, source: str = "simulated") -> ExcitationUnitary:
    """``|E_j><E_i| + |E_i><E_j| + sum_{k != i,j} |E_k><E_k|``, then unitarized.

    For two-level systems only states ``i`` and ``j`` are needed and the
    completion sum is empty.
    """
    if i == j:
        raise ValueError("i and j must differ")
    vecs = [_as_vector(s) for s in states]
    if not vecs:
        raise MissingStates("no states supplied")
    dim = len(vecs[0])
    if any(len(v) != dim for v in vecs):
        raise DimensionMismatch("states have different dimensions")
    if max(i, j) >= len(vecs) or min(i, j) < 0:
        raise MissingStates(f"pair ({i}, {j}) not covered by {len(vecs)} states")
    if dim > 2 and len(vecs) < dim:
        raise MissingStates(f"need all {dim} eigenstates, got {len(vecs)}")
    vecs = [v / np.linalg.norm(v) for v in vecs]
    for a, b in itertools.combinations(range(len(vecs)), 2):
        ov = abs(np.vdot(vecs[a], vecs[b]))
        if ov > ORTHO_TOL:
            raise NotOrthogonal(f"|<E_{a}|E_{b}>| = {ov:.4f} exceeds {ORTHO_TOL}")
    vi, vj = vecs[i], vecs[j]
    raw = np.outer(vj, vi.conj()) + np.outer(vi, vj.conj())
    if dim > 2:
        for k, vk in enumerate(vecs):
            if k not in (i, j):
                raw += np.outer(vk, vk.conj())
    pol = polar_unitarize(raw)
    return ExcitationUnitary(pol.unitary_factor, source, (i, j), pol.deviation_norm, raw)


def excitation_roundtrip_check(u: ExcitationUnitary, ground: StateVector, h: PauliSum) -> tuple[float, float]:
    """Energies of ``u |g>`` and ``u u |g>``."""
    if u.dim != ground.dim or h.n_qubits != ground.n_qubits:
        raise DimensionMismatch(f"unitary dim {u.dim}, state dim {ground.dim}, H on {h.n_qubits} qubits")
    targets = list(range(ground.n_qubits))
    once = apply_unitary(ground, u.matrix, targets)
    twice = apply_unitary(once, u.matrix, targets)
    return exact_expectation(h, once), exact_expectation(h, twice)
