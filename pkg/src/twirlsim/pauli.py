"""Pauli strings, weighted Pauli sums and the two model Hamiltonians.

Labels are written qubit 0 first, so ``"XI"`` is X on qubit 0 and the
identity on qubit 1.  Qubit 0 is also the leftmost tensor factor, giving the
basis order ``|q0 q1> = |00>, |01>, |10>, |11>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidLabel, InvalidParams, TooManyQubits
from .linalg import kron

MAX_QUBITS = 4

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Hydrogen molecule at 0.70 Angstrom, in hartree: a0..a4 multiply
# II, ZI, IZ, ZZ, XX.
H2_COEFFS = (-1.04319, 0.42045, -0.42045, 0.01150, 0.179005)
HARTREE_IN_EV = 27.211386


@lru_cache(maxsize=None)
def _dense_label(label: str) -> np.ndarray:
    m = kron(*(PAULI_MATRICES[c] for c in label))
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class PauliString:
    factors: str

    def __post_init__(self):
        if not isinstance(self.factors, str) or len(self.factors) < 1:
            raise InvalidLabel(str(self.factors), "")
        for c in self.factors:
            if c not in PAULI_MATRICES:
                raise InvalidLabel(self.factors, c)

    @classmethod
    def parse(cls, label: str) -> "PauliString":
        return cls(label.strip().upper())

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls("I" * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def label(self) -> str:
        return self.factors

    @property
    def support(self) -> tuple[int, ...]:
        """Qubits carrying a non-identity factor."""
        return tuple(i for i, c in enumerate(self.factors) if c != "I")

    def is_identity(self) -> bool:
        return not self.support

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > MAX_QUBITS:
            raise TooManyQubits(f"{self.n_qubits} qubits > {MAX_QUBITS}")
        return _dense_label(self.factors)

    def __str__(self) -> str:
        return self.factors


def all_pauli_strings(n_qubits: int, include_identity: bool = True) -> list[PauliString]:
    out = []
    for idx in range(4**n_qubits):
        chars = []
        for _ in range(n_qubits):
            idx, r = divmod(idx, 4)
            chars.append("IXYZ"[r])
        label = "".join(reversed(chars))
        if include_identity or set(label) != {"I"}:
            out.append(PauliString(label))
    return out


def real_pauli_strings(n_qubits: int) -> list[PauliString]:
    """Non-identity strings with an even number of Y factors (real matrices)."""
    return [p for p in all_pauli_strings(n_qubits, include_identity=False)
            if p.factors.count("Y") % 2 == 0]


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings; Hermitian by construction.

    Duplicate strings are merged on construction and terms are kept in
    first-appearance order.
    """

    terms: tuple[tuple[float, PauliString], ...]
    n_qubits: int = field(default=0)

    def __post_init__(self):
        merged: dict[str, float] = {}
        n = self.n_qubits
        for coeff, s in self.terms:
            if not isinstance(s, PauliString):
                s = PauliString.parse(s)
            c = float(coeff)
            if not math.isfinite(c):
                raise InvalidParams(f"non-finite coefficient {coeff!r} on {s}")
            if n == 0:
                n = s.n_qubits
            if s.n_qubits != n:
                raise DimensionMismatch(f"term {s} has {s.n_qubits} qubits, expected {n}")
            merged[s.factors] = merged.get(s.factors, 0.0) + c
        if n < 1:
            raise InvalidParams("a PauliSum needs at least one term or n_qubits >= 1")
        object.__setattr__(self, "terms", tuple((c, PauliString(lbl)) for lbl, c in merged.items()))
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(tuple((c, PauliString.parse(lbl)) for c, lbl in pairs))

    @classmethod
    def single(cls, s: PauliString | str, coeff: float = 1.0) -> "PauliSum":
        s = s if isinstance(s, PauliString) else PauliString.parse(s)
        return cls(((coeff, s),))

    def coefficient(self, label: str) -> float:
        for c, s in self.terms:
            if s.factors == label:
                return c
        return 0.0

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def __len__(self) -> int:
        return len(self.terms)


def to_dense(s: PauliSum | PauliString) -> np.ndarray:
    if isinstance(s, PauliString):
        return np.array(s.to_dense())
    if s.n_qubits > MAX_QUBITS:
        raise TooManyQubits(f"{s.n_qubits} qubits > {MAX_QUBITS}")
    out = np.zeros((2**s.n_qubits,) * 2, dtype=complex)
    for c, p in s.terms:
        out += c * p.to_dense()
    return out


@dataclass(frozen=True)
class ModelParams:
    kind: str
    J: float | None = None
    a: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "single_qubit":
            if self.J is None or self.a is not None:
                raise InvalidParams("single_qubit takes J only")
            if not math.isfinite(float(self.J)):
                raise InvalidParams(f"J must be finite, got {self.J!r}")
        elif self.kind == "h2":
            if self.J is not None:
                raise InvalidParams("h2 does not take J")
            a = H2_COEFFS if self.a is None else tuple(float(x) for x in self.a)
            if len(a) != 5 or not all(math.isfinite(x) for x in a):
                raise InvalidParams(f"h2 needs five finite coefficients, got {self.a!r}")
            object.__setattr__(self, "a", a)
        else:
            raise InvalidParams(f"unknown model kind {self.kind!r}")

    @classmethod
    def single_qubit(cls, J: float) -> "ModelParams":
        return cls("single_qubit", J=float(J))

    @classmethod
    def h2(cls, a: Sequence[float] | None = None) -> "ModelParams":
        return cls("h2", a=None if a is None else tuple(a))

    @property
    def n_qubits(self) -> int:
        return 1 if self.kind == "single_qubit" else 2

    @property
    def name(self) -> str:
        return f"single_qubit(J={self.J:g})" if self.kind == "single_qubit" else "h2"


def build_model(p: ModelParams) -> PauliSum:
    """``X + J Z`` on one qubit, or the five-term two-qubit H2 Hamiltonian."""
    if p.kind == "single_qubit":
        pairs = [(1.0, "X")]
        if p.J != 0.0:
            pairs.append((p.J, "Z"))
        return PauliSum.from_labels(pairs)
    a0, a1, a2, a3, a4 = p.a
    return PauliSum.from_labels([(a0, "II"), (a1, "ZI"), (a2, "IZ"), (a3, "ZZ"), (a4, "XX")])


def exact_expectation(s: PauliSum | PauliString, psi) -> float:
    """``<psi| s |psi>`` computed densely; ``psi`` is a StateVector or an array."""
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    n = s.n_qubits
    if amps.shape != (2**n,):
        raise DimensionMismatch(f"state of length {amps.shape[0]} vs {n}-qubit observable")
    val = np.vdot(amps, to_dense(s) @ amps)
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > 1e-12 * scale:
        raise AssertionError(f"expectation of Hermitian operator has imaginary part {val.imag:.3e}")
    return float(val.real)


def energy_variance(h: PauliSum, psi) -> float:
    """``<H^2> - <H>^2``, clipped at zero."""
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    hv = to_dense(h) @ amps
    mean = np.vdot(amps, hv).real
    return max(float(np.vdot(hv, hv).real - mean * mean), 0.0)
