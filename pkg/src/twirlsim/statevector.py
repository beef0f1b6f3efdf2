"""Exact statevector emulation and seeded shot sampling.

States are immutable snapshots; every operation returns a new
:class:`StateVector`.  Qubit 0 is the most significant bit of the basis
index (leftmost tensor factor).

Sampling splits the shots into fixed-size blocks.  Block ``b`` draws its
uniforms from a generator seeded by ``(seed, *key, b)``, so the random stream
of a given shot never depends on how blocks are distributed over worker
threads.  Each worker returns integer outcome counts and the counts are
summed, which makes results bit-identical for any ``streams`` value.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BadTargets, ControlOverlap, DimensionMismatch, EmptyBin, NotUnitary, ZeroProbability
from .linalg import as_matrix
from .pauli import MAX_QUBITS, PauliString

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
ZERO_PROB_TOL = 1e-14
BLOCK_SHOTS = 1 << 16

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S_GATE = np.diag([1, 1j]).astype(complex)
S_DAG = np.diag([1, -1j]).astype(complex)
# Rotations taking each Pauli eigenbasis to the computational basis.
_BASIS_CHANGE = {"X": HADAMARD, "Y": HADAMARD @ S_DAG}


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise DimensionMismatch(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        if amps.shape != (2**self.n_qubits,):
            raise DimensionMismatch(f"{amps.shape[0]} amplitudes for {self.n_qubits} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = False) -> "StateVector":
        a = np.asarray(amps, dtype=complex).reshape(-1)
        n = int(round(math.log2(a.shape[0]))) if a.shape[0] else 0
        if a.shape[0] != 2**n:
            raise DimensionMismatch(f"length {a.shape[0]} is not a power of two")
        if normalize:
            nrm = np.linalg.norm(a)
            if nrm == 0.0:
                raise ZeroProbability("cannot normalize the zero vector")
            a = a / nrm
        return cls(n, a)

    @classmethod
    def basis(cls, bits: str | Sequence[int]) -> "StateVector":
        """Computational basis state; ``"10"`` means qubit 0 in |1>, qubit 1 in |0>."""
        bits = [int(b) for b in bits]
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError(f"invalid basis bits {bits!r}")
        a = np.zeros(2 ** len(bits), dtype=complex)
        a[int("".join(map(str, bits)), 2)] = 1.0
        return cls(len(bits), a)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "StateVector | np.ndarray") -> complex:
        b = np.asarray(getattr(other, "amplitudes", other), dtype=complex)
        return complex(np.vdot(self.amplitudes, b))

    def fidelity(self, other: "StateVector | np.ndarray") -> float:
        return abs(self.overlap(other)) ** 2

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)


def _renormalized(n: int, amps: np.ndarray) -> StateVector:
    # unitary steps drift at the 1e-16 level; keep the stored norm exact
    return StateVector(n, amps / np.linalg.norm(amps))


def _check_targets(n: int, targets: Sequence[int]) -> tuple[int, ...]:
    t = tuple(int(q) for q in targets)
    if not t:
        raise BadTargets("empty target list")
    if len(set(t)) != len(t):
        raise BadTargets(f"duplicate targets {t}")
    if any(q < 0 or q >= n for q in t):
        raise BadTargets(f"targets {t} out of range for {n} qubits")
    return t


def _check_gate(u, k: int) -> np.ndarray:
    m = as_matrix(u)
    if m.shape != (2**k, 2**k):
        raise DimensionMismatch(f"gate of shape {m.shape} on {k} target qubit(s)")
    if np.max(np.abs(m.conj().T @ m - np.eye(2**k))) > UNITARY_TOL:
        raise NotUnitary(f"gate deviates from unitarity by more than {UNITARY_TOL:.0e}")
    return m


def _apply_tensor(t: np.ndarray, m: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    k = len(targets)
    g = m.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    return np.moveaxis(out, list(range(k)), list(targets))


def apply_unitary(psi: StateVector, u, targets: Sequence[int]) -> StateVector:
    """Apply a ``2^k x 2^k`` unitary to the listed qubits (first target = most significant)."""
    t = _check_targets(psi.n_qubits, targets)
    m = _check_gate(u, len(t))
    out = _apply_tensor(psi._tensor(), m, t)
    return _renormalized(psi.n_qubits, out.reshape(-1))


def apply_controlled(psi: StateVector, u, control: int, targets: Sequence[int]) -> StateVector:
    """Apply ``u`` on ``targets`` only in the control-|1> subspace."""
    n = psi.n_qubits
    t = _check_targets(n, targets)
    if not 0 <= control < n:
        raise BadTargets(f"control {control} out of range for {n} qubits")
    if control in t:
        raise ControlOverlap(f"control {control} is also a target")
    m = _check_gate(u, len(t))
    tensor = np.array(psi._tensor())
    sub = np.take(tensor, 1, axis=control)
    shifted = tuple(q - 1 if q > control else q for q in t)
    idx = [slice(None)] * n
    idx[control] = 1
    tensor[tuple(idx)] = _apply_tensor(sub, m, shifted)
    return _renormalized(n, tensor.reshape(-1))


def hadamard(psi: StateVector, qubit: int) -> StateVector:
    return apply_unitary(psi, HADAMARD, [qubit])


def phase_s(psi: StateVector, qubit: int) -> StateVector:
    """Multiply the qubit-value-1 amplitudes by ``i``."""
    return apply_unitary(psi, S_GATE, [qubit])


def append_ancilla(psi: StateVector) -> StateVector:
    """Attach a fresh |0> qubit as the new last-indexed qubit."""
    if psi.n_qubits + 1 > MAX_QUBITS:
        raise DimensionMismatch(f"register would exceed {MAX_QUBITS} qubits")
    amps = np.zeros(2 * psi.dim, dtype=complex)
    amps[0::2] = psi.amplitudes
    return StateVector(psi.n_qubits + 1, amps)


def outcome_probability(psi: StateVector, qubit: int, outcome: int) -> float:
    if not 0 <= qubit < psi.n_qubits:
        raise BadTargets(f"qubit {qubit} out of range")
    p = np.take(np.abs(psi._tensor()) ** 2, outcome, axis=qubit)
    return float(p.sum())


def project_postselect(psi: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Project ``qubit`` onto ``outcome``, renormalize; also return the outcome probability.

    The projected qubit is kept in the register (now in a definite state);
    use :func:`discard_qubit` to drop it.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    if not 0 <= qubit < psi.n_qubits:
        raise BadTargets(f"qubit {qubit} out of range")
    tensor = np.array(psi._tensor())
    idx = [slice(None)] * psi.n_qubits
    idx[qubit] = 1 - outcome
    tensor[tuple(idx)] = 0.0
    amps = tensor.reshape(-1)
    prob = float(np.vdot(amps, amps).real)
    if prob < ZERO_PROB_TOL:
        raise ZeroProbability(f"outcome {outcome} on qubit {qubit} has probability {prob:.3e}")
    return StateVector(psi.n_qubits, amps / math.sqrt(prob)), min(prob, 1.0)


def discard_qubit(psi: StateVector, qubit: int) -> StateVector:
    """Drop a qubit that is in a definite computational state."""
    if psi.n_qubits < 2:
        raise DimensionMismatch("cannot discard the only qubit")
    t = psi._tensor()
    p1 = outcome_probability(psi, qubit, 1)
    keep = 1 if p1 > 0.5 else 0
    if min(p1, 1.0 - p1) > NORM_TOL:
        raise ValueError(f"qubit {qubit} is entangled or in superposition; project it first")
    return _renormalized(psi.n_qubits - 1, np.take(t, keep, axis=qubit).reshape(-1))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class ShotPlan:
    """How many shots to draw and how their randomness is derived.

    ``key`` extends the seed path so that repeats and observables get
    independent streams (``plan.child(r)``).
    """

    shots: int
    seed: int = 0
    streams: int = 1
    key: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if int(self.shots) < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if int(self.streams) < 1:
            raise ValueError(f"streams must be >= 1, got {self.streams}")

    def child(self, *k: int) -> "ShotPlan":
        return ShotPlan(self.shots, self.seed, self.streams, self.key + tuple(int(x) for x in k))

    def with_shots(self, shots: int) -> "ShotPlan":
        return ShotPlan(shots, self.seed, self.streams, self.key)

    def blocks(self) -> list[tuple[int, int]]:
        """``(block_index, size)`` pairs covering all shots."""
        nblk = -(-self.shots // BLOCK_SHOTS)
        return [(b, min(BLOCK_SHOTS, self.shots - b * BLOCK_SHOTS)) for b in range(nblk)]

    def partitions(self) -> list[list[tuple[int, int]]]:
        """Contiguous block ranges per stream; range lengths differ by at most one."""
        blocks = self.blocks()
        k = min(self.streams, len(blocks))
        q, r = divmod(len(blocks), k)
        out, start = [], 0
        for i in range(k):
            stop = start + q + (1 if i < r else 0)
            out.append(blocks[start:stop])
            start = stop
        return out


@dataclass(frozen=True)
class SampledExpectation:
    value: float
    shots_used: int
    std_error: float

    @classmethod
    def from_sums(cls, parity_sum: int, shots: int) -> "SampledExpectation":
        if shots < 1:
            raise ValueError("no shots")
        value = parity_sum / shots
        return cls(value, shots, math.sqrt(max(1.0 - value * value, 0.0) / shots))


def _block_rng(plan: ShotPlan, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(plan.seed), spawn_key=plan.key + (block,))
    return np.random.Generator(np.random.PCG64(ss))


def _count_partition(cdf: np.ndarray, plan: ShotPlan, part, kernel) -> np.ndarray:
    counts = np.zeros(len(cdf), dtype=np.int64)
    for b, size in part:
        u = _block_rng(plan, b).random(size)
        counts += kernel(u, cdf)
    return counts


def sample_counts(probs: np.ndarray, plan: ShotPlan, kernel=None) -> np.ndarray:
    """Draw ``plan.shots`` outcomes from ``probs``; return counts per outcome."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    cdf = np.cumsum(p / p.sum())
    cdf[-1] = 1.0
    kernel = kernel or _kernels.tally_outcomes
    parts = plan.partitions()
    if len(parts) == 1:
        return _count_partition(cdf, plan, parts[0], kernel)
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        results = list(pool.map(lambda part: _count_partition(cdf, plan, part, kernel), parts))
    total = np.zeros(len(cdf), dtype=np.int64)
    for c in results:
        total += c
    return total


def rotate_to_eigenbasis(psi: StateVector, q: PauliString, offset: int = 0) -> StateVector:
    """Rotate so that measuring ``q`` becomes a computational-basis readout.

    ``offset`` shifts the qubits ``q`` acts on (its factor ``i`` lands on
    register qubit ``offset + i``).
    """
    out = psi
    for i, c in enumerate(q.factors):
        if c in _BASIS_CHANGE:
            out = apply_unitary(out, _BASIS_CHANGE[c], [offset + i])
    return out


def parity_signs(n_qubits: int, qubits: Sequence[int]) -> np.ndarray:
    """``(-1)^(sum of the listed bits)`` for every basis index."""
    idx = np.arange(2**n_qubits)
    par = np.zeros_like(idx)
    for q in qubits:
        par ^= (idx >> (n_qubits - 1 - q)) & 1
    return 1 - 2 * par


def sample_pauli(psi: StateVector, q: PauliString, plan: ShotPlan) -> SampledExpectation:
    if q.n_qubits != psi.n_qubits:
        raise DimensionMismatch(f"{q.n_qubits}-qubit observable on {psi.n_qubits}-qubit state")
    rotated = rotate_to_eigenbasis(psi, q)
    counts = sample_counts(rotated.probabilities(), plan)
    signs = parity_signs(psi.n_qubits, q.support)
    return SampledExpectation.from_sums(int(counts @ signs), plan.shots)


def sample_conditional_pauli(
    psi: StateVector, ancilla: int, q: PauliString, plan: ShotPlan
) -> tuple[SampledExpectation, SampledExpectation]:
    """Sample ``q`` on the non-ancilla qubits, binned by the ancilla readout.

    ``q`` lists factors for the remaining qubits in register order.
    Returns the estimates for ancilla = 0 and ancilla = 1.
    """
    n = psi.n_qubits
    if not 0 <= ancilla < n:
        raise BadTargets(f"ancilla {ancilla} out of range")
    if q.n_qubits != n - 1:
        raise DimensionMismatch(f"{q.n_qubits}-qubit observable for {n - 1} physical qubits")
    full = PauliString(q.factors[:ancilla] + "I" + q.factors[ancilla:])
    rotated = rotate_to_eigenbasis(psi, full)
    counts = sample_counts(rotated.probabilities(), plan)
    signs = parity_signs(n, full.support)
    anc_bit = (np.arange(2**n) >> (n - 1 - ancilla)) & 1
    out = []
    for b in (0, 1):
        sel = anc_bit == b
        shots_b = int(counts[sel].sum())
        if shots_b == 0:
            raise EmptyBin(f"ancilla outcome {b} received no shots", b)
        out.append(SampledExpectation.from_sums(int(counts[sel] @ signs[sel]), shots_b))
    return out[0], out[1]


def conditional_expectations(psi: StateVector, ancilla: int, q: PauliString) -> tuple[float, float, float]:
    """Exact counterpart of :func:`sample_conditional_pauli`.

    Returns ``(<q>_0, <q>_1, P(ancilla = 0))``.
    """
    n = psi.n_qubits
    if q.n_qubits != n - 1:
        raise DimensionMismatch(f"{q.n_qubits}-qubit observable for {n - 1} physical qubits")
    full = PauliString(q.factors[:ancilla] + "I" + q.factors[ancilla:]).to_dense()
    vals, probs = [], []
    for b in (0, 1):
        p = outcome_probability(psi, ancilla, b)
        if p < ZERO_PROB_TOL:
            raise EmptyBin(f"ancilla outcome {b} has zero probability", b)
        proj, _ = project_postselect(psi, ancilla, b)
        vals.append(float(np.vdot(proj.amplitudes, full @ proj.amplitudes).real))
        probs.append(p)
    return vals[0], vals[1], probs[0]
