"""Interference circuits that superpose a ground state with an excited state.

Register layout: physical qubits first, the ancilla is the last-indexed
qubit.  Both circuits start from ``|g>|0>``:

* ``real_part``: H(anc), controlled-U, H(anc).  The ancilla-0 branch holds
  ``(|g> + U|g>)/2`` and the ancilla-1 branch ``(|g> - U|g>)/2``, so
  ``<Q>_0 - <Q>_1 = <E1|Q|E0> + <E0|Q|E1>``.
* ``imag_part``: H(anc), S(anc), controlled-U, H(anc), giving
  ``<Q>_0 - <Q>_1 = -i<E1|Q|E0> + i<E0|Q|E1> = 2 Im <E1|Q|E0>``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DimensionMismatch
from .estimation import ExcitationUnitary
from .pauli import PauliString, PauliSum
from .statevector import (
    ShotPlan,
    StateVector,
    append_ancilla,
    apply_controlled,
    conditional_expectations,
    hadamard,
    phase_s,
    sample_conditional_pauli,
)

CIRCUIT_KINDS = ("real_part", "imag_part")
INTERPRETATION = {"real_part": "re_sum", "imag_part": "im_combination"}
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SuperpositionRun:
    circuit_kind: str
    ground: StateVector
    u: ExcitationUnitary
    observable: PauliString | PauliSum
    plan: ShotPlan | None = None  # None selects exact mode

    def __post_init__(self):
        if self.circuit_kind not in CIRCUIT_KINDS:
            raise ValueError(f"circuit_kind must be one of {CIRCUIT_KINDS}, got {self.circuit_kind!r}")
        n = self.ground.n_qubits
        if self.u.dim != self.ground.dim:
            raise DimensionMismatch(f"unitary of dim {self.u.dim} for a {n}-qubit ground state")
        if self.observable.n_qubits != n:
            raise DimensionMismatch(f"observable on {self.observable.n_qubits} qubits, register has {n}")

    @property
    def exact(self) -> bool:
        return self.plan is None

    def with_plan(self, plan: ShotPlan | None) -> "SuperpositionRun":
        return SuperpositionRun(self.circuit_kind, self.ground, self.u, self.observable, plan)


@dataclass(frozen=True)
class MatrixElementResult:
    cond_expectation_0: float
    cond_expectation_1: float
    difference: float
    interpretation: str
    shots_0: int
    shots_1: int
    ci95_halfwidth: float
    branch_probability_0: float | None = None


def prepare_circuit_state(circuit_kind: str, ground: StateVector, u: ExcitationUnitary) -> StateVector:
    n = ground.n_qubits
    anc = n
    reg = hadamard(append_ancilla(ground), anc)
    if circuit_kind == "imag_part":
        reg = phase_s(reg, anc)
    reg = apply_controlled(reg, u.matrix, anc, list(range(n)))
    return hadamard(reg, anc)


def _terms(observable) -> list[tuple[float, PauliString]]:
    if isinstance(observable, PauliString):
        return [(1.0, observable)]
    return list(observable.terms)


def run_superposition(run: SuperpositionRun) -> MatrixElementResult:
    state = prepare_circuit_state(run.circuit_kind, run.ground, run.u)
    anc = run.ground.n_qubits
    q0 = q1 = 0.0
    if run.exact:
        p0 = None
        for c, p in _terms(run.observable):
            e0, e1, p0 = conditional_expectations(state, anc, p)
            q0 += c * e0
            q1 += c * e1
        return MatrixElementResult(q0, q1, q0 - q1, INTERPRETATION[run.circuit_kind], 0, 0, 0.0, p0)

    var0 = var1 = 0.0
    shots0 = shots1 = 0
    for k, (c, p) in enumerate(_terms(run.observable)):
        plan = run.plan if isinstance(run.observable, PauliString) else run.plan.child(k)
        s0, s1 = sample_conditional_pauli(state, anc, p, plan)
        q0 += c * s0.value
        q1 += c * s1.value
        var0 += (c * s0.std_error) ** 2
        var1 += (c * s1.std_error) ** 2
        shots0, shots1 = s0.shots_used, s1.shots_used
    half = Z95 * math.sqrt(var0 + var1)
    p0 = shots0 / (shots0 + shots1)
    return MatrixElementResult(q0, q1, q0 - q1, INTERPRETATION[run.circuit_kind], shots0, shots1, half, p0)


def full_matrix_element(
    ground: StateVector, u: ExcitationUnitary, q: PauliString | PauliSum, plan: ShotPlan | None = None
) -> complex:
    """``<E1|Q|E0>`` for Hermitian ``Q`` from one run of each circuit.

    Uses ``<E0|Q|E1> = conj(<E1|Q|E0>)``: the real-part difference is twice
    the real part and the imaginary-part difference twice the imaginary part.
    """
    re_plan = None if plan is None else plan.child(0)
    im_plan = None if plan is None else plan.child(1)
    re = run_superposition(SuperpositionRun("real_part", ground, u, q, re_plan)).difference
    im = run_superposition(SuperpositionRun("imag_part", ground, u, q, im_plan)).difference
    return complex(re / 2.0, im / 2.0)


def t_halfwidth(samples, confidence: float = 0.95) -> float:
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples for a t interval")
    s = float(np.std(x, ddof=1))
    return float(stats.t.ppf(0.5 + confidence / 2.0, n - 1)) * s / math.sqrt(n)


def repeated_runs_ci(run: SuperpositionRun, repeats: int, workers: int = 1) -> tuple[float, float, list[float]]:
    """Mean difference over independent repeats and its t-based 95% half-width.

    Repeat ``r`` uses ``run.plan.child(r)``.  Returns ``(mean, halfwidth,
    per-repeat differences)``.
    """
    if repeats < 2:
        raise ValueError("repeated_runs_ci needs repeats >= 2")
    if run.exact:
        raise ValueError("repeated_runs_ci needs a sampled run (plan is None)")

    def one(r: int) -> float:
        return run_superposition(run.with_plan(run.plan.child(r))).difference

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            diffs = list(pool.map(one, range(repeats)))
    else:
        diffs = [one(r) for r in range(repeats)]
    return float(np.mean(diffs)), t_halfwidth(diffs), diffs
