"""Twirling filters for eigenstate extraction.

One twirl attaches a fresh ancilla in |0>, applies Hadamard, a controlled
``exp(-i tau (H - offset))`` and a second Hadamard, then post-selects the
ancilla on 0.  Each eigencomponent ``c_j |E_j>`` is multiplied by
``(1 + exp(-i tau (E_j - offset))) / 2`` before renormalization, so
components whose shifted energy sits near a multiple of ``2 pi / tau``
survive while those near an odd multiple of ``pi / tau`` are suppressed.

The ``offset`` is a constant energy shift of the controlled propagator
(equivalently a phase gate on the ancilla).  Without it the filter magnitude
``|cos(tau E / 2)|`` cannot tell ``E`` from ``-E``; adaptive schedules
re-center it on the current mean energy.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, ZeroProbability
from .linalg import unitary_exp
from .pauli import PauliSum, energy_variance, exact_expectation, to_dense
from .statevector import (
    StateVector,
    append_ancilla,
    apply_controlled,
    discard_qubit,
    hadamard,
    project_postselect,
)

VARIANCE_THRESHOLD = 1e-4
DEFAULT_GRID_SIZE = 32
GRID_MIN_TAU = 0.05


@dataclass(frozen=True)
class TwirlSchedule:
    """A sequence of twirl durations.

    ``fixed`` repeats ``tau0``; ``explicit`` uses ``taus``; ``adaptive``
    picks each duration from ``adaptive_grid`` (or a default grid built
    from the current energy spread) to minimize the post-step energy
    variance.  ``offset`` is the energy shift of the controlled propagator;
    ``None`` in adaptive mode means "the current mean energy".
    """

    mode: str = "adaptive"
    steps: int = 4
    tau0: float = 1.0
    taus: tuple[float, ...] = ()
    adaptive_grid: tuple[float, ...] = ()
    offset: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive", "explicit"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if int(self.steps) < 1:
            raise ValueError("a schedule needs at least one step")
        if self.mode == "explicit" and len(self.taus) != self.steps:
            raise ValueError(f"explicit schedule has {len(self.taus)} taus for {self.steps} steps")
        for t in (self.tau0, *self.taus, *self.adaptive_grid):
            if not math.isfinite(t):
                raise ValueError(f"non-finite duration {t!r}")
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "adaptive_grid", tuple(float(t) for t in self.adaptive_grid))

    @classmethod
    def explicit(cls, taus: Sequence[float], offset: float = 0.0) -> "TwirlSchedule":
        return cls("explicit", len(taus), taus=tuple(taus), offset=offset)

    @classmethod
    def fixed(cls, tau: float, steps: int, offset: float = 0.0) -> "TwirlSchedule":
        return cls("fixed", steps, tau0=tau, offset=offset)


@dataclass(frozen=True)
class TwirlOutcome:
    state: StateVector
    success_probability: float
    energy_history: tuple[float, ...]
    variance_history: tuple[float, ...]
    taus: tuple[float, ...] = field(default=())
    offsets: tuple[float, ...] = field(default=())
    step_probabilities: tuple[float, ...] = field(default=())

    @property
    def energy(self) -> float:
        return self.energy_history[-1]

    @property
    def variance(self) -> float:
        return self.variance_history[-1]


def controlled_propagator(h: PauliSum, tau: float, offset: float = 0.0) -> np.ndarray:
    hd = to_dense(h) - offset * np.eye(2**h.n_qubits)
    return unitary_exp(hd, tau)


def twirl_once(
    psi: StateVector, h: PauliSum, tau: float, offset: float = 0.0
) -> tuple[StateVector, float]:
    """Single twirl with ancilla post-selection; returns (state, success probability)."""
    if psi.n_qubits != h.n_qubits:
        raise DimensionMismatch(f"{psi.n_qubits}-qubit state vs {h.n_qubits}-qubit Hamiltonian")
    n = psi.n_qubits
    anc = n
    reg = hadamard(append_ancilla(psi), anc)
    reg = apply_controlled(reg, controlled_propagator(h, tau, offset), anc, list(range(n)))
    reg = hadamard(reg, anc)
    projected, prob = project_postselect(reg, anc, 0)
    return discard_qubit(projected, anc), prob


def default_tau_grid(variance: float, size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """``size`` log-spaced durations in ``[0.05, 2 pi / spread]``."""
    spread = math.sqrt(max(variance, 1e-300))
    hi = max(2.0 * math.pi / spread, GRID_MIN_TAU * 1.01)
    return np.geomspace(GRID_MIN_TAU, hi, size)


def _adaptive_step(psi, h, grid, offset):
    best = None
    for tau in grid:
        try:
            state, prob = twirl_once(psi, h, float(tau), offset)
        except ZeroProbability:
            continue
        var = energy_variance(h, state)
        if best is None or var < best[0]:
            best = (var, float(tau), state, prob)
    if best is None:
        raise ZeroProbability("every candidate duration annihilates the state")
    return best[1], best[2], best[3]


def run_schedule(psi0: StateVector, h: PauliSum, sched: TwirlSchedule) -> TwirlOutcome:
    psi = psi0
    success = 1.0
    energies, variances, taus, offsets, probs = [], [], [], [], []
    for step in range(sched.steps):
        try:
            if sched.mode == "adaptive":
                offset = exact_expectation(h, psi) if sched.offset is None else sched.offset
                grid = sched.adaptive_grid or default_tau_grid(energy_variance(h, psi))
                tau, psi, prob = _adaptive_step(psi, h, grid, offset)
            else:
                offset = 0.0 if sched.offset is None else sched.offset
                tau = sched.tau0 if sched.mode == "fixed" else sched.taus[step]
                psi, prob = twirl_once(psi, h, tau, offset)
        except ZeroProbability as exc:
            raise ZeroProbability(str(exc), step=step) from exc
        success *= prob
        taus.append(tau)
        offsets.append(offset)
        probs.append(prob)
        energies.append(exact_expectation(h, psi))
        variances.append(energy_variance(h, psi))
    return TwirlOutcome(psi, success, tuple(energies), tuple(variances), tuple(taus), tuple(offsets), tuple(probs))


def is_converged(variance: float, std_error: float | None = None) -> bool:
    """Exact mode: variance below 1e-4.  Sampled mode: below 3 standard errors."""
    if std_error is None:
        return variance < VARIANCE_THRESHOLD
    return variance < 3.0 * std_error


def extract_all_eigenstates(
    h: PauliSum,
    recipes: Sequence[tuple[StateVector, TwirlSchedule]],
    threshold: float = VARIANCE_THRESHOLD,
    workers: int = 1,
) -> list[StateVector]:
    """Run one schedule per recipe; return the states sorted by energy."""
    outcomes = extract_all_outcomes(h, recipes, threshold, workers)
    return [o.state for o in outcomes]


def extract_all_outcomes(
    h: PauliSum,
    recipes: Sequence[tuple[StateVector, TwirlSchedule]],
    threshold: float = VARIANCE_THRESHOLD,
    workers: int = 1,
) -> list[TwirlOutcome]:
    def run(recipe):
        psi0, sched = recipe
        out = run_schedule(psi0, h, sched)
        if not out.variance < threshold:
            raise ConvergenceFailure(
                f"recipe starting from {np.round(psi0.amplitudes, 4)} did not reach an eigenstate",
                out.variance,
            )
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, recipes))
    else:
        outcomes = [run(r) for r in recipes]
    order = sorted(range(len(outcomes)), key=lambda k: (outcomes[k].energy, k))
    return [outcomes[k] for k in order]


def choose_fixed_tau(
    eigenvalues: Sequence[float], target: int, tau_max: float | None = None, samples: int = 4096
) -> tuple[float, float]:
    """Fixed duration and offset that favour eigenvalue ``target``.

    The offset is set to the target energy (its filter factor is 1) and the
    duration maximizes ``1 - max_k |cos(tau (E_k - E_target) / 2)|`` over
    the other eigenvalues on a uniform grid.
    Returns ``(tau, offset)``.
    """
    e = np.asarray(eigenvalues, dtype=float)
    et = e[target]
    others = np.delete(e, target) - et
    if others.size == 0:
        return 0.0, float(et)
    gap = np.min(np.abs(others))
    if gap == 0.0:
        raise ValueError("target eigenvalue is degenerate")
    tau_max = tau_max or 4.0 * math.pi / gap
    taus = np.linspace(tau_max / samples, tau_max, samples)
    worst = np.max(np.abs(np.cos(np.outer(taus, others) / 2.0)), axis=1)
    k = int(np.argmin(worst))
    return float(taus[k]), float(et)


def simulate_attempts(step_probabilities: Sequence[float], rng: np.random.Generator) -> int:
    """Repeat-until-success count when a failed post-selection restarts the pipeline.

    Each attempt runs the steps in order and aborts at the first ancilla
    readout of 1.  Returns the number of attempts until all steps succeed.
    """
    total = float(np.prod(step_probabilities)) if len(step_probabilities) else 1.0
    if total <= 0.0:
        raise ZeroProbability("pipeline success probability is zero")
    attempts = 0
    while True:
        attempts += 1
        if all(rng.random() < p for p in step_probabilities):
            return attempts
