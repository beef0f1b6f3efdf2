"""End-to-end pipelines and the table presets used by the CLI.

All randomness flows from one :class:`ShotPlan`; each stage takes a child
plan with a fixed key so that adding or removing stages elsewhere never
shifts the random streams of a given measurement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import PipelineError, TwirlSimError
from .estimation import (
    ExcitationUnitary,
    ExpectationDataset,
    RealStateEstimate,
    bloch_real_state,
    build_excitation_unitary,
    reconstruct_real_state,
)
from .oracle import SpectralOracle, exact_eigenpairs
from .pauli import ModelParams, PauliString, PauliSum, build_model, exact_expectation
from .statevector import HADAMARD, ShotPlan, StateVector, sample_pauli
from .superposition import Z95, SuperpositionRun, repeated_runs_ci, run_superposition, t_halfwidth
from .twirl import TwirlOutcome, TwirlSchedule, extract_all_outcomes, run_schedule

DEFAULT_SHOTS = 10**6
REFERENCE_SHOTS = 10**7

# Seed-path keys for the pipeline stages.
KEY_DATASET = 1
KEY_CIRCUIT = 2
KEY_REPEAT = 3

SINGLE_QUBIT_FIT_LABELS = ("Z", "X")
H2_FIT_LABELS = ("ZZ", "ZI", "IZ", "XX", "ZX", "XZ")
TABLE_1Q_OBSERVABLES = ("X", "Z", "Y")
TABLE_H2_OBSERVABLES = ("ZZ", "ZI", "IZ", "XX", "XI", "YY", "YI")

Z_GATE = np.diag([1.0, -1.0]).astype(complex)


def _product(*single: Sequence[complex]) -> StateVector:
    amps = np.array([1.0 + 0j])
    for s in single:
        amps = np.kron(amps, np.asarray(s, dtype=complex))
    return StateVector.from_amplitudes(amps, normalize=True)


def default_recipes(model: ModelParams) -> list[tuple[StateVector, TwirlSchedule]]:
    """Initial states and adaptive schedules, one per eigenstate.

    Adaptive twirls converge to the eigenstate whose energy is closest to
    the initial mean energy, so each start is picked to sit near its
    target: ``|1>``/``|0>`` for ``X + J Z`` (J > 0); ``|10>``, ``|+->``,
    ``|++>``, ``|01>`` for H2.
    """
    if model.kind == "single_qubit":
        return [(StateVector.basis("1"), TwirlSchedule(steps=4)),
                (StateVector.basis("0"), TwirlSchedule(steps=4))]
    s = 1.0 / math.sqrt(2.0)
    plus, minus = (s, s), (s, -s)
    return [
        (StateVector.basis("10"), TwirlSchedule(steps=4)),
        (_product(plus, minus), TwirlSchedule(steps=6)),
        (_product(plus, plus), TwirlSchedule(steps=6)),
        (StateVector.basis("01"), TwirlSchedule(steps=4)),
    ]


def fit_labels(model: ModelParams) -> tuple[str, ...]:
    return SINGLE_QUBIT_FIT_LABELS if model.kind == "single_qubit" else H2_FIT_LABELS


def twirled_ground_state(model: ModelParams, schedule: TwirlSchedule | None = None) -> TwirlOutcome:
    psi0, default_sched = default_recipes(model)[0]
    return run_schedule(psi0, build_model(model), schedule or default_sched)


def measure_dataset(state: StateVector, labels: Sequence[str], plan: ShotPlan | None) -> ExpectationDataset:
    """Expectations of each label; sampled with ``plan.child(k)`` or exact when ``plan`` is None."""
    entries = []
    for k, lbl in enumerate(labels):
        q = PauliString.parse(lbl)
        if plan is None:
            entries.append((q, exact_expectation(q, state), 0))
        else:
            est = sample_pauli(state, q, plan.child(k))
            entries.append((q, est.value, est.shots_used))
    return ExpectationDataset(tuple(entries))


def fit_state(model: ModelParams, data: ExpectationDataset) -> RealStateEstimate:
    if model.kind == "single_qubit":
        return bloch_real_state(data.value("Z"), data.value("X"))
    return reconstruct_real_state(data, 4)


@dataclass
class SimulatedUnitary:
    unitary: ExcitationUnitary
    outcomes: list[TwirlOutcome]
    datasets: list[ExpectationDataset]
    estimates: list[RealStateEstimate]


def simulated_unitary(model: ModelParams, plan: ShotPlan | None, i: int = 0, j: int = 1) -> SimulatedUnitary:
    """Excitation unitary built without algebraic knowledge of the eigenstates.

    Twirl every default recipe, measure the fit Paulis on each result,
    reconstruct real eigenvectors and build and unitarize ``U``.
    """
    h = build_model(model)
    outcomes = extract_all_outcomes(h, default_recipes(model))
    labels = fit_labels(model)
    datasets, estimates = [], []
    for k, out in enumerate(outcomes):
        sub = None if plan is None else plan.child(KEY_DATASET, k)
        data = measure_dataset(out.state, labels, sub)
        datasets.append(data)
        estimates.append(fit_state(model, data))
    u = build_excitation_unitary(estimates, i, j, source="simulated")
    return SimulatedUnitary(u, outcomes, datasets, estimates)


def algebraic_unitary(oracle: SpectralOracle, i: int = 0, j: int = 1) -> ExcitationUnitary:
    vecs = [oracle.eigenvector(k) for k in range(oracle.dim)]
    return build_excitation_unitary(vecs, i, j, source="algebraic")


def gauge_aligned_pair(oracle: SpectralOracle, u: ExcitationUnitary, i: int = 0, j: int = 1):
    """Exact ``(|E_i>, |E_j>)`` with the sign of ``|E_j>`` matched to ``u |E_i>``."""
    ei, ej = oracle.eigenvector(i), oracle.eigenvector(j)
    ov = np.vdot(ej, u.matrix @ ei)
    phase = ov / abs(ov) if abs(ov) > 1e-12 else 1.0
    return ei, ej * phase


def _snap(x: float) -> float:
    # report round-off of exactly vanishing values as zero
    return 0.0 if abs(x) < 1e-12 else x


def algebraic_combination(oracle: SpectralOracle, u: ExcitationUnitary, q: PauliString, kind: str) -> float:
    """Exact value the circuit of ``kind`` estimates, in the gauge fixed by ``u``."""
    e0, e1 = gauge_aligned_pair(oracle, u)
    qd = q.to_dense()
    m10 = np.vdot(e1, qd @ e0)
    m01 = np.vdot(e0, qd @ e1)
    return _snap(float((m10 + m01 if kind == "real_part" else -1j * m10 + 1j * m01).real))


# ---------------------------------------------------------------------------
# table presets


@dataclass(frozen=True)
class TablePreset:
    table_id: str
    model: ModelParams
    pipeline: str  # "superpose" or "expectations"
    observables: tuple[str, ...]
    circuit_kind: str | None = None
    unitary_source: str | None = None  # "zhz", "algebraic", "simulated"
    repeats: int = 1
    reference_shots: int = REFERENCE_SHOTS
    tolerance: float = 5e-3
    zero_tolerance: float | None = None
    # the state-fit stage samples this many times the circuit shot count
    dataset_shot_factor: int = 1
    description: str = ""


_J1 = ModelParams.single_qubit(1.0)
_J2 = ModelParams.single_qubit(2.0)
_H2 = ModelParams.h2()

TABLES: dict[str, TablePreset] = {
    "I": TablePreset("I", _J1, "superpose", TABLE_1Q_OBSERVABLES, "real_part", "zhz", tolerance=5e-3,
                     description="X + Z, U = Z H Z, real-part circuit"),
    "II": TablePreset("II", _J1, "superpose", TABLE_1Q_OBSERVABLES, "imag_part", "zhz", tolerance=5e-3,
                      description="X + Z, U = Z H Z, imaginary-part circuit"),
    "III": TablePreset("III", _J1, "superpose", TABLE_1Q_OBSERVABLES, "real_part", "simulated", tolerance=1e-2,
                       description="X + Z, reconstructed U, real-part circuit"),
    "IV": TablePreset("IV", _J1, "superpose", TABLE_1Q_OBSERVABLES, "imag_part", "simulated", tolerance=1e-2,
                      description="X + Z, reconstructed U, imaginary-part circuit"),
    "V": TablePreset("V", _J2, "superpose", TABLE_1Q_OBSERVABLES, "real_part", "simulated", tolerance=6e-3,
                     description="X + 2Z, reconstructed U, real-part circuit"),
    "VI": TablePreset("VI", _J2, "superpose", TABLE_1Q_OBSERVABLES, "imag_part", "simulated", tolerance=6e-3,
                      description="X + 2Z, reconstructed U, imaginary-part circuit"),
    "VII": TablePreset("VII", _H2, "superpose", TABLE_H2_OBSERVABLES, "real_part", "algebraic", tolerance=6e-3,
                       description="H2, U from exact eigenvectors, real-part circuit"),
    "VIII": TablePreset("VIII", _H2, "superpose", TABLE_H2_OBSERVABLES, "imag_part", "algebraic", tolerance=6e-3,
                        description="H2, U from exact eigenvectors, imaginary-part circuit"),
    "IX": TablePreset("IX", _H2, "expectations", H2_FIT_LABELS, tolerance=5e-3,
                      description="H2 eigenstate expectations after twirling"),
    "X": TablePreset("X", _H2, "superpose", TABLE_H2_OBSERVABLES, "real_part", "simulated", repeats=10,
                     tolerance=2.5e-2, zero_tolerance=5e-3, dataset_shot_factor=10,
                     description="H2, reconstructed U, real-part circuit, repeated runs"),
    "XI": TablePreset("XI", _H2, "superpose", TABLE_H2_OBSERVABLES, "imag_part", "simulated", repeats=10,
                      tolerance=2.5e-2, zero_tolerance=5e-3, dataset_shot_factor=10,
                      description="H2, reconstructed U, imaginary-part circuit, repeated runs"),
}

TABLE_COLUMNS = ("pauli", "algebraic", "simulated", "ci95", "shots", "repeats", "seed")


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def check(self, tolerance: float, zero_tolerance: float | None = None) -> list[str]:
        """Rows whose simulated value misses the algebraic one; empty when all pass."""
        bad = []
        for r in self.rows:
            tol = tolerance
            if zero_tolerance is not None and abs(r["algebraic"]) < 1e-9:
                tol = zero_tolerance
            if abs(r["simulated"] - r["algebraic"]) > tol:
                label = f"{r['state']}:{r['pauli']}" if "state" in r else r["pauli"]
                bad.append(f"{label}: |{r['simulated']:.6g} - {r['algebraic']:.6g}| > {tol:g}")
        return bad


def zhz_unitary() -> ExcitationUnitary:
    m = Z_GATE @ HADAMARD @ Z_GATE
    return ExcitationUnitary(m, "algebraic", (0, 1), 0.0, m)


def _resolve_unitary(source: str, model: ModelParams, oracle: SpectralOracle, plan: ShotPlan | None,
                     unitary_matrix=None) -> tuple[ExcitationUnitary, dict]:
    meta: dict = {}
    if source == "zhz":
        return zhz_unitary(), meta
    if source == "algebraic":
        return algebraic_unitary(oracle), meta
    if source == "file":
        if unitary_matrix is None:
            raise ValueError("unitary_source=file needs a matrix")
        return ExcitationUnitary.from_matrix(unitary_matrix, "file"), meta
    if source == "simulated":
        sim = simulated_unitary(model, plan)
        meta["fitted_states"] = [list(map(float, e.amplitudes)) for e in sim.estimates]
        meta["fit_residuals"] = [float(e.residual) for e in sim.estimates]
        return sim.unitary, meta
    raise ValueError(f"unknown unitary source {source!r}")


def superpose_rows(
    model: ModelParams,
    observables: Sequence[str],
    circuit_kind: str,
    unitary_source: str,
    plan: ShotPlan,
    exact: bool = False,
    repeats: int = 1,
    schedule: TwirlSchedule | None = None,
    unitary_matrix=None,
    dataset_shot_factor: int = 1,
) -> ResultTable:
    """One row per observable: algebraic value next to the circuit estimate.

    With a simulated unitary and ``repeats > 1`` every repeat reruns the
    whole pipeline (expectations, fit, unitary, circuits) on its own seed
    path, so the t interval covers the reconstruction noise as well.
    """
    h = build_model(model)
    oracle = exact_eigenpairs(h)
    try:
        ground = twirled_ground_state(model, schedule)
    except TwirlSimError as exc:
        raise PipelineError("twirl", exc) from exc

    def unitary_for(sub: ShotPlan | None):
        if sub is not None and dataset_shot_factor > 1:
            sub = sub.with_shots(sub.shots * dataset_shot_factor)
        try:
            return _resolve_unitary(unitary_source, model, oracle, sub, unitary_matrix)
        except (TwirlSimError, ValueError) as exc:
            raise PipelineError("unitary", exc) from exc

    def circuit(u, q, sub, lbl):
        try:
            return run_superposition(SuperpositionRun(circuit_kind, ground.state, u, q, sub))
        except TwirlSimError as exc:
            raise PipelineError(f"circuit:{lbl}", exc) from exc

    paulis = [PauliString.parse(lbl) for lbl in observables]
    rebuild = unitary_source == "simulated" and not exact and repeats > 1
    if rebuild:
        diffs = np.zeros((repeats, len(paulis)))
        u = None
        for r in range(repeats):
            sub = plan.child(KEY_REPEAT, r)
            u_r, meta = unitary_for(sub)
            u = u if u is not None else u_r
            for k, (lbl, q) in enumerate(zip(observables, paulis)):
                diffs[r, k] = circuit(u_r, q, sub.child(KEY_CIRCUIT, k), lbl).difference
        meta = dict(per_repeat=diffs.tolist())
    else:
        u, meta = unitary_for(None if exact else plan)

    meta.update(
        model=model.name,
        circuit_kind=circuit_kind,
        unitary_source=unitary_source,
        ground_energy=ground.energy,
        ground_variance=ground.variance,
        unitarization_deviation=u.unitarization_deviation,
    )
    rows = []
    for k, (lbl, q) in enumerate(zip(observables, paulis)):
        alg = algebraic_combination(oracle, u, q, circuit_kind)
        if exact:
            sim, ci, shots = circuit(u, q, None, lbl).difference, 0.0, 0
        elif rebuild:
            sim, ci, shots = float(diffs[:, k].mean()), t_halfwidth(diffs[:, k]), plan.shots
        elif repeats > 1:
            run = SuperpositionRun(circuit_kind, ground.state, u, q, plan.child(KEY_CIRCUIT, k))
            try:
                sim, ci, _ = repeated_runs_ci(run, repeats)
            except TwirlSimError as exc:
                raise PipelineError(f"circuit:{lbl}", exc) from exc
            shots = plan.shots
        else:
            res = circuit(u, q, plan.child(KEY_CIRCUIT, k), lbl)
            sim, ci, shots = res.difference, res.ci95_halfwidth, plan.shots
        rows.append(dict(pauli=lbl, algebraic=alg, simulated=sim, ci95=ci, shots=shots,
                         repeats=1 if exact else repeats, seed=plan.seed))
    return ResultTable(TABLE_COLUMNS, rows, meta)


def expectation_rows(model: ModelParams, labels: Sequence[str], plan: ShotPlan, exact: bool = False,
                     fit: bool = False) -> ResultTable:
    """Twirl every eigenstate and measure ``labels`` on each.

    With ``fit`` the measured values are also turned into real eigenvector
    estimates, stored under ``meta["fitted_states"]``.
    """
    h = build_model(model)
    oracle = exact_eigenpairs(h)
    try:
        outcomes = extract_all_outcomes(h, default_recipes(model))
    except TwirlSimError as exc:
        raise PipelineError("twirl", exc) from exc
    rows, fitted = [], []
    for i, out in enumerate(outcomes):
        data = measure_dataset(out.state, labels, None if exact else plan.child(KEY_DATASET, i))
        if fit:
            try:
                est = fit_state(model, data)
            except TwirlSimError as exc:
                raise PipelineError(f"reconstruct:E{i}", exc) from exc
            fitted.append(dict(amplitudes=list(est.amplitudes), residual=est.residual,
                               sign_convention=est.sign_convention))
        for q, val, shots in data.entries:
            alg = _snap(exact_expectation(q, oracle.eigenvector(i)))
            se = 0.0 if exact else math.sqrt(max(1.0 - val * val, 0.0) / shots)
            rows.append(dict(state=f"E{i}", pauli=q.label, algebraic=alg, simulated=val,
                             ci95=Z95 * se, shots=shots, repeats=1, seed=plan.seed))
    meta = dict(model=model.name, energies=[o.energy for o in outcomes],
                variances=[o.variance for o in outcomes], steps=[len(o.taus) for o in outcomes])
    if fit:
        meta["fitted_states"] = fitted
    return ResultTable(("state",) + TABLE_COLUMNS, rows, meta)


def run_table(table_id: str, shots: int | None = None, seed: int = 0, streams: int = 1,
              exact: bool = False, repeats: int | None = None) -> ResultTable:
    key = table_id.strip().upper()
    if key not in TABLES:
        raise ValueError(f"unknown table {table_id!r}; choose from {', '.join(TABLES)}")
    p = TABLES[key]
    plan = ShotPlan(shots or DEFAULT_SHOTS, seed, streams)
    if p.pipeline == "expectations":
        table = expectation_rows(p.model, p.observables, plan, exact)
    else:
        table = superpose_rows(p.model, p.observables, p.circuit_kind, p.unitary_source, plan,
                               exact=exact, repeats=repeats or p.repeats,
                               dataset_shot_factor=p.dataset_shot_factor)
    table.meta.update(table=key, description=p.description, reference_shots=p.reference_shots)
    return table
