"""Config-driven pipelines and result serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import ConfigError, PipelineError, TwirlSimError
from .experiments import (
    ResultTable,
    default_recipes,
    expectation_rows,
    fit_labels,
    run_table,
    superpose_rows,
)
from .oracle import exact_eigenpairs
from .pauli import ModelParams, build_model
from .statevector import ShotPlan, StateVector
from .twirl import run_schedule

SIG_DIGITS = 9


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _round(x):
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(f"{float(x):.{SIG_DIGITS}g}")
        return v if math.isfinite(v) else str(v)
    return x


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(row[c]) for c in table.columns])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    doc = {"columns": list(table.columns), "rows": [_round(r) for r in table.rows], "meta": _round(table.meta)}
    return json.dumps(doc, indent=2) + "\n"


def render(table: ResultTable, fmt: str) -> str:
    return to_json(table) if fmt == "json" else to_csv(table)


def read_matrix(path: str | Path) -> np.ndarray:
    """Square matrix from text: one row per line, entries split by commas or spaces.

    Entries may be complex in Python syntax (``0.5-0.1j``).
    """
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([complex(tok.replace("i", "j")) for tok in re.split(r"[,\s]+", line) if tok])
    m = np.array(rows, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix in {path} is not square")
    return m


def eigenstate_pipeline(cfg: ExperimentConfig) -> ResultTable:
    h = build_model(cfg.model)
    psi0, sched = default_recipes(cfg.model)[0]
    if cfg.initial is not None:
        psi0 = StateVector.basis(cfg.initial)
    sched = cfg.schedule or sched
    try:
        out = run_schedule(psi0, h, sched)
    except TwirlSimError as exc:
        raise PipelineError("twirl", exc) from exc
    oracle = exact_eigenpairs(h)
    nearest = int(np.argmin(np.abs(oracle.eigenvalues - out.energy)))
    rows = [
        dict(step=k + 1, tau=out.taus[k], offset=out.offsets[k], energy=out.energy_history[k],
             variance=out.variance_history[k], success_probability=out.step_probabilities[k])
        for k in range(len(out.taus))
    ]
    meta = dict(model=cfg.model.name, final_energy=out.energy, final_variance=out.variance,
                success_probability=out.success_probability, nearest_eigenvalue=float(oracle.eigenvalues[nearest]),
                eigenstate_index=nearest, amplitudes_real=list(out.state.amplitudes.real),
                amplitudes_imag=list(out.state.amplitudes.imag), seed=cfg.seed)
    return ResultTable(("step", "tau", "offset", "energy", "variance", "success_probability"), rows, meta)


def reconstruct_pipeline(cfg: ExperimentConfig) -> ResultTable:
    labels = cfg.observables or fit_labels(cfg.model)
    plan = ShotPlan(cfg.shots, cfg.seed, cfg.streams)
    return expectation_rows(cfg.model, labels, plan, cfg.exact, fit=True)


def run_config(cfg: ExperimentConfig | str | Path, **overrides) -> ResultTable:
    """Execute the pipeline a config describes; ``overrides`` replace config fields."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = load_config(cfg)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if cfg.pipeline == "table":
        return run_table(cfg.table_id, cfg.shots, cfg.seed, cfg.streams, cfg.exact,
                         cfg.repeats if cfg.repeats > 1 else None)
    if cfg.pipeline == "eigenstate":
        return eigenstate_pipeline(cfg)
    if cfg.pipeline == "reconstruct":
        return reconstruct_pipeline(cfg)
    # superpose
    matrix = None
    if cfg.unitary_source == "file":
        try:
            matrix = read_matrix(cfg.unitary_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"unitary_file: {exc}") from None
    labels = cfg.observables or (("X", "Z", "Y") if cfg.model.kind == "single_qubit" else ("XI", "YI"))
    schedule = cfg.schedule
    plan = ShotPlan(cfg.shots, cfg.seed, cfg.streams)
    return superpose_rows(cfg.model, labels, cfg.circuit, cfg.unitary_source, plan, exact=cfg.exact,
                          repeats=cfg.repeats, schedule=schedule, unitary_matrix=matrix)


def oracle_table(model: ModelParams) -> ResultTable:
    o = exact_eigenpairs(build_model(model))
    dim = o.dim
    cols = ("index", "energy") + tuple(f"amp_{k:0{model.n_qubits}b}" for k in range(dim))
    rows = []
    for i in range(dim):
        v = o.eigenvector(i)
        row = dict(index=i, energy=float(o.eigenvalues[i]))
        for k in range(dim):
            row[cols[2 + k]] = float(v[k].real)
        rows.append(row)
    return ResultTable(cols, rows, dict(model=model.name))
