"""Flat ``key = value`` experiment configuration.

Example::

    # ground state of H2
    model.kind = h2
    pipeline = eigenstate
    schedule.mode = adaptive
    schedule.steps = 4
    schedule.initial = 10
    seed = 7

Lines starting with ``#`` are comments.  Keys use dots for grouping; no
nested document format is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvalidLabel, InvalidParams
from .pauli import ModelParams, PauliString
from .twirl import TwirlSchedule

PIPELINES = ("eigenstate", "reconstruct", "superpose", "table")
UNITARY_SOURCES = ("algebraic", "simulated", "file")
FORMATS = ("csv", "json")

KNOWN_KEYS = {
    "model.kind", "model.J", "model.a",
    "pipeline", "table.id",
    "schedule.mode", "schedule.steps", "schedule.tau0", "schedule.taus", "schedule.grid",
    "schedule.offset", "schedule.initial",
    "shots", "repeats", "seed", "streams", "exact",
    "observables", "circuit", "unitary_source", "unitary_file",
    "output_path", "output_format",
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    pipeline: str
    schedule: TwirlSchedule | None = None
    initial: str | None = None
    shots: int = 10**6
    repeats: int = 1
    seed: int = 0
    streams: int = 1
    exact: bool = False
    observables: tuple[str, ...] = ()
    circuit: str = "real_part"
    unitary_source: str = "algebraic"
    unitary_file: str | None = None
    table_id: str | None = None
    output_path: str | None = None
    output_format: str = "csv"
    extra: dict = field(default_factory=dict)


def parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _int(pairs, key, default, minimum=None):
    if key not in pairs:
        return default
    try:
        v = int(float(pairs[key])) if "e" in pairs[key].lower() else int(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {pairs[key]!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {v}")
    return v


def _float(pairs, key, default=None):
    if key not in pairs:
        return default
    try:
        v = float(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {pairs[key]!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return v


def _floats(pairs, key):
    if key not in pairs or not pairs[key]:
        return ()
    try:
        return tuple(float(x) for x in pairs[key].split(","))
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {pairs[key]!r}") from None


def _bool(pairs, key, default=False):
    if key not in pairs:
        return default
    v = pairs[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {pairs[key]!r}")


def _choice(pairs, key, options, default):
    v = pairs.get(key, default)
    if v not in options:
        raise ConfigError(f"{key}: expected one of {', '.join(options)}, got {v!r}")
    return v


def parse_labels(text: str, n_qubits: int | None = None) -> tuple[str, ...]:
    labels = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        try:
            q = PauliString.parse(tok)
        except InvalidLabel as exc:
            raise ConfigError(f"observables: malformed label {tok!r} (offending token {exc.token!r})") from None
        if n_qubits is not None and q.n_qubits != n_qubits:
            raise ConfigError(f"observables: label {tok!r} has {q.n_qubits} qubits, model has {n_qubits}")
        labels.append(q.label)
    return tuple(labels)


def parse_model(pairs) -> ModelParams:
    kind = pairs.get("model.kind", "h2")
    try:
        if kind == "single_qubit":
            return ModelParams.single_qubit(_float(pairs, "model.J", 1.0))
        if kind == "h2":
            a = _floats(pairs, "model.a")
            return ModelParams.h2(a or None)
    except InvalidParams as exc:
        raise ConfigError(f"model: {exc}") from None
    raise ConfigError(f"model.kind: expected single_qubit or h2, got {kind!r}")


def parse_schedule(pairs) -> TwirlSchedule | None:
    if not any(k.startswith("schedule.") and k != "schedule.initial" for k in pairs):
        return None
    mode = _choice(pairs, "schedule.mode", ("fixed", "adaptive", "explicit"), "adaptive")
    taus = _floats(pairs, "schedule.taus")
    steps = _int(pairs, "schedule.steps", len(taus) if mode == "explicit" and taus else 4, minimum=1)
    offset = _float(pairs, "schedule.offset")
    try:
        return TwirlSchedule(
            mode=mode,
            steps=steps,
            tau0=_float(pairs, "schedule.tau0", 1.0),
            taus=taus,
            adaptive_grid=_floats(pairs, "schedule.grid"),
            offset=offset,
        )
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    pairs = parse_pairs(text)
    model = parse_model(pairs)
    pipeline = _choice(pairs, "pipeline", PIPELINES, "eigenstate")
    initial = pairs.get("schedule.initial")
    if initial is not None and (len(initial) != model.n_qubits or set(initial) - {"0", "1"}):
        raise ConfigError(f"schedule.initial: expected {model.n_qubits} bits, got {initial!r}")
    table_id = pairs.get("table.id")
    if pipeline == "table" and not table_id:
        raise ConfigError("pipeline = table needs table.id")
    unitary_source = _choice(pairs, "unitary_source", UNITARY_SOURCES, "algebraic")
    unitary_file = pairs.get("unitary_file")
    if unitary_source == "file" and not unitary_file:
        raise ConfigError("unitary_source = file needs unitary_file")
    seed = _int(pairs, "seed", 0, minimum=0)
    if seed >= 2**64:
        raise ConfigError("seed: must fit in 64 bits")
    return ExperimentConfig(
        model=model,
        pipeline=pipeline,
        schedule=parse_schedule(pairs),
        initial=initial,
        shots=_int(pairs, "shots", 10**6, minimum=1),
        repeats=_int(pairs, "repeats", 1, minimum=1),
        seed=seed,
        streams=_int(pairs, "streams", 1, minimum=1),
        exact=_bool(pairs, "exact"),
        observables=parse_labels(pairs.get("observables", ""), model.n_qubits),
        circuit=_choice(pairs, "circuit", ("real_part", "imag_part"), "real_part"),
        unitary_source=unitary_source,
        unitary_file=unitary_file,
        table_id=table_id,
        output_path=pairs.get("output_path"),
        output_format=_choice(pairs, "output_format", FORMATS, "csv"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
