"""Finite state spaces carrying a reference measure and an m-symmetric
sub-Markov generator, and their jump/killing decomposition.

A model with weights ``m`` and generator ``L`` has jump weights
``J[i, j] = m[i] * L[i, j]`` (``i != j``) and killing masses
``kappa[i] = -m[i] * sum_j L[i, j]``. States are the integers ``0..n-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

SYMMETRY_RTOL = 1e-12
ROW_ATOL = 1e-12


class ModelError(Exception):
    """Base class for model construction and file errors."""


class InvalidModelError(ModelError):
    """A model violates symmetry, positivity or the sub-Markov property."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(report.summary())


class ModelFileError(ModelError):
    """The model file is unreadable or is not JSON."""


class SchemaError(ModelError):
    """The model file does not match the model schema."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteModel:
    m: np.ndarray
    L: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        m = _frozen(self.m)
        L = _frozen(self.L)
        if m.ndim != 1 or m.size < 1:
            raise ValueError("m must be a nonempty vector")
        if L.shape != (m.size, m.size):
            raise ValueError(f"L must be {m.size}x{m.size}, got {L.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(L))):
            raise ValueError("model entries must be finite")
        if self.labels is not None and len(self.labels) != m.size:
            raise ValueError("labels must have one entry per state")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "L", L)

    @property
    def n(self) -> int:
        return self.m.size

    def __repr__(self):
        return f"FiniteModel(n={self.n})"


@dataclass(frozen=True, eq=False)
class BeurlingDenyData:
    J: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        J = _frozen(self.J)
        kappa = _frozen(self.kappa)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or kappa.shape != (J.shape[0],):
            raise ValueError("J must be square and kappa must match its size")
        if np.any(J < 0) or np.any(kappa < 0):
            raise ValueError("J and kappa must be nonnegative")
        if np.any(np.diag(J) != 0):
            raise ValueError("J must have zero diagonal")
        scale = np.maximum(np.abs(J), np.abs(J.T))
        if np.any(np.abs(J - J.T) > SYMMETRY_RTOL * scale):
            raise ValueError("J must be symmetric")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "kappa", kappa)

    @property
    def n(self) -> int:
        return self.kappa.size


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: tuple[int, ...] | None = None
    magnitude: float = 0.0


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    killing_states: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        bad = [f"{c.name} (worst {c.worst}, {c.magnitude:.3g})" for c in self.checks if not c.passed]
        return "model valid" if not bad else "model invalid: " + "; ".join(bad)


def _worst(violation: np.ndarray, name: str, threshold: np.ndarray | float) -> CheckResult:
    excess = violation - threshold
    idx = np.unravel_index(int(np.argmax(excess)), violation.shape)
    passed = bool(excess[idx] <= 0)
    return CheckResult(name, passed, None if passed else tuple(int(i) for i in idx), float(violation[idx]))


def validate_model(model: FiniteModel) -> ValidationReport:
    """Check positivity of ``m``, off-diagonal signs, m-symmetry and row sums.

    Tolerances are relative to the largest ``|L_ij|`` of the row involved.
    """
    m, L = model.m, model.L
    row_scale = np.max(np.abs(L), axis=1)
    report = ValidationReport()
    report.checks.append(_worst(-m, "positive-measure", 0.0))

    off = L - np.diag(np.diag(L))
    report.checks.append(_worst(-off, "nonnegative-rates", SYMMETRY_RTOL * row_scale[:, None]))

    flux = m[:, None] * L
    pair_scale = np.maximum(np.abs(flux), np.abs(flux.T))
    report.checks.append(_worst(np.abs(flux - flux.T), "m-symmetry", SYMMETRY_RTOL * pair_scale))

    rows = L.sum(axis=1)
    report.checks.append(_worst(rows, "sub-markov", ROW_ATOL * np.maximum(1.0, row_scale)))
    report.killing_states = tuple(int(i) for i in np.flatnonzero(rows < -ROW_ATOL * np.maximum(1.0, row_scale)))
    return report


def decompose(model: FiniteModel) -> BeurlingDenyData:
    report = validate_model(model)
    if not report.passed:
        raise InvalidModelError(report)
    m, L = model.m, model.L
    J = m[:, None] * L
    np.fill_diagonal(J, 0.0)
    J = np.clip(0.5 * (J + J.T), 0.0, None)
    kappa = -m * L.sum(axis=1)
    # deficiencies within rounding of zero are not killing
    row_scale = np.max(np.abs(L), axis=1)
    kappa[kappa <= ROW_ATOL * m * np.maximum(1.0, row_scale)] = 0.0
    return BeurlingDenyData(J, kappa)


def assemble(bd: BeurlingDenyData, m) -> FiniteModel:
    m = np.asarray(m, dtype=float)
    if m.shape != (bd.n,) or np.any(m <= 0):
        raise ValueError("m must be a positive vector matching the decomposition")
    L = bd.J / m[:, None]
    np.fill_diagonal(L, -(bd.J.sum(axis=1) + bd.kappa) / m)
    return FiniteModel(m, L)


def random_model(seed: int, n: int, density: float = 0.5, killing: bool = False) -> FiniteModel:
    """Seeded random model: ``m`` uniform on [0.5, 2], symmetric jump weights
    in (0, 1] on a random edge set of the requested density, optional
    killing uniform on [0, 1]. Connectivity is not enforced."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.5, 2.0, n)
    iu = np.triu_indices(n, 1)
    edges = rng.random(iu[0].size) < density
    weights = 1.0 - rng.random(iu[0].size)
    J = np.zeros((n, n))
    J[iu] = np.where(edges, weights, 0.0)
    J = J + J.T
    kappa = rng.uniform(0.0, 1.0, n) if killing else np.zeros(n)
    return assemble(BeurlingDenyData(J, kappa), m)


# ---------------------------------------------------------------------------
# model files

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
MODEL_SCHEMA = {
    "type": "object",
    "required": ["n", "m"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "L": _MATRIX,
        "J": {"type": "array", "items": {"type": "array", "items": {"type": "number", "minimum": 0}}},
        "kappa": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
    "oneOf": [
        {"required": ["L"], "not": {"anyOf": [{"required": ["J"]}, {"required": ["kappa"]}]}},
        {"required": ["J", "kappa"], "not": {"required": ["L"]}},
    ],
}


def model_from_dict(data) -> FiniteModel:
    try:
        jsonschema.validate(data, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or None
        raise SchemaError(f"{where or 'model'}: {exc.message}", where) from None
    n = data["n"]
    for key in ("m", "kappa", "labels"):
        if key in data and len(data[key]) != n:
            raise SchemaError(f"{key}: expected {n} entries, got {len(data[key])}", key)
    for key in ("L", "J"):
        if key in data and (len(data[key]) != n or any(len(row) != n for row in data[key])):
            raise SchemaError(f"{key}: expected an {n}x{n} array", key)
    labels = tuple(data["labels"]) if "labels" in data else None
    if "L" in data:
        model = FiniteModel(data["m"], data["L"], labels)
    else:
        try:
            bd = BeurlingDenyData(data["J"], data["kappa"])
        except ValueError as exc:
            raise InvalidModelError(
                ValidationReport([CheckResult(f"decomposition: {exc}", False)])
            ) from None
        base = assemble(bd, data["m"])
        model = FiniteModel(base.m, base.L, labels)
    report = validate_model(model)
    if not report.passed:
        raise InvalidModelError(report)
    return model


def model_to_dict(model: FiniteModel, form: str = "L") -> dict:
    out = {"n": model.n, "m": model.m.tolist()}
    if form == "L":
        out["L"] = model.L.tolist()
    elif form == "J":
        bd = decompose(model)
        out["J"] = bd.J.tolist()
        out["kappa"] = bd.kappa.tolist()
    else:
        raise ValueError("form must be 'L' or 'J'")
    if model.labels is not None:
        out["labels"] = list(model.labels)
    return out


def load_model(path) -> FiniteModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(data)


def save_model(model: FiniteModel, path, form: str = "L") -> None:
    # json writes floats with repr, i.e. at most 17 significant digits and exact round-trip
    Path(path).write_text(json.dumps(model_to_dict(model, form), indent=1) + "\n", encoding="utf-8")
