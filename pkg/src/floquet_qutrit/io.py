"""Run configuration, manifests and CSV output."""

from __future__ import annotations

import csv
import difflib
import json
import math
import platform
from dataclasses import asdict, dataclass, field, fields
from importlib import metadata
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema
import numpy as np
import yaml

from .engine import UX_MODES, FloquetParams
from .phase_diagram import OBSERVABLES


class ConfigError(ValueError):
    """A configuration document or flag set failed validation."""


@dataclass
class RunConfig:
    L: int
    theta_x: float
    theta_z: float
    steps: int = 0
    epsilon: float = 0.0
    measure_every: int = 1
    ux_mode: str = "exact"
    engine: str = "exact"
    mode: str = "finite"
    tebd_tol: float = 1e-6
    chi_cap: int = 600
    trotter_substeps: int = 1
    grid_x: str | None = None
    grid_z: str | None = None
    observables: list[str] = field(default_factory=lambda: list(OBSERVABLES))
    out: str | None = None

    def __post_init__(self):
        checks = [
            (self.L >= 2, "L", f"chain needs at least two sites, got {self.L}"),
            (self.steps >= 0, "steps", "must be nonnegative"),
            (self.measure_every >= 1, "measure_every", "must be a positive stride"),
            (self.ux_mode in UX_MODES, "ux_mode", f"must be one of {UX_MODES}"),
            (self.engine in ("exact", "mps"), "engine", "must be 'exact' or 'mps'"),
            (self.mode in ("finite", "infinite"), "mode", "must be 'finite' or 'infinite'"),
            (self.tebd_tol > 0, "tebd_tol", "must be positive"),
            (self.chi_cap >= 1, "chi_cap", "must be at least 1"),
            (self.trotter_substeps >= 1, "trotter_substeps", "must be at least 1"),
            (set(self.observables) <= set(OBSERVABLES), "observables", f"entries must come from {OBSERVABLES}"),
        ]
        for ok, name, message in checks:
            if not ok:
                raise ConfigError(f"field '{name}': {message}")
        for name in ("theta_x", "theta_z", "epsilon", "tebd_tol"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"field '{name}': must be finite")
        for name in ("grid_x", "grid_z"):
            if getattr(self, name) is not None:
                parse_grid(getattr(self, name), name)

    def params(self) -> FloquetParams:
        return FloquetParams(
            L=self.L,
            theta_x=self.theta_x,
            theta_z=self.theta_z,
            epsilon=self.epsilon,
            steps=self.steps,
            measure_every=self.measure_every,
            ux_mode=self.ux_mode,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {
    "L": int,
    "steps": int,
    "measure_every": int,
    "chi_cap": int,
    "trotter_substeps": int,
    "theta_x": float,
    "theta_z": float,
    "epsilon": float,
    "tebd_tol": float,
    "ux_mode": str,
    "engine": str,
    "mode": str,
    "grid_x": str,
    "grid_z": str,
    "out": str,
    "observables": list,
}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if value is None and name in ("grid_x", "grid_z", "out"):
        return None
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or float(value) != int(value):
            raise ConfigError(f"field '{name}': expected an integer, got {value!r}")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{name}': expected a number, got {value!r}")
        return float(value)
    if kind is list:
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"field '{name}': expected a list of names, got {value!r}")
        return list(value)
    if not isinstance(value, str):
        raise ConfigError(f"field '{name}': expected a string, got {value!r}")
    return value


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    """Validate a mapping into a :class:`RunConfig`; unknown keys are rejected."""
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration must be a mapping of field names to values")
    valid = [f.name for f in fields(RunConfig)]
    for key in doc:
        if key not in valid:
            close = difflib.get_close_matches(str(key), valid, n=1, cutoff=0.0)
            hint = f"; did you mean '{close[0]}'?" if close else ""
            raise ConfigError(f"unknown key '{key}'{hint}")
    missing = [k for k in ("L", "theta_x", "theta_z") if k not in doc]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    return RunConfig(**{k: _coerce(k, v) for k, v in doc.items()})


def parse_config(source: str | Path | Mapping[str, Any]) -> RunConfig:
    """Load a RunConfig from a JSON/YAML file path or an already parsed mapping."""
    if isinstance(source, Mapping):
        return config_from_dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from None
    try:
        return config_from_dict(doc or {})
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def parse_grid(spec: str, name: str = "grid") -> np.ndarray:
    """'a:b:n' -> n evenly spaced points from a to b inclusive."""
    parts = spec.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"field '{name}': expected 'start:stop:count', got {spec!r}") from None
    if n < 1:
        raise ConfigError(f"field '{name}': count must be positive")
    return np.linspace(a, b, n)


# -- manifests -----------------------------------------------------------------

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["kind", "config", "code_version", "engine", "timings", "diagnostics", "outputs"],
    "properties": {
        "kind": {"type": "string"},
        "config": {"type": "object"},
        "code_version": {"type": "string"},
        "engine": {"type": "string"},
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
        "diagnostics": {"type": "object"},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "environment": {"type": "object"},
    },
}


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    kind: str
    config: dict
    engine: str
    timings: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    code_version: str = field(default_factory=code_version)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["environment"] = {"python": platform.python_version(), "numpy": np.__version__}
        return doc

    def write(self, path: str | Path) -> Path:
        doc = self.to_dict()
        validate_manifest(doc)
        path = Path(path)
        path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        return path


def validate_manifest(doc: Mapping[str, Any]) -> None:
    jsonschema.validate(_jsonable(doc), MANIFEST_SCHEMA)


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# -- CSV -----------------------------------------------------------------------


def format_number(x) -> str:
    """Fixed repr for CSV cells: integers stay integers, floats use 17 significant digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write rows with a header line; returns the number of data rows."""
    path = Path(path)
    count = 0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
            count += 1
    return count


def write_columns(path: str | Path, columns: Mapping[str, Sequence]) -> int:
    header = list(columns)
    return write_csv(path, header, zip(*columns.values()))


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Whitespace-separated matrix (gnuplot ``matrix`` format)."""
    lines = [" ".join(format_number(v) for v in row) for row in np.asarray(matrix)]
    Path(path).write_text("\n".join(lines) + "\n")
