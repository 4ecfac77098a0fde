"""Quasi-periodic solutions of forced KdV: Nash-Moser solver, reducibility and linear stability."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import _core
from ._core import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    Error,
    ParseError,
    PreconditionError,
    SmallDivisorError,
    builtin_names,
    nonlinearity_info,
)

COMMANDS = ("solve", "reduce", "measure", "stability", "verify")

__all__ = [
    "COMMANDS",
    "Check",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "Error",
    "ParseError",
    "PreconditionError",
    "Result",
    "SmallDivisorError",
    "builtin_names",
    "field_array",
    "field_samples",
    "load_config",
    "nonlinearity_info",
    "parse_config",
    "run",
]


@dataclass(frozen=True)
class Check:
    module: str
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class Result:
    exit_code: int
    report: dict[str, Any]
    trace: list[dict[str, float | str]]
    fields: dict[str, dict[str, Any]] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


def _as_text(config: Mapping[str, Any] | str | Path | None) -> str:
    if config is None:
        return "{}"
    if isinstance(config, Path):
        return config.read_text()
    if isinstance(config, str):
        return config
    return json.dumps(config)


def load_config(path: str | Path) -> dict[str, Any]:
    return parse_config(Path(path))[0]


def parse_config(config: Mapping[str, Any] | str | Path | None) -> tuple[dict[str, Any], list[str]]:
    """Validated config with defaults filled in, plus warnings."""
    text, warnings = _core.parse_config(_as_text(config))
    return json.loads(text), list(warnings)


def _cell(v: str) -> float | str:
    try:
        return float(v)
    except ValueError:
        return v


def _trace_rows(text: str) -> list[dict[str, float | str]]:
    return [{k: _cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def run(command: str, config: Mapping[str, Any] | str | Path | None = None) -> Result:
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    code, report, trace, fields, checks = _core.run(command, _as_text(config))
    return Result(
        exit_code=code,
        report=json.loads(report),
        trace=_trace_rows(trace),
        fields={k: json.loads(v) for k, v in fields.items()},
        checks=[Check(*c) for c in checks],
    )


def field_array(f: Mapping[str, Any]) -> np.ndarray:
    """Coefficients with shape (2 n_phi + 1,) * nu + (2 n_x + 1,); index n is mode 0."""
    shape = (2 * f["n_phi"] + 1,) * f["nu"] + (2 * f["n_x"] + 1,)
    return (np.asarray(f["re"]) + 1j * np.asarray(f["im"])).reshape(shape)


def field_samples(f: Mapping[str, Any]) -> np.ndarray:
    """Values on the default equispaced grid, x fastest."""
    return _core.synthesize(json.dumps(f))
