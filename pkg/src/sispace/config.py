"""Analysis configs: a TOML file with lattices, generators, tasks and output.

Example::

    schema_version = 1

    [lattices]
    Z = [[1.0]]
    H = [[0.5]]

    [generators.chi]
    family = "indicator_box"
    lower = [-0.5]
    upper = [0.5]

    [[tasks]]
    kind = "classify"
    generators = ["chi"]
    lattice = "Z"
    n_per_axis = 512

    [output]
    path = "report.json"
    format = "json"

A task's ``lattice`` is the lattice of shifts; its Gramian is periodized
over the dual.  Unknown keys are rejected with the dotted path of the
offending field.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigInvalid, SingularBasis
from .generators import _FAMILIES, GeneratorSpec, spec_from_dict
from .lattice import Lattice
from .scenarios import EXAMPLES

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCHEMA_VERSION = 1
MAX_PER_AXIS = 4096

_TOP_KEYS = {"schema_version", "title", "lattices", "generators", "tasks", "output"}
_OUTPUT_KEYS = {"path", "format"}
_FORMATS = ("json", "csv")

# allowed keys and defaults per task kind; None marks a required key
_TASKS: dict[str, dict[str, Any]] = {
    "classify": {
        "generators": None,
        "lattice": None,
        "n_per_axis": 256,
        "eps_tail": 1e-10,
        "tau_rank": "auto",
        "t_max": 1e6,
    },
    "invariance": {
        "generators": None,
        "lattice": None,
        "superlattice": None,
        "n_per_axis": 256,
        "eps_tail": 1e-10,
        "tau_rank": "auto",
        "gamma_frame": False,
        "ledger": False,
    },
    "sobolev": {
        "generator": None,
        "s": None,
        "mode": "fourier_integral",
        "ladder": {"lo": 100.0, "hi": 1e5, "count": 16},
    },
    "moment": {
        "generator": None,
        "ladder": {"lo": 100.0, "hi": 1e5, "count": 16},
    },
    "kernel_ratio": {
        "lattice": None,
        "s": None,
        "kernel": ["G", "H"],
        "r_lo": 1.0,
        "r_hi": 100.0,
    },
    "paper_example": {
        "id": None,
        "overrides": {},
    },
}
_SOBOLEV_MODES = ("fourier_integral", "gagliardo")


@dataclass
class AnalysisConfig:
    """Validated config; ``raw`` is the parsed document echoed into reports."""

    lattices: dict[str, Lattice]
    generators: dict[str, GeneratorSpec]
    tasks: list[dict[str, Any]]
    output: dict[str, Any]
    raw: dict[str, Any] = field(repr=False)
    schema_version: int = SCHEMA_VERSION


def _reject_unknown(table: dict, allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigInvalid(f"{path}.{key}" if path else key, "unknown key")


def _number(value, path: str, lo: float | None = None, hi: float | None = None, open_lo=False, open_hi=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(path, f"expected a number, got {value!r}")
    v = float(value)
    if math.isnan(v):
        raise ConfigInvalid(path, "NaN is not allowed")
    if lo is not None and (v < lo or (open_lo and v == lo)):
        raise ConfigInvalid(path, f"{v:g} is below the allowed range")
    if hi is not None and (v > hi or (open_hi and v == hi)):
        raise ConfigInvalid(path, f"{v:g} is above the allowed range")
    return v


def _parse_lattice(value, path: str) -> Lattice:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigInvalid(path, "basis must be a number or a square matrix of numbers") from None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigInvalid(path, f"basis must be square, got shape {arr.shape}")
    try:
        return Lattice(arr)
    except (SingularBasis, ValueError) as exc:
        raise ConfigInvalid(path, str(exc)) from None


def _parse_generator(table, path: str) -> GeneratorSpec:
    if not isinstance(table, dict):
        raise ConfigInvalid(path, "generator must be a table")
    family = table.get("family")
    if family not in _FAMILIES:
        raise ConfigInvalid(f"{path}.family", f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
    cls = _FAMILIES[family]
    allowed = {f.name for f in dataclasses.fields(cls) if f.init} | {"family"}
    if family == "tabulated":
        allowed = (allowed - {"values"}) | {"values_re", "values_im"}
    _reject_unknown(table, allowed, path)
    try:
        return spec_from_dict(dict(table))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigInvalid(path, f"cannot build {family}: {exc}") from None


def _ladder(value, path: str) -> list[float]:
    if isinstance(value, dict):
        _reject_unknown(value, {"lo", "hi", "count"}, path)
        lo = _number(value.get("lo", 100.0), f"{path}.lo", 0.0, open_lo=True)
        hi = _number(value.get("hi", 1e5), f"{path}.hi", lo, open_lo=True)
        count = value.get("count", 16)
        if not isinstance(count, int) or count < 6:
            raise ConfigInvalid(f"{path}.count", "need an integer of at least 6")
        return np.geomspace(lo, hi, count).tolist()
    if isinstance(value, list):
        out = [_number(v, f"{path}[{i}]", 0.0, open_lo=True) for i, v in enumerate(value)]
        if len(out) < 6:
            raise ConfigInvalid(path, "need at least 6 ladder points")
        return sorted(out)
    raise ConfigInvalid(path, "ladder must be a list or a {lo, hi, count} table")


def _s_list(value, path: str) -> list[float]:
    vals = value if isinstance(value, list) else [value]
    if not vals:
        raise ConfigInvalid(path, "empty list")
    return [_number(v, f"{path}[{i}]" if isinstance(value, list) else path, 0.0, 1.0, True, True) for i, v in enumerate(vals)]


def _name_ref(value, pool: dict, path: str, what: str) -> str:
    if not isinstance(value, str):
        raise ConfigInvalid(path, f"expected a {what} name")
    if value not in pool:
        raise ConfigInvalid(path, f"undefined {what} {value!r}")
    return value


def _parse_task(task, idx: int, lattices: dict, generators: dict) -> dict[str, Any]:
    path = f"tasks[{idx}]"
    if not isinstance(task, dict):
        raise ConfigInvalid(path, "task must be a table")
    kind = task.get("kind")
    if kind not in _TASKS:
        raise ConfigInvalid(f"{path}.kind", f"unknown task kind {kind!r}; choose from {sorted(_TASKS)}")
    spec = _TASKS[kind]
    _reject_unknown(task, set(spec) | {"kind", "name"}, path)
    out: dict[str, Any] = {"kind": kind, "name": str(task.get("name", f"{kind}-{idx}"))}
    for key, default in spec.items():
        p = f"{path}.{key}"
        if key not in task:
            if default is None:
                raise ConfigInvalid(p, "required key is missing")
            out[key] = _ladder(default, p) if key == "ladder" else default
            continue
        val = task[key]
        if key == "generators":
            if not isinstance(val, list) or not val:
                raise ConfigInvalid(p, "expected a non-empty list of generator names")
            out[key] = [_name_ref(v, generators, f"{p}[{i}]", "generator") for i, v in enumerate(val)]
        elif key == "generator":
            out[key] = _name_ref(val, generators, p, "generator")
        elif key in ("lattice", "superlattice"):
            out[key] = _name_ref(val, lattices, p, "lattice")
        elif key == "n_per_axis":
            if isinstance(val, bool) or not isinstance(val, int) or not 2 <= val <= MAX_PER_AXIS:
                raise ConfigInvalid(p, f"must be an integer in [2, {MAX_PER_AXIS}]")
            out[key] = val
        elif key == "eps_tail":
            out[key] = _number(val, p, 0.0, open_lo=True)
        elif key == "tau_rank":
            out[key] = "auto" if val == "auto" else _number(val, p, 0.0)
        elif key == "t_max":
            out[key] = _number(val, p, 1.0)
        elif key in ("gamma_frame", "ledger"):
            if not isinstance(val, bool):
                raise ConfigInvalid(p, "expected true or false")
            out[key] = val
        elif key == "s":
            out[key] = _s_list(val, p)
        elif key == "mode":
            if val not in _SOBOLEV_MODES:
                raise ConfigInvalid(p, f"mode must be one of {_SOBOLEV_MODES}")
            out[key] = val
        elif key == "ladder":
            out[key] = _ladder(val, p)
        elif key == "kernel":
            ks = val if isinstance(val, list) else [val]
            if not ks or any(k not in ("G", "H") for k in ks):
                raise ConfigInvalid(p, "kernel must be 'G', 'H' or a list of them")
            out[key] = list(ks)
        elif key in ("r_lo", "r_hi"):
            out[key] = _number(val, p, 0.0, open_lo=True)
        elif key == "id":
            if val not in EXAMPLES:
                raise ConfigInvalid(p, f"unknown example {val!r}; choose from {sorted(EXAMPLES)}")
            out[key] = val
        elif key == "overrides":
            if not isinstance(val, dict):
                raise ConfigInvalid(p, "overrides must be a table")
            out[key] = dict(val)
    if kind == "paper_example":
        allowed = EXAMPLES[out["id"]][1]
        for k in out["overrides"]:
            if k not in allowed:
                raise ConfigInvalid(f"{path}.overrides.{k}", f"not a parameter of {out['id']}; choose from {sorted(allowed)}")
    if kind == "kernel_ratio" and out["r_hi"] < out["r_lo"]:
        raise ConfigInvalid(f"{path}.r_hi", "must not be below r_lo")
    if kind in ("classify", "invariance"):
        dims = {generators[g].dim for g in out["generators"]} | {lattices[out["lattice"]].dim}
        if kind == "invariance":
            dims.add(lattices[out["superlattice"]].dim)
        if len(dims) != 1:
            raise ConfigInvalid(f"{path}.generators", "generators and lattices disagree on dimension")
    return out


def validate(raw: dict) -> AnalysisConfig:
    """Check a parsed config document and build its objects."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("", "config must be a table")
    _reject_unknown(raw, _TOP_KEYS, "")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigInvalid("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    lat_tab = raw.get("lattices", {})
    if not isinstance(lat_tab, dict):
        raise ConfigInvalid("lattices", "must be a table of named bases")
    lattices = {name: _parse_lattice(v, f"lattices.{name}") for name, v in lat_tab.items()}
    gen_tab = raw.get("generators", {})
    if not isinstance(gen_tab, dict):
        raise ConfigInvalid("generators", "must be a table of named generators")
    generators = {name: _parse_generator(v, f"generators.{name}") for name, v in gen_tab.items()}
    task_list = raw.get("tasks", [])
    if not isinstance(task_list, list):
        raise ConfigInvalid("tasks", "must be an array of tables")
    tasks = [_parse_task(t, i, lattices, generators) for i, t in enumerate(task_list)]
    out_tab = raw.get("output", {})
    if not isinstance(out_tab, dict):
        raise ConfigInvalid("output", "must be a table")
    _reject_unknown(out_tab, _OUTPUT_KEYS, "output")
    fmt = out_tab.get("format", "json")
    if fmt not in _FORMATS:
        raise ConfigInvalid("output.format", f"format must be one of {_FORMATS}")
    path = out_tab.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigInvalid("output.path", "expected a string")
    return AnalysisConfig(
        lattices=lattices,
        generators=generators,
        tasks=tasks,
        output={"path": path, "format": fmt},
        raw=raw,
        schema_version=version,
    )


def loads(text: str) -> AnalysisConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid("", f"not valid TOML: {exc}") from None
    return validate(raw)


def load(path: str | Path) -> AnalysisConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(str(path), f"cannot read config: {exc.strerror or exc}") from None
    return loads(text)
