"""Report assembly and emission as JSON or CSV tables.

A report is a plain nested dict of JSON types.  Everything that changes
between otherwise identical runs (start time, wall-clock seconds, thread
count, kernel backend) lives under the single ``run_info`` key, so two runs
of one config serialize to identical bytes once that key is dropped.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from collections.abc import Iterator
from pathlib import Path

import numpy as np

from . import __version__
from .errors import IoFailure

__all__ = [
    "VOLATILE_KEYS",
    "csv_tables",
    "emit",
    "from_json",
    "load_report",
    "new_report",
    "plain",
    "same_report",
    "strip_volatile",
    "to_json",
]

VOLATILE_KEYS = ("run_info",)
FORMATS = ("json", "csv")


def plain(obj):
    """Recursively convert numpy scalars/arrays, tuples and paths to JSON types."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    # TOML dates and anything else without a JSON form
    return str(obj)


def new_report(config_echo: dict) -> dict:
    return {
        "toolkit": "sispace",
        "version": __version__,
        "config": plain(config_echo),
        "tasks": [],
        "run_info": {},
    }


def to_json(report: dict) -> str:
    # non-finite floats are written as Infinity/NaN, which json.loads reads back
    return json.dumps(plain(report), sort_keys=True, indent=2, allow_nan=True) + "\n"


def from_json(text: str) -> dict:
    return json.loads(text)


def load_report(path: str | Path) -> dict:
    try:
        return from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise IoFailure(f"{path} is not a JSON report: {exc}") from None


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}


def _equal(a, b) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_equal(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return type(a) is type(b) and a == b


def same_report(a: dict, b: dict, ignore_volatile: bool = True) -> bool:
    """Structural equality (NaN equals NaN), optionally ignoring ``run_info``."""
    if ignore_volatile:
        a, b = strip_volatile(a), strip_volatile(b)
    return _equal(plain(a), plain(b))


# ------------------------------------------------------------------ csv


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", str(text)).strip("_") or "task"


def _is_estimate(obj) -> bool:
    return isinstance(obj, dict) and "partials" in obj and "verdict" in obj


def _estimates(prefix: str, obj) -> Iterator[tuple[str, dict]]:
    """Every Sobolev-style estimate nested in ``obj`` with a file stem."""
    if _is_estimate(obj):
        yield prefix, obj
    elif isinstance(obj, dict):
        for k in sorted(obj):
            if k == "nodes":
                continue
            yield from _estimates(f"{prefix}__{_slug(k)}", obj[k])
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if _is_estimate(v):
                yield f"{prefix}__s{v['s']:g}", v
            else:
                yield from _estimates(f"{prefix}__{i}", v)


def _rows_to_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def csv_tables(report: dict) -> dict[str, str]:
    """File name -> CSV text for the summary and every ladder or node table."""
    report = plain(report)
    tables: dict[str, str] = {}
    summary = []
    for task in report.get("tasks", []):
        name = _slug(task.get("name", task.get("kind")))
        res = task.get("result") or {}
        err = task.get("error") or {}
        verdict = res.get("classification", {}).get("verdict", "")
        if "invariance" in res:
            verdict = "invariant" if res["invariance"]["invariant"] else "not_invariant"
        elif "estimate" in res:
            verdict = res["estimate"]["verdict"]
        elif "estimates" in res:
            verdict = ";".join(e["verdict"] for e in res["estimates"])
        summary.append([task.get("name"), task.get("kind"), task.get("status"), err.get("code", ""), verdict, res.get("passed", "")])
        nodes = res.get("nodes")
        if nodes:
            d = len(nodes["x"][0])
            K = len(nodes["eigvals"][0])
            header = [f"x{i}" for i in range(d)] + ["rank"] + [f"eig{k}" for k in range(K)]
            rows = (list(x) + [r] + list(ev) for x, r, ev in zip(nodes["x"], nodes["ranks"], nodes["eigvals"]))
            tables[f"{name}__nodes.csv"] = _rows_to_text(header, rows)
        ledger = res.get("ledger") or res.get("invariance", {}).get("ledger")
        if ledger:
            tables[f"{name}__ledger.csv"] = _rows_to_text(["node", "rank", "rank_sum"], ledger)
        for band in res.get("bands", []):
            stem = f"{name}__{band['kernel']}_s{band['s']:g}"
            tables[f"{stem}.csv"] = _rows_to_text(["abs_xi", "ratio"], band["table"])
        if "assertions" in res:
            rows = ([a["name"], a["passed"]] for a in res["assertions"])
            tables[f"{name}__assertions.csv"] = _rows_to_text(["assertion", "passed"], rows)
        for stem, est in _estimates(name, res):
            tables[f"{stem}.csv"] = _rows_to_text(["N", "S"], est["partials"])
    tables["summary.csv"] = _rows_to_text(["task", "kind", "status", "error_code", "verdict", "passed"], summary)
    return tables


def emit(report: dict, fmt: str, path: str | Path) -> list[Path]:
    """Write ``report`` as one JSON file or as a directory of CSV tables."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    target = Path(path)
    try:
        if fmt == "json":
            if target.parent != Path(""):
                target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(to_json(report), encoding="utf-8")
            return [target]
        target.mkdir(parents=True, exist_ok=True)
        written = []
        for fname, text in sorted(csv_tables(report).items()):
            p = target / fname
            p.write_text(text, encoding="utf-8")
            written.append(p)
        return written
    except OSError as exc:
        raise IoFailure(f"cannot write {target}: {exc.strerror or exc}") from None
