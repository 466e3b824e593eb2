"""Command line entry point and the config runner.

    sispace analyze CONFIG [--format json|csv] [--out PATH]
    sispace example ID [--override k=v ...] [--format json|csv] [--out PATH]
    sispace emit [REPORT] --format json|csv [--out PATH]

Exit status: 0 on success, 1 on I/O failure, 2 on an invalid config or
override, 3 when an example's expected properties do not all hold.  Worker
threads for grid evaluation come from ``SISPACE_THREADS`` or ``--threads``.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import AnalysisConfig, load, tomllib, validate
from .errors import ConfigInvalid, IoFailure, PreconditionUnmet, SispaceError
from .generators import GeneratorSet
from .periodization import gramian_field, thread_count
from .report import emit, from_json, new_report, plain, to_json
from .scenarios import example_ids, paper_example
from .sobolev import kernel_band, moment_ladder, rd_seminorm_ladder
from .spectral import classify, gamma_frame_check, invariance_test

__all__ = ["run", "main", "build_parser", "NODE_TABLE_LIMIT"]

log = logging.getLogger("sispace")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_ASSERTION = 3

# per-node eigenvalue tables are kept in reports up to this many nodes
NODE_TABLE_LIMIT = 1 << 16


def _tau(task: dict) -> float | None:
    return None if task["tau_rank"] == "auto" else float(task["tau_rank"])


def _gens(cfg: AnalysisConfig, names: list[str]) -> GeneratorSet:
    return GeneratorSet(tuple(cfg.generators[n] for n in names), tuple(names))


def _task_classify(cfg: AnalysisConfig, task: dict) -> dict:
    F = _gens(cfg, task["generators"])
    lat = cfg.lattices[task["lattice"]]
    fld = gramian_field(F, lat.dual(), task["n_per_axis"], task["eps_tail"])
    cls = classify(fld, _tau(task), task["t_max"])
    out = {"field": fld.summary(), "classification": cls.to_dict()}
    if fld.n_nodes <= NODE_TABLE_LIMIT:
        out["nodes"] = {
            "x": fld.grid,
            "ranks": cls.profile.ranks,
            "eigvals": cls.profile.eigvals,
        }
    return out


def _task_invariance(cfg: AnalysisConfig, task: dict) -> dict:
    F = _gens(cfg, task["generators"])
    lam = cfg.lattices[task["lattice"]]
    gam = cfg.lattices[task["superlattice"]]
    tau = _tau(task)
    inv = invariance_test(F, lam, gam, task["n_per_axis"], task["eps_tail"], tau)
    out = {"invariance": inv.to_dict(include_ledger=task["ledger"])}
    if task["gamma_frame"]:
        try:
            gf = gamma_frame_check(F, lam, gam, task["n_per_axis"], task["eps_tail"], tau, invariance=inv)
            out["gamma_frame"] = gf.to_dict()
        except PreconditionUnmet as exc:
            out["gamma_frame"] = {"error": {"code": exc.code, "message": str(exc)}}
    return out


def _task_sobolev(cfg: AnalysisConfig, task: dict) -> dict:
    spec = cfg.generators[task["generator"]]
    ladder = np.asarray(task["ladder"])
    ests = [rd_seminorm_ladder(spec, s, task["mode"], ladder).to_dict() for s in task["s"]]
    return {"estimates": ests}


def _task_moment(cfg: AnalysisConfig, task: dict) -> dict:
    est = moment_ladder(cfg.generators[task["generator"]], np.asarray(task["ladder"]))
    return {"estimate": est.to_dict()}


def _task_kernel(cfg: AnalysisConfig, task: dict) -> dict:
    lat = cfg.lattices[task["lattice"]]
    bands = [kernel_band(lat, s, k, task["r_lo"], task["r_hi"]) for s in task["s"] for k in task["kernel"]]
    return {"bands": bands}


def _task_example(cfg: AnalysisConfig, task: dict) -> dict:
    return paper_example(task["id"], task["overrides"])


_RUNNERS = {
    "classify": _task_classify,
    "invariance": _task_invariance,
    "sobolev": _task_sobolev,
    "moment": _task_moment,
    "kernel_ratio": _task_kernel,
    "paper_example": _task_example,
}


def run(cfg: AnalysisConfig) -> dict:
    """Execute every task in order; a failing task is recorded and the run goes on."""
    report = new_report(cfg.raw)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    seconds = {}
    for task in cfg.tasks:
        entry = {"name": task["name"], "kind": task["kind"]}
        t1 = time.perf_counter()
        try:
            entry["result"] = _RUNNERS[task["kind"]](cfg, task)
            entry["status"] = "ok"
        except SispaceError as exc:
            entry["status"] = "error"
            entry["error"] = {"code": exc.code, "message": str(exc)}
        except (ValueError, ArithmeticError) as exc:
            entry["status"] = "error"
            entry["error"] = {"code": type(exc).__name__, "message": str(exc)}
        seconds[task["name"]] = time.perf_counter() - t1
        log.info("task %s (%s): %s in %.2fs", task["name"], task["kind"], entry["status"], seconds[task["name"]])
        report["tasks"].append(entry)
    report["run_info"] = {
        "started": started,
        "total_s": time.perf_counter() - t0,
        "task_s": seconds,
        "threads": thread_count(),
        "backend": kernels.BACKEND,
    }
    return plain(report)


def _examples_failed(report: dict) -> bool:
    for task in report["tasks"]:
        if task["kind"] == "paper_example" and (task["status"] != "ok" or not task["result"]["passed"]):
            return True
    return False


def _parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigInvalid("overrides", f"expected k=v, got {text!r}")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


def _write(report: dict, fmt: str, out: str | None) -> None:
    if out is None:
        if fmt != "json":
            raise ConfigInvalid("output.path", "csv output needs a directory (--out)")
        sys.stdout.write(to_json(report))
        return
    for p in emit(report, fmt, out):
        log.info("wrote %s", p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sispace", description="Frames, Riesz bases and Sobolev diagnostics for shift-invariant spaces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (overrides SISPACE_THREADS)")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run every task of a TOML config")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", default=None, help="output file (json) or directory (csv)")

    p = sub.add_parser("example", help="run a preset and check its expected properties")
    p.add_argument("id", help=", ".join(example_ids()))
    p.add_argument("--override", action="append", default=[], metavar="K=V")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("emit", help="convert a JSON report to json or csv tables")
    p.add_argument("report", nargs="?", default="-", help="JSON report path, '-' for stdin")
    p.add_argument("--format", choices=("json", "csv"), required=True)
    p.add_argument("--out", default=None)
    return ap


def _cmd_analyze(args) -> int:
    cfg = load(args.config)
    report = run(cfg)
    fmt = args.format or cfg.output["format"]
    out = args.out if args.out is not None else cfg.output["path"]
    if out is not None and args.out is None:
        out = str(Path(args.config).resolve().parent / out)
    _write(report, fmt, out)
    return EXIT_ASSERTION if _examples_failed(report) else EXIT_OK


def _cmd_example(args) -> int:
    overrides = dict(_parse_override(o) for o in args.override)
    raw = {"schema_version": 1, "tasks": [{"kind": "paper_example", "name": args.id, "id": args.id, "overrides": overrides}]}
    cfg = validate(raw)
    report = run(cfg)
    task = report["tasks"][0]
    if task["status"] == "error" and task["error"]["code"] == ConfigInvalid.code:
        print(f"config error: {task['error']['message']}", file=sys.stderr)
        return EXIT_CONFIG
    _write(report, args.format, args.out)
    if _examples_failed(report):
        res = task.get("result") or {}
        for a in res.get("assertions", []):
            if not a["passed"]:
                print(f"FAILED {args.id}: {a['name']}", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def _cmd_emit(args) -> int:
    if args.report == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.report).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read {args.report}: {exc.strerror or exc}") from None
    try:
        report = from_json(text)
    except ValueError as exc:
        raise IoFailure(f"input is not a JSON report: {exc}") from None
    _write(report, args.format, args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        os.environ["SISPACE_THREADS"] = str(max(1, args.threads))
    cmd = {"analyze": _cmd_analyze, "example": _cmd_example, "emit": _cmd_emit}[args.command]
    try:
        return cmd(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
