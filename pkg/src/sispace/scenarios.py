"""Preset worked examples with their expected properties checked numerically.

Each preset builds a generator set, runs the relevant analyses and records a
list of named assertions.  ``paper_example(id, overrides)`` returns a plain
dict suitable for the report writer; ``passed`` is true when every assertion
holds.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from .errors import ConfigInvalid, PreconditionUnmet, UnknownExample
from .generators import BSpline, BumpFourier, BumpTime, GeneratorSet, IndicatorBox, shift_modulate
from .lattice import Lattice, index, integer_lattice
from .periodization import gramian_field
from .sobolev import moment_ladder, rd_seminorm_ladder
from .spectral import classify, gamma_frame_check, invariance_test, min_generators, weyl_excess

__all__ = ["EXAMPLES", "paper_example", "example_ids", "SINC_SLOPE"]

# slope of int_{|u|<=R} |u| sinc(u)^2 du against log R
SINC_SLOPE = 1.0 / math.pi**2
SLOPE_TOL = 0.15
SHARP_LADDER = (1e2, 1e5, 16)


class _Checks:
    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, passed: bool, **detail) -> None:
        self.items.append({"name": name, "passed": bool(passed), **{k: _plain(v) for k, v in detail.items()}})

    @property
    def passed(self) -> bool:
        return all(item["passed"] for item in self.items)


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _int(params: dict, key: str, lo: int, hi: int) -> int:
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or not lo <= v <= hi:
        raise ConfigInvalid(f"overrides.{key}", f"must be an integer in [{lo}, {hi}]")
    return int(v)


def _pos(params: dict, key: str) -> float:
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigInvalid(f"overrides.{key}", "must be a positive number")
    return float(v)


def _ladder(params: dict) -> np.ndarray:
    count = _int(params, "count", 6, 200)
    lo, hi = _pos(params, "r_lo"), _pos(params, "r_hi")
    if hi <= lo:
        raise ConfigInvalid("overrides.r_hi", "must exceed r_lo")
    return np.geomspace(lo, hi, count)


def _ex51(p: dict) -> dict:
    d = _int(p, "d", 1, 3)
    default_n = {1: 2048, 2: 64, 3: 16}[d]
    n = default_n if p["n_per_axis"] is None else _int(p, "n_per_axis", 2, 4096)
    eps = _pos(p, "eps_tail")
    tau = _pos(p, "tau_rank")
    lam = integer_lattice(d)
    gam = Lattice(np.diag([0.5] + [1.0] * (d - 1)))
    chi = IndicatorBox(lower=(-0.5,) * d, upper=(0.5,) * d)
    g = BumpFourier(center=(0.0,) * d, radius=0.5)
    F = GeneratorSet((chi, g), ("f1", "f2"))
    chk = _Checks()
    fld = gramian_field(F, lam.dual(), n, eps)
    P = fld.values
    gx = g(fld.grid)
    resid = P @ P - (1.0 + np.abs(gx) ** 2)[:, None, None] * P
    worst = float(np.max(np.sqrt(np.sum(np.abs(resid) ** 2, axis=(1, 2)))))
    chk.add("gramian_square_identity", worst <= 1e-8 + fld.trunc_err, max_frobenius=worst)
    cls = classify(fld, tau_rank=tau)
    chk.add("frame", cls.is_frame, verdict=cls.verdict, frame_bounds=cls.frame_bounds)
    chk.add("not_riesz", not cls.is_riesz)
    chk.add("rank_one_everywhere", bool(np.all(cls.profile.ranks == 1)))
    chk.add("rho_equals_1", cls.rho == 1, rho=cls.rho)
    upper = 1.0 + float(np.max(np.abs(gx))) ** 2
    chk.add(
        "frame_bounds_match",
        abs(cls.frame_bounds[0] - 1.0) <= 1e-8 and cls.frame_bounds[1] <= upper + 1e-8,
        expected_upper=upper,
    )
    idx = index(lam, gam)
    chk.add("index_equals_2", idx == 2, index=idx)
    inv = invariance_test(F, lam, gam, n, eps, tau)
    chk.add("gamma_invariant", inv.invariant, mismatch_fraction=inv.mismatch_fraction)
    gf = gamma_frame_check(F, lam, gam, n, eps, tau, invariance=inv)
    chk.add("gamma_frame", gf.is_frame, verdict=gf.verdict, frame_bounds=gf.frame_bounds)
    chk.add("weyl_bound", weyl_excess(fld, cls.profile) <= 0.0)
    sob = {}
    if d == 1:
        lad = np.geomspace(*SHARP_LADDER[:2], SHARP_LADDER[2])
        e1 = rd_seminorm_ladder(chi, 0.5, "fourier_integral", lad)
        e2 = rd_seminorm_ladder(g, 0.5, "fourier_integral", np.geomspace(1.0, 100.0, 12))
        chk.add("f1_not_in_h_half", e1.verdict == "divergent_log", log_slope=e1.log_slope)
        chk.add("f2_in_h_half", e2.verdict == "finite", log_slope=e2.log_slope)
        sob = {"f1": e1.to_dict(), "f2": e2.to_dict()}
    return {
        "params": {"d": d, "n_per_axis": n, "eps_tail": eps, "tau_rank": tau},
        "field": fld.summary(),
        "classification": cls.to_dict(),
        "invariance": inv.to_dict(),
        "gamma_frame": gf.to_dict(),
        "sobolev": sob,
        "assertions": chk.items,
        "passed": chk.passed,
    }


def ex52_generators(N: int, eps: float) -> GeneratorSet:
    """``N`` shifted copies of one narrow bump plus the band-limited indicator."""
    unit = BumpTime(lower=(0.0,), upper=(1.0,))
    # |fhat| <= int f = sqrt(w) * int f_unit for an L2-normalized bump of width w
    w = min((0.9 * eps / abs(complex(unit(0.0)))) ** 2, 0.5 / N)
    base = BumpTime(lower=(0.0,), upper=(w,))
    specs = tuple(shift_modulate(base, (n + 1) / N) for n in range(N))
    chi = IndicatorBox(lower=(-0.5,), upper=(0.5,))
    return GeneratorSet(specs + (chi,), tuple(f"f{n + 1}" for n in range(N + 1)))


def _ex52(p: dict) -> dict:
    N = _int(p, "N", 2, 16)
    eps = _pos(p, "eps")
    if not eps < 1.0 / (2 * N):
        raise ConfigInvalid("overrides.eps", f"must lie in (0, 1/(2N)) = (0, {1 / (2 * N):g})")
    n = _int(p, "n_per_axis", 2, 4096) if p["n_per_axis"] is not None else 1024
    eps_tail = _pos(p, "eps_tail")
    lam = integer_lattice(1)
    gam = Lattice([[1.0 / N]])
    F = ex52_generators(N, eps)
    chk = _Checks()
    fld = gramian_field(F, lam.dual(), n, eps_tail)
    cls = classify(fld)
    ev = cls.profile.eigvals
    lo, hi = 1.0 - N * eps - 1e-6, 1.0 + N * eps + 1e-6
    chk.add("eigenvalues_in_band", bool(ev.min() >= lo and ev.max() <= hi), eig_min=ev.min(), eig_max=ev.max())
    chk.add("riesz", cls.is_riesz, verdict=cls.verdict)
    chk.add("rho_equals_N_plus_1", cls.rho == N + 1, rho=cls.rho)
    idx = index(lam, gam)
    chk.add("index_equals_N", idx == N, index=idx)
    inv = invariance_test(F, lam, gam, n, eps_tail)
    chk.add("gamma_invariant", inv.invariant, mismatch_fraction=inv.mismatch_fraction)
    sub = GeneratorSet(F.specs[:N], F.names[:N])
    sub_fld = gramian_field(sub, lam.dual(), n, eps_tail)
    sub_cls = classify(sub_fld)
    chk.add("bumps_orthonormal_rank_N", min_generators(sub_fld) == N and sub_cls.rank_constant, rho=sub_cls.rho)
    chk.add("weyl_bound", weyl_excess(fld, cls.profile) <= 0.0)
    return {
        "params": {"N": N, "eps": eps, "n_per_axis": n, "eps_tail": eps_tail, "bump_width": F[0].widths[0]},
        "field": fld.summary(),
        "classification": cls.to_dict(),
        "invariance": inv.to_dict(),
        "assertions": chk.items,
        "passed": chk.passed,
    }


def _transition_cells(x: np.ndarray, n: int, edges) -> np.ndarray:
    h = 1.0 / n
    out = np.zeros(len(x), dtype=bool)
    for e in edges:
        out |= np.abs(np.abs(x) - e) < h
    return out


def _ex53(p: dict) -> dict:
    n = _int(p, "n_per_axis", 2, 4096) if p["n_per_axis"] is not None else 2048
    eps_tail = _pos(p, "eps_tail")
    lam = integer_lattice(1)
    chi_j = IndicatorBox(lower=(-0.25,), upper=(0.25,))
    f2 = BumpTime(lower=(-0.1,), upper=(0.1,))
    F = GeneratorSet((chi_j, f2), ("f1", "f2"))
    chk = _Checks()
    fld = gramian_field(F, lam.dual(), n, eps_tail)
    cls = classify(fld)
    x = fld.grid[:, 0]
    ev = cls.profile.eigvals
    a = np.abs(f2(x))
    chk.add("f2_hat_below_half_on_J", float(a[np.abs(x) <= 0.25].max()) < 0.5, max_abs=a[np.abs(x) <= 0.25].max())
    keep = ~_transition_cells(x, n, [0.25])
    core = keep & (np.abs(x) < 0.25)
    ann = keep & (np.abs(x) > 0.25)
    err_core = float(np.max(np.abs(ev[core] - np.stack([1 + a, 1 - a], axis=1)[core])))
    err_ann = float(np.max(np.abs(ev[ann] - np.array([1.0, 0.0]))))
    chk.add("core_eigenvalues", err_core <= 1e-8, max_error=err_core)
    chk.add("annulus_eigenvalues", err_ann <= 1e-8, max_error=err_ann)
    chk.add("frame", cls.is_frame, verdict=cls.verdict, frame_bounds=cls.frame_bounds)
    chk.add("not_riesz", not cls.is_riesz)
    chk.add("rho_equals_2", cls.rho == 2, rho=cls.rho)
    chk.add("rank_not_constant", not cls.rank_constant)
    chk.add("weyl_bound", weyl_excess(fld, cls.profile) <= 0.0)
    lad = np.geomspace(*SHARP_LADDER[:2], SHARP_LADDER[2])
    e1 = rd_seminorm_ladder(chi_j, 0.5, "fourier_integral", lad)
    chk.add("f1_not_in_h_half", e1.verdict == "divergent_log", log_slope=e1.log_slope)
    return {
        "params": {"n_per_axis": n, "eps_tail": eps_tail},
        "field": fld.summary(),
        "classification": cls.to_dict(),
        "sobolev": {"f1": e1.to_dict()},
        "assertions": chk.items,
        "passed": chk.passed,
    }


def _sinc_sharpness(p: dict) -> dict:
    lad = _ladder(p)
    chi = IndicatorBox(lower=(-0.5,), upper=(0.5,))
    chk = _Checks()
    half = rd_seminorm_ladder(chi, 0.5, "fourier_integral", lad)
    below = rd_seminorm_ladder(chi, 0.4, "fourier_integral", lad)
    rel = abs(half.log_slope - SINC_SLOPE) / SINC_SLOPE
    chk.add("s_half_divergent", half.verdict == "divergent_log", log_slope=half.log_slope)
    chk.add("s_half_slope", rel <= SLOPE_TOL, relative_error=rel, oracle=SINC_SLOPE)
    chk.add("s_0.4_finite", below.verdict == "finite", decay_exponent=below.fit.decay_exponent)
    mom = moment_ladder(chi, lad)
    rel_m = abs(mom.log_slope - SINC_SLOPE) / SINC_SLOPE
    chk.add("moment_divergent", mom.verdict == "divergent_log" and rel_m <= SLOPE_TOL, log_slope=mom.log_slope)
    bump = moment_ladder(BumpTime(lower=(-0.5,), upper=(0.5,)), lad)
    chk.add("bump_moment_finite", bump.verdict == "finite")
    return {
        "params": {"ladder": lad.tolist()},
        "sobolev": {
            "s_0.5": half.to_dict(),
            "s_0.4": below.to_dict(),
            "moment_sinc": mom.to_dict(),
            "moment_bump": bump.to_dict(),
        },
        "assertions": chk.items,
        "passed": chk.passed,
    }


def _chi_j_frame(p: dict) -> dict:
    d = _int(p, "d", 1, 3)
    default_n = {1: 2048, 2: 64, 3: 16}[d]
    n = default_n if p["n_per_axis"] is None else _int(p, "n_per_axis", 2, 4096)
    lam = integer_lattice(d)
    F = GeneratorSet((IndicatorBox(lower=(0.0,) * d, upper=(0.5,) * d),), ("f",))
    chk = _Checks()
    fld = gramian_field(F, lam.dual(), n, 1e-10)
    vals = fld.values[:, 0, 0].real
    cls = classify(fld)
    chk.add("values_zero_or_one", bool(np.all((np.abs(vals) <= 1e-12) | (np.abs(vals - 1) <= 1e-12))))
    A, B = cls.frame_bounds
    chk.add("frame_bounds_one", abs(A - 1) <= 1e-8 and abs(B - 1) <= 1e-8, frame_bounds=cls.frame_bounds)
    chk.add("frame", cls.is_frame, verdict=cls.verdict)
    chk.add("not_riesz", not cls.is_riesz)
    ranks = sorted(set(cls.profile.ranks.tolist()))
    chk.add("rank_profile_0_1", ranks == [0, 1] and not cls.rank_constant, ranks=ranks)
    return {
        "params": {"d": d, "n_per_axis": n},
        "field": fld.summary(),
        "classification": cls.to_dict(),
        "assertions": chk.items,
        "passed": chk.passed,
    }


def _bspline_noninvariance(p: dict) -> dict:
    n = _int(p, "n_per_axis", 2, 4096) if p["n_per_axis"] is not None else 2048
    eps_tail = _pos(p, "eps_tail")
    tau = _pos(p, "tau_rank")
    lam = integer_lattice(1)
    gam = Lattice([[0.5]])
    F = GeneratorSet((BSpline(order=2),), ("hat",))
    chk = _Checks()
    inv = invariance_test(F, lam, gam, n, eps_tail, tau)
    frac = float(np.mean((inv.rank_fine == 1) & (inv.rank_sum == 2)))
    chk.add("not_invariant", not inv.invariant)
    chk.add("rank_1_vs_2_majority", frac >= 0.99, fraction=frac)
    try:
        gamma_frame_check(F, lam, gam, n, eps_tail, tau, invariance=inv)
        raised = False
    except PreconditionUnmet:
        raised = True
    chk.add("gamma_frame_precondition_unmet", raised)
    return {
        "params": {"n_per_axis": n, "eps_tail": eps_tail, "tau_rank": tau},
        "invariance": inv.to_dict(),
        "assertions": chk.items,
        "passed": chk.passed,
    }


EXAMPLES: dict[str, tuple[Callable[[dict], dict], dict]] = {
    "ex51": (_ex51, {"d": 1, "n_per_axis": None, "eps_tail": 1e-10, "tau_rank": 1e-6}),
    "ex52": (_ex52, {"N": 3, "eps": 0.1, "n_per_axis": None, "eps_tail": 1e-9}),
    "ex53": (_ex53, {"n_per_axis": None, "eps_tail": 1e-10}),
    "sinc_sharpness": (_sinc_sharpness, {"r_lo": SHARP_LADDER[0], "r_hi": SHARP_LADDER[1], "count": SHARP_LADDER[2]}),
    "chi_J_frame": (_chi_j_frame, {"d": 1, "n_per_axis": None}),
    "bspline_noninvariance": (_bspline_noninvariance, {"n_per_axis": None, "eps_tail": 1e-13, "tau_rank": 1e-11}),
}


def example_ids() -> list[str]:
    return list(EXAMPLES)


def paper_example(example_id: str, overrides: dict | None = None) -> dict:
    """Run one preset and check its expected properties."""
    if example_id not in EXAMPLES:
        raise UnknownExample(f"unknown example {example_id!r}; choose from {example_ids()}")
    fn, defaults = EXAMPLES[example_id]
    params = dict(defaults)
    for key, val in (overrides or {}).items():
        if key not in defaults:
            raise ConfigInvalid(f"overrides.{key}", f"not a parameter of {example_id}; choose from {sorted(defaults)}")
        params[key] = val
    out = fn(params)
    return {"example": example_id, **out}
