"""Fractional Sobolev seminorms on R^d and on tori, and divergence diagnostics.

Every quantity here is a sum or integral of nonnegative terms, so truncations
give nondecreasing partial values.  Membership in a Sobolev space cannot be
decided by finite computation; instead ladders of partial values are fitted
against ``log N`` and classified as finite, logarithmically divergent, or
inconclusive.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import kernels
from .errors import InsufficientData, ModeUnsupported, ZeroFrequency
from .generators import BSpline, BumpTime, CompactSupport, Gaussian, GeneratorSet, GeneratorSpec, IndicatorBox
from .lattice import Lattice
from .periodization import gramian_field, grid_coords

__all__ = [
    "DivergenceFit",
    "SobolevEstimate",
    "KernelRatio",
    "BracketEmbedding",
    "TrigPolynomial",
    "divergence_diagnostic",
    "geometric_ladder",
    "torus_seminorm_fourier",
    "torus_fourier_ladder",
    "torus_gagliardo",
    "torus_directional",
    "torus_double_integral_ladder",
    "torus_l2_norm_sq",
    "sampled_coefficients",
    "box_indicator_coefficients",
    "rd_seminorm",
    "rd_seminorm_ladder",
    "moment_diagnostic",
    "moment_ladder",
    "kernel_ratio",
    "kernel_band",
    "bracket_embedding_check",
]

FIT_MIN_POINTS = 6
RESIDUAL_GATE = 0.05
CI_GATE = 0.30
# exponent alpha of increments S(qN) - S(N) ~ N^-alpha
DIVERGENT_ALPHA = 0.05
FINITE_ALPHA = 0.10
_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)


def _check_order(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0, 1), got {s}")


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class DivergenceFit:
    """Least-squares fit ``S = a log N + b`` on the upper part of a ladder."""

    verdict: str
    log_slope: float
    intercept: float
    residual: float
    slope_rel_ci: float
    decay_exponent: float
    window: int

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "log_slope": self.log_slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "slope_rel_ci": self.slope_rel_ci,
            "decay_exponent": self.decay_exponent,
            "window": self.window,
        }


def divergence_diagnostic(partials: Sequence[tuple[float, float]]) -> DivergenceFit:
    """Classify a ladder of partial values ``(N, S(N))`` with geometric ``N``.

    ``divergent_log`` needs a positive slope, a residual under 5% of the
    window's range, a 95% slope interval narrower than 30% of the slope, and
    increments that do not decay (exponent below 0.05).  ``finite`` means the
    increments decay like ``N^-alpha`` with ``alpha >= 0.1`` or have stopped.
    """
    pts = sorted((float(n), float(v)) for n, v in partials)
    if len(pts) < FIT_MIN_POINTS:
        raise InsufficientData(f"need at least {FIT_MIN_POINTS} ladder points, got {len(pts)}")
    m = max(FIT_MIN_POINTS, (len(pts) + 1) // 2)
    win = np.array(pts[-m:])
    logn = np.log(win[:, 0])
    sv = win[:, 1]
    span = float(sv.max() - sv.min())
    scale = max(1.0, float(np.max(np.abs(sv))))
    if span <= 1e-13 * scale:
        return DivergenceFit("finite", 0.0, float(sv.mean()), 0.0, math.inf, math.inf, m)
    coef, cov = np.polyfit(logn, sv, 1, cov="unscaled")
    a, b = float(coef[0]), float(coef[1])
    resid_vec = sv - (a * logn + b)
    residual = float(np.max(np.abs(resid_vec)) / span)
    dof = m - 2
    sigma2 = float(resid_vec @ resid_vec) / dof
    se = math.sqrt(max(sigma2 * float(cov[0, 0]), 0.0))
    tq = float(stats.t.ppf(0.975, dof))
    rel_ci = 2.0 * tq * se / abs(a) if a != 0 else math.inf
    inc = np.diff(sv)
    tiny = 1e-12 * scale
    if inc[-1] <= tiny:
        return DivergenceFit("finite", a, b, residual, rel_ci, math.inf, m)
    good = inc > tiny
    if np.count_nonzero(good) >= 2:
        mid = np.log(win[1:, 0])[good]
        alpha = -float(np.polyfit(mid, np.log(inc[good]), 1)[0])
    else:
        alpha = math.inf
    if a > 0 and residual < RESIDUAL_GATE and rel_ci < CI_GATE and alpha < DIVERGENT_ALPHA:
        verdict = "divergent_log"
    elif alpha >= FINITE_ALPHA:
        verdict = "finite"
    else:
        verdict = "inconclusive"
    return DivergenceFit(verdict, a, b, residual, rel_ci, alpha, m)


@dataclass(frozen=True, eq=False)
class SobolevEstimate:
    """Ladder of partial seminorm values with its divergence verdict."""

    s: float
    mode: str
    partials: tuple[tuple[float, float], ...]
    fit: DivergenceFit
    params: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return self.fit.verdict

    @property
    def log_slope(self) -> float:
        return self.fit.log_slope

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.partials])

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "mode": self.mode,
            "partials": [[n, v] for n, v in self.partials],
            **self.fit.to_dict(),
            "params": dict(self.params),
        }


def _estimate(s: float, mode: str, ladder, values, params: dict) -> SobolevEstimate:
    partials = tuple((float(n), float(v)) for n, v in zip(ladder, values))
    return SobolevEstimate(s=s, mode=mode, partials=partials, fit=divergence_diagnostic(partials), params=params)


def geometric_ladder(lo: float, hi: float, count: int) -> np.ndarray:
    return np.geomspace(lo, hi, count)


# ------------------------------------------------------------- torus, Fourier


def _coefficient_items(coeffs, lattice: Lattice | None, radius: float) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(coeffs, Mapping):
        keys = np.array([np.atleast_1d(np.asarray(k, dtype=float)) for k in coeffs.keys()])
        vals = np.array(list(coeffs.values()), dtype=complex)
        return keys, vals
    if lattice is None:
        raise ValueError("a callable coefficient map needs the torus lattice")
    pts = lattice.dual().points_in_ball(np.zeros(lattice.dim), radius)
    return pts, np.asarray(coeffs(pts), dtype=complex).reshape(len(pts))


def torus_seminorm_fourier(coeffs, s: float, N: float, lattice: Lattice | None = None) -> float:
    """``sum_{0 < |xi| <= N} |xi|^{2s} |c(xi)|^2`` over the dual lattice.

    ``coeffs`` maps dual points to coefficients, either as a mapping keyed by
    point tuples or as a callable on ``(m, d)`` arrays (then ``lattice`` is
    the torus lattice whose dual is summed over).
    """
    _check_order(s)
    if N < 1:
        raise ValueError("N must be at least 1")
    return float(torus_fourier_ladder(coeffs, s, [N], lattice, fit=False)[0])


def torus_fourier_ladder(coeffs, s: float, ladder, lattice: Lattice | None = None, fit: bool = True):
    """Partial Fourier-side torus seminorms at every ``N`` in ``ladder``."""
    _check_order(s)
    ladder = np.asarray(ladder, dtype=float)
    pts, vals = _coefficient_items(coeffs, lattice, float(ladder.max()))
    r = np.linalg.norm(pts, axis=1)
    keep = r > 0
    r, vals = r[keep], vals[keep]
    order = np.argsort(r, kind="stable")
    r = r[order]
    terms = r ** (2 * s) * (vals[order].real ** 2 + vals[order].imag ** 2)
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    values = csum[np.searchsorted(r, ladder * (1 + 1e-12), side="right")]
    if not fit:
        return values
    return _estimate(s, "fourier_sum", ladder, values, {})


def box_indicator_coefficients(lower, upper) -> Callable[[np.ndarray], np.ndarray]:
    """Fourier coefficients on ``R^d / Z^d`` of the indicator of a box inside one period."""
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))

    def coeffs(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float).reshape(-1, len(lo))
        out = np.ones(len(xi), dtype=complex)
        for j in range(len(lo)):
            k = xi[:, j]
            safe = np.where(k == 0, 1.0, k)
            val = (np.exp(-2j * np.pi * k * lo[j]) - np.exp(-2j * np.pi * k * hi[j])) / (2j * np.pi * safe)
            out *= np.where(k == 0, hi[j] - lo[j], val)
        return out

    return coeffs


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """``sum_m c_m exp(2 pi i xi_m . x)`` with ``xi_m = B m`` on the dual of ``lattice``."""

    lattice: Lattice
    freqs: np.ndarray
    coeffs: np.ndarray

    @property
    def dual_points(self) -> np.ndarray:
        return np.asarray(self.freqs, dtype=float) @ self.lattice.dual().basis.T

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.lattice.dim)
        return np.exp(2j * np.pi * x @ self.dual_points.T) @ self.coeffs

    def coefficient_map(self) -> dict[tuple[float, ...], complex]:
        out: dict[tuple[float, ...], complex] = {}
        for p, c in zip(self.dual_points, self.coeffs):
            key = tuple(float(v) for v in p)
            out[key] = out.get(key, 0.0) + complex(c)
        return out

    @staticmethod
    def random(lattice: Lattice, degree: int, rng: np.random.Generator, n_terms: int = 6) -> "TrigPolynomial":
        d = lattice.dim
        freqs = rng.integers(-degree, degree + 1, size=(n_terms, d))
        freqs = np.unique(freqs, axis=0)
        c = rng.normal(size=len(freqs)) + 1j * rng.normal(size=len(freqs))
        return TrigPolynomial(lattice, freqs, c)


def _grid_samples(f, lattice: Lattice, n: int) -> np.ndarray:
    d = lattice.dim
    if callable(f):
        nodes = lattice.to_points(grid_coords(n, d))
        vals = np.asarray(f(nodes), dtype=complex)
    else:
        vals = np.asarray(f, dtype=complex)
    if vals.size != n**d:
        raise ValueError(f"expected {n**d} samples, got {vals.size}")
    return vals.reshape((n,) * d)


def torus_l2_norm_sq(f, lattice: Lattice, n: int) -> float:
    """``(1/|M|) int_M |f|^2`` by the uniform grid rule (exact for low-degree trigonometric polynomials)."""
    v = _grid_samples(f, lattice, n)
    return float(np.mean(v.real**2 + v.imag**2))


def sampled_coefficients(f, lattice: Lattice, n: int) -> dict[tuple[float, ...], complex]:
    """Fourier coefficients of a function sampled on the standard ``n^d`` grid, via FFT."""
    d = lattice.dim
    v = _grid_samples(f, lattice, n)
    c = np.fft.fftn(v) / v.size
    m = np.stack(np.meshgrid(*([np.fft.fftfreq(n, 1.0 / n)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    # the grid starts at t_0 = -1/2 + offset, not at 0
    t0 = grid_coords(n, 1)[0, 0]
    phase = np.exp(-2j * np.pi * (m @ np.full(d, t0)))
    vals = c.reshape(-1) * phase
    pts = m @ lattice.dual().basis.T
    return {tuple(float(x) for x in p): complex(val) for p, val in zip(pts, vals)}


# ----------------------------------------------------- torus, double integral


def _cell_diameter(lattice: Lattice, n: int) -> float:
    return lattice.diameter / n


def _offset_range(n: int) -> np.ndarray:
    return np.arange(-(n // 2), n - n // 2)


def _gagliardo_offsets(lattice: Lattice, s: float, n: int):
    d = lattice.dim
    j = np.stack(np.meshgrid(*([_offset_range(n)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    j = j[np.any(j != 0, axis=1)]
    y = lattice.to_points(j / n)
    r = np.linalg.norm(y, axis=1)
    cell = lattice.det_abs / n**d
    return j, r, r ** (-d - 2 * s) * cell * cell


def _directional_offsets(lattice: Lattice, s: float, n: int):
    d = lattice.dim
    m = _offset_range(n)
    m = m[m != 0]
    cell = lattice.det_abs / n**d
    offs, lengths, weights = [], [], []
    for ax in range(d):
        j = np.zeros((len(m), d), dtype=np.int64)
        j[:, ax] = m
        t = np.abs(m) / n
        offs.append(j)
        lengths.append(t * np.linalg.norm(lattice.basis[:, ax]))
        weights.append(t ** (-1 - 2 * s) * (1.0 / n) * cell)
    return np.concatenate(offs), np.concatenate(lengths), np.concatenate(weights)


def _check_delta(lattice: Lattice, n: int, delta: float) -> None:
    cd = _cell_diameter(lattice, n)
    if delta < cd * (1 - 1e-12):
        raise ValueError(f"exclusion radius {delta:g} is below one grid cell diameter {cd:g}")


def _shell_energies(values: np.ndarray, offs, lengths, weights, deltas) -> np.ndarray:
    """Weighted energies with ``lengths >= delta`` for each delta (any order)."""
    deltas = np.asarray(deltas, dtype=float)
    order = np.argsort(-deltas)
    out = np.empty(len(deltas))
    total = 0.0
    upper = math.inf
    for idx in order:
        dl = deltas[idx]
        sel = (lengths >= dl * (1 - 1e-12)) & (lengths < upper * (1 - 1e-12))
        if np.any(sel):
            total += kernels.offset_difference_energy(
                values, np.ascontiguousarray(offs[sel], dtype=np.int64), np.ascontiguousarray(weights[sel])
            )
        out[idx] = total
        upper = dl
    return out


def torus_gagliardo(f, lattice: Lattice, s: float, grid_n: int, delta_excl: float) -> float:
    """Midpoint double sum of ``|f(x+y) - f(x)|^2 / |y|^(d+2s)`` over ``M x M`` with ``|y| >= delta_excl``.

    ``f`` is a lattice-periodic callable or an array of samples on the
    standard grid.  The excluded core is nonnegative, so the value is a lower
    bound for the full double integral.
    """
    _check_order(s)
    _check_delta(lattice, grid_n, delta_excl)
    v = _grid_samples(f, lattice, grid_n)
    offs, r, w = _gagliardo_offsets(lattice, s, grid_n)
    return float(_shell_energies(v, offs, r, w, [delta_excl])[0])


def torus_directional(
    f, lattice: Lattice, s: float, grid_n: int, delta_excl: float, basis=None
) -> float:
    """``sum_j int_M int_{|t|<1/2} |f(x + t a_j) - f(x)|^2 / |t|^(1+2s)`` with ``|t a_j| >= delta_excl``."""
    _check_order(s)
    lat = lattice
    if basis is not None:
        lat = Lattice(np.asarray(basis, dtype=float))
        if not lat.same_points(lattice):
            raise ValueError("basis does not generate the torus lattice")
    _check_delta(lat, grid_n, delta_excl)
    v = _grid_samples(f, lat, grid_n)
    offs, lengths, w = _directional_offsets(lat, s, grid_n)
    return float(_shell_energies(v, offs, lengths, w, [delta_excl])[0])


def torus_double_integral_ladder(
    f, lattice: Lattice, s: float, grid_n: int, deltas, mode: str = "gagliardo"
) -> SobolevEstimate:
    """Partial double integrals for shrinking exclusion radii, indexed by ``N = 1/delta``."""
    _check_order(s)
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    _check_delta(lattice, grid_n, float(deltas.min()))
    v = _grid_samples(f, lattice, grid_n)
    if mode == "gagliardo":
        offs, lengths, w = _gagliardo_offsets(lattice, s, grid_n)
    elif mode == "directional":
        offs, lengths, w = _directional_offsets(lattice, s, grid_n)
    else:
        raise ModeUnsupported(f"unknown torus mode {mode!r}")
    vals = _shell_energies(v, offs, lengths, w, deltas)
    return _estimate(s, mode, 1.0 / deltas, vals, {"grid_n": grid_n, "deltas": deltas.tolist()})


# ------------------------------------------------------------------ R^d side


def _panel_width(spec: GeneratorSpec) -> float:
    env = spec.envelope
    if isinstance(spec, BumpTime):
        return float(min(spec.widths)) / 8.0
    if isinstance(spec, Gaussian):
        return 0.25 / max(1.0, spec.sigma)
    if isinstance(spec, BSpline):
        return 0.25
    if isinstance(env, CompactSupport):
        return 0.5 / max(1.0, env.radius)
    return 0.25


def _radial_edges(h: float, ladder: np.ndarray) -> np.ndarray:
    top = float(ladder.max())
    uniform = np.arange(h, top + h, h)
    graded = h * 2.0 ** -np.arange(1, 40)
    edges = np.unique(np.concatenate([[0.0], graded, uniform[uniform < top], ladder]))
    return edges[edges <= top]


def _radial_partials(func, d: int, power: float, ladder, h: float) -> np.ndarray:
    """``int_{|u| <= R} |u|^power |func(u)|^2 du`` at each ``R`` of the ladder (d <= 3)."""
    ladder = np.asarray(ladder, dtype=float)
    edges = _radial_edges(h, ladder)
    a, b = edges[:-1], edges[1:]
    rho = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * _GL16_X[None, :]
    wr = (0.5 * (b - a))[:, None] * _GL16_W[None, :]
    if d == 1:
        dirs, wdir = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    elif d == 2:
        m = 256
        th = 2 * np.pi * np.arange(m) / m
        dirs, wdir = np.stack([np.cos(th), np.sin(th)], axis=1), np.full(m, 2 * np.pi / m)
    elif d == 3:
        ct, wt = np.polynomial.legendre.leggauss(32)
        m = 64
        ph = 2 * np.pi * np.arange(m) / m
        st = np.sqrt(1 - ct**2)
        dirs = np.stack(
            [np.outer(st, np.cos(ph)).ravel(), np.outer(st, np.sin(ph)).ravel(), np.repeat(ct, m)], axis=1
        )
        wdir = np.repeat(wt, m) * (2 * np.pi / m)
    else:
        raise ModeUnsupported("radial quadrature is implemented for d <= 3")
    flat = rho.ravel()
    panel = np.zeros(len(a))
    for dvec, wd in zip(dirs, wdir):
        pts = flat[:, None] * dvec[None, :]
        vals = np.zeros(len(flat))
        for start in range(0, len(flat), 1 << 18):
            f = np.asarray(func(pts[start : start + (1 << 18)]))
            vals[start : start + (1 << 18)] = f.real**2 + f.imag**2
        integrand = vals.reshape(rho.shape) * rho ** (d - 1 + power)
        panel += wd * np.sum(integrand * wr, axis=1)
    csum = np.concatenate([[0.0], np.cumsum(panel)])
    return csum[np.searchsorted(edges, ladder)]


def _rd_gagliardo(spec: GeneratorSpec, s: float, ladder: np.ndarray, spacing: float | None) -> tuple[np.ndarray, dict]:
    d = spec.dim
    if d > 3:
        raise ModeUnsupported("double-integral quadrature is implemented for d <= 3")
    deltas = 1.0 / ladder
    h = float(spacing) if spacing is not None else float(deltas.min()) / (8.0 * math.sqrt(d))
    if h * math.sqrt(d) > deltas.min() * (1 + 1e-12):
        raise ValueError("grid spacing must not exceed the smallest exclusion radius over sqrt(d)")
    env = spec.envelope
    compact = isinstance(env, CompactSupport)
    if compact:
        support = env.radius
    else:
        peak = max(spec.bound(0.0), 1e-300)
        support = 1.0
        while spec.bound(support) > 1e-6 * peak and support < 64.0:
            support *= 2.0
    ymax = 2.0 * support
    half = int(math.ceil(support / h)) + 1
    pad = int(math.ceil(ymax / h)) + 1
    axis = (np.arange(-half - pad, half + pad + 1)) * h
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    vals = spec(mesh.reshape(-1, d)).reshape(mesh.shape[:-1])
    rng = np.arange(-int(math.ceil(ymax / h)), int(math.ceil(ymax / h)) + 1)
    j = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    r = np.linalg.norm(j, axis=1) * h
    keep = (r > 0) & (r <= ymax)
    j, r = j[keep], r[keep]
    w = r ** (-d - 2 * s) * h ** (2 * d)
    out = _shell_energies(vals, j, r, w, deltas)
    # beyond twice the support radius the two samples do not overlap (up to the
    # 1e-6 envelope cut for decaying fhat), so |fhat(x+y) - fhat(x)|^2
    # integrates to 2 ||fhat||^2 for every such y
    norm_sq = float(np.sum(np.abs(vals) ** 2)) * h**d
    sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    tail = 2.0 * norm_sq * sphere * ymax ** (-2 * s) / (2 * s)
    return out + tail, {"spacing": h, "ymax": ymax, "tail": tail, "truncated": not compact}


def rd_seminorm_ladder(
    spec: GeneratorSpec,
    s: float,
    mode: str,
    ladder,
    panel: float | None = None,
    spacing: float | None = None,
) -> SobolevEstimate:
    """Partial homogeneous ``H^s`` seminorms of ``fhat`` over a truncation ladder.

    ``fourier_integral``: ``int_{|u|<=R} |u|^{2s} |f(u)|^2 du`` where ``f`` is
    the time-side sampler.  ``gagliardo``: the double integral of ``fhat``
    itself with exclusion radius ``1/R`` (plus the exact far-field term for
    compactly supported ``fhat``).
    """
    _check_order(s)
    ladder = np.sort(np.asarray(ladder, dtype=float))
    if np.any(ladder <= 0):
        raise ValueError("truncation parameters must be positive")
    if mode == "fourier_integral":
        if not spec.has_time_side:
            raise ModeUnsupported(f"{spec.family} has no time-domain sampler")
        h = panel if panel is not None else _panel_width(spec)
        vals = _radial_partials(spec.time, spec.dim, 2 * s, ladder, h)
        params = {"panel": h}
    elif mode == "gagliardo":
        vals, params = _rd_gagliardo(spec, s, ladder, spacing)
    else:
        raise ModeUnsupported(f"unknown mode {mode!r}")
    return _estimate(s, mode, ladder, vals, params)


def rd_seminorm(spec: GeneratorSpec, s: float, mode: str, R: float, **kw) -> float:
    """Single partial value; see ``rd_seminorm_ladder``."""
    _check_order(s)
    if R <= 0:
        raise ValueError("R must be positive")
    if mode == "fourier_integral":
        if not spec.has_time_side:
            raise ModeUnsupported(f"{spec.family} has no time-domain sampler")
        h = kw.get("panel") or _panel_width(spec)
        return float(_radial_partials(spec.time, spec.dim, 2 * s, np.array([R]), h)[0])
    if mode == "gagliardo":
        return float(_rd_gagliardo(spec, s, np.array([float(R)]), kw.get("spacing"))[0][0])
    raise ModeUnsupported(f"unknown mode {mode!r}")


def _time_sampler(f) -> tuple[Callable, int, float]:
    if isinstance(f, GeneratorSpec):
        if not f.has_time_side:
            raise ModeUnsupported(f"{f.family} has no time-domain sampler")
        if isinstance(f, BumpTime):
            h = float(min(f.widths)) / 8.0
        elif isinstance(f, IndicatorBox):
            h = 0.5 / max(1.0, f.envelope.radius)
        else:
            h = 0.25
        return f.time, f.dim, h
    if callable(f):
        return f, 1, 0.25
    raise ModeUnsupported("moment diagnostic needs a time-domain sampler")


def moment_diagnostic(f, R: float, panel: float | None = None) -> float:
    """``int_{|x| <= R} |x| |f(x)|^2 dx`` for a time-side sampler or a generator with one."""
    func, d, h = _time_sampler(f)
    return float(_radial_partials(func, d, 1.0, np.array([float(R)]), panel or h)[0])


def moment_ladder(f, ladder, panel: float | None = None) -> SobolevEstimate:
    func, d, h = _time_sampler(f)
    ladder = np.sort(np.asarray(ladder, dtype=float))
    vals = _radial_partials(func, d, 1.0, ladder, panel or h)
    return _estimate(0.5, "moment", ladder, vals, {"panel": panel or h})


# -------------------------------------------------------------- kernel ratio


@dataclass(frozen=True)
class KernelRatio:
    xi: tuple[float, ...]
    s: float
    kernel_tag: str
    value: float
    ratio: float

    def to_dict(self) -> dict:
        return {"xi": list(self.xi), "s": self.s, "kernel": self.kernel_tag, "value": self.value, "ratio": self.ratio}


def _one_minus_cos_integral(omega: float, length: float, s: float) -> float:
    """``int_0^length (1 - cos(omega r)) r^(-1-2s) dr``."""
    if omega == 0.0 or length <= 0.0:
        return 0.0
    b = min(length, 2.0 * math.pi / omega)

    def smooth(r):
        return 0.5 * omega * omega * np.sinc(omega * r / (2.0 * math.pi)) ** 2

    near = integrate.quad(smooth, 0.0, b, weight="alg", wvar=(1.0 - 2.0 * s, 0.0), limit=200)[0]
    if b >= length:
        return near
    power = (b ** (-2 * s) - length ** (-2 * s)) / (2 * s)
    osc = integrate.quad(lambda r: r ** (-1.0 - 2 * s), b, length, weight="cos", wvar=omega, limit=400)[0]
    return near + power - osc


def _kernel_g(xi: np.ndarray, s: float, lattice: Lattice) -> float:
    d = lattice.dim
    if d == 1:
        return 4.0 * _one_minus_cos_integral(2 * math.pi * abs(xi[0]), 0.5 * abs(lattice.basis[0, 0]), s)
    inv = lattice.inverse

    def rho_max(theta_vec):
        return 0.5 / np.max(np.abs(inv @ theta_vec))

    if d == 2:
        corners = lattice.to_points(np.array([[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]]))
        breaks = sorted(
            {float(np.arctan2(c[1], c[0]) % (2 * math.pi)) for c in corners}
            | {float((math.atan2(xi[1], xi[0]) + k * math.pi / 2) % (2 * math.pi)) for k in (1, 3)}
        )

        def integrand(th):
            u = np.array([math.cos(th), math.sin(th)])
            return 2.0 * _one_minus_cos_integral(2 * math.pi * abs(float(xi @ u)), rho_max(u), s)

        edges = [0.0] + [b for b in breaks if 0.0 < b < 2 * math.pi] + [2 * math.pi]
        return float(sum(integrate.quad(integrand, lo, hi, limit=100)[0] for lo, hi in zip(edges[:-1], edges[1:])))
    if d == 3:
        ct, wt = np.polynomial.legendre.leggauss(32)
        m = 64
        total = 0.0
        for c, w in zip(ct, wt):
            st = math.sqrt(1 - c * c)
            for k in range(m):
                ph = 2 * math.pi * k / m
                u = np.array([st * math.cos(ph), st * math.sin(ph), c])
                total += w * (2 * math.pi / m) * 2.0 * _one_minus_cos_integral(
                    2 * math.pi * abs(float(xi @ u)), rho_max(u), s
                )
        return total
    raise ModeUnsupported("kernel G is implemented for d <= 3")


def _kernel_h(xi: np.ndarray, s: float, lattice: Lattice) -> float:
    total = 0.0
    for j in range(lattice.dim):
        total += 4.0 * _one_minus_cos_integral(2 * math.pi * abs(float(xi @ lattice.basis[:, j])), 0.5, s)
    return total


def kernel_ratio(xi, s: float, lattice: Lattice, kernel: str = "G") -> KernelRatio:
    """Kernel value at a nonzero dual point divided by ``|xi|^(2s)``."""
    _check_order(s)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (lattice.dim,):
        raise ValueError(f"xi must have {lattice.dim} entries")
    if np.all(xi == 0):
        raise ZeroFrequency("kernel ratio is undefined at xi = 0")
    if not lattice.dual().contains(xi):
        raise ValueError("xi is not a point of the dual lattice")
    if kernel == "G":
        val = _kernel_g(xi, s, lattice)
    elif kernel == "H":
        val = _kernel_h(xi, s, lattice)
    else:
        raise ValueError(f"kernel must be 'G' or 'H', got {kernel!r}")
    norm = float(np.linalg.norm(xi))
    return KernelRatio(tuple(float(v) for v in xi), s, kernel, float(val), float(val / norm ** (2 * s)))


def kernel_band(
    lattice: Lattice, s: float, kernel: str = "G", r_lo: float = 1.0, r_hi: float = 100.0, max_points: int = 200
) -> dict:
    """Min, max and relative spread of kernel ratios over dual points with ``r_lo <= |xi| <= r_hi``."""
    pts = lattice.dual().points_in_ball(np.zeros(lattice.dim), r_hi)
    r = np.linalg.norm(pts, axis=1)
    pts = pts[(r >= r_lo * (1 - 1e-12)) & (r > 0)]
    # one representative per +-xi pair; the kernels are even
    half = pts[[tuple(p) >= tuple(-p) for p in pts]]
    if len(half) > max_points:
        half = half[np.linspace(0, len(half) - 1, max_points).round().astype(int)]
    ratios = np.array([kernel_ratio(p, s, lattice, kernel).ratio for p in half])
    lo, hi = float(ratios.min()), float(ratios.max())
    order = np.argsort(np.linalg.norm(half, axis=1), kind="stable")
    table = [[float(np.linalg.norm(half[i])), float(ratios[i])] for i in order]
    return {
        "kernel": kernel,
        "s": s,
        "r_lo": r_lo,
        "r_hi": r_hi,
        "min": lo,
        "max": hi,
        "spread": (hi - lo) / lo,
        "count": len(half),
        "table": table,
    }


# ------------------------------------------------- bracket product embedding


@dataclass(frozen=True)
class BracketEmbedding:
    holds: bool
    lhs: float
    rhs: float
    delta_excl: float
    sup_pg: float
    sup_ph: float
    di_g: float
    di_h: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _line_double_integral(spec: GeneratorSpec, lattice: Lattice, n: int, offs, r, w, delta: float) -> float:
    """Grid double integral over all of R^d on the periodic grid extended by lattice translates."""
    if spec.is_zero:
        return 0.0
    d = lattice.dim
    env = spec.envelope
    if isinstance(env, CompactSupport):
        reach = env.radius
    else:
        peak = max(spec.bound(0.0), 1e-300)
        reach = 1.0
        while spec.bound(reach) > 1e-12 * peak and reach < 1024.0:
            reach *= 2.0
    cells = int(math.ceil(np.linalg.norm(lattice.inverse, 2) * (reach + lattice.diameter))) + 1
    t1 = grid_coords(n, 1)[:, 0]
    # coordinates of the extended grid: translates of the base grid by -cells..cells
    axis = (np.arange(-cells, cells + 1)[:, None] + t1[None, :]).ravel()
    pad = n // 2 + 1
    step = 1.0 / n
    axis = np.concatenate([axis[0] - step * np.arange(pad, 0, -1), axis, axis[-1] + step * np.arange(1, pad + 1)])
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    vals = spec(lattice.to_points(mesh.reshape(-1, d))).reshape(mesh.shape[:-1])
    return float(_shell_energies(vals, offs, r, w, [delta])[0])


def bracket_embedding_check(
    g: GeneratorSpec, h: GeneratorSpec, lattice: Lattice, s: float, grid_n: int = 256, delta_excl: float | None = None
) -> BracketEmbedding:
    """Check the embedding inequality for bracket products on a common grid.

    Left side: torus double integral of ``[g, h]`` over ``M x M``.  Right
    side: ``2 (sup P(g) DI(h) + sup P(h) DI(g))`` where ``DI`` is the double
    integral over ``R^d x M`` and ``P`` the periodized squared modulus.  Both
    sides use the same grid and the same exclusion radius, under which the
    inequality holds term by term.
    """
    _check_order(s)
    delta = _cell_diameter(lattice, grid_n) if delta_excl is None else float(delta_excl)
    _check_delta(lattice, grid_n, delta)
    offs, r, w = _gagliardo_offsets(lattice, s, grid_n)
    specs = GeneratorSet((g, h)) if not (g.is_zero and h.is_zero) else None
    if specs is None:
        return BracketEmbedding(True, 0.0, 0.0, delta, 0.0, 0.0, 0.0, 0.0)
    fld = gramian_field(specs, lattice, grid_n)
    bracket = fld.values[:, 0, 1].reshape((grid_n,) * lattice.dim)
    lhs = float(_shell_energies(bracket, offs, r, w, [delta])[0])
    err = fld.trunc_err if math.isfinite(fld.trunc_err) else 0.0
    sup_pg = float(np.max(fld.values[:, 0, 0].real)) + err
    sup_ph = float(np.max(fld.values[:, 1, 1].real)) + err
    di_g = _line_double_integral(g, lattice, grid_n, offs, r, w, delta)
    di_h = _line_double_integral(h, lattice, grid_n, offs, r, w, delta)
    rhs = 2.0 * (sup_pg * di_h + sup_ph * di_g)
    holds = lhs <= rhs * (1 + 1e-10) + 1e-300
    return BracketEmbedding(bool(holds), lhs, rhs, delta, sup_pg, sup_ph, di_g, di_h)
