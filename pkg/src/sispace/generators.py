"""Fourier-side generator models with certified decay envelopes.

Each spec describes one generator through its Fourier transform ``fhat``
(the object the Gramian is built from) and, where available, the time-side
function ``f``.  Conventions::

    fhat(xi) = ∫ f(x) exp(-2πi x·xi) dx,    f(x) = ∫ fhat(xi) exp(2πi x·xi) dxi

A time shift ``f(x - tau)`` multiplies ``fhat`` by ``exp(-2πi xi·tau)``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np
from scipy import integrate, special

__all__ = [
    "CompactSupport",
    "PolyDecay",
    "GeneratorSpec",
    "IndicatorBox",
    "BumpFourier",
    "BumpTime",
    "Tabulated",
    "BSpline",
    "Gaussian",
    "GeneratorSet",
    "eval_fourier",
    "decay_envelope",
    "shift_modulate",
    "mollifier",
    "spec_from_dict",
    "GL_ORDER",
]

GL_ORDER = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
# oscillation periods one 64-point panel is asked to resolve
_CYCLES_PER_PANEL = 10.0
_MIN_PANELS = 4
_ROW_CHUNK = 256


def mollifier(u) -> np.ndarray:
    """Standard C_c^∞ bump ``exp(-1/(1-u^2))`` on ``|u| < 1``, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _radial_mollifier_norm_sq(d: int) -> float:
    """∫_{|u|<1} mollifier(|u|)^2 du in dimension d."""
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    val, _ = integrate.quad(
        lambda r: math.exp(-2.0 / (1.0 - r * r)) * r ** (d - 1) if r < 1 else 0.0,
        0.0,
        1.0,
        epsabs=1e-16,
        epsrel=1e-13,
        limit=200,
    )
    return area * val


_MOLLIFIER_SQ_1D = _radial_mollifier_norm_sq(1)


def composite_gl(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite 64-point Gauss–Legendre rule on [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


@dataclass(frozen=True)
class CompactSupport:
    """``fhat`` vanishes for ``|xi| > radius`` and is bounded by ``peak``."""

    radius: float
    peak: float

    def bound(self, r: float) -> float:
        return 0.0 if r > self.radius else self.peak

    def to_dict(self) -> dict:
        return {"kind": "compact", "radius": self.radius, "peak": self.peak}


@dataclass(frozen=True)
class PolyDecay:
    """``|fhat(xi)| <= constant * (1 + |xi|)^(-exponent)`` for all xi."""

    constant: float
    exponent: float

    def bound(self, r: float) -> float:
        return self.constant * (1.0 + r) ** (-self.exponent)

    def to_dict(self) -> dict:
        return {"kind": "poly", "constant": self.constant, "exponent": self.exponent}


def _points(xi, d: int) -> np.ndarray:
    arr = np.asarray(xi, dtype=float)
    if d == 1:
        # scalars and plain vectors are points on the line; keep an explicit (..., 1) axis
        if arr.ndim < 2 or arr.shape[-1] != 1:
            arr = arr[..., None]
    elif arr.ndim == 0 or arr.shape[-1] != d:
        raise ValueError(f"expected trailing dimension {d}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False, kw_only=True)
class GeneratorSpec:
    """Base class; subclasses implement ``_fhat`` and optionally ``_f``."""

    dim: int = 1
    shift: tuple[float, ...] = ()
    scale: float = 1.0

    family: ClassVar[str] = "abstract"

    def __post_init__(self):
        shift = tuple(float(v) for v in np.atleast_1d(self.shift)) if len(np.atleast_1d(self.shift)) else ()
        if shift and len(shift) != self.dim:
            raise ValueError(f"shift must have {self.dim} entries")
        object.__setattr__(self, "shift", shift or (0.0,) * self.dim)

    # subclasses
    def _fhat(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _f(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def has_time_side(self) -> bool:
        return type(self)._f is not GeneratorSpec._f

    @property
    def envelope(self):
        raise NotImplementedError

    # public evaluation
    def __call__(self, xi) -> np.ndarray:
        pts = _points(xi, self.dim)
        flat = pts.reshape(-1, self.dim)
        val = self._fhat(flat).astype(complex)
        tau = np.asarray(self.shift)
        if np.any(tau):
            val = val * np.exp(-2j * np.pi * (flat @ tau))
        if self.scale != 1.0:
            val = val * self.scale
        return val.reshape(pts.shape[:-1])

    def time(self, x) -> np.ndarray:
        """Time-side value ``f(x)`` including shift and scale."""
        if not self.has_time_side:
            from .errors import ModeUnsupported

            raise ModeUnsupported(f"{self.family} has no time-domain sampler")
        pts = _points(x, self.dim)
        flat = pts.reshape(-1, self.dim) - np.asarray(self.shift)
        val = self._f(flat).astype(complex) * self.scale
        return val.reshape(pts.shape[:-1])

    def eval_offsets(self, nodes: np.ndarray, lattice_pts: np.ndarray, reach: float | None = None) -> np.ndarray:
        """Matrix ``fhat(nodes[i] - lattice_pts[m])`` of shape ``(n, M)``.

        ``reach`` optionally bounds ``|nodes[i] - lattice_pts[m]|`` per axis;
        quadrature-based families use it to fix their rule independently of
        which nodes are passed.
        """
        nodes = np.asarray(nodes, dtype=float).reshape(-1, self.dim)
        lattice_pts = np.asarray(lattice_pts, dtype=float).reshape(-1, self.dim)
        diff = nodes[:, None, :] - lattice_pts[None, :, :]
        return self(diff)

    def bound(self, r: float) -> float:
        return abs(self.scale) * self.envelope.bound(r)

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        out = {"family": self.family, "dim": self.dim}
        out.update(self.params())
        if any(self.shift):
            out["shift"] = list(self.shift)
        if self.scale != 1.0:
            out["scale"] = self.scale
        out["envelope"] = self.envelope.to_dict()
        return out


@dataclass(frozen=True, eq=False, kw_only=True)
class IndicatorBox(GeneratorSpec):
    """``fhat = χ_[lower, upper)`` (half-open box); time side is a modulated sinc product."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    family: ClassVar[str] = "indicator_box"

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ValueError("lower and upper must have equal length")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box must have positive side lengths")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "dim", len(lo))
        super().__post_init__()

    @property
    def envelope(self) -> CompactSupport:
        far = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return CompactSupport(radius=float(np.linalg.norm(far)), peak=1.0)

    def _fhat(self, xi):
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((xi >= lo) & (xi < hi), axis=-1).astype(float)

    def _f(self, x):
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        width = hi - lo
        center = 0.5 * (hi + lo)
        mag = np.prod(width * np.sinc(width * x), axis=-1)
        return mag * np.exp(2j * np.pi * (x @ center))

    def params(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True, eq=False, kw_only=True)
class BumpFourier(GeneratorSpec):
    """Radial mollifier used directly as ``fhat``, L2-normalized by default."""

    center: tuple[float, ...]
    radius: float
    normalize: bool = True
    amplitude: float = field(init=False)

    family: ClassVar[str] = "bump_fourier"

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "dim", len(c))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        super().__post_init__()
        amp = 1.0
        if self.normalize:
            amp = 1.0 / math.sqrt(_radial_mollifier_norm_sq(self.dim) * self.radius**self.dim)
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "_time_cache", {})

    @property
    def envelope(self) -> CompactSupport:
        return CompactSupport(
            radius=float(np.linalg.norm(self.center)) + self.radius,
            peak=self.amplitude * math.exp(-1.0),
        )

    def _fhat(self, xi):
        u = np.linalg.norm(xi - np.asarray(self.center), axis=-1) / self.radius
        return self.amplitude * mollifier(u)

    def _time_rule(self):
        cache = self._time_cache
        if "rule" not in cache:
            axes = [composite_gl(c - self.radius, c + self.radius, 8) for c in self.center]
            grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
            wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=-1)
            weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)
            vals = self._fhat(nodes) * weights
            keep = vals != 0
            cache["rule"] = (nodes[keep], vals[keep])
        return cache["rule"]

    def _f(self, x):
        nodes, wv = self._time_rule()
        out = np.empty(len(x), dtype=complex)
        for start in range(0, len(x), _ROW_CHUNK):
            blk = x[start : start + _ROW_CHUNK]
            out[start : start + _ROW_CHUNK] = np.exp(2j * np.pi * (blk @ nodes.T)) @ wv
        return out

    def params(self) -> dict:
        return {"center": list(self.center), "radius": self.radius, "normalize": self.normalize}


@dataclass(frozen=True, eq=False, kw_only=True)
class BumpTime(GeneratorSpec):
    """Tensor-product mollifier supported on a box in time; ``fhat`` by quadrature.

    The Fourier transform is computed per axis with a composite 64-point
    Gauss–Legendre rule whose panel count grows with the largest frequency
    requested.  The decay envelope is a fitted ``C (1 + |xi|)^-4`` bound.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    amplitude: float | None = None
    decay_exponent: float = 4.0
    safety: float = 1.25
    _envelope: PolyDecay = field(init=False, repr=False)

    family: ClassVar[str] = "bump_time"

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("support box must have positive side lengths")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "dim", len(lo))
        super().__post_init__()
        if self.amplitude is None:
            half = 0.5 * (np.asarray(hi) - np.asarray(lo))
            norm_sq = np.prod(half * _MOLLIFIER_SQ_1D)
            object.__setattr__(self, "amplitude", float(1.0 / math.sqrt(norm_sq)))
        object.__setattr__(self, "_rules", {})
        object.__setattr__(self, "_envelope", self._fit_envelope())

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def envelope(self) -> PolyDecay:
        return self._envelope

    def _axis_amplitude(self) -> float:
        return float(self.amplitude) ** (1.0 / self.dim)

    def _rule(self, axis: int, panels: int):
        key = (axis, panels)
        if key not in self._rules:
            a, b = self.lower[axis], self.upper[axis]
            x, w = composite_gl(a, b, panels)
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            wv = w * self._axis_amplitude() * mollifier((x - mid) / half)
            self._rules[key] = (x, wv)
        return self._rules[key]

    def _panels(self, axis: int, max_freq: float) -> int:
        # round the frequency bound up to a power of two so nested evaluation
        # sets share one rule
        top = 2.0 ** math.ceil(math.log2(max(max_freq, 1.0)))
        return max(_MIN_PANELS, int(math.ceil(top * self.widths[axis] / _CYCLES_PER_PANEL)))

    def axis_fhat(self, axis: int, xi: np.ndarray, panels: int | None = None) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if panels is None:
            panels = self._panels(axis, float(np.max(np.abs(xi), initial=0.0)))
        x, wv = self._rule(axis, panels)
        flat = xi.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, len(flat), 4096):
            blk = flat[start : start + 4096]
            out[start : start + 4096] = np.exp(-2j * np.pi * np.outer(blk, x)) @ wv
        return out.reshape(xi.shape)

    def _fhat(self, xi):
        val = np.ones(len(xi), dtype=complex)
        for j in range(self.dim):
            val *= self.axis_fhat(j, xi[:, j])
        return val

    def _f(self, x):
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return float(self.amplitude) * np.prod(mollifier((x - mid) / half), axis=-1)

    def eval_offsets(self, nodes, lattice_pts, reach=None):
        nodes = np.asarray(nodes, dtype=float).reshape(-1, self.dim)
        lattice_pts = np.asarray(lattice_pts, dtype=float).reshape(-1, self.dim)
        n, m = len(nodes), len(lattice_pts)
        out = np.ones((n, m), dtype=complex)
        for j in range(self.dim):
            if reach is None:
                span = float(np.max(np.abs(nodes[:, j]), initial=0.0) + np.max(np.abs(lattice_pts[:, j]), initial=0.0))
            else:
                span = float(reach)
            x, wv = self._rule(j, self._panels(j, span))
            # exp(-2πi (a - b) t) = exp(-2πi a t) exp(2πi b t): one GEMM per axis
            right = self._right_factor(j, x, lattice_pts[:, j])
            for start in range(0, n, _ROW_CHUNK):
                blk = nodes[start : start + _ROW_CHUNK, j]
                left = np.exp(-2j * np.pi * np.outer(blk, x)) * wv
                if len(blk) == 1:
                    # keep the GEMM code path so values do not depend on chunking
                    out[start : start + 1] *= (np.vstack([left, left]) @ right)[:1]
                else:
                    out[start : start + _ROW_CHUNK] *= left @ right
        tau = np.asarray(self.shift)
        if np.any(tau):
            out *= np.exp(-2j * np.pi * (nodes @ tau))[:, None] * np.exp(2j * np.pi * (lattice_pts @ tau))[None, :]
        if self.scale != 1.0:
            out *= self.scale
        return out

    def _right_factor(self, axis: int, x: np.ndarray, col: np.ndarray) -> np.ndarray:
        # the lattice side is reused across node chunks; keep the last one
        key = (axis, len(x), col.shape, hash(col.tobytes()))
        cached = self._rules.get(("right", axis))
        if cached is not None and cached[0] == key:
            return cached[1]
        right = np.exp(2j * np.pi * np.outer(x, col))
        self._rules[("right", axis)] = (key, right)
        return right

    def _fit_envelope(self) -> PolyDecay:
        p = self.decay_exponent
        const = 1.0
        for j in range(self.dim):
            width = self.widths[j]
            r = np.linspace(0.0, 80.0 / width, 8001)
            vals = np.abs(self.axis_fhat(j, r, panels=self._panels(j, r[-1])))
            const *= float(np.max(vals * (1.0 + r) ** p))
        # prod_j (1+|xi_j|)^-p <= d^(p/2) (1+|xi|)^-p
        const *= self.dim ** (p / 2.0)
        return PolyDecay(constant=self.safety * const, exponent=p)

    def params(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "amplitude": self.amplitude}


@dataclass(frozen=True, eq=False, kw_only=True)
class Tabulated(GeneratorSpec):
    """``fhat`` given by samples on a 1-D grid, linearly interpolated, zero outside."""

    grid: tuple[float, ...]
    values: tuple[complex, ...]

    family: ClassVar[str] = "tabulated"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if g.ndim != 1 or g.shape != v.shape or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("tabulated data needs an increasing 1-D grid with matching values")
        object.__setattr__(self, "grid", tuple(g.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "dim", 1)
        super().__post_init__()

    @property
    def envelope(self) -> CompactSupport:
        g = np.asarray(self.grid)
        return CompactSupport(radius=float(np.max(np.abs(g))), peak=float(np.max(np.abs(self.values))))

    def _fhat(self, xi):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        t = xi[:, 0]
        re = np.interp(t, g, v.real, left=0.0, right=0.0)
        im = np.interp(t, g, v.imag, left=0.0, right=0.0)
        return re + 1j * im

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0 or not np.any(np.asarray(self.values))

    def params(self) -> dict:
        v = np.asarray(self.values)
        return {"grid": list(self.grid), "values_re": v.real.tolist(), "values_im": v.imag.tolist()}


@dataclass(frozen=True, eq=False, kw_only=True)
class BSpline(GeneratorSpec):
    """Centered cardinal B-spline of given order in time; ``fhat = prod sinc(xi_j)^order``."""

    order: int = 2

    family: ClassVar[str] = "bspline"

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        super().__post_init__()

    @property
    def envelope(self) -> PolyDecay:
        # |sinc t| <= (1 + 1/π) / (1 + |t|) and prod_j (1+|t_j|)^-m <= d^(m/2) (1+|t|)^-m
        m, d = self.order, self.dim
        return PolyDecay(constant=(1.0 + 1.0 / math.pi) ** (m * d) * d ** (m / 2.0), exponent=float(m))

    def _fhat(self, xi):
        return np.prod(np.sinc(xi) ** self.order, axis=-1)

    def _f(self, x):
        m = self.order
        out = np.ones(x.shape[:-1])
        for j in range(self.dim):
            t = x[..., j] + m / 2.0
            acc = np.zeros_like(t)
            for k in range(m + 1):
                acc += (-1) ** k * special.comb(m, k) * np.clip(t - k, 0.0, None) ** (m - 1)
            out = out * acc / math.factorial(m - 1)
        return out

    def params(self) -> dict:
        return {"order": self.order}


@dataclass(frozen=True, eq=False, kw_only=True)
class Gaussian(GeneratorSpec):
    """``fhat(xi) = a exp(-π σ² |xi|²)`` with ``a`` chosen so that ``||f||_2 = 1``."""

    sigma: float = 1.0
    decay_exponent: float | None = None

    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        super().__post_init__()

    @property
    def amplitude(self) -> float:
        return (2.0 * self.sigma**2) ** (self.dim / 4.0)

    @property
    def envelope(self) -> PolyDecay:
        p = self.decay_exponent or float(2 * self.dim + 2)
        c = math.pi * self.sigma**2
        r = 0.5 * (-1.0 + math.sqrt(1.0 + 2.0 * p / c))
        const = self.amplitude * (1.0 + r) ** p * math.exp(-c * r * r)
        return PolyDecay(constant=const * (1.0 + 1e-12), exponent=p)

    def _fhat(self, xi):
        return self.amplitude * np.exp(-math.pi * self.sigma**2 * np.sum(xi * xi, axis=-1))

    def _f(self, x):
        s = self.sigma
        return self.amplitude * s ** (-self.dim) * np.exp(-math.pi * np.sum(x * x, axis=-1) / s**2)

    def params(self) -> dict:
        return {"sigma": self.sigma}


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Ordered K-tuple of generators sharing one dimension."""

    specs: tuple[GeneratorSpec, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs:
            raise ValueError("a generator set needs K >= 1 generators")
        dims = {s.dim for s in specs}
        if len(dims) != 1:
            raise ValueError(f"generators disagree on dimension: {sorted(dims)}")
        if all(s.is_zero for s in specs):
            raise ValueError("generator set is trivial: every generator is zero")
        names = tuple(self.names) or tuple(f"f{k + 1}" for k in range(len(specs)))
        if len(names) != len(specs):
            raise ValueError("names must match specs")
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "names", names)

    @property
    def K(self) -> int:
        return len(self.specs)

    @property
    def dim(self) -> int:
        return self.specs[0].dim

    def __iter__(self):
        return iter(self.specs)

    def __len__(self) -> int:
        return len(self.specs)

    def __getitem__(self, k):
        return self.specs[k]

    def scaled(self, c: float) -> "GeneratorSet":
        return GeneratorSet(tuple(dataclasses.replace(s, scale=s.scale * c) for s in self.specs), self.names)


def eval_fourier(spec: GeneratorSpec, xi) -> np.ndarray:
    return spec(xi)


def decay_envelope(spec: GeneratorSpec, radius: float) -> float:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return spec.bound(radius)


def shift_modulate(spec: GeneratorSpec, tau) -> GeneratorSpec:
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    return dataclasses.replace(spec, shift=tuple(np.asarray(spec.shift) + tau))


_FAMILIES: dict[str, Callable[..., GeneratorSpec]] = {
    "indicator_box": IndicatorBox,
    "bump_fourier": BumpFourier,
    "bump_time": BumpTime,
    "tabulated": Tabulated,
    "bspline": BSpline,
    "gaussian": Gaussian,
}


def spec_from_dict(data: dict) -> GeneratorSpec:
    """Build a spec from its serialized form (the inverse of ``to_dict``)."""
    data = dict(data)
    family = data.pop("family")
    data.pop("envelope", None)
    if family not in _FAMILIES:
        raise KeyError(family)
    if family == "tabulated":
        re = data.pop("values_re")
        im = data.pop("values_im", [0.0] * len(re))
        data["values"] = tuple(complex(a, b) for a, b in zip(re, im))
    if "shift" in data:
        data["shift"] = tuple(np.atleast_1d(data["shift"]).tolist())
    cls = _FAMILIES[family]
    if family in ("indicator_box", "bump_fourier", "bump_time", "tabulated"):
        data.pop("dim", None)
    return cls(**data)
