"""Lattice periodizations: bracket products and Gramian fields.

For generators ``fhat_1..fhat_K`` and a lattice ``L`` the Gramian at ``x`` is
the K×K matrix ``sum_{l in L} F(x - l) F(x - l)^*``.  Sums are truncated at a
radius certified by the generators' decay envelopes, and the resulting
entrywise error bound travels with the field as ``trunc_err``.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import TailBoundUnattainable
from .generators import CompactSupport, GeneratorSet, GeneratorSpec, PolyDecay
from .lattice import Lattice

__all__ = [
    "GramianField",
    "GRID_OFFSET",
    "bracket_product",
    "gramian_at",
    "gramian_field",
    "grid_coords",
    "tail_bound",
    "truncation_radius",
    "thread_count",
]

# Fixed shift of every grid node in lattice coordinates: half a cell of the
# finest supported grid.  Grids with n and 2n nodes per axis are nested.
MAX_PER_AXIS = 4096
GRID_OFFSET = 0.5 / MAX_PER_AXIS
_CHUNK = 256
_MAX_DOUBLINGS = 80


def thread_count() -> int:
    """Worker threads for node evaluation, from ``SISPACE_THREADS`` (default 1)."""
    raw = os.environ.get("SISPACE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def tail_bound(f: GeneratorSpec, g: GeneratorSpec, lat: Lattice, radius: float) -> float:
    """Upper bound on ``sum_{|x - l| > radius} |f(x - l)| |g(x - l)|`` for any x.

    Exact zero beyond a compact support; otherwise an integral comparison of
    the product envelope ``C (1 + r)^-p`` over lattice cells.
    """
    if f.is_zero or g.is_zero:
        return 0.0
    ef, eg = f.envelope, g.envelope
    compact = [e.radius for e in (ef, eg) if isinstance(e, CompactSupport)]
    if compact:
        return 0.0 if radius >= min(compact) else math.inf
    assert isinstance(ef, PolyDecay) and isinstance(eg, PolyDecay)
    d = lat.dim
    p = ef.exponent + eg.exponent
    if p <= d:
        return math.inf
    diam = lat.diameter
    if radius < 2.0 * diam:
        return math.inf
    const = abs(f.scale * g.scale) * ef.constant * eg.constant
    sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    return (
        sphere
        / lat.det_abs
        * const
        * max(1.0, diam) ** (d - 1)
        * (1.0 + radius - 2.0 * diam) ** (d - p)
        / (p - d)
    )


def truncation_radius(f: GeneratorSpec, g: GeneratorSpec, lat: Lattice, eps_tail: float) -> float:
    """Smallest radius on a doubling sweep whose certified tail is ``<= eps_tail``."""
    if not eps_tail > 0:
        raise ValueError("eps_tail must be positive")
    if math.isinf(eps_tail) or f.is_zero or g.is_zero:
        return 0.0
    ef, eg = f.envelope, g.envelope
    compact = [e.radius for e in (ef, eg) if isinstance(e, CompactSupport)]
    if compact:
        return float(min(compact))
    p = ef.exponent + eg.exponent
    if p <= lat.dim:
        raise TailBoundUnattainable(
            f"envelope exponents sum to {p} <= dimension {lat.dim}; the lattice tail diverges"
        )
    r = max(1.0, 2.0 * lat.diameter)
    for _ in range(_MAX_DOUBLINGS):
        if tail_bound(f, g, lat, r) <= eps_tail:
            return r
        r *= 2.0
    raise TailBoundUnattainable(f"no radius up to {r:.3e} certifies eps_tail={eps_tail:g}")


def bracket_product(f: GeneratorSpec, g: GeneratorSpec, lat: Lattice, x, eps_tail: float = 1e-10) -> complex:
    """``sum_{l in lat} f(x - l) conj(g(x - l))`` truncated to within ``eps_tail``."""
    r = truncation_radius(f, g, lat, eps_tail)
    x = np.asarray(x, dtype=float).reshape(lat.dim)
    pts = lat.points_in_ball(x, r)
    diff = x[None, :] - pts
    return complex(np.sum(f(diff) * np.conj(g(diff))))


def grid_coords(n_per_axis: int, d: int) -> np.ndarray:
    """Lattice coordinates of the ``n^d`` grid nodes, C-ordered, shape ``(n^d, d)``."""
    t = np.arange(n_per_axis) / n_per_axis - 0.5 + GRID_OFFSET
    mesh = np.meshgrid(*([t] * d), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, d)


@dataclass(frozen=True, eq=False)
class GramianField:
    """Samples of the Gramian on a uniform grid over one fundamental domain of ``lattice``."""

    lattice: Lattice
    grid: np.ndarray
    values: np.ndarray
    trunc_err: float
    n_per_axis: int
    radius: float
    offset: float = GRID_OFFSET
    names: tuple[str, ...] = field(default=())

    @property
    def K(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def n_nodes(self) -> int:
        return len(self.grid)

    @property
    def node_shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    def neighbor_pairs(self) -> np.ndarray:
        """Index pairs of grid-adjacent nodes (periodic wrap), shape ``(m, 2)``."""
        idx = np.arange(self.n_nodes).reshape(self.node_shape)
        pairs = []
        for ax in range(self.dim):
            nxt = np.roll(idx, -1, axis=ax)
            pairs.append(np.stack([idx.ravel(), nxt.ravel()], axis=1))
        out = np.concatenate(pairs)
        if self.n_per_axis == 2:
            out = np.unique(np.sort(out, axis=1), axis=0)
        return out

    def summary(self) -> dict:
        diag = np.real(np.diagonal(self.values, axis1=1, axis2=2))
        return {
            "K": self.K,
            "dim": self.dim,
            "n_per_axis": self.n_per_axis,
            "n_nodes": self.n_nodes,
            "grid_offset": self.offset,
            "radius": self.radius,
            "trunc_err": self.trunc_err,
            "lattice": self.lattice.to_list(),
            "diag_min": diag.min(axis=0).tolist(),
            "diag_max": diag.max(axis=0).tolist(),
        }


def _field_radius(F: GeneratorSet, lat: Lattice, eps_tail: float) -> tuple[float, float]:
    radius = 0.0
    for j in range(F.K):
        for k in range(j, F.K):
            radius = max(radius, truncation_radius(F[j], F[k], lat, eps_tail))
    err = 0.0
    if not math.isinf(eps_tail):
        for j in range(F.K):
            for k in range(j, F.K):
                err = max(err, tail_bound(F[j], F[k], lat, radius))
    else:
        err = math.inf
    return radius, err


def _evaluate(F: GeneratorSet, nodes: np.ndarray, pts: np.ndarray, reach: float) -> np.ndarray:
    """Gramians at ``nodes`` summed over the fixed lattice point set ``pts``."""
    n = len(nodes)
    K = F.K
    out = np.empty((n, K, K), dtype=complex)
    # generators differing only by shift and scale share one base evaluation
    groups: dict[str, list[int]] = {}
    bases: dict[str, GeneratorSpec] = {}
    for k, spec in enumerate(F):
        base = dataclasses.replace(spec, shift=(0.0,) * spec.dim, scale=1.0)
        key = json.dumps({kk: v for kk, v in base.to_dict().items() if kk != "envelope"}, sort_keys=True)
        groups.setdefault(key, []).append(k)
        bases.setdefault(key, base)
    pt_phase = {}
    for k, spec in enumerate(F):
        tau = np.asarray(spec.shift)
        if np.any(tau):
            pt_phase[k] = np.exp(2j * np.pi * (pts @ tau))

    def work(start: int) -> None:
        blk = nodes[start : start + _CHUNK]
        vals = np.empty((len(blk), K, len(pts)), dtype=complex)
        for key, members in groups.items():
            raw = bases[key].eval_offsets(blk, pts, reach=reach)
            for k in members:
                spec = F[k]
                v = raw
                if k in pt_phase:
                    v = v * np.exp(-2j * np.pi * (blk @ np.asarray(spec.shift)))[:, None] * pt_phase[k][None, :]
                if spec.scale != 1.0:
                    v = v * spec.scale
                vals[:, k, :] = v
        g = np.matmul(vals, np.conj(np.swapaxes(vals, 1, 2)))
        out[start : start + len(blk)] = 0.5 * (g + np.conj(np.swapaxes(g, 1, 2)))

    starts = range(0, n, _CHUNK)
    threads = thread_count()
    if threads > 1 and n > _CHUNK:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for s in starts:
            work(s)
    return out


def _point_set(lat: Lattice, radius: float, node_extent: float) -> tuple[np.ndarray, float]:
    pts = lat.points_in_ball(np.zeros(lat.dim), radius + node_extent)
    reach = node_extent + float(np.max(np.abs(pts), initial=0.0))
    return pts, reach


def gramian_field(
    F: GeneratorSet, lat: Lattice, n_per_axis: int, eps_tail: float = 1e-10
) -> GramianField:
    """Gramian of ``F`` periodized over ``lat`` on an ``n^d`` grid in its fundamental domain."""
    if F.dim != lat.dim:
        raise ValueError(f"generator dimension {F.dim} != lattice dimension {lat.dim}")
    if n_per_axis < 2:
        raise ValueError("n_per_axis must be at least 2")
    if n_per_axis > MAX_PER_AXIS:
        raise ValueError(f"n_per_axis must not exceed {MAX_PER_AXIS}")
    radius, err = _field_radius(F, lat, eps_tail)
    t = grid_coords(n_per_axis, lat.dim)
    nodes = lat.to_points(t)
    # every node lies in M, so |x| <= diam(M); one point set serves all nodes
    pts, reach = _point_set(lat, radius, lat.diameter)
    values = _evaluate(F, nodes, pts, reach)
    nodes.setflags(write=False)
    values.setflags(write=False)
    return GramianField(
        lattice=lat,
        grid=nodes,
        values=values,
        trunc_err=float(err),
        n_per_axis=int(n_per_axis),
        radius=float(radius),
        names=F.names,
    )


def gramian_at(F: GeneratorSet, lat: Lattice, points, eps_tail: float = 1e-10) -> tuple[np.ndarray, float]:
    """Gramians at arbitrary points (reduced into ``M`` first) and the truncation bound."""
    radius, err = _field_radius(F, lat, eps_tail)
    x = lat.reduce(np.asarray(points, dtype=float).reshape(-1, lat.dim))
    pts, reach = _point_set(lat, radius, lat.diameter)
    return _evaluate(F, x, pts, reach), float(err)
