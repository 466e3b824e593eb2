"""Full-rank lattices in R^d: duals, indices, fundamental domains, cosets.

A lattice is stored through a basis matrix ``A`` whose *columns* generate it,
so the lattice is ``A @ Z^d``.  The fundamental domain used throughout the
package is the half-open box image ``M = A[-1/2, 1/2)^d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NonIntegerIndex, NotNested, SingularBasis

__all__ = [
    "Lattice",
    "CosetReps",
    "new_lattice",
    "dual",
    "index",
    "reduce",
    "contains",
    "coset_reps",
    "points_in_ball",
    "integer_lattice",
]

# tolerance on lattice coordinates for membership/nesting checks
MEMBER_TOL = 1e-9
# points this close (in coordinates) below the +1/2 face snap to the -1/2 face
_WRAP_SNAP = 1e-12


def _as_points(p, d: int) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != d:
        if d == 1:
            arr = arr[..., None]
        else:
            raise ValueError(f"expected points with trailing dimension {d}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice ``basis @ Z^d``; columns of ``basis`` are the generators."""

    basis: np.ndarray
    det_abs: float = field(init=False)
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.basis, dtype=float, copy=True)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"basis must be a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("basis has non-finite entries")
        d = a.shape[0]
        scale = float(np.max(np.linalg.norm(a, axis=0))) if a.size else 0.0
        det = abs(float(np.linalg.det(a)))
        if scale == 0.0 or det <= 1e-12 * scale**d:
            raise SingularBasis(f"|det A| = {det:.3e} is below 1e-12 * scale^d")
        a.setflags(write=False)
        inv = np.linalg.inv(a)
        inv.setflags(write=False)
        object.__setattr__(self, "basis", a)
        object.__setattr__(self, "det_abs", det)
        object.__setattr__(self, "_inv", inv)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def scale(self) -> float:
        return float(np.max(np.linalg.norm(self.basis, axis=0)))

    @property
    def inverse(self) -> np.ndarray:
        return self._inv

    @property
    def diameter(self) -> float:
        """Diameter of the fundamental domain ``M`` (longest vertex difference)."""
        d = self.dim
        corners = np.array(list(itertools.product((-0.5, 0.5), repeat=d)))
        verts = corners @ self.basis.T
        diffs = verts[:, None, :] - verts[None, :, :]
        return float(np.max(np.linalg.norm(diffs, axis=-1)))

    def coords(self, p) -> np.ndarray:
        """Coordinates ``A^{-1} p`` of one point or an ``(m, d)`` array."""
        pts = _as_points(p, self.dim)
        return pts @ self._inv.T

    def to_points(self, t) -> np.ndarray:
        return np.asarray(t, dtype=float) @ self.basis.T

    def dual(self) -> "Lattice":
        return Lattice(np.linalg.inv(self.basis.T))

    def contains(self, p, tol: float = MEMBER_TOL):
        t = self.coords(p)
        ok = np.all(np.abs(t - np.round(t)) <= tol, axis=-1)
        return bool(ok) if ok.ndim == 0 else ok

    def reduce(self, p) -> np.ndarray:
        pts = _as_points(p, self.dim)
        t = pts @ self._inv.T
        u = t + 0.5
        frac = u - np.floor(u)
        frac = np.where(frac > 1.0 - _WRAP_SNAP, 0.0, frac)
        q = (frac - 0.5) @ self.basis.T
        if np.ndim(p) == 0:
            return float(q.reshape(-1)[0])
        return q.reshape(np.shape(p))

    def points_in_ball(self, center, radius: float) -> np.ndarray:
        """All lattice points within ``radius`` of ``center`` as an ``(m, d)`` array.

        Rows are ordered lexicographically by their integer coordinates.
        """
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        d = self.dim
        c = _as_points(center, d).reshape(d)
        ct = self._inv @ c
        bound = np.linalg.norm(self._inv, 2) * radius
        lo = np.floor(ct - bound - 1e-9).astype(np.int64)
        hi = np.ceil(ct + bound + 1e-9).astype(np.int64)
        axes = [np.arange(lo[j], hi[j] + 1) for j in range(d)]
        z = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        pts = z @ self.basis.T
        dist = np.linalg.norm(pts - c, axis=1)
        keep = dist <= radius + 1e-12 * max(1.0, radius)
        return pts[keep]

    def same_points(self, other: "Lattice", tol: float = MEMBER_TOL) -> bool:
        """True when both bases generate the same point set."""
        if other.dim != self.dim:
            return False
        return bool(np.all(self.contains(other.basis.T, tol)) and np.all(other.contains(self.basis.T, tol)))

    def to_list(self) -> list[list[float]]:
        """Row-major basis matrix, the serialized form used in configs and reports."""
        return self.basis.tolist()

    def __repr__(self) -> str:
        return f"Lattice({self.basis.tolist()})"


@dataclass(frozen=True, eq=False)
class CosetReps:
    """One representative per coset of ``sub`` inside ``super``."""

    sub: Lattice
    super: Lattice
    reps: np.ndarray

    def __len__(self) -> int:
        return len(self.reps)


def new_lattice(basis) -> Lattice:
    return Lattice(basis)


def integer_lattice(d: int, scale: float = 1.0) -> Lattice:
    return Lattice(scale * np.eye(d))


def dual(lattice: Lattice) -> Lattice:
    return lattice.dual()


def contains(lattice: Lattice, p, tol: float = MEMBER_TOL):
    return lattice.contains(p, tol)


def reduce(lattice: Lattice, p) -> np.ndarray:
    return lattice.reduce(p)


def points_in_ball(lattice: Lattice, center, radius: float) -> np.ndarray:
    return lattice.points_in_ball(center, radius)


def index(fine: Lattice, coarse: Lattice) -> int:
    """Index ``[coarse : fine]`` of a sublattice ``fine`` inside ``coarse``."""
    if fine.dim != coarse.dim:
        raise NotNested("lattices have different dimensions")
    if not np.all(coarse.contains(fine.basis.T)):
        raise NotNested("basis vectors of the sublattice are not in the superlattice")
    ratio = fine.det_abs / coarse.det_abs
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise NonIntegerIndex(f"covolume ratio {ratio!r} is not a positive integer")
    return n


def coset_reps(lam: Lattice, gam: Lattice) -> CosetReps:
    """Representatives of ``lam* / gam*`` for nested lattices ``lam ⊂ gam``.

    Representatives are points of ``lam*`` reduced into the fundamental domain
    of ``gam*`` and sorted lexicographically, so the result is canonical.
    """
    n = index(lam, gam)
    lam_dual = lam.dual()
    gam_dual = gam.dual()
    d = lam.dim
    # gam* = lam* @ M for an integer matrix M with |det M| = n
    m = lam_dual.inverse @ gam_dual.basis
    m_int = np.round(m)
    if np.max(np.abs(m - m_int)) > 1e-6:
        raise NotNested("dual lattices are not nested")
    m_inv = np.linalg.inv(m_int)
    seen: dict[tuple[int, ...], np.ndarray] = {}
    # n Z^d ⊂ M Z^d, so every coset meets the box {0..n-1}^d
    for z in itertools.product(range(n), repeat=d):
        frac = m_inv @ np.asarray(z, dtype=float)
        key = tuple(int(v) % n for v in np.round((frac - np.floor(frac + 1e-9)) * n))
        if key not in seen:
            seen[key] = gam_dual.reduce(lam_dual.basis @ np.asarray(z, dtype=float))
            if len(seen) == n:
                break
    reps = np.array(sorted(seen.values(), key=lambda r: tuple(np.round(r, 12))))
    if len(reps) != n:
        raise NonIntegerIndex(f"found {len(reps)} cosets, expected {n}")
    return CosetReps(sub=gam_dual, super=lam_dual, reps=reps.reshape(n, d))
