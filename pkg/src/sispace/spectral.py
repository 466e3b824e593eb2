"""Pointwise spectra of Gramian fields and what they say about the generators.

Eigenvalues of the sampled Gramian give frame/Riesz verdicts (nonzero
spectrum bounded away from 0 and infinity), the minimal number of generators
(largest rank), extra shift invariance (rank additivity over cosets), and the
inherited frame property on a finer lattice of shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyField, NonHermitianInput, PreconditionUnmet
from .generators import GeneratorSet
from .lattice import Lattice, coset_reps, index
from .periodization import GramianField, gramian_at, gramian_field

__all__ = [
    "SpectralProfile",
    "Classification",
    "InvarianceResult",
    "eigvals_hermitian",
    "eigvals_batch",
    "rank_at",
    "default_rank_tol",
    "spectral_profile",
    "classify",
    "min_generators",
    "invariance_test",
    "gamma_frame_check",
    "weyl_excess",
]

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_SWEEPS = 30
DEFAULT_T_MAX = 1e6
# nonzero eigenvalues must clear the rank threshold by this factor
GAP_FACTOR = 10.0


def _check_hermitian(mats: np.ndarray) -> None:
    if mats.shape[-1] != mats.shape[-2]:
        raise NonHermitianInput(f"matrix is not square: shape {mats.shape[-2:]}")
    skew = np.abs(mats - np.conj(np.swapaxes(mats, -1, -2)))
    scale = np.maximum(1.0, np.max(np.abs(mats), axis=(-1, -2), initial=0.0))
    if np.any(np.max(skew, axis=(-1, -2), initial=0.0) > HERMITIAN_TOL * scale):
        raise NonHermitianInput(f"asymmetry exceeds {HERMITIAN_TOL:g} relative to the largest entry")


def eigvals_batch(mats) -> np.ndarray:
    """Descending eigenvalues of a stack ``(n, K, K)`` of Hermitian matrices."""
    arr = np.asarray(mats, dtype=complex)
    if arr.ndim != 3:
        raise ValueError("expected an (n, K, K) stack")
    _check_hermitian(arr)
    sym = 0.5 * (arr + np.conj(np.swapaxes(arr, 1, 2)))
    return kernels.eigvalsh_batch(sym, JACOBI_TOL, JACOBI_SWEEPS)


def eigvals_hermitian(m) -> np.ndarray:
    """Descending eigenvalues of one Hermitian matrix (cyclic Jacobi)."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError("expected a square matrix")
    return eigvals_batch(arr[None])[0]


def rank_at(eigvals, tau_rank: float) -> int:
    """Number of eigenvalues strictly above ``tau_rank``."""
    return int(np.count_nonzero(np.asarray(eigvals, dtype=float) > tau_rank))


def default_rank_tol(K: int, trunc_err: float, lam_max: float) -> float:
    err = trunc_err if math.isfinite(trunc_err) else 0.0
    return max(1e-8, 10.0 * K * err) * max(1.0, lam_max)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Per-node descending eigenvalues and ranks of a Gramian field."""

    eigvals: np.ndarray
    ranks: np.ndarray
    rank_tol: float
    lower: float
    upper: float

    @property
    def n_nodes(self) -> int:
        return len(self.ranks)


def spectral_profile(fld: GramianField, tau_rank: float | None = None) -> SpectralProfile:
    if fld.n_nodes == 0:
        raise EmptyField("field has no nodes")
    ev = eigvals_batch(fld.values)
    lam_max = float(np.max(ev))
    tau = default_rank_tol(fld.K, fld.trunc_err, lam_max) if tau_rank is None else float(tau_rank)
    ranks = np.count_nonzero(ev > tau, axis=1)
    pos = ev[ev > tau]
    lower = float(pos.min()) if pos.size else math.inf
    return SpectralProfile(eigvals=ev, ranks=ranks, rank_tol=tau, lower=lower, upper=lam_max)


@dataclass(frozen=True, eq=False)
class Classification:
    """Frame/Riesz verdict for one Gramian field.

    ``verdict`` is one of ``riesz``, ``frame``, ``not_frame`` or
    ``inconclusive`` (nonzero spectrum too close to the rank threshold to
    separate from zero at this resolution).
    """

    is_frame: bool
    is_riesz: bool
    frame_bounds: tuple[float, float]
    rho: int
    rank_constant: bool
    verdict: str
    confidence: dict
    profile: SpectralProfile = field(repr=False)
    transition_nodes: np.ndarray = field(repr=False)
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        ranks = self.profile.ranks
        return {
            "is_frame": self.is_frame,
            "is_riesz": self.is_riesz,
            "frame_bounds": list(self.frame_bounds),
            "rho": self.rho,
            "rank_constant": self.rank_constant,
            "verdict": self.verdict,
            "rank_min": int(ranks.min()),
            "rank_max": int(ranks.max()),
            "rank_counts": {str(r): int(c) for r, c in zip(*np.unique(ranks, return_counts=True))},
            "eig_min": float(self.profile.eigvals.min()),
            "eig_max": float(self.profile.eigvals.max()),
            "transition_nodes": [int(i) for i in self.transition_nodes],
            "confidence": dict(self.confidence),
            "notes": list(self.notes),
        }


def _transition_mask(fld: GramianField, ranks: np.ndarray) -> np.ndarray:
    pairs = fld.neighbor_pairs()
    jump = ranks[pairs[:, 0]] != ranks[pairs[:, 1]]
    mask = np.zeros(len(ranks), dtype=bool)
    mask[pairs[jump, 0]] = True
    mask[pairs[jump, 1]] = True
    return mask


def classify(
    fld: GramianField,
    tau_rank: float | None = None,
    t_max: float = DEFAULT_T_MAX,
) -> Classification:
    """Frame and Riesz verdicts from the sampled spectrum of ``fld``.

    Nodes adjacent to a rank change are set aside: the spectrum there passes
    through the threshold and says nothing about the bounds.
    """
    prof = spectral_profile(fld, tau_rank)
    tau = prof.rank_tol
    ranks = prof.ranks
    trans = _transition_mask(fld, ranks)
    core = ~trans if np.any(~trans) else np.ones_like(trans)
    ev_core = prof.eigvals[core]
    pos = ev_core[ev_core > tau]
    lower = float(pos.min()) if pos.size else math.inf
    upper = float(prof.eigvals.max())
    notes: list[str] = []
    if not pos.size:
        verdict = "not_frame"
        is_frame = False
        notes.append("no eigenvalue exceeds the rank threshold")
    elif lower < GAP_FACTOR * tau:
        verdict = "inconclusive"
        is_frame = False
        notes.append(f"smallest nonzero eigenvalue {lower:.3e} is within a factor {GAP_FACTOR:g} of tau_rank")
    elif upper / lower > t_max**2:
        verdict = "not_frame"
        is_frame = False
        notes.append(f"spectral ratio {upper / lower:.3e} exceeds t_max^2")
    else:
        is_frame = True
        verdict = "frame"
    rho = int(ranks.max())
    is_riesz = bool(is_frame and np.all(ranks == fld.K))
    if is_riesz:
        verdict = "riesz"
    confidence = {
        "n_per_axis": fld.n_per_axis,
        "n_nodes": fld.n_nodes,
        "grid_offset": fld.offset,
        "tau_rank": tau,
        "t_max": t_max,
        "gap_factor": GAP_FACTOR,
        "trunc_err": fld.trunc_err,
        "n_transition": int(trans.sum()),
    }
    return Classification(
        is_frame=is_frame,
        is_riesz=is_riesz,
        frame_bounds=(lower, upper),
        rho=rho,
        rank_constant=bool(ranks.min() == ranks.max()),
        verdict=verdict,
        confidence=confidence,
        profile=prof,
        transition_nodes=np.flatnonzero(trans),
        notes=tuple(notes),
    )


def min_generators(fld: GramianField, tau_rank: float | None = None) -> int:
    """Largest sampled rank: the minimal number of generators of the space."""
    return int(spectral_profile(fld, tau_rank).ranks.max())


@dataclass(frozen=True, eq=False)
class InvarianceResult:
    """Rank additivity check over the cosets of the finer dual lattice."""

    invariant: bool
    index: int
    reps: np.ndarray
    nodes: np.ndarray
    rank_fine: np.ndarray
    rank_coarse: np.ndarray
    rank_tol: float
    trunc_err: float
    field: GramianField = field(repr=False)

    def __bool__(self) -> bool:
        return self.invariant

    @property
    def rank_sum(self) -> np.ndarray:
        return self.rank_coarse.sum(axis=1)

    @property
    def mismatch(self) -> np.ndarray:
        return self.rank_fine != self.rank_sum

    @property
    def mismatch_fraction(self) -> float:
        return float(np.mean(self.mismatch))

    def ledger(self) -> list[tuple[int, int, int]]:
        """``(node, rank over the coarse dual, summed rank over cosets)`` per node."""
        return [(i, int(a), int(b)) for i, (a, b) in enumerate(zip(self.rank_fine, self.rank_sum))]

    def to_dict(self, include_ledger: bool = False) -> dict:
        pairs, counts = np.unique(np.stack([self.rank_fine, self.rank_sum], axis=1), axis=0, return_counts=True)
        out = {
            "invariant": self.invariant,
            "index": self.index,
            "coset_reps": self.reps.tolist(),
            "rank_tol": self.rank_tol,
            "trunc_err": self.trunc_err,
            "mismatch_fraction": self.mismatch_fraction,
            "rank_pairs": [{"rank": int(p[0]), "rank_sum": int(p[1]), "count": int(c)} for p, c in zip(pairs, counts)],
        }
        if include_ledger:
            out["ledger"] = [list(t) for t in self.ledger()]
        return out


def invariance_test(
    F: GeneratorSet,
    lam: Lattice,
    gam: Lattice,
    n_per_axis: int,
    eps_tail: float = 1e-10,
    tau_rank: float | None = None,
) -> InvarianceResult:
    """Is the space spanned by the ``lam``-shifts of ``F`` also ``gam``-invariant?

    Compares, node by node, the rank of the Gramian periodized over ``lam*``
    with the summed ranks of the Gramian over ``gam*`` at ``x + k`` for coset
    representatives ``k`` of ``lam* / gam*``.
    """
    n_idx = index(lam, gam)
    reps = coset_reps(lam, gam).reps
    fld = gramian_field(F, lam.dual(), n_per_axis, eps_tail)
    pts = (fld.grid[:, None, :] + reps[None, :, :]).reshape(-1, lam.dim)
    coarse_vals, coarse_err = gramian_at(F, gam.dual(), pts, eps_tail)
    ev_fine = eigvals_batch(fld.values)
    ev_coarse = eigvals_batch(coarse_vals)
    err = max(fld.trunc_err, coarse_err)
    if tau_rank is None:
        lam_max = float(max(ev_fine.max(), ev_coarse.max()))
        tau_rank = default_rank_tol(F.K, err, lam_max)
    rank_fine = np.count_nonzero(ev_fine > tau_rank, axis=1)
    rank_coarse = np.count_nonzero(ev_coarse > tau_rank, axis=1).reshape(fld.n_nodes, n_idx)
    ok = bool(np.all(rank_fine == rank_coarse.sum(axis=1)))
    return InvarianceResult(
        invariant=ok,
        index=n_idx,
        reps=reps,
        nodes=fld.grid,
        rank_fine=rank_fine,
        rank_coarse=rank_coarse,
        rank_tol=float(tau_rank),
        trunc_err=float(err),
        field=fld,
    )


def gamma_frame_check(
    F: GeneratorSet,
    lam: Lattice,
    gam: Lattice,
    n_per_axis: int,
    eps_tail: float = 1e-10,
    tau_rank: float | None = None,
    t_max: float = DEFAULT_T_MAX,
    invariance: InvarianceResult | None = None,
) -> Classification:
    """Classify the ``gam*`` Gramian of a ``gam``-invariant frame.

    Requires the ``lam``-shifts to form a frame and the space to be
    ``gam``-invariant; the ``gam``-shifts must then form a frame as well, so a
    non-frame result is flagged as an inconsistency in ``notes``.
    """
    inv = invariance if invariance is not None else invariance_test(F, lam, gam, n_per_axis, eps_tail, tau_rank)
    if not inv.invariant:
        raise PreconditionUnmet("space is not invariant under the finer lattice")
    base = classify(inv.field, tau_rank, t_max)
    if not base.is_frame:
        raise PreconditionUnmet(f"shifts over the original lattice are not a frame ({base.verdict})")
    fld = gramian_field(F, gam.dual(), n_per_axis, eps_tail)
    cls = classify(fld, tau_rank, t_max)
    if not cls.is_frame:
        note = f"inconsistency: frame property not inherited on the finer lattice ({cls.verdict})"
        cls = Classification(**{**cls.__dict__, "notes": cls.notes + (note,)})
    return cls


def weyl_excess(fld: GramianField, profile: SpectralProfile | None = None) -> float:
    """Largest ``|λ_k(x) - λ_k(y)| - ||P(x) - P(y)||_F - 2e-12 max||P||_F`` over adjacent nodes.

    Nonpositive whenever the eigenvalue perturbation bound holds everywhere.
    """
    prof = profile if profile is not None else spectral_profile(fld)
    pairs = fld.neighbor_pairs()
    a, b = pairs[:, 0], pairs[:, 1]
    dlam = np.max(np.abs(prof.eigvals[a] - prof.eigvals[b]), axis=1)
    fro = np.sqrt(np.sum(np.abs(fld.values[a] - fld.values[b]) ** 2, axis=(1, 2)))
    slack = 2e-12 * float(np.max(np.sqrt(np.sum(np.abs(fld.values) ** 2, axis=(1, 2)))))
    return float(np.max(dlam - fro - slack))
