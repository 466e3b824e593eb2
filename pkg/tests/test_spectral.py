from __future__ import annotations

import numpy as np
import pytest

from sispace.errors import EmptyField, NonHermitianInput, PreconditionUnmet
from sispace.generators import BSpline, BumpFourier, GeneratorSet, IndicatorBox
from sispace.lattice import Lattice, integer_lattice
from sispace.periodization import GramianField, gramian_field, grid_coords
from sispace.scenarios import ex52_generators
from sispace.spectral import (
    classify,
    default_rank_tol,
    eigvals_batch,
    eigvals_hermitian,
    gamma_frame_check,
    invariance_test,
    min_generators,
    rank_at,
    spectral_profile,
    weyl_excess,
)

Z = integer_lattice(1)
HALF = Lattice([[0.5]])


def test_rank_one_projector_spectrum():
    for c in (0.0, 0.3 - 0.4j, 2.0j):
        m = np.array([[1.0, np.conj(c)], [c, abs(c) ** 2]])
        ev = eigvals_hermitian(m)
        assert ev == pytest.approx([1 + abs(c) ** 2, 0.0], abs=1e-14)


def test_identity_and_order():
    assert eigvals_hermitian(np.eye(4)).tolist() == [1.0, 1.0, 1.0, 1.0]
    ev = eigvals_hermitian(np.diag([0.5, 3.0, -2.0]))
    assert ev.tolist() == [3.0, 0.5, -2.0]


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        eigvals_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NonHermitianInput):
        eigvals_batch(np.array([[[1.0, 1j], [1j, 1.0]]]))


def test_rank_at():
    assert rank_at([2.3, 0.0], 1e-6) == 1
    assert rank_at([1.3, 0.7], 1e-6) == 2
    assert rank_at([0.0, 0.0, 0.0], 1e-6) == 0


def test_default_rank_tol():
    assert default_rank_tol(2, 0.0, 1.0) == 1e-8
    assert default_rank_tol(2, 1e-6, 1.0) == pytest.approx(2e-5)
    assert default_rank_tol(1, 0.0, 50.0) == pytest.approx(5e-7)


def _field(values) -> GramianField:
    values = np.asarray(values, dtype=complex)
    n = len(values)
    return GramianField(Z, grid_coords(n, 1), values, 0.0, n, 0.0)


def test_empty_field():
    with pytest.raises(EmptyField):
        spectral_profile(GramianField(Z, np.zeros((0, 1)), np.zeros((0, 1, 1), dtype=complex), 0.0, 2, 0.0))


def test_classify_riesz_frame_and_not_frame():
    riesz = classify(gramian_field(GeneratorSet((BSpline(order=2),)), Z, 256, 1e-12))
    assert riesz.verdict == "riesz" and riesz.is_frame and riesz.rank_constant
    assert riesz.frame_bounds[0] == pytest.approx(1 / 3, abs=1e-4)
    assert riesz.frame_bounds[1] == pytest.approx(1.0, abs=1e-4)

    chi_j = classify(gramian_field(GeneratorSet((IndicatorBox(lower=(0.0,), upper=(0.5,)),)), Z, 256))
    assert chi_j.verdict == "frame" and not chi_j.is_riesz
    assert chi_j.frame_bounds == (1.0, 1.0)
    assert not chi_j.rank_constant

    zero = classify(_field(np.zeros((8, 1, 1))))
    assert zero.verdict == "not_frame" and not zero.is_frame


def test_classify_spectrum_too_close_to_threshold():
    vals = np.linspace(1.0, 2e-8, 64)[:, None, None]
    cls = classify(_field(vals), tau_rank=1e-8)
    assert cls.verdict == "inconclusive" and not cls.is_frame


def test_classify_t_max():
    vals = np.where(np.arange(64) < 32, 1.0, 1e-5)[:, None, None]
    assert classify(_field(vals), tau_rank=1e-9, t_max=10.0).verdict == "not_frame"
    assert classify(_field(vals), tau_rank=1e-9, t_max=1e6).is_riesz


def test_smooth_bump_alone_is_not_a_certified_frame():
    # |g|^2 decays to zero smoothly at the cell edge: no spectral gap
    cls = classify(gramian_field(GeneratorSet((BumpFourier(center=(0.0,), radius=0.5),)), Z, 512))
    assert not cls.is_frame


def test_scaling_invariance():
    F = GeneratorSet((BSpline(order=2), IndicatorBox(lower=(-0.25,), upper=(0.25,))))
    a = classify(gramian_field(F, Z, 128, 1e-10))
    b = classify(gramian_field(F.scaled(3.0), Z, 128, 1e-10))
    assert (a.verdict, a.rho, a.rank_constant) == (b.verdict, b.rho, b.rank_constant)
    assert np.array_equal(a.profile.ranks, b.profile.ranks)
    assert b.frame_bounds[1] == pytest.approx(9.0 * a.frame_bounds[1], rel=1e-10)


def test_orthonormal_shift_system_rank():
    F = ex52_generators(3, 0.1)
    sub = GeneratorSet(F.specs[:3])
    fld = gramian_field(sub, Z, 256, 1e-9)
    assert min_generators(fld) == 3
    cls = classify(fld)
    assert cls.rank_constant and cls.is_riesz


def test_invariance_vacuous_for_equal_lattices():
    F = GeneratorSet((BSpline(order=2),))
    inv = invariance_test(F, Z, Z, 64, 1e-10)
    assert inv.invariant and inv.index == 1


def test_bspline_not_half_invariant():
    F = GeneratorSet((BSpline(order=2),))
    inv = invariance_test(F, Z, HALF, 256, 1e-13, 1e-11)
    assert not inv.invariant
    assert np.mean(inv.mismatch) >= 0.99
    pairs = [(a, b) for _, a, b in inv.ledger()]
    assert pairs.count((1, 2)) >= 0.99 * len(pairs)
    with pytest.raises(PreconditionUnmet):
        gamma_frame_check(F, Z, HALF, 256, 1e-13, 1e-11, invariance=inv)
    d = inv.to_dict(include_ledger=True)
    assert len(d["ledger"]) == 256


def test_sinc_generator_half_frame():
    F = GeneratorSet((IndicatorBox(lower=(-0.5,), upper=(0.5,)),))
    cls = gamma_frame_check(F, Z, HALF, 256)
    assert cls.is_frame and cls.frame_bounds == (1.0, 1.0)


def test_weyl_bound_on_fields():
    for F in (
        GeneratorSet((BSpline(order=2), IndicatorBox(lower=(-0.25,), upper=(0.25,)))),
        ex52_generators(3, 0.1),
    ):
        fld = gramian_field(F, Z, 256, 1e-9)
        assert weyl_excess(fld) <= 0.0


def test_profile_invariants():
    F = GeneratorSet((BSpline(order=2), IndicatorBox(lower=(-0.25,), upper=(0.25,))))
    fld = gramian_field(F, Z, 128, 1e-10)
    prof = spectral_profile(fld)
    assert np.all(np.diff(prof.eigvals, axis=1) <= 0)
    assert prof.eigvals.min() >= -(1e-10 + fld.K * fld.trunc_err)
    assert prof.ranks.min() >= 0 and prof.ranks.max() <= fld.K
