from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sispace.errors import NotNested, SingularBasis
from sispace.lattice import Lattice, coset_reps, index, integer_lattice


def basis_strategy(d: int):
    entry = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)
    return st.lists(entry, min_size=d * d, max_size=d * d).map(lambda v: np.array(v).reshape(d, d)).filter(
        lambda a: abs(np.linalg.det(a)) > 0.05
    )


points = st.lists(st.floats(-50.0, 50.0, allow_nan=False), min_size=2, max_size=2)


def test_dual_of_integer_lattice_is_itself():
    z2 = integer_lattice(2)
    assert z2.dual().same_points(z2)


def test_dual_of_scaled_lattice():
    assert np.allclose(integer_lattice(1, 0.5).dual().basis, [[2.0]])


def test_dual_pairing_is_integral():
    lat = Lattice([[1.0, 0.3], [0.2, 0.9]])
    pairing = lat.basis.T @ lat.dual().basis
    assert np.allclose(pairing, np.round(pairing), atol=1e-12)


def test_singular_basis_rejected():
    with pytest.raises(SingularBasis):
        Lattice([[1.0, 2.0], [2.0, 4.0]])


def test_non_square_basis_rejected():
    with pytest.raises(ValueError):
        Lattice([[1.0, 2.0]])


def test_contains_and_reduce():
    lat = Lattice([[2.0, 0.0], [1.0, 1.0]])
    assert lat.contains([2.0, 1.0])
    assert not lat.contains([1.0, 0.0])
    r = lat.reduce([[7.3, -4.1]])
    assert lat.contains(np.array([7.3, -4.1]) - r[0])
    t = lat.coords(r)
    assert np.all(t >= -0.5) and np.all(t < 0.5)


def test_points_in_ball_matches_brute_force():
    lat = Lattice([[1.0, 0.5], [0.0, 0.8]])
    c = np.array([0.3, -0.2])
    got = lat.points_in_ball(c, 3.0)
    m = np.stack(np.meshgrid(np.arange(-10, 11), np.arange(-10, 11)), -1).reshape(-1, 2)
    allp = m @ lat.basis.T
    want = allp[np.linalg.norm(allp - c, axis=1) <= 3.0]
    assert len(got) == len(want)
    assert {tuple(np.round(p, 9)) for p in got} == {tuple(np.round(p, 9)) for p in want}


def test_index_and_errors():
    assert index(integer_lattice(1), Lattice([[0.5]])) == 2
    assert index(integer_lattice(2), Lattice(np.diag([0.5, 1.0]))) == 2
    assert index(integer_lattice(1), Lattice([[1.0 / 3.0]])) == 3
    with pytest.raises(NotNested):
        index(Lattice([[0.5]]), integer_lattice(1))
    with pytest.raises(NotNested):
        index(integer_lattice(1), Lattice([[0.4]]))
    with pytest.raises(NotNested):
        index(integer_lattice(1), integer_lattice(2))


def test_incommensurate_lattices_are_not_nested():
    with pytest.raises(NotNested):
        index(Lattice([[2.0]]), Lattice([[2.0 / 1.5]]))


def test_coset_reps_half_lattice():
    reps = coset_reps(integer_lattice(1), Lattice([[0.5]]))
    assert len(reps) == 2
    # representatives of Z / 2Z, reduced into [-1, 1)
    assert sorted(reps.reps[:, 0].tolist()) == [-1.0, 0.0]


def test_coset_reps_distinct_and_complete():
    lam = integer_lattice(2)
    gam = Lattice(np.array([[0.5, 0.0], [0.0, 1.0 / 3.0]]))
    cr = coset_reps(lam, gam)
    assert len(cr) == 6
    gd = gam.dual()
    for i in range(len(cr)):
        assert lam.dual().contains(cr.reps[i])
        for j in range(i):
            assert not gd.contains(cr.reps[i] - cr.reps[j])


@settings(max_examples=60, deadline=None)
@given(basis_strategy(2), points)
def test_reduce_is_idempotent_and_congruent(a, p):
    lat = Lattice(a)
    r1 = lat.reduce(p)
    r2 = lat.reduce(r1)
    assert np.allclose(r1, r2, atol=1e-9)
    assert lat.contains(np.asarray(p) - r1, tol=1e-6)


@settings(max_examples=60, deadline=None)
@given(basis_strategy(2))
def test_dual_round_trip(a):
    lat = Lattice(a)
    assert lat.dual().dual().same_points(lat, tol=1e-8)
    assert lat.dual().det_abs * lat.det_abs == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(basis_strategy(2), st.integers(1, 3), st.integers(1, 3))
def test_refinement_index(a, k1, k2):
    lam = Lattice(a)
    gam = Lattice(a @ np.diag([1.0 / k1, 1.0 / k2]))
    assert index(lam, gam) == k1 * k2
    assert len(coset_reps(lam, gam)) == k1 * k2


def test_serialization_round_trip():
    lat = Lattice([[1.0, 0.25], [0.0, 2.0]])
    again = Lattice(lat.to_list())
    assert np.array_equal(again.basis, lat.basis)
