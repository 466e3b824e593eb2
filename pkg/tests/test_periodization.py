from __future__ import annotations

import math

import numpy as np
import pytest

from sispace.errors import TailBoundUnattainable
from sispace.generators import BSpline, BumpFourier, BumpTime, Gaussian, GeneratorSet, IndicatorBox
from sispace.lattice import Lattice, integer_lattice
from sispace.periodization import (
    GRID_OFFSET,
    bracket_product,
    gramian_at,
    gramian_field,
    grid_coords,
    tail_bound,
    truncation_radius,
)

Z = integer_lattice(1)


def sinc4_periodization(x):
    # sum_k sinc(x - k)^4 in closed form
    return (1.0 + 2.0 * np.cos(np.pi * x) ** 2) / 3.0


def test_grid_nodes_and_offset():
    t = grid_coords(8, 1)[:, 0]
    assert t[0] == -0.5 + GRID_OFFSET
    assert np.allclose(np.diff(t), 1 / 8)
    assert np.all((t >= -0.5) & (t < 0.5))


@pytest.mark.parametrize("n", [2, 16, 256, 2048])
def test_grids_nest_exactly(n):
    coarse = grid_coords(n, 1)[:, 0]
    fine = grid_coords(2 * n, 1)[:, 0]
    assert np.array_equal(fine[::2], coarse)


def test_grid_2d_ordering():
    g = grid_coords(4, 2)
    assert g.shape == (16, 2)
    assert np.array_equal(g[:4, 0], np.full(4, g[0, 0]))


def test_tail_bound_compact_is_exact():
    chi = IndicatorBox(lower=(-0.5,), upper=(0.5,))
    hat = BSpline(order=2)
    r0 = chi.envelope.radius
    assert tail_bound(chi, hat, Z, r0) == 0.0
    assert math.isinf(tail_bound(chi, hat, Z, 0.5 * r0))
    assert truncation_radius(chi, hat, Z, 1e-12) == r0


def test_tail_bound_decreases_and_bounds_the_tail():
    hat = BSpline(order=2)
    radii = [4.0, 8.0, 16.0, 64.0]
    bounds = [tail_bound(hat, hat, Z, r) for r in radii]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))
    x = np.linspace(-0.5, 0.5, 41)
    k = np.arange(-200000, 200001)
    for r, bnd in zip(radii, bounds):
        d = x[:, None] - k[None, :]
        far = np.where(np.abs(d) > r, np.abs(np.sinc(d)) ** 4, 0.0)
        assert np.max(far.sum(axis=1)) <= bnd


def test_truncation_radius_meets_eps():
    g = Gaussian(sigma=0.5)
    for eps in (1e-4, 1e-8, 1e-12):
        r = truncation_radius(g, g, Z, eps)
        assert tail_bound(g, g, Z, r) <= eps
    assert truncation_radius(g, g, Z, math.inf) == 0.0


def test_truncation_radius_unattainable():
    box = BSpline(order=1, dim=2)
    with pytest.raises(TailBoundUnattainable):
        truncation_radius(box, box, integer_lattice(2), 1e-6)
    with pytest.raises(ValueError):
        truncation_radius(box, box, integer_lattice(2), 0.0)


def test_indicator_periodizes_to_one():
    F = GeneratorSet((IndicatorBox(lower=(-0.5,), upper=(0.5,)),))
    fld = gramian_field(F, Z, 64)
    assert np.array_equal(fld.values[:, 0, 0], np.ones(64))
    assert fld.trunc_err == 0.0


def test_bspline_gramian_matches_closed_form():
    F = GeneratorSet((BSpline(order=2),))
    fld = gramian_field(F, Z, 512, eps_tail=1e-13)
    want = sinc4_periodization(fld.grid[:, 0])
    assert np.max(np.abs(fld.values[:, 0, 0].real - want)) <= 1e-13 + 1e-14


def test_bspline_on_half_dual():
    # over (1/2)Z* = 2Z the periodization is sinc^4 summed over even shifts
    F = GeneratorSet((BSpline(order=2),))
    fld = gramian_field(F, Lattice([[2.0]]), 64, eps_tail=1e-12)
    x = fld.grid[:, 0]
    k = np.arange(-100000, 100001) * 2.0
    want = np.sum(np.sinc(x[:, None] - k[None, :]) ** 4, axis=1)
    assert np.max(np.abs(fld.values[:, 0, 0].real - want)) < 1e-11


def test_field_is_hermitian_psd_and_nested():
    F = GeneratorSet((BumpTime(lower=(0.0,), upper=(0.3,)), IndicatorBox(lower=(-0.25,), upper=(0.25,)), Gaussian(sigma=0.8)))
    coarse = gramian_field(F, Z, 64, 1e-9)
    fine = gramian_field(F, Z, 128, 1e-9)
    v = fine.values
    assert np.array_equal(v, np.conj(np.swapaxes(v, 1, 2)))
    assert np.linalg.eigvalsh(v).min() > -1e-12
    assert np.array_equal(fine.values[::2], coarse.values)
    assert np.array_equal(fine.grid[::2], coarse.grid)


def test_threads_do_not_change_values(monkeypatch):
    F = GeneratorSet((BSpline(order=2), BumpTime(lower=(0.0,), upper=(0.2,), shift=(0.4,))))
    monkeypatch.setenv("SISPACE_THREADS", "1")
    a = gramian_field(F, Z, 1024, 1e-9)
    monkeypatch.setenv("SISPACE_THREADS", "4")
    b = gramian_field(F, Z, 1024, 1e-9)
    assert np.array_equal(a.values, b.values)


def test_bracket_product_matches_field():
    f, g = BSpline(order=2), Gaussian(sigma=0.6)
    fld = gramian_field(GeneratorSet((f, g)), Z, 16, 1e-12)
    for i in (0, 5, 11):
        assert abs(bracket_product(f, g, Z, fld.grid[i], 1e-12) - fld.values[i, 0, 1]) < 1e-11


def test_gramian_at_reduces_points():
    F = GeneratorSet((BSpline(order=2),))
    x = np.array([[0.3], [1.3], [-2.7]])
    vals, err = gramian_at(F, Z, x, 1e-12)
    assert np.allclose(vals[:, 0, 0].real, sinc4_periodization(0.3), atol=1e-11)


def test_two_dimensional_field():
    F = GeneratorSet((BumpFourier(center=(0.0, 0.0), radius=0.5),))
    fld = gramian_field(F, integer_lattice(2), 16)
    want = np.abs(F[0](fld.grid)) ** 2
    assert np.allclose(fld.values[:, 0, 0].real, want, atol=1e-15)
    assert fld.node_shape == (16, 16)
    pairs = fld.neighbor_pairs()
    assert len(pairs) == 2 * 256


def test_field_argument_checks():
    F = GeneratorSet((BSpline(order=2),))
    with pytest.raises(ValueError):
        gramian_field(F, Z, 1)
    with pytest.raises(ValueError):
        gramian_field(F, Z, 8192)
    with pytest.raises(ValueError):
        gramian_field(F, integer_lattice(2), 8)


def test_summary_records_error_terms():
    fld = gramian_field(GeneratorSet((BSpline(order=2),)), Z, 8, 1e-10)
    s = fld.summary()
    assert s["trunc_err"] <= 1e-10
    assert s["grid_offset"] == GRID_OFFSET
    assert s["n_nodes"] == 8
