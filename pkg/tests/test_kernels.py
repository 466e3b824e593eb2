from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from sispace import kernels
from sispace.kernels import available_backends, get_backend


def hermitian(rng, n, k):
    a = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
    return a + np.conj(np.swapaxes(a, 1, 2))


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
def test_jacobi_matches_lapack(backend, rng, k):
    mats = hermitian(rng, 200, k)
    got = backend.eigvalsh_batch(mats, 1e-14, 30)
    want = np.linalg.eigvalsh(mats)[:, ::-1]
    assert got.shape == (200, k)
    assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.abs(want).max())


def test_jacobi_degenerate_and_diagonal(backend):
    mats = np.array([np.eye(3), np.diag([3.0, -1.0, 2.0]), np.zeros((3, 3)), np.ones((3, 3))], dtype=complex)
    got = backend.eigvalsh_batch(mats, 1e-14, 30)
    want = [[1, 1, 1], [3, 2, -1], [0, 0, 0], [3, 0, 0]]
    assert np.allclose(got, want, atol=1e-14)


def test_jacobi_does_not_modify_input(backend, rng):
    mats = hermitian(rng, 5, 3)
    before = mats.copy()
    backend.eigvalsh_batch(mats, 1e-14, 30)
    assert np.array_equal(mats, before)


def brute_energy(v, offs, w):
    n = v.shape
    total = 0.0
    for off, wt in zip(offs, w):
        for idx in np.ndindex(*n):
            src = tuple((i + o) % m for i, o, m in zip(idx, off, n))
            total += wt * abs(v[src] - v[idx]) ** 2
    return total


def test_offset_energy_1d(backend, rng):
    v = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    offs = np.array([[1], [-3], [8], [20]])
    w = np.array([1.0, 0.5, 0.25, 2.0])
    assert backend.offset_difference_energy(v, offs, w) == pytest.approx(brute_energy(v, offs, w), rel=1e-12)


def test_offset_energy_2d(backend, rng):
    v = rng.standard_normal((6, 5))
    offs = np.array([[1, 0], [0, -2], [3, 4]])
    w = np.array([1.0, 0.3, 0.7])
    assert backend.offset_difference_energy(v, offs, w) == pytest.approx(brute_energy(v, offs, w), rel=1e-12)


def test_backends_agree(rng):
    if len(available_backends()) < 2:
        pytest.skip("compiled kernels not built")
    py, cy = get_backend("python"), get_backend("cython")
    mats = hermitian(rng, 300, 4)
    assert np.max(np.abs(py.eigvalsh_batch(mats, 1e-14, 30) - cy.eigvalsh_batch(mats, 1e-14, 30))) < 1e-12
    v = rng.standard_normal((16, 16))
    offs = rng.integers(-8, 8, size=(40, 2))
    w = rng.uniform(size=40)
    a, b = py.offset_difference_energy(v, offs, w), cy.offset_difference_energy(v, offs, w)
    assert a == pytest.approx(b, rel=1e-12)


def test_backend_selection():
    assert kernels.BACKEND in available_backends()
    with pytest.raises(ValueError):
        get_backend("fortran")


def test_pure_python_env_switch():
    out = subprocess.run(
        [sys.executable, "-c", "from sispace import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "SISPACE_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
