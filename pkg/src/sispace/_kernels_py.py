"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``SISPACE_PURE_PYTHON=1`` is set.  Must agree with ``_ckernels.pyx`` to
rounding error.
"""

from __future__ import annotations

import numpy as np


def eigvalsh_batch(mats: np.ndarray, tol: float = 1e-14, max_sweeps: int = 30) -> np.ndarray:
    """Eigenvalues of a stack of Hermitian matrices by cyclic Jacobi, descending.

    All matrices in the batch receive the same (p, q) rotation order; a matrix
    stops changing once its off-diagonal norm falls below ``tol * ||A||_F``.
    """
    a = np.array(mats, dtype=complex, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected an (n, K, K) stack")
    n, k, _ = a.shape
    if k == 1 or n == 0:
        return np.sort(a.real.reshape(n, k), axis=1)[:, ::-1]
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = tol * fro
    offmask = ~np.eye(k, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        active = off > thresh
        if not np.any(active):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                g = a[:, p, q]
                r = np.abs(g)
                live = active & (r > 0)
                if not np.any(live):
                    continue
                app = a[:, p, p].real.copy()
                aqq = a[:, q, q].real.copy()
                r_safe = np.where(live, r, 1.0)
                e = np.where(live, g / r_safe, 1.0)
                theta = (aqq - app) / (2.0 * r_safe)
                sgn = np.where(theta >= 0, 1.0, -1.0)
                t = sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ec = np.conj(e)
                # columns: A <- A U with U = [[c, s], [-s conj(e), c conj(e)]]
                col_p = a[:, :, p].copy()
                col_q = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * col_p - (s * ec)[:, None] * col_q
                a[:, :, q] = s[:, None] * col_p + (c * ec)[:, None] * col_q
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * row_p - (s * e)[:, None] * row_q
                a[:, q, :] = s[:, None] * row_p + (c * e)[:, None] * row_q
                a[:, p, q] = np.where(live, 0.0, a[:, p, q])
                a[:, q, p] = np.where(live, 0.0, a[:, q, p])
                a[:, p, p] = np.where(live, app - t * r, a[:, p, p].real)
                a[:, q, q] = np.where(live, aqq + t * r, a[:, q, q].real)
    ev = np.real(np.diagonal(a, axis1=1, axis2=2))
    return -np.sort(-ev, axis=1, kind="stable")


def offset_difference_energy(values: np.ndarray, offsets: np.ndarray, weights: np.ndarray) -> float:
    """``sum_j weights[j] * sum_i |v[i + offsets[j]] - v[i]|^2`` with periodic wrap.

    ``values`` is a d-dimensional array of samples on a periodic grid and each
    row of ``offsets`` is an integer shift in grid units.
    """
    v = np.asarray(values, dtype=complex)
    offs = np.asarray(offsets, dtype=np.int64).reshape(len(weights), v.ndim)
    axes = tuple(range(v.ndim))
    total = 0.0
    for off, w in zip(offs, np.asarray(weights, dtype=float)):
        if w == 0.0:
            continue
        shifted = np.roll(v, tuple(-int(o) for o in off), axis=axes)
        diff = shifted - v
        total += w * float(np.sum(diff.real**2 + diff.imag**2))
    return total
