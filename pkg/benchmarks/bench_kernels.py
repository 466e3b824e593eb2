"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--nodes 4096] [--grid 512]

Prints one line per kernel and backend with the best wall time, the speedup
over the numpy fallback and the largest difference between the two results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sispace.kernels import available_backends, get_backend


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def hermitian_batch(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    a = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
    return a + np.conj(np.swapaxes(a, 1, 2))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=4096, help="matrices per eigenvalue batch")
    ap.add_argument("--grid", type=int, default=512, help="samples for the difference energy")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    backends = {name: get_backend(name) for name in available_backends()}
    cases = []
    for k in (2, 4, 8):
        mats = hermitian_batch(rng, args.nodes, k)
        cases.append((f"eigvalsh_batch K={k} n={args.nodes}", "eigvalsh_batch", (mats,)))
    v1 = rng.standard_normal(args.grid) + 1j * rng.standard_normal(args.grid)
    offs1 = np.arange(1, args.grid // 2)[:, None]
    w1 = 1.0 / offs1[:, 0].astype(float) ** 2
    cases.append((f"offset_difference_energy 1d n={args.grid}", "offset_difference_energy", (v1, offs1, w1)))
    m = max(8, int(np.sqrt(args.grid)))
    v2 = rng.standard_normal((m, m))
    g = np.arange(-(m // 4), m // 4 + 1)
    offs2 = np.array([(i, j) for i in g for j in g if (i, j) != (0, 0)])
    w2 = 1.0 / np.hypot(offs2[:, 0], offs2[:, 1]) ** 3
    cases.append((f"offset_difference_energy 2d n={m}x{m}", "offset_difference_energy", (v2, offs2, w2)))

    print(f"{'kernel':44s} {'backend':8s} {'best s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for label, fname, fargs in cases:
        ref_out = getattr(backends["python"], fname)(*fargs)
        ref_t = _best(lambda: getattr(backends["python"], fname)(*fargs), args.repeat)
        for name, mod in backends.items():
            fn = getattr(mod, fname)
            t = ref_t if name == "python" else _best(lambda: fn(*fargs), args.repeat)
            diff = float(np.max(np.abs(np.asarray(fn(*fargs)) - np.asarray(ref_out))))
            print(f"{label:44s} {name:8s} {t:10.4f} {ref_t / t:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
