"""Time the numba and numpy kernel backends on the same workloads.

Usage: python3 benchmarks/bench_backends.py [--scale 1.0] [--repeat 3]

Both backends consume identical uniforms, so the script also reports the
largest absolute difference between their outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dirwalk import _accel, kernels
from dirwalk.ensembles import cyclic, dirichlet, leader
from dirwalk.rng import RngStream


def _workloads(scale: float):
    n = lambda k: max(1, int(k * scale))  # noqa: E731
    cyc, lead = cyclic(3), leader(4)
    dir3 = dirichlet([[1.0, 2.0, 0.5], [0.5, 1.0, 1.0], [2.0, 0.5, 1.0]])
    return {
        "gamma_vectors d=3 n=2e5": lambda r: kernels.gamma_vectors(
            np.array([0.5, 2.0, 7.5]), n(200_000), *kernels.batch_address(r, n(200_000))
        )[0],
        "dirichlet matrices n=1e5": lambda r: kernels.sample_matrices(
            dir3.code(), n(100_000), *kernels.batch_address(r, n(100_000))
        )[0],
        "cyclic limits n=2e4": lambda r: kernels.iterate_products(
            cyc.code(), n(20_000), 1e-10, 10_000, False, *kernels.batch_address(r, n(20_000))
        )[0],
        "leader(4) positivity 1e4x8": lambda r: kernels.positivity_hits(
            lead.code(), n(10_000), 8, *kernels.batch_address(r, n(10_000))
        ),
        "exchange chains 100x(1000+200*60)": lambda r: kernels.exchange_chains(
            cyc.code(), np.full(3, 1 / 3), 100, 1000, max(1, int(200 * scale)), 60, *kernels.batch_address(r, 100)
        ),
    }


def _time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(RngStream(2024))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply workload sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'workload':40s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in _workloads(args.scale).items():
        with _accel.use_backend("numba"):
            fn(RngStream(1))  # compile outside the timed region
            t_nb, out_nb = _time(fn, args.repeat)
        with _accel.use_backend("numpy"):
            t_np, out_np = _time(fn, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb, dtype=float) - np.asarray(out_np, dtype=float))))
        print(f"{name:40s} {t_nb:9.3f} {t_np:9.3f} {t_np / t_nb:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
