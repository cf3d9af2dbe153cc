"""Timing comparison of the compiled and pure-numpy kernel paths.

The package selects the compiled path at import time unless the
environment variable ``STABLEQUANT_FORCE_NUMPY=1`` forces the numpy
fallback.  This script times both paths in one process by toggling the
dispatch flag, on identical inputs, and checks that they agree.

Run from the repository root::

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --replicates 50 --n 2000 --dim 5
"""

import argparse
import logging
import time

import numpy as np

from stablequant import _kernels
from stablequant.directions import build_direction_set
from stablequant.quantiles import FIVE_LEVELS
from stablequant.stable import EsdParams, RngStream

logger = logging.getLogger("bench_kernels")


def _inputs(replicates, n, dim, seed=0):
    """One frozen draw pool plus packed directions, as the estimator builds them."""
    rng = RngStream(seed, 0).generator()
    z = rng.standard_normal((replicates, n, dim))
    theta, log_sin, log_w = _kernels.subordinator_raws(
        rng.random((replicates, n)), rng.standard_exponential((replicates, n))
    )
    omega = 0.3 * np.ones((dim, dim))
    np.fill_diagonal(omega, 1.0)
    params = EsdParams(1.7, np.zeros(dim), omega)
    directions = build_direction_set(params)
    idx_i, idx_j, w_i, w_j = directions.pair_support()
    kurt = directions.kurtosis_flags
    sizes = np.where(kurt, 3, 2)
    offsets = np.concatenate(([0], np.cumsum(sizes)))[:-1].astype(np.int64)
    nstats = int(sizes.sum())
    zeta = _kernels.subordinator(theta, log_sin, log_w, 0.85)
    y = _kernels.assemble_esd(
        z, np.sqrt(zeta), params.xi, np.linalg.cholesky(params.omega)
    )
    return {
        "subordinator": (theta, log_sin, log_w, 0.85),
        "phi_from_sample": (y, idx_i, idx_j, w_i, w_j, kurt, offsets,
                            np.array(FIVE_LEVELS), nstats),
    }


def _time(fn, args, repeat):
    fn(*args)  # warmup; compiles the jitted path on its first call
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def run(replicates, n, dim, repeat):
    inputs = _inputs(replicates, n, dim)
    header = f"{'kernel':<18s} {'numba (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>9s} {'max |diff|':>12s}"
    print(f"replicates={replicates} n={n} dim={dim} "
          f"(numba available: {_kernels.HAS_NUMBA})")
    print(header)
    print("-" * len(header))
    for name, args in inputs.items():
        fn = getattr(_kernels, name)
        rows = {}
        for use_numba in (True, False):
            if use_numba and not _kernels.HAS_NUMBA:
                continue
            _kernels.USE_NUMBA = use_numba
            rows[use_numba] = _time(fn, args, repeat)
        _kernels.USE_NUMBA = _kernels.HAS_NUMBA
        t_np, out_np = rows[False]
        if True in rows:
            t_nb, out_nb = rows[True]
            a = out_nb[0] if isinstance(out_nb, tuple) else out_nb
            b = out_np[0] if isinstance(out_np, tuple) else out_np
            diff = float(np.max(np.abs(a - b)))
            print(f"{name:<18s} {1e3 * t_nb:>12.3f} {1e3 * t_np:>12.3f} "
                  f"{t_np / t_nb:>8.2f}x {diff:>12.3e}")
        else:
            print(f"{name:<18s} {'--':>12s} {1e3 * t_np:>12.3f} {'--':>9s} {'--':>12s}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=100)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=3)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)
    run(args.replicates, args.n, args.dim, args.repeat)


if __name__ == "__main__":
    main()
