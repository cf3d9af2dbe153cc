"""Hot numerical kernels with a numba fast path and a pure-numpy fallback.

Backend selection: the numba path is used whenever numba imports cleanly,
unless the environment variable ``STABLEQUANT_FORCE_NUMPY=1`` forces the
vectorized numpy implementations.  Both paths implement the same math and
agree to floating-point noise; ``benchmarks/bench_kernels.py`` compares
their throughput.

The quantile rule used everywhere is linear interpolation between order
statistics: position h = (n-1)*tau, value z_(k) + (h-k)*(z_(k+1) - z_(k))
with k = floor(h).  The numba path extracts the needed order statistics by
in-place quickselect instead of a full sort; the result is identical.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised by patching sys.modules
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # decorator shim so the module still imports without numba
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


FORCE_NUMPY = os.environ.get("STABLEQUANT_FORCE_NUMPY", "") == "1"
USE_NUMBA = HAS_NUMBA and not FORCE_NUMPY
BACKEND = "numba" if USE_NUMBA else "numpy"

# Guard against log(0) when a raw uniform lands exactly on 0 or pi.
_TINY = 1e-300


def subordinator_raws(u: np.ndarray, w: np.ndarray):
    """Precompute the reusable pieces of the positive-stable transform.

    Parameters
    ----------
    u : ndarray
        Uniform(0, 1) draws.
    w : ndarray
        Standard exponential draws.

    Returns
    -------
    theta, log_sin_theta, log_w : ndarray
        Angle draws on (0, pi) and cached logarithms.  These do not depend
        on the tail index, so under common random numbers they are computed
        once per draw pool and reused for every parameter value.
    """
    theta = np.pi * u
    log_sin_theta = np.log(np.maximum(np.sin(theta), _TINY))
    log_w = np.log(np.maximum(w, _TINY))
    return theta, log_sin_theta, log_w


def _subordinator_numpy(theta, log_sin_theta, log_w, rho):
    # Kanter representation of the totally skewed positive stable law with
    # Laplace transform exp(-s**rho), written through logs so the w-power
    # and the 1/sin(theta) power cost one exp instead of two pow calls.
    e = (1.0 - rho) / rho
    log_num = np.log(np.maximum(np.sin(rho * theta), _TINY))
    log_mid = np.log(np.maximum(np.sin((1.0 - rho) * theta), _TINY))
    return np.exp(log_num + e * (log_mid - log_w) - log_sin_theta / rho)


@njit(cache=True, fastmath=True)
def _subordinator_numba(theta, log_sin_theta, log_w, rho):
    n = theta.shape[0]
    out = np.empty(n)
    e = (1.0 - rho) / rho
    c = 1.0 / rho
    for i in range(n):
        th = theta[i]
        sn = np.sin(rho * th)
        sm = np.sin((1.0 - rho) * th)
        if sn < _TINY:
            sn = _TINY
        if sm < _TINY:
            sm = _TINY
        lz = np.log(sn) + e * (np.log(sm) - log_w[i]) - c * log_sin_theta[i]
        out[i] = np.exp(lz)
    return out


def subordinator(theta, log_sin_theta, log_w, rho):
    """Positive stable draws with index ``rho`` from cached raw draws.

    ``rho = 1`` is the degenerate Gaussian-limit branch: the subordinator
    collapses to the constant 1 and the raw draws are ignored (they are
    still consumed upstream so the draw sequence is parameter-independent).
    """
    if rho >= 1.0:
        return np.ones(theta.shape)
    flat = theta.ravel()
    if USE_NUMBA:
        out = _subordinator_numba(flat, log_sin_theta.ravel(), log_w.ravel(), rho)
    else:
        out = _subordinator_numpy(flat, log_sin_theta.ravel(), log_w.ravel(), rho)
    return out.reshape(theta.shape)


@njit(cache=True, fastmath=True)
def _select(a, lo, hi, k):
    # In-place quickselect on a[lo:hi]: afterwards a[k] holds the k-th
    # order statistic of the segment and the segment is partitioned at k.
    while True:
        if hi - lo < 16:
            for i in range(lo + 1, hi):
                v = a[i]
                j = i - 1
                while j >= lo and a[j] > v:
                    a[j + 1] = a[j]
                    j -= 1
                a[j + 1] = v
            return
        mid = (lo + hi - 1) >> 1
        if a[mid] < a[lo]:
            t = a[mid]
            a[mid] = a[lo]
            a[lo] = t
        if a[hi - 1] < a[lo]:
            t = a[hi - 1]
            a[hi - 1] = a[lo]
            a[lo] = t
        if a[hi - 1] < a[mid]:
            t = a[hi - 1]
            a[hi - 1] = a[mid]
            a[mid] = t
        p = a[mid]
        i = lo
        j = hi - 1
        while True:
            while a[i] < p:
                i += 1
            while a[j] > p:
                j -= 1
            if i >= j:
                break
            t = a[i]
            a[i] = a[j]
            a[j] = t
            i += 1
            j -= 1
        if k <= j:
            hi = j + 1
        elif k >= i:
            lo = i
        else:
            return


@njit(cache=True, fastmath=True)
def _interp_quantiles(z, hpos, kidx, out):
    # Write the interpolated quantiles at positions hpos (floor indices
    # kidx, ascending) into out.  Mutates z.  For each target the ceiling
    # order statistic is selected first; the floor is then the maximum of
    # the left partition, which avoids a second full selection.
    n = z.shape[0]
    s = hpos.shape[0]
    lo = 0
    for p in range(s):
        k = kidx[p]
        if k >= n - 1:
            _select(z, min(lo, n - 1), n, n - 1)
            out[p] = z[n - 1]
            lo = n - 1
            continue
        c = k + 1
        if k < lo:
            # Overlapping targets (tiny n): fall back to two fresh selects.
            _select(z, 0, n, k)
            _select(z, k + 1, n, c)
            vlo = z[k]
            vhi = z[c]
        else:
            _select(z, lo, n, c)
            vhi = z[c]
            vlo = z[lo]
            for t in range(lo + 1, c):
                if z[t] > vlo:
                    vlo = z[t]
        out[p] = vlo + (hpos[p] - k) * (vhi - vlo)
        lo = c
    return


@njit(cache=True, fastmath=True)
def _phi_from_sample_numba(y, d_i, d_j, w_i, w_j, with_kurt, offsets, hpos, kidx, nstats):
    R, n, m = y.shape
    K = d_i.shape[0]
    s = hpos.shape[0]
    phi = np.zeros(nstats)
    z = np.empty(n)
    q = np.empty(s)
    ok = True
    for r in range(R):
        for k in range(K):
            i = d_i[k]
            j = d_j[k]
            a = w_i[k]
            b = w_j[k]
            if i == j:
                for t in range(n):
                    z[t] = a * y[r, t, i]
            else:
                for t in range(n):
                    z[t] = a * y[r, t, i] + b * y[r, t, j]
            _interp_quantiles(z, hpos, kidx, q)
            iqr = q[3] - q[1]
            if iqr <= 0.0:
                ok = False
                iqr = 1.0
            base = offsets[k]
            if with_kurt[k]:
                phi[base] += (q[s - 1] - q[0]) / iqr
                base += 1
            phi[base] += q[2]
            phi[base + 1] += q[3] - q[1]
    return phi, ok


def _phi_from_sample_numpy(y, d_i, d_j, w_i, w_j, with_kurt, offsets, taus, nstats):
    R = y.shape[0]
    scores = y[:, :, d_i] * w_i + y[:, :, d_j] * w_j  # (R, n, K)
    q = np.quantile(scores, taus, axis=1)  # (s, R, K)
    iqr = q[3] - q[1]
    ok = bool(np.all(iqr > 0.0))
    if not ok:
        iqr = np.where(iqr > 0.0, iqr, 1.0)
    kurt = (q[-1] - q[0]) / iqr
    med = q[2]
    phi = np.zeros(nstats)
    for k in range(d_i.shape[0]):
        base = offsets[k]
        if with_kurt[k]:
            phi[base] = kurt[:, k].sum()
            base += 1
        phi[base] = med[:, k].sum()
        phi[base + 1] = iqr[:, k].sum()
    return phi, ok


def phi_from_sample(y, d_i, d_j, w_i, w_j, with_kurt, offsets, taus, nstats):
    """Sum of per-replicate quantile statistics over a sample block.

    Parameters
    ----------
    y : ndarray, shape (R, n, m)
        Simulated replicates.
    d_i, d_j, w_i, w_j : int/float arrays, length K
        Two-point support of each projection direction: scores are
        ``w_i*y[:, :, d_i] + w_j*y[:, :, d_j]``; canonical directions have
        ``d_i == d_j`` and ``w_j = 0``.
    with_kurt : bool array
        Whether the direction contributes a kurtosis ratio entry.
    offsets : int array
        Start offset of each direction's block in the statistic vector.
    taus : ndarray
        Exactly the five statistic levels (.05, .25, .5, .75, .95) in
        ascending order; the kurtosis ratio reads the outer pair, the
        interquartile range the inner pair, the median the middle.
    nstats : int
        Total statistic vector length.

    Returns
    -------
    (phi_sum, ok) : summed statistics over replicates (divide by R for the
    mean) and a degeneracy flag (False when an interquartile range closed).
    """
    n = y.shape[1]
    if USE_NUMBA:
        hpos = (n - 1) * taus
        kidx = np.minimum(hpos.astype(np.int64), n - 1)
        return _phi_from_sample_numba(
            y, d_i, d_j, w_i, w_j, with_kurt, offsets, hpos, kidx, nstats
        )
    return _phi_from_sample_numpy(y, d_i, d_j, w_i, w_j, with_kurt, offsets, taus, nstats)


def assemble_esd(z, sqrt_zeta, xi, chol):
    """Map raw normal draws and subordinator roots to ESD samples.

    y = xi + sqrt(zeta) * (z @ chol'), applied per replicate; ``z`` has
    shape (R, n, m) or (n, m).
    """
    x = z @ chol.T
    return xi + sqrt_zeta[..., None] * x
