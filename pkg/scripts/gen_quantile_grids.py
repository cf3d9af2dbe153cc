#!/usr/bin/env python3
"""Regenerate src/stablequant/_quantile_grids.py.

Builds the quantile-ratio inversion tables used by the McCulloch-style
stable-law initializer:

  * forward maps nu_alpha(alpha, beta), nu_beta(alpha, beta) are computed
    from scipy's stable quantiles (S0 parameterization, location 0 scale 1),
  * the inverse maps alpha(nu_alpha, nu_beta), beta(nu_alpha, nu_beta) are
    solved by bounded least squares on spline-interpolated forward maps at
    the classic lookup lattice,
  * scale and location tables are tabulated directly on an (alpha, beta)
    lattice: nu_c = interquartile range of the standardized law, and the
    standardized S0 median offset.

Values at alpha=2 and alpha=1 (beta=0) have closed forms and are asserted
as anchors before the module is written.

Run from the repository root:  python3 scripts/gen_quantile_grids.py
"""

import os
import sys
import time

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import brentq, least_squares
from scipy.stats import levy_stable, norm

OUT_PATH = "src/stablequant/_quantile_grids.py"

# Classic inversion lattice (nu_alpha rows, nu_beta columns).
NU_A_NODES = np.array(
    [2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 25.0]
)
NU_B_NODES = np.array([0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0])

# Dense forward lattice for the spline fit and the scale/location tables.
ALPHA_DENSE = np.round(np.arange(0.50, 2.0001, 0.025), 10)
BETA_DENSE = np.round(np.arange(0.0, 1.0001, 0.1), 10)

ALPHA_SL_NODES = np.round(np.arange(0.5, 2.0001, 0.05), 10)
BETA_SL_NODES = np.array([0.0, 0.25, 0.5, 0.75, 1.0])

PROBS = np.array([0.05, 0.25, 0.5, 0.75, 0.95])


def _quantile_vector_raw(alpha, beta):
    q = levy_stable.ppf(PROBS, alpha, beta)
    if not np.all(np.isfinite(q)):
        raise ValueError("nonfinite quantile")
    # ppf root-finding occasionally fails silently (cdf(ppf(p)) != p) near
    # alpha ~ 1; detect by round trip and re-solve on the cdf, which stays
    # consistent at those points
    for k, p in enumerate(PROBS):
        if abs(levy_stable.cdf(q[k], alpha, beta) - p) > 1e-6:
            lo, hi = q[k] - 1.0, q[k] + 1.0
            while levy_stable.cdf(lo, alpha, beta) > p:
                lo -= max(1.0, abs(lo))
            while levy_stable.cdf(hi, alpha, beta) < p:
                hi += max(1.0, abs(hi))
            q[k] = brentq(
                lambda x: levy_stable.cdf(x, alpha, beta) - p, lo, hi, xtol=1e-12
            )
    return q

# scipy rounds alpha to 1 within 0.005, flattening the map there, and its
# quadrature can fail outright just outside that zone when |beta| is large.
# The S0 quantiles are smooth through alpha = 1 and the dedicated alpha = 1
# branch works for every beta, so bridge the bad band with a local quadratic
# in alpha anchored at 1 and at 1 +- delta, widening delta until both outer
# anchors evaluate cleanly.
_ZONE = 0.0055


def _bridge(alpha, beta):
    q_mid = levy_stable.ppf(PROBS, 1.0, beta)
    for delta in (0.006, 0.01, 0.02, 0.03, 0.05):
        if delta <= abs(alpha - 1.0):
            continue
        try:
            q_lo = _quantile_vector_raw(1.0 - delta, beta)
            q_hi = _quantile_vector_raw(1.0 + delta, beta)
        except ValueError:
            continue
        t = (alpha - 1.0) / delta
        return q_mid + 0.5 * t * (q_hi - q_lo) + 0.5 * t * t * (q_hi + q_lo - 2.0 * q_mid)
    raise ValueError(f"no evaluable bridge at alpha={alpha} beta={beta}")


def _quantile_vector(alpha, beta):
    if alpha == 1.0:
        return levy_stable.ppf(PROBS, 1.0, beta)
    if abs(alpha - 1.0) >= _ZONE:
        try:
            return _quantile_vector_raw(alpha, beta)
        except ValueError:
            return _bridge(alpha, beta)
    return _bridge(alpha, beta)


def quantile_stats(alpha, beta):
    q05, q25, q50, q75, q95 = _quantile_vector(alpha, beta)
    span = q95 - q05
    iqr = q75 - q25
    return span / iqr, (q95 + q05 - 2.0 * q50) / span, iqr, q50


def main():
    levy_stable.parameterization = "S0"
    # default x-tol near the zeta point (0.005) snaps the cdf when a target
    # quantile crosses zeta, kinking nu_a(alpha) by ~1e-2 at beta=1
    levy_stable.piecewise_x_tol_near_zeta = 1e-8

    t0 = time.time()
    na = np.empty((ALPHA_DENSE.size, BETA_DENSE.size))
    nb = np.empty_like(na)
    for i, a in enumerate(ALPHA_DENSE):
        for j, b in enumerate(BETA_DENSE):
            na[i, j], nb[i, j], _, _ = quantile_stats(a, b)
        print(f"forward alpha={a:.3f}  ({time.time() - t0:.0f}s)", flush=True)

    # Anchors with closed forms.
    gauss_nua = 2.0 * norm.ppf(0.95) / (2.0 * norm.ppf(0.75))
    assert abs(na[-1, 0] - gauss_nua) < 1e-6, (na[-1, 0], gauss_nua)
    cauchy_row = np.argmin(np.abs(ALPHA_DENSE - 1.0))
    assert abs(na[cauchy_row, 0] - np.tan(0.45 * np.pi)) < 1e-6

    sp_a = RectBivariateSpline(ALPHA_DENSE, BETA_DENSE, na, kx=3, ky=3)
    sp_b = RectBivariateSpline(ALPHA_DENSE, BETA_DENSE, nb, kx=3, ky=3)

    alpha_tab = np.empty((NU_A_NODES.size, NU_B_NODES.size))
    beta_tab = np.empty_like(alpha_tab)
    saturated = np.zeros(alpha_tab.shape, dtype=bool)
    for i, target_a in enumerate(NU_A_NODES):
        for j, target_b in enumerate(NU_B_NODES):

            def resid(x):
                return [
                    sp_a(x[0], x[1])[0, 0] - target_a,
                    sp_b(x[0], x[1])[0, 0] - target_b,
                ]

            best = None
            for x0 in ([1.5, 0.3], [1.0, 0.5], [0.7, 0.8], [1.9, 0.1]):
                sol = least_squares(resid, x0, bounds=([0.5, 0.0], [2.0, 1.0]))
                if best is None or sol.cost < best.cost:
                    best = sol
            if best.cost < 1e-8:
                alpha_tab[i, j], beta_tab[i, j] = best.x
                continue
            # Unreachable skew ratio at this tail ratio: pin beta at the
            # bound and match nu_alpha exactly, mirroring the classic grid.
            saturated[i, j] = True
            beta_tab[i, j] = 1.0

            def resid_a(x):
                return [sp_a(x[0], 1.0)[0, 0] - target_a]

            sol = least_squares(resid_a, [best.x[0]], bounds=([0.5], [2.0]))
            alpha_tab[i, j] = sol.x[0]
            print(
                f"  saturated cell nu_a={target_a} nu_b={target_b} "
                f"-> alpha={sol.x[0]:.4f} resid={np.abs(sol.fun).max():.2e}"
            )

    # Polish against the true quantile map wherever the spline solution
    # drifts, then verify the round trip on every cell: nu_alpha always,
    # nu_beta when the cell is not saturated.
    for i, target_a in enumerate(NU_A_NODES):
        for j, target_b in enumerate(NU_B_NODES):
            a, b = alpha_tab[i, j], beta_tab[i, j]
            ra, rb, _, _ = quantile_stats(a, b)
            drift = abs(ra - target_a) + (0.0 if saturated[i, j] else abs(rb - target_b))
            verbose = os.environ.get("GRID_DEBUG", "") != ""
            if drift > 2e-3:
                if verbose:
                    print(f"  polishing ({target_a}, {target_b}) from a={a:.6f} b={b:.6f}")
                # Damped Newton on the true map; wide FD steps ride over the
                # small quadrature roughness of the stable quantiles.
                best = (np.inf, a, b)
                for it in range(15):
                    ra, rb, _, _ = quantile_stats(a, b)
                    fa = ra - target_a
                    fb = 0.0 if saturated[i, j] else rb - target_b
                    if verbose:
                        print(
                            f"    it={it} a={a:.6f} b={b:.6f} "
                            f"fa={fa:+.2e} fb={fb:+.2e}"
                        )
                    if abs(fa) + abs(fb) < best[0]:
                        best = (abs(fa) + abs(fb), a, b)
                    if abs(fa) + abs(fb) < 5e-4:
                        break
                    h = 0.01
                    rap, rbp, _, _ = quantile_stats(min(a + h, 2.0), b)
                    ram, rbm, _, _ = quantile_stats(max(a - h, 0.5), b)
                    daa = (rap - ram) / (min(a + h, 2.0) - max(a - h, 0.5))
                    dba = (rbp - rbm) / (min(a + h, 2.0) - max(a - h, 0.5))
                    if saturated[i, j]:
                        a = np.clip(a - fa / daa, 0.5, 2.0)
                        continue
                    hb = 0.05
                    bp, bm = min(b + hb, 1.0), max(b - hb, 0.0)
                    rap2, rbp2, _, _ = quantile_stats(a, bp)
                    ram2, rbm2, _, _ = quantile_stats(a, bm)
                    dab = (rap2 - ram2) / (bp - bm)
                    dbb = (rbp2 - rbm2) / (bp - bm)
                    det = daa * dbb - dab * dba
                    if abs(det) < 1e-12:
                        break
                    a = np.clip(a - 0.8 * (fa * dbb - fb * dab) / det, 0.5, 2.0)
                    b = np.clip(b - 0.8 * (fb * daa - fa * dba) / det, 0.0, 1.0)
                alpha_tab[i, j], beta_tab[i, j] = best[1], best[2]
                print(f"  polished cell ({target_a}, {target_b}) drift {drift:.1e}")
            a, b = alpha_tab[i, j], beta_tab[i, j]
            ra, rb, _, _ = quantile_stats(a, b)
            assert abs(ra - target_a) < 5e-3, (i, j, ra)
            if not saturated[i, j]:
                assert abs(rb - target_b) < 5e-3, (i, j, rb)

    scale_tab = np.empty((ALPHA_SL_NODES.size, BETA_SL_NODES.size))
    loc_tab = np.empty_like(scale_tab)
    for i, a in enumerate(ALPHA_SL_NODES):
        for j, b in enumerate(BETA_SL_NODES):
            _, _, iqr, med = quantile_stats(a, b)
            scale_tab[i, j] = iqr
            loc_tab[i, j] = med

    # Anchors: alpha=2 is N(0, 2) so IQR = 2*sqrt(2)*Phi^-1(.75); alpha=1,
    # beta=0 is Cauchy with IQR 2; medians vanish for beta=0.
    assert abs(scale_tab[-1, 0] - 2.0 * np.sqrt(2.0) * norm.ppf(0.75)) < 1e-6
    i1 = np.argmin(np.abs(ALPHA_SL_NODES - 1.0))
    assert abs(scale_tab[i1, 0] - 2.0) < 1e-6
    assert np.all(np.abs(loc_tab[:, 0]) < 1e-8)

    def fmt(arr):
        rows = []
        for row in np.atleast_2d(arr):
            rows.append("    [" + ", ".join(f"{v!r}" for v in row) + "],")
        return "\n".join(rows)

    def fmt1(arr):
        return "    " + ", ".join(f"{v!r}" for v in arr) + ","

    with open(OUT_PATH, "w") as fh:
        fh.write(
            '"""Stable-law quantile-ratio inversion grids.\n\n'
            "Generated by scripts/gen_quantile_grids.py from scipy stable\n"
            "quantiles (S0 parameterization); do not edit by hand.  See that\n"
            'script for definitions and the closed-form anchors checked.\n"""\n\n'
            "import numpy as np\n\n"
        )
        fh.write("NU_A_NODES = np.array([\n" + fmt1(NU_A_NODES) + "\n])\n\n")
        fh.write("NU_B_NODES = np.array([\n" + fmt1(NU_B_NODES) + "\n])\n\n")
        fh.write("ALPHA_TABLE = np.array([\n" + fmt(alpha_tab) + "\n])\n\n")
        fh.write("BETA_TABLE = np.array([\n" + fmt(beta_tab) + "\n])\n\n")
        fh.write("ALPHA_SL_NODES = np.array([\n" + fmt1(ALPHA_SL_NODES) + "\n])\n\n")
        fh.write("BETA_SL_NODES = np.array([\n" + fmt1(BETA_SL_NODES) + "\n])\n\n")
        fh.write("SCALE_TABLE = np.array([\n" + fmt(scale_tab) + "\n])\n\n")
        fh.write("LOCATION_TABLE = np.array([\n" + fmt(loc_tab) + "\n])\n")
    print("wrote", OUT_PATH, f"({time.time() - t0:.0f}s total)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
