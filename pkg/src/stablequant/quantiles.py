"""Projectional quantiles, the quantile statistic vector, and its asymptotics.

A single interpolation rule is used for every quantile in the package: on a
sorted sample z_(0) <= ... <= z_(n-1), the level-tau quantile is the linear
interpolation at fractional position h = (n-1) * tau.  Coherence between
observed and simulated statistic vectors depends on both sides using exactly
this rule.

The statistic vector stacks, direction by direction, a tail-weight ratio
kappa = (q_.95 - q_.05) / (q_.75 - q_.25), the median, and the interquartile
range (kappa only where the direction informs the tail index).  Its sampling
covariance is assembled from the quantile covariance matrix eta of the
projected scores and the analytic Jacobian of the statistics in the
quantiles.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .directions import DirectionSet
from .errors import DegenerateInputError, DomainError
from .stable import EsdParams, RngStream, sample_esd

__all__ = [
    "TauGrid",
    "PhiVector",
    "EtaMatrix",
    "empirical_quantile",
    "projectional_quantile",
    "projected_quantiles",
    "phi_stats",
    "phi_jacobian",
    "sparsity_at",
    "eta_matrix",
    "omega_phi",
]

# the five levels every statistic is built from
FIVE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclasses.dataclass(frozen=True)
class TauGrid:
    """Strictly increasing quantile levels, each inside (0, 1)."""

    levels: np.ndarray

    def __post_init__(self):
        lv = np.atleast_1d(np.asarray(self.levels, dtype=float))
        object.__setattr__(self, "levels", lv)
        if lv.size == 0:
            raise DomainError("tau grid must be nonempty")
        if not (np.all(lv > 0.0) and np.all(lv < 1.0)):
            raise DomainError("tau levels must lie in (0, 1)")
        if not np.all(np.diff(lv) > 0.0):
            raise DomainError("tau levels must be strictly increasing")

    @classmethod
    def default(cls) -> "TauGrid":
        return cls(np.array(FIVE_LEVELS))

    @property
    def count(self) -> int:
        return self.levels.size


@dataclasses.dataclass(frozen=True)
class PhiVector:
    """Statistic vector with per-entry (direction, kind) descriptors."""

    values: np.ndarray
    descriptors: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if len(self.descriptors) != v.size:
            raise DomainError("descriptor count must match value count")


@dataclasses.dataclass(frozen=True)
class EtaMatrix:
    """Covariance matrix of projected quantiles, indexed by (direction, tau)."""

    entries: np.ndarray
    labels: tuple

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DomainError("eta must be square")
        if len(self.labels) != e.shape[0]:
            raise DomainError("label count must match matrix size")


def _lerp_sorted(z: np.ndarray, taus) -> np.ndarray:
    """Quantiles of an already sorted 1-d array under the package rule."""
    n = z.size
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    h = (n - 1) * taus
    k = np.minimum(h.astype(np.int64), n - 2) if n > 1 else np.zeros(h.size, np.int64)
    if n == 1:
        return np.full(taus.size, z[0])
    frac = h - k
    return z[k] + frac * (z[k + 1] - z[k])


def empirical_quantile(sample, tau) -> float:
    """Linear-interpolation quantile of a univariate sample.

    Continuous in tau, exact order statistic at the probability points
    (k - 1)/(n - 1).

    Parameters
    ----------
    sample : array_like
        Nonempty observations.
    tau : float
        Level in (0, 1).

    Returns
    -------
    float
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("sample is empty")
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must be in (0, 1), got {tau}")
    return float(_lerp_sorted(np.sort(x), tau)[0])


def projectional_quantile(data, u, tau) -> float:
    """Quantile of the data projected onto the unit direction u.

    Equals the minimiser of the projected empirical check loss up to the
    interpolation rule.
    """
    y = np.asarray(data, dtype=float)
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-10:
        raise DomainError("u must have unit norm")
    return empirical_quantile(y @ u, tau)


def projected_quantiles(data, directions: DirectionSet, taus: TauGrid) -> np.ndarray:
    """Matrix of projected quantiles, one row per direction, one column per tau."""
    y = np.asarray(data, dtype=float)
    scores = y @ directions.vectors.T
    out = np.empty((directions.count, taus.count))
    for k in range(directions.count):
        out[k] = _lerp_sorted(np.sort(scores[:, k]), taus.levels)
    return out


def _require_five(taus: TauGrid) -> None:
    for p in FIVE_LEVELS:
        if not np.any(np.abs(taus.levels - p) <= 1e-12):
            raise DomainError(f"tau grid must contain level {p}")


def _phi_from_five(q5: np.ndarray, flags: np.ndarray):
    """Assemble statistic values from per-direction five-level quantiles."""
    values = []
    for k in range(q5.shape[0]):
        q05, q25, q50, q75, q95 = q5[k]
        iqr = q75 - q25
        if iqr <= 0.0:
            raise DegenerateInputError(f"direction {k}: zero interquartile range")
        if flags[k]:
            values.append((q95 - q05) / iqr)
        values.append(q50)
        values.append(iqr)
    return np.array(values)


def _phi_descriptors(flags: np.ndarray) -> tuple:
    desc = []
    for k, has_kurt in enumerate(flags):
        if has_kurt:
            desc.append((k, "kurtosis"))
        desc.append((k, "median"))
        desc.append((k, "iqr"))
    return tuple(desc)


def phi_stats(data, directions: DirectionSet, taus: TauGrid) -> PhiVector:
    """Observed statistic vector over the direction set.

    Per direction the vector holds kappa (tail ratio, only for directions
    flagged as informing the tail index), the projected median, and the
    projected interquartile range, in that order, direction-major.

    Parameters
    ----------
    data : array_like, shape (n, m)
    directions : DirectionSet
    taus : TauGrid
        Must contain the five levels 0.05, 0.25, 0.5, 0.75, 0.95.

    Returns
    -------
    PhiVector
    """
    _require_five(taus)
    if directions.count == 0:
        raise DomainError("direction set is empty")
    q5 = projected_quantiles(data, directions, TauGrid(np.array(FIVE_LEVELS)))
    flags = directions.kurtosis_flags
    return PhiVector(values=_phi_from_five(q5, flags),
                     descriptors=_phi_descriptors(flags))


def phi_jacobian(q5: np.ndarray, directions: DirectionSet, taus: TauGrid) -> np.ndarray:
    """Analytic Jacobian of the statistic vector in the projected quantiles.

    Block diagonal across directions: each statistic depends only on its own
    direction's quantiles.  Columns are indexed (direction, tau) in
    direction-major order over the full tau grid; levels other than the five
    used by the statistics get zero columns.

    Parameters
    ----------
    q5 : ndarray, shape (d, 5)
        Per-direction quantiles at the five levels.
    directions : DirectionSet
    taus : TauGrid

    Returns
    -------
    ndarray, shape (n_stats, d * taus.count)
    """
    _require_five(taus)
    d = directions.count
    s = taus.count
    flags = directions.kurtosis_flags
    col_of = {}
    for j, p in enumerate(FIVE_LEVELS):
        col_of[p] = int(np.argmin(np.abs(taus.levels - p)))
    jac = np.zeros((directions.n_stats, d * s))
    row = 0
    for k in range(d):
        q05, q25, q50, q75, q95 = q5[k]
        iqr = q75 - q25
        if iqr <= 0.0:
            raise DegenerateInputError(f"direction {k}: zero interquartile range")
        base = k * s
        c05, c25, c50, c75, c95 = (base + col_of[p] for p in FIVE_LEVELS)
        if flags[k]:
            kappa = (q95 - q05) / iqr
            jac[row, c05] = -1.0 / iqr
            jac[row, c95] = 1.0 / iqr
            jac[row, c25] = kappa / iqr
            jac[row, c75] = -kappa / iqr
            row += 1
        jac[row, c50] = 1.0
        row += 1
        jac[row, c25] = -1.0
        jac[row, c75] = 1.0
        row += 1
    return jac


def _sparsity_sorted(z: np.ndarray, tau: float) -> float:
    n = z.size
    h = min(0.2, n ** (-0.2) / 2.0, tau / 2.0, (1.0 - tau) / 2.0)
    hi, lo = _lerp_sorted(z, [tau + h, tau - h])
    if hi <= lo:
        raise DegenerateInputError("zero quantile spread")
    return 2.0 * h / (hi - lo)


def sparsity_at(sample, tau) -> float:
    """Density at the tau-quantile by the symmetric difference quotient.

    Bandwidth h = min(0.2, n**(-1/5)/2), shrunk near the ends so both
    tau - h and tau + h stay inside (0, 1).

    Parameters
    ----------
    sample : array_like
        At least 50 observations.
    tau : float
        Level in (0, 1).

    Returns
    -------
    float
        Strictly positive density estimate.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 50:
        raise DomainError(f"need at least 50 observations, got {x.size}")
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must be in (0, 1), got {tau}")
    return _sparsity_sorted(np.sort(x), float(tau))


def eta_matrix(
    model: EsdParams,
    directions: DirectionSet,
    taus: TauGrid,
    mc_size: int = 200_000,
    rng: RngStream = RngStream(0, 0),
) -> EtaMatrix:
    """Covariance matrix of the projected empirical quantiles at the model.

    Entry ((k_r, tau_r), (k_c, tau_c)) is

        (F(q_r, q_c) - tau_r * tau_c) / (f_r(q_r) * f_c(q_c)),

    where F is the joint CDF of the two projected scores and f the marginal
    densities.  Same-direction entries use the exact joint CDF
    min(tau_r, tau_c); cross-direction entries estimate F by Monte Carlo
    from one simulated sample, which also supplies the quantiles and the
    density (sparsity) estimates.  The result is symmetrised.

    Parameters
    ----------
    model : EsdParams
    directions : DirectionSet
    taus : TauGrid
    mc_size : int
        Simulation size, at least 10**5.
    rng : RngStream

    Returns
    -------
    EtaMatrix
        Labels are (direction index, tau) in direction-major order.
    """
    if mc_size < 10**5:
        raise DomainError(f"mc_size must be at least 1e5, got {mc_size}")
    d = directions.count
    s = taus.count
    k_total = d * s
    y = sample_esd(model, mc_size, rng)
    scores = y @ directions.vectors.T

    quants = np.empty((d, s))
    dens = np.empty((d, s))
    for k in range(d):
        z = np.sort(scores[:, k])
        quants[k] = _lerp_sorted(z, taus.levels)
        for j, tau in enumerate(taus.levels):
            dens[k, j] = _sparsity_sorted(z, float(tau))

    # joint exceedance-complement proportions for every (direction, tau) pair
    ind = np.empty((mc_size, k_total), dtype=np.float32)
    for k in range(d):
        for j in range(s):
            ind[:, k * s + j] = scores[:, k] <= quants[k, j]
    joint = (ind.T @ ind).astype(float) / mc_size

    tau_flat = np.tile(taus.levels, d)
    f_flat = dens.reshape(-1)
    eta = (joint - np.outer(tau_flat, tau_flat)) / np.outer(f_flat, f_flat)

    # same-direction blocks have the exact joint CDF min(tau_r, tau_c)
    t_min = np.minimum.outer(taus.levels, taus.levels)
    for k in range(d):
        sl = slice(k * s, (k + 1) * s)
        eta[sl, sl] = (t_min - np.outer(taus.levels, taus.levels)) / np.outer(
            dens[k], dens[k]
        )

    eta = 0.5 * (eta + eta.T)
    labels = tuple((k, float(tau)) for k in range(d) for tau in taus.levels)
    return EtaMatrix(entries=eta, labels=labels)


def omega_phi(eta: EtaMatrix, dphi_dq) -> np.ndarray:
    """Covariance of the statistic vector from eta and the Jacobian.

    Computes J eta J' and projects tiny negative eigenvalues (numerical or
    Monte Carlo roundoff) to zero so the result is positive semidefinite.

    Parameters
    ----------
    eta : EtaMatrix
    dphi_dq : ndarray, shape (n_stats, K)
        Jacobian of the statistics in the stacked projected quantiles; K
        must match eta.

    Returns
    -------
    ndarray, shape (n_stats, n_stats)
    """
    jac = np.asarray(dphi_dq, dtype=float)
    k = eta.entries.shape[0]
    if jac.ndim != 2 or jac.shape[1] != k:
        raise DomainError(
            f"jacobian must have {k} columns to match eta, got shape {jac.shape}"
        )
    omega = jac @ eta.entries @ jac.T
    omega = 0.5 * (omega + omega.T)
    vals, vecs = np.linalg.eigh(omega)
    if vals[0] < 0.0:
        omega = (vecs * np.maximum(vals, 0.0)) @ vecs.T
        omega = 0.5 * (omega + omega.T)
    return omega
