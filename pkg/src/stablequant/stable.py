"""Univariate stable and elliptical stable distributions.

Sampling, characteristic function evaluation, and quantile-based moment-free
initialization.  The multivariate law is the normal scale mixture

    Y = xi + sqrt(zeta) * X,    X ~ N(0, Omega),

where zeta is a positive stable subordinator with index alpha/2 and Laplace
transform E exp(-s*zeta) = exp(-s**(alpha/2)).  The characteristic function is

    E exp(i t'Y) = exp{i t'xi - (1/2)**(alpha/2) * (t'Omega t)**(alpha/2)},

so alpha = 2 gives zeta == 1 and the exact Gaussian N(xi, Omega).  Any linear
projection u'Y is again univariate elliptical stable with scale parameter
u'Omega u, which is what every projectional quantile routine relies on.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _kernels
from ._quantile_grids import (
    ALPHA_SL_NODES,
    ALPHA_TABLE,
    BETA_SL_NODES,
    BETA_TABLE,
    LOCATION_TABLE,
    NU_A_NODES,
    NU_B_NODES,
    SCALE_TABLE,
)
from .errors import DegenerateInputError, DomainError, NotPositiveDefiniteError

__all__ = [
    "RngStream",
    "StableParams",
    "EsdParams",
    "sample_positive_stable",
    "sample_esd",
    "char_fn",
    "mcculloch_init",
    "init_esd",
]

# quantile levels used by every summary statistic in the package
_PROBS = (0.05, 0.25, 0.5, 0.75, 0.95)

_ALPHA_MIN = 0.6
_ALPHA_MAX = 2.0


@dataclasses.dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream_id).

    Identical keys reproduce identical draw sequences; distinct stream ids
    give statistically independent streams, so concurrent workers can each
    own one without coordination.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of the stream."""
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream_id]))

    def child(self, offset: int) -> "RngStream":
        """Derive a related stream; offset must be unique per purpose."""
        return RngStream(self.seed, self.stream_id + offset)


@dataclasses.dataclass(frozen=True)
class StableParams:
    """Univariate stable law in quantile-friendly form.

    Parameters
    ----------
    alpha : float
        Tail index in (0, 2].
    beta : float
        Skewness in [-1, 1].
    scale : float
        Positive scale.
    location : float
        Location (shift).
    """

    alpha: float
    beta: float
    scale: float
    location: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must be in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must be in [-1, 1], got {self.beta}")
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        if not np.isfinite(self.location):
            raise DomainError(f"location must be finite, got {self.location}")


@dataclasses.dataclass(frozen=True)
class EsdParams:
    """Elliptical stable parameters (alpha, xi, Omega).

    omega is the user-facing scale matrix appearing in the characteristic
    function; it must be symmetric and positive definite.
    """

    alpha: float
    xi: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        omega = np.asarray(self.omega, dtype=float)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "omega", omega)
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must be in (0, 2], got {self.alpha}")
        if not np.all(np.isfinite(xi)):
            raise DomainError("xi must be finite")
        m = xi.size
        if omega.shape != (m, m):
            raise DomainError(f"omega must be {m}x{m}, got {omega.shape}")
        scale = np.abs(omega).max()
        if not np.all(np.abs(omega - omega.T) <= 1e-12 * max(scale, 1.0)):
            raise DomainError("omega must be symmetric")
        try:
            np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError("omega is not positive definite") from None

    @property
    def dim(self) -> int:
        return self.xi.size

    def to_dict(self) -> dict:
        """Plain-python representation used by the JSON file format."""
        return {
            "alpha": float(self.alpha),
            "xi": self.xi.tolist(),
            "omega": self.omega.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EsdParams":
        return cls(alpha=float(d["alpha"]), xi=np.asarray(d["xi"], dtype=float),
                   omega=np.asarray(d["omega"], dtype=float))


def sample_positive_stable(alpha_half, n, rng: RngStream) -> np.ndarray:
    """Draw from the totally skewed positive stable law of index alpha_half.

    The scale convention is fixed so that E exp(-s * zeta) = exp(-s**alpha_half),
    which is what makes the normal scale mixture below reproduce the elliptical
    stable characteristic function.  alpha_half = 1 is the degenerate unit
    constant (the Gaussian limit of the mixture).

    Parameters
    ----------
    alpha_half : float
        Stability index of the subordinator, in (0, 1].
    n : int
        Number of draws.
    rng : RngStream
        Stream to draw from; the call is pure given (rng, alpha_half, n).

    Returns
    -------
    ndarray
        Nonnegative draws of shape (n,).
    """
    if not 0.0 < alpha_half <= 1.0:
        raise DomainError(f"alpha_half must be in (0, 1], got {alpha_half}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if alpha_half == 1.0:
        return np.ones(n)
    g = rng.generator()
    u = g.random(n)
    w = g.standard_exponential(n)
    theta, log_sin_theta, log_w = _kernels.subordinator_raws(u, w)
    return _kernels.subordinator(theta, log_sin_theta, log_w, alpha_half)


def sample_esd(params: EsdParams, n, rng: RngStream) -> np.ndarray:
    """Sample n i.i.d. rows from the elliptical stable law.

    Draw order within the stream is fixed (normals, then uniforms, then
    exponentials) so results are bit-reproducible for a given (rng, n).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    m = params.dim
    try:
        chol = np.linalg.cholesky(params.omega)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("omega is not positive definite") from None
    g = rng.generator()
    z = g.standard_normal((n, m))
    if params.alpha == 2.0:
        sqrt_zeta = np.ones(n)
    else:
        u = g.random(n)
        w = g.standard_exponential(n)
        theta, log_sin_theta, log_w = _kernels.subordinator_raws(u, w)
        zeta = _kernels.subordinator(theta, log_sin_theta, log_w, params.alpha / 2.0)
        sqrt_zeta = np.sqrt(zeta)
    return _kernels.assemble_esd(z, sqrt_zeta, params.xi, chol)


def char_fn(params: EsdParams, t) -> complex:
    """Characteristic function E exp(i t'Y) of the elliptical stable law.

    Total on finite input; returns exp{i t'xi - (1/2)**(alpha/2)
    (t'Omega t)**(alpha/2)}.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (params.dim,):
        raise DomainError(f"t must have shape ({params.dim},), got {t.shape}")
    quad = float(t @ params.omega @ t)
    ah = params.alpha / 2.0
    return complex(np.exp(1j * float(t @ params.xi) - (0.5 * quad) ** ah))


def _bilinear(table, xnodes, ynodes, x, y) -> float:
    """Bilinear interpolation with clamping to the node range."""
    table = np.asarray(table)
    x = float(np.clip(x, xnodes[0], xnodes[-1]))
    y = float(np.clip(y, ynodes[0], ynodes[-1]))
    i = int(np.searchsorted(xnodes, x, side="right") - 1)
    j = int(np.searchsorted(ynodes, y, side="right") - 1)
    i = min(max(i, 0), len(xnodes) - 2)
    j = min(max(j, 0), len(ynodes) - 2)
    tx = (x - xnodes[i]) / (xnodes[i + 1] - xnodes[i])
    ty = (y - ynodes[j]) / (ynodes[j + 1] - ynodes[j])
    return float(
        (1 - tx) * (1 - ty) * table[i, j]
        + tx * (1 - ty) * table[i + 1, j]
        + (1 - tx) * ty * table[i, j + 1]
        + tx * ty * table[i + 1, j + 1]
    )


def mcculloch_init(sample) -> StableParams:
    """Quantile-based initial estimate of univariate stable parameters.

    Inverts the two tail/skew quantile ratios through precomputed lookup
    grids (bilinear interpolation), then recovers scale and location from
    the interquartile range and the median.  The tail index is clamped to
    [0.6, 2.0], the support of the grids.

    Parameters
    ----------
    sample : array_like
        Observations; at least 100 so the outer quantiles are stable.

    Returns
    -------
    StableParams
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 100:
        raise DomainError(f"need at least 100 observations, got {x.size}")
    q05, q25, q50, q75, q95 = np.quantile(x, _PROBS)
    iqr = q75 - q25
    if iqr <= 0.0:
        raise DegenerateInputError("zero interquartile range")
    span = q95 - q05
    nu_a = float(np.clip(span / iqr, NU_A_NODES[0], NU_A_NODES[-1]))
    nu_b = float(np.clip((q95 + q05 - 2.0 * q50) / span, -1.0, 1.0))
    sign = 1.0 if nu_b >= 0.0 else -1.0
    alpha = _bilinear(ALPHA_TABLE, NU_A_NODES, NU_B_NODES, nu_a, abs(nu_b))
    alpha = float(np.clip(alpha, _ALPHA_MIN, _ALPHA_MAX))
    beta = sign * float(np.clip(
        _bilinear(BETA_TABLE, NU_A_NODES, NU_B_NODES, nu_a, abs(nu_b)), 0.0, 1.0
    ))
    scale = iqr / _bilinear(SCALE_TABLE, ALPHA_SL_NODES, BETA_SL_NODES, alpha, abs(beta))
    med_std = sign * _bilinear(
        LOCATION_TABLE, ALPHA_SL_NODES, BETA_SL_NODES, alpha, abs(beta)
    )
    location = q50 - scale * med_std
    return StableParams(alpha=alpha, beta=beta, scale=scale, location=location)


def init_esd(data) -> EsdParams:
    """Initial elliptical stable estimate from marginal and pair quantiles.

    Marginals are initialized independently; the common tail index is their
    average.  Each scale matrix diagonal is 2 * scale_i**2 (a univariate
    margin has scale parameter omega_ii = 2 c_i**2).  Off-diagonals come from
    the standardized bisector projection u = (1, 1)/sqrt(2): its squared
    scale equals 1 + rho_ij, so rho_ij is read off directly.  The assembled
    matrix is projected to the positive definite cone (eigenvalue floor
    1e-8) when sampling noise pushes it outside.

    Parameters
    ----------
    data : array_like, shape (n, m)
        Observations by rows; n >= 100.

    Returns
    -------
    EsdParams
    """
    y = np.asarray(data, dtype=float)
    if y.ndim != 2:
        raise DomainError(f"data must be 2-d, got shape {y.shape}")
    n, m = y.shape
    if n < 100:
        raise DomainError(f"need at least 100 rows, got {n}")
    if m < 1:
        raise DomainError("need at least one column")

    marg = []
    for j in range(m):
        try:
            marg.append(mcculloch_init(y[:, j]))
        except DomainError as exc:
            raise type(exc)(f"column {j}: {exc}") from exc
    alpha = float(np.clip(np.mean([p.alpha for p in marg]), _ALPHA_MIN, _ALPHA_MAX))
    xi = np.array([p.location for p in marg])
    scales = np.array([p.scale for p in marg])

    omega = np.diag(2.0 * scales**2)
    z = (y - xi) / scales
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(m):
        for j in range(i + 1, m):
            try:
                c_u = mcculloch_init((z[:, i] + z[:, j]) * inv_sqrt2).scale
            except DomainError as exc:
                raise type(exc)(f"pair ({i}, {j}): {exc}") from exc
            rho = float(np.clip(c_u**2 - 1.0, -1.0, 1.0))
            omega[i, j] = omega[j, i] = rho * np.sqrt(omega[i, i] * omega[j, j])

    eigvals = np.linalg.eigvalsh(omega)
    if eigvals[0] < 1e-8:
        vals, vecs = np.linalg.eigh(omega)
        omega = (vecs * np.maximum(vals, 1e-8)) @ vecs.T
        omega = 0.5 * (omega + omega.T)
    return EsdParams(alpha=alpha, xi=xi, omega=omega)
