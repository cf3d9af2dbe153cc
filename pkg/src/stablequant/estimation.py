"""Simulated-quantile matching for the elliptical stable model.

The estimator minimises the weighted distance between the observed statistic
vector and its simulated counterpart, averaged over R replicates that reuse
one frozen pool of raw draws.  Freezing the draws (common random numbers)
makes the objective a deterministic, piecewise-smooth function of the
parameters, which is what lets a derivative-free simplex search converge.

Estimation runs in two stages: an identity-weighted minimisation, then a
re-minimisation under the inverse of the statistic covariance evaluated at
the first-stage solution.  Standard errors come from the usual minimum
distance asymptotics with a (1 + 1/R) inflation for the simulation noise.

The free parameter vector referred to throughout is the natural one:
alpha, then the location entries, then the unique covariance entries in
row-major lower-triangle order (see ``parameter_names``).  Internally the
optimizer works in an unconstrained reparameterisation (``pack_theta``)
that keeps every visited covariance matrix positive definite.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from . import _kernels
from .directions import DirectionSet, build_direction_set
from .errors import DegenerateInputError, DomainError, RankDeficiencyError
from .quantiles import (
    FIVE_LEVELS,
    PhiVector,
    TauGrid,
    _phi_descriptors,
    eta_matrix,
    omega_phi,
    phi_jacobian,
    phi_stats,
    projected_quantiles,
)
from .stable import EsdParams, RngStream, init_esd, sample_esd

__all__ = [
    "MmsqConfig",
    "OptimizerSettings",
    "EstimationResult",
    "parameter_names",
    "natural_vector",
    "pack_theta",
    "unpack_theta",
    "simulate_phi",
    "objective",
    "estimate",
    "asymptotic_cov",
    "simulation_inflation",
]

# substream offsets: replicate r of the simulation pool uses stream r, the
# statistic-covariance simulation and the optimizer restarts use offsets far
# above any plausible replicate count so the streams never collide
ETA_STREAM_OFFSET = 1 << 40
RESTART_STREAM_OFFSET = 1 << 41

_ALPHA_LO = 0.6
_ALPHA_SPAN = 1.4
_ALPHA_EDGE = 1e-8


@dataclasses.dataclass(frozen=True)
class OptimizerSettings:
    """Termination settings for the simplex search.

    max_iter bounds iterations per stage and per restart; x_tol and f_tol
    are the simplex size and function spread tolerances; restarts is the
    number of additional randomised starting points in the first stage.
    """

    max_iter: int = 600
    x_tol: float = 1e-6
    f_tol: float = 1e-10
    restarts: int = 1

    def __post_init__(self):
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if not (self.x_tol > 0.0 and self.f_tol > 0.0):
            raise DomainError("optimizer tolerances must be positive")
        if self.restarts < 0:
            raise DomainError("restarts must be nonnegative")


@dataclasses.dataclass(frozen=True)
class MmsqConfig:
    """Configuration of the simulated-quantile objective.

    Parameters
    ----------
    R : int
        Replicate count, at least 1.
    n_sim : int or None
        Per-replicate sample size; None means "use the data length".
    taus : TauGrid
        Quantile levels for the statistic covariance; must contain the five
        statistic levels.
    optimizer : OptimizerSettings
    seed : int
        Root seed of all substreams.
    fd_step : float
        Relative step of the finite-difference Jacobians.
    """

    R: int = 200
    n_sim: int | None = None
    taus: TauGrid = dataclasses.field(default_factory=TauGrid.default)
    optimizer: OptimizerSettings = dataclasses.field(default_factory=OptimizerSettings)
    seed: int = 0
    fd_step: float = 1e-4

    def __post_init__(self):
        if self.R < 1:
            raise DomainError(f"replicate count must be at least 1, got {self.R}")
        if self.n_sim is not None and self.n_sim < 100:
            raise DomainError(f"n_sim must be at least 100, got {self.n_sim}")
        if not 0.0 < self.fd_step < 0.1:
            raise DomainError("fd_step must lie in (0, 0.1)")


@dataclasses.dataclass(frozen=True)
class EstimationResult:
    """Estimate with its asymptotic covariance and solver diagnostics.

    covariance and std_errors are indexed by the natural free parameter
    vector, ordered as in ``parameter_names``.
    """

    theta: EsdParams
    covariance: np.ndarray | None
    std_errors: np.ndarray | None
    objective: float
    weight_stage: str
    converged: bool
    evaluations: int
    diagnostics: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.covariance is None:
            if self.std_errors is not None:
                raise DomainError("std_errors require a covariance")
        else:
            cov = np.asarray(self.covariance, dtype=float)
            se = np.asarray(self.std_errors, dtype=float)
            object.__setattr__(self, "covariance", cov)
            object.__setattr__(self, "std_errors", se)
            ref = np.sqrt(np.maximum(np.diag(cov), 0.0))
            if se.shape != ref.shape or np.any(
                np.abs(se - ref) > 1e-6 * (1.0 + ref)
            ):
                raise DomainError("std_errors must equal sqrt(diag(covariance))")
        if self.objective < 0.0:
            raise DomainError("objective must be nonnegative")
        if self.weight_stage not in ("identity", "efficient"):
            raise DomainError(f"unknown weight stage {self.weight_stage!r}")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.to_dict(),
            "parameter_names": parameter_names(self.theta.dim),
            "covariance": None if self.covariance is None
            else self.covariance.tolist(),
            "std_errors": None if self.std_errors is None
            else self.std_errors.tolist(),
            "objective": self.objective,
            "weight_stage": self.weight_stage,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "diagnostics": self.diagnostics,
        }


def parameter_names(m: int) -> list:
    """Names of the free parameters, in covariance row order."""
    names = ["alpha"]
    names += [f"xi_{i + 1}" for i in range(m)]
    names += [f"omega_{i + 1}_{j + 1}" for i in range(m) for j in range(i + 1)]
    return names


def natural_vector(params: EsdParams) -> np.ndarray:
    """Free parameter vector (alpha, locations, lower-triangle covariances)."""
    il, jl = np.tril_indices(params.dim)
    return np.concatenate(([params.alpha], params.xi, params.omega[il, jl]))


def _params_from_natural(v: np.ndarray, m: int) -> EsdParams:
    il, jl = np.tril_indices(m)
    omega = np.zeros((m, m))
    omega[il, jl] = v[1 + m:]
    omega[jl, il] = v[1 + m:]
    return EsdParams(float(v[0]), v[1:1 + m].copy(), omega)


def pack_theta(params: EsdParams) -> np.ndarray:
    """Map parameters to an unconstrained vector.

    alpha goes through a scaled logit onto (0.6, 2.0] (values at the bounds
    are clamped one ulp inside so the coordinate stays finite); locations
    pass through; the covariance is represented by its Cholesky factor with
    logged diagonal, which keeps the inverse map positive definite for any
    real input.
    """
    a = min(max(params.alpha, _ALPHA_LO + _ALPHA_EDGE), 2.0 - _ALPHA_EDGE)
    p = (a - _ALPHA_LO) / _ALPHA_SPAN
    t = np.log(p) - np.log1p(-p)
    chol = np.linalg.cholesky(params.omega)
    il, jl = np.tril_indices(params.dim)
    tri = chol[il, jl].copy()
    diag = il == jl
    tri[diag] = np.log(tri[diag])
    return np.concatenate(([t], params.xi, tri))


def unpack_theta(vector, m: int) -> EsdParams:
    """Inverse of ``pack_theta``; valid for every real vector."""
    v = np.asarray(vector, dtype=float).ravel()
    k = 1 + m + m * (m + 1) // 2
    if v.size != k:
        raise DomainError(f"expected a vector of length {k}, got {v.size}")
    alpha = _ALPHA_LO + _ALPHA_SPAN * float(expit(v[0]))
    xi = v[1:1 + m].copy()
    il, jl = np.tril_indices(m)
    tri = v[1 + m:].copy()
    diag = il == jl
    tri[diag] = np.exp(tri[diag])
    chol = np.zeros((m, m))
    chol[il, jl] = tri
    omega = chol @ chol.T
    omega = 0.5 * (omega + omega.T)
    return EsdParams(alpha, xi, omega)


def simulation_inflation(R: int) -> float:
    """Variance inflation from matching a simulated mean of R replicates."""
    if R < 1:
        raise DomainError(f"replicate count must be at least 1, got {R}")
    return 1.0 + 1.0 / R


class _PhiEngine:
    """Simulated statistic vector over a frozen pool of raw draws.

    Replicate r draws, in fixed order, its normal block, its uniforms and
    its exponentials from stream (seed, r); the draws are kept and reused
    for every parameter value, so two evaluations at the same parameters
    return bit-identical vectors.
    """

    def __init__(self, seed: int, R: int, n: int, directions: DirectionSet):
        m = directions.dim
        self.R = R
        idx_i, idx_j, w_i, w_j = directions.pair_support()
        self.support = (idx_i, idx_j, w_i, w_j)
        self.kurt = directions.kurtosis_flags
        sizes = np.where(self.kurt, 3, 2)
        self.offsets = np.concatenate(([0], np.cumsum(sizes)))[:-1].astype(np.int64)
        self.nstats = int(sizes.sum())
        self.taus5 = np.array(FIVE_LEVELS)
        self.z = np.empty((R, n, m))
        theta = np.empty((R, n))
        log_sin = np.empty((R, n))
        log_w = np.empty((R, n))
        for r in range(R):
            g = RngStream(seed, r).generator()
            self.z[r] = g.standard_normal((n, m))
            u = g.random(n)
            w = g.standard_exponential(n)
            theta[r], log_sin[r], log_w[r] = _kernels.subordinator_raws(u, w)
        self.theta_raw = theta
        self.log_sin = log_sin
        self.log_w = log_w
        self.evals = 0

    def phi(self, params: EsdParams) -> np.ndarray:
        self.evals += 1
        zeta = _kernels.subordinator(
            self.theta_raw, self.log_sin, self.log_w, 0.5 * params.alpha
        )
        chol = np.linalg.cholesky(params.omega)
        y = _kernels.assemble_esd(self.z, np.sqrt(zeta), params.xi, chol)
        idx_i, idx_j, w_i, w_j = self.support
        total, ok = _kernels.phi_from_sample(
            y, idx_i, idx_j, w_i, w_j, self.kurt, self.offsets, self.taus5, self.nstats
        )
        if not ok:
            raise DegenerateInputError(
                "a projected replicate has zero interquartile range"
            )
        return total / self.R


def simulate_phi(
    theta: EsdParams, directions: DirectionSet, config: MmsqConfig
) -> PhiVector:
    """Simulated statistic vector, averaged over the R frozen replicates.

    Deterministic in (theta, config.seed): repeated calls are bit-identical,
    and evaluations at different theta reuse the same underlying draws.
    """
    if config.n_sim is None:
        raise DomainError("config.n_sim must be set to simulate without data")
    if directions.dim != theta.dim:
        raise DomainError("direction set dimension does not match parameters")
    engine = _PhiEngine(config.seed, config.R, config.n_sim, directions)
    return PhiVector(
        values=engine.phi(theta),
        descriptors=_phi_descriptors(directions.kurtosis_flags),
    )


def _check_weight(w, nstats: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (nstats, nstats):
        raise DomainError(f"weighting matrix must be {nstats}x{nstats}")
    if not np.allclose(w, w.T, atol=1e-8):
        raise DomainError("weighting matrix must be symmetric")
    try:
        np.linalg.cholesky(w)
    except np.linalg.LinAlgError as exc:
        raise DomainError("weighting matrix must be positive definite") from exc
    return w


def objective(
    theta: EsdParams,
    hat_phi: PhiVector,
    weight,
    directions: DirectionSet,
    config: MmsqConfig,
) -> float:
    """Weighted squared distance between observed and simulated statistics."""
    w = _check_weight(weight, hat_phi.values.size)
    if hat_phi.values.size != directions.n_stats:
        raise DomainError("statistic vector length does not match directions")
    phi = simulate_phi(theta, directions, config)
    r = hat_phi.values - phi.values
    return float(r @ w @ r)


def _fd_jacobian(engine: _PhiEngine, theta: EsdParams, fd_step: float) -> np.ndarray:
    """Central-difference Jacobian of the simulated statistics in the
    natural parameters, one-sided where a perturbation leaves the domain."""
    v0 = natural_vector(theta)
    m = theta.dim
    names = parameter_names(m)
    jac = np.empty((engine.nstats, v0.size))
    base = None
    for i in range(v0.size):
        h = fd_step * max(abs(v0[i]), 1.0)
        sides = []
        for sgn in (1.0, -1.0):
            v = v0.copy()
            v[i] += sgn * h
            try:
                sides.append((v[i], engine.phi(_params_from_natural(v, m))))
            except DomainError:
                sides.append(None)
        hi, lo = sides
        if hi is not None and lo is not None:
            jac[:, i] = (hi[1] - lo[1]) / (hi[0] - lo[0])
        elif hi is not None or lo is not None:
            if base is None:
                base = engine.phi(theta)
            pt = hi if hi is not None else lo
            jac[:, i] = (pt[1] - base) / (pt[0] - v0[i])
        else:
            raise RankDeficiencyError(
                f"cannot perturb {names[i]} without leaving the parameter domain"
            )
    return jac


def _statistic_covariance(
    theta: EsdParams,
    directions: DirectionSet,
    taus: TauGrid,
    seed: int,
    mc_size: int,
) -> np.ndarray:
    # the quantile grid and the quantile covariance are computed from the
    # same substream, hence from one and the same simulated sample
    rng = RngStream(seed, ETA_STREAM_OFFSET)
    y_mc = sample_esd(theta, mc_size, rng)
    q5 = projected_quantiles(y_mc, directions, TauGrid(np.array(FIVE_LEVELS)))
    jac = phi_jacobian(q5, directions, taus)
    eta = eta_matrix(theta, directions, taus, mc_size, rng)
    return omega_phi(eta, jac)


def _ridged(omega: np.ndarray) -> tuple:
    b = omega.shape[0]
    ridge = 1e-8 * np.trace(omega) / b
    return omega + ridge * np.eye(b), float(ridge)


def _checked_inverse(mat: np.ndarray, m: int) -> np.ndarray:
    # a numerically singular curvature matrix means some parameter moves no
    # statistic; report the offender instead of returning garbage
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    if vals[-1] <= 0.0 or vals[0] < 1e-12 * vals[-1]:
        worst = int(np.argmax(np.abs(vecs[:, 0])))
        raise RankDeficiencyError(
            f"statistic Jacobian is rank deficient along {parameter_names(m)[worst]}"
        )
    inv = (vecs / vals) @ vecs.T
    return 0.5 * (inv + inv.T)


def asymptotic_cov(
    theta_hat: EsdParams,
    directions: DirectionSet,
    config: MmsqConfig,
    *,
    n: int,
    weight_stage: str = "efficient",
    weight=None,
    omega=None,
    eta_mc_size: int = 200_000,
) -> np.ndarray:
    """Asymptotic covariance of the estimator at theta_hat.

    The Jacobian of the simulated statistics is taken by central finite
    differences under common random numbers.  With weight_stage
    "efficient" the covariance is (1 + 1/R) (G' Omega^-1 G)^-1 / n; any
    other stage uses the sandwich with the supplied weighting matrix.

    Parameters
    ----------
    theta_hat : EsdParams
    directions : DirectionSet
    config : MmsqConfig
    n : int
        Observed sample size the estimate came from.
    weight_stage : {"efficient", "identity"}
    weight : array_like, optional
        Weighting matrix of the minimisation; required unless efficient.
    omega : array_like, optional
        Statistic covariance; simulated at theta_hat when omitted.
    eta_mc_size : int
        Simulation size for the statistic covariance.

    Returns
    -------
    ndarray
        Symmetric PSD matrix over the natural free parameters.
    """
    if n < 1:
        raise DomainError("n must be positive")
    m = theta_hat.dim
    if omega is None:
        omega = _statistic_covariance(
            theta_hat, directions, config.taus, config.seed, eta_mc_size
        )
    omega = np.asarray(omega, dtype=float)
    n_sim = config.n_sim if config.n_sim is not None else n
    engine = _PhiEngine(config.seed, config.R, n_sim, directions)
    jac = _fd_jacobian(engine, theta_hat, config.fd_step)
    om_r, _ = _ridged(omega)
    inflation = simulation_inflation(config.R)
    if weight_stage == "efficient":
        curv = jac.T @ np.linalg.solve(om_r, jac)
        cov = inflation * _checked_inverse(curv, m) / n
    else:
        w = _check_weight(weight, omega.shape[0]) if weight is not None else None
        if w is None:
            raise DomainError("sandwich covariance requires a weighting matrix")
        curv_inv = _checked_inverse(jac.T @ w @ jac, m)
        middle = jac.T @ w @ omega @ w @ jac
        cov = inflation * curv_inv @ middle @ curv_inv / n
    return 0.5 * (cov + cov.T)


def estimate(
    data,
    config: MmsqConfig,
    *,
    eta_mc_size: int = 200_000,
    with_covariance: bool = True,
) -> EstimationResult:
    """Two-stage simulated-quantile estimate from an observed sample.

    Stage 0 initialises the parameters from marginal and pairwise quantile
    summaries and freezes the direction set.  Stage 1 minimises the
    identity-weighted objective by simplex search from the initial point and
    from `restarts` perturbed copies, keeping the best.  Stage 2 inverts the
    statistic covariance at the stage-1 solution (plus a small trace-scaled
    ridge) and re-minimises under that weight.

    Parameters
    ----------
    data : array_like, shape (n, m)
        Observations, n at least 100.
    config : MmsqConfig
    eta_mc_size : int
        Simulation size for the stage-2 weighting matrix.
    with_covariance : bool
        Skip the asymptotic covariance (and its finite-difference
        Jacobian) when False; covariance and std_errors come back None.
        Useful when the fit only seeds a warm start.

    Returns
    -------
    EstimationResult
        With the efficient-stage asymptotic covariance and solver
        diagnostics (per-stage objectives, restart objectives, ridge).
    """
    y = np.asarray(data, dtype=float)
    if y.ndim != 2:
        raise DomainError("data must be a 2-d array")
    n, m = y.shape
    if n < 100:
        raise DomainError(f"need at least 100 observations, got {n}")
    init = init_esd(y)
    directions = build_direction_set(init)
    hat = phi_stats(y, directions, config.taus)
    n_sim = config.n_sim if config.n_sim is not None else n
    engine = _PhiEngine(config.seed, config.R, n_sim, directions)
    opt = config.optimizer
    options = {
        "maxiter": opt.max_iter,
        "maxfev": 2 * opt.max_iter,
        "xatol": opt.x_tol,
        "fatol": opt.f_tol,
        "adaptive": m >= 4,
    }

    def packed_objective(v, w=None):
        r = hat.values - engine.phi(unpack_theta(v, m))
        if w is None:
            return float(r @ r)
        return float(r @ w @ r)

    x0 = pack_theta(init)
    starts = [x0]
    for i in range(opt.restarts):
        g = RngStream(config.seed, RESTART_STREAM_OFFSET + i).generator()
        starts.append(x0 + 0.2 * g.standard_normal(x0.size))
    stage1 = [
        minimize(packed_objective, s, method="Nelder-Mead", options=options)
        for s in starts
    ]
    res1 = min(stage1, key=lambda r: r.fun)
    theta1 = unpack_theta(res1.x, m)

    omega_stat = _statistic_covariance(
        theta1, directions, config.taus, config.seed, eta_mc_size
    )
    om_r, ridge = _ridged(omega_stat)
    w_eff = np.linalg.inv(om_r)
    w_eff = 0.5 * (w_eff + w_eff.T)

    warm = packed_objective(res1.x, w_eff)
    res2 = minimize(
        packed_objective, res1.x, args=(w_eff,), method="Nelder-Mead", options=options
    )
    theta_hat = unpack_theta(res2.x, m)

    if with_covariance:
        cov = asymptotic_cov(
            theta_hat,
            directions,
            config,
            n=n,
            weight_stage="efficient",
            omega=omega_stat,
            eta_mc_size=eta_mc_size,
        )
        std_errors = np.sqrt(np.maximum(np.diag(cov), 0.0))
    else:
        cov = None
        std_errors = None
    diagnostics = {
        "step1_objective": float(res1.fun),
        "step2_objective_at_warm_start": float(warm),
        "restart_objectives": [float(r.fun) for r in stage1],
        "stage_iterations": [int(res1.nit), int(res2.nit)],
        "ridge": ridge,
        "backend": _kernels.BACKEND,
    }
    return EstimationResult(
        theta=theta_hat,
        covariance=cov,
        std_errors=std_errors,
        objective=max(float(res2.fun), 0.0),
        weight_stage="efficient",
        converged=bool(res1.success and res2.success),
        evaluations=engine.evals,
        diagnostics=diagnostics,
    )
