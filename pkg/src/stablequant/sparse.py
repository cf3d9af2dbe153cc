"""SCAD-penalised sparse estimation of the scale matrix.

The penalised objective adds n * sum of SCAD terms over the strict lower
triangle of the scale matrix to the simulated-quantile distance.  It is
minimised by cycling over columns: each column in turn is moved to the last
position of the matrix partition, its off-diagonal block gets one damped
quasi-Newton step of the locally majorised objective, the proposed column
is shrunk by the 1/(1 + w' Omega11^-1 w) normalisation, and the rotation
continues.  The majorisation uses the perturbed penalty of Hunter and Li,
which keeps the surrogate differentiable at zero; entries falling below a
relative threshold are set to exact zero and frozen for the sweep.

Tail index, locations and diagonal scales stay at their warm-start values;
only off-diagonal scale entries move.  The weighting matrix is held fixed
at the efficient weight of the warm start.  The tuning parameter is chosen
on a grid, either by the in-sample validation criterion or by K-fold
cross-validation.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .directions import DirectionSet, build_direction_set
from .errors import (
    DegenerateInputError,
    DomainError,
    NotPositiveDefiniteError,
)
from .estimation import (
    EstimationResult,
    MmsqConfig,
    _PhiEngine,
    _fd_jacobian,
    _ridged,
    _statistic_covariance,
    estimate,
    parameter_names,
    simulation_inflation,
)
from .quantiles import phi_stats
from .stable import EsdParams, RngStream, init_esd

__all__ = [
    "ScadParams",
    "SparseResult",
    "scad_penalty",
    "scad_derivative",
    "lqa_epsilon",
    "sparse_estimate",
    "tune_lambda",
    "default_lambda_grid",
    "oracle_covariance",
]

logger = logging.getLogger(__name__)

# substream for the cross-validation fold permutation
CV_STREAM_OFFSET = 1 << 44

_MAX_SWEEPS = 50
_SWEEP_TOL = 1e-5
_ZERO_REL = 1e-4
_EIG_FLOOR = 1e-8


@dataclasses.dataclass(frozen=True)
class ScadParams:
    """Knot parameter a and penalty level lambda of the SCAD spline."""

    lambda_: float
    a: float = 3.7

    def __post_init__(self):
        if not self.a > 2.0:
            raise DomainError(f"a must exceed 2, got {self.a}")
        if self.lambda_ < 0.0:
            raise DomainError(f"lambda must be nonnegative, got {self.lambda_}")


@dataclasses.dataclass(frozen=True)
class SparseResult:
    """Sparse fit: parameters, surviving entries, and the tuning path.

    active_set holds zero-based pairs (i, j), i < j, of the off-diagonal
    entries that survived; every pair not listed is exactly zero in
    theta.omega.  path carries one record per fitted penalty level.
    """

    theta: EsdParams
    active_set: tuple
    lambda_: float
    path: tuple
    validation: float | None
    converged: bool
    sweeps: int

    def __post_init__(self):
        object.__setattr__(self, "active_set", tuple(map(tuple, self.active_set)))
        object.__setattr__(self, "path", tuple(self.path))
        m = self.theta.dim
        active = set(self.active_set)
        for i in range(m):
            for j in range(i + 1, m):
                entry = self.theta.omega[i, j]
                if (i, j) in active:
                    if entry == 0.0:
                        raise DomainError(f"active entry ({i}, {j}) is zero")
                elif entry != 0.0:
                    raise DomainError(f"entry ({i}, {j}) is nonzero but not active")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.to_dict(),
            "active_set": [list(ij) for ij in self.active_set],
            "lambda": self.lambda_,
            "path": list(self.path),
            "validation": self.validation,
            "converged": self.converged,
            "sweeps": self.sweeps,
        }


def scad_penalty(gamma, p: ScadParams):
    """SCAD penalty value, evaluated at |gamma|.

    Linear up to lambda, quadratic between the knots lambda and a*lambda,
    constant lambda^2 (a + 1)/2 beyond.
    """
    g = np.abs(np.asarray(gamma, dtype=float))
    lam, a = p.lambda_, p.a
    out = np.where(
        g <= lam,
        lam * g,
        np.where(
            g <= a * lam,
            (a * lam * g - 0.5 * g * g) / (a - 1.0) - lam * lam / (2.0 * (a - 1.0)),
            0.5 * lam * lam * (a + 1.0),
        ),
    )
    return float(out) if out.ndim == 0 else out


def scad_derivative(gamma, p: ScadParams):
    """Right derivative of the SCAD penalty at |gamma|."""
    g = np.abs(np.asarray(gamma, dtype=float))
    lam, a = p.lambda_, p.a
    out = np.where(
        g <= lam, lam, np.where(g <= a * lam, (a * lam - g) / (a - 1.0), 0.0)
    )
    return float(out) if out.ndim == 0 else out


def perturbed_penalty(gamma, p: ScadParams, eps: float):
    """Perturbed SCAD value p(|g|) - eps * int_0^|g| p'(t)/(eps + t) dt.

    The subtracted term removes the singularity of the derivative at zero
    while vanishing as eps goes to 0.  Piecewise closed form.
    """
    g = np.abs(np.asarray(gamma, dtype=float))
    lam, a = p.lambda_, p.a
    if lam == 0.0:
        out = np.zeros_like(g)
        return float(out) if out.ndim == 0 else out
    if not eps > 0.0:
        raise DomainError("eps must be positive for a nonzero penalty level")
    integral = lam * np.log1p(np.minimum(g, lam) / eps)
    mid = np.clip(g, lam, a * lam)
    integral = integral + np.where(
        g > lam,
        ((a * lam + eps) * np.log((eps + mid) / (eps + lam)) - (mid - lam))
        / (a - 1.0),
        0.0,
    )
    out = scad_penalty(g, p) - eps * integral
    return float(out) if out.ndim == 0 else out


def penalty_majorizer(gamma, gamma0, p: ScadParams, eps: float):
    """Quadratic surrogate of the perturbed penalty around |gamma0|.

    Dominates perturbed_penalty everywhere and touches it at
    |gamma| = |gamma0|, which is what makes the sweep an MM scheme.
    """
    g0 = np.abs(np.asarray(gamma0, dtype=float))
    coef = scad_derivative(g0, p) / (2.0 * (eps + g0))
    g = np.asarray(gamma, dtype=float)
    out = perturbed_penalty(g0, p, eps) + coef * (g * g - g0 * g0)
    return float(out) if out.ndim == 0 else out


def lqa_epsilon(theta0: EsdParams, p: ScadParams, n: int) -> float:
    """Perturbation size: 1e-8 * min nonzero |off-diagonal| / (2 n lambda).

    Falls back to the 1e-300 floor when every off-diagonal entry of the
    starting matrix is zero, so downstream divisions stay finite.
    """
    if p.lambda_ <= 0.0:
        raise DomainError("the perturbation is only defined for lambda > 0")
    if n < 1:
        raise DomainError("n must be positive")
    m = theta0.dim
    il, jl = np.tril_indices(m, k=-1)
    off = np.abs(theta0.omega[il, jl])
    nz = off[off > 0.0]
    if nz.size == 0:
        return 1e-300
    return 1e-8 * float(nz.min()) / (2.0 * n * p.lambda_)


class _ColumnEngine:
    """Statistic evaluation specialised to single-column scale updates.

    Wraps the frozen common-random-number pool.  Full evaluations factor
    the matrix in the canonical coordinate order; the column Jacobian
    works in the rotated order with the swept column last, where a bump of
    a column entry changes only the last factor row, hence only the
    projections that touch the swept coordinate.
    """

    def __init__(self, base: _PhiEngine, alpha: float, xi: np.ndarray,
                 directions: DirectionSet):
        self.base = base
        self.xi = np.asarray(xi, dtype=float)
        self.sqrt_zeta = np.sqrt(
            _kernels.subordinator(
                base.theta_raw, base.log_sin, base.log_w, 0.5 * alpha
            )
        )
        m = directions.dim
        self.m = m
        idx_i, idx_j, w_i, w_j = base.support
        self.touching = [
            np.flatnonzero((idx_i == q) | (idx_j == q)) for q in range(m)
        ]
        sizes = np.where(base.kurt, 3, 2)
        self.row_blocks = [
            np.arange(base.offsets[k], base.offsets[k] + sizes[k])
            for k in range(len(sizes))
        ]
        self.evals = 0

    def phi_full(self, omega: np.ndarray) -> np.ndarray:
        """Statistic vector at the current scale matrix, canonical order."""
        self.evals += 1
        chol = np.linalg.cholesky(omega)
        y = _kernels.assemble_esd(self.base.z, self.sqrt_zeta, self.xi, chol)
        idx_i, idx_j, w_i, w_j = self.base.support
        total, ok = _kernels.phi_from_sample(
            y, idx_i, idx_j, w_i, w_j, self.base.kurt, self.base.offsets,
            self.base.taus5, self.base.nstats,
        )
        if not ok:
            raise DegenerateInputError(
                "a projected replicate has zero interquartile range"
            )
        return total / self.base.R

    def column_jacobian(self, omega, j, active, h_scale):
        """Forward-difference Jacobian of the statistics in the entries
        (q, j), q in active, with the swept column rotated last.

        Rows of projections not touching coordinate j are exactly zero.
        Returns the (n_stats, len(active)) matrix.
        """
        m = self.m
        others = np.array([q for q in range(m) if q != j], dtype=np.int64)
        pos = np.empty(m, dtype=np.int64)
        pos[others] = np.arange(m - 1)
        pos[j] = m - 1
        l_head = np.linalg.cholesky(omega[np.ix_(others, others)])
        z_p = self.base.z[:, :, np.r_[others, j]]
        y_p = np.empty_like(z_p)
        y_p[:, :, : m - 1] = self.xi[others] + self.sqrt_zeta[..., None] * (
            z_p[:, :, : m - 1] @ l_head.T
        )

        touched = self.touching[j]
        idx_i, idx_j, w_i, w_j = self.base.support
        t_i = pos[idx_i[touched]]
        t_j = pos[idx_j[touched]]
        t_wi = w_i[touched]
        t_wj = w_j[touched]
        t_kurt = self.base.kurt[touched]
        t_sizes = np.where(t_kurt, 3, 2)
        t_offsets = np.concatenate(([0], np.cumsum(t_sizes)))[:-1].astype(np.int64)
        t_nstats = int(t_sizes.sum())
        full_rows = np.concatenate([self.row_blocks[k] for k in touched])

        def last_row(col_vals):
            a = solve_triangular(l_head, col_vals, lower=True)
            d2 = omega[j, j] - a @ a
            if d2 <= 0.0:
                return None
            return np.concatenate([a, [np.sqrt(d2)]])

        def touched_phi(lrow):
            y_p[:, :, m - 1] = self.xi[j] + self.sqrt_zeta * (z_p @ lrow)
            vals, ok = _kernels.phi_from_sample(
                y_p, t_i, t_j, t_wi, t_wj, t_kurt, t_offsets, self.base.taus5,
                t_nstats,
            )
            if not ok:
                raise DegenerateInputError(
                    "a projected replicate has zero interquartile range"
                )
            return vals / self.base.R

        base_col = omega[others, j]
        lrow0 = last_row(base_col)
        if lrow0 is None:
            raise NotPositiveDefiniteError("current scale matrix is not PD")
        f0 = touched_phi(lrow0)
        jac = np.zeros((self.base.nstats, len(active)))
        for col_idx, q in enumerate(active):
            h = h_scale[col_idx]
            for step in (h, -h):
                col = base_col.copy()
                col[pos[q]] += step
                lrow = last_row(col)
                if lrow is not None:
                    jac[full_rows, col_idx] = (touched_phi(lrow) - f0) / step
                    break
        return jac


@dataclasses.dataclass
class _PathState:
    # everything shared across penalty levels for one data set
    hat: np.ndarray
    weight: np.ndarray
    engine: _ColumnEngine
    directions: DirectionSet
    alpha: float
    xi: np.ndarray
    omega0: np.ndarray
    n: int
    config: MmsqConfig


def _prepare_state(y, config: MmsqConfig, warm: EstimationResult,
                   eta_mc_size: int) -> _PathState:
    init = init_esd(y)
    directions = build_direction_set(init)
    hat = phi_stats(y, directions, config.taus)
    om_stat = _statistic_covariance(
        warm.theta, directions, config.taus, config.seed, eta_mc_size
    )
    om_r, _ = _ridged(om_stat)
    weight = np.linalg.inv(om_r)
    weight = 0.5 * (weight + weight.T)
    n = y.shape[0]
    n_sim = config.n_sim if config.n_sim is not None else n
    base = _PhiEngine(config.seed, config.R, n_sim, directions)
    engine = _ColumnEngine(base, warm.theta.alpha, warm.theta.xi, directions)
    return _PathState(
        hat=hat.values,
        weight=weight,
        engine=engine,
        directions=directions,
        alpha=warm.theta.alpha,
        xi=np.asarray(warm.theta.xi, dtype=float),
        omega0=np.asarray(warm.theta.omega, dtype=float).copy(),
        n=n,
        config=config,
    )


def _zero_small(omega, thresholds):
    m = omega.shape[0]
    off = ~np.eye(m, dtype=bool)
    out = omega.copy()
    out[off & (np.abs(omega) < thresholds)] = 0.0
    return out


def _ensure_pd(omega, thresholds):
    """PD check with one clip-and-rezero repair; None when unrepairable."""
    try:
        np.linalg.cholesky(omega)
        return omega
    except np.linalg.LinAlgError:
        pass
    logger.warning("scale matrix left the PD cone; clipping eigenvalues")
    vals, vecs = np.linalg.eigh(omega)
    repaired = (vecs * np.maximum(vals, _EIG_FLOOR)) @ vecs.T
    repaired = _zero_small(0.5 * (repaired + repaired.T), thresholds)
    try:
        np.linalg.cholesky(repaired)
        return repaired
    except np.linalg.LinAlgError:
        return None


def _penalty_total(omega, p: ScadParams, eps: float, n: int) -> float:
    if p.lambda_ == 0.0:
        return 0.0
    il, jl = np.tril_indices(omega.shape[0], k=-1)
    return n * float(np.sum(perturbed_penalty(omega[il, jl], p, eps)))


def _fit_at(state: _PathState, p: ScadParams, omega_start,
            epsilon: float | None = None) -> SparseResult:
    engine = state.engine
    w = state.weight
    n = state.n
    m = omega_start.shape[0]
    diag0 = np.diag(state.omega0)
    thresholds = _ZERO_REL * np.sqrt(np.outer(diag0, diag0))
    off_mask = ~np.eye(m, dtype=bool)

    omega = _zero_small(0.5 * (omega_start + omega_start.T), thresholds)
    omega = _ensure_pd(omega, thresholds)
    if omega is None:
        raise NotPositiveDefiniteError("starting scale matrix is not repairable")

    if epsilon is not None:
        if not epsilon > 0.0:
            raise DomainError("epsilon override must be positive")
        eps = float(epsilon)
    elif p.lambda_ > 0.0:
        eps = lqa_epsilon(
            EsdParams(state.alpha, state.xi, omega), p, n
        )
    else:
        eps = 0.0

    def total_objective(om, phi):
        r = state.hat - phi
        return float(r @ w @ r) + _penalty_total(om, p, eps, n)

    phi = engine.phi_full(omega)
    q_cur = total_objective(omega, phi)
    sweep_objectives = [q_cur]
    converged = False
    nondescent = 0
    sweeps = 0

    for _ in range(_MAX_SWEEPS):
        sweeps += 1
        omega_before = omega.copy()
        q_before = q_cur
        frozen = off_mask & (np.abs(omega) < thresholds)
        for j in range(m - 1, -1, -1):
            active = [q for q in range(m) if q != j and not frozen[q, j]]
            if not active:
                continue
            others = np.array([q for q in range(m) if q != j], dtype=np.int64)
            col_active = omega[active, j]
            c_diag = scad_derivative(np.abs(col_active), p) / (
                eps + np.abs(col_active)
            ) if p.lambda_ > 0.0 else np.zeros(len(active))
            h_scale = state.config.fd_step * np.sqrt(
                omega[active, active] * omega[j, j]
            )
            jac = engine.column_jacobian(omega, j, active, h_scale)
            r0 = state.hat - phi
            curv = 2.0 * jac.T @ w @ jac + n * np.diag(c_diag)
            grad = -2.0 * jac.T @ (w @ r0) + n * c_diag * col_active
            try:
                step = np.linalg.solve(curv, grad)
            except np.linalg.LinAlgError:
                continue
            proposal = col_active - step
            # embed into the full column (frozen entries stay zero), then
            # apply the shrink normalisation of the rotated-partition update
            col_full = np.zeros(m - 1)
            sel = [int(np.flatnonzero(others == q)[0]) for q in active]
            col_full[sel] = proposal
            omega11 = omega[np.ix_(others, others)]
            t = float(col_full @ np.linalg.solve(omega11, col_full))
            col_star = col_full / (1.0 + t)

            current = omega[others, j]
            scale = 1.0
            for _half in range(9):
                cand_col = current + scale * (col_star - current)
                cand = omega.copy()
                cand[others, j] = cand_col
                cand[j, others] = cand_col
                cand = _zero_small(cand, thresholds)
                cand = _ensure_pd(cand, thresholds)
                if cand is not None:
                    phi_cand = engine.phi_full(cand)
                    q_cand = total_objective(cand, phi_cand)
                    if q_cand <= q_cur + 1e-12 * (1.0 + abs(q_cur)):
                        omega = cand
                        phi = phi_cand
                        q_cur = q_cand
                        frozen |= off_mask & (np.abs(omega) < thresholds)
                        break
                scale *= 0.5
        sweep_objectives.append(q_cur)
        if np.max(np.abs(omega - omega_before)) < _SWEEP_TOL:
            converged = True
            break
        if q_cur >= q_before - 1e-12 * (1.0 + abs(q_before)):
            nondescent += 1
            if nondescent >= 3:
                converged = False
                break
        else:
            nondescent = 0

    active_set = tuple(
        (i, j)
        for i in range(m)
        for j in range(i + 1, m)
        if omega[i, j] != 0.0
    )
    record = {
        "lambda": p.lambda_,
        "objective": q_cur,
        "active_size": len(active_set),
        "sweep_objectives": [float(v) for v in sweep_objectives],
    }
    return SparseResult(
        theta=EsdParams(state.alpha, state.xi, omega),
        active_set=active_set,
        lambda_=p.lambda_,
        path=(record,),
        validation=None,
        converged=converged,
        sweeps=sweeps,
    )


def sparse_estimate(
    data,
    config: MmsqConfig,
    p: ScadParams,
    *,
    warm: EstimationResult | None = None,
    epsilon: float | None = None,
    eta_mc_size: int = 200_000,
) -> SparseResult:
    """Sparse scale-matrix fit at one penalty level.

    Runs column sweeps from the warm start (computed by ``estimate`` when
    not supplied): each column is rotated last, its off-diagonal block
    takes one damped majorised quasi-Newton step followed by the shrink
    normalisation, sub-threshold entries are zeroed exactly, and the sweep
    repeats until the matrix stops moving.

    Parameters
    ----------
    data : array_like, shape (n, m)
    config : MmsqConfig
    p : ScadParams
    warm : EstimationResult, optional
        Plain two-stage estimate of the same data under the same config.
    epsilon : float, optional
        Override for the penalty perturbation size; defaults to the
        data-driven choice of ``lqa_epsilon``.
    eta_mc_size : int
        Simulation size for the fixed weighting matrix.

    Returns
    -------
    SparseResult
    """
    y = np.asarray(data, dtype=float)
    if y.ndim != 2:
        raise DomainError("data must be a 2-d array")
    if y.shape[0] < 100:
        raise DomainError(f"need at least 100 observations, got {y.shape[0]}")
    if warm is None:
        warm = estimate(y, config, eta_mc_size=eta_mc_size, with_covariance=False)
    state = _prepare_state(y, config, warm, eta_mc_size)
    return _fit_at(state, p, state.omega0, epsilon)


def default_lambda_grid(theta: EsdParams, a: float = 3.7, size: int = 20) -> list:
    """Log-spaced penalty grid spanning [0.001, 1] times the largest
    off-diagonal magnitude of the reference estimate."""
    m = theta.dim
    il, jl = np.tril_indices(m, k=-1)
    top = float(np.max(np.abs(theta.omega[il, jl]))) if il.size else 0.0
    if top <= 0.0:
        # diagonal reference: fall back to a fraction of the largest scale
        top = 0.1 * float(np.max(np.diag(theta.omega)))
    return [ScadParams(lambda_=v, a=a) for v in np.geomspace(1e-3 * top, top, size)]


def _select_lambda(lambdas, values) -> int:
    """Index of the smallest validation value; ties go to the larger
    penalty (the sparser model)."""
    best = None
    for i in sorted(range(len(lambdas)), key=lambda k: -lambdas[k]):
        if best is None or values[i] < values[best]:
            best = i
    return best


def _kfold_indices(n: int, k: int, seed: int) -> list:
    perm = RngStream(seed, CV_STREAM_OFFSET).generator().permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def _validation_value(state: _PathState, res: SparseResult,
                      eta_mc_size: int) -> float:
    # the criterion re-weights the residual with the efficient weight at
    # the fitted point, not the frozen warm-start weight
    om_stat = _statistic_covariance(
        res.theta, state.directions, state.config.taus, state.config.seed,
        eta_mc_size,
    )
    om_r, _ = _ridged(om_stat)
    r = state.hat - state.engine.phi_full(res.theta.omega)
    return float(r @ np.linalg.solve(om_r, r)) / state.n


def tune_lambda(
    data,
    config: MmsqConfig,
    p_grid=None,
    method: str = "validation",
    k_folds: int = 5,
    *,
    warm: EstimationResult | None = None,
    eta_mc_size: int = 200_000,
) -> tuple:
    """Pick the penalty level on a grid and return the tuned sparse fit.

    "validation" refits the sparse path on the full sample and scores each
    level by the weighted residual criterion; "kfold" fits on each fold
    complement and scores against the held-out statistic vector.  Ties go
    to the larger penalty.

    Parameters
    ----------
    data : array_like, shape (n, m)
    config : MmsqConfig
    p_grid : list of ScadParams, optional
        Defaults to 20 log-spaced levels below the warm-start maximum.
    method : {"validation", "kfold"}
    k_folds : int
        Fold count for "kfold"; requires n >= 10 * k_folds.
    warm : EstimationResult, optional
        Plain two-stage estimate of the full data under the same config.
    eta_mc_size : int
        Simulation size for every weighting matrix along the path.

    Returns
    -------
    (lambda_star, SparseResult)
        The winning level and its fit, with the full path attached.
    """
    y = np.asarray(data, dtype=float)
    if y.ndim != 2:
        raise DomainError("data must be a 2-d array")
    n = y.shape[0]
    if warm is None:
        warm = estimate(y, config, eta_mc_size=eta_mc_size, with_covariance=False)
    if p_grid is None:
        p_grid = default_lambda_grid(warm.theta)
    if len(p_grid) == 0:
        raise DomainError("penalty grid is empty")
    for p in p_grid:
        if not isinstance(p, ScadParams):
            raise DomainError("grid entries must be ScadParams")
    order = np.argsort([p.lambda_ for p in p_grid])
    grid = [p_grid[i] for i in order]
    lambdas = [p.lambda_ for p in grid]

    state = _prepare_state(y, config, warm, eta_mc_size)

    if method == "validation":
        fits = []
        values = []
        om_prev = state.omega0
        for p in grid:
            res = _fit_at(state, p, om_prev)
            om_prev = res.theta.omega
            fits.append(res)
            values.append(_validation_value(state, res, eta_mc_size))
    elif method == "kfold":
        if k_folds < 2:
            raise DomainError("k-fold selection needs at least 2 folds")
        if n < 10 * k_folds:
            raise DomainError(
                f"k-fold selection needs n >= {10 * k_folds}, got {n}"
            )
        folds = _kfold_indices(n, k_folds, config.seed)
        values = np.zeros(len(grid))
        for fold in folds:
            held = y[fold]
            comp = np.delete(y, fold, axis=0)
            # the fold fit only seeds the sweeps; its covariance is never
            # read, and the Jacobian can fail at fold-level degeneracies
            warm_k = estimate(
                comp, config, eta_mc_size=eta_mc_size, with_covariance=False
            )
            state_k = _prepare_state(comp, config, warm_k, eta_mc_size)
            hat_held = phi_stats(held, state_k.directions, config.taus).values
            om_prev = state_k.omega0
            for gi, p in enumerate(grid):
                res = _fit_at(state_k, p, om_prev)
                om_prev = res.theta.omega
                om_stat = _statistic_covariance(
                    res.theta, state_k.directions, config.taus, config.seed,
                    eta_mc_size,
                )
                om_r, _ = _ridged(om_stat)
                r = hat_held - state_k.engine.phi_full(res.theta.omega)
                values[gi] += float(r @ np.linalg.solve(om_r, r)) / fold.size
        values = list(values)
        fits = None
    else:
        raise DomainError(f"unknown tuning method {method!r}")

    best = _select_lambda(lambdas, values)
    path = []
    if fits is not None:
        for res, v in zip(fits, values):
            rec = dict(res.path[0])
            rec["validation"] = float(v)
            path.append(rec)
        chosen = fits[best]
    else:
        # refit the winner on the full sample
        chosen = _fit_at(state, grid[best], state.omega0)
        for lam, v in zip(lambdas, values):
            path.append({"lambda": lam, "validation": float(v)})
    chosen = dataclasses.replace(
        chosen, path=tuple(path), validation=float(values[best])
    )
    return lambdas[best], chosen


def oracle_covariance(
    theta_hat: EsdParams,
    active_set,
    directions: DirectionSet,
    config: MmsqConfig,
    *,
    n: int,
    omega=None,
    eta_mc_size: int = 200_000,
) -> tuple:
    """Efficient-form covariance restricted to the surviving parameters.

    The free parameters are the tail index, the locations, every diagonal
    scale and the active off-diagonal scales; zeroed entries are treated
    as known.  Returns (covariance, names).
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

    names = parameter_names(m)
    active = {tuple(sorted(ij)) for ij in active_set}
    keep = []
    for idx, name in enumerate(names):
        if not name.startswith("omega_"):
            keep.append(idx)
            continue
        i, j = (int(v) - 1 for v in name.split("_")[1:])
        if i == j or (min(i, j), max(i, j)) in active:
            keep.append(idx)
    keep = np.array(keep, dtype=np.int64)

    om_r, _ = _ridged(omega)
    g_active = jac[:, keep]
    curv = g_active.T @ np.linalg.solve(om_r, g_active)
    curv = 0.5 * (curv + curv.T)
    vals, vecs = np.linalg.eigh(curv)
    if vals[-1] <= 0.0 or vals[0] < 1e-12 * vals[-1]:
        worst = int(np.argmax(np.abs(vecs[:, 0])))
        raise DomainError(
            f"active-set curvature is singular along {names[keep[worst]]}"
        )
    inv = (vecs / vals) @ vecs.T
    cov = simulation_inflation(config.R) * 0.5 * (inv + inv.T) / n
    return cov, [names[i] for i in keep]
