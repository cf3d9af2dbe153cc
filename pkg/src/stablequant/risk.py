"""Marginal VaR, network CoVaR, dominance tests and risk networks.

The network CoVaR of institution j is the tau-quantile of the system sum
S = sum_i Y_i conditional on Y_j sitting at or below its own marginal
tau-level VaR.  All conditional quantities are Monte Carlo: the joint
draws come from one dedicated substream and are reused, bit for bit, for
every institution and every perturbed parameter value, so differences of
CoVaRs and their finite-difference gradients are computed under common
random numbers.  The dominance test compares two institutions' CoVaRs
with a delta-method variance built from the fitted parameter covariance;
the network draws an edge between two institutions exactly when the test
does not reject equality at the 5% level.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import DomainError, InsufficientConditioningError, NumericError
from .estimation import natural_vector, parameter_names
from .quantiles import empirical_quantile
from .stable import EsdParams, RngStream, sample_esd

__all__ = [
    "RiskConfig",
    "PortfolioModel",
    "RiskNetwork",
    "var_individual",
    "netcovar",
    "dominance_test",
    "build_network",
    "network_to_dot",
    "read_returns_panel",
]

# marginal VaR draws and joint system draws come from separate dedicated
# substreams, so neither interferes with estimation streams or each other
VAR_STREAM_OFFSET = 1 << 42
JOINT_STREAM_OFFSET = 1 << 43

_MIN_KEPT = 1000
_EDGE_LEVEL = 0.05
_VAR_FLOOR = 1e-12


@dataclasses.dataclass(frozen=True)
class RiskConfig:
    """Monte Carlo sizes and levels of the risk computations."""

    tau: float = 0.05
    mc_size: int = 2_000_000
    seed: int = 0
    fd_step: float = 1e-3
    invert_edge_rule: bool = False

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if self.mc_size * self.tau < 1e4:
            raise DomainError(
                "mc_size * tau must be at least 1e4 to resolve the "
                f"conditional tail, got {self.mc_size * self.tau:g}"
            )
        if not 0.0 < self.fd_step < 0.1:
            raise DomainError(f"fd_step must lie in (0, 0.1), got {self.fd_step}")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")


@dataclasses.dataclass(frozen=True)
class PortfolioModel:
    """Fitted joint model of d institutions plus its parameter covariance.

    param_names lists the free parameters in the rows and columns of
    param_cov; it defaults to the full natural parameter set and shrinks
    to the surviving set for a sparse fit.
    """

    params: EsdParams
    labels: tuple
    param_cov: np.ndarray
    param_names: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        d = self.params.dim
        if len(self.labels) != d:
            raise DomainError(
                f"need {d} labels for a {d}-dimensional model, "
                f"got {len(self.labels)}"
            )
        full = parameter_names(d)
        names = tuple(full) if self.param_names is None else tuple(self.param_names)
        object.__setattr__(self, "param_names", names)
        if len(set(names)) != len(names):
            raise DomainError("parameter names must be unique")
        for name in names:
            if name not in full:
                raise DomainError(f"unknown parameter name {name!r}")
        cov = np.asarray(self.param_cov, dtype=float)
        object.__setattr__(self, "param_cov", cov)
        if cov.shape != (len(names), len(names)):
            raise DomainError(
                f"param_cov must be {len(names)}x{len(names)} to match "
                "the free parameters"
            )
        if not np.allclose(cov, cov.T, atol=1e-8):
            raise DomainError("param_cov must be symmetric")

    @property
    def dim(self) -> int:
        return self.params.dim


def _marginal_var(params: EsdParams, j: int, cfg: RiskConfig) -> float:
    marginal = EsdParams(
        params.alpha, [params.xi[j]], [[params.omega[j, j]]]
    )
    draws = sample_esd(marginal, cfg.mc_size, RngStream(cfg.seed, VAR_STREAM_OFFSET))
    return empirical_quantile(draws[:, 0], cfg.tau)


def _check_index(model: PortfolioModel, j: int) -> None:
    if not 0 <= j < model.dim:
        raise DomainError(
            f"institution index must lie in [0, {model.dim}), got {j}"
        )


def var_individual(model: PortfolioModel, j: int, cfg: RiskConfig) -> float:
    """Marginal tau-level VaR of institution j.

    Empirical tau-quantile of mc_size univariate draws from the marginal
    of the fitted model, under the dedicated VaR substream.
    """
    _check_index(model, j)
    return _marginal_var(model.params, j, cfg)


def _conditional_quantile(system: np.ndarray, margin: np.ndarray,
                          var_level: float, tau: float) -> float:
    kept = system[margin <= var_level]
    if kept.size < _MIN_KEPT:
        raise InsufficientConditioningError(
            f"only {kept.size} draws fall below the conditioning VaR; "
            "increase mc_size"
        )
    return empirical_quantile(kept, tau)


def _netcovar_many(params: EsdParams, indices, cfg: RiskConfig) -> list:
    # one shared joint sample serves every requested institution, which
    # is what makes CoVaR differences common-random-number quantities
    y = sample_esd(params, cfg.mc_size, RngStream(cfg.seed, JOINT_STREAM_OFFSET))
    system = y.sum(axis=1)
    out = []
    for j in indices:
        var_j = _marginal_var(params, j, cfg)
        out.append(_conditional_quantile(system, y[:, j], var_j, cfg.tau))
    return out


def netcovar(model: PortfolioModel, j: int, cfg: RiskConfig) -> float:
    """Network CoVaR of institution j.

    The tau-quantile of the system sum over the joint draws whose j-th
    component sits at or below the marginal VaR; the joint event then has
    probability tau squared.
    """
    _check_index(model, j)
    return _netcovar_many(model.params, [j], cfg)[0]


def _bump(params: EsdParams, name: str, h: float) -> EsdParams:
    alpha = params.alpha
    xi = np.array(params.xi, dtype=float)
    om = np.array(params.omega, dtype=float)
    if name == "alpha":
        alpha = alpha + h
    elif name.startswith("xi_"):
        xi[int(name[3:]) - 1] += h
    else:
        i, j = (int(v) - 1 for v in name.split("_")[1:])
        om[i, j] += h
        if i != j:
            om[j, i] = om[i, j]
    return EsdParams(alpha, xi, om)


def _natural_value(params: EsdParams, name: str) -> float:
    names = parameter_names(params.dim)
    return float(natural_vector(params)[names.index(name)])


def _pair_gradients(model: PortfolioModel, j: int, k: int,
                    cfg: RiskConfig) -> np.ndarray:
    """Finite-difference gradients of (CoVaR_j, CoVaR_k) in the free
    parameters, under common random numbers; (2, n_free)."""
    names = model.param_names
    grads = np.empty((2, len(names)))
    for idx, name in enumerate(names):
        h = cfg.fd_step * max(abs(_natural_value(model.params, name)), 1.0)
        sides = []
        for sgn in (1.0, -1.0):
            try:
                theta = _bump(model.params, name, sgn * h)
            except DomainError:
                sides.append(None)
                continue
            pair = _netcovar_many(theta, [j, k], cfg)
            sides.append((sgn * h, np.asarray(pair)))
        hi, lo = sides
        if hi is not None and lo is not None:
            grads[:, idx] = (hi[1] - lo[1]) / (hi[0] - lo[0])
        elif hi is not None or lo is not None:
            pt = hi if hi is not None else lo
            base = np.asarray(_netcovar_many(model.params, [j, k], cfg))
            grads[:, idx] = (pt[1] - base) / pt[0]
        else:
            raise NumericError(
                f"cannot perturb {name} without leaving the parameter domain"
            )
    return grads


def _pair_test(model: PortfolioModel, j: int, k: int, cfg: RiskConfig) -> dict:
    nc_j, nc_k = _netcovar_many(model.params, [j, k], cfg)
    delta = nc_j - nc_k
    grads = _pair_gradients(model, j, k, cfg)
    diff_grad = grads[0] - grads[1]
    variance = float(diff_grad @ model.param_cov @ diff_grad)
    floored = variance <= 0.0
    if floored:
        variance = _VAR_FLOOR
    z = delta / math.sqrt(variance)
    p_value = math.erfc(abs(z) / math.sqrt(2.0))
    return {
        "j": j,
        "k": k,
        "netcovar_j": nc_j,
        "netcovar_k": nc_k,
        "difference": delta,
        "variance": variance,
        "z": z,
        "p_value": p_value,
        "variance_floored": floored,
    }


def dominance_test(model: PortfolioModel, j: int, k: int,
                   cfg: RiskConfig) -> tuple:
    """Two-sided test of equal network CoVaR for institutions j and k.

    Returns (z, p_value).  The difference and its gradients share one
    set of joint draws, and the variance is the full delta-method
    quadratic form in the fitted parameter covariance.  A variance that
    rounds to zero or below is floored at 1e-12.
    """
    _check_index(model, j)
    _check_index(model, k)
    if j == k:
        return 0.0, 1.0
    stats = _pair_test(model, j, k, cfg)
    return stats["z"], stats["p_value"]


@dataclasses.dataclass(frozen=True)
class RiskNetwork:
    """All pairwise dominance tests plus the resulting adjacency."""

    nodes: tuple
    pair_stats: tuple
    adjacency: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "pair_stats", tuple(self.pair_stats))
        adj = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "adjacency", adj)
        d = len(self.nodes)
        if adj.shape != (d, d):
            raise DomainError("adjacency must be square over the nodes")
        if not np.array_equal(adj, adj.T):
            raise DomainError("adjacency must be symmetric")
        if np.any(np.diag(adj)):
            raise DomainError("self-loops are not allowed")

    @property
    def total_edges(self) -> int:
        return int(np.triu(self.adjacency, k=1).sum())

    @property
    def edge_fraction(self) -> float:
        d = len(self.nodes)
        return self.total_edges / (d * (d - 1) / 2)

    def degrees(self) -> dict:
        return {
            label: int(self.adjacency[i].sum())
            for i, label in enumerate(self.nodes)
        }

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "pairs": [dict(p) for p in self.pair_stats],
            "adjacency": self.adjacency.astype(int).tolist(),
            "total_edges": self.total_edges,
            "edge_fraction": self.edge_fraction,
            "degrees": self.degrees(),
        }


def _pair_test_guarded(args):
    model, cfg, j, k = args
    try:
        return _pair_test(model, cfg=cfg, j=j, k=k)
    except (DomainError, NumericError) as exc:
        return {"j": j, "k": k, "error": f"{type(exc).__name__}: {exc}"}


def build_network(model: PortfolioModel, cfg: RiskConfig, *,
                  workers: int = 1) -> RiskNetwork:
    """Run every pairwise dominance test and assemble the network.

    An edge joins two institutions when the test does not reject equal
    CoVaR at the 5% level (inverted when the config says so).  Failed
    pairs are kept in the statistics with an error note and contribute no
    edge.
    """
    d = model.dim
    if d < 2:
        raise DomainError("a network needs at least 2 institutions")
    jobs = [
        (model, cfg, j, k) for j in range(d) for k in range(j + 1, d)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_pair_test_guarded, jobs))
    else:
        stats = [_pair_test_guarded(job) for job in jobs]
    stats.sort(key=lambda s: (s["j"], s["k"]))

    adjacency = np.zeros((d, d), dtype=bool)
    for s in stats:
        if "error" in s:
            continue
        edge = s["p_value"] > _EDGE_LEVEL
        if cfg.invert_edge_rule:
            edge = not edge
        s["edge"] = edge
        if edge:
            adjacency[s["j"], s["k"]] = True
            adjacency[s["k"], s["j"]] = True
    return RiskNetwork(
        nodes=model.labels, pair_stats=tuple(stats), adjacency=adjacency
    )


def network_to_dot(network: RiskNetwork) -> str:
    """Undirected DOT rendering with one node line per institution."""

    def quote(label: str) -> str:
        return '"' + label.replace('"', '\\"') + '"'

    lines = ["graph risk {"]
    for label in network.nodes:
        lines.append(f"  {quote(label)};")
    for j in range(len(network.nodes)):
        for k in range(j + 1, len(network.nodes)):
            if network.adjacency[j, k]:
                lines.append(
                    f"  {quote(network.nodes[j])} -- {quote(network.nodes[k])};"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"


def read_returns_panel(path) -> tuple:
    """Read a returns panel CSV: header row of labels, one row per period.

    Returns (labels, data) with data shaped (periods, institutions).
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2:
        raise DomainError("panel needs a header row and at least one period")
    labels = [c.strip() for c in rows[0]]
    if len(labels) == 0 or any(not lab for lab in labels):
        raise DomainError("header row must name every institution")
    width = len(labels)
    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DomainError(
                f"row {r} has {len(row)} cells, expected {width}"
            )
        try:
            data[r - 2] = [float(c) for c in row]
        except ValueError as exc:
            raise DomainError(f"row {r} holds a non-numeric cell") from exc
    return labels, data
