"""Marginal VaR, conditional CoVaR, dominance tests and networks."""

import json

import numpy as np
import pytest
from scipy import stats as st
from scipy.integrate import quad
from scipy.optimize import brentq

import stablequant as sq
from stablequant.errors import (
    DomainError,
    InsufficientConditioningError,
)
from stablequant.estimation import parameter_names
from stablequant.risk import (
    PortfolioModel,
    RiskConfig,
    RiskNetwork,
    _conditional_quantile,
    _pair_test,
    build_network,
    dominance_test,
    netcovar,
    network_to_dot,
    read_returns_panel,
    var_individual,
)

CFG = RiskConfig(tau=0.05, mc_size=400_000, seed=10)
CFG_FAST = RiskConfig(tau=0.05, mc_size=250_000, seed=10)


def model_of(alpha, xi, om, labels, cov_scale=1e-4):
    params = sq.EsdParams(alpha, xi, om)
    k = len(parameter_names(len(labels)))
    return PortfolioModel(params, labels, cov_scale * np.eye(k))


@pytest.fixture(scope="module")
def exchangeable3():
    om = 0.5 * np.ones((3, 3))
    np.fill_diagonal(om, 1.0)
    return model_of(1.8, np.zeros(3), om, ["A", "B", "C"], cov_scale=0.01)


@pytest.fixture(scope="module")
def network3(exchangeable3):
    return build_network(exchangeable3, CFG_FAST)


def test_config_validation():
    cfg = RiskConfig()
    assert cfg.tau == 0.05 and cfg.mc_size == 2_000_000
    with pytest.raises(DomainError):
        RiskConfig(tau=0.0)
    with pytest.raises(DomainError):
        RiskConfig(tau=1.0)
    with pytest.raises(DomainError):
        RiskConfig(tau=0.01, mc_size=500_000)
    with pytest.raises(DomainError):
        RiskConfig(fd_step=0.0)
    with pytest.raises(DomainError):
        RiskConfig(seed=-1)


def test_model_validation():
    params = sq.EsdParams(1.8, [0.0, 0.0], np.eye(2))
    with pytest.raises(DomainError):
        PortfolioModel(params, ["A"], np.eye(6))
    with pytest.raises(DomainError):
        PortfolioModel(params, ["A", "B"], np.eye(5))
    bad = np.eye(6)
    bad[0, 1] = 0.5
    with pytest.raises(DomainError):
        PortfolioModel(params, ["A", "B"], bad)
    with pytest.raises(DomainError):
        PortfolioModel(params, ["A", "B"], np.eye(2),
                       param_names=("alpha", "omega_9_9"))
    with pytest.raises(DomainError):
        PortfolioModel(params, ["A", "B"], np.eye(2),
                       param_names=("alpha", "alpha"))
    model = PortfolioModel(params, ["A", "B"], np.eye(6))
    assert model.param_names == tuple(parameter_names(2))
    restricted = PortfolioModel(
        params, ["A", "B"], np.eye(5),
        param_names=tuple(n for n in parameter_names(2) if n != "omega_2_1"),
    )
    assert len(restricted.param_names) == 5


def test_var_matches_gaussian_quantile():
    model = model_of(2.0, [0.0], [[1.0]], ["A"])
    value = var_individual(model, 0, CFG)
    oracle = st.norm.ppf(0.05)
    assert abs(value / oracle - 1.0) < 0.01
    with pytest.raises(DomainError):
        var_individual(model, 1, CFG)
    with pytest.raises(DomainError):
        var_individual(model, -1, CFG)


def test_var_heavier_tail_sits_lower():
    gauss = var_individual(model_of(2.0, [0.0], [[1.0]], ["A"]), 0, CFG)
    heavy = var_individual(model_of(1.7, [0.0], [[1.0]], ["A"]), 0, CFG)
    assert heavy < gauss
    oracle = st.levy_stable.ppf(0.05, 1.7, 0.0, scale=2.0 ** -0.5)
    assert abs(heavy - oracle) < 0.01


def test_netcovar_d1_reduces_to_tau_squared_quantile():
    model = model_of(2.0, [0.0], [[1.0]], ["A"])
    value = netcovar(model, 0, CFG)
    oracle = st.norm.ppf(0.05 ** 2)
    # three conditional-quantile standard errors at the tau^2 point
    density = st.norm.pdf(oracle) / 0.05
    se = np.sqrt(0.05 * 0.95 / (CFG.mc_size * 0.05)) / density
    assert abs(value - oracle) <= 3.0 * se


def test_netcovar_d2_independent_matches_quadrature():
    model = model_of(2.0, [0.0, 0.0], np.eye(2), ["A", "B"])
    value = netcovar(model, 0, CFG)
    var_level = st.norm.ppf(0.05)

    def joint_cdf(s):
        return quad(
            lambda y: st.norm.pdf(y) * st.norm.cdf(s - y), -12.0, var_level,
            limit=200,
        )[0]

    oracle = brentq(lambda s: joint_cdf(s) - 0.05 ** 2, -10.0, 0.0)
    density = quad(
        lambda y: st.norm.pdf(y) * st.norm.pdf(oracle - y), -12.0, var_level,
        limit=200,
    )[0] / 0.05
    se = np.sqrt(0.05 * 0.95 / (CFG.mc_size * 0.05)) / density
    assert abs(value - oracle) <= 3.0 * se


def test_netcovar_exchangeable_symmetry(exchangeable3):
    values = [netcovar(exchangeable3, j, CFG) for j in range(3)]
    spread = max(values) - min(values)
    # the conditional samples of distinct institutions overlap little, so
    # this is Monte Carlo noise of two nearly independent tail quantiles
    assert spread < 0.5


def test_netcovar_monotone_in_tau(exchangeable3):
    values = []
    for tau in (0.01, 0.05, 0.10):
        cfg = RiskConfig(tau=tau, mc_size=1_000_000, seed=10)
        values.append(netcovar(exchangeable3, 0, cfg))
    assert values[0] < values[1] < values[2]


def test_translation_equivariance(exchangeable3):
    om = np.array(exchangeable3.params.omega)
    shifted = model_of(1.8, 0.3 * np.ones(3), om, ["A", "B", "C"])
    base_var = var_individual(exchangeable3, 0, CFG)
    assert abs(var_individual(shifted, 0, CFG) - (base_var + 0.3)) < 1e-9
    base_nc = netcovar(exchangeable3, 0, CFG)
    assert abs(netcovar(shifted, 0, CFG) - (base_nc + 0.9)) < 1e-6


def test_dominance_same_institution_is_degenerate(exchangeable3):
    assert dominance_test(exchangeable3, 1, 1, CFG_FAST) == (0.0, 1.0)


def test_dominance_is_symmetric(exchangeable3):
    ab = _pair_test(exchangeable3, 0, 1, CFG_FAST)
    ba = _pair_test(exchangeable3, 1, 0, CFG_FAST)
    assert ab["p_value"] == ba["p_value"]
    assert ab["z"] == -ba["z"]
    assert ab["variance"] == ba["variance"]
    assert ab["difference"] == -ba["difference"]


def test_exchangeable_pairs_do_not_reject(network3):
    for stats in network3.pair_stats:
        assert stats["p_value"] >= 0.5


def test_dominance_detects_scale_asymmetry():
    # institution 1 carries most of the scale and the coupling; with a
    # tight parameter covariance the CoVaR gap is overwhelming
    model = model_of(
        1.9, [0.0, 0.0], np.array([[4.0, 0.8], [0.8, 0.5]]), ["BIG", "SMALL"],
        cov_scale=1e-6,
    )
    z, p = dominance_test(model, 0, 1, CFG_FAST)
    assert p < 0.05
    assert z < 0.0


def test_variance_floor_is_flagged():
    params = sq.EsdParams(1.8, [0.0, 0.0], np.eye(2))
    model = PortfolioModel(params, ["A", "B"], np.zeros((6, 6)))
    stats = _pair_test(model, 0, 1, CFG_FAST)
    assert stats["variance_floored"] is True
    assert stats["variance"] == 1e-12
    z, p = dominance_test(model, 0, 1, CFG_FAST)
    assert np.isfinite(z) and 0.0 <= p <= 1.0


def test_network_complete_for_exchangeable(network3):
    assert network3.total_edges == 3
    assert network3.edge_fraction == 1.0
    assert network3.degrees() == {"A": 2, "B": 2, "C": 2}
    np.testing.assert_array_equal(network3.adjacency, network3.adjacency.T)
    assert not np.any(np.diag(network3.adjacency))
    assert len(network3.pair_stats) == 3
    for stats in network3.pair_stats:
        assert stats["edge"] is True
        for field in ("netcovar_j", "netcovar_k", "difference", "variance",
                      "z", "p_value"):
            assert np.isfinite(stats[field])


def test_network_d2_edge_rule_and_outputs():
    model = model_of(
        1.9, [0.0, 0.0], np.array([[4.0, 0.8], [0.8, 0.5]]), ["BIG", "SMALL"],
        cov_scale=1e-6,
    )
    net = build_network(model, CFG_FAST)
    assert net.total_edges == 0
    assert len(net.pair_stats) == 1
    dot = network_to_dot(net)
    assert '"BIG";' in dot and '"SMALL";' in dot
    assert "--" not in dot
    inverted = build_network(
        model, RiskConfig(tau=0.05, mc_size=250_000, seed=10,
                          invert_edge_rule=True),
    )
    assert inverted.total_edges == 1
    assert '"BIG" -- "SMALL";' in network_to_dot(inverted)
    payload = json.loads(json.dumps(net.to_dict()))
    assert payload["nodes"] == ["BIG", "SMALL"]
    assert payload["total_edges"] == 0
    assert payload["adjacency"] == [[0, 0], [0, 0]]
    assert payload["pairs"][0]["j"] == 0


def test_network_isolates_failed_pairs(exchangeable3, monkeypatch):
    import stablequant.risk as risk

    real = risk._pair_test

    def flaky(model, j, k, cfg):
        if (j, k) == (0, 1):
            raise DomainError("synthetic pair failure")
        return real(model, j, k, cfg)

    monkeypatch.setattr(risk, "_pair_test", flaky)
    net = build_network(exchangeable3, CFG_FAST)
    assert net.total_edges == 2
    failed = [s for s in net.pair_stats if "error" in s]
    assert len(failed) == 1
    assert failed[0]["j"] == 0 and failed[0]["k"] == 1
    assert "synthetic pair failure" in failed[0]["error"]
    assert not net.adjacency[0, 1]


def test_network_requires_two_institutions():
    model = model_of(1.8, [0.0], [[1.0]], ["A"])
    with pytest.raises(DomainError):
        build_network(model, CFG_FAST)


def test_network_validates_adjacency():
    bad = np.zeros((2, 2), dtype=bool)
    bad[0, 1] = True
    with pytest.raises(DomainError):
        RiskNetwork(nodes=("A", "B"), pair_stats=(), adjacency=bad)
    loop = np.eye(2, dtype=bool)
    with pytest.raises(DomainError):
        RiskNetwork(nodes=("A", "B"), pair_stats=(), adjacency=loop)


def test_conditional_quantile_guards_small_tails():
    rng = np.random.default_rng(0)
    system = rng.standard_normal(5000)
    margin = rng.standard_normal(5000)
    with pytest.raises(InsufficientConditioningError):
        _conditional_quantile(system, margin, np.quantile(margin, 0.01), 0.05)


def test_read_returns_panel(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("A, B ,C\n0.1,0.2,0.3\n-0.4,0.5,-0.6\n")
    labels, data = read_returns_panel(path)
    assert labels == ["A", "B", "C"]
    np.testing.assert_allclose(
        data, [[0.1, 0.2, 0.3], [-0.4, 0.5, -0.6]]
    )
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("A,B\n1.0\n")
    with pytest.raises(DomainError):
        read_returns_panel(ragged)
    words = tmp_path / "words.csv"
    words.write_text("A,B\n1.0,x\n")
    with pytest.raises(DomainError):
        read_returns_panel(words)
    empty = tmp_path / "empty.csv"
    empty.write_text("A,B\n")
    with pytest.raises(DomainError):
        read_returns_panel(empty)
