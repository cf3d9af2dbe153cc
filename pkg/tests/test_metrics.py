"""Matrix recovery metrics, designs and replicated experiments."""

import numpy as np
import pytest

import stablequant as sq
from stablequant.errors import DomainError, NotPositiveDefiniteError
from stablequant.estimation import MmsqConfig, OptimizerSettings
from stablequant.metrics import (
    Design,
    ReplicationSummary,
    coverage_table,
    design_names,
    f1_score,
    frobenius_error,
    get_design,
    kl_divergence,
    metric_table,
    run_experiment,
)
from stablequant.sparse import ScadParams

TINY_CFG = MmsqConfig(
    R=10, n_sim=150, seed=3,
    optimizer=OptimizerSettings(max_iter=300, restarts=0),
)


def tiny_design(estimator="plain"):
    return Design(
        name="tiny",
        alpha=1.8,
        omega_true=np.array([[1.0, 0.4], [0.4, 1.0]]),
        n=150,
        replications=2,
        estimator=estimator,
    )


def test_f1_score_examples():
    coupled = np.array([[1.0, 0.3, 0.4], [0.3, 1.0, 0.0], [0.4, 0.0, 1.0]])
    assert f1_score(coupled, coupled) == 1.0
    shifted = np.array([[1.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 1.0]])
    assert f1_score(coupled, shifted) == pytest.approx(0.5, abs=1e-15)
    assert f1_score(coupled, np.eye(3)) == 0.0
    assert f1_score(np.eye(3), np.eye(3)) == 1.0
    with pytest.raises(DomainError):
        f1_score(np.eye(3), np.eye(2))


def test_f1_score_threshold_option():
    truth = np.array([[1.0, 0.5], [0.5, 1.0]])
    dense = np.array([[1.0, 0.01], [0.01, 1.0]])
    assert f1_score(truth, dense) == 1.0
    # with a threshold the tiny entry no longer counts as support
    assert f1_score(truth, dense, tol=0.1) == 0.0


def test_kl_divergence_examples():
    om = np.array([[1.2, 0.3], [0.3, 0.9]])
    assert kl_divergence(om, om) == pytest.approx(0.0, abs=1e-12)
    expected = 0.5 * (4.0 - 2.0 - 2.0 * np.log(2.0))
    assert kl_divergence(np.eye(2), 2.0 * np.eye(2)) == pytest.approx(
        expected, abs=1e-12
    )
    rng = np.random.default_rng(6)
    for _ in range(100):
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        assert kl_divergence(a @ a.T + 0.1 * np.eye(3),
                             b @ b.T + 0.1 * np.eye(3)) >= 0.0
    with pytest.raises(NotPositiveDefiniteError):
        kl_divergence(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_frobenius_error_examples():
    om = np.array([[1.2, 0.3], [0.3, 0.9]])
    assert frobenius_error(om, om) == 0.0
    for m in (2, 5):
        assert frobenius_error(np.eye(m), 2.0 * np.eye(m)) == pytest.approx(
            np.sqrt(m), rel=1e-15
        )
    assert frobenius_error(
        np.zeros((2, 2)), np.array([[0.0, 3.0], [4.0, 0.0]])
    ) == 5.0
    with pytest.raises(DomainError):
        frobenius_error(np.eye(3), np.eye(2))


def test_design_registry_contents():
    assert design_names() == ["dim12", "dim2", "dim27", "dim5"]
    d2 = get_design("dim2")
    np.testing.assert_array_equal(
        d2.omega_true, np.array([[0.5, 0.9], [0.9, 2.0]])
    )
    assert d2.alpha == 1.7 and d2.estimator == "plain"
    d5 = get_design("dim5")
    assert d5.omega_true[3, 4] == 2.55
    assert d5.omega_true[0, 3] == 0.0
    np.linalg.cholesky(d5.omega_true)
    d12 = get_design("dim12")
    assert d12.m == 12 and d12.alpha == 2.0 and d12.estimator == "sparse"
    iu = np.triu_indices(12, k=1)
    assert int(np.sum(np.abs(d12.omega_true[iu]) > 0)) == 18
    assert d12.omega_true[0, 1] == 0.6
    assert d12.omega_true[0, 4] == 0.0
    np.linalg.cholesky(d12.omega_true)
    d27 = get_design("dim27")
    assert d27.m == 27 and d27.n == 800
    assert np.all(d27.omega_true[12:, :12] == 0.0)
    assert d27.omega_true[12, 13] == 0.4
    assert d27.omega_true[12, 14] == 0.0
    np.linalg.cholesky(d27.omega_true)


def test_get_design_overrides_and_validation():
    d = get_design("dim2", alpha=1.9, n=2000, replications=10)
    assert (d.alpha, d.n, d.replications) == (1.9, 2000, 10)
    with pytest.raises(DomainError):
        get_design("dim3")
    with pytest.raises(DomainError):
        get_design("dim2", n=50)
    with pytest.raises(DomainError):
        get_design("dim2", replications=1)
    with pytest.raises(DomainError):
        get_design("dim2", estimator="mle")
    with pytest.raises(DomainError):
        Design(name="bad", alpha=1.8, omega_true=np.zeros((2, 3)),
               n=200, replications=5)


def test_design_round_trip():
    d = get_design("dim5", replications=7)
    back = Design.from_dict(d.to_dict())
    assert back.name == d.name
    np.testing.assert_array_equal(back.omega_true, d.omega_true)
    np.testing.assert_array_equal(back.xi, d.xi)
    assert (back.alpha, back.n, back.replications, back.estimator) == (
        d.alpha, d.n, d.replications, d.estimator
    )


@pytest.fixture(scope="module")
def plain_summary():
    return run_experiment(tiny_design(), TINY_CFG, eta_mc_size=100_000)


def test_plain_experiment_is_deterministic(plain_summary):
    again = run_experiment(tiny_design(), TINY_CFG, eta_mc_size=100_000)
    assert again.to_dict() == plain_summary.to_dict()


def test_plain_experiment_shapes(plain_summary):
    s = plain_summary
    assert s.failures == 0
    assert len(s.records) == 2
    assert s.parameter_labels == (
        "alpha", "xi_1", "xi_2", "omega_1_1", "omega_2_1", "omega_2_2"
    )
    assert s.true_values[0] == 1.8
    assert s.bias.shape == (6,) and s.ssd.shape == (6,) and s.ecp.shape == (6,)
    assert np.all(s.ssd >= 0.0)
    assert np.all((s.ecp >= 0.0) & (s.ecp <= 1.0))
    assert len(s.f1) == 2 and all(v == 1.0 for v in s.f1)
    assert all(np.isfinite(v) for v in s.frobenius)
    assert all(v >= 0.0 for v in s.kl)
    table = coverage_table(s)
    lines = table.splitlines()
    assert lines[0] == "Par.,True,BIAS,SSD,ECP"
    assert len(lines) == 7
    assert lines[1].startswith("alpha,1.8,")


def test_sparse_experiment_records():
    design = tiny_design("sparse")
    s = run_experiment(
        design, TINY_CFG, penalty=ScadParams(lambda_=0.05),
        eta_mc_size=100_000,
    )
    assert s.failures == 0
    for rec in s.records:
        assert rec["lambda"] == 0.05
        assert "active_set" in rec
        se = np.array(rec["se"], dtype=float)
        # the off-diagonal slot has a standard error exactly when kept
        if rec["active_set"]:
            assert np.isfinite(se[4])
        else:
            assert np.isnan(se[4])
    table = metric_table({"sparse": s})
    lines = table.splitlines()
    assert lines[0] == "method,Frobenius,F1,KL"
    assert lines[1].startswith("sparse,")


def test_failed_replications_are_isolated(monkeypatch):
    import stablequant.metrics as metrics

    real = metrics.estimate
    calls = {"n": 0}

    def flaky(data, config, **kwargs):
        calls["n"] += 1
        if calls["n"] == 2:
            raise DomainError("synthetic failure")
        return real(data, config, **kwargs)

    monkeypatch.setattr(metrics, "estimate", flaky)
    design = Design(
        name="tiny", alpha=1.8, omega_true=np.array([[1.0, 0.4], [0.4, 1.0]]),
        n=150, replications=3,
    )
    s = run_experiment(design, TINY_CFG, eta_mc_size=100_000)
    assert s.failures == 1
    assert "error" in s.records[1]
    assert "synthetic failure" in s.records[1]["error"]
    assert len(s.f1) == 2
    assert np.all(np.isfinite(s.bias))


def test_summary_validates_ranges():
    design = tiny_design()
    base = dict(
        design=design,
        parameter_labels=("alpha",),
        true_values=np.array([1.8]),
        bias=np.array([0.0]),
        ssd=np.array([0.1]),
        ecp=np.array([0.95]),
        frobenius=(0.1, 0.2),
        f1=(1.0, 1.0),
        kl=(0.01, 0.02),
        failures=0,
        records=(),
    )
    s = ReplicationSummary(**base)
    assert s.metric_means()["f1"] == 1.0
    assert s.metric_sds()["frobenius"] == pytest.approx(
        np.std([0.1, 0.2], ddof=1)
    )
    with pytest.raises(DomainError):
        ReplicationSummary(**{**base, "ecp": np.array([1.5])})
    with pytest.raises(DomainError):
        ReplicationSummary(**{**base, "ssd": np.array([-0.1])})


def test_tables_format_exactly():
    design = tiny_design()
    s = ReplicationSummary(
        design=design,
        parameter_labels=("alpha", "xi_1"),
        true_values=np.array([1.8, 0.0]),
        bias=np.array([-0.25, 0.5]),
        ssd=np.array([0.5, 0.25]),
        ecp=np.array([0.75, np.nan]),
        frobenius=(1.0, 3.0),
        f1=(0.5, 1.0),
        kl=(0.25, 0.75),
        failures=0,
        records=(),
    )
    assert coverage_table(s) == (
        "Par.,True,BIAS,SSD,ECP\n"
        "alpha,1.8,-0.25,0.5,0.75\n"
        "xi_1,0,0.5,0.25,nan\n"
    )
    assert metric_table({"plain": s}) == (
        "method,Frobenius,F1,KL\nplain,2,0.75,0.5\n"
    )
