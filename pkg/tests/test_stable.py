"""Sampling, characteristic function, and quantile initialization checks.

Oracle values are frozen literals: the subordinator is validated against the
Levy closed-form median and its Laplace transform, the elliptical sampler
against its own characteristic function and an independent Gaussian route at
the boundary index.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcinv

import stablequant as sq
from stablequant.errors import (
    DegenerateInputError,
    DomainError,
    NotPositiveDefiniteError,
)

DESIGN2 = np.array([[0.5, 0.9], [0.9, 2.0]])


# ---------------------------------------------------------------- subordinator


def test_positive_stable_degenerate_unit():
    out = sq.sample_positive_stable(1.0, 5, sq.RngStream(1, 0))
    assert np.array_equal(out, np.ones(5))


def test_positive_stable_levy_median():
    # index 1/2 is Levy(0, 1/2) under the exp(-s**(1/2)) Laplace convention;
    # its median is c / (2 * erfcinv(1/2)**2)
    closed_form = 0.5 / (2.0 * erfcinv(0.5) ** 2)
    assert abs(closed_form - 1.099054669158866) < 1e-12
    draws = sq.sample_positive_stable(0.5, 10**6, sq.RngStream(42, 0))
    assert np.all(draws >= 0.0)
    med = np.median(draws)
    assert abs(med - closed_form) / closed_form < 0.01


@pytest.mark.parametrize("alpha_half", [0.4, 0.65, 0.85])
def test_positive_stable_laplace_identity(alpha_half):
    # E exp(-A*zeta) must equal exp(-A**alpha_half) for every A > 0
    draws = sq.sample_positive_stable(alpha_half, 10**6, sq.RngStream(3, 1))
    for a in (0.5, 1.0, 2.0):
        vals = np.exp(-a * draws)
        se = vals.std() / np.sqrt(vals.size)
        assert abs(vals.mean() - np.exp(-(a**alpha_half))) < 3.0 * se


@pytest.mark.parametrize("bad", [0.0, -0.3, 1.2])
def test_positive_stable_domain(bad):
    with pytest.raises(DomainError):
        sq.sample_positive_stable(bad, 10, sq.RngStream(0, 0))


def test_positive_stable_needs_draws():
    with pytest.raises(DomainError):
        sq.sample_positive_stable(0.8, 0, sq.RngStream(0, 0))


# ------------------------------------------------------------------- sampling


def test_sample_esd_gaussian_covariance():
    p = sq.EsdParams(2.0, np.zeros(2), np.eye(2))
    y = sq.sample_esd(p, 10**5, sq.RngStream(5, 0))
    cov = np.cov(y.T)
    assert np.linalg.norm(cov - np.eye(2)) < 0.05 * np.linalg.norm(np.eye(2))


def test_sample_esd_marginal_closure():
    # component 1 of the 2-d law must match a univariate run at its own scale
    p2 = sq.EsdParams(1.7, np.zeros(2), DESIGN2)
    p1 = sq.EsdParams(1.7, np.zeros(1), np.array([[0.5]]))
    y2 = sq.sample_esd(p2, 2 * 10**5, sq.RngStream(11, 0))[:, 0]
    y1 = sq.sample_esd(p1, 2 * 10**5, sq.RngStream(11, 1))[:, 0]
    for tau in (0.25, 0.75):
        assert abs(np.quantile(y2, tau) - np.quantile(y1, tau)) < 0.02


def test_sample_esd_matches_char_fn():
    p = sq.EsdParams(1.9, np.array([0.5, -0.25]), DESIGN2)
    y = sq.sample_esd(p, 10**6, sq.RngStream(17, 0))
    t = np.array([0.3, -0.2])
    phase = y @ t
    re, im = np.cos(phase), np.sin(phase)
    cf = sq.char_fn(p, t)
    assert abs(re.mean() - cf.real) < 3.0 * re.std() / np.sqrt(re.size)
    assert abs(im.mean() - cf.imag) < 3.0 * im.std() / np.sqrt(im.size)


def test_sample_esd_not_positive_definite():
    p = sq.EsdParams(1.5, np.zeros(2), np.eye(2))
    object.__setattr__(p, "omega", np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        sq.sample_esd(p, 10, sq.RngStream(0, 0))


def test_determinism_and_stream_separation():
    p = sq.EsdParams(1.6, np.zeros(2), DESIGN2)
    a = sq.sample_esd(p, 500, sq.RngStream(9, 3))
    b = sq.sample_esd(p, 500, sq.RngStream(9, 3))
    c = sq.sample_esd(p, 500, sq.RngStream(9, 4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    s1 = sq.sample_positive_stable(0.7, 200, sq.RngStream(9, 3))
    s2 = sq.sample_positive_stable(0.7, 200, sq.RngStream(9, 3))
    assert np.array_equal(s1, s2)


def test_stream_independence_gaussian():
    p = sq.EsdParams(2.0, np.zeros(1), np.eye(1))
    a = sq.sample_esd(p, 10**5, sq.RngStream(21, 0))[:, 0]
    b = sq.sample_esd(p, 10**5, sq.RngStream(21, 1))[:, 0]
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


def _mean_pair_dist(a, b, block=2500):
    """Mean Euclidean distance over all cross pairs, blocked for memory."""
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    total = 0.0
    for i in range(0, a.shape[0], block):
        sq_d = aa[i:i + block, None] + bb[None, :] - 2.0 * (a[i:i + block] @ b.T)
        np.maximum(sq_d, 0.0, out=sq_d)
        total += np.sqrt(sq_d).sum()
    return total / (a.shape[0] * b.shape[0])


def _energy_stat(x, y):
    n1, n2 = x.shape[0], y.shape[0]
    e = (2.0 * _mean_pair_dist(x, y) - _mean_pair_dist(x, x)
         - _mean_pair_dist(y, y))
    return n1 * n2 / (n1 + n2) * e


def test_alpha2_reduction_energy_distance():
    # boundary index must agree in law with a Gaussian of the same scale
    # matrix; two-sample energy test with a permutation critical value
    n = 10**4
    p = sq.EsdParams(2.0, np.array([1.0, -2.0]), DESIGN2)
    x = sq.sample_esd(p, n, sq.RngStream(23, 0))
    g = sq.RngStream(23, 1).generator()
    y = p.xi + g.standard_normal((n, 2)) @ np.linalg.cholesky(p.omega).T
    observed = _energy_stat(x, y)
    pool = np.vstack([x, y])
    perm_rng = np.random.Generator(np.random.Philox(key=[23, 2]))
    exceed = 0
    for _ in range(19):
        idx = perm_rng.permutation(2 * n)
        stat = _energy_stat(pool[idx[:n]], pool[idx[n:]])
        if stat >= observed:
            exceed += 1
    # observed must not be extreme among permutations (level 0.05)
    assert exceed >= 1


def test_closure_under_projection():
    u = np.array([0.6, 0.8])
    xi = np.array([0.3, -0.2])
    p2 = sq.EsdParams(1.5, xi, DESIGN2)
    w = float(u @ DESIGN2 @ u)
    p1 = sq.EsdParams(1.5, np.array([float(u @ xi)]), np.array([[w]]))
    proj = sq.sample_esd(p2, 2 * 10**5, sq.RngStream(31, 0)) @ u
    uni = sq.sample_esd(p1, 2 * 10**5, sq.RngStream(31, 1))[:, 0]
    for tau in (0.25, 0.5, 0.75):
        assert abs(np.quantile(proj, tau) - np.quantile(uni, tau)) < 0.03


# -------------------------------------------------------- char_fn pointwise


def test_char_fn_origin():
    p = sq.EsdParams(1.3, np.array([2.0, -1.0]), DESIGN2)
    assert sq.char_fn(p, np.zeros(2)) == 1.0 + 0.0j


def test_char_fn_gaussian_value():
    p = sq.EsdParams(2.0, np.zeros(2), np.eye(2))
    val = sq.char_fn(p, np.array([1.0, 0.0]))
    assert abs(val - 0.6065306597126334) < 1e-12


def test_char_fn_modulus_and_phase():
    p = sq.EsdParams(1.7, np.array([1.0, 0.0]), np.eye(2))
    val = sq.char_fn(p, np.array([1.0, 0.0]))
    assert abs(abs(val) - 0.574195851569996) < 1e-12
    assert abs(np.angle(val) - 1.0) < 1e-12


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(0.7, 2.0),
    t1=st.floats(-3.0, 3.0),
    t2=st.floats(-3.0, 3.0),
    x1=st.floats(-2.0, 2.0),
    x2=st.floats(-2.0, 2.0),
)
def test_char_fn_conjugate_symmetry(alpha, t1, t2, x1, x2):
    p = sq.EsdParams(alpha, np.array([x1, x2]), DESIGN2)
    t = np.array([t1, t2])
    fwd = sq.char_fn(p, t)
    rev = sq.char_fn(p, -t)
    assert abs(fwd - np.conj(rev)) < 1e-14
    assert abs(fwd) <= 1.0 + 1e-14


# -------------------------------------------------------------- initializers


def test_mcculloch_normal():
    x = sq.RngStream(41, 0).generator().standard_normal(10**5)
    est = sq.mcculloch_init(x)
    assert 1.9 <= est.alpha <= 2.0
    assert abs(est.location) <= 0.05
    # N(0, 1) is the alpha=2 stable law with scale 1/sqrt(2)
    assert abs(est.scale - 1.0 / np.sqrt(2.0)) <= 0.05


def test_mcculloch_cauchy():
    x = sq.RngStream(43, 0).generator().standard_cauchy(10**5)
    est = sq.mcculloch_init(x)
    assert 0.9 <= est.alpha <= 1.1
    assert abs(est.scale - 1.0) <= 0.1


def test_mcculloch_skewed_recovery():
    from scipy.stats import levy_stable

    levy_stable.parameterization = "S0"
    x = levy_stable.rvs(1.5, 0.5, size=2 * 10**5,
                        random_state=np.random.default_rng(7))
    est = sq.mcculloch_init(x)
    assert abs(est.alpha - 1.5) < 0.05
    assert abs(est.beta - 0.5) < 0.15
    assert abs(est.scale - 1.0) < 0.05
    assert abs(est.location) < 0.05


def test_mcculloch_translation_equivariance():
    x = sq.RngStream(47, 0).generator().standard_cauchy(10**5)
    base = sq.mcculloch_init(x)
    shifted = sq.mcculloch_init(x + 3.0)
    assert abs(shifted.alpha - base.alpha) < 1e-10
    assert abs(shifted.beta - base.beta) < 1e-8
    assert abs((shifted.location - base.location) - 3.0) < 1e-8


def test_mcculloch_degenerate():
    with pytest.raises(DegenerateInputError):
        sq.mcculloch_init(np.ones(500))


def test_mcculloch_too_short():
    with pytest.raises(DomainError):
        sq.mcculloch_init(np.arange(50.0))


def test_init_esd_independent_components():
    g = sq.RngStream(53, 0).generator()
    est = sq.init_esd(g.standard_normal((10**4, 3)))
    corr = est.omega / np.sqrt(np.outer(np.diag(est.omega), np.diag(est.omega)))
    off = corr[~np.eye(3, dtype=bool)]
    assert np.all(np.abs(off) <= 0.1)
    assert 1.9 <= est.alpha <= 2.0


def test_init_esd_design_correlation():
    p = sq.EsdParams(1.7, np.zeros(2), DESIGN2)
    y = sq.sample_esd(p, 5000, sq.RngStream(59, 0))
    est = sq.init_esd(y)
    rho = est.omega[0, 1] / np.sqrt(est.omega[0, 0] * est.omega[1, 1])
    assert abs(rho - 0.9) < 0.15
    assert abs(est.alpha - 1.7) < 0.2


def test_init_esd_duplicated_column_floored():
    g = sq.RngStream(61, 0).generator()
    col = g.standard_normal(2000)
    est = sq.init_esd(np.column_stack([col, col]))
    eigvals = np.linalg.eigvalsh(est.omega)
    assert eigvals[0] >= 0.999e-8
    rho = est.omega[0, 1] / np.sqrt(est.omega[0, 0] * est.omega[1, 1])
    assert rho > 0.98


def test_init_esd_column_error_attribution():
    g = sq.RngStream(67, 0).generator()
    data = np.column_stack([g.standard_normal(500), np.ones(500)])
    with pytest.raises(DegenerateInputError, match="column 1"):
        sq.init_esd(data)


# ------------------------------------------------------------------ validation


def test_params_validation():
    with pytest.raises(DomainError):
        sq.StableParams(2.5, 0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        sq.StableParams(1.5, -1.5, 1.0, 0.0)
    with pytest.raises(DomainError):
        sq.StableParams(1.5, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        sq.EsdParams(0.0, np.zeros(2), np.eye(2))
    with pytest.raises(DomainError):
        sq.EsdParams(1.5, np.zeros(2), np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(DomainError):
        sq.EsdParams(1.5, np.zeros(3), np.eye(2))
    with pytest.raises(NotPositiveDefiniteError):
        sq.EsdParams(1.5, np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_esd_params_json_round_trip():
    p = sq.EsdParams(1.8, np.array([0.5, -1.0]), DESIGN2)
    q = sq.EsdParams.from_dict(p.to_dict())
    assert q.alpha == p.alpha
    assert np.array_equal(q.xi, p.xi)
    assert np.array_equal(q.omega, p.omega)
