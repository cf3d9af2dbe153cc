"""Quantile machinery: interpolation rule, statistic vector, eta, and omega."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import stablequant as sq
from stablequant.directions import build_direction_set
from stablequant.errors import DegenerateInputError, DomainError
from stablequant.quantiles import (
    FIVE_LEVELS,
    EtaMatrix,
    PhiVector,
    TauGrid,
    empirical_quantile,
    eta_matrix,
    omega_phi,
    phi_jacobian,
    phi_stats,
    projected_quantiles,
    projectional_quantile,
    sparsity_at,
)
from stablequant.quantiles import _phi_from_five

DESIGN2 = np.array([[0.5, 0.9], [0.9, 2.0]])
FIVE = TauGrid(np.array(FIVE_LEVELS))


# ------------------------------------------------------------------ quantiles


def test_empirical_quantile_examples():
    assert empirical_quantile(np.arange(1.0, 101.0), 0.5) == 50.5
    assert empirical_quantile(np.array([7.0]), 0.3) == 7.0
    assert empirical_quantile(np.array([1.0, 2.0, 3.0, 4.0]), 0.25) == 1.75


def test_empirical_quantile_errors():
    with pytest.raises(DomainError):
        empirical_quantile(np.array([]), 0.5)
    with pytest.raises(DomainError):
        empirical_quantile(np.ones(3), 0.0)
    with pytest.raises(DomainError):
        empirical_quantile(np.ones(3), 1.0)


@settings(max_examples=100, deadline=None)
@given(
    x=hnp.arrays(
        np.float64,
        st.integers(1, 40),
        elements=st.floats(-1e6, 1e6, allow_nan=False),
    ),
    tau=st.floats(0.01, 0.99),
)
def test_empirical_quantile_matches_numpy(x, tau):
    ours = empirical_quantile(x, tau)
    ref = float(np.quantile(x, tau))
    assert abs(ours - ref) <= 1e-9 * max(1.0, abs(ref))


def test_projectional_requires_unit_direction():
    y = np.zeros((10, 2))
    with pytest.raises(DomainError):
        projectional_quantile(y, np.array([1.0, 1.0]), 0.5)


def test_projectional_coordinate_equals_marginal():
    g = sq.RngStream(71, 0).generator()
    y = g.standard_normal((500, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        assert projectional_quantile(y, e, 0.3) == empirical_quantile(y[:, k], 0.3)


def test_projectional_median_of_symmetric_law():
    xi = np.array([1.0, -2.0])
    p = sq.EsdParams(2.0, xi, DESIGN2)
    y = sq.sample_esd(p, 10**5, sq.RngStream(73, 0))
    u = np.array([0.6, 0.8])
    assert abs(projectional_quantile(y, u, 0.5) - float(u @ xi)) < 0.05


def test_projectional_matches_check_loss_grid():
    # brute-force oracle: the returned quantile must sit at the minimum of
    # the empirical check loss, up to the grid step and interpolation
    g = sq.RngStream(79, 0).generator()
    y = g.standard_normal((200, 2))
    u = np.array([0.8, -0.6])
    # tau = k/(n-1) makes the interpolated quantile land exactly on the order
    # statistic z[k], which is then the unique check-loss minimizer; a generic
    # tau with integer n*tau leaves a whole interval of minimizers instead.
    tau = 70.0 / 199.0
    scores = y @ u
    returned = projectional_quantile(y, u, tau)
    qs = np.arange(scores.min(), scores.max() + 1e-4, 1e-4)
    r = scores[None, :] - qs[:, None]
    loss = np.sum(r * (tau - (r < 0.0)), axis=1)
    assert abs(qs[np.argmin(loss)] - returned) <= 1e-3


# ------------------------------------------------------------------------ phi


def _single_direction_set():
    return build_direction_set(sq.EsdParams(2.0, np.zeros(1), np.eye(1)))


def test_phi_stats_normal_oracle():
    x = sq.RngStream(83, 0).generator().standard_normal((10**6, 1))
    phi = phi_stats(x, _single_direction_set(), FIVE)
    kappa, med, iqr = phi.values
    assert abs(kappa - 2.4387) < 0.01 * 2.4387
    assert abs(med) < 0.01
    assert abs(iqr - 1.3490) < 0.01 * 1.3490


def test_phi_layout_and_descriptors():
    ds = build_direction_set(sq.EsdParams(1.7, np.zeros(2), DESIGN2))
    y = sq.sample_esd(sq.EsdParams(1.7, np.zeros(2), DESIGN2), 2000,
                      sq.RngStream(89, 0))
    phi = phi_stats(y, ds, FIVE)
    assert phi.values.size == 8
    assert phi.descriptors == (
        (0, "kurtosis"), (0, "median"), (0, "iqr"),
        (1, "kurtosis"), (1, "median"), (1, "iqr"),
        (2, "median"), (2, "iqr"),
    )


def test_phi_equivariance():
    ds = build_direction_set(sq.EsdParams(1.7, np.zeros(2), DESIGN2))
    y = sq.sample_esd(sq.EsdParams(1.7, np.zeros(2), DESIGN2), 5000,
                      sq.RngStream(97, 0))
    base = phi_stats(y, ds, FIVE).values
    c = 2.75
    scaled = phi_stats(c * y, ds, FIVE).values
    shift = np.array([0.8, -1.2])
    moved = phi_stats(y + shift, ds, FIVE).values
    for row, (k, kind) in enumerate(phi_stats(y, ds, FIVE).descriptors):
        if kind == "kurtosis":
            assert abs(scaled[row] - base[row]) <= 1e-12 * abs(base[row])
            assert abs(moved[row] - base[row]) <= 1e-12 * abs(base[row])
        elif kind == "iqr":
            assert abs(scaled[row] - c * base[row]) <= 1e-12 * abs(c * base[row])
            assert abs(moved[row] - base[row]) <= 1e-10 * max(1.0, abs(base[row]))
        else:
            assert abs(scaled[row] - c * base[row]) <= 1e-10 * max(1.0, abs(base[row]))
            offset = float(ds.vectors[k] @ shift)
            assert abs(moved[row] - (base[row] + offset)) <= 1e-10


def test_phi_requires_five_levels():
    ds = _single_direction_set()
    with pytest.raises(DomainError):
        phi_stats(np.random.default_rng(0).standard_normal((200, 1)), ds,
                  TauGrid(np.array([0.25, 0.5, 0.75])))


def test_phi_degenerate_direction():
    ds = _single_direction_set()
    with pytest.raises(DegenerateInputError):
        phi_stats(np.ones((200, 1)), ds, FIVE)


def test_phi_jacobian_matches_finite_differences():
    ds = build_direction_set(sq.EsdParams(1.7, np.zeros(2), DESIGN2))
    y = sq.sample_esd(sq.EsdParams(1.7, np.zeros(2), DESIGN2), 4000,
                      sq.RngStream(101, 0))
    q5 = projected_quantiles(y, ds, FIVE)
    jac = phi_jacobian(q5, ds, FIVE)
    step = 1e-5
    flags = ds.kurtosis_flags
    for k in range(ds.count):
        for j in range(5):
            hi = q5.copy()
            lo = q5.copy()
            hi[k, j] += step
            lo[k, j] -= step
            fd = (_phi_from_five(hi, flags) - _phi_from_five(lo, flags)) / (2 * step)
            col = jac[:, k * 5 + j]
            scale = np.maximum(np.abs(fd), 1.0)
            assert np.all(np.abs(col - fd) <= 1e-4 * scale)


# ------------------------------------------------------------------- sparsity


def test_sparsity_normal():
    x = sq.RngStream(103, 0).generator().standard_normal(10**6)
    est = sparsity_at(x, 0.5)
    assert abs(est - 0.3989) < 0.03 * 0.3989


def test_sparsity_uniform():
    x = sq.RngStream(107, 0).generator().random(10**6)
    assert abs(sparsity_at(x, 0.3) - 1.0) < 0.03


def test_sparsity_exponential():
    x = sq.RngStream(109, 0).generator().standard_exponential(10**6)
    assert abs(sparsity_at(x, 0.5) - 0.5) < 0.03 * 0.5


def test_sparsity_errors():
    with pytest.raises(DomainError):
        sparsity_at(np.ones(20), 0.5)
    with pytest.raises(DegenerateInputError):
        sparsity_at(np.ones(1000), 0.5)


# ------------------------------------------------------------------------ eta


def test_eta_single_direction_median_diagonal():
    model = sq.EsdParams(2.0, np.zeros(1), np.eye(1))
    ds = _single_direction_set()
    eta = eta_matrix(model, ds, TauGrid(np.array([0.5])), 2 * 10**5,
                     sq.RngStream(113, 0))
    assert eta.entries.shape == (1, 1)
    assert abs(eta.entries[0, 0] - np.pi / 2.0) < 0.02 * np.pi / 2.0


def test_eta_same_direction_cross_level():
    model = sq.EsdParams(2.0, np.zeros(1), np.eye(1))
    ds = _single_direction_set()
    eta = eta_matrix(model, ds, TauGrid(np.array([0.25, 0.75])), 2 * 10**5,
                     sq.RngStream(127, 0))
    target = (0.25 - 0.25 * 0.75) / 0.3178**2
    assert abs(eta.entries[0, 1] - target) < 0.03 * target
    assert np.array_equal(eta.entries, eta.entries.T)


def test_eta_orthogonal_directions_independent_model():
    model = sq.EsdParams(2.0, np.zeros(2), np.eye(2))
    ds = build_direction_set(model)
    eta = eta_matrix(model, ds, TauGrid(np.array([0.5])), 2 * 10**5,
                     sq.RngStream(131, 0))
    # directions e_1 and e_2 at the same level: joint CDF tau**2 cancels
    assert abs(eta.entries[0, 1]) < 0.05


def test_eta_positive_dependence_raises_entry():
    omega = np.array([[1.0, 0.5], [0.5, 1.0]])
    model = sq.EsdParams(2.0, np.zeros(2), omega)
    ds = build_direction_set(model)
    eta = eta_matrix(model, ds, TauGrid(np.array([0.5])), 2 * 10**5,
                     sq.RngStream(137, 0))
    assert eta.entries[0, 1] > 0.1


def test_eta_labels_and_diagonal_positivity():
    model = sq.EsdParams(1.6, np.zeros(2), DESIGN2)
    ds = build_direction_set(model)
    taus = TauGrid(np.array([0.25, 0.5, 0.75]))
    eta = eta_matrix(model, ds, taus, 10**5, sq.RngStream(139, 0))
    assert eta.entries.shape == (9, 9)
    assert eta.labels[0] == (0, 0.25)
    assert eta.labels[-1] == (2, 0.75)
    assert np.all(np.diag(eta.entries) > 0.0)


def test_eta_mc_size_validated():
    model = sq.EsdParams(2.0, np.zeros(1), np.eye(1))
    with pytest.raises(DomainError):
        eta_matrix(model, _single_direction_set(), TauGrid(np.array([0.5])),
                   5 * 10**4, sq.RngStream(0, 0))


# ------------------------------------------------------------------ omega_phi


def _psd(rng, k):
    a = rng.standard_normal((k, k))
    return a @ a.T / k


def test_omega_phi_identity_jacobian():
    rng = np.random.default_rng(5)
    ent = _psd(rng, 4)
    eta = EtaMatrix(entries=ent, labels=tuple((0, t) for t in (0.1, 0.2, 0.3, 0.4)))
    out = omega_phi(eta, np.eye(4))
    assert np.allclose(out, ent, atol=1e-13)


def test_omega_phi_iqr_hand_expansion():
    rng = np.random.default_rng(6)
    ent = _psd(rng, 2)
    eta = EtaMatrix(entries=ent, labels=((0, 0.25), (0, 0.75)))
    out = omega_phi(eta, np.array([[-1.0, 1.0]]))
    expect = ent[0, 0] + ent[1, 1] - 2.0 * ent[0, 1]
    assert abs(out[0, 0] - expect) < 1e-13


def test_omega_phi_dimension_mismatch():
    eta = EtaMatrix(entries=np.eye(3), labels=((0, 0.1), (0, 0.2), (0, 0.3)))
    with pytest.raises(DomainError):
        omega_phi(eta, np.eye(4))


def test_omega_phi_clips_negative_eigenvalues():
    ent = np.array([[1.0, 0.0], [0.0, -1e-12]])
    eta = EtaMatrix(entries=ent, labels=((0, 0.25), (0, 0.75)))
    out = omega_phi(eta, np.eye(2))
    assert np.linalg.eigvalsh(out)[0] >= -1e-18


# -------------------------------------------------------------------- types


def test_tau_grid_validation():
    with pytest.raises(DomainError):
        TauGrid(np.array([]))
    with pytest.raises(DomainError):
        TauGrid(np.array([0.0, 0.5]))
    with pytest.raises(DomainError):
        TauGrid(np.array([0.5, 0.5]))
    with pytest.raises(DomainError):
        TauGrid(np.array([0.7, 0.3]))


def test_phi_vector_validation():
    with pytest.raises(DomainError):
        PhiVector(values=np.zeros(3), descriptors=((0, "median"),))


def test_eta_matrix_validation():
    with pytest.raises(DomainError):
        EtaMatrix(entries=np.zeros((2, 3)), labels=((0, 0.1), (0, 0.2)))
    with pytest.raises(DomainError):
        EtaMatrix(entries=np.eye(2), labels=((0, 0.1),))
