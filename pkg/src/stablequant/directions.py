"""Optimal projection directions for quantile-based fitting.

The statistic vector projects data onto a fixed set of unit directions: the
canonical axes e_1..e_m (which carry the tail index, locations, and scale
diagonal through closure under marginalisation) plus one optimal direction
per coordinate pair, chosen to maximise the projected scale u'Omega u on the
unit circle of that pair.  The set is built once from an initial estimate and
frozen, so the downstream objective stays continuous in the parameters.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DomainError, NumericError
from .stable import EsdParams

__all__ = ["DirectionSet", "optimal_pair_direction", "build_direction_set"]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclasses.dataclass(frozen=True)
class DirectionSet:
    """Frozen set of unit directions with parameter bookkeeping.

    vectors has one unit row per direction: first the m canonical axes, then
    one embedded pair direction per unordered pair (i, j), i < j, in
    lexicographic order.  informs[k] lists the parameter tags direction k
    carries information about.  kurtosis_flags marks directions whose
    kurtosis statistic enters the statistic vector (the canonical ones).
    """

    vectors: np.ndarray
    informs: tuple
    kurtosis_flags: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(
            self, "kurtosis_flags", np.asarray(self.kurtosis_flags, dtype=bool)
        )
        norms = np.linalg.norm(v, axis=1)
        if not np.all(np.abs(norms - 1.0) <= 1e-10):
            raise DomainError("all directions must have unit norm")
        if len(self.informs) != v.shape[0] or self.kurtosis_flags.size != v.shape[0]:
            raise DomainError("per-direction metadata length mismatch")

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_stats(self) -> int:
        """Length of the statistic vector this set generates."""
        return int(3 * self.kurtosis_flags.sum() + 2 * (~self.kurtosis_flags).sum())

    def pair_support(self):
        """Active-coordinate view: each direction touches at most two axes.

        Returns (idx_i, idx_j, w_i, w_j) arrays such that the projected score
        of direction k is w_i[k] * y[:, idx_i[k]] + w_j[k] * y[:, idx_j[k]].
        Canonical directions repeat their axis with zero second weight.
        """
        d = self.count
        idx_i = np.zeros(d, dtype=np.int64)
        idx_j = np.zeros(d, dtype=np.int64)
        w_i = np.zeros(d)
        w_j = np.zeros(d)
        for k in range(d):
            active = np.flatnonzero(self.vectors[k])
            if active.size == 1:
                idx_i[k] = idx_j[k] = active[0]
                w_i[k] = self.vectors[k, active[0]]
            elif active.size == 2:
                idx_i[k], idx_j[k] = active
                w_i[k] = self.vectors[k, active[0]]
                w_j[k] = self.vectors[k, active[1]]
            else:
                raise DomainError("directions must touch at most two coordinates")
        return idx_i, idx_j, w_i, w_j


def _closed_form_direction(a, d, b) -> np.ndarray:
    # leading eigenvector of [[a, b], [b, d]]: u2/u1 solves the quadratic
    # from the first-order conditions
    ratio = ((d - a) + np.sqrt((a - d) ** 2 + 4.0 * b * b)) / (2.0 * b)
    u = np.array([1.0, ratio])
    return u / np.linalg.norm(u)


def optimal_pair_direction(omega_ii, omega_jj, omega_ij) -> np.ndarray:
    """Unit 2-vector maximising u'Omega u for a positive definite 2x2 block.

    The maximiser is found by golden-section search on the angle (tolerance
    1e-10) and, whenever |omega_ij| > 1e-8, cross-checked against the closed
    form; disagreement raises rather than silently trusting either route.
    A zero off-diagonal has no covariance information: the canonical
    direction of the larger diagonal is returned (tie goes to the first).

    Parameters
    ----------
    omega_ii, omega_jj : float
        Diagonal entries, both positive.
    omega_ij : float
        Off-diagonal entry; the block must be positive definite.

    Returns
    -------
    ndarray
        Unit vector of length 2 with positive first coordinate (or positive
        second coordinate when the first vanishes).
    """
    a, d, b = float(omega_ii), float(omega_jj), float(omega_ij)
    if a <= 0.0 or d <= 0.0 or a * d - b * b <= 0.0:
        raise DomainError("pair block is not positive definite")
    if b == 0.0:
        return np.array([0.0, 1.0]) if d > a else np.array([1.0, 0.0])

    def g(phi):
        return 0.5 * (a + d) + 0.5 * (a - d) * np.cos(2.0 * phi) + b * np.sin(2.0 * phi)

    center = 0.5 * np.arctan2(2.0 * b, a - d)
    lo, hi = center - np.pi / 4.0, center + np.pi / 4.0
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    g1, g2 = g(x1), g(x2)
    while hi - lo > 1e-10:
        if g1 < g2:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + _GOLDEN * (hi - lo)
            g2 = g(x2)
        else:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - _GOLDEN * (hi - lo)
            g1 = g(x1)
    phi = 0.5 * (lo + hi)
    u = np.array([np.cos(phi), np.sin(phi)])
    if u[0] < 0.0 or (u[0] == 0.0 and u[1] < 0.0):
        u = -u
    u /= np.linalg.norm(u)

    if abs(b) > 1e-8:
        ref = _closed_form_direction(a, d, b)
        if abs(float(u @ ref)) < 1.0 - 1e-10:
            raise NumericError(
                "pair direction search disagrees with the closed form: "
                f"numeric {u}, closed form {ref}"
            )
    return u


def build_direction_set(init: EsdParams) -> DirectionSet:
    """Assemble the canonical-plus-pairwise direction set from an estimate.

    Canonical axes come first and are tagged with the tail index, their
    location, and their scale diagonal; each pair direction is embedded into
    m dimensions (zeros outside its two coordinates) and tagged with the
    off-diagonal it identifies.
    """
    m = init.dim
    omega = init.omega
    vectors = []
    informs = []
    kurt = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        vectors.append(e)
        informs.append(("alpha", f"xi_{i}", f"omega_{i}_{i}"))
        kurt.append(True)
    for i in range(m):
        for j in range(i + 1, m):
            u2 = optimal_pair_direction(omega[i, i], omega[j, j], omega[i, j])
            v = np.zeros(m)
            v[i], v[j] = u2
            vectors.append(v)
            informs.append((f"omega_{i}_{j}",))
            kurt.append(False)
    return DirectionSet(
        vectors=np.array(vectors),
        informs=tuple(informs),
        kurtosis_flags=np.array(kurt),
    )
