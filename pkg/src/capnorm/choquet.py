"""Choquet integrals and Lorentz-type quasi-norms over the dyadic content.

Every functional here is computed in closed form from the step
distribution of a grid function: the map ``lam -> content({f > lam})``
is piecewise constant with jumps exactly at the distinct positive values
of f, so layer-cake integrals reduce to finite sums.  No lambda
quadrature appears in the production path (a quadrature oracle lives in
the tests only).

Superlevel sets use strict inequality {f > lam} throughout.  Sampled
values that agree within 1e-12 relative are merged into one threshold to
avoid spurious zero-width steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .content import ContentEngine
from .grid import CellSet, GridFunction

MERGE_RTOL = 1e-12


class ExponentError(ValueError):
    """Invalid Lorentz exponents."""


@dataclass(frozen=True)
class LorentzExponents:
    """Primary exponent p in (0, inf), secondary q in (0, inf], content delta."""

    p: float
    q: float
    delta: float

    def __post_init__(self):
        if not (0 < self.p < math.inf):
            raise ExponentError(f"p must be in (0, inf), got {self.p}")
        if not (0 < self.q):
            raise ExponentError(f"q must be in (0, inf], got {self.q}")
        if not (0 < self.delta):
            raise ExponentError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class StepDistribution:
    """Piecewise-constant distribution function of a grid function.

    thresholds: the m distinct (merged) positive values v_1 < ... < v_m.
    plateaus:   h_j = content({f > lam}) for lam in [v_j, v_{j+1}), with
                v_0 = 0, so plateaus[0] is the content of the support and
                the distribution vanishes for lam >= v_m.
    """

    thresholds: np.ndarray
    plateaus: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        h = np.asarray(self.plateaus, dtype=np.float64)
        if t.shape != h.shape or t.ndim != 1:
            raise ValueError("thresholds and plateaus must be 1-d arrays of equal length")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "plateaus", h)

    @property
    def is_zero(self) -> bool:
        return self.thresholds.size == 0

    def content_at(self, lam: float) -> float:
        """content({f > lam}) for lam >= 0."""
        if self.is_zero:
            return 0.0
        j = int(np.searchsorted(self.thresholds, lam, side="right"))
        if j >= self.thresholds.size:
            return 0.0
        return float(self.plateaus[j])


def _merged_value_groups(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct positive values merged at MERGE_RTOL; returns (reps, group_of_cell).

    reps are the cluster maxima, strictly increasing.  group_of_cell maps
    each positive cell (in the order of `values`) to its cluster, 0-based.
    """
    pos = values[values > 0]
    uniq = np.unique(pos)
    if uniq.size == 0:
        return np.empty(0), np.empty(0, dtype=np.intp)
    gaps = np.diff(uniq)
    new_cluster = gaps > MERGE_RTOL * uniq[1:]
    cluster_id = np.concatenate([[0], np.cumsum(new_cluster)])
    n_clusters = int(cluster_id[-1]) + 1
    reps = np.zeros(n_clusters)
    np.maximum.at(reps, cluster_id, uniq)
    group_of_value = cluster_id[np.searchsorted(uniq, pos)]
    return reps, group_of_value


def distribution(f: GridFunction, delta: float) -> StepDistribution:
    """Exact step distribution of f under the dyadic content of exponent delta.

    For delta < dim the nested superlevel sets are evaluated with the
    incremental tree engine (cells only leave as the threshold grows; the
    results are bit-identical to a from-scratch pass per level).  For
    delta == dim the content of a cell set equals its Lebesgue measure,
    so plateaus are computed by counting.
    """
    grid = f.grid
    flat = f.values.ravel()
    pos_mask = flat > 0
    reps, groups = _merged_value_groups(flat)
    m = reps.size
    if m == 0:
        return StepDistribution(np.empty(0), np.empty(0))

    if delta == grid.dim:
        # content of a cell set equals its Lebesgue measure at delta = dim
        counts = np.bincount(groups, minlength=m)
        cells_in_clusters_from = np.cumsum(counts[::-1])[::-1]
        return StepDistribution(reps, cells_in_clusters_from * grid.cell_volume)

    engine = ContentEngine(grid, delta)
    engine.build(pos_mask.reshape(grid.shape))
    plateaus = np.empty(m)
    plateaus[0] = engine.value
    pos_flat_indices = np.flatnonzero(pos_mask)
    for j in range(1, m):
        leaving = pos_flat_indices[groups == j - 1]
        engine.remove(np.unravel_index(leaving, grid.shape))
        plateaus[j] = engine.value
    return StepDistribution(reps, plateaus)


def lebesgue_distribution(f: GridFunction) -> StepDistribution:
    """Step distribution with Lebesgue measure in place of the content."""
    grid = f.grid
    reps, groups = _merged_value_groups(f.values.ravel())
    m = reps.size
    if m == 0:
        return StepDistribution(np.empty(0), np.empty(0))
    counts = np.bincount(groups, minlength=m)
    cells_in_clusters_from = np.cumsum(counts[::-1])[::-1]  # clusters >= j
    return StepDistribution(reps, cells_in_clusters_from * grid.cell_volume)


# closed forms on a step distribution ------------------------------------


def integral_of(dist: StepDistribution) -> float:
    """Layer-cake integral: sum over plateaus of width times height."""
    if dist.is_zero:
        return 0.0
    ext = np.concatenate([[0.0], dist.thresholds])
    return float(np.sum(np.diff(ext) * dist.plateaus))


def p_norm_of(dist: StepDistribution, p: float) -> float:
    if not (0 < p < math.inf):
        raise ExponentError(f"p must be in (0, inf), got {p}")
    if dist.is_zero:
        return 0.0
    ext = np.concatenate([[0.0], dist.thresholds]) ** p
    return float(np.sum(np.diff(ext) * dist.plateaus)) ** (1.0 / p)


def lorentz_norm_of(dist: StepDistribution, p: float, q: float) -> float:
    if not (0 < p < math.inf) or not (0 < q):
        raise ExponentError(f"invalid Lorentz exponents p={p}, q={q}")
    if dist.is_zero:
        return 0.0
    if q == math.inf:
        # sup of lam * h(lam)^(1/p); on each plateau the sup sits at the
        # right endpoint approached from below, exact for step data
        return float(np.max(dist.thresholds * dist.plateaus ** (1.0 / p)))
    ext = np.concatenate([[0.0], dist.thresholds]) ** q
    s = np.sum(np.diff(ext) * dist.plateaus ** (q / p))
    return float((p / q) * s) ** (1.0 / q)


def _largest_pow2_below(v: float) -> int:
    """Largest integer i with 2^i < v, exact for float v > 0."""
    mantissa, exp = math.frexp(v)  # v = mantissa * 2^exp, mantissa in [0.5, 1)
    return exp - 2 if mantissa == 0.5 else exp - 1


def dyadic_sum_norm_of(dist: StepDistribution, p: float, q: float) -> float:
    """Dyadic-level quasi-norm: sum over i of 2^{iq} h(2^i)^{q/p}.

    Levels with 2^i >= max f contribute zero; levels below the least
    positive value all see the full support and are summed as a closed
    geometric tail.  Comparable to the integral form within
    [(q/(p(2^q-1)))^{1/q}, (q 2^q/(p(2^q-1)))^{1/q}] for finite q
    (h is nonincreasing, so each dyadic slab brackets the integrand),
    and within [1/2, 1] relative for q = inf.
    """
    if not (0 < p < math.inf) or not (0 < q):
        raise ExponentError(f"invalid Lorentz exponents p={p}, q={q}")
    if dist.is_zero:
        return 0.0
    v_min = float(dist.thresholds[0])
    v_max = float(dist.thresholds[-1])
    i_tail = _largest_pow2_below(v_min)  # levels <= i_tail see the whole support
    i_top = _largest_pow2_below(v_max)  # last level with a nonzero term
    h0 = float(dist.plateaus[0])
    if q == math.inf:
        best = math.ldexp(1.0, i_tail) * h0 ** (1.0 / p)
        for i in range(i_tail + 1, i_top + 1):
            h = dist.content_at(math.ldexp(1.0, i))
            best = max(best, math.ldexp(1.0, i) * h ** (1.0 / p))
        return best
    tail = h0 ** (q / p) * math.ldexp(1.0, i_tail) ** q / (1.0 - 2.0**-q)
    total = tail
    for i in range(i_tail + 1, i_top + 1):
        lam = math.ldexp(1.0, i)
        h = dist.content_at(lam)
        if h > 0:
            total += lam**q * h ** (q / p)
    return total ** (1.0 / q)


def dyadic_sum_comparability(p: float, q: float) -> tuple[float, float]:
    """Bounds on (dyadic sum norm) / (integral norm) for finite q."""
    if q == math.inf:
        return (0.5, 1.0)
    lo = (q / (p * (2.0**q - 1.0))) ** (1.0 / q)
    hi = (q * 2.0**q / (p * (2.0**q - 1.0))) ** (1.0 / q)
    return (lo, hi)


# grid-function front ends -------------------------------------------------


def choquet_integral(f: GridFunction, delta: float) -> float:
    return integral_of(distribution(f, delta))


def choquet_p_norm(f: GridFunction, p: float, delta: float) -> float:
    return p_norm_of(distribution(f, delta), p)


def lorentz_norm(f: GridFunction, exps: LorentzExponents) -> float:
    return lorentz_norm_of(distribution(f, exps.delta), exps.p, exps.q)


def lorentz_norm_dyadic(f: GridFunction, exps: LorentzExponents) -> float:
    return dyadic_sum_norm_of(distribution(f, exps.delta), exps.p, exps.q)


def lebesgue_lorentz_norm(f: GridFunction, p: float, q: float) -> float:
    """Classical Lorentz quasi-norm with Lebesgue measure on cell sets."""
    return lorentz_norm_of(lebesgue_distribution(f), p, q)


def lebesgue_embedding_constant(dim: int, delta: float, q: float) -> float:
    """Constant C in ||f||_{L^{p,q}(Leb)} <= C ||f||_{L^{p delta/dim, q}(H^delta)}.

    For the dyadic content, measure(E) <= content(E)^{dim/delta} with
    constant one, which propagates to C = (dim/delta)^{1/q} for finite q
    and C = 1 for q = inf.
    """
    if q == math.inf:
        return 1.0
    return (dim / delta) ** (1.0 / q)
