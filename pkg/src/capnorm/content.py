"""Exact dyadic Hausdorff content of cell sets via tree dynamic programming.

The content of exponent ``delta`` of a set S is the cheapest cover of S
by dyadic cubes, a cube of side l costing ``l**delta``.  A bottom-up
pass over the dyadic tree computes it exactly:

    cost(Q) = 0                                   if Q does not meet S
    cost(Q) = min(side(Q)**delta, sum of children) otherwise

Exactness at leaf resolution holds for ``delta <= dim``: any dyadic cube
meeting the root is nested with it (cubes containing the root cost at
least the root, which the DP never exceeds), and subdividing a cube into
its 2^(k*dim) level-k descendants multiplies the cost by 2^(k*(dim-delta))
>= 1, so covers never need cubes finer than the leaves.  At equal cost
the coarser cube is preferred, which keeps covers small and the output
deterministic.

An incremental engine supports removing cells (superlevel sets shrink as
the threshold grows) by recomputing only the tree paths above removed
leaves; child costs are accumulated in the same fixed order as the
from-scratch pass, so incremental results are bit-identical to a rebuild.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .grid import CellSet, DyadicCube, DyadicGrid, GridError

ORACLE_CELL_LIMIT = 2**12


class ContentError(ValueError):
    """Invalid content parameters or an oracle instance that is too large."""


@dataclass(frozen=True)
class ContentParams:
    """Content exponent delta in (0, dim]."""

    delta: float

    def validate(self, dim: int):
        if not (0.0 < self.delta <= dim):
            raise ContentError(f"delta must be in (0, {dim}], got {self.delta}")


@dataclass(frozen=True)
class CoverSolution:
    """An optimal dyadic cover: its total cost and the cubes themselves."""

    value: float
    cover: tuple[DyadicCube, ...]
    delta: float
    grid: DyadicGrid

    def cover_cost(self) -> float:
        return float(sum(c.side(self.grid) ** self.delta for c in self.cover))


def _child_offsets(dim: int) -> tuple[tuple[int, ...], ...]:
    # fixed C order; summation order must match between build and update
    return tuple(itertools.product((0, 1), repeat=dim))


class ContentEngine:
    """Per-level cost arrays for one (grid, delta) pair, updatable in place."""

    def __init__(self, grid: DyadicGrid, delta: float):
        ContentParams(delta).validate(grid.dim)
        self.grid = grid
        self.delta = float(delta)
        self.dim = grid.dim
        self.depth = grid.depth
        self._offsets = _child_offsets(grid.dim)
        self.weights = [grid.side_at_level(k) ** self.delta for k in range(grid.depth + 1)]
        self.cost = [None] * (grid.depth + 1)

    def build(self, mask: np.ndarray):
        """From-scratch bottom-up pass over the occupancy mask."""
        L = self.depth
        leaf = np.where(mask, self.weights[L], 0.0)
        self.cost[L] = leaf
        for k in range(L - 1, -1, -1):
            child = self.cost[k + 1]
            acc = None
            for off in self._offsets:
                sl = tuple(slice(o, None, 2) for o in off)
                block = child[sl]
                acc = block.copy() if acc is None else acc + block
            self.cost[k] = np.where(acc > 0, np.minimum(self.weights[k], acc), 0.0)

    def remove(self, leaf_index: tuple[np.ndarray, ...]):
        """Zero out the given leaf cells and recompute their ancestor paths."""
        L = self.depth
        self.cost[L][leaf_index] = 0.0
        idx = leaf_index
        for k in range(L - 1, -1, -1):
            parent_flat = np.unique(
                np.ravel_multi_index(tuple(a >> 1 for a in idx), (2**k,) * self.dim)
            )
            idx = np.unravel_index(parent_flat, (2**k,) * self.dim)
            acc = None
            for off in self._offsets:
                child_idx = tuple(2 * a + o for a, o in zip(idx, off))
                block = self.cost[k + 1][child_idx]
                acc = block.copy() if acc is None else acc + block
            self.cost[k][idx] = np.where(acc > 0, np.minimum(self.weights[k], acc), 0.0)

    @property
    def value(self) -> float:
        return float(self.cost[0].flat[0])

    def extract_cover(self) -> tuple[DyadicCube, ...]:
        """Top-down descent: take a cube wherever its cost equals its own weight.

        cost = min(weight, children sum), so cost == weight exactly when
        covering here is optimal (ties prefer the coarser cube).
        """
        out = []
        L = self.depth
        stack = [(0, (0,) * self.dim)]
        while stack:
            k, idx = stack.pop()
            c = self.cost[k][idx]
            if c == 0.0:
                continue
            if k == L or c == self.weights[k]:
                out.append(DyadicCube(level=k, index=idx))
                continue
            for off in self._offsets:
                child_idx = tuple(2 * a + o for a, o in zip(idx, off))
                stack.append((k + 1, child_idx))
        out.sort(key=lambda c: (c.level, c.index))
        return tuple(out)


def dyadic_content(cells: CellSet, params: ContentParams | float) -> CoverSolution:
    """Exact dyadic content of a cell set, with an optimal cover."""
    delta = params.delta if isinstance(params, ContentParams) else float(params)
    engine = ContentEngine(cells.grid, delta)
    engine.build(cells.mask)
    if cells.is_empty():
        return CoverSolution(value=0.0, cover=(), delta=delta, grid=cells.grid)
    return CoverSolution(
        value=engine.value, cover=engine.extract_cover(), delta=delta, grid=cells.grid
    )


def content_value(cells: CellSet, delta: float) -> float:
    """Content value only (skips cover extraction)."""
    engine = ContentEngine(cells.grid, delta)
    engine.build(cells.mask)
    return engine.value


def content_oracle(cells: CellSet, params: ContentParams | float) -> float:
    """Exhaustive minimum over all antichain covers of the dyadic tree.

    Independent of the production DP: depth-first search over covers,
    branching on the ancestors of the first uncovered cell, pruned with
    the admissible bound (uncovered cells) * (cheapest per-cell cube
    rate).  For delta <= dim that rate is attained at the root level.
    Test-only; refuses instances above ORACLE_CELL_LIMIT leaf cells.
    """
    delta = params.delta if isinstance(params, ContentParams) else float(params)
    grid = cells.grid
    ContentParams(delta).validate(grid.dim)
    if grid.n_cells > ORACLE_CELL_LIMIT:
        raise ContentError(
            f"oracle instance too large: {grid.n_cells} cells > {ORACLE_CELL_LIMIT}"
        )
    occupied = np.flatnonzero(cells.mask.ravel())
    if occupied.size == 0:
        return 0.0

    L, dim, m = grid.depth, grid.dim, grid.cells_per_axis
    pos_of = {int(f): i for i, f in enumerate(occupied)}
    n_occ = occupied.size
    multi = np.unravel_index(occupied, grid.shape)

    # bitmask of occupied cells under each cube, keyed by (level, index)
    cube_bits: dict[tuple[int, tuple[int, ...]], int] = {}
    cube_weight: dict[tuple[int, tuple[int, ...]], float] = {}
    for i in range(n_occ):
        leaf = tuple(int(a[i]) for a in multi)
        for k in range(L + 1):
            key = (k, tuple(c >> (L - k) for c in leaf))
            cube_bits[key] = cube_bits.get(key, 0) | (1 << i)
    for key in cube_bits:
        cube_weight[key] = grid.side_at_level(key[0]) ** delta

    # ancestors of each cell, coarsest first (big cubes give good bounds early)
    ancestors = []
    for i in range(n_occ):
        leaf = tuple(int(a[i]) for a in multi)
        ancestors.append([(k, tuple(c >> (L - k) for c in leaf)) for k in range(L + 1)])

    # admissible completion bound: a cube of side s covers at most (s/h)^dim
    # cells at cost s^delta, so cost per cell >= s^(delta-dim) h^dim, minimized
    # at s = root_side for delta <= dim
    per_cell = grid.root_side**delta / grid.n_cells

    full = (1 << n_occ) - 1
    leaf_weight = grid.h**delta
    best = min(grid.root_side**delta, n_occ * leaf_weight)

    order = np.argsort(occupied)  # fixed scan order
    scan = [int(occupied[j]) for j in order]

    def first_uncovered(covered: int) -> int:
        for f in scan:
            if not covered & (1 << pos_of[f]):
                return pos_of[f]
        return -1

    stack = [(0, 0.0)]
    # explicit DFS to avoid recursion limits on large occupied sets
    while stack:
        covered, cost = stack.pop()
        remaining = n_occ - bin(covered).count("1")
        if cost + remaining * per_cell >= best:
            continue
        i = first_uncovered(covered)
        if i < 0:
            best = min(best, cost)
            continue
        for key in ancestors[i]:
            w = cube_weight[key]
            new_cost = cost + w
            new_cov = covered | cube_bits[key]
            rem = n_occ - bin(new_cov).count("1")
            if new_cost + rem * per_cell < best:
                if rem == 0:
                    best = new_cost
                else:
                    stack.append((new_cov, new_cost))
    return best


# Bracket constants for the ball-cover content.  Circumscribed balls of the
# cover cubes give the upper bound with radius side*sqrt(dim)/2.  For the
# lower bound: a ball of radius r fits in a box of side 2r, which meets at
# most 2^dim dyadic cubes of the smallest dyadic side s >= 2r, and s < 4r,
# so any ball cover converts to a dyadic cover at cost factor 2^dim * 4^delta.


def ball_cover_bracket(solution: CoverSolution) -> tuple[float, float]:
    """Bracket [lower, upper] for the ball-cover content given a dyadic cover."""
    d = solution.grid.dim
    upper = (math.sqrt(d) / 2.0) ** solution.delta * solution.value
    lower = solution.value / (2**d * 4.0**solution.delta)
    return (lower, upper)


def ball_bracket_ratio_bound(dim: int, delta: float) -> float:
    """Guaranteed lower/upper ratio of the bracket (dimensional constant)."""
    return 1.0 / (2**dim * 4.0**delta * (math.sqrt(dim) / 2.0) ** delta)


@dataclass(frozen=True)
class SubadditivityReport:
    content_a: float
    content_b: float
    content_union: float
    content_intersection: float

    @property
    def slack(self) -> float:
        return (self.content_a + self.content_b) - (
            self.content_union + self.content_intersection
        )


def strong_subadditivity_check(
    a: CellSet, b: CellSet, params: ContentParams | float
) -> SubadditivityReport:
    """H(A) + H(B) - H(A u B) - H(A n B), which must be >= -1e-12."""
    if a.grid != b.grid:
        raise GridError("cell sets live on different grids")
    delta = params.delta if isinstance(params, ContentParams) else float(params)
    return SubadditivityReport(
        content_a=content_value(a, delta),
        content_b=content_value(b, delta),
        content_union=content_value(a.union(b), delta),
        content_intersection=content_value(a.intersection(b), delta),
    )
