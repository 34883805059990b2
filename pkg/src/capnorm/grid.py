"""Dyadic grids, cell sets, grid functions, and closed-form samplers.

A :class:`DyadicGrid` tiles a root cube with half-open leaf cells
``[a, a + h)^dim`` so that the dyadic cubes of every level partition the
root exactly; boundary sets of measure zero therefore never straddle two
cells.  Sets are boolean occupancy masks over the leaf cells
(:class:`CellSet`), functions are nonnegative values constant on each
leaf cell (:class:`GridFunction`).  Signed test functions are handled by
the callers, which take absolute values before building a GridFunction.

Sampling uses the midpoint rule (value at the cell center).  Grids for
radial samplers are expected to be placed so the singular point sits on
a cell corner (``origin = -root_side / 2`` does this); cell centers then
never coincide with the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_CELL_CAP = 2**24


class GridError(ValueError):
    """Invalid grid construction or mismatched grid arguments."""


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform dyadic grid over the root cube ``[origin, origin + root_side)^dim``."""

    dim: int
    depth: int
    root_side: float
    origin: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(x) for x in np.atleast_1d(self.origin)))
        if self.dim not in (1, 2, 3):
            raise GridError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.depth < 1:
            raise GridError(f"depth must be >= 1, got {self.depth}")
        if not (self.root_side > 0 and math.isfinite(self.root_side)):
            raise GridError(f"root_side must be positive, got {self.root_side}")
        if len(self.origin) != self.dim:
            raise GridError(f"origin has {len(self.origin)} coordinates, expected {self.dim}")

    @property
    def cells_per_axis(self) -> int:
        return 2**self.depth

    @property
    def h(self) -> float:
        """Leaf cell side length."""
        return self.root_side * 2.0 ** (-self.depth)

    @property
    def n_cells(self) -> int:
        return 2 ** (self.depth * self.dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def diameter(self) -> float:
        return self.root_side * math.sqrt(self.dim)

    def axis_centers(self) -> np.ndarray:
        m = self.cells_per_axis
        return np.asarray(self.origin)[:, None] + self.h * (np.arange(m) + 0.5)

    def centers(self) -> np.ndarray:
        """All cell centers as an ``(n_cells, dim)`` array in C (row-major) order."""
        ax = self.axis_centers()
        grids = np.meshgrid(*ax, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def side_at_level(self, level: int) -> float:
        return self.root_side * 2.0 ** (-level)

    def __eq__(self, other):
        return (
            isinstance(other, DyadicGrid)
            and self.dim == other.dim
            and self.depth == other.depth
            and self.root_side == other.root_side
            and self.origin == other.origin
        )

    def __hash__(self):
        return hash((self.dim, self.depth, self.root_side, self.origin))


def make_grid(dim, depth, root_side, origin=None, cell_cap=DEFAULT_CELL_CAP) -> DyadicGrid:
    """Build a dyadic grid, enforcing the leaf-cell memory cap.

    ``origin`` defaults to ``-root_side/2`` per axis, which puts the
    coordinate origin on a cell corner at every depth.
    """
    if dim not in (1, 2, 3):
        raise GridError(f"dim must be 1, 2 or 3, got {dim}")
    if depth < 1:
        raise GridError(f"depth must be >= 1, got {depth}")
    n_cells = 2 ** (depth * dim)
    if n_cells > cell_cap:
        raise GridError(f"grid would have {n_cells} leaf cells, exceeding the cap {cell_cap}")
    if origin is None:
        origin = (-root_side / 2.0,) * dim
    origin = tuple(np.atleast_1d(np.asarray(origin, dtype=float)).tolist())
    return DyadicGrid(dim=dim, depth=depth, root_side=float(root_side), origin=origin)


@dataclass(frozen=True)
class DyadicCube:
    """A dyadic cube of the grid hierarchy: level k and per-axis integer index."""

    level: int
    index: tuple[int, ...]

    def side(self, grid: DyadicGrid) -> float:
        return grid.side_at_level(self.level)

    def lower_corner(self, grid: DyadicGrid) -> np.ndarray:
        s = grid.side_at_level(self.level)
        return np.asarray(grid.origin) + s * np.asarray(self.index)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridError("operands live on different grids")


class CellSet:
    """A finite union of leaf cells, stored as a boolean occupancy mask."""

    __slots__ = ("grid", "mask")

    def __init__(self, grid: DyadicGrid, mask: np.ndarray):
        mask = np.ascontiguousarray(mask, dtype=bool)
        if mask.shape != grid.shape:
            raise GridError(f"mask shape {mask.shape} does not match grid shape {grid.shape}")
        mask.setflags(write=False)
        self.grid = grid
        self.mask = mask

    @classmethod
    def empty(cls, grid: DyadicGrid) -> "CellSet":
        return cls(grid, np.zeros(grid.shape, dtype=bool))

    @classmethod
    def full(cls, grid: DyadicGrid) -> "CellSet":
        return cls(grid, np.ones(grid.shape, dtype=bool))

    @classmethod
    def from_indices(cls, grid: DyadicGrid, flat_indices) -> "CellSet":
        mask = np.zeros(grid.n_cells, dtype=bool)
        mask[np.asarray(flat_indices, dtype=np.intp)] = True
        return cls(grid, mask.reshape(grid.shape))

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        """Lebesgue measure: cell count times cell volume."""
        return self.count * self.grid.cell_volume

    def is_empty(self) -> bool:
        return not self.mask.any()

    def union(self, other: "CellSet") -> "CellSet":
        _check_same_grid(self, other)
        return CellSet(self.grid, self.mask | other.mask)

    def intersection(self, other: "CellSet") -> "CellSet":
        _check_same_grid(self, other)
        return CellSet(self.grid, self.mask & other.mask)

    def difference(self, other: "CellSet") -> "CellSet":
        _check_same_grid(self, other)
        return CellSet(self.grid, self.mask & ~other.mask)

    def complement(self) -> "CellSet":
        return CellSet(self.grid, ~self.mask)

    def issubset(self, other: "CellSet") -> bool:
        _check_same_grid(self, other)
        return bool(np.all(~self.mask | other.mask))

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersection(other)

    def __sub__(self, other):
        return self.difference(other)

    def __eq__(self, other):
        return (
            isinstance(other, CellSet)
            and self.grid == other.grid
            and np.array_equal(self.mask, other.mask)
        )

    def __repr__(self):
        return f"CellSet(depth={self.grid.depth}, dim={self.grid.dim}, cells={self.count})"


class GridFunction:
    """Nonnegative function constant on each leaf cell of a dyadic grid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: DyadicGrid, values: np.ndarray):
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise GridError(f"values shape {values.shape} does not match grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("grid function values must be finite")
        if np.any(values < 0):
            raise GridError("grid function values must be nonnegative")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: DyadicGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @property
    def support(self) -> CellSet:
        return CellSet(self.grid, self.values > 0)

    def superlevel(self, lam: float) -> CellSet:
        """Cells where the value is strictly greater than ``lam``."""
        return CellSet(self.grid, self.values > lam)

    def max(self) -> float:
        return float(self.values.max())

    def scale(self, c: float) -> "GridFunction":
        if c < 0:
            raise GridError("scale factor must be nonnegative")
        return GridFunction(self.grid, self.values * c)

    def power(self, exponent: float) -> "GridFunction":
        return GridFunction(self.grid, self.values**exponent)

    def restrict(self, cells: CellSet) -> "GridFunction":
        _check_same_grid(self, cells)
        return GridFunction(self.grid, np.where(cells.mask, self.values, 0.0))

    def lebesgue_integral(self) -> float:
        """Plain Lebesgue integral: sum of values times cell volume."""
        return float(self.values.sum()) * self.grid.cell_volume

    def __add__(self, other):
        _check_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __eq__(self, other):
        return (
            isinstance(other, GridFunction)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"GridFunction(depth={self.grid.depth}, dim={self.grid.dim}, max={self.values.max():g})"


@dataclass(frozen=True)
class Sampler:
    """Closed-form function descriptor sampled at cell centers.

    Kinds:
      constant        value
      radial_power    |x - center|^exponent, optional truncation annulus
                      eps_inner <= |x - center| < r_outer (zero outside)
      ball_indicator  1 on B(center, radius)
      linear          coeffs . x + offset  (signed; use evaluate, not sample)
      bump            amplitude * (1 - |x - center|^2 / radius^2)_+^2
      tabulated       explicit per-cell values (finite differences for gradients)
    """

    kind: str
    value: float = 0.0
    center: tuple[float, ...] = ()
    exponent: float = 0.0
    radius: float = 0.0
    coeffs: tuple[float, ...] = ()
    offset: float = 0.0
    amplitude: float = 1.0
    annulus: Optional[tuple[float, float]] = None
    table: Optional[np.ndarray] = field(default=None, compare=False)

    @classmethod
    def constant(cls, value: float) -> "Sampler":
        return cls(kind="constant", value=float(value))

    @classmethod
    def radial_power(cls, exponent, center=(0.0,), annulus=None) -> "Sampler":
        if annulus is not None:
            eps_inner, r_outer = annulus
            if not (0 <= eps_inner < r_outer):
                raise GridError(f"invalid truncation annulus {annulus}")
            annulus = (float(eps_inner), float(r_outer))
        return cls(
            kind="radial_power",
            exponent=float(exponent),
            center=tuple(float(c) for c in np.atleast_1d(center)),
            annulus=annulus,
        )

    @classmethod
    def ball_indicator(cls, center, radius) -> "Sampler":
        return cls(
            kind="ball_indicator",
            center=tuple(float(c) for c in np.atleast_1d(center)),
            radius=float(radius),
        )

    @classmethod
    def linear(cls, coeffs, offset=0.0) -> "Sampler":
        return cls(
            kind="linear",
            coeffs=tuple(float(c) for c in np.atleast_1d(coeffs)),
            offset=float(offset),
        )

    @classmethod
    def bump(cls, center, radius, amplitude=1.0) -> "Sampler":
        return cls(
            kind="bump",
            center=tuple(float(c) for c in np.atleast_1d(center)),
            radius=float(radius),
            amplitude=float(amplitude),
        )

    @classmethod
    def tabulated(cls, values: np.ndarray) -> "Sampler":
        return cls(kind="tabulated", table=np.asarray(values, dtype=np.float64))

    def _radii(self, points: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center)
        return np.sqrt(np.sum((points - c) ** 2, axis=-1))

    def _annulus_mask(self, r: np.ndarray) -> np.ndarray:
        eps_inner, r_outer = self.annulus
        return (r >= eps_inner) & (r < r_outer)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Raw (possibly signed) values at the given points, shape (N, dim)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        if self.kind == "constant":
            return np.full(n, self.value)
        if self.kind == "radial_power":
            r = self._radii(points)
            with np.errstate(divide="ignore"):
                vals = r**self.exponent
            if self.annulus is not None:
                vals = np.where(self._annulus_mask(r), vals, 0.0)
            return vals
        if self.kind == "ball_indicator":
            r = self._radii(points)
            return (r < self.radius).astype(np.float64)
        if self.kind == "linear":
            return points @ np.asarray(self.coeffs) + self.offset
        if self.kind == "bump":
            r = self._radii(points)
            t = 1.0 - (r / self.radius) ** 2
            return self.amplitude * np.where(t > 0, t, 0.0) ** 2
        raise GridError(f"cannot evaluate sampler of kind {self.kind!r} pointwise")

    def gradient_magnitude_values(self, points: np.ndarray) -> np.ndarray:
        """|grad| at the given points for kinds with a closed-form gradient."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        if self.kind == "constant":
            return np.zeros(n)
        if self.kind == "radial_power":
            r = self._radii(points)
            with np.errstate(divide="ignore"):
                vals = abs(self.exponent) * r ** (self.exponent - 1.0)
            if self.annulus is not None:
                vals = np.where(self._annulus_mask(r), vals, 0.0)
            return vals
        if self.kind == "linear":
            return np.full(n, float(np.linalg.norm(self.coeffs)))
        if self.kind == "bump":
            r = self._radii(points)
            t = 1.0 - (r / self.radius) ** 2
            return self.amplitude * 4.0 * r / self.radius**2 * np.where(t > 0, t, 0.0)
        raise GridError(f"sampler of kind {self.kind!r} has no closed-form gradient")


def sample(sampler: Sampler, grid: DyadicGrid) -> GridFunction:
    """Midpoint-rule sampling onto a grid; values must be finite and >= 0."""
    if sampler.kind == "tabulated":
        return GridFunction(grid, sampler.table.reshape(grid.shape))
    vals = sampler.evaluate(grid.centers()).reshape(grid.shape)
    if not np.all(np.isfinite(vals)):
        raise GridError("sampler produced non-finite values at cell centers")
    return GridFunction(grid, vals)


def gradient_magnitude(sampler: Sampler, grid: DyadicGrid) -> GridFunction:
    """|grad u| sampled at cell centers.

    Closed-form kinds use the analytic gradient.  Tabulated samplers use
    central finite differences with one-sided fallback at the grid
    boundary (exact for linear data).
    """
    if sampler.kind == "tabulated":
        table = sampler.table.reshape(grid.shape)
        if grid.dim == 1:
            comps = [np.gradient(table, grid.h)]
        else:
            comps = np.gradient(table, grid.h)
        mag = np.sqrt(np.sum([c**2 for c in comps], axis=0))
        return GridFunction(grid, mag)
    if sampler.kind == "ball_indicator":
        raise GridError("ball indicator has no classical gradient")
    vals = sampler.gradient_magnitude_values(grid.centers()).reshape(grid.shape)
    if not np.all(np.isfinite(vals)):
        raise GridError("gradient sampler produced non-finite values")
    return GridFunction(grid, vals)
