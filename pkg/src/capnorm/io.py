"""JSON documents for grids, cell sets, grid functions, and covers.

Cell sets and grid functions serialize as
``{"grid": {dim, depth, root_side, origin}, "cells"|"values": [...]}``
with flat row-major arrays.  Function values are written as decimal
strings with 17 significant digits, which round-trips float64
bit-exactly; grid geometry floats round-trip through repr-based JSON.
"""

from __future__ import annotations

import json

import numpy as np

from .content import CoverSolution
from .grid import CellSet, DyadicGrid, GridFunction


def grid_to_dict(grid: DyadicGrid) -> dict:
    return {
        "dim": grid.dim,
        "depth": grid.depth,
        "root_side": grid.root_side,
        "origin": list(grid.origin),
    }


def grid_from_dict(doc: dict) -> DyadicGrid:
    return DyadicGrid(
        dim=int(doc["dim"]),
        depth=int(doc["depth"]),
        root_side=float(doc["root_side"]),
        origin=tuple(float(x) for x in doc["origin"]),
    )


def cellset_to_dict(cells: CellSet) -> dict:
    return {
        "grid": grid_to_dict(cells.grid),
        "cells": cells.mask.ravel().astype(int).tolist(),
    }


def cellset_from_dict(doc: dict) -> CellSet:
    grid = grid_from_dict(doc["grid"])
    mask = np.asarray(doc["cells"], dtype=bool).reshape(grid.shape)
    return CellSet(grid, mask)


def gridfunction_to_dict(f: GridFunction) -> dict:
    return {
        "grid": grid_to_dict(f.grid),
        "values": [format(v, ".17g") for v in f.values.ravel()],
    }


def gridfunction_from_dict(doc: dict) -> GridFunction:
    grid = grid_from_dict(doc["grid"])
    values = np.asarray([float(v) for v in doc["values"]]).reshape(grid.shape)
    return GridFunction(grid, values)


def cover_to_dict(sol: CoverSolution) -> dict:
    return {
        "delta": sol.delta,
        "value": sol.value,
        "cover": [{"level": c.level, "index": list(c.index)} for c in sol.cover],
    }


def dumps(doc: dict) -> str:
    """Canonical deterministic JSON text (sorted keys, newline-terminated)."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_path(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def read_cellset(path: str) -> CellSet:
    return cellset_from_dict(load_path(path))


def read_gridfunction(path: str) -> GridFunction:
    return gridfunction_from_dict(load_path(path))
