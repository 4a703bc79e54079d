"""Uniform 1-D finite-volume grid, cell-average projection and discrete derivatives.

Cells and faces are numbered from 1 in file outputs and docstrings; the arrays
held here are ordinary 0-based numpy arrays, so cell ``i`` lives at index
``i - 1`` and face ``e`` at index ``e - 1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

DEFAULT_QUAD_ORDER = 10


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    M: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.M

    @property
    def faces(self) -> np.ndarray:
        """Positions of the M + 1 faces, face ``e`` at ``x_min + (e - 1) dx``."""
        return self.x_min + self.dx * np.arange(self.M + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.dx * (np.arange(self.M) + 0.5)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def cell_index(self, y: np.ndarray) -> np.ndarray:
        """0-based index of the cell containing each point of ``y``.

        Points on a face belong to the cell on their right, except ``x_max``
        which belongs to the last cell.
        """
        idx = np.floor((np.asarray(y, dtype=float) - self.x_min) / self.dx).astype(np.int64)
        return np.clip(idx, 0, self.M - 1)


def build_grid(x_min: float, x_max: float, M: int) -> Grid:
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or not x_min < x_max:
        raise ValueError(f"empty or invalid interval ({x_min}, {x_max})")
    if int(M) != M or M < 2:
        raise ValueError(f"need at least 2 cells, got M={M}")
    return Grid(float(x_min), float(x_max), int(M))


@dataclass(frozen=True)
class Snapshot:
    t: float
    values: np.ndarray
    component: int = 0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("snapshot values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"non-finite cell average in snapshot at t={self.t}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SnapshotMatrix:
    """K snapshots of one component stored column-wise as an M x K array."""

    grid: Grid
    times: np.ndarray
    data: np.ndarray
    component: int = 0

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape != (self.grid.M, times.size):
            raise ValueError(
                f"data shape {data.shape} does not match (M, K) = ({self.grid.M}, {times.size})"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("snapshot times must be strictly increasing")
        if not np.all(np.isfinite(data)):
            raise ValueError("snapshot matrix contains non-finite entries")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)

    @property
    def K(self) -> int:
        return self.times.size

    def column(self, k: int) -> Snapshot:
        return Snapshot(float(self.times[k]), self.data[:, k], self.component)

    @property
    def columns(self) -> list[Snapshot]:
        return [self.column(k) for k in range(self.K)]

    @classmethod
    def from_snapshots(cls, grid: Grid, snapshots: Sequence[Snapshot]) -> "SnapshotMatrix":
        if not snapshots:
            raise ValueError("need at least one snapshot")
        component = snapshots[0].component
        times = np.array([s.t for s in snapshots])
        data = np.column_stack([s.values for s in snapshots])
        return cls(grid, times, data, component)


def gauss_legendre_nodes(grid: Grid, quad_order: int = DEFAULT_QUAD_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (M x q) and reference weights (q,) summing to one."""
    if quad_order < 1:
        raise ValueError("quad_order must be at least 1")
    xi, w = np.polynomial.legendre.leggauss(quad_order)
    left = grid.faces[:-1]
    nodes = left[:, None] + 0.5 * (xi[None, :] + 1.0) * grid.dx
    return nodes, 0.5 * w


def project(
    f: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    quad_order: int = DEFAULT_QUAD_ORDER,
    t: float = 0.0,
    component: int = 0,
) -> Snapshot:
    """Cell averages of ``f`` by Gauss-Legendre quadrature in every cell.

    ``f`` is called once with the full (M, quad_order) array of nodes and must
    be vectorised.
    """
    nodes, weights = gauss_legendre_nodes(grid, quad_order)
    fx = np.asarray(f(nodes), dtype=float)
    if fx.shape != nodes.shape:
        fx = np.broadcast_to(fx, nodes.shape)
    if not np.all(np.isfinite(fx)):
        bad = nodes[~np.isfinite(fx)][0]
        raise ValueError(f"non-finite function value at quadrature node x={bad}")
    return Snapshot(t, fx @ weights, component)


def central_difference_derivative(s: Snapshot, grid: Grid) -> Snapshot:
    """Cell-wise derivative: centred in the interior, one-sided in the end cells."""
    u = s.values
    if grid.M < 3:
        raise ValueError("central differences need at least 3 cells")
    if u.size != grid.M:
        raise ValueError("snapshot length does not match grid")
    du = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * grid.dx)
    du[0] = (u[1] - u[0]) / grid.dx
    du[-1] = (u[-1] - u[-2]) / grid.dx
    return Snapshot(s.t, du, s.component)


# ---------------------------------------------------------------------------
# CSV layout: one metadata comment line, a row of times, then one row per cell.

def _fmt(v: float) -> str:
    return repr(float(v))


def write_matrix_csv(path: str | Path, S: SnapshotMatrix) -> None:
    buf = io.StringIO()
    g = S.grid
    buf.write(f"# x_min={_fmt(g.x_min)},x_max={_fmt(g.x_max)},M={g.M},component={S.component}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([_fmt(t) for t in S.times])
    for row in S.data:
        writer.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_matrix_csv(path: str | Path) -> SnapshotMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing grid metadata header")
    meta = dict(item.split("=", 1) for item in lines[0][1:].strip().split(","))
    grid = build_grid(float(meta["x_min"]), float(meta["x_max"]), int(meta["M"]))
    rows = [list(map(float, r)) for r in csv.reader(lines[1:])]
    times = np.array(rows[0])
    data = np.array(rows[1:]).reshape(grid.M, times.size)
    return SnapshotMatrix(grid, times, data, int(meta.get("component", 0)))
