"""Graded interior grids on (0, 1) and sampled fields living on them."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, GridMismatchError
from .fields import ExteriorData

__all__ = ["Grid1D", "GridFunction"]


@dataclass(frozen=True)
class Grid1D:
    """Strictly interior nodes of (0, 1), symmetric about 1/2.

    Node density scales like d^(grading_exponent - 1) near each endpoint, so
    grading_exponent = 1 is uniform and larger values cluster nodes at the
    boundary (needed to resolve d^tau profiles with tau near -1).
    """

    nodes: np.ndarray
    grading_exponent: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise DomainError("grid needs at least 3 interior nodes")
        if not (np.all(np.diff(nodes) > 0) and nodes[0] > 0 and nodes[-1] < 1):
            raise DomainError("grid nodes must be strictly increasing inside (0, 1)")
        if not np.allclose(nodes, 1.0 - nodes[::-1], atol=1e-13):
            raise DomainError("grid must be symmetric about 1/2")
        if self.grading_exponent < 1.0:
            raise DomainError("grading_exponent must be >= 1")

    @classmethod
    def graded(cls, n: int, grading_exponent: float = 3.0, include=()) -> "Grid1D":
        """Symmetric graded grid with roughly n interior nodes.

        Points listed in `include` (and their mirrors) are snapped onto the
        grid exactly, replacing the nearest generated node; exhaustion shells
        and probe locations are pinned this way so they never fall between
        nodes.
        """
        m = max(2, (int(n) + 1) // 2)
        s = np.arange(1, m + 1) / m
        half = 0.5 * s**grading_exponent
        for q in include:
            q = float(q)
            q = min(q, 1.0 - q)
            if not 0.0 < q <= 0.5:
                raise DomainError(f"cannot snap point {q} into (0, 1/2]")
            if q == 0.5:
                continue
            j = int(np.argmin(np.abs(half - q)))
            if half[j] == 0.5:  # never move the midpoint
                j -= 1
            half[j] = q
        half = np.unique(half)
        if half[-1] != 0.5:
            half = np.append(half, 0.5)
        nodes = np.concatenate([half, 1.0 - half[:-1][::-1]])
        return cls(nodes=nodes, grading_exponent=float(grading_exponent))

    @property
    def n_interior(self) -> int:
        return self.nodes.size

    @property
    def d(self) -> np.ndarray:
        """Distance of every node to the boundary {0, 1}."""
        return np.minimum(self.nodes, 1.0 - self.nodes)

    @property
    def min_spacing(self) -> float:
        return float(min(self.nodes[0], np.diff(self.nodes).min()))

    def cell_edges(self) -> np.ndarray:
        """Node list extended by the boundary points 0 and 1."""
        return np.concatenate([[0.0], self.nodes, [1.0]])

    def free_mask(self, shell: int) -> np.ndarray:
        """Mask of nodes strictly inside the exhaustion domain {d > 1/shell}."""
        if shell < 2:
            raise DomainError("exhaustion shell must satisfy shell >= 2")
        return self.d > 1.0 / shell

    def __eq__(self, other):
        return (
            isinstance(other, Grid1D)
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
        )

    def __hash__(self):
        return hash((self.nodes.size, float(self.nodes[0]), float(self.nodes[1])))


@dataclass
class GridFunction:
    """Nodal values on a Grid1D plus an exterior specification.

    Values must stay finite: blow-up lives in fitted exponents, never in
    stored infinities.
    """

    grid: Grid1D
    values: np.ndarray
    exterior: ExteriorData = field(default_factory=ExteriorData.zero)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise GridMismatchError("values shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        self.values = v

    @classmethod
    def from_callable(cls, grid: Grid1D, fn, exterior: ExteriorData | None = None) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float), exterior or ExteriorData.zero())

    @classmethod
    def zeros(cls, grid: Grid1D, exterior: ExteriorData | None = None) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_interior), exterior or ExteriorData.zero())

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, np.asarray(values, dtype=float), self.exterior)

    def interp(self, x) -> np.ndarray:
        """Piecewise-linear evaluation at interior points, 0 at the boundary."""
        return np.interp(
            np.asarray(x, dtype=float),
            self.grid.cell_edges(),
            np.concatenate([[0.0], self.values, [0.0]]),
        )

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "d", "value"])
            for x, d, v in zip(self.grid.nodes, self.grid.d, self.values):
                writer.writerow([repr(float(x)), repr(float(d)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, grading_exponent: float = 1.0) -> "GridFunction":
        xs, vals = [], []
        with Path(path).open() as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:3] != ["x", "d", "value"]:
                raise DomainError(f"unexpected CSV header {header!r}")
            for row in reader:
                xs.append(float(row[0]))
                vals.append(float(row[2]))
        grid = Grid1D(nodes=np.asarray(xs), grading_exponent=grading_exponent)
        return cls(grid, np.asarray(vals))
