"""Sensor coverage on a grid as a constrained potential game.

Agents sit on cell centres of a rectangular grid and sense every cell within
a fixed radius.  A cell's density is shared equally between the agents that
sense it (the utility), and the group objective sums ``W(q) / l`` for
``l = 1..n_q`` over all cells (the potential).  Obstacle cells cannot be
occupied but are still sensed and still carry density.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .game import Game, check_assumption1, king_move_constraints

GAUSSIAN_SHAPE = 25.0 / 9.0
DISTANCE_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Cells are numbered row-major: ``k = row * width + col``."""

    width: int = 9
    height: int = 6
    side: float = 0.3
    offset: float = 0.15

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.side <= 0:
            raise ValueError(f"invalid grid {self}")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def centers(self) -> np.ndarray:
        rows, cols = np.divmod(np.arange(self.n_cells), self.width)
        return np.column_stack([self.offset + self.side * cols, self.offset + self.side * rows])

    def cell_at(self, point: Sequence[float]) -> int:
        x, y = point
        col = round((x - self.offset) / self.side)
        row = round((y - self.offset) / self.side)
        if not (0 <= col < self.width and 0 <= row < self.height):
            raise ValueError(f"point {point} is outside the grid")
        k = row * self.width + col
        if np.hypot(*(self.centers()[k] - np.asarray(point, dtype=float))) > 1e-6:
            raise ValueError(f"point {point} is not a cell centre")
        return k


def moving_mean(t: float) -> tuple[float, float]:
    """Mean of the drifting Gaussian: parked, then a straight sweep, then parked."""
    if t <= 300:
        return 0.45, 0.45
    if t < 700:
        return 0.00375 * t - 0.675, 0.00225 * t - 0.225
    return 1.95, 1.35


@dataclass(frozen=True)
class DensityField:
    """Unscaled density ``W``.

    ``kind`` is one of ``uniform``, ``static-gaussian``, ``moving-gaussian``
    or ``tabulated`` (one value per cell, row-major).
    """

    kind: str = "uniform"
    mean: tuple[float, float] = (1.95, 1.35)
    shape: float = GAUSSIAN_SHAPE
    value: float = 1.0
    table: tuple[float, ...] | None = None

    KINDS = ("uniform", "static-gaussian", "moving-gaussian", "tabulated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.table is None:
                raise ValueError("tabulated density needs a table")
            if min(self.table) < 0:
                raise ValueError("density values must be nonnegative")
        if self.value < 0:
            raise ValueError("density values must be nonnegative")

    @property
    def time_varying(self) -> bool:
        return self.kind == "moving-gaussian"

    def mean_at(self, t: float | None) -> tuple[float, float]:
        if self.kind == "moving-gaussian":
            return moving_mean(0 if t is None else t)
        return self.mean

    def evaluate(self, points: np.ndarray, t: float | None = None) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == "uniform":
            return np.full(len(points), float(self.value))
        if self.kind == "tabulated":
            table = np.asarray(self.table, dtype=float)
            if len(table) != len(points):
                raise ValueError(f"density table has {len(table)} cells, grid has {len(points)}")
            return table.copy()
        mu = np.asarray(self.mean_at(t))
        return np.exp(-self.shape * np.sum((points - mu) ** 2, axis=1))

    @classmethod
    def from_table_text(cls, text: str) -> "DensityField":
        values = tuple(float(line.split()[0]) for line in text.splitlines() if line.strip())
        return cls(kind="tabulated", table=values)


@dataclass(frozen=True)
class CoverageWorld:
    """Grid, density, obstacle cells and sensing radius.

    ``scale=None`` picks the factor that keeps every utility below
    ``1 - margin``; a number fixes it.
    """

    grid: GridSpec = field(default_factory=GridSpec)
    density: DensityField = field(default_factory=DensityField)
    obstacles: tuple[int, ...] = ()
    sensing_radius: float = 0.3
    scale: float | None = None
    margin: float = 0.01

    @classmethod
    def from_points(cls, grid: GridSpec, density: DensityField, obstacle_points=(), **kw) -> "CoverageWorld":
        return cls(grid, density, tuple(sorted(grid.cell_at(p) for p in obstacle_points)), **kw)

    @cached_property
    def centers(self) -> np.ndarray:
        return self.grid.centers()

    @cached_property
    def free_cells(self) -> tuple[int, ...]:
        blocked = set(self.obstacles)
        return tuple(k for k in range(self.grid.n_cells) if k not in blocked)

    @cached_property
    def sensing(self) -> np.ndarray:
        """``sensing[k, q]`` is True when an agent on cell ``k`` senses cell ``q``."""
        c = self.centers
        dist = np.hypot(c[:, None, 0] - c[None, :, 0], c[:, None, 1] - c[None, :, 1])
        return dist <= self.sensing_radius + DISTANCE_TOL

    @cached_property
    def scale_factor(self) -> float:
        return scale_for_assumption2(self) if self.scale is None else float(self.scale)

    def raw_density(self, t: float | None = None) -> np.ndarray:
        return self.density.evaluate(self.centers, t)

    def density_vector(self, t: float | None = None) -> np.ndarray:
        return self.scale_factor * self.raw_density(t)


# -- elementary quantities -----------------------------------------------------


def sensing_set(world: CoverageWorld, cell: int) -> frozenset[int]:
    return frozenset(np.flatnonzero(world.sensing[cell]).tolist())


def _counts(world: CoverageWorld, cells: Sequence[int]) -> np.ndarray:
    return world.sensing[np.asarray(cells, dtype=int)].sum(axis=0)


def coverage_count(world: CoverageWorld, cells: Sequence[int], q: int) -> int:
    """Number of agents (on ``cells``) that sense cell ``q``."""
    return int(_counts(world, cells)[q]) if len(cells) else 0


_HARMONIC = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, 257))])


def harmonic(n):
    return _HARMONIC[n]


def coverage_potential(world: CoverageWorld, cells: Sequence[int], t: float | None = None) -> float:
    if len(cells) == 0:
        return 0.0
    return float(np.dot(world.density_vector(t), harmonic(_counts(world, cells))))


def coverage_utilities(world: CoverageWorld, cells: Sequence[int], t: float | None = None) -> np.ndarray:
    """Each agent's equal share of the density it senses."""
    rows = world.sensing[np.asarray(cells, dtype=int)]
    counts = rows.sum(axis=0)
    share = world.density_vector(t) / np.maximum(counts, 1)
    return rows @ share


def coverage_utility(world: CoverageWorld, i: int, cells: Sequence[int], t: float | None = None) -> float:
    return float(coverage_utilities(world, cells, t)[i])


def density_at(world: CoverageWorld, q: int, t: float = 0) -> float:
    if t < 0:
        raise ValueError("time must be nonnegative")
    return float(world.density_vector(t)[q])


def _peak_times(density: DensityField):
    return range(0, 701) if density.time_varying else [None]


def scale_for_assumption2(world: CoverageWorld) -> float:
    """``(1 - margin) / U_max`` where ``U_max`` is the best lone-agent utility.

    Every utility then lies in ``[0, 1 - margin]``, so no change in utility,
    unilateral or not, can reach 1.  A moving density is scanned over its
    whole schedule.
    """
    free = np.asarray(world.free_cells)
    sensed = world.sensing[free].astype(float)
    u_max = max(float((sensed @ world.raw_density(t)).max()) for t in _peak_times(world.density))
    if u_max <= 0:
        return 1.0
    return (1.0 - world.margin) / u_max


# -- the game ------------------------------------------------------------------


class CoverageGame(Game):
    """Coverage game over the free cells; action ``k`` of any agent is cell ``cells[k]``."""

    def __init__(self, world: CoverageWorld, n_agents: int, name: str = "coverage"):
        table, cells = king_move_constraints(world.grid.width, world.grid.height, world.obstacles)
        super().__init__([table] * n_agents, lambda a: None, lambda a: None, name=name)
        self.world = world
        self.cells = np.asarray(cells, dtype=int)
        self.time_varying = world.density.time_varying
        self._density_cache: dict = {}

    def _density(self, t):
        key = t if self.time_varying else None
        w = self._density_cache.get(key)
        if w is None:
            if len(self._density_cache) > 4096:
                self._density_cache.clear()
            w = self._density_cache[key] = self.world.density_vector(key)
        return w

    def action_of(self, cell: int) -> int:
        hits = np.flatnonzero(self.cells == cell)
        if len(hits) == 0:
            raise ValueError(f"cell {cell} is an obstacle")
        return int(hits[0])

    def utilities(self, a, t=None) -> np.ndarray:
        rows = self.world.sensing[self.cells[list(a)]]
        counts = rows.sum(axis=0)
        return rows @ (self._density(t) / np.maximum(counts, 1))

    def potential(self, a, t=None) -> float:
        counts = self.world.sensing[self.cells[list(a)]].sum(axis=0)
        return float(np.dot(self._density(t), _HARMONIC[counts]))


def build_coverage_game(world: CoverageWorld, n_agents: int = 4, name: str = "coverage") -> CoverageGame:
    """Assemble the game and reject constraint maps that break connectivity or ``|R| >= 3``."""
    if n_agents < 1:
        raise ValueError("need at least one agent")
    game = CoverageGame(world, n_agents, name)
    report = check_assumption1(game)
    if not report.passed:
        raise ValueError(f"coverage world fails {report.failed_clauses()}: {report.witnesses[:3]}")
    return game


# -- optimum search ------------------------------------------------------------


def _multisets(n_free: int, n_agents: int) -> int:
    return math.comb(n_free + n_agents - 1, n_agents)


def optimum_values(
    world: CoverageWorld,
    n_agents: int,
    densities: np.ndarray,
    chunk: int = 20000,
    max_multisets: int = 10**6,
):
    """Exact ``max_a phi(a)`` for each row of ``densities`` (scaled, per cell).

    The potential is symmetric in agents, so it is enough to scan multisets
    of free cells.  Returns ``(values, best_cells)``.
    """
    free = np.asarray(world.free_cells)
    if _multisets(len(free), n_agents) > max_multisets:
        raise ValueError("too many placements for an exact search")
    W = np.atleast_2d(np.asarray(densities, dtype=float))
    best = np.full(len(W), -np.inf)
    arg = np.zeros((len(W), n_agents), dtype=int)
    S = world.sensing.astype(np.int16)
    combos = itertools.combinations_with_replacement(range(len(free)), n_agents)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=int)
        if block.size == 0:
            break
        cells = free[block]
        counts = S[cells].sum(axis=1)
        values = _HARMONIC[counts] @ W.T
        idx = values.argmax(axis=0)
        top = values[idx, np.arange(len(W))]
        better = top > best
        best[better] = top[better]
        arg[better] = cells[idx[better]]
    return best, arg


def greedy_optimum(world: CoverageWorld, n_agents: int, t: float | None = None):
    """Greedy placement followed by single-agent relocation until no gain."""
    free = list(world.free_cells)
    cells: list[int] = []
    for _ in range(n_agents):
        cells.append(max(free, key=lambda k: coverage_potential(world, cells + [k], t)))
    value = coverage_potential(world, cells, t)
    improved = True
    while improved:
        improved = False
        for i in range(n_agents):
            for k in free:
                trial = cells[:i] + [k] + cells[i + 1:]
                v = coverage_potential(world, trial, t)
                if v > value + 1e-12:
                    cells, value, improved = trial, v, True
    return value, np.array(cells)


def coverage_optimum(world: CoverageWorld, n_agents: int, t: float | None = None, max_multisets: int = 10**6):
    """``(value, cells, method)`` with ``method`` ``"exact"`` or ``"greedy"``."""
    if _multisets(len(world.free_cells), n_agents) <= max_multisets:
        values, cells = optimum_values(world, n_agents, world.density_vector(t)[None, :])
        return float(values[0]), cells[0], "exact"
    value, cells = greedy_optimum(world, n_agents, t)
    return value, cells, "greedy"
