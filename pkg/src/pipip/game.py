"""Constrained strategic games with an optional potential function.

A game is described by per-agent constraint maps ``R_i(a_i)`` (the actions
agent ``i`` may pick next when it currently plays ``a_i``) and a utility
oracle evaluated on joint actions.  Everything in this module is a pure
function of the game, so small games can be checked exhaustively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

JointAction = tuple[int, ...]

DEFAULT_MAX_JOINT = 10**6
IDENTITY_TOL = 1e-9
TIE_TOL = 1e-12


class GuardExceeded(ValueError):
    """Raised when an exhaustive computation would exceed its size guard."""


class Game:
    """A finite constrained game.

    Parameters
    ----------
    constraints : sequence of sequences of iterables
        ``constraints[i][a]`` is ``R_i(a)``, the restricted action set of
        agent ``i`` when it currently plays action ``a``.
    utility_fn : callable
        Maps a joint action to the vector of all agents' utilities.
    potential_fn : callable, optional
        Maps a joint action to the potential value.
    name : str
        Label used in reports.
    """

    def __init__(
        self,
        constraints: Sequence[Sequence[Sequence[int]]],
        utility_fn: Callable[[JointAction], Sequence[float]],
        potential_fn: Callable[[JointAction], float] | None = None,
        name: str = "",
    ):
        if len(constraints) == 0:
            raise ValueError("a game needs at least one agent")
        cons = []
        for i, table in enumerate(constraints):
            m = len(table)
            if m == 0:
                raise ValueError(f"agent {i} has an empty action set")
            rows = []
            for a, allowed in enumerate(table):
                row = tuple(sorted(set(int(b) for b in allowed)))
                if not row:
                    raise ValueError(f"R_{i}({a}) is empty")
                if row[0] < 0 or row[-1] >= m:
                    raise ValueError(f"R_{i}({a}) refers to an unknown action")
                rows.append(row)
            cons.append(tuple(rows))
        self.constraints: tuple[tuple[tuple[int, ...], ...], ...] = tuple(cons)
        self._utility_fn = utility_fn
        self._potential_fn = potential_fn
        self.name = name
        self._tables: dict[str, np.ndarray] = {}

    # -- structure -----------------------------------------------------------

    @property
    def n_agents(self) -> int:
        return len(self.constraints)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.constraints)

    @property
    def joint_count(self) -> int:
        return int(np.prod(self.action_counts, dtype=object))

    @property
    def max_choices(self) -> int:
        """``C = max_i max_a |R_i(a)|``."""
        return max(len(r) for table in self.constraints for r in table)

    @property
    def has_potential(self) -> bool:
        return self._potential_fn is not None

    def restricted(self, i: int, a_i: int) -> tuple[int, ...]:
        return self.constraints[i][a_i]

    def joint_actions(self, max_joint: int = DEFAULT_MAX_JOINT) -> Iterator[JointAction]:
        if self.joint_count > max_joint:
            raise GuardExceeded(
                f"{self.joint_count} joint actions exceed the guard of {max_joint}"
            )
        return itertools.product(*(range(m) for m in self.action_counts))

    def validate_joint(self, a: Sequence[int]) -> JointAction:
        a = tuple(int(x) for x in a)
        if len(a) != self.n_agents:
            raise ValueError(f"joint action has {len(a)} entries, expected {self.n_agents}")
        for i, (x, m) in enumerate(zip(a, self.action_counts)):
            if not 0 <= x < m:
                raise IndexError(f"action {x} out of range for agent {i}")
        return a

    # -- oracles ---------------------------------------------------------------

    def utilities(self, a: JointAction, t: int | None = None) -> np.ndarray:
        """Utilities of all agents at joint action ``a``.

        ``t`` is ignored by static games; time-varying subclasses use it.
        """
        return np.asarray(self._utility_fn(tuple(a)), dtype=float)

    def utility(self, i: int, a: JointAction, t: int | None = None) -> float:
        return float(self.utilities(a, t)[i])

    def potential(self, a: JointAction, t: int | None = None) -> float:
        if self._potential_fn is None:
            raise ValueError(f"game {self.name!r} has no potential oracle")
        return float(self._potential_fn(tuple(a)))

    def utility_table(self, max_joint: int = DEFAULT_MAX_JOINT) -> np.ndarray:
        """All utilities as an array of shape ``(*action_counts, n_agents)``."""
        if "u" not in self._tables:
            table = np.empty(self.action_counts + (self.n_agents,))
            for a in self.joint_actions(max_joint):
                table[a] = self.utilities(a)
            if not np.all(np.isfinite(table)):
                raise ValueError("utilities must be finite")
            self._tables["u"] = table
        return self._tables["u"]

    def potential_table(self, max_joint: int = DEFAULT_MAX_JOINT) -> np.ndarray:
        if "phi" not in self._tables:
            if self._potential_fn is None:
                raise ValueError(f"game {self.name!r} has no potential oracle")
            table = np.empty(self.action_counts)
            for a in self.joint_actions(max_joint):
                table[a] = self.potential(a)
            self._tables["phi"] = table
        return self._tables["phi"]

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_arrays(
        cls,
        utilities: np.ndarray,
        potential: np.ndarray | None = None,
        constraints: Sequence[Sequence[Sequence[int]]] | None = None,
        name: str = "",
    ) -> "Game":
        """Tabulated game; ``utilities`` has shape ``(*action_counts, n)``.

        Without ``constraints`` every agent may switch to any of its actions.
        """
        u = np.array(utilities, dtype=float)
        counts = u.shape[:-1]
        if len(counts) != u.shape[-1]:
            raise ValueError("last axis of the utility table must index agents")
        phi = None if potential is None else np.array(potential, dtype=float)
        if phi is not None and phi.shape != counts:
            raise ValueError("potential table shape does not match the action counts")
        if constraints is None:
            constraints = [complete_constraints(m) for m in counts]
        game = cls(
            constraints,
            lambda a: u[a],
            None if phi is None else (lambda a: phi[a]),
            name=name,
        )
        game._tables["u"] = u
        if phi is not None:
            game._tables["phi"] = phi
        return game

    @classmethod
    def identical_interest(
        cls,
        potential: np.ndarray,
        constraints: Sequence[Sequence[Sequence[int]]] | None = None,
        name: str = "",
    ) -> "Game":
        """Every agent's utility equals the potential."""
        phi = np.array(potential, dtype=float)
        u = np.repeat(phi[..., None], phi.ndim, axis=-1)
        return cls.from_arrays(u, phi, constraints, name=name)

    def __repr__(self) -> str:
        return f"Game({self.name!r}, n={self.n_agents}, actions={self.action_counts})"


# -- constraint-map helpers ----------------------------------------------------


def complete_constraints(m: int) -> list[list[int]]:
    return [list(range(m)) for _ in range(m)]


def path_constraints(m: int) -> list[list[int]]:
    """Line graph ``0 - 1 - ... - m-1`` where staying is always allowed."""
    return [[b for b in (a - 1, a, a + 1) if 0 <= b < m] for a in range(m)]


def king_move_constraints(width: int, height: int, blocked=()) -> tuple[list[list[int]], list[int]]:
    """King-move neighbourhoods (self included) on a ``width x height`` grid.

    Cells are numbered row-major, ``k = row * width + col``.  Blocked cells are
    dropped from the action set.  Returns the constraint map over the
    remaining actions and the list mapping action index to cell index.
    """
    blocked = set(blocked)
    cells = [k for k in range(width * height) if k not in blocked]
    index = {k: n for n, k in enumerate(cells)}
    table = []
    for k in cells:
        row, col = divmod(k, width)
        nbrs = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                r, c = row + dr, col + dc
                if 0 <= r < height and 0 <= c < width:
                    q = r * width + c
                    if q in index:
                        nbrs.append(index[q])
        table.append(nbrs)
    return table, cells


# -- assumption checks ---------------------------------------------------------


@dataclass
class Witness:
    clause: str
    agent: int
    action: object
    deviation: object = None
    value: float | None = None


@dataclass
class AssumptionReport:
    """Outcome of a standing-assumption check.

    ``clauses`` maps each clause name to its verdict; every failed clause
    has at least one entry in ``witnesses``.
    """

    clauses: dict[str, bool] = field(default_factory=dict)
    witnesses: list[Witness] = field(default_factory=list)
    max_value: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def __bool__(self) -> bool:
        return self.passed

    def failed_clauses(self) -> list[str]:
        return [k for k, ok in self.clauses.items() if not ok]


def restricted_actions(game: Game, i: int, a_i: int) -> tuple[int, ...]:
    if not 0 <= i < game.n_agents:
        raise IndexError(f"agent {i} out of range")
    if not 0 <= a_i < game.action_counts[i]:
        raise IndexError(f"action {a_i} out of range for agent {i}")
    return game.restricted(i, a_i)


def _constraint_graph(table) -> csr_matrix:
    m = len(table)
    rows = [a for a, allowed in enumerate(table) for _ in allowed]
    cols = [b for allowed in table for b in allowed]
    return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))


def check_assumption1(game: Game, min_choices: int = 3) -> AssumptionReport:
    """Reversibility, feasibility (strong connectivity) and ``|R_i| >= 3``."""
    report = AssumptionReport(
        clauses={"reversibility": True, "feasibility": True, "cardinality": True}
    )
    for i, table in enumerate(game.constraints):
        sets = [set(r) for r in table]
        for a, allowed in enumerate(table):
            for b in allowed:
                if a not in sets[b]:
                    report.clauses["reversibility"] = False
                    report.witnesses.append(Witness("reversibility", i, a, b))
            if len(allowed) < min_choices:
                report.clauses["cardinality"] = False
                report.witnesses.append(Witness("cardinality", i, a, value=len(allowed)))
        ncomp, labels = connected_components(_constraint_graph(table), directed=True, connection="strong")
        if ncomp > 1:
            report.clauses["feasibility"] = False
            stray = int(np.flatnonzero(labels != labels[0])[0])
            report.witnesses.append(Witness("feasibility", i, 0, stray))
    return report


def _single_deviations(game: Game, max_joint: int):
    """Yield ``(i, a, a')`` for every constrained single-agent deviation."""
    for a in game.joint_actions(max_joint):
        for i in range(game.n_agents):
            for b in game.constraints[i][a[i]]:
                if b != a[i]:
                    yield i, a, a[:i] + (b,) + a[i + 1:]


def check_assumption2(game: Game, max_joint: int = DEFAULT_MAX_JOINT) -> AssumptionReport:
    """Every constrained unilateral deviation changes the mover's utility by < 1."""
    u = game.utility_table(max_joint)
    report = AssumptionReport(clauses={"bounded_gain": True})
    for i, a, b in _single_deviations(game, max_joint):
        gain = u[b][i] - u[a][i]
        report.max_value = max(report.max_value, abs(gain))
        if gain >= 1:
            report.clauses["bounded_gain"] = False
            report.witnesses.append(Witness("bounded_gain", i, a, b, gain))
    return report


def verify_potential_identity(
    game: Game, tol: float = IDENTITY_TOL, max_joint: int = DEFAULT_MAX_JOINT
) -> AssumptionReport:
    """Check that unilateral utility changes equal potential changes."""
    if not game.has_potential:
        raise ValueError(f"game {game.name!r} has no potential oracle")
    u = game.utility_table(max_joint)
    phi = game.potential_table(max_joint)
    report = AssumptionReport(clauses={"potential_identity": True})
    for i, a, b in _single_deviations(game, max_joint):
        resid = abs((u[b][i] - u[a][i]) - (phi[b] - phi[a]))
        report.max_value = max(report.max_value, resid)
        if resid > tol:
            report.clauses["potential_identity"] = False
            report.witnesses.append(Witness("potential_identity", i, a, b, resid))
    return report


# -- equilibria ----------------------------------------------------------------


def enumerate_nash(game: Game, max_joint: int = DEFAULT_MAX_JOINT, tol: float = TIE_TOL) -> set[JointAction]:
    """All constrained pure Nash equilibria (ties count as equilibria)."""
    u = game.utility_table(max_joint)
    result = set()
    for a in game.joint_actions(max_joint):
        stable = True
        for i in range(game.n_agents):
            own = u[a][i]
            for b in game.constraints[i][a[i]]:
                if u[a[:i] + (b,) + a[i + 1:]][i] > own + tol:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            result.add(a)
    return result


def optimal_nash(game: Game, max_joint: int = DEFAULT_MAX_JOINT, tol: float = IDENTITY_TOL) -> set[JointAction]:
    """Potential maximizers; each one must also be a constrained Nash equilibrium."""
    phi = game.potential_table(max_joint)
    best = phi.max()
    maximizers = {tuple(int(x) for x in idx) for idx in np.argwhere(phi >= best - tol)}
    missing = maximizers - enumerate_nash(game, max_joint, tol)
    if missing:
        raise AssertionError(
            f"potential maximizers {sorted(missing)} are not Nash equilibria; "
            "the potential oracle does not match the utilities"
        )
    return maximizers
