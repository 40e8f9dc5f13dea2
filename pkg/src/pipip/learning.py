"""Payoff-based learning rules with two-step memory.

Each agent remembers its last two actions and the utilities they produced.
PIPIP keeps a worse remembered action with a small "irrational" probability;
DISL always reverts to the better one.  PHPIP is PIPIP with a constant
exploration rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .game import Game, JointAction, check_assumption1, check_assumption2


class Algorithm(str, enum.Enum):
    PIPIP = "PIPIP"
    PHPIP = "PHPIP"
    DISL = "DISL"


class AssumptionViolation(ValueError):
    """A standing assumption of the learning rule broke at runtime."""


@dataclass(slots=True)
class AgentMemory:
    """Last two actions ``a1`` (t-1), ``a2`` (t-2) and their utilities."""

    a1: int
    a2: int
    u1: float
    u2: float
    delta: float = 0.0

    @classmethod
    def initial(cls, action: int, utility: float) -> "AgentMemory":
        return cls(action, action, utility, utility, 0.0)

    def push(self, action: int, utility: float) -> None:
        self.a2, self.a1 = self.a1, action
        self.u2, self.u1 = self.u1, utility
        self.delta = self.u2 - self.u1


@dataclass
class LearnerParams:
    """``epsilon=None`` selects the decaying schedule ``t**(-1/(n(D+1)))``."""

    kappa: float = 0.5
    epsilon: float | None = None
    diameter: int | None = None


def exploration_rate(t: int, n: int, D: int) -> float:
    if t < 2 or n < 1 or D < 1:
        raise ValueError(f"exploration rate needs t >= 2, n >= 1, D >= 1 (got {t}, {n}, {D})")
    return t ** (-1.0 / (n * (D + 1)))


def diameter_D(game: Game) -> int:
    """Largest constraint-graph diameter over agents (all-pairs BFS)."""
    D = 0
    for i, table in enumerate(game.constraints):
        m = len(table)
        rows = [a for a, allowed in enumerate(table) for b in allowed if b != a]
        cols = [b for a, allowed in enumerate(table) for b in allowed if b != a]
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
        dist = shortest_path(graph, unweighted=True, directed=True)
        if not np.all(np.isfinite(dist)):
            raise ValueError(f"constraint graph of agent {i} is not connected")
        D = max(D, int(dist.max()))
    return D


def kappa_bounds(game: Game) -> tuple[float, float]:
    """Open-closed interval ``(1/(C-1), 1/2]`` admissible for the decaying schedule."""
    C = game.max_choices
    return (1.0 / (C - 1) if C > 1 else math.inf), 0.5


def branch_probabilities(memory: AgentMemory, choices: Sequence[int], eps: float, kappa: float):
    """Exploration set and probabilities ``(explore, keep a1, revert to a2)``.

    When the remembered utilities worsened and no fresh action remains, the
    exploration mass is dropped and the keep/revert split is renormalised.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"exploration rate {eps} outside [0, 1)")
    a1, a2 = memory.a1, memory.a2
    if memory.u1 >= memory.u2:
        explore = [c for c in choices if c != a1]
        if not explore:
            raise AssumptionViolation(f"no action to explore from {a1}")
        return explore, (eps, 1.0 - eps, 0.0)
    if memory.delta >= 1.0:
        raise AssumptionViolation(
            f"utility drop {memory.delta:.6g} >= 1; rescale utilities so unilateral gains stay below 1"
        )
    explore = [c for c in choices if c != a1 and c != a2]
    keep = kappa * eps**memory.delta
    if not explore:
        return explore, (0.0, keep, 1.0 - keep)
    return explore, (eps, (1.0 - eps) * keep, (1.0 - eps) * (1.0 - keep))


def _draw(memory, choices, eps, kappa, rng, size):
    explore, (p_explore, p_keep, _) = branch_probabilities(memory, choices, eps, kappa)
    u = rng.random(size)
    if size is None:
        if u < p_explore:
            return explore[rng.integers(len(explore))]
        return memory.a1 if u < p_explore + p_keep else memory.a2
    out = np.where(u < p_explore + p_keep, memory.a1, memory.a2)
    if explore:
        picks = np.asarray(explore)[rng.integers(len(explore), size=size)]
        out = np.where(u < p_explore, picks, out)
    return out


def pipip_step(
    memory: AgentMemory,
    choices: Sequence[int],
    eps: float,
    kappa: float,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw the next action of one agent under PIPIP.

    ``choices`` is ``R_i(a1)``.  With ``size`` a vector of independent draws
    from the same memory is returned (used for frequency checks).
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa {kappa} outside [0, 1]")
    return _draw(memory, choices, eps, kappa, rng, size)


def disl_step(memory: AgentMemory, choices: Sequence[int], eps: float, rng: np.random.Generator, size: int | None = None):
    """DISL: the PIPIP rule without irrational decisions."""
    return _draw(memory, choices, eps, 0.0, rng, size)


@dataclass
class EpisodeTrace:
    """Per-step record of one episode.

    Row 0 is the initial joint action (``t = 1``); decisions start at ``t = 2``.
    ``epsilon[0]`` is NaN because no decision was taken.
    """

    algorithm: Algorithm
    seed: int
    t: np.ndarray
    epsilon: np.ndarray
    actions: np.ndarray
    utilities: np.ndarray
    potential: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final_action(self) -> JointAction:
        return tuple(int(x) for x in self.actions[-1])

    def occupancy(self, burn_in: int = 0) -> dict[tuple[JointAction, JointAction], float]:
        """Empirical frequency of chain states ``(a(t-1), a(t))``."""
        counts: dict = {}
        rows = [tuple(int(x) for x in r) for r in self.actions]
        pairs = list(zip(rows[:-1], rows[1:]))[burn_in:]
        for z in pairs:
            counts[z] = counts.get(z, 0) + 1
        total = len(pairs)
        return {z: c / total for z, c in counts.items()}


def agent_streams(seed: int, n: int) -> list[np.random.Generator]:
    """One independent generator per agent, derived from ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def validate_for_learning(game: Game, max_joint: int = 10**5) -> None:
    """Reversibility/feasibility, exploration possible everywhere, bounded gains.

    The bounded-gain sweep is skipped for games above ``max_joint`` joint
    actions; the per-step check in the learning rule still catches violations.
    """
    report = check_assumption1(game, min_choices=2)
    if not report.passed:
        raise AssumptionViolation(f"constraint map fails {report.failed_clauses()}: {report.witnesses[:3]}")
    if game.joint_count <= max_joint:
        report = check_assumption2(game, max_joint)
        if not report.passed:
            raise AssumptionViolation(f"bounded-gain assumption fails: {report.witnesses[:3]}")


def run_episode(
    game: Game,
    algorithm: Algorithm | str,
    params: LearnerParams,
    horizon: int,
    seed: int,
    initial: Sequence[int],
    validate: bool = True,
    time_varying: bool = False,
) -> EpisodeTrace:
    """Run one synchronous episode up to iteration ``t = horizon``.

    All agents draw from their own memories, then the new joint action is
    evaluated once and every memory is updated.  With ``time_varying`` the
    game's oracles receive the iteration index ``t``.
    """
    algorithm = Algorithm(algorithm)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    a = game.validate_joint(initial)
    if validate:
        validate_for_learning(game)
    n = game.n_agents
    if algorithm is Algorithm.PIPIP:
        lo, hi = kappa_bounds(game)
        if not lo < params.kappa <= hi:
            raise ValueError(f"kappa {params.kappa} outside ({lo:.4g}, {hi}] for C={game.max_choices}")
        D = params.diameter if params.diameter is not None else diameter_D(game)
        rate: Callable[[int], float] = lambda t: exploration_rate(t, n, D)
    else:
        if params.epsilon is None:
            raise ValueError(f"{algorithm.value} needs a constant exploration rate")
        if not 0.0 < params.epsilon <= 0.5:
            raise ValueError(f"constant exploration rate {params.epsilon} outside (0, 1/2]")
        rate = lambda t: params.epsilon
    if algorithm is not Algorithm.DISL and not 0.0 < params.kappa <= 0.5:
        raise ValueError(f"kappa {params.kappa} outside (0, 1/2]")
    kappa = 0.0 if algorithm is Algorithm.DISL else params.kappa

    clock = (lambda t: t) if time_varying else (lambda t: None)
    has_phi = game.has_potential
    rngs = agent_streams(seed, n)

    ts = np.arange(1, horizon + 1)
    eps_log = np.full(horizon, np.nan)
    actions = np.empty((horizon, n), dtype=np.int64)
    utils = np.empty((horizon, n))
    phis = np.empty(horizon) if has_phi else None

    u = game.utilities(a, clock(1))
    memories = [AgentMemory.initial(a[i], float(u[i])) for i in range(n)]
    actions[0], utils[0] = a, u
    if has_phi:
        phis[0] = game.potential(a, clock(1))

    constraints = game.constraints
    for row in range(1, horizon):
        t = row + 1
        eps = rate(t)
        a = tuple(
            int(_draw(memories[i], constraints[i][memories[i].a1], eps, kappa, rngs[i], None))
            for i in range(n)
        )
        u = game.utilities(a, clock(t))
        for i in range(n):
            memories[i].push(a[i], float(u[i]))
        eps_log[row] = eps
        actions[row], utils[row] = a, u
        if has_phi:
            phis[row] = game.potential(a, clock(t))

    return EpisodeTrace(algorithm, seed, ts, eps_log, actions, utils, phis)
