"""Exact Markov chain induced by PHPIP on small games.

States are pairs ``z = (a(t-1), a(t))`` of consecutive joint actions that
respect the constraint maps.  The module builds the transition matrix from
the per-agent product formula, derives transition resistances (the exponent
of the leading power of epsilon), and uses them to compute recurrent
classes, minimal-resistance weights between absorbing states, stochastic
potentials and stationary distributions.
"""

from __future__ import annotations

import csv
import heapq
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .game import Game, GuardExceeded, JointAction, optimal_nash

DEFAULT_MAX_STATES = 10**5
DIRECT_SOLVE_LIMIT = 2000
EXHAUSTIVE_TREE_LIMIT = 6


class CertificationError(AssertionError):
    """A numerical check of a structural property of the chain failed."""


class ChainState(NamedTuple):
    prev: JointAction
    curr: JointAction

    @property
    def on_diagonal(self) -> bool:
        return self.prev == self.curr


# agent classes along a transition (a0, a1) -> (a1, a2)
INFEASIBLE, EXPLORE_AFTER_GAIN, STAY_AFTER_GAIN, EXPLORE_AFTER_LOSS, KEEP_AFTER_LOSS, REVERT_AFTER_LOSS = range(6)


def _agent_class(a0: int, a1: int, a2: int, u0: float, u1: float, choices: Sequence[int]) -> int:
    if a2 not in choices:
        return INFEASIBLE
    if u1 >= u0:
        return STAY_AFTER_GAIN if a2 == a1 else EXPLORE_AFTER_GAIN
    if a2 == a1:
        # an agent that did not move keeps and reverts to the same action
        return REVERT_AFTER_LOSS if a0 == a1 else KEEP_AFTER_LOSS
    if a2 == a0:
        return REVERT_AFTER_LOSS
    return EXPLORE_AFTER_LOSS


def _factors(cls, delta, n_choices, h, eps, kappa):
    """Per-agent transition factors, vectorised over arrays of agent records."""
    cls = np.asarray(cls)
    delta = np.asarray(delta, dtype=float)
    n_choices = np.asarray(n_choices, dtype=float)
    h = np.asarray(h, dtype=float)
    keep = kappa * np.power(eps, np.where((cls == KEEP_AFTER_LOSS) | (cls == REVERT_AFTER_LOSS), delta, 1.0))
    fresh = n_choices - h
    no_fresh = fresh <= 0
    stay = 1.0 - eps
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.select(
            [
                cls == EXPLORE_AFTER_GAIN,
                cls == STAY_AFTER_GAIN,
                cls == EXPLORE_AFTER_LOSS,
                cls == KEEP_AFTER_LOSS,
                (cls == REVERT_AFTER_LOSS) & (h == 1),
                cls == REVERT_AFTER_LOSS,
            ],
            [
                eps / np.maximum(n_choices - 1, 1),
                np.broadcast_to(stay, cls.shape),
                eps / np.maximum(fresh, 1),
                np.where(no_fresh, keep, stay * keep),
                np.broadcast_to(stay, cls.shape),
                np.where(no_fresh, 1.0 - keep, stay * (1.0 - keep)),
            ],
            default=0.0,
        )
    return out


def _resistances(cls, delta):
    cls = np.asarray(cls)
    return np.select(
        [
            (cls == EXPLORE_AFTER_GAIN) | (cls == EXPLORE_AFTER_LOSS),
            cls == KEEP_AFTER_LOSS,
            cls == INFEASIBLE,
        ],
        [1.0, np.asarray(delta, dtype=float), np.inf],
        default=0.0,
    )


# -- single transitions --------------------------------------------------------


@dataclass(frozen=True)
class AgentPartition:
    """Agents grouped by their behaviour along one transition.

    ``lam[k]`` for ``k = 1..5``: explore after a gain, stay after a gain,
    explore after a loss, keep the worse action, revert to the better one.
    ``merged`` lists agents that lost utility without moving; for them
    keeping and reverting are the same action and they sit in ``lam[5]``.
    """

    lam: tuple[frozenset, frozenset, frozenset, frozenset, frozenset, frozenset]
    merged: frozenset = frozenset()

    def __getitem__(self, k: int) -> frozenset:
        return self.lam[k]


def _check_chaining(z1: ChainState, z2: ChainState) -> None:
    if tuple(z2[0]) != tuple(z1[1]):
        raise ValueError(f"transition {z1} -> {z2} does not chain: {z2[0]} != {z1[1]}")


def _agent_records(z1: ChainState, z2: ChainState, game: Game):
    _check_chaining(z1, z2)
    a0, a1 = tuple(z1[0]), tuple(z1[1])
    a2 = tuple(z2[1])
    u0, u1 = game.utilities(a0), game.utilities(a1)
    records = []
    for i in range(game.n_agents):
        choices = game.constraints[i][a1[i]]
        cls = _agent_class(a0[i], a1[i], a2[i], u0[i], u1[i], choices)
        records.append((cls, u0[i] - u1[i], len(choices), 1 if a0[i] == a1[i] else 2))
    return records


def partition_agents(z1: ChainState, z2: ChainState, game: Game) -> AgentPartition | None:
    """Classify agents along ``z1 -> z2``; ``None`` when the move is impossible."""
    records = _agent_records(z1, z2, game)
    groups = [set() for _ in range(6)]
    merged = set()
    for i, (cls, _, _, h) in enumerate(records):
        if cls == INFEASIBLE:
            return None
        groups[cls].add(i)
        if cls == REVERT_AFTER_LOSS and h == 1:
            merged.add(i)
    return AgentPartition(tuple(frozenset(g) for g in groups), frozenset(merged))


def transition_probability(z1: ChainState, z2: ChainState, eps: float, kappa: float, game: Game) -> float:
    records = _agent_records(z1, z2, game)
    cls, delta, nr, h = (np.array(col) for col in zip(*records))
    return float(np.prod(_factors(cls, delta, nr, h, eps, kappa)))


def transition_resistance(z1: ChainState, z2: ChainState, game: Game) -> float:
    """Number of explorers plus the utility drops of agents keeping a worse action."""
    records = _agent_records(z1, z2, game)
    cls, delta, _, _ = (np.array(col) for col in zip(*records))
    return float(np.sum(_resistances(cls, delta)))


# -- the full chain ------------------------------------------------------------


def state_space_B(game: Game, max_states: int = DEFAULT_MAX_STATES) -> list[ChainState]:
    size = 1
    for table in game.constraints:
        size *= sum(len(r) for r in table)
    if size > max_states:
        raise GuardExceeded(f"state space has {size} states, guard is {max_states}")
    states = []
    for a in game.joint_actions():
        for b in itertools.product(*(game.constraints[i][a[i]] for i in range(game.n_agents))):
            states.append(ChainState(a, tuple(b)))
    return states


class ChainModel:
    """All feasible transitions of the PHPIP chain, with their agent records.

    Probabilities for any ``(eps, kappa)`` are assembled on demand; the
    structure (which transitions exist, who explores, utility drops) is
    computed once.
    """

    def __init__(self, game: Game, max_states: int = DEFAULT_MAX_STATES):
        self.game = game
        self.states = state_space_B(game, max_states)
        self.index = {z: k for k, z in enumerate(self.states)}
        self.diagonal = [k for k, z in enumerate(self.states) if z.on_diagonal]
        n = game.n_agents
        u = game.utility_table()

        rows, cols, cls, delta, nr, hh = [], [], [], [], [], []
        for s, (a0, a1) in enumerate(self.states):
            u0, u1 = u[a0], u[a1]
            options = []
            for i in range(n):
                choices = game.constraints[i][a1[i]]
                h = 1 if a0[i] == a1[i] else 2
                opts = [
                    (b, _agent_class(a0[i], a1[i], b, u0[i], u1[i], choices), u0[i] - u1[i], len(choices), h)
                    for b in choices
                ]
                options.append(opts)
            for combo in itertools.product(*options):
                a2 = tuple(rec[0] for rec in combo)
                rows.append(s)
                cols.append(self.index[ChainState(a1, a2)])
                cls.append([rec[1] for rec in combo])
                delta.append([rec[2] for rec in combo])
                nr.append([rec[3] for rec in combo])
                hh.append([rec[4] for rec in combo])
        self.rows = np.array(rows)
        self.cols = np.array(cols)
        self.classes = np.array(cls, dtype=np.int8).reshape(-1, n)
        self.deltas = np.array(delta, dtype=float).reshape(-1, n)
        self.n_choices = np.array(nr).reshape(-1, n)
        self.h = np.array(hh).reshape(-1, n)
        self.resistance = _resistances(self.classes, self.deltas).sum(axis=1)

    def __len__(self) -> int:
        return len(self.states)

    def matrix(self, eps: float, kappa: float) -> sparse.csr_matrix:
        f = _factors(self.classes, self.deltas, self.n_choices, self.h, eps, kappa)
        vals = np.prod(f, axis=1)
        m = len(self.states)
        return sparse.csr_matrix((vals, (self.rows, self.cols)), shape=(m, m))

    def adjacency(self):
        """Successor lists ``[(target, resistance), ...]`` per state."""
        adj = [[] for _ in self.states]
        for s, t, r in zip(self.rows, self.cols, self.resistance):
            adj[s].append((int(t), float(r)))
        return adj


# -- recurrent classes ---------------------------------------------------------


def recurrent_classes_unperturbed(game: Game, model: ChainModel | None = None) -> list[frozenset]:
    """Closed communication classes of the exploration-free chain.

    Raises :class:`CertificationError` unless they are exactly the singletons
    ``{(a, a)}``.
    """
    model = model or ChainModel(game)
    P0 = model.matrix(0.0, 0.5)
    P0.data[P0.data <= 0] = 0
    P0.eliminate_zeros()
    ncomp, labels = connected_components(P0, directed=True, connection="strong")
    closed = np.ones(ncomp, dtype=bool)
    coo = P0.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    closed[np.unique(labels[coo.row[leaving]])] = False
    classes = [
        frozenset(model.states[k] for k in np.flatnonzero(labels == c)) for c in np.flatnonzero(closed)
    ]
    expected = {frozenset([model.states[k]]) for k in model.diagonal}
    if set(classes) != expected:
        extra = [sorted(c) for c in classes if c not in expected][:3]
        raise CertificationError(f"recurrent classes differ from the diagonal singletons, e.g. {extra}")
    return classes


# -- resistance graph ----------------------------------------------------------


def in_single(a: JointAction, b: JointAction, game: Game) -> bool:
    """True when exactly one agent differs and its move is allowed."""
    diff = [i for i in range(game.n_agents) if a[i] != b[i]]
    return len(diff) == 1 and a[diff[0]] in game.constraints[diff[0]][b[diff[0]]]


@dataclass
class ResistanceGraph:
    """Minimal path resistances between the absorbing states ``(a, a)``.

    ``weights[l, k]`` is the least total resistance of a path from node ``l``
    to node ``k`` (``inf`` on the diagonal); ``single[l, k]`` marks pairs that
    differ by one allowed unilateral move.
    """

    nodes: list[JointAction]
    weights: np.ndarray
    single: np.ndarray

    def index(self, a: JointAction) -> int:
        return self.nodes.index(tuple(a))

    def restricted(self) -> np.ndarray:
        return np.where(self.single, self.weights, np.inf)


def _dijkstra(adj, source: int) -> np.ndarray:
    dist = np.full(len(adj), np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, s = heapq.heappop(heap)
        if d > dist[s]:
            continue
        for t, r in adj[s]:
            nd = d + r
            if nd < dist[t]:
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return dist


def min_resistance_paths(game: Game, model: ChainModel | None = None) -> ResistanceGraph:
    """Shortest-path resistances over the chain between all diagonal states.

    Paths may pass through other diagonal states.
    """
    model = model or ChainModel(game)
    adj = model.adjacency()
    diag = model.diagonal
    nodes = [model.states[k].curr for k in diag]
    k = len(diag)
    weights = np.full((k, k), np.inf)
    single = np.zeros((k, k), dtype=bool)
    for l, s in enumerate(diag):
        dist = _dijkstra(adj, s)
        weights[l] = dist[diag]
        weights[l, l] = np.inf
        for m in range(k):
            single[l, m] = in_single(nodes[l], nodes[m], game)
    return ResistanceGraph(nodes, weights, single)


def straight_route_resistance(a0: JointAction, a1: JointAction, game: Game) -> float:
    """Resistance of ``(a0,a0) -> (a0,a1) -> (a1,a1)``: one agent explores then settles."""
    a0, a1 = tuple(a0), tuple(a1)
    if not in_single(a0, a1, game):
        raise ValueError(f"{a0} -> {a1} is not a single allowed unilateral move")
    first = transition_resistance(ChainState(a0, a0), ChainState(a0, a1), game)
    second = transition_resistance(ChainState(a0, a1), ChainState(a1, a1), game)
    return first + second


def route_reversal_check(route: Sequence[JointAction], game: Game, tol: float = 1e-9):
    """Resistances of a chain of straight routes and of its reverse.

    Returns ``(forward, reverse, phi_gap)`` where ``phi_gap`` is the potential
    of the first node minus that of the last.  Raises
    :class:`CertificationError` if ``forward - reverse`` differs from
    ``phi_gap`` by more than ``tol``.
    """
    route = [tuple(a) for a in route]
    if len(route) < 2:
        raise ValueError("a route needs at least two nodes")
    fwd = sum(straight_route_resistance(x, y, game) for x, y in zip(route, route[1:]))
    back = route[::-1]
    rev = sum(straight_route_resistance(x, y, game) for x, y in zip(back, back[1:]))
    gap = game.potential(route[0]) - game.potential(route[-1])
    if abs((fwd - rev) - gap) > tol:
        raise CertificationError(f"reversal identity fails on {route}: {fwd} - {rev} != {gap}")
    return fwd, rev, gap


# -- trees ---------------------------------------------------------------------


def arborescence_potentials(weights: np.ndarray) -> np.ndarray:
    """Minimum total weight of a spanning tree directed into each root.

    ``weights[l, k]`` is the cost of edge ``l -> k``; ``inf`` means absent.
    Returns ``inf`` for roots that not every node can reach.
    """
    w = np.asarray(weights, dtype=float)
    k = len(w)
    out = np.full(k, np.inf)
    if k == 1:
        out[0] = 0.0
        return out
    for root in range(k):
        # trees into ``root`` are out-trees from ``root`` in the reversed graph
        g = nx.DiGraph()
        g.add_nodes_from(range(k))
        for l in range(k):
            for m in range(k):
                if l != m and l != root and np.isfinite(w[l, m]):
                    g.add_edge(m, l, weight=w[l, m])
        try:
            tree = nx.minimum_spanning_arborescence(g, attr="weight", preserve_attrs=True)
        except nx.NetworkXException:
            continue
        out[root] = sum(d["weight"] for _, _, d in tree.edges(data=True))
    return out


def exhaustive_tree_potentials(weights: np.ndarray) -> np.ndarray:
    """Brute force over every choice of one outgoing edge per non-root node."""
    w = np.asarray(weights, dtype=float)
    k = len(w)
    out = np.full(k, np.inf)
    for root in range(k):
        others = [l for l in range(k) if l != root]
        for parents in itertools.product(range(k), repeat=len(others)):
            cost = 0.0
            parent = dict(zip(others, parents))
            if any(l == p or not np.isfinite(w[l, p]) for l, p in parent.items()):
                continue
            ok = True
            for start in others:
                seen, node = set(), start
                while node != root:
                    if node in seen:
                        ok = False
                        break
                    seen.add(node)
                    node = parent[node]
                if not ok:
                    break
            if ok:
                cost = sum(w[l, p] for l, p in parent.items())
                out[root] = min(out[root], cost)
    return out


def stochastic_potentials(
    game: Game, graph: ResistanceGraph | None = None, restrict: bool = True
) -> dict[JointAction, float]:
    """Stochastic potential of every absorbing state ``(a, a)``, keyed by ``a``.

    With ``restrict`` only single-move edges are used.  Small graphs are
    cross-checked against exhaustive tree enumeration.
    """
    graph = graph or min_resistance_paths(game)
    w = graph.restricted() if restrict else graph.weights
    pots = arborescence_potentials(w)
    if restrict and not np.all(np.isfinite(pots)):
        raise ValueError("single-move edges do not connect all absorbing states")
    if len(graph.nodes) <= EXHAUSTIVE_TREE_LIMIT:
        brute = exhaustive_tree_potentials(w)
        if not np.allclose(pots, brute, rtol=0, atol=1e-9):
            raise CertificationError(f"arborescence {pots} disagrees with enumeration {brute}")
    return {a: float(p) for a, p in zip(graph.nodes, pots)}


def stochastically_stable(potentials: dict[JointAction, float], tol: float = 1e-9) -> set[JointAction]:
    best = min(potentials.values())
    return {a for a, p in potentials.items() if p <= best + tol}


# -- stationary distribution ---------------------------------------------------


@dataclass
class StationaryDistribution:
    states: list[ChainState]
    mu: np.ndarray
    residual: float
    eps: float
    kappa: float

    def mass(self, states) -> float:
        wanted = set(states)
        return float(sum(p for z, p in zip(self.states, self.mu) if z in wanted))

    def as_dict(self) -> dict[ChainState, float]:
        return dict(zip(self.states, self.mu.tolist()))


def _power_iteration(P: sparse.csr_matrix, tol: float = 1e-12, max_iter: int = 10**6) -> np.ndarray:
    PT = P.T.tocsr()
    mu = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = PT @ mu
        nxt /= nxt.sum()
        if np.abs(nxt - mu).max() < tol:
            return nxt
        mu = nxt
    raise RuntimeError(f"power iteration did not converge in {max_iter} steps")


def stationary_distribution(
    game: Game, eps: float, kappa: float, model: ChainModel | None = None, tol: float = 1e-10
) -> StationaryDistribution:
    """Solve ``mu P = mu`` with ``sum(mu) = 1`` for the constant-rate chain."""
    if not 0.0 < eps <= 0.5:
        raise ValueError(f"exploration rate {eps} outside (0, 1/2]")
    model = model or ChainModel(game)
    P = model.matrix(eps, kappa)
    m = P.shape[0]
    if m <= DIRECT_SOLVE_LIMIT:
        A = P.T.toarray() - np.eye(m)
        A[-1, :] = 1.0
        b = np.zeros(m)
        b[-1] = 1.0
        try:
            mu = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"stationary solve failed (condition {np.linalg.cond(A):.3g})") from exc
    else:
        mu = _power_iteration(P)
    mu = np.clip(mu, 0.0, None)
    mu /= mu.sum()
    residual = float(np.abs(P.T @ mu - mu).max())
    if residual > tol:
        cond = np.linalg.cond(A) if m <= DIRECT_SOLVE_LIMIT else float("nan")
        raise RuntimeError(f"stationary residual {residual:.3g} above {tol:g} (condition {cond:.3g})")
    return StationaryDistribution(model.states, mu, residual, eps, kappa)


def optimal_mass(dist: StationaryDistribution, game: Game) -> float:
    """Stationary mass on ``(a, a)`` for potential maximizers ``a``."""
    return dist.mass(ChainState(a, a) for a in optimal_nash(game))


# -- export --------------------------------------------------------------------


def export_resistance_graph(graph: ResistanceGraph, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight", "single"])
        for l, src in enumerate(graph.nodes):
            for k, dst in enumerate(graph.nodes):
                if l != k and np.isfinite(graph.weights[l, k]):
                    writer.writerow([" ".join(map(str, src)), " ".join(map(str, dst)),
                                     repr(float(graph.weights[l, k])), int(graph.single[l, k])])


def export_stationary(dist: StationaryDistribution, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prev", "curr", "probability"])
        for z, p in zip(dist.states, dist.mu):
            writer.writerow([" ".join(map(str, z.prev)), " ".join(map(str, z.curr)), repr(float(p))])
