"""End-to-end certification of the learning chain on small games.

``certify_game`` runs every exact check available for a finite game and
collects the outcome in a :class:`CertificationReport`.  Each check records
a boolean and a short detail string instead of raising, so one report can
show several failures at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import (
    CertificationError,
    ChainModel,
    min_resistance_paths,
    optimal_mass,
    recurrent_classes_unperturbed,
    route_reversal_check,
    stationary_distribution,
    stochastic_potentials,
    stochastically_stable,
)
from .game import Game, check_assumption1, check_assumption2, optimal_nash, verify_potential_identity

EPSILON_LADDER = (0.1, 0.05, 0.02, 0.01)
MASS_TARGET = 0.9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CertificationReport:
    game: str
    checks: list[CheckResult] = field(default_factory=list)
    masses: dict[float, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name, bool(passed), detail))

    def lines(self) -> list[str]:
        out = [f"[{self.game}]"]
        for c in self.checks:
            out.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
        out.extend(f"  info  {note}" for note in self.notes)
        return out


def random_straight_route(game: Game, rng: np.random.Generator, length: int) -> list[tuple[int, ...]]:
    """A walk of ``length`` single allowed moves (one agent at a time, never staying)."""
    a = tuple(int(rng.integers(m)) for m in game.action_counts)
    route = [a]
    for _ in range(length):
        movers = [i for i in range(game.n_agents) if len(game.constraints[i][a[i]]) > 1]
        i = movers[rng.integers(len(movers))]
        options = [b for b in game.constraints[i][a[i]] if b != a[i]]
        nxt = list(a)
        nxt[i] = int(options[rng.integers(len(options))])
        a = tuple(nxt)
        route.append(a)
    return route


def certify_game(
    game: Game,
    kappa: float = 0.5,
    epsilons=EPSILON_LADDER,
    n_routes: int = 100,
    seed: int = 0,
    min_choices: int = 2,
) -> CertificationReport:
    report = CertificationReport(game.name)

    a1 = check_assumption1(game, min_choices=min_choices)
    report.add("constraint map", a1.passed, ", ".join(a1.failed_clauses()) or "reversible and connected")
    a2 = check_assumption2(game)
    report.add("bounded gain", a2.passed, f"max |gain| {a2.max_value:.6g}")
    ident = verify_potential_identity(game, tol=1e-12)
    report.add("potential identity", ident.passed, f"max residual {ident.max_value:.3g}")

    model = ChainModel(game)
    try:
        classes = recurrent_classes_unperturbed(game, model)
        report.add("unperturbed recurrent classes", True, f"{len(classes)} diagonal singletons")
    except CertificationError as exc:
        report.add("unperturbed recurrent classes", False, str(exc))

    graph = min_resistance_paths(game, model)
    w = graph.restricted()
    single = w[np.isfinite(w)]
    if single.size:
        ok = bool(np.all((single >= 1.0 - 1e-12) & (single < 2.0)))
        report.add("single-move weights in [1, 2)", ok, f"range [{single.min():.4g}, {single.max():.4g}]")

    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for _ in range(n_routes):
        route = random_straight_route(game, rng, int(rng.integers(1, 5)))
        try:
            fwd, rev, gap = route_reversal_check(route, game)
            worst = max(worst, abs((fwd - rev) - gap))
        except CertificationError:
            failures += 1
    report.add("route reversal identity", failures == 0, f"{failures} failures, worst gap {worst:.3g}")

    optimum = optimal_nash(game)
    pots = stochastic_potentials(game, graph)
    stable = stochastically_stable(pots)
    report.add("stable states are optimal", stable <= optimum, f"stable {sorted(stable)}, optimal {sorted(optimum)}")

    for eps in epsilons:
        report.masses[eps] = optimal_mass(stationary_distribution(game, eps, kappa, model), game)
    seq = [report.masses[e] for e in sorted(report.masses, reverse=True)]
    monotone = all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
    summary = ", ".join(f"{e:g}: {report.masses[e]:.4f}" for e in sorted(report.masses, reverse=True))
    report.add("optimal mass nondecreasing as epsilon shrinks", monotone, summary)
    smallest = min(report.masses)
    report.notes.append(
        f"optimal mass at epsilon={smallest:g} is {report.masses[smallest]:.4f} (target {MASS_TARGET})"
    )
    return report
