"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers
(visible in ``pytest -v`` output) and then asserts the criterion at its
stated tolerance.  Run directly with ``python tests/test_acceptance.py``.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from pipip.certify import random_straight_route
from pipip.chain import (
    CertificationError,
    ChainModel,
    ChainState,
    min_resistance_paths,
    optimal_mass,
    recurrent_classes_unperturbed,
    route_reversal_check,
    stationary_distribution,
    stochastic_potentials,
    stochastically_stable,
    transition_probability,
    transition_resistance,
)
from pipip.coverage import CoverageWorld, DensityField, GridSpec, build_coverage_game
from pipip.game import Game, optimal_nash, verify_potential_identity
from pipip.harness import _game_for, optimum_series, preset, read_trace, run_experiment
from pipip.learning import AgentMemory, pipip_step, run_episode
from pipip.toys import coordination_2x2, coordination_3x3, path_game, toy_games

THREADS = max(1, min(8, os.cpu_count() or 1))


@pytest.fixture
def report(capsys):
    def emit(number, passed, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
        return passed

    return emit


def within_3_sigma(freq, p, n):
    return abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)


# 1 -------------------------------------------------------------------------


def test_criterion_01_potential_identity(report):
    start = time.perf_counter()
    worst = 0.0
    for field in (DensityField("uniform"), DensityField("static-gaussian", mean=(0.45, 0.45)),
                  DensityField("static-gaussian")):
        game = build_coverage_game(CoverageWorld(GridSpec(3, 3), field), 2)
        worst = max(worst, verify_potential_identity(game, tol=1e-12).max_value)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    report(1, ok, f"max residual {worst:.2e} (<= 1e-12), {elapsed:.3f} s (< 1 s)")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_02_branch_frequencies(report):
    start = time.perf_counter()
    delta, eps, kappa, n = 0.5, 0.15, 0.5, 10**5
    memory = AgentMemory(a1=0, a2=1, u1=0.3, u2=0.3 + delta, delta=delta)
    draws = pipip_step(memory, [0, 1, 2, 3], eps, kappa, np.random.default_rng(2024), size=n)
    freqs = (np.mean(draws >= 2), np.mean(draws == 0), np.mean(draws == 1))
    expected = (eps, (1 - eps) * kappa * eps**delta, (1 - eps) * (1 - kappa * eps**delta))
    quoted = (0.15, 0.16460, 0.68540)
    elapsed = time.perf_counter() - start
    ok = (
        all(within_3_sigma(f, p, n) for f, p in zip(freqs, expected))
        and all(abs(p - q) < 5e-6 for p, q in zip(expected, quoted))
        and elapsed < 1.0
    )
    report(2, ok, "explore/keep/revert " + ", ".join(f"{f:.5f} vs {p:.5f}" for f, p in zip(freqs, expected))
           + f", {elapsed:.3f} s")
    assert ok


# 3 -------------------------------------------------------------------------


def test_criterion_03_transition_formula(report):
    start = time.perf_counter()
    game = coordination_3x3()
    model = ChainModel(game)
    rng = np.random.default_rng(7)
    n = 10**5
    failures, worst_z = 0, 0.0
    cases = 0
    while cases < 100:
        z1 = model.states[int(rng.integers(len(model.states)))]
        eps = float(rng.uniform(0.05, 0.5))
        kappa = float(rng.uniform(0.1, 0.5))
        successors = [z for z in model.states if z.prev == z1.curr
                      and transition_probability(z1, z, eps, kappa, game) > 0]
        z2 = successors[int(rng.integers(len(successors)))]
        p = transition_probability(z1, z2, eps, kappa, game)
        u_prev, u_curr = game.utilities(z1.prev), game.utilities(z1.curr)
        hit = np.ones(n, dtype=bool)
        for i in range(game.n_agents):
            mem = AgentMemory(z1.curr[i], z1.prev[i], u_curr[i], u_prev[i], u_prev[i] - u_curr[i])
            draws = pipip_step(mem, game.constraints[i][z1.curr[i]], eps, kappa, rng, size=n)
            hit &= draws == z2.curr[i]
        freq = hit.mean()
        sigma = math.sqrt(p * (1 - p) / n)
        worst_z = max(worst_z, abs(freq - p) / sigma if sigma > 0 else 0.0)
        failures += not within_3_sigma(freq, p, n)
        cases += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 60
    report(3, ok, f"{cases} transitions, {failures} outside 3 sigma, worst |z| = {worst_z:.2f}, {elapsed:.1f} s")
    assert ok


# 4 -------------------------------------------------------------------------


def _ratio_variation(z1, z2, game, chi, kappa=0.5):
    ratios = [transition_probability(z1, z2, e, kappa, game) / e**chi for e in (1e-2, 1e-3, 1e-4)]
    return (max(ratios) - min(ratios)) / max(ratios)


def test_criterion_04_resistance_limit(report):
    start = time.perf_counter()
    # the single-transition example: one agent keeps a worse action with a utility drop of 0.3
    single = Game.from_arrays(np.array([[0.5], [0.2], [0.0]]), np.array([0.5, 0.2, 0.0]))
    z1, z2 = ChainState((0,), (1,)), ChainState((1,), (1,))
    example = _ratio_variation(z1, z2, single, transition_resistance(z1, z2, single))

    total, bad, worst, worst_case = 0, 0, 0.0, None
    for game in toy_games():
        model = ChainModel(game)
        for k, j in zip(model.rows, model.cols):
            a, b = model.states[k], model.states[j]
            chi = transition_resistance(a, b, game)
            if not np.isfinite(chi):
                continue
            total += 1
            v = _ratio_variation(a, b, game, chi)
            if v >= 0.01:
                bad += 1
            if v > worst:
                worst, worst_case = v, (game.name, a, b, chi)
    elapsed = time.perf_counter() - start
    ok = bad == 0 and example < 0.01 and elapsed < 1.0
    report(4, ok, f"single-agent example variation {example:.4%}; toy sweep: {bad}/{total} transitions "
                  f"vary by >= 1% (worst {worst:.2%} on {worst_case[0]} {worst_case[1]} -> {worst_case[2]}, "
                  f"chi={worst_case[3]:.3g}); {elapsed:.2f} s")
    assert ok


# 5 -------------------------------------------------------------------------


def test_criterion_05_recurrent_classes(report):
    start = time.perf_counter()
    details, ok = [], True
    for game in toy_games():
        try:
            classes = recurrent_classes_unperturbed(game)
            expected = {frozenset({ChainState(a, a)}) for a in game.joint_actions()}
            good = set(classes) == expected
        except CertificationError:
            classes, good = [], False
        ok &= good
        details.append(f"{game.name}: {len(classes)} classes")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5
    report(5, ok, "; ".join(details) + f"; {elapsed:.2f} s")
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_06_single_edges_and_reversal(report):
    start = time.perf_counter()
    lo, hi = math.inf, -math.inf
    for game in toy_games():
        w = min_resistance_paths(game).restricted()
        edges = w[np.isfinite(w)]
        lo, hi = min(lo, edges.min()), max(hi, edges.max())
    rng = np.random.default_rng(11)
    games = toy_games()
    worst, failures = 0.0, 0
    for r in range(100):
        game = games[r % len(games)]
        route = random_straight_route(game, rng, int(rng.integers(1, 6)))
        try:
            fwd, rev, gap = route_reversal_check(route, game, tol=1e-9)
            worst = max(worst, abs(fwd - rev - gap))
        except CertificationError:
            failures += 1
    elapsed = time.perf_counter() - start
    ok = lo >= 1.0 and hi < 2.0 and failures == 0 and elapsed < 5
    report(6, ok, f"single-move weights in [{lo:.3f}, {hi:.3f}]; 100 routes, {failures} failures, "
                  f"worst identity gap {worst:.1e}; {elapsed:.2f} s")
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_07_stationary_mass(report):
    start = time.perf_counter()
    ladder = (0.1, 0.05, 0.02, 0.01)
    ok, details = True, []
    for game in (coordination_2x2(0.49), coordination_3x3()):
        model = ChainModel(game)
        masses = [optimal_mass(stationary_distribution(game, e, 0.5, model), game) for e in ladder]
        monotone = all(b >= a for a, b in zip(masses, masses[1:]))
        stable = stochastically_stable(stochastic_potentials(game))
        contained = stable <= optimal_nash(game)
        ok &= monotone and masses[-1] > 0.9 and contained
        details.append(f"{game.name}: masses " + "/".join(f"{m:.3f}" for m in masses)
                       + f" monotone={monotone} stable-in-optimum={contained}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report(7, ok, "; ".join(details) + f"; need > 0.9 at eps=0.01; {elapsed:.2f} s")
    assert ok


# 8 / 10 --------------------------------------------------------------------


def _run_experiment1(root: Path):
    config = preset("experiment1")
    start = time.perf_counter()
    arms = {}
    for algorithm in ("PHPIP", "DISL"):
        arms[algorithm] = run_experiment(config.replace(algorithm=algorithm), threads=THREADS,
                                         out_dir=root / algorithm)
    return arms, time.perf_counter() - start


@pytest.fixture(scope="module")
def experiment1(tmp_path_factory):
    root = tmp_path_factory.mktemp("experiment1")
    arms, elapsed = _run_experiment1(root)
    return root, arms, elapsed


def test_criterion_08_experiment1(report, experiment1):
    _, arms, elapsed = experiment1
    med = {k: float(np.median([s.final_phi for s in v])) for k, v in arms.items()}
    success = {k: float(np.mean([s.success for s in v])) for k, v in arms.items()}
    optimum = arms["PHPIP"][0].optimum
    ok = med["PHPIP"] >= med["DISL"] and success["PHPIP"] > success["DISL"] and elapsed < 300
    report(8, ok, f"median final phi PHPIP {med['PHPIP']:.4f} vs DISL {med['DISL']:.4f} "
                  f"(optimum {optimum:.4f}); success PHPIP {success['PHPIP']:.2f} vs DISL {success['DISL']:.2f}; "
                  f"{elapsed:.1f} s")
    assert ok


def test_criterion_10_determinism(report, experiment1, tmp_path):
    root, _, _ = experiment1
    _run_experiment1(tmp_path)
    first = sorted(root.rglob("*.csv"))
    mismatched = [p.relative_to(root) for p in first
                  if p.read_bytes() != (tmp_path / p.relative_to(root)).read_bytes()]
    ok = len(first) == 100 and not mismatched
    report(10, ok, f"{len(first)} trace files compared, {len(mismatched)} differ")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_09_experiment2(report, tmp_path):
    config = preset("experiment2")
    start = time.perf_counter()
    run_experiment(config, threads=THREADS, out_dir=tmp_path)
    optimum, method = optimum_series(config)
    ratios = []
    for seed in config.seeds:
        trace = read_trace(tmp_path / f"seed_{seed:04d}.csv")
        keep = trace["t"] > 100
        ratios.append(trace["phi"][keep] / optimum[keep])
    per_step = np.median(np.array(ratios), axis=0)
    value = float(np.median(per_step))
    elapsed = time.perf_counter() - start
    ok = value >= 0.6 and elapsed < 300
    report(9, ok, f"median over t > 100 of the per-step median ratio = {value:.3f} (>= 0.6; {method} optimum; "
                  f"10th percentile over t {np.quantile(per_step, 0.1):.3f}); {elapsed:.1f} s")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
