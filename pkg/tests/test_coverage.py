import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pipip.coverage import (
    CoverageWorld,
    DensityField,
    GridSpec,
    build_coverage_game,
    coverage_count,
    coverage_optimum,
    coverage_potential,
    coverage_utilities,
    coverage_utility,
    density_at,
    greedy_optimum,
    moving_mean,
    optimum_values,
    scale_for_assumption2,
    sensing_set,
)
from pipip.game import check_assumption1, check_assumption2, optimal_nash, verify_potential_identity
from pipip.learning import diameter_D

SMALL = GridSpec(3, 3)
BIG = GridSpec()
OBSTACLES = [(0.75, 1.35), (1.05, 1.05), (1.35, 0.75), (1.65, 0.45)]


def small_world(kind="uniform", **kw):
    return CoverageWorld(SMALL, DensityField(kind, **kw), scale=1.0)


class TestGeometry:
    def test_centres(self):
        c = BIG.centers()
        assert c.shape == (54, 2)
        assert tuple(c[0]) == pytest.approx((0.15, 0.15))
        assert tuple(c[BIG.cell_at((1.95, 1.35))]) == pytest.approx((1.95, 1.35))

    def test_cell_lookup_errors(self):
        with pytest.raises(ValueError):
            BIG.cell_at((3.0, 0.15))
        with pytest.raises(ValueError):
            BIG.cell_at((0.2, 0.15))

    def test_sensing_sets(self):
        w = small_world()
        assert sensing_set(w, 4) == {1, 3, 4, 5, 7}
        assert sensing_set(w, 0) == {0, 1, 3}
        zero = CoverageWorld(SMALL, DensityField(), sensing_radius=0.0)
        assert sensing_set(zero, 4) == {4}


class TestCounts:
    def test_examples(self):
        w = small_world()
        assert coverage_count(w, [4, 4], 4) == 2
        assert coverage_count(w, [0], 8) == 0

    def test_initial_configuration(self):
        w = CoverageWorld(BIG)
        cells = [BIG.cell_at(p) for p in [(0.15, 0.15), (0.15, 0.45), (0.45, 0.15), (0.45, 0.45)]]
        assert coverage_count(w, cells, BIG.cell_at((0.15, 0.15))) == 3


class TestPotentialAndUtility:
    def test_uniform_examples(self):
        w = small_world()
        assert coverage_potential(w, [4]) == pytest.approx(5.0)
        assert coverage_potential(w, [4, 4]) == pytest.approx(7.5)
        assert coverage_potential(w, []) == 0.0
        assert coverage_utility(w, 0, [4]) == pytest.approx(5.0)
        assert list(coverage_utilities(w, [4, 4])) == pytest.approx([2.5, 2.5])

    @pytest.mark.parametrize("kind", ["uniform", "static-gaussian"])
    def test_identity_exhaustive(self, kind):
        w = CoverageWorld(SMALL, DensityField(kind, mean=(0.45, 0.45)))
        report = verify_potential_identity(build_coverage_game(w, 2), tol=1e-12)
        assert report.passed and report.max_value <= 1e-12

    def test_game_oracles_match_module_functions(self):
        w = CoverageWorld.from_points(BIG, DensityField("static-gaussian"), OBSTACLES)
        g = build_coverage_game(w, 4)
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = tuple(int(x) for x in rng.integers(50, size=4))
            cells = g.cells[list(a)]
            assert g.potential(a) == pytest.approx(coverage_potential(w, cells), abs=1e-13)
            assert np.allclose(g.utilities(a), coverage_utilities(w, cells), atol=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 8), min_size=1, max_size=4), st.integers(0, 8))
    def test_share_sum_and_monotonicity(self, cells, extra):
        w = small_world("static-gaussian", mean=(0.3, 0.6))
        u = coverage_utilities(w, cells)
        covered = np.zeros(9, dtype=bool)
        for c in cells:
            covered |= w.sensing[c]
        assert u.sum() == pytest.approx(w.density_vector()[covered].sum())
        assert coverage_potential(w, cells + [extra]) >= coverage_potential(w, cells) - 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.permutations([0, 2, 4, 7]))
    def test_relabelling_agents(self, perm):
        w = small_world("static-gaussian", mean=(0.45, 0.15))
        base = [0, 2, 4, 7]
        assert coverage_potential(w, perm) == pytest.approx(coverage_potential(w, base))
        u_base = dict(zip(base, coverage_utilities(w, base)))
        assert list(coverage_utilities(w, perm)) == pytest.approx([u_base[c] for c in perm])

    def test_scaling_keeps_argmax(self):
        w1 = CoverageWorld(SMALL, DensityField("static-gaussian", mean=(0.15, 0.45)), scale=1.0)
        w2 = CoverageWorld(SMALL, DensityField("static-gaussian", mean=(0.15, 0.45)), scale=3.7)
        g1, g2 = build_coverage_game(w1, 2), build_coverage_game(w2, 2)
        assert optimal_nash(g1) == optimal_nash(g2)
        assert np.allclose(g2.potential_table(), 3.7 * g1.potential_table())


class TestDensity:
    def test_moving_mean(self):
        assert moving_mean(0) == (0.45, 0.45) and moving_mean(300) == (0.45, 0.45)
        assert moving_mean(500) == pytest.approx((1.2, 0.9))
        assert moving_mean(700) == (1.95, 1.35) and moving_mean(5000) == (1.95, 1.35)
        # the linear segment meets both parked positions
        assert moving_mean(300.0001) == pytest.approx((0.45, 0.45), abs=1e-5)
        assert moving_mean(699.9999) == pytest.approx((1.95, 1.35), abs=1e-5)

    def test_density_at(self):
        w = CoverageWorld(BIG, DensityField("moving-gaussian"))
        s = w.scale_factor
        assert density_at(w, BIG.cell_at((0.45, 0.45)), 0) == pytest.approx(s)
        q = BIG.cell_at((1.95, 1.35))
        assert density_at(w, q, 700) == pytest.approx(s)
        assert density_at(w, q, 0) == pytest.approx(s * math.exp(-25 / 9 * (1.5**2 + 0.9**2)))
        with pytest.raises(ValueError):
            density_at(w, 0, -1)

    def test_tabulated(self):
        text = "\n".join(str(0.1 * k) for k in range(9))
        field = DensityField.from_table_text(text)
        w = CoverageWorld(SMALL, field, scale=1.0)
        assert w.density_vector()[8] == pytest.approx(0.8)
        with pytest.raises(ValueError):
            DensityField.from_table_text("0.1\n-0.2\n")
        with pytest.raises(ValueError):
            CoverageWorld(BIG, field).density_vector()

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DensityField("spiral")


class TestScaling:
    def test_uniform_interior(self):
        w = CoverageWorld(SMALL, DensityField())
        assert scale_for_assumption2(w) == pytest.approx(0.99 / 5)
        assert check_assumption2(build_coverage_game(w, 2)).passed

    def test_zero_density(self):
        w = CoverageWorld(SMALL, DensityField(value=0.0))
        assert scale_for_assumption2(w) == 1.0
        assert coverage_potential(w, [4]) == 0.0

    def test_unscaled_fails(self):
        assert not check_assumption2(build_coverage_game(small_world(), 2)).passed


class TestBuild:
    def test_experiment_world(self):
        w = CoverageWorld.from_points(BIG, DensityField("static-gaussian"), OBSTACLES)
        g = build_coverage_game(w, 4)
        assert g.action_counts == (50,) * 4
        assert check_assumption1(g).passed

    def test_experiment_world_checks_with_two_agents(self):
        # the full four-agent game has 50**4 joint actions; the exhaustive checks
        # run on the same world with two agents
        w = CoverageWorld.from_points(BIG, DensityField("static-gaussian"), OBSTACLES)
        g = build_coverage_game(w, 2)
        assert check_assumption2(g).passed
        assert verify_potential_identity(g, tol=1e-12).passed

    def test_wall_disconnects(self):
        wall = [(0.75, 0.15 + 0.3 * r) for r in range(6)]
        with pytest.raises(ValueError, match="feasibility"):
            build_coverage_game(CoverageWorld.from_points(BIG, DensityField(), wall), 2)

    def test_diameter_without_obstacles(self):
        assert diameter_D(build_coverage_game(CoverageWorld(BIG), 1)) == 8

    def test_obstacles_still_sensed(self):
        w = CoverageWorld.from_points(BIG, DensityField(), OBSTACLES)
        g = build_coverage_game(w, 1)
        obstacle = BIG.cell_at(OBSTACLES[0])
        neighbour = g.action_of(BIG.cell_at((0.75, 1.05)))
        assert obstacle in sensing_set(w, BIG.cell_at((0.75, 1.05)))
        assert g.utilities((neighbour,))[0] == pytest.approx(5 * w.scale_factor)
        with pytest.raises(ValueError):
            g.action_of(obstacle)


class TestOptimum:
    def test_exact_matches_brute_force(self):
        w = CoverageWorld(GridSpec(4, 3), DensityField("static-gaussian", mean=(0.6, 0.3)))
        best = max(coverage_potential(w, list(c)) for c in itertools.product(range(12), repeat=3))
        value, cells, method = coverage_optimum(w, 3)
        assert method == "exact" and value == pytest.approx(best)
        assert coverage_potential(w, cells) == pytest.approx(best)

    def test_greedy_is_a_lower_bound(self):
        w = CoverageWorld(GridSpec(4, 3), DensityField("static-gaussian", mean=(0.6, 0.3)))
        exact = coverage_optimum(w, 3)[0]
        greedy = greedy_optimum(w, 3)[0]
        assert greedy <= exact + 1e-12

    def test_fallback_to_greedy(self):
        w = CoverageWorld(GridSpec(4, 3), DensityField())
        assert coverage_optimum(w, 3, max_multisets=10)[2] == "greedy"

    def test_several_densities_at_once(self):
        w = CoverageWorld(BIG, DensityField("moving-gaussian"))
        dens = np.array([w.density_vector(t) for t in (0, 500, 700)])
        values, _ = optimum_values(w, 2, dens)
        for v, t in zip(values, (0, 500, 700)):
            assert v == pytest.approx(coverage_optimum(w, 2, t)[0])
