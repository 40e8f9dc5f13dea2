"""Payoff-based learning for constrained potential games.

The package contains the game model (:mod:`pipip.game`), the PIPIP, PHPIP
and DISL learning rules (:mod:`pipip.learning`), exact analysis of the
induced Markov chain (:mod:`pipip.chain`, :mod:`pipip.certify`), the grid
coverage game (:mod:`pipip.coverage`) and an experiment harness
(:mod:`pipip.harness`).
"""

from .certify import CertificationReport, certify_game
from .chain import (
    ChainModel,
    ChainState,
    min_resistance_paths,
    optimal_mass,
    recurrent_classes_unperturbed,
    stationary_distribution,
    stochastic_potentials,
    stochastically_stable,
    transition_probability,
    transition_resistance,
)
from .coverage import CoverageWorld, DensityField, GridSpec, build_coverage_game
from .game import (
    Game,
    check_assumption1,
    check_assumption2,
    enumerate_nash,
    optimal_nash,
    verify_potential_identity,
)
from .harness import ExperimentConfig, aggregate, emit_config, parse_config, run_experiment
from .learning import Algorithm, LearnerParams, pipip_step, run_episode

__version__ = "0.1.0"
