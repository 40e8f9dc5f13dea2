"""Walk through the exact chain analysis on the three toy games.

For each toy we build the perturbed chain on pairs of consecutive joint
actions, print the certification checks, and then show how the stationary
mass on the optimal Nash equilibria grows as the exploration rate shrinks.
The last column goes further down the ladder than the certifier does,
which is where the mass finally clears 0.9 on the 2x2 coordination game.

Run with ``python3 notebooks/01_toy_chains.py``.
"""

from pipip.certify import certify_game
from pipip.chain import ChainModel, optimal_mass, stationary_distribution, stochastic_potentials
from pipip.toys import toy_games

LADDER = (0.1, 0.05, 0.02, 0.01, 1e-3)

for game in toy_games():
    print(f"== {game.name}")
    for line in certify_game(game).lines():
        print("  " + line)

    pots = stochastic_potentials(game)
    best = min(pots.values())
    print("  stochastic potentials:", {a: round(v - best, 3) for a, v in sorted(pots.items())})

    model = ChainModel(game)
    masses = [optimal_mass(stationary_distribution(game, e, 0.5, model), game) for e in LADDER]
    print("  optimal mass by eps:", "  ".join(f"{e:g}: {m:.3f}" for e, m in zip(LADDER, masses)))
    print()
