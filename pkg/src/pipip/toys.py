"""Small built-in games used for exhaustive certification runs."""

from __future__ import annotations

import numpy as np

from .game import Game, path_constraints


def coordination_2x2(scale: float = 1.0) -> Game:
    """Two agents, actions ``x=0``/``y=1``, identical interest.

    The potential is 1 on ``(x, x)``, 2 on ``(y, y)`` and 0 elsewhere, times
    ``scale``.  Unilateral deviations change utilities by up to ``2 * scale``,
    so ``scale < 0.5`` is needed for the bounded-gain assumption.
    """
    phi = scale * np.array([[1.0, 0.0], [0.0, 2.0]])
    return Game.identical_interest(phi, name=f"coordination-2x2(scale={scale:g})")


def coordination_3x3(scale: float = 1.0) -> Game:
    """Two agents with three actions each and a potential with two strict Nash
    equilibria: the optimum ``(0, 0)`` and the trap ``(2, 2)``.

    Utilities add an agent-specific term that depends only on the opponent's
    action, so the game is a genuine (not identical-interest) potential game.
    """
    phi = scale * np.array(
        [
            [0.95, 0.1, 0.0],
            [0.1, 0.05, 0.1],
            [0.0, 0.1, 0.3],
        ]
    )
    side = scale * np.array([0.05, 0.0, 0.02])
    u = np.empty((3, 3, 2))
    u[..., 0] = phi + side[None, :]
    u[..., 1] = phi + side[:, None]
    return Game.from_arrays(u, phi, name=f"coordination-3x3(scale={scale:g})")


def path_game(values=(0.0, 0.3, 0.6)) -> Game:
    """One agent walking on a line ``x - y - z`` (staying allowed)."""
    values = np.asarray(values, dtype=float)
    return Game.from_arrays(
        values[:, None], values, constraints=[path_constraints(len(values))], name="path"
    )


def toy_games() -> list[Game]:
    """The games certified by ``pipip verify`` and the acceptance suite."""
    return [path_game(), coordination_2x2(0.49), coordination_3x3(1.0)]
