"""Canonical games and strategy profiles used by the experiments.

The two-signal game is a 2x2 game whose unique mixed equilibrium is known
in closed form; the alternative profile creates two weak, balanced
deviation signals (about 0.032 and 0.033) that stress the single-threshold
procedure. The constant-gap game yields a deterministic increment stream
whose stopping round is known exactly.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..games import JointStrategy, NormalFormGame, two_player_game


def two_signal_game() -> NormalFormGame:
    u1 = [[0.9, 0.2], [0.3, 0.7]]
    u2 = [[0.5, 0.3], [0.2, 0.7]]
    return two_player_game(u1, u2)


def two_signal_nash() -> JointStrategy:
    return JointStrategy.product([5 / 7, 2 / 7], [5 / 11, 6 / 11])


def two_signal_alternative() -> JointStrategy:
    """Two balanced profitable deviations, gains 0.03225 and 0.03325."""
    return JointStrategy.product([17 / 20, 3 / 20], [13 / 20, 7 / 20])


#: Row-player mixes that put the best deviation gain at exactly eta
#: (column player fixed at (10/11, 1/11)).
SENSITIVITY_ROWS = {0.05: (0.9, 0.1), 0.1: (0.8, 0.2), 0.15: (0.7, 0.3)}


def sensitivity_profile(eta: float) -> JointStrategy:
    if eta not in SENSITIVITY_ROWS:
        raise DomainError(
            f"calibrated rows exist for eta in {sorted(SENSITIVITY_ROWS)}"
        )
    return JointStrategy.product(SENSITIVITY_ROWS[eta], [10 / 11, 1 / 11])


def constant_gap_game(eta: float) -> NormalFormGame:
    """Player 1 gains exactly eta by switching to its second action while
    the observed profile stays pinned at (0, 0)."""
    if not 0.0 < eta <= 0.5:
        raise DomainError("the gap must lie in (0, 0.5] to keep payoffs in [0, 1]")
    u1 = [[0.5, 0.5], [0.5 + eta, 0.5]]
    u2 = [[0.5, 0.5], [0.5, 0.5]]
    return two_player_game(u1, u2)


def coordination_ce() -> tuple[NormalFormGame, JointStrategy]:
    """A correlated equilibrium: both players follow a shared fair coin."""
    u = np.array([[1.0, 0.0], [0.0, 1.0]])
    game = two_player_game(u, u)
    joint = JointStrategy.full([[0.5, 0.0], [0.0, 0.5]])
    return game, joint
