"""Finite normal-form games: payoff tensors, joint strategies, and deviation gains.

Payoffs live in [0, 1]. Strategies are either a product of per-player mixed
strategies or a single distribution over the joint action space; both are
carried by :class:`JointStrategy` with a kind tag so downstream code accepts
either. All expectations here are exact enumerations over the joint action
space, which is the ground truth the sequential monitors are tested against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

PROB_TOL = 1e-12
CE_SUPPORT_FLOOR = 1e-12


class StrategyKind(enum.Enum):
    PRODUCT = "product"
    FULL = "full"


class EquilibriumMode(enum.Enum):
    """Which no-deviation condition a monitor or slack computation targets."""

    NASH = "nash"
    CCE = "cce"
    CE = "ce"
    EPS_APPROX = "eps-approx"


class ScenarioLabel(enum.Enum):
    NULL = "null"
    ALTERNATIVE = "alternative"


@dataclass(frozen=True)
class NormalFormGame:
    """Dense payoff tensors, one per player, over the joint action space.

    ``payoffs[i]`` is player ``i``'s utility indexed by the full action
    profile, so the array has shape ``(n, |A_1|, ..., |A_n|)``.
    """

    payoffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.payoffs, dtype=float)
        if arr.ndim < 2:
            raise ShapeError("payoffs must be an (n, |A_1|, ..., |A_n|) tensor")
        n = arr.shape[0]
        if arr.ndim != n + 1:
            raise ShapeError(
                f"payoff tensor has {arr.ndim - 1} action axes for {n} players"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("payoffs must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("payoffs must lie in [0, 1]")
        object.__setattr__(self, "payoffs", arr)

    @property
    def num_players(self) -> int:
        return self.payoffs.shape[0]

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.payoffs.shape[1:]

    def payoff(self, player: int, actions: tuple[int, ...]) -> float:
        """Utility of one player at a pure action profile."""
        self._check_player(player)
        return float(self.payoffs[player][actions])

    def _check_player(self, player: int) -> None:
        if not 0 <= player < self.num_players:
            raise ShapeError(f"player index {player} out of range")

    def _check_action(self, player: int, action: int) -> None:
        self._check_player(player)
        if not 0 <= action < self.action_counts[player]:
            raise ShapeError(
                f"action {action} out of range for player {player}"
            )


def two_player_game(u1, u2) -> NormalFormGame:
    """Convenience constructor from two payoff matrices (row player first)."""
    return NormalFormGame(np.stack([np.asarray(u1, float), np.asarray(u2, float)]))


@dataclass(frozen=True)
class ActionProfile:
    """One action index per player."""

    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))

    def validate(self, action_counts: tuple[int, ...]) -> None:
        if len(self.actions) != len(action_counts):
            raise ShapeError("profile length does not match player count")
        for a, count in zip(self.actions, action_counts):
            if not 0 <= a < count:
                raise ShapeError(f"action index {a} out of range [0, {count})")


def _validate_distribution(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)) or p.min() < 0.0:
        raise DomainError(f"{what} must be nonnegative and finite")
    if abs(p.sum() - 1.0) > PROB_TOL:
        # Out-of-tolerance inputs are rejected rather than renormalized.
        raise DomainError(f"{what} must sum to 1 within {PROB_TOL}")
    return p


@dataclass(frozen=True)
class JointStrategy:
    """A joint strategy, either a product of marginals or a full joint law."""

    kind: StrategyKind
    factors: tuple[np.ndarray, ...] = ()
    joint: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind is StrategyKind.PRODUCT:
            if not self.factors or self.joint is not None:
                raise ShapeError("PRODUCT strategy needs per-player factors only")
            factors = tuple(
                _validate_distribution(np.atleast_1d(f), f"strategy of player {i}")
                for i, f in enumerate(self.factors)
            )
            object.__setattr__(self, "factors", factors)
        elif self.kind is StrategyKind.FULL:
            if self.joint is None or self.factors:
                raise ShapeError("FULL strategy needs a joint table only")
            joint = np.asarray(self.joint, dtype=float)
            _validate_distribution(joint.ravel(), "joint strategy")
            object.__setattr__(self, "joint", joint)
        else:  # pragma: no cover - enum exhausts kinds
            raise ShapeError(f"unknown strategy kind {self.kind}")

    @classmethod
    def product(cls, *factors) -> "JointStrategy":
        return cls(StrategyKind.PRODUCT, factors=tuple(factors))

    @classmethod
    def full(cls, joint) -> "JointStrategy":
        return cls(StrategyKind.FULL, joint=np.asarray(joint, dtype=float))

    @property
    def action_counts(self) -> tuple[int, ...]:
        if self.kind is StrategyKind.PRODUCT:
            return tuple(len(f) for f in self.factors)
        return self.joint.shape

    def joint_law(self) -> np.ndarray:
        """Dense probability tensor over the joint action space."""
        if self.kind is StrategyKind.FULL:
            return self.joint
        law = self.factors[0]
        for f in self.factors[1:]:
            law = np.multiply.outer(law, f)
        return law

    def check_compatible(self, game: NormalFormGame) -> None:
        if self.action_counts != game.action_counts:
            raise ShapeError(
                f"strategy shape {self.action_counts} does not match game "
                f"{game.action_counts}"
            )


@dataclass(frozen=True)
class ScenarioSpec:
    """A generating strategy labelled as null or alternative, with its slack."""

    game: NormalFormGame
    generating_strategy: JointStrategy
    label: ScenarioLabel
    slack: float | None = None

    def __post_init__(self) -> None:
        self.generating_strategy.check_compatible(self.game)
        if self.label is ScenarioLabel.ALTERNATIVE:
            if self.slack is None:
                raise DomainError("ALTERNATIVE scenarios must carry a slack")
            if not 0.0 < self.slack <= 1.0:
                raise DomainError("slack must lie in (0, 1]")
        elif self.slack is not None:
            raise DomainError("NULL scenarios must not carry a slack")


def expected_payoff(game: NormalFormGame, strategy: JointStrategy, player: int) -> float:
    """Exact expected utility of one player, by full enumeration."""
    game._check_player(player)
    strategy.check_compatible(game)
    law = strategy.joint_law()
    return float(np.sum(law * game.payoffs[player]))


def _deviation_payoff(
    game: NormalFormGame, law: np.ndarray, player: int, deviation: int
) -> float:
    # E[u_i(a', a_-i)]: marginalize the player's own action out of the law.
    opponents_law = law.sum(axis=player)
    u_dev = np.take(game.payoffs[player], deviation, axis=player)
    return float(np.sum(opponents_law * u_dev))


def deviation_gain(
    game: NormalFormGame, strategy: JointStrategy, player: int, deviation: int
) -> float:
    """Unconditional expected improvement from always playing ``deviation``.

    Positive values mean the deviation is profitable against the strategy.
    """
    game._check_action(player, deviation)
    strategy.check_compatible(game)
    law = strategy.joint_law()
    return _deviation_payoff(game, law, player, deviation) - float(
        np.sum(law * game.payoffs[player])
    )


def equilibrium_slack(
    game: NormalFormGame, strategy: JointStrategy, mode: EquilibriumMode
) -> float:
    """Largest deviation gain under the given equilibrium condition.

    A value <= 0 certifies the strategy as an equilibrium of that mode. CE
    conditions on each recommended action whose probability is at least
    ``CE_SUPPORT_FLOOR``; a PRODUCT strategy is interpreted through the joint
    law it induces.
    """
    strategy.check_compatible(game)
    if mode in (EquilibriumMode.NASH, EquilibriumMode.CCE):
        gains = [
            deviation_gain(game, strategy, i, a)
            for i in range(game.num_players)
            for a in range(game.action_counts[i])
        ]
        return max(gains)
    if mode is not EquilibriumMode.CE:
        raise DomainError(f"slack is defined for NASH, CCE and CE, not {mode}")

    law = strategy.joint_law()
    best = -np.inf
    for i in range(game.num_players):
        axes = tuple(ax for ax in range(game.num_players) if ax != i)
        marginal = law.sum(axis=axes)
        for rec in range(game.action_counts[i]):
            if marginal[rec] < CE_SUPPORT_FLOOR:
                continue  # conditional expectation undefined off support
            cond_law = np.take(law, rec, axis=i) / marginal[rec]
            u_rec = np.take(game.payoffs[i], rec, axis=i)
            base = float(np.sum(cond_law * u_rec))
            for dev in range(game.action_counts[i]):
                if dev == rec:
                    continue
                u_dev = np.take(game.payoffs[i], dev, axis=i)
                gain = float(np.sum(cond_law * u_dev)) - base
                best = max(best, gain)
    if best == -np.inf:
        return 0.0  # no player has an alternative action to deviate to
    return best


def sample_profile(strategy: JointStrategy, rng: np.random.Generator) -> ActionProfile:
    """One i.i.d. draw from the joint strategy; deterministic given the rng."""
    if strategy.kind is StrategyKind.PRODUCT:
        actions = tuple(
            int(rng.choice(len(f), p=f)) for f in strategy.factors
        )
        return ActionProfile(actions)
    flat = strategy.joint.ravel()
    idx = int(rng.choice(flat.size, p=flat))
    return ActionProfile(tuple(int(a) for a in np.unravel_index(idx, strategy.joint.shape)))
