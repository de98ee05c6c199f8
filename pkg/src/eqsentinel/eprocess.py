"""Betting e-processes over regret increments.

Each hypothesis (player, deviation) carries a family of wealth processes,
one per betting fraction, accumulated in log space. Evidence is read out
through a mixture over betting fractions: a Dirac mass reproduces a single
fixed-fraction bet, a weighted grid approximates the uniform mixture on
(0, 1] by the midpoint rule. An exact polynomial integrator is provided as
an independent oracle for that quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, ShapeError
from .games import ActionProfile, NormalFormGame

#: Grid resolution used by monitors; oracle comparisons use 1001 nodes.
DEFAULT_GRID_NODES = 101
ORACLE_GRID_NODES = 1001

WEIGHT_TOL = 1e-12
EXACT_MIXTURE_MAX_LEN = 64


@dataclass(frozen=True)
class BettingMixture:
    """A Dirac mass or a finite weighted grid of betting fractions in (0, 1]."""

    kind: str
    lambdas: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if lam.shape != w.shape or lam.ndim != 1:
            raise ShapeError("lambdas and weights must be 1-D arrays of equal length")
        if self.kind not in ("dirac", "grid"):
            raise DomainError(f"unknown mixture kind {self.kind!r}")
        if self.kind == "dirac" and lam.size != 1:
            raise ShapeError("a dirac mixture has exactly one node")
        if lam.min() <= 0.0 or lam.max() > 1.0:
            raise DomainError("betting fractions must lie in (0, 1]")
        if lam.size > 1 and np.any(np.diff(lam) <= 0.0):
            raise DomainError("grid nodes must be strictly increasing")
        if w.min() < 0.0 or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, lam: float) -> "BettingMixture":
        return cls("dirac", np.array([lam]), np.array([1.0]))

    @classmethod
    def uniform_grid(
        cls, nodes: int = DEFAULT_GRID_NODES, upper: float = 1.0
    ) -> "BettingMixture":
        """Midpoint-rule grid for the uniform mixture on (0, upper].

        Nodes sit strictly inside the interval, so no grid component can hit
        an exact zero factor while increments stay in [-1, 1].
        """
        if nodes < 1:
            raise DomainError("grid needs at least one node")
        if not 0.0 < upper <= 1.0:
            raise DomainError("upper must lie in (0, 1]")
        lam = upper * (np.arange(nodes) + 0.5) / nodes
        return cls("grid", lam, np.full(nodes, 1.0 / nodes))

    @property
    def size(self) -> int:
        return int(self.lambdas.size)


@dataclass
class EProcessState:
    """Per-fraction log wealth for one hypothesis, with its running extremes.

    Single-writer: one logical owner feeds updates in round order. An exact
    zero factor marks its component dead (wealth 0 from then on), which keeps
    every stored log finite.
    """

    mixture: BettingMixture
    threshold: float | None = None
    log_wealth: np.ndarray = field(default=None)  # type: ignore[assignment]
    dead: np.ndarray = field(default=None)  # type: ignore[assignment]
    round: int = 0
    running_max: float = 1.0
    crossing_time: int | None = None

    def __post_init__(self) -> None:
        if self.log_wealth is None:
            self.log_wealth = np.zeros(self.mixture.size)
        if self.dead is None:
            self.dead = np.zeros(self.mixture.size, dtype=bool)
        if self.threshold is not None and self.threshold <= 1.0:
            raise DomainError("a registered threshold must exceed 1")

    @classmethod
    def fresh(
        cls, mixture: BettingMixture, threshold: float | None = None
    ) -> "EProcessState":
        return cls(mixture=mixture, threshold=threshold)

    def value(self) -> float:
        """Current mixture wealth, by max-shifted log-sum-exp."""
        alive = ~self.dead
        if not alive.any():
            return 0.0
        logs = self.log_wealth[alive]
        w = self.mixture.weights[alive]
        shift = logs.max()
        return float(math.exp(shift) * np.sum(w * np.exp(logs - shift)))

    def update(self, x: float) -> "EProcessState":
        factors = 1.0 - self.mixture.lambdas * x
        if np.any(factors < 0.0):
            raise DomainError(
                "negative e-value factor: increment exceeds 1/lambda"
            )
        newly_dead = factors == 0.0
        alive = ~(self.dead | newly_dead)
        self.log_wealth[alive] += np.log(factors[alive])
        self.dead |= newly_dead
        self.round += 1
        v = self.value()
        if v > self.running_max:
            self.running_max = v
        if (
            self.threshold is not None
            and self.crossing_time is None
            and v >= self.threshold
        ):
            self.crossing_time = self.round
        return self


def increment(
    game: NormalFormGame,
    profile: ActionProfile,
    player: int,
    deviation: int,
    eps_shift: float = 0.0,
) -> float:
    """Regret-like increment of one hypothesis at one observed profile.

    Negative values mean the deviation would have paid more this round. The
    shift is the tolerance of an approximate-equilibrium null (0 for exact
    Nash/CCE/CE).
    """
    if eps_shift < 0.0:
        raise DomainError("eps_shift must be nonnegative")
    game._check_action(player, deviation)
    profile.validate(game.action_counts)
    played = game.payoffs[player][profile.actions]
    counterfactual = list(profile.actions)
    counterfactual[player] = deviation
    dev = game.payoffs[player][tuple(counterfactual)]
    return float(played - dev + eps_shift)


def evalue(x: float, lam: float) -> float:
    """Single-round betting e-value 1 - lam * x."""
    if not 0.0 < lam <= 1.0:
        raise DomainError("lambda must lie in (0, 1]")
    return 1.0 - lam * x


def eprocess_update(
    state: EProcessState, x: float, mixture: BettingMixture
) -> EProcessState:
    """Advance a state by one increment, checking the mixture grids agree."""
    if mixture.size != state.mixture.size or not np.array_equal(
        mixture.lambdas, state.mixture.lambdas
    ):
        raise ShapeError("mixture grid does not match the state's grid")
    return state.update(x)


def mixture_value(state: EProcessState) -> float:
    return state.value()


def exact_uniform_mixture(xs) -> float:
    """Exact uniform-mixture wealth after the stream ``xs``.

    Expands the product of per-round factors into a polynomial in the betting
    fraction and integrates it term by term on (0, 1]. Degree is capped, so
    this is a test oracle rather than a monitoring path.
    """
    xs = list(xs)
    if len(xs) > EXACT_MIXTURE_MAX_LEN:
        raise CapacityError(
            f"stream longer than {EXACT_MIXTURE_MAX_LEN}: polynomial degree cap"
        )
    coeffs = np.array([1.0])
    for x in xs:
        coeffs = np.convolve(coeffs, np.array([1.0, -float(x)]))
    powers = np.arange(coeffs.size, dtype=float)
    return float(np.sum(coeffs / (powers + 1.0)))


def optimal_lambda(eta: float) -> float:
    """Worst-case log-optimal betting fraction for slack ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise DomainError("eta must lie in (0, 1]")
    return eta


def detection_bound_uniform(b: float, eta: float) -> float:
    """Ceiling on the expected crossing time of threshold ``b`` under the
    uniform mixture, for an alternative with slack ``eta``."""
    if b <= 1.0:
        raise DomainError("threshold must exceed 1")
    if not 0.0 < eta <= 1.0:
        raise DomainError("eta must lie in (0, 1]")
    return 12.0 * (math.log(b) + math.log(4.0 / eta) + math.log(1.5)) / eta**2


def slack_lower_bound(b: float, lam: float, eta: float) -> int:
    """Exact stopping round of the deterministic constant-gap stream."""
    if b <= 1.0:
        raise DomainError("threshold must exceed 1")
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda must lie in (0, 1)")
    if eta <= 0.0:
        raise DomainError("eta must be positive")
    return math.ceil(math.log(b) / math.log1p(lam * eta))
