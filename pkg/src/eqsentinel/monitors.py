"""Sequential decision layer: hypothesis enumeration, FWER and e-BH monitors.

A monitor owns one e-process per deviation hypothesis and advances all of
them on each observed action profile. The FWER procedure stops the first
time any mixture wealth reaches m/alpha. The FDR procedure never stops: it
recomputes the e-BH rejection level from running suprema each round, which
makes the rejection sets nested over time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eprocess import BettingMixture, EProcessState, increment
from .errors import DomainError, ShapeError, StateError
from .games import ActionProfile, EquilibriumMode, NormalFormGame

WEIGHT_TOL = 1e-12

SNAPSHOT_HEADER = "eqsentinel-monitor-snapshot v1"


@dataclass(frozen=True)
class HypothesisId:
    """One monitored deviation: player i switching to ``deviation``.

    ``condition`` is the recommended action in the conditional CE mode and
    is absent everywhere else.
    """

    player: int
    deviation: int
    condition: int | None = None

    def __post_init__(self) -> None:
        if self.condition is not None and self.condition == self.deviation:
            raise DomainError("conditional hypothesis needs deviation != condition")

    def label(self) -> str:
        if self.condition is None:
            return f"p{self.player}->a{self.deviation}"
        return f"p{self.player}|a{self.condition}->a{self.deviation}"


def enumerate_hypotheses(
    game: NormalFormGame,
    mode: EquilibriumMode,
    conditional_ce: bool = False,
) -> list[HypothesisId]:
    """All deviation hypotheses for the given equilibrium mode.

    NASH, CCE and EPS_APPROX monitor every (player, deviation) pair. CE
    defaults to the same unconditional set; the conditional enumeration
    (player, recommendation, deviation) sits behind ``conditional_ce``.
    """
    counts = game.action_counts
    if mode is EquilibriumMode.CE and conditional_ce:
        return [
            HypothesisId(i, dev, condition=rec)
            for i in range(game.num_players)
            for rec in range(counts[i])
            for dev in range(counts[i])
            if dev != rec
        ]
    return [
        HypothesisId(i, dev)
        for i in range(game.num_players)
        for dev in range(counts[i])
    ]


@dataclass(frozen=True)
class MonitorConfig:
    """Significance level, equilibrium mode, betting mixture and procedure."""

    alpha: float
    mixture: BettingMixture
    mode: EquilibriumMode = EquilibriumMode.NASH
    eps: float = 0.0
    procedure: str = "fwer"
    weights: np.ndarray | None = None
    conditional_ce: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if self.procedure not in ("fwer", "fdr"):
            raise DomainError(f"unknown procedure {self.procedure!r}")
        if self.mode is EquilibriumMode.EPS_APPROX:
            if self.eps <= 0.0:
                raise DomainError("EPS_APPROX mode needs eps > 0")
            # Shifted increments reach 1 + eps; capping lambda keeps every
            # e-value factor nonnegative.
            if self.mixture.lambdas.max() > 1.0 / (1.0 + self.eps):
                raise DomainError(
                    "mixture fractions must not exceed 1/(1+eps) under a shift"
                )
        elif self.eps != 0.0:
            raise DomainError("eps is only meaningful in EPS_APPROX mode")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1:
                raise ShapeError("weights must be a 1-D array")
            if w.min() <= 0.0 or abs(w.sum() - 1.0) > WEIGHT_TOL:
                raise DomainError("weights must be positive and sum to 1")
            object.__setattr__(self, "weights", w)


@dataclass
class RejectionState:
    """Nested rejection bookkeeping shared by both procedures."""

    k: int = 0
    rejected: dict[HypothesisId, int] = field(default_factory=dict)
    stopped: bool = False
    stopping_round: int | None = None

    @property
    def first_rejection_round(self) -> int | None:
        if not self.rejected:
            return None
        return min(self.rejected.values())


@dataclass(frozen=True)
class StepDecision:
    """Outcome of one FWER step: CONTINUE, or REJECT with the crossing ids."""

    rejected: tuple[HypothesisId, ...] = ()
    round: int | None = None

    @property
    def stopped(self) -> bool:
        return bool(self.rejected)


CONTINUE = StepDecision()


def ebh_rejection(maxima, alpha: float, weights) -> tuple[int, tuple[int, ...]]:
    """e-BH level and rejected indices from running suprema.

    Returns the largest k in [m] such that at least k hypotheses have ever
    crossed their level-k thresholds 1/(k * alpha * weight), together with
    the indices crossing at that level (k = 0 and the empty set if none).
    Zero weights are allowed here and mean an infinite threshold.
    """
    maxima = np.asarray(maxima, dtype=float)
    w = np.asarray(weights, dtype=float)
    if maxima.shape != w.shape or maxima.ndim != 1:
        raise ShapeError("maxima and weights must be 1-D arrays of equal length")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    m = maxima.size
    inv_w = np.where(w > 0.0, 1.0 / (alpha * np.where(w > 0.0, w, 1.0)), np.inf)
    for k in range(m, 0, -1):
        crossed = maxima >= inv_w / k
        if int(crossed.sum()) >= k:
            return k, tuple(int(i) for i in np.nonzero(crossed)[0])
    return 0, ()


class EquilibriumMonitor:
    """Single-writer monitor over all deviation hypotheses of one game."""

    def __init__(self, game: NormalFormGame, config: MonitorConfig):
        self.game = game
        self.config = config
        self.hypotheses = enumerate_hypotheses(
            game, config.mode, conditional_ce=config.conditional_ce
        )
        self.m = len(self.hypotheses)
        if config.procedure == "fdr":
            if config.weights is None:
                weights = np.full(self.m, 1.0 / self.m)
            else:
                weights = config.weights
                if weights.size != self.m:
                    raise ShapeError(
                        f"{weights.size} weights for {self.m} hypotheses"
                    )
            self.weights = weights
        else:
            self.weights = None
        self.states = {
            h: EProcessState.fresh(config.mixture, threshold=self.threshold)
            for h in self.hypotheses
        }
        self.round = 0
        self.rejection = RejectionState()
        # Global rounds at which each hypothesis first reached m/alpha;
        # EProcessState.crossing_time counts that hypothesis's own updates,
        # which lags global time in conditional CE mode.
        self.threshold_crossings: dict[HypothesisId, int] = {}

    @property
    def threshold(self) -> float:
        """FWER threshold m/alpha; derived, never stored independently."""
        return self.m / self.config.alpha

    def _eps_shift(self) -> float:
        return self.config.eps if self.config.mode is EquilibriumMode.EPS_APPROX else 0.0

    def _advance(self, profile: ActionProfile) -> None:
        profile.validate(self.game.action_counts)
        self.round += 1
        shift = self._eps_shift()
        for h in self.hypotheses:
            if h.condition is not None and profile.actions[h.player] != h.condition:
                continue
            x = increment(self.game, profile, h.player, h.deviation, shift)
            st = self.states[h]
            st.update(x)
            if h not in self.threshold_crossings and st.running_max >= self.threshold:
                self.threshold_crossings[h] = self.round

    def step_fwer(self, profile: ActionProfile) -> StepDecision:
        if self.rejection.stopped:
            raise StateError("monitor already stopped")
        self._advance(profile)
        crossing = tuple(
            h for h in self.hypotheses if self.states[h].value() >= self.threshold
        )
        if not crossing:
            return CONTINUE
        self.rejection.stopped = True
        self.rejection.stopping_round = self.round
        for h in crossing:
            self.rejection.rejected.setdefault(h, self.round)
        self.rejection.k = len(self.rejection.rejected)
        return StepDecision(crossing, self.round)

    def step_fdr(self, profile: ActionProfile) -> RejectionState:
        self._advance(profile)
        maxima = np.array([self.states[h].running_max for h in self.hypotheses])
        k, indices = ebh_rejection(maxima, self.config.alpha, self.weights)
        self.rejection.k = k
        for i in indices:
            self.rejection.rejected.setdefault(self.hypotheses[i], self.round)
        return self.rejection

    def wealth(self) -> dict[HypothesisId, float]:
        return {h: self.states[h].value() for h in self.hypotheses}

    # -- snapshot ----------------------------------------------------------

    def to_snapshot(self) -> str:
        """Versioned text snapshot of the full monitor state."""
        cfg = self.config
        lines = [SNAPSHOT_HEADER]
        lines.append(f"procedure {cfg.procedure}")
        lines.append(f"alpha {cfg.alpha!r}")
        lines.append(f"mode {cfg.mode.value}")
        lines.append(f"eps {cfg.eps!r}")
        lines.append(f"conditional_ce {int(cfg.conditional_ce)}")
        lines.append(f"mixture {cfg.mixture.kind}")
        lines.append("lambdas " + " ".join(repr(float(v)) for v in cfg.mixture.lambdas))
        lines.append("mixture_weights " + " ".join(repr(float(v)) for v in cfg.mixture.weights))
        if self.weights is not None:
            lines.append("weights " + " ".join(repr(float(v)) for v in self.weights))
        lines.append(f"round {self.round}")
        lines.append(f"k {self.rejection.k}")
        lines.append(f"stopped {int(self.rejection.stopped)}")
        lines.append(f"stopping_round {self.rejection.stopping_round or -1}")
        for h in self.hypotheses:
            st = self.states[h]
            cond = -1 if h.condition is None else h.condition
            lines.append(f"hypothesis {h.player} {h.deviation} {cond}")
            lines.append("logw " + " ".join(repr(float(v)) for v in st.log_wealth))
            lines.append("dead " + " ".join(str(int(v)) for v in st.dead))
            lines.append(f"rounds {st.round}")
            lines.append(f"runmax {float(st.running_max)!r}")
            lines.append(f"crossing {-1 if st.crossing_time is None else st.crossing_time}")
            lines.append(
                "global_crossing "
                f"{self.threshold_crossings.get(h, -1)}"
            )
            lines.append(f"rejected_at {self.rejection.rejected.get(h, -1)}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_snapshot(cls, game: NormalFormGame, text: str) -> "EquilibriumMonitor":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != SNAPSHOT_HEADER:
            raise DomainError("unrecognized snapshot header")
        fields: dict[str, str] = {}
        i = 1
        while i < len(lines) and not lines[i].startswith("hypothesis "):
            key, _, value = lines[i].partition(" ")
            fields[key] = value
            i += 1
        mixture = BettingMixture(
            fields["mixture"],
            np.array([float(v) for v in fields["lambdas"].split()]),
            np.array([float(v) for v in fields["mixture_weights"].split()]),
        )
        weights = None
        if "weights" in fields:
            weights = np.array([float(v) for v in fields["weights"].split()])
        config = MonitorConfig(
            alpha=float(fields["alpha"]),
            mixture=mixture,
            mode=EquilibriumMode(fields["mode"]),
            eps=float(fields["eps"]),
            procedure=fields["procedure"],
            weights=weights,
            conditional_ce=bool(int(fields["conditional_ce"])),
        )
        monitor = cls(game, config)
        monitor.round = int(fields["round"])
        monitor.rejection.k = int(fields["k"])
        monitor.rejection.stopped = bool(int(fields["stopped"]))
        stopping = int(fields["stopping_round"])
        monitor.rejection.stopping_round = None if stopping < 0 else stopping
        while i < len(lines) and lines[i] != "end":
            parts = lines[i].split()
            if parts[0] != "hypothesis":
                raise DomainError(f"malformed snapshot near {lines[i]!r}")
            cond = int(parts[3])
            h = HypothesisId(
                int(parts[1]), int(parts[2]), None if cond < 0 else cond
            )
            if h not in monitor.states:
                raise DomainError(f"snapshot hypothesis {h} not in monitor")
            block: dict[str, str] = {}
            i += 1
            while i < len(lines) and not lines[i].startswith("hypothesis ") and lines[i] != "end":
                key, _, value = lines[i].partition(" ")
                block[key] = value
                i += 1
            st = monitor.states[h]
            st.log_wealth = np.array([float(v) for v in block["logw"].split()])
            st.dead = np.array([bool(int(v)) for v in block["dead"].split()])
            st.round = int(block["rounds"])
            st.running_max = float(block["runmax"])
            crossing = int(block["crossing"])
            st.crossing_time = None if crossing < 0 else crossing
            global_crossing = int(block["global_crossing"])
            if global_crossing >= 0:
                monitor.threshold_crossings[h] = global_crossing
            rejected_at = int(block["rejected_at"])
            if rejected_at >= 0:
                monitor.rejection.rejected[h] = rejected_at
        return monitor


def fwer_step(monitor: EquilibriumMonitor, profile: ActionProfile) -> StepDecision:
    """One FWER round; rejects and stops when any wealth reaches m/alpha."""
    if monitor.config.procedure != "fwer":
        raise StateError("monitor was configured for FDR")
    return monitor.step_fwer(profile)


def fdr_step(monitor: EquilibriumMonitor, profile: ActionProfile) -> RejectionState:
    """One e-BH round; accumulates evidence and never hard-stops."""
    if monitor.config.procedure != "fdr":
        raise StateError("monitor was configured for FWER")
    return monitor.step_fdr(profile)
