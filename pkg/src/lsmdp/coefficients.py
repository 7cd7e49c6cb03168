"""Per-state analysis quantities for a policy on a local-search space.

The building blocks are the improving / non-improving split of each
neighborhood and the per-step exploration and exploitation masses of a
policy (a move is exploration when its objective gain is <= 0, exploitation
when the gain is strictly positive; stay mass counts as neither).

Derived quantities:

* count fractions  alpha = |non-improving| / |all moves|,
                   beta  = |improving| / |all moves|   (exact rationals);
* convergence coefficient  gamma = |improving| / |non-improving|, which is 0
  exactly at local maxima;
* balance ratio  = exploration mass / exploitation mass at (state, t), and
  its time series whose summability classifies a policy as
  exploitation-oriented, balanced, or exploration-oriented.

Extended-real conventions: x/0 -> +inf for x > 0, and 0/0 -> 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .policies import Policy, step
from .search_space import LocalSearchMdp, Move, ResourceLimitError

EXHAUSTIVE_SWEEP_CAP = 20  # exact sweeps enumerate all 2**n states

DEFAULT_HORIZON = 200
DEFAULT_TAIL_TOLERANCE = 1e-9

ZERO = "zero"
CONVERGED = "converged"
DIVERGING = "diverging"
DEGENERATE = "degenerate"
INCONCLUSIVE = "inconclusive"


class UndefinedCoefficientError(ValueError):
    """The state has no available moves, so count fractions are undefined."""


class MoveKind(enum.Enum):
    EXPLORATION = 1   # objective gain <= 0 (plateau moves included)
    EXPLOITATION = 0  # strict objective gain


def move_kind(mdp: LocalSearchMdp, move: Move) -> MoveKind:
    return MoveKind.EXPLORATION if mdp.reward(move) <= 0 else MoveKind.EXPLOITATION


@dataclass(frozen=True)
class MovePartition:
    improving: frozenset[int]
    non_improving: frozenset[int]


def partition_moves(mdp: LocalSearchMdp, state: int) -> MovePartition:
    """Split the neighbors of `state` by strict objective improvement."""
    current = mdp.value(state)
    improving, non_improving = set(), set()
    for j in mdp.neighbors(state):
        (improving if mdp.value(j) > current else non_improving).add(j)
    return MovePartition(frozenset(improving), frozenset(non_improving))


class CountFractions(NamedTuple):
    """Exact fractions of non-improving (alpha) and improving (beta) moves."""

    non_improving: Fraction
    improving: Fraction


def count_fractions(mdp: LocalSearchMdp, state: int, t: int | None = None) -> CountFractions:
    """The (alpha, beta) pair for `state`; always sums to exactly 1.

    `t` is accepted for interface symmetry with the time-indexed quantities
    and ignored: the built-in neighborhoods are static.
    """
    part = partition_moves(mdp, state)
    total = len(part.improving) + len(part.non_improving)
    if total == 0:
        raise UndefinedCoefficientError(f"state {state} has no moves")
    return CountFractions(Fraction(len(part.non_improving), total),
                          Fraction(len(part.improving), total))


def convergence_coefficient(mdp: LocalSearchMdp, state: int, t: int | None = None) -> float:
    """|improving| / |non-improving| as an extended real.

    Returns 0.0 exactly when there is no improving neighbor (local maxima,
    including the doubly-empty case) and +inf when every neighbor improves.
    """
    part = partition_moves(mdp, state)
    if not part.improving:
        return 0.0
    if not part.non_improving:
        return math.inf
    return len(part.improving) / len(part.non_improving)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Convergence coefficient along one sampled trajectory (t = 0..t_max)."""

    states: tuple[int, ...]
    values: tuple[float, ...]
    first_zero: int | None


def convergence_trace(policy: Policy, mdp: LocalSearchMdp, start: int, t_max: int,
                      rng) -> ConvergenceTrace:
    """Roll the policy for t_max steps and record the convergence coefficient
    of every visited state; absorbed states simply repeat."""
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    mdp.check_state(start)
    states = [start]
    state = start
    for t in range(t_max):
        state, _, _ = step(policy, mdp, state, t, rng)
        states.append(state)
    values = tuple(convergence_coefficient(mdp, s) for s in states)
    first_zero = next((t for t, g in enumerate(values) if g == 0.0), None)
    return ConvergenceTrace(tuple(states), values, first_zero)


def exploration_masses(policy: Policy, mdp: LocalSearchMdp, state: int, t: int) -> tuple[float, float]:
    """(exploration, exploitation) move mass of the policy at (state, t);
    stay mass is excluded from both."""
    dist = policy.action_distribution(mdp, state, t)
    current = mdp.value(state)
    explore, exploit = [], []
    for move, p in dist.entries:
        (explore if mdp.value(move.dst) <= current else exploit).append(p)
    return math.fsum(explore), math.fsum(exploit)


def exploration_ratio(policy: Policy, mdp: LocalSearchMdp, state: int, t: int) -> float:
    """Exploration mass / exploitation mass at (state, t), extended-real."""
    explore, exploit = exploration_masses(policy, mdp, state, t)
    if exploit > 0.0:
        return explore / exploit
    return math.inf if explore > 0.0 else 0.0


@dataclass(frozen=True)
class BalanceSeries:
    """Truncated time series of per-step exploration/exploitation ratios.

    `limit` is the estimated series value when the verdict is `converged`
    (the partial sum; the geometric tail bound is below the tolerance) and
    0.0 for the `zero` verdict.
    """

    partial_sum: float
    verdict: str
    limit: float | None
    tail_bound: float | None
    horizon: int


_EXTINCT_SUFFIX = 10      # this many trailing exact zeros count as a dead tail
_DIVERGENCE_WINDOW = 20   # moving-average window of the divergence rule
_DIVERGENCE_SPAN = 100    # trailing span over which the average must not fall


def balance_series(policy: Policy, mdp: LocalSearchMdp, state: int,
                   horizon: int = DEFAULT_HORIZON,
                   tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> BalanceSeries:
    """Sum the exploration ratio over t = 0..horizon-1 and judge the series.

    The ratio is a per-state quantity (identical for every available action),
    so the uniform action average of per-action series collapses to the
    per-state series summed here.  Verdicts:

    * ``zero``         every term is 0;
    * ``degenerate``   some term is +inf (exploration mass with no improving
                       move available, i.e. the state is a local maximum);
    * ``converged``    term ratios fall and stay below 1 with a geometric
                       tail bound under `tail_tolerance`, or the terms die
                       out to an exact-zero tail;
    * ``diverging``    the trailing moving average of the terms never falls;
    * ``inconclusive`` anything else — never silently classified.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if not tail_tolerance > 0:
        raise ValueError(f"tail tolerance must be positive, got {tail_tolerance!r}")
    if policy.stationary:
        terms = [exploration_ratio(policy, mdp, state, 0)] * horizon
    else:
        terms = [exploration_ratio(policy, mdp, state, t) for t in range(horizon)]
    return _judge_series(terms, tail_tolerance)


def _judge_series(terms: list[float], tail_tolerance: float) -> BalanceSeries:
    horizon = len(terms)
    if any(math.isinf(term) for term in terms):
        return BalanceSeries(math.inf, DEGENERATE, None, None, horizon)
    if all(term == 0.0 for term in terms):
        return BalanceSeries(0.0, ZERO, 0.0, 0.0, horizon)
    partial = math.fsum(terms)
    live = horizon
    while live > 0 and terms[live - 1] == 0.0:
        live -= 1
    if horizon - live >= _EXTINCT_SUFFIX:
        return BalanceSeries(partial, CONVERGED, partial, 0.0, horizon)
    ratios = [b / a for a, b in zip(terms, terms[1:]) if a > 0.0]
    window = min(len(ratios), max(5, horizon // 10))
    if window:
        recent = max(ratios[-window:])
        if recent < 1.0:
            bound = terms[-1] * recent / (1.0 - recent)
            if bound < tail_tolerance:
                return BalanceSeries(partial, CONVERGED, partial, bound, horizon)
    if _trailing_average_nondecreasing(terms):
        return BalanceSeries(partial, DIVERGING, None, None, horizon)
    return BalanceSeries(partial, INCONCLUSIVE, None, None, horizon)


def _trailing_average_nondecreasing(terms: list[float]) -> bool:
    horizon = len(terms)
    window = min(_DIVERGENCE_WINDOW, max(1, horizon // 6))
    span = min(_DIVERGENCE_SPAN, max(2, horizon // 2))
    averages = []
    for end in range(horizon - span, horizon):
        lo = end - window + 1
        if lo < 0:
            return False  # horizon too short for the rule
        averages.append(math.fsum(terms[lo:end + 1]) / window)
    return all(b >= a - 1e-15 * max(1.0, abs(a)) for a, b in zip(averages, averages[1:]))


@dataclass(frozen=True)
class Classification:
    kind: str                 # exploitation-oriented | balanced | exploration-oriented | inconclusive
    constant: float | None    # the balanced limit C, None otherwise

    def describe(self) -> str:
        if self.kind == "balanced":
            return f"balanced (C={self.constant!r})"
        return self.kind


@dataclass
class CoefficientReport:
    """Per-state coefficients plus the aggregate orientation of a policy."""

    states: list[int]
    fractions: dict[int, CountFractions]
    convergence: dict[int, float]
    series: dict[int, BalanceSeries]
    series_max: float | None
    classification: Classification
    horizon: int
    tail_tolerance: float
    degenerate_states: list[int]
    inconclusive_states: list[int]

    CSV_HEADER = ("state", "alpha", "beta", "gamma", "delta_partial", "verdict")

    def csv_rows(self):
        for i in self.states:
            alpha, beta = self.fractions[i]
            s = self.series[i]
            yield (i, float(alpha), float(beta), self.convergence[i], s.partial_sum, s.verdict)

    def to_json_dict(self) -> dict:
        per_state = {}
        for i in self.states:
            alpha, beta = self.fractions[i]
            s = self.series[i]
            per_state[str(i)] = {
                "alpha": float(alpha),
                "beta": float(beta),
                "gamma": self.convergence[i],
                "delta_partial": s.partial_sum,
                "delta_limit": s.limit,
                "tail_bound": s.tail_bound,
                "verdict": s.verdict,
            }
        return {
            "classification": {"kind": self.classification.kind,
                               "constant": self.classification.constant},
            "delta_star": self.series_max,
            "horizon": self.horizon,
            "tail_tolerance": self.tail_tolerance,
            "degenerate_states": self.degenerate_states,
            "inconclusive_states": self.inconclusive_states,
            "states": per_state,
        }


def classify(policy: Policy, mdp: LocalSearchMdp,
             horizon: int = DEFAULT_HORIZON,
             tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
             states: Iterable[int] | None = None) -> CoefficientReport:
    """Sweep states, judge every balance series, and classify the policy.

    Orientation rules over the per-state verdicts:

    * any ``diverging``                      -> exploration-oriented;
    * else any ``inconclusive``              -> inconclusive (no verdict forced);
    * else any ``converged``                 -> balanced, C = max of the limits
      (``zero`` states contribute a limit of 0);
    * else all ``zero``                      -> exploitation-oriented.

    ``degenerate`` states (local maxima where exploration mass persists while
    no improving move exists, so the per-step ratio is +inf) are reported but
    excluded from the orientation; if every swept state is degenerate the
    policy explores by construction and is classified exploration-oriented.
    """
    if states is None:
        if mdp.n > EXHAUSTIVE_SWEEP_CAP:
            raise ResourceLimitError(
                f"exhaustive sweep is capped at n <= {EXHAUSTIVE_SWEEP_CAP} "
                f"(got n={mdp.n}); pass an explicit state sample")
        states = range(mdp.num_states)
    state_list = list(states)
    if not state_list:
        raise ValueError("empty state sample")
    fractions, convergence, series = {}, {}, {}
    for i in state_list:
        fractions[i] = count_fractions(mdp, i)
        convergence[i] = convergence_coefficient(mdp, i)
        series[i] = balance_series(policy, mdp, i, horizon, tail_tolerance)
    degenerate = [i for i in state_list if series[i].verdict == DEGENERATE]
    inconclusive = [i for i in state_list if series[i].verdict == INCONCLUSIVE]
    converged_limits = [s.limit for s in series.values() if s.verdict == CONVERGED]
    if any(s.verdict == DIVERGING for s in series.values()):
        label = Classification("exploration-oriented", None)
    elif inconclusive:
        label = Classification("inconclusive", None)
    elif converged_limits:
        label = Classification("balanced", max(converged_limits))
    elif degenerate and len(degenerate) == len(state_list):
        label = Classification("exploration-oriented", None)
    else:
        label = Classification("exploitation-oriented", None)
    if inconclusive:
        series_max = None
    else:
        per_state = [0.0 if s.verdict == ZERO
                     else (s.limit if s.verdict == CONVERGED else math.inf)
                     for s in series.values()]
        series_max = max(per_state)
    return CoefficientReport(state_list, fractions, convergence, series, series_max,
                             label, horizon, tail_tolerance, degenerate, inconclusive)


def decomposition_residual(policy: Policy, mdp: LocalSearchMdp, state: int, t: int) -> float:
    """Consistency residual of the exploration/exploitation mixture identity.

    The move-conditioned distribution must equal its exploration share times
    the conditional distribution over exploration moves plus the analogous
    exploitation part; stay mass is bookkeeping outside the decomposition.
    The exactness defect of the complementary count fractions is folded in,
    so a nonzero return flags either an inconsistent distribution or a broken
    partition.
    """
    alpha, beta = count_fractions(mdp, state)
    residual = abs(float(alpha + beta - 1))
    dist = policy.action_distribution(mdp, state, t)
    current = mdp.value(state)
    explore_parts, exploit_parts = [], []
    for move, p in dist.entries:
        (explore_parts if mdp.value(move.dst) <= current else exploit_parts).append(p)
    explore = math.fsum(explore_parts)
    exploit = math.fsum(exploit_parts)
    move_mass = explore + exploit
    if move_mass == 0.0:
        return residual
    explore_share = explore / move_mass
    exploit_share = exploit / move_mass
    for move, p in dist.entries:
        conditioned = p / move_mass
        if mdp.value(move.dst) <= current:
            rebuilt = explore_share * (p / explore)
        else:
            rebuilt = exploit_share * (p / exploit)
        residual += abs(conditioned - rebuilt)
    return residual
