"""Seeded Monte-Carlo rollouts for instances beyond exact reach.

Trajectories are independent and reproducible: trajectory k of a batch draws
its generator seed from the entropy triple (base_seed, k, stream) through
numpy's SeedSequence, so batches replay identically across machines.
Aggregation is a commutative reduction over the records, independent of
execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import move_kind
from .policies import Policy, step
from .search_space import LocalSearchMdp, Move


def derive_seed(base_seed: int, index: int, stream: int = 0) -> int:
    """Portable per-trajectory seed for (base_seed, index); stream 0 drives
    the walk, stream 1 the start-state draw."""
    return int(np.random.SeedSequence([base_seed, index, stream]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TrajectoryStep:
    t: int
    state: int           # state occupied at time t, before acting
    move: Move | None    # None = stayed in place
    reward: float
    kind: str | None     # "exploration"/"exploitation"; None when staying


@dataclass
class TrajectoryRecord:
    seed: int
    start: int
    steps: list[TrajectoryStep]
    best_so_far: list[tuple[int, float]]
    terminated_at: int | None

    @property
    def final_state(self) -> int:
        for s in reversed(self.steps):
            return s.move.dst if s.move is not None else s.state
        return self.start

    @property
    def final_best(self) -> float:
        return self.best_so_far[-1][1]

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "start": self.start,
            "terminated_at": self.terminated_at,
            "steps": [
                {"t": s.t, "state": s.state,
                 "move": list(s.move) if s.move is not None else None,
                 "reward": s.reward, "kind": s.kind}
                for s in self.steps
            ],
            "best_so_far": [[t, b] for t, b in self.best_so_far],
        }


def run_trajectory(policy: Policy, mdp: LocalSearchMdp, start: int, horizon: int,
                   seed: int) -> TrajectoryRecord:
    """Roll the policy forward for up to `horizon` steps; stops early (and
    records `terminated_at`) once the policy is absorbed.  Deterministic for
    a given seed."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    mdp.check_state(start)
    rng = np.random.default_rng(seed)
    state = start
    best = mdp.value(start)
    steps: list[TrajectoryStep] = []
    best_curve = [(0, best)]
    terminated_at = None
    for t in range(horizon):
        if policy.is_terminal(mdp, state, t):
            terminated_at = t
            break
        nxt, move, reward = step(policy, mdp, state, t, rng)
        kind = move_kind(mdp, move).name.lower() if move is not None else None
        steps.append(TrajectoryStep(t, state, move, reward, kind))
        state = nxt
        value = mdp.value(state)
        if value > best:
            best = value
        best_curve.append((t + 1, best))
    return TrajectoryRecord(seed=int(seed), start=start, steps=steps,
                            best_so_far=best_curve, terminated_at=terminated_at)


def generate_records(policy: Policy, mdp: LocalSearchMdp, start_rule, horizon: int,
                     num_trajectories: int, base_seed: int) -> list[TrajectoryRecord]:
    """Run a batch of independently seeded trajectories.

    `start_rule` is either a fixed start state (int) or the string
    ``uniform`` for a uniformly random start per trajectory.
    """
    if num_trajectories < 0:
        raise ValueError(f"num_trajectories must be >= 0, got {num_trajectories}")
    records = []
    for index in range(num_trajectories):
        walk_seed = derive_seed(base_seed, index, stream=0)
        if start_rule == "uniform":
            start_rng = np.random.default_rng(derive_seed(base_seed, index, stream=1))
            start = int(start_rng.integers(mdp.num_states))
        elif isinstance(start_rule, int) and not isinstance(start_rule, bool):
            start = start_rule
        else:
            raise ValueError(f"start rule must be an int state or 'uniform', got {start_rule!r}")
        records.append(run_trajectory(policy, mdp, start, horizon, walk_seed))
    return records


def _bucket_counts(records, bucket_width: int, horizon: int) -> tuple[list[int], list[int]]:
    if bucket_width < 1:
        raise ValueError(f"bucket width must be >= 1, got {bucket_width}")
    buckets = -(-horizon // bucket_width) if horizon > 0 else 0
    explore = [0] * buckets
    exploit = [0] * buckets
    for record in records:
        for s in record.steps:
            if s.kind is None:
                continue
            b = s.t // bucket_width
            if s.kind == "exploration":
                explore[b] += 1
            else:
                exploit[b] += 1
    return explore, exploit


def exploration_ratio_by_bucket(records, bucket_width: int, horizon: int) -> list[float]:
    """Per-bucket (#exploration moves / #exploitation moves); stays excluded.
    Extended-real conventions: x/0 -> +inf for x > 0 and 0/0 -> 0."""
    explore, exploit = _bucket_counts(records, bucket_width, horizon)
    out = []
    for e, x in zip(explore, exploit):
        if x > 0:
            out.append(e / x)
        else:
            out.append(math.inf if e > 0 else 0.0)
    return out


def exploration_fraction_by_bucket(records, bucket_width: int, horizon: int) -> list[float | None]:
    """Per-bucket fraction of moves that are exploration; None when the bucket
    contains no moves at all."""
    explore, exploit = _bucket_counts(records, bucket_width, horizon)
    return [e / (e + x) if e + x > 0 else None for e, x in zip(explore, exploit)]


def best_so_far_curve(records, horizon: int):
    """Across-trajectory mean and quartiles of the running best at each t;
    early-terminated trajectories hold their final best."""
    if not records:
        return [], {}
    matrix = np.empty((len(records), horizon + 1))
    for k, record in enumerate(records):
        series = [b for _, b in record.best_so_far]
        if len(series) < horizon + 1:
            series = series + [series[-1]] * (horizon + 1 - len(series))
        matrix[k] = series
    means = [float(x) for x in matrix.mean(axis=0)]
    quartiles = {f"p{int(q * 100)}": [float(x) for x in np.quantile(matrix, q, axis=0)]
                 for q in (0.25, 0.5, 0.75)}
    return means, quartiles


@dataclass
class RunSummary:
    """Order-independent aggregate of a batch of trajectory records."""

    num_trajectories: int
    horizon: int
    bucket_width: int
    hit_rate: float | None              # None without a known optimum or records
    best_final_mean: float | None
    best_final_quantiles: dict[str, float] | None
    exploration_fraction: list[float | None]
    exploration_ratio: list[float]

    def to_json_dict(self) -> dict:
        return {
            "num_trajectories": self.num_trajectories,
            "horizon": self.horizon,
            "bucket_width": self.bucket_width,
            "hit_rate": self.hit_rate,
            "best_final_mean": self.best_final_mean,
            "best_final_quantiles": self.best_final_quantiles,
            "exploration_fraction": self.exploration_fraction,
            "exploration_ratio": self.exploration_ratio,
        }

    CSV_HEADER = ("num_trajectories", "hit_rate", "best_final_mean",
                  "best_final_p0", "best_final_p25", "best_final_p50",
                  "best_final_p75", "best_final_p100")

    def csv_row(self):
        q = self.best_final_quantiles or {}
        return (self.num_trajectories, self.hit_rate, self.best_final_mean,
                q.get("p0"), q.get("p25"), q.get("p50"), q.get("p75"), q.get("p100"))


def summarize_records(records, horizon: int, bucket_width: int = 1,
                      known_optimum: float | None = None) -> RunSummary:
    """Aggregate a list of trajectory records (order-independent)."""
    count = len(records)
    if count == 0:
        return RunSummary(0, horizon, bucket_width, None, None, None, [], [])
    finals = np.sort(np.array([record.final_best for record in records]))
    quantiles = {f"p{int(q * 100)}": float(np.quantile(finals, q))
                 for q in (0.0, 0.25, 0.5, 0.75, 1.0)}
    hit_rate = None
    if known_optimum is not None:
        hit_rate = sum(1 for record in records if record.final_best >= known_optimum) / count
    return RunSummary(
        num_trajectories=count,
        horizon=horizon,
        bucket_width=bucket_width,
        hit_rate=hit_rate,
        best_final_mean=float(np.mean(finals)),
        best_final_quantiles=quantiles,
        exploration_fraction=exploration_fraction_by_bucket(records, bucket_width, horizon),
        exploration_ratio=exploration_ratio_by_bucket(records, bucket_width, horizon),
    )


def run_batch(policy: Policy, mdp: LocalSearchMdp, start_rule, horizon: int,
              num_trajectories: int, base_seed: int, bucket_width: int = 1) -> RunSummary:
    """generate_records + summarize_records in one call."""
    records = generate_records(policy, mdp, start_rule, horizon, num_trajectories, base_seed)
    return summarize_records(records, horizon, bucket_width, mdp.objective.known_optimum)
