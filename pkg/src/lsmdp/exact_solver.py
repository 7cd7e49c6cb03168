"""Dense ground-truth machinery for small instances.

Frozen per-time transition matrices and reward vectors of a policy, policy
evaluation (stationary fixed point and exact finite-horizon accumulation),
optimal values by value iteration, and an exhaustive trajectory-expansion
oracle that is independent of the matrix path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .policies import Policy
from .search_space import LocalSearchMdp, Move, ResourceLimitError

DENSE_STATE_CAP = 14            # 2**14 x 2**14 doubles is the dense budget
ENUMERATION_LEAF_CAP = 10_000_000


class DivergentValueError(ValueError):
    """Undiscounted evaluation of a policy that keeps collecting reward."""


def _check_dense(n: int) -> None:
    if n > DENSE_STATE_CAP:
        raise ResourceLimitError(f"dense solvers are capped at n <= {DENSE_STATE_CAP}, got n={n}")


@dataclass
class PolicyMatrices:
    """Row-stochastic transition matrix and expected one-step reward vector of
    a policy frozen at time t (stay mass lands on the diagonal)."""

    P: np.ndarray
    r: np.ndarray
    t: int


def freeze(policy: Policy, mdp: LocalSearchMdp, t: int = 0) -> PolicyMatrices:
    _check_dense(mdp.n)
    size = mdp.num_states
    P = np.zeros((size, size))
    r = np.zeros(size)
    for i in range(size):
        dist = policy.action_distribution(mdp, i, t)
        P[i, i] += dist.stay_probability
        current = mdp.value(i)
        gain = 0.0
        for move, p in dist.entries:
            P[i, move.dst] += p
            gain += p * (mdp.value(move.dst) - current)
        r[i] = gain
    return PolicyMatrices(P=P, r=r, t=t)


@dataclass
class ValueVector:
    """Expected-total-reward vector over all states."""

    v: np.ndarray
    discount: float
    method: str
    residual: float | None = None
    horizon: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "discount": self.discount,
            "method": self.method,
            "residual": self.residual,
            "horizon": self.horizon,
            "values": [float(x) for x in self.v],
        }


def _recurrent_states(P: np.ndarray) -> np.ndarray:
    """Boolean mask of states lying in closed communicating classes of P."""
    support = csr_matrix(P > 0.0)
    count, labels = csgraph.connected_components(support, directed=True, connection="strong")
    closed = np.ones(count, dtype=bool)
    rows, cols = support.nonzero()
    for i, j in zip(rows, cols):
        if labels[i] != labels[j]:
            closed[labels[i]] = False
    return closed[labels]


def evaluate_stationary(matrices: PolicyMatrices, discount: float) -> ValueVector:
    """Total expected (discounted) reward of the frozen policy from every state.

    For discount < 1 this solves the linear fixed point v = r + discount*P*v
    directly.  discount = 1 is allowed only when every closed recurrent class
    is reward-free (validated; the values are then solved on the transient
    part and are 0 on the recurrent part).  The sup-norm fixed-point residual
    is reported on the result.
    """
    P, r = matrices.P, matrices.r
    size = len(r)
    if 0.0 <= discount < 1.0:
        v = np.linalg.solve(np.eye(size) - discount * P, r)
    elif discount == 1.0:
        recurrent = _recurrent_states(P)
        worst = float(np.max(np.abs(r[recurrent]))) if recurrent.any() else 0.0
        if worst > 1e-12:
            raise DivergentValueError(
                f"undiscounted value diverges: a recurrent class carries expected "
                f"step reward {worst:g}")
        v = np.zeros(size)
        if (~recurrent).any():
            idx = np.flatnonzero(~recurrent)
            sub = P[np.ix_(idx, idx)]
            v[idx] = np.linalg.solve(np.eye(len(idx)) - sub, r[idx])
    else:
        raise ValueError(f"discount must lie in [0, 1], got {discount!r}")
    residual = float(np.max(np.abs(v - (r + discount * (P @ v)))))
    return ValueVector(v=v, discount=discount, method="policy_eval", residual=residual)


def evaluate_nonstationary(policy: Policy, mdp: LocalSearchMdp, horizon: int,
                           discount: float) -> ValueVector:
    """Exact finite-horizon value by forward accumulation: the policy is
    frozen at each t = 0..horizon-1 and discounted rewards are pushed through
    the product of the earlier transition matrices."""
    _check_dense(mdp.n)
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if not 0.0 <= discount <= 1.0:
        raise ValueError(f"discount must lie in [0, 1], got {discount!r}")
    size = mdp.num_states
    v = np.zeros(size)
    occupancy = np.eye(size)
    frozen = freeze(policy, mdp, 0) if policy.stationary else None
    for t in range(horizon):
        matrices = frozen if frozen is not None else freeze(policy, mdp, t)
        v += (discount ** t) * (occupancy @ matrices.r)
        if t + 1 < horizon:
            occupancy = occupancy @ matrices.P
    return ValueVector(v=v, discount=discount, method="policy_eval_finite", horizon=horizon)


def value_iteration(mdp: LocalSearchMdp, discount: float,
                    tolerance: float = 1e-10) -> tuple[ValueVector, dict[int, Move | None]]:
    """Optimal values over all moves plus an explicit stay action (reward 0).

    The stay action realizes voluntary termination, so every randomization
    over moving and staying — hence every built-in policy — is dominated by
    the returned values.  Iterates until the contraction bound guarantees the
    sup-norm error is below `tolerance`.  Returns (values, greedy) where
    greedy maps state -> Move, or None for stay; ties prefer stay, then the
    lowest-numbered neighbor.
    """
    _check_dense(mdp.n)
    if not 0.0 < discount < 1.0:
        raise ValueError(f"value iteration needs discount in (0, 1), got {discount!r}")
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance!r}")
    size = mdp.num_states
    values = [mdp.value(i) for i in range(size)]
    neighborhoods = [mdp.neighbors(i) for i in range(size)]
    v = [0.0] * size
    threshold = tolerance * (1.0 - discount) / discount
    delta = 0.0
    for _ in range(1_000_000):
        new = [0.0] * size
        delta = 0.0
        for i in range(size):
            fi = values[i]
            best = discount * v[i]  # stay
            for j in neighborhoods[i]:
                q = values[j] - fi + discount * v[j]
                if q > best:
                    best = q
            new[i] = best
            diff = abs(best - v[i])
            if diff > delta:
                delta = diff
        v = new
        if delta <= threshold:
            break
    else:
        raise RuntimeError("value iteration failed to converge")
    greedy: dict[int, Move | None] = {}
    for i in range(size):
        fi = values[i]
        best_q = discount * v[i]
        best_move: Move | None = None
        for j in neighborhoods[i]:
            q = values[j] - fi + discount * v[j]
            if q > best_q:
                best_q = q
                best_move = Move(i, j)
        greedy[i] = best_move
    vec = ValueVector(v=np.array(v), discount=discount, method="value_iteration",
                      residual=delta)
    return vec, greedy


def enumerate_trajectories(policy: Policy, mdp: LocalSearchMdp, start: int,
                           horizon: int, discount: float = 1.0) -> float:
    """Exact expected total (discounted) reward by expanding every branch of
    the decision tree — no matrices, no memoization, so it serves as an
    independent oracle for both evaluators."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    mdp.check_state(start)
    branching = len(mdp.neighbors(start)) + 1
    if branching ** horizon > ENUMERATION_LEAF_CAP:
        raise ResourceLimitError(
            f"enumeration would expand about {branching}**{horizon} leaves "
            f"(cap {ENUMERATION_LEAF_CAP})")

    def expand(state: int, t: int) -> float:
        if t == horizon:
            return 0.0
        dist = policy.action_distribution(mdp, state, t)
        total = 0.0
        if dist.stay_probability > 0.0:
            total += dist.stay_probability * discount * expand(state, t + 1)
        current = mdp.value(state)
        for move, p in dist.entries:
            total += p * (mdp.value(move.dst) - current + discount * expand(move.dst, t + 1))
        return total

    return expand(start, 0)
