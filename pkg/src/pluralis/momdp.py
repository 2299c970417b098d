"""Tabular multi-objective MDPs: construction, rollouts, exact policy evaluation.

States and actions are integer indices. Transition and reward tables are kept
flat, one record per (state, action, next_state) triple with positive
probability, so policy evaluation and value iteration reduce to vectorized
gathers and segment sums.
"""
from __future__ import annotations

import hashlib
import itertools
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError

MAX_STATES = 10_000
MAX_ACTIONS = 100
MAX_OBJECTIVES = 10
ENUMERATION_GUARD = 10 ** 6

# Bounds for the brute-force-oracle profile of random_momdp; exceeding them
# warns (the generator still works, the enumeration oracle just gets slow).
ORACLE_STATES = 10
ORACLE_ACTIONS = 3
ORACLE_OBJECTIVES = 3


@dataclass(frozen=True, eq=False)
class Momdp:
    """Immutable tabular MOMDP with vector rewards.

    The flat_* arrays hold one record per (s, a, s') triple with p > 0,
    sorted by (s, a, s'). All arrays are read-only views; the fingerprint
    is a sha256 over everything that affects dynamics, rewards, and
    episode semantics (presentation metadata in grid_info is excluded).
    """

    num_states: int
    num_objectives: int
    gamma: float
    horizon: int
    start_state: int
    terminal_states: frozenset[int]
    objective_labels: tuple[str, ...]
    action_counts: np.ndarray      # (S,) int64, 0 at terminal states
    max_actions: int
    flat_state: np.ndarray         # (N,) int64
    flat_action: np.ndarray        # (N,) int64
    flat_next: np.ndarray          # (N,) int64
    flat_prob: np.ndarray          # (N,) float64
    flat_reward: np.ndarray        # (N, d) float64
    fingerprint: str
    grid_info: dict | None = field(default=None)

    def transition_row(self, state: int, action: int):
        """Next states, probabilities, and rewards for one (s, a) pair."""
        if not 0 <= state < self.num_states:
            raise ValueError(f"state {state} out of range")
        if not 0 <= action < self.action_counts[state]:
            raise ValueError(f"action {action} invalid at state {state}")
        mask = (self.flat_state == state) & (self.flat_action == action)
        return self.flat_next[mask], self.flat_prob[mask], self.flat_reward[mask]

    @property
    def num_transitions(self) -> int:
        return int(self.flat_state.shape[0])


@dataclass(frozen=True)
class Policy:
    """Deterministic stationary policy.

    action_map has one entry per state; terminal states carry -1. The id is
    the lexicographic rank of the action map over non-terminal states in
    ascending state order, so ids are stable across runs.
    """

    action_map: tuple[int, ...]
    id: int


@dataclass(frozen=True)
class TrajectoryStep:
    state: int
    action: int
    next_state: int
    reward: tuple[float, ...]


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]
    seed: int
    num_objectives: int

    def __len__(self) -> int:
        return len(self.steps)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def make_momdp(
    transitions,
    *,
    gamma: float,
    horizon: int,
    start_state: int = 0,
    terminal_states=(),
    objective_labels=None,
    grid_info: dict | None = None,
) -> Momdp:
    """Build and validate a Momdp from nested transition lists.

    transitions[s][a] is an iterable of (next_state, probability, reward)
    with reward a length-d sequence. Terminal states must have an empty
    action list. Zero-probability entries are dropped; each remaining row
    must sum to 1 within 1e-9.
    """
    num_states = len(transitions)
    if not 1 <= num_states <= MAX_STATES:
        raise ValueError(f"state count {num_states} outside 1..{MAX_STATES}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma {gamma} outside [0, 1]")
    if not (isinstance(horizon, (int, np.integer)) and horizon >= 1):
        raise ValueError(f"horizon {horizon} must be a positive integer")
    if not 0 <= start_state < num_states:
        raise ValueError(f"start_state {start_state} out of range")
    terminal = frozenset(int(s) for s in terminal_states)
    for s in terminal:
        if not 0 <= s < num_states:
            raise ValueError(f"terminal state {s} out of range")

    num_objectives = None
    counts = np.zeros(num_states, dtype=np.int64)
    rec_state, rec_action, rec_next, rec_prob, rec_reward = [], [], [], [], []
    for s, rows in enumerate(transitions):
        rows = list(rows)
        if s in terminal:
            if rows:
                raise ValueError(f"terminal state {s} declares outgoing transitions")
            continue
        if not 1 <= len(rows) <= MAX_ACTIONS:
            raise ValueError(
                f"state {s} has {len(rows)} actions, outside 1..{MAX_ACTIONS}"
            )
        counts[s] = len(rows)
        for a, row in enumerate(rows):
            total = 0.0
            kept = 0
            for entry in row:
                ns, p, r = entry
                ns = int(ns)
                p = float(p)
                if not 0 <= ns < num_states:
                    raise ValueError(f"(s={s}, a={a}): next state {ns} out of range")
                if not math.isfinite(p) or p < 0.0:
                    raise ValueError(f"(s={s}, a={a}): bad probability {p}")
                total += p
                if p == 0.0:
                    continue
                r = np.asarray(r, dtype=np.float64).reshape(-1)
                if num_objectives is None:
                    num_objectives = r.shape[0]
                    if not 1 <= num_objectives <= MAX_OBJECTIVES:
                        raise ValueError(
                            f"reward dimension {num_objectives} outside 1..{MAX_OBJECTIVES}"
                        )
                if r.shape[0] != num_objectives:
                    raise ValueError(
                        f"(s={s}, a={a}): reward of length {r.shape[0]}, expected {num_objectives}"
                    )
                if not np.all(np.isfinite(r)):
                    raise ValueError(f"(s={s}, a={a}): non-finite reward component")
                rec_state.append(s)
                rec_action.append(a)
                rec_next.append(ns)
                rec_prob.append(p)
                rec_reward.append(r)
                kept += 1
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"(s={s}, a={a}): probabilities sum to {total!r}, not 1")
            if kept == 0:
                raise ValueError(f"(s={s}, a={a}): no positive-probability transitions")

    if num_objectives is None:
        raise ValueError("no transitions at all: every state is terminal")
    if objective_labels is None:
        objective_labels = tuple(f"obj_{i}" for i in range(num_objectives))
    else:
        objective_labels = tuple(str(x) for x in objective_labels)
        if len(objective_labels) != num_objectives:
            raise ValueError(
                f"{len(objective_labels)} objective labels for {num_objectives} objectives"
            )

    order = np.lexsort(
        (np.asarray(rec_next), np.asarray(rec_action), np.asarray(rec_state))
    )
    flat_state = _readonly(np.asarray(rec_state, dtype=np.int64)[order])
    flat_action = _readonly(np.asarray(rec_action, dtype=np.int64)[order])
    flat_next = _readonly(np.asarray(rec_next, dtype=np.int64)[order])
    flat_prob = _readonly(np.asarray(rec_prob, dtype=np.float64)[order])
    flat_reward = _readonly(np.stack(rec_reward).astype(np.float64)[order])
    counts = _readonly(counts)

    h = hashlib.sha256()
    h.update(struct.pack("<qqqq", num_states, num_objectives, horizon, start_state))
    h.update(struct.pack("<d", gamma))
    h.update(np.asarray(sorted(terminal), dtype=np.int64).tobytes())
    h.update(counts.tobytes())
    for arr in (flat_state, flat_action, flat_next, flat_prob, flat_reward):
        h.update(arr.tobytes())
    h.update("\x1f".join(objective_labels).encode("utf-8"))

    return Momdp(
        num_states=num_states,
        num_objectives=num_objectives,
        gamma=float(gamma),
        horizon=int(horizon),
        start_state=int(start_state),
        terminal_states=terminal,
        objective_labels=objective_labels,
        action_counts=counts,
        max_actions=int(counts.max()),
        flat_state=flat_state,
        flat_action=flat_action,
        flat_next=flat_next,
        flat_prob=flat_prob,
        flat_reward=flat_reward,
        fingerprint=h.hexdigest(),
        grid_info=grid_info,
    )


def random_momdp(seed: int, sizes, *, gamma: float = 0.95) -> Momdp:
    """Seeded dense random MOMDP: sizes = (num_states, num_actions, d, horizon).

    Transition rows are uniform draws normalized to sum to 1; rewards are
    uniform in [-1, 1] per (s, a, s') and objective. Identical (seed, sizes,
    gamma) give a bit-identical Momdp. Sizes beyond the oracle profile
    (|S| <= 10, |A| <= 3, d <= 3) warn but still build.
    """
    num_states, num_actions, d, horizon = (int(x) for x in sizes)
    if min(num_states, num_actions, d, horizon) < 1:
        raise ValueError(f"sizes {sizes} must all be >= 1")
    if num_states > ORACLE_STATES or num_actions > ORACLE_ACTIONS or d > ORACLE_OBJECTIVES:
        warnings.warn(
            f"sizes {sizes} exceed the oracle profile "
            f"(<= {ORACLE_STATES} states, {ORACLE_ACTIONS} actions, {ORACLE_OBJECTIVES} objectives); "
            "brute-force checks will be slow or infeasible",
            stacklevel=2,
        )
    rng = np.random.default_rng(seed)
    probs = rng.random((num_states, num_actions, num_states))
    probs /= probs.sum(axis=-1, keepdims=True)
    rewards = rng.uniform(-1.0, 1.0, size=(num_states, num_actions, num_states, d))
    transitions = [
        [
            [(ns, probs[s, a, ns], rewards[s, a, ns]) for ns in range(num_states)]
            for a in range(num_actions)
        ]
        for s in range(num_states)
    ]
    return make_momdp(transitions, gamma=gamma, horizon=horizon, start_state=0)


def _as_action_array(momdp: Momdp, policy) -> np.ndarray:
    actions = np.asarray(
        policy.action_map if isinstance(policy, Policy) else policy, dtype=np.int64
    )
    if actions.shape != (momdp.num_states,):
        raise ValueError(
            f"action map of length {actions.shape}, expected ({momdp.num_states},)"
        )
    nonterminal = momdp.action_counts > 0
    bad = nonterminal & ((actions < 0) | (actions >= momdp.action_counts))
    if np.any(bad):
        s = int(np.flatnonzero(bad)[0])
        raise ValueError(f"policy picks invalid action {actions[s]} at state {s}")
    return actions


def policy_rank(momdp: Momdp, action_map) -> int:
    """Lexicographic rank of an action map over non-terminal states."""
    actions = _as_action_array(momdp, action_map)
    rank = 0
    for s in range(momdp.num_states):
        c = int(momdp.action_counts[s])
        if c == 0:
            continue
        rank = rank * c + int(actions[s])
    return rank


def policy_from_action_map(momdp: Momdp, action_map) -> Policy:
    actions = _as_action_array(momdp, action_map)
    full = tuple(
        int(actions[s]) if momdp.action_counts[s] > 0 else -1
        for s in range(momdp.num_states)
    )
    return Policy(action_map=full, id=policy_rank(momdp, actions))


def policy_from_id(momdp: Momdp, policy_id: int) -> Policy:
    """Inverse of the lexicographic rank used for Policy.id."""
    total = num_policies(momdp)
    if not 0 <= policy_id < total:
        raise ValueError(f"policy id {policy_id} outside 0..{total - 1}")
    actions = np.zeros(momdp.num_states, dtype=np.int64)
    rem = int(policy_id)
    for s in range(momdp.num_states - 1, -1, -1):
        c = int(momdp.action_counts[s])
        if c == 0:
            continue
        rem, actions[s] = divmod(rem, c)
    return policy_from_action_map(momdp, actions)


def num_policies(momdp: Momdp) -> int:
    count = 1
    for c in momdp.action_counts:
        if c > 0:
            count *= int(c)
    return count


def enumerate_policies(momdp: Momdp) -> list[Policy]:
    """All deterministic stationary policies, ids ascending (lexicographic).

    Guarded: refuses when the count exceeds 10^6.
    """
    count = num_policies(momdp)
    if count > ENUMERATION_GUARD:
        raise GuardError(
            f"{count} deterministic policies exceed the enumeration guard of {ENUMERATION_GUARD}"
        )
    ranges = [
        range(int(c)) if c > 0 else (-1,) for c in momdp.action_counts
    ]
    policies = []
    for pid, combo in enumerate(itertools.product(*ranges)):
        policies.append(Policy(action_map=tuple(int(a) for a in combo), id=pid))
    return policies


def rollout(momdp: Momdp, policy: Policy, seed: int) -> Trajectory:
    """Sample one episode following the policy; deterministic given seed.

    Stops on entering a terminal state or after horizon steps. Rows with a
    single successor consume no randomness, so fully deterministic dynamics
    yield seed-independent step sequences.
    """
    actions = _as_action_array(momdp, policy)
    rng = np.random.default_rng(seed)
    steps = []
    state = momdp.start_state
    for _ in range(momdp.horizon):
        if state in momdp.terminal_states:
            break
        action = int(actions[state])
        nxt, prob, rew = momdp.transition_row(state, action)
        if nxt.shape[0] == 1:
            idx = 0
        else:
            cdf = np.cumsum(prob)
            idx = int(np.searchsorted(cdf, rng.random(), side="right"))
            idx = min(idx, nxt.shape[0] - 1)
        steps.append(
            TrajectoryStep(
                state=state,
                action=action,
                next_state=int(nxt[idx]),
                reward=tuple(float(x) for x in rew[idx]),
            )
        )
        state = int(nxt[idx])
    return Trajectory(
        steps=tuple(steps), seed=int(seed), num_objectives=momdp.num_objectives
    )


def discounted_return(trajectory: Trajectory, gamma: float) -> np.ndarray:
    """Discounted vector return of a trajectory.

    Evaluated backwards in Horner form (total = R_t + gamma * total), which
    makes the head/tail recursion hold bit-exactly in float arithmetic.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma {gamma} outside [0, 1]")
    total = np.zeros(trajectory.num_objectives, dtype=np.float64)
    for step in reversed(trajectory.steps):
        total = np.asarray(step.reward, dtype=np.float64) + gamma * total
    return total


def policy_value(momdp: Momdp, policy) -> np.ndarray:
    """Exact expected discounted vector return from the start state.

    Finite-horizon dynamic programming over all d reward components at once;
    no sampling involved.
    """
    actions = _as_action_array(momdp, policy)
    sel = momdp.flat_action == actions[momdp.flat_state]
    st = momdp.flat_state[sel]
    nx = momdp.flat_next[sel]
    pr = momdp.flat_prob[sel]
    rw = momdp.flat_reward[sel]
    num_states, d = momdp.num_states, momdp.num_objectives
    values = np.zeros((num_states, d), dtype=np.float64)
    for _ in range(momdp.horizon):
        contrib = pr[:, None] * (rw + momdp.gamma * values[nx])
        values = np.stack(
            [
                np.bincount(st, weights=contrib[:, j], minlength=num_states)
                for j in range(d)
            ],
            axis=1,
        )
    return values[momdp.start_state].copy()
