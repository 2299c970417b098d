"""Pareto fronts and convex coverage sets for tabular MOMDPs.

The scalarized solver runs finite-horizon value iteration and then polishes
the stationary readout with deterministic multi-start coordinate ascent.
Plain value iteration alone is not enough: its time-indexed optimum is not
always achievable by a stationary policy, and the greedy stationary readout
can land measurably below the best stationary policy. The ascent closes that
gap; an early exit certifies optimality whenever a candidate matches the
unconstrained value-iteration bound.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .momdp import (
    Momdp,
    Policy,
    enumerate_policies,
    policy_from_action_map,
    policy_value,
)
from .weights import simplex_grid, validate_weight_vector

VALUE_DEDUP_TOL = 1e-9
ASCENT_IMPROVE_TOL = 1e-12
RANDOM_RESTARTS = 8
_RESTART_SEED = 0x5EED


class InvocationCounter:
    """Counts solver invocations so no-retraining claims are checkable."""

    def __init__(self):
        self.count = 0

    def bump(self) -> None:
        self.count += 1

    def reset(self) -> None:
        self.count = 0


solver_calls = InvocationCounter()


def pareto_dominates(a, b) -> bool:
    """Strict componentwise dominance, no tolerance."""
    av = np.asarray(a, dtype=np.float64).reshape(-1)
    bv = np.asarray(b, dtype=np.float64).reshape(-1)
    if av.shape != bv.shape:
        raise ValueError(f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}")
    return bool(np.all(av >= bv) and np.any(av > bv))


def pareto_front(values) -> list[int]:
    """Indices of non-dominated vectors, ascending; duplicates all kept."""
    vals = [np.asarray(v, dtype=np.float64).reshape(-1) for v in values]
    if not vals:
        raise ValueError("empty value list")
    d = vals[0].shape[0]
    for i, v in enumerate(vals):
        if v.shape[0] != d:
            raise ValueError(f"value {i} has dimension {v.shape[0]}, expected {d}")
    keep = []
    for i, v in enumerate(vals):
        if not any(pareto_dominates(other, v) for j, other in enumerate(vals) if j != i):
            keep.append(i)
    return keep


@dataclass(frozen=True, eq=False)
class CoverageEntry:
    policy: Policy
    value: np.ndarray
    witness_weights: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True, eq=False)
class CoverageSet:
    """Non-dominated policies with their exact vector values.

    kind is "pareto" (full front from enumeration) or "ccs" (convex coverage
    set from grid scalarization). Construction re-checks pairwise
    non-dominance and id uniqueness, so a CoverageSet in hand is always
    internally consistent.
    """

    kind: str
    momdp_fingerprint: str
    entries: tuple[CoverageEntry, ...]
    _id_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("pareto", "ccs"):
            raise ValueError(f"unknown coverage kind {self.kind!r}")
        if not self.entries:
            raise ValueError("coverage set has no entries")
        d = self.entries[0].value.shape[0]
        ids = set()
        for e in self.entries:
            if e.value.shape != (d,):
                raise ValueError("coverage entries with mixed dimensions")
            if e.policy.id in ids:
                raise ValueError(f"duplicate policy id {e.policy.id}")
            ids.add(e.policy.id)
        for i, a in enumerate(self.entries):
            for b in self.entries[i + 1:]:
                if pareto_dominates(a.value, b.value) or pareto_dominates(b.value, a.value):
                    raise ValueError(
                        f"entry {a.policy.id} and entry {b.policy.id} are ordered by dominance"
                    )
        self._id_index.update({e.policy.id: i for i, e in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def num_objectives(self) -> int:
        return int(self.entries[0].value.shape[0])

    def values(self) -> np.ndarray:
        return np.stack([e.value for e in self.entries])

    def entry_by_id(self, policy_id: int) -> CoverageEntry:
        idx = self._id_index.get(policy_id)
        if idx is None:
            raise KeyError(f"no coverage entry with policy id {policy_id}")
        return self.entries[idx]


def _frozen_value(v: np.ndarray) -> np.ndarray:
    out = np.asarray(v, dtype=np.float64).copy()
    out.flags.writeable = False
    return out


def _scalar_policy_value(momdp: Momdp, sel, r_scalar: np.ndarray) -> float:
    st = momdp.flat_state[sel]
    nx = momdp.flat_next[sel]
    pr = momdp.flat_prob[sel]
    rs = r_scalar[sel]
    values = np.zeros(momdp.num_states, dtype=np.float64)
    for _ in range(momdp.horizon):
        values = np.bincount(
            st, weights=pr * (rs + momdp.gamma * values[nx]), minlength=momdp.num_states
        )
    return float(values[momdp.start_state])


def _value_iteration(momdp: Momdp, r_scalar: np.ndarray):
    """Backward induction on scalar rewards.

    Returns the greedy stationary readout at every depth (the deepest one
    first) and the unconstrained optimal start value, which upper-bounds
    every stationary policy. Argmax ties go to the lowest action index.
    """
    solver_calls.bump()
    num_states, max_a = momdp.num_states, momdp.max_actions
    pair = momdp.flat_state * max_a + momdp.flat_action
    width = num_states * max_a
    invalid = np.bincount(pair, minlength=width).reshape(num_states, max_a) == 0
    terminal = momdp.action_counts == 0
    values = np.zeros(num_states, dtype=np.float64)
    readouts = []
    for _ in range(momdp.horizon):
        q = np.bincount(
            pair,
            weights=momdp.flat_prob * (r_scalar + momdp.gamma * values[momdp.flat_next]),
            minlength=width,
        ).reshape(num_states, max_a)
        q[invalid] = -np.inf
        greedy = q.argmax(axis=1)
        values = q[np.arange(num_states), greedy]
        greedy[terminal] = -1
        values[terminal] = 0.0
        readouts.append(greedy)
    readouts.reverse()
    return readouts, float(values[momdp.start_state])


def _coordinate_ascent(momdp: Momdp, actions: np.ndarray, r_scalar: np.ndarray, bound: float):
    """First-improvement sweeps over single-state action switches."""
    sel = momdp.flat_action == actions[momdp.flat_state]
    value = _scalar_policy_value(momdp, sel, r_scalar)
    nonterminal = np.flatnonzero(momdp.action_counts > 0)
    changed = True
    while changed and value < bound - ASCENT_IMPROVE_TOL:
        changed = False
        for s in nonterminal:
            current = actions[s]
            for a in range(int(momdp.action_counts[s])):
                if a == current:
                    continue
                actions[s] = a
                cand_sel = momdp.flat_action == actions[momdp.flat_state]
                cand = _scalar_policy_value(momdp, cand_sel, r_scalar)
                if cand > value + ASCENT_IMPROVE_TOL:
                    value = cand
                    current = a
                    changed = True
                else:
                    actions[s] = current
    return actions, value


def solve_scalarized(momdp: Momdp, w) -> tuple[Policy, np.ndarray]:
    """Best stationary deterministic policy for the linear scalarization w.

    Value iteration supplies candidate stationary readouts at every horizon
    depth; each distinct readout, plus deterministic random restarts, is
    polished by coordinate ascent. The search stops early when a candidate
    achieves the unconstrained value-iteration optimum, which certifies it.
    Returns the policy and its exact vector value.
    """
    weights = validate_weight_vector(w, momdp.num_objectives)
    solver_calls.bump()
    r_scalar = momdp.flat_reward @ weights
    readouts, v_star = _value_iteration(momdp, r_scalar)

    starts = []
    seen = set()
    for cand in readouts:
        key = cand.tobytes()
        if key not in seen:
            seen.add(key)
            starts.append(cand)
    rng = np.random.default_rng(_RESTART_SEED)
    highs = np.maximum(momdp.action_counts, 1)
    for _ in range(RANDOM_RESTARTS):
        rand = rng.integers(0, highs)
        rand[momdp.action_counts == 0] = -1
        key = rand.tobytes()
        if key not in seen:
            seen.add(key)
            starts.append(rand)

    best_actions = None
    best_value = -np.inf
    for start in starts:
        actions, value = _coordinate_ascent(momdp, start.copy(), r_scalar, v_star)
        if value > best_value:
            best_value = value
            best_actions = actions
        if best_value >= v_star - ASCENT_IMPROVE_TOL:
            break

    policy = policy_from_action_map(momdp, best_actions)
    return policy, policy_value(momdp, policy)


def convex_coverage_set(momdp: Momdp, resolution: int) -> CoverageSet:
    """Grid scalarization over the weight simplex, deduped and pruned.

    Every grid weight is attributed to the entry it produced (witness
    weights, in grid order); entries matching an earlier value within 1e-9
    merge into it; dominated entries are pruned at the end.
    """
    grid = simplex_grid(resolution, momdp.num_objectives)
    values: list[np.ndarray] = []
    policies: list[Policy] = []
    witnesses: list[list[tuple[float, ...]]] = []
    for row in grid:
        policy, value = solve_scalarized(momdp, row)
        w_tuple = tuple(float(x) for x in row)
        for i, known in enumerate(values):
            if np.max(np.abs(known - value)) <= VALUE_DEDUP_TOL:
                witnesses[i].append(w_tuple)
                break
        else:
            values.append(value)
            policies.append(policy)
            witnesses.append([w_tuple])
    keep = pareto_front(values)
    entries = tuple(
        CoverageEntry(
            policy=policies[i],
            value=_frozen_value(values[i]),
            witness_weights=tuple(witnesses[i]),
        )
        for i in keep
    )
    return CoverageSet(kind="ccs", momdp_fingerprint=momdp.fingerprint, entries=entries)


def pareto_set_bruteforce(momdp: Momdp) -> CoverageSet:
    """Authoritative oracle: evaluate every policy, keep the Pareto front.

    Subject to the policy-enumeration guard; intended for oracle-scale
    instances only.
    """
    policies = enumerate_policies(momdp)
    values = [policy_value(momdp, p) for p in policies]
    keep = pareto_front(values)
    entries = tuple(
        CoverageEntry(policy=policies[i], value=_frozen_value(values[i]))
        for i in keep
    )
    return CoverageSet(kind="pareto", momdp_fingerprint=momdp.fingerprint, entries=entries)


def coverage_to_json(cs: CoverageSet) -> dict:
    """Plain-dict form of a CoverageSet; floats keep full precision."""
    return {
        "kind": cs.kind,
        "momdp_fingerprint": cs.momdp_fingerprint,
        "entries": [
            {
                "policy_id": e.policy.id,
                "action_map": list(e.policy.action_map),
                "value": [float(x) for x in e.value],
                "witness_weights": [list(w) for w in e.witness_weights],
            }
            for e in cs.entries
        ],
    }


def coverage_from_json(doc: dict) -> CoverageSet:
    if not isinstance(doc, dict):
        raise ConfigError(f"expected an object, got {type(doc).__name__}", "$")
    for key in ("kind", "momdp_fingerprint", "entries"):
        if key not in doc:
            raise ConfigError(f"missing required key '{key}'", "$")
    if doc["kind"] not in ("pareto", "ccs"):
        raise ConfigError(f"unknown kind {doc['kind']!r}", "$.kind")
    if not isinstance(doc["momdp_fingerprint"], str):
        raise ConfigError("fingerprint must be a string", "$.momdp_fingerprint")
    if not isinstance(doc["entries"], list) or not doc["entries"]:
        raise ConfigError("entries must be a nonempty list", "$.entries")
    entries = []
    for i, item in enumerate(doc["entries"]):
        path = f"$.entries[{i}]"
        if not isinstance(item, dict):
            raise ConfigError("entry must be an object", path)
        try:
            policy = Policy(
                action_map=tuple(int(a) for a in item["action_map"]),
                id=int(item["policy_id"]),
            )
            value = np.asarray([float(x) for x in item["value"]], dtype=np.float64)
            witness = tuple(
                tuple(float(x) for x in w) for w in item.get("witness_weights", [])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed entry: {exc}", path) from exc
        if value.size == 0 or not np.all(np.isfinite(value)):
            raise ConfigError("entry value must be a nonempty finite vector", f"{path}.value")
        entries.append(
            CoverageEntry(policy=policy, value=_frozen_value(value), witness_weights=witness)
        )
    try:
        return CoverageSet(
            kind=doc["kind"],
            momdp_fingerprint=doc["momdp_fingerprint"],
            entries=tuple(entries),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "$.entries") from exc


def save_coverage(cs: CoverageSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(coverage_to_json(cs), indent=2) + "\n")


def load_coverage(path: str | Path) -> CoverageSet:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read coverage file: {exc}", str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", str(path)) from exc
    return coverage_from_json(doc)
