"""Scalarizations of vector returns and argmax policy selection.

All accumulations run left to right over explicit Python floats (d is at
most 10), so results are bit-stable across platforms and BLAS builds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import CoverageSet
from .errors import ConfigError, DomainError

WEIGHT_SUM_TOL = 1e-9
MONOTONE_TOL = 1e-12


def _as_components(v) -> list[float]:
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.shape[0] == 0:
        raise ValueError("empty value vector")
    return [float(x) for x in arr]


def _check_weights(w, *, require_nonincreasing: bool) -> list[float]:
    ws = _as_components(w)
    if any(not math.isfinite(x) for x in ws):
        raise ValueError("weights must be finite")
    if any(x < 0.0 for x in ws):
        raise ValueError(f"negative weight in {ws}")
    total = math.fsum(ws)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights sum to {total!r}, not 1")
    if require_nonincreasing:
        for i in range(len(ws) - 1):
            if ws[i + 1] > ws[i] + MONOTONE_TOL:
                raise ValueError(
                    f"weights increase at position {i}: {ws[i]} -> {ws[i + 1]}"
                )
    return ws


def linear_utility(w, v) -> float:
    """Weighted sum of the components."""
    ws = _as_components(w)
    vs = _as_components(v)
    if len(ws) != len(vs):
        raise ValueError(f"dimension mismatch: {len(ws)} weights vs {len(vs)} values")
    total = 0.0
    for wi, vi in zip(ws, vs):
        total += wi * vi
    return total


def ggf(w, v) -> float:
    """Generalized Gini welfare: ascending sort, then non-increasing weights.

    The largest weight multiplies the smallest component, so the function
    is permutation-invariant and rewards equalizing transfers.
    """
    ws = _check_weights(w, require_nonincreasing=True)
    vs = _as_components(v)
    if len(ws) != len(vs):
        raise ValueError(f"dimension mismatch: {len(ws)} weights vs {len(vs)} values")
    vs.sort()
    total = 0.0
    for wi, vi in zip(ws, vs):
        total += wi * vi
    return total


def generalized_ggf(w, p, v) -> float:
    """Prioritized Gini welfare: scale each component by its priority, then ggf."""
    ps = _as_components(p)
    vs = _as_components(v)
    if len(ps) != len(vs):
        raise ValueError(f"dimension mismatch: {len(ps)} priorities vs {len(vs)} values")
    if any(x <= 0.0 or not math.isfinite(x) for x in ps):
        raise ValueError(f"priorities must be strictly positive, got {ps}")
    return ggf(w, [pi * vi for pi, vi in zip(ps, vs)])


def nsw(v) -> float:
    """Geometric mean of the components.

    Computed as exp(mean(log v_i)) for strictly positive inputs; 0 when any
    component is 0. Negative components are outside the domain.
    """
    vs = _as_components(v)
    if any(x < 0.0 for x in vs):
        raise DomainError(f"geometric mean undefined for negative components: {vs}")
    if any(x == 0.0 for x in vs):
        return 0.0
    return math.exp(math.fsum(math.log(x) for x in vs) / len(vs))


def _normalize_weights(weights) -> tuple[float, ...]:
    return tuple(float(x) for x in weights)


@dataclass(frozen=True)
class Linear:
    weights: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        ws = _normalize_weights(self.weights)
        object.__setattr__(self, "weights", ws)
        _check_weights(ws, require_nonincreasing=False)


@dataclass(frozen=True)
class Ggf:
    weights: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        ws = _normalize_weights(self.weights)
        object.__setattr__(self, "weights", ws)
        _check_weights(ws, require_nonincreasing=True)


@dataclass(frozen=True)
class Gggf:
    weights: tuple[float, ...]
    priorities: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        ws = _normalize_weights(self.weights)
        ps = _normalize_weights(self.priorities)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "priorities", ps)
        _check_weights(ws, require_nonincreasing=True)
        if len(ps) != len(ws):
            raise ValueError(
                f"{len(ps)} priorities for {len(ws)} weights"
            )
        if any(x <= 0.0 or not math.isfinite(x) for x in ps):
            raise ValueError(f"priorities must be strictly positive, got {list(ps)}")


@dataclass(frozen=True)
class Nsw:
    label: str = ""


@dataclass(frozen=True)
class PluralisticGgf:
    """Gini welfare over member utilities of a shared vector return.

    Outer weights follow the ggf invariants and there is one per member;
    members are Linear or Ggf over the environment objectives (no nesting).
    """

    weights: tuple[float, ...]
    members: tuple
    label: str = ""

    def __post_init__(self):
        ws = _normalize_weights(self.weights)
        members = tuple(self.members)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "members", members)
        _check_weights(ws, require_nonincreasing=True)
        if not members:
            raise ValueError("member list is empty")
        if len(members) != len(ws):
            raise ValueError(f"{len(members)} members for {len(ws)} outer weights")
        dims = set()
        for i, m in enumerate(members):
            if not isinstance(m, (Linear, Ggf)):
                raise ValueError(
                    f"member {i} has type {type(m).__name__}; only Linear and Ggf members are allowed"
                )
            dims.add(len(m.weights))
        if len(dims) != 1:
            raise ValueError(f"members disagree on dimension: {sorted(dims)}")


UtilitySpec = Linear | Ggf | Gggf | Nsw | PluralisticGgf


def member_dimension(spec: PluralisticGgf) -> int:
    return len(spec.members[0].weights)


def spec_dimension(spec) -> int | None:
    """Value dimension the spec applies to; None means any."""
    if isinstance(spec, (Linear, Ggf)):
        return len(spec.weights)
    if isinstance(spec, Gggf):
        return len(spec.priorities)
    if isinstance(spec, PluralisticGgf):
        return member_dimension(spec)
    if isinstance(spec, Nsw):
        return None
    raise TypeError(f"not a utility spec: {type(spec).__name__}")


def pluralistic_ggf(spec: PluralisticGgf, v) -> float:
    """Evaluate each member utility, sort ascending, apply the outer weights."""
    utilities = []
    for i, member in enumerate(spec.members):
        try:
            utilities.append(evaluate(member, v))
        except (DomainError, ValueError) as exc:
            raise type(exc)(f"member {i}: {exc}") from exc
    utilities.sort()
    total = 0.0
    for wi, ui in zip(spec.weights, utilities):
        total += wi * ui
    return total


def pluralistic_nsw(members, v) -> float:
    """Geometric mean over member utilities; companion to pluralistic_ggf.

    Every member utility must be nonnegative at v.
    """
    utilities = []
    for i, member in enumerate(members):
        try:
            utilities.append(evaluate(member, v))
        except (DomainError, ValueError) as exc:
            raise type(exc)(f"member {i}: {exc}") from exc
    return nsw(utilities)


def evaluate(spec, v) -> float:
    """Single dispatch point used by selection and steering."""
    if isinstance(spec, Linear):
        return linear_utility(spec.weights, v)
    if isinstance(spec, Ggf):
        return ggf(spec.weights, v)
    if isinstance(spec, Gggf):
        return generalized_ggf(spec.weights, spec.priorities, v)
    if isinstance(spec, Nsw):
        return nsw(v)
    if isinstance(spec, PluralisticGgf):
        return pluralistic_ggf(spec, v)
    raise TypeError(f"not a utility spec: {type(spec).__name__}")


@dataclass(frozen=True)
class SelectionResult:
    """Argmax over a coverage set plus the full descending ranking."""

    policy_id: int
    utility: float
    ranking: tuple[tuple[int, float], ...]


def select_policy(cs: CoverageSet, spec) -> SelectionResult:
    """Evaluate the spec on every entry; highest utility wins, ties to lowest id.

    Pure evaluation: no solver or environment computation happens here.
    Domain errors name the offending entry instead of skipping it.
    """
    dim = spec_dimension(spec)
    if dim is not None and dim != cs.num_objectives:
        raise ValueError(
            f"utility over {dim} components applied to {cs.num_objectives}-objective coverage set"
        )
    scored = []
    for entry in cs.entries:
        try:
            utility = evaluate(spec, entry.value)
        except DomainError as exc:
            raise DomainError(f"entry {entry.policy.id}: {exc}") from exc
        scored.append((entry.policy.id, utility))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return SelectionResult(
        policy_id=scored[0][0], utility=scored[0][1], ranking=tuple(scored)
    )


def utility_to_json(spec) -> dict:
    if isinstance(spec, Linear):
        return {"variant": "linear", "weights": list(spec.weights), "label": spec.label}
    if isinstance(spec, Ggf):
        return {"variant": "ggf", "weights": list(spec.weights), "label": spec.label}
    if isinstance(spec, Gggf):
        return {
            "variant": "gggf",
            "weights": list(spec.weights),
            "priorities": list(spec.priorities),
            "label": spec.label,
        }
    if isinstance(spec, Nsw):
        return {"variant": "nsw", "label": spec.label}
    if isinstance(spec, PluralisticGgf):
        return {
            "variant": "pluralistic_ggf",
            "weights": list(spec.weights),
            "members": [utility_to_json(m) for m in spec.members],
            "label": spec.label,
        }
    raise TypeError(f"not a utility spec: {type(spec).__name__}")


def utility_from_json(doc: dict, path: str = "$") -> UtilitySpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"expected an object, got {type(doc).__name__}", path)
    variant = doc.get("variant")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ConfigError("label must be a string", f"{path}.label")

    def weights_field(key="weights"):
        value = doc.get(key)
        if not isinstance(value, list) or not value:
            raise ConfigError(f"'{key}' must be a nonempty list", f"{path}.{key}")
        try:
            return tuple(float(x) for x in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric entry in '{key}'", f"{path}.{key}") from exc

    try:
        if variant == "linear":
            return Linear(weights=weights_field(), label=label)
        if variant == "ggf":
            return Ggf(weights=weights_field(), label=label)
        if variant == "gggf":
            return Gggf(weights=weights_field(), priorities=weights_field("priorities"), label=label)
        if variant == "nsw":
            return Nsw(label=label)
        if variant == "pluralistic_ggf":
            members_doc = doc.get("members")
            if not isinstance(members_doc, list) or not members_doc:
                raise ConfigError("'members' must be a nonempty list", f"{path}.members")
            members = tuple(
                utility_from_json(m, f"{path}.members[{i}]")
                for i, m in enumerate(members_doc)
            )
            return PluralisticGgf(weights=weights_field(), members=members, label=label)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown utility variant {variant!r}", f"{path}.variant")
