"""Environment configs: JSON schema validation and expansion to Momdp tables.

Two config types are supported. "tabular" declares explicit transition and
reward tables; "gridworld" declares a rectangular grid that gets expanded to
a tabular model here. Validation errors carry the JSON path of the offending
field.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ConfigError
from .momdp import MAX_OBJECTIVES, Momdp, make_momdp

GRID_ACTIONS = ("up", "right", "down", "left")
_GRID_DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))


def _require(doc: dict, key: str, kinds, path: str):
    if key not in doc:
        raise ConfigError(f"missing required key '{key}'", path)
    value = doc[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ConfigError(
            f"'{key}' has type {type(value).__name__}", f"{path}.{key}"
        )
    return value


def _optional(doc: dict, key: str, kinds, path: str, default):
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ConfigError(
            f"'{key}' has type {type(value).__name__}", f"{path}.{key}"
        )
    return value


def _cell(value, bounds, path: str) -> tuple[int, int]:
    rows, cols = bounds
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in value)
    ):
        raise ConfigError("expected a [row, col] integer pair", path)
    r, c = value
    if not (0 <= r < rows and 0 <= c < cols):
        raise ConfigError(f"cell [{r}, {c}] outside the {rows}x{cols} grid", path)
    return r, c


def _reward_vector(value, d: int, path: str) -> list[float]:
    if not isinstance(value, list) or len(value) != d:
        got = len(value) if isinstance(value, list) else type(value).__name__
        raise ConfigError(f"expected a reward vector of length {d}, got {got}", path)
    out = []
    for i, x in enumerate(value):
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise ConfigError(f"non-finite or non-numeric component {x!r}", f"{path}[{i}]")
        out.append(float(x))
    return out


def load_momdp(config: dict) -> Momdp:
    """Validate a parsed environment document and expand it to a Momdp."""
    if not isinstance(config, dict):
        raise ConfigError(f"expected an object, got {type(config).__name__}", "$")
    kind = _require(config, "type", str, "$")
    if kind not in ("gridworld", "tabular"):
        raise ConfigError(f"unknown type {kind!r} (gridworld or tabular)", "$.type")
    d = _require(config, "d", int, "$")
    if not 1 <= d <= MAX_OBJECTIVES:
        raise ConfigError(f"d={d} outside 1..{MAX_OBJECTIVES}", "$.d")
    gamma = _require(config, "gamma", (int, float), "$")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma={gamma} outside [0, 1]", "$.gamma")
    horizon = _require(config, "horizon", int, "$")
    if horizon < 1:
        raise ConfigError(f"horizon={horizon} must be >= 1", "$.horizon")
    labels = _optional(config, "objective_labels", list, "$", None)
    if labels is not None:
        if len(labels) != d or not all(isinstance(x, str) for x in labels):
            raise ConfigError(
                f"expected {d} string labels", "$.objective_labels"
            )
        labels = tuple(labels)

    if kind == "gridworld":
        return _expand_gridworld(config, d, float(gamma), horizon, labels)
    return _expand_tabular(config, d, float(gamma), horizon, labels)


def load_momdp_file(path: str | Path) -> Momdp:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read environment config: {exc}", str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", str(path)) from exc
    return load_momdp(doc)


def _expand_gridworld(config, d, gamma, horizon, labels) -> Momdp:
    grid = _require(config, "grid", dict, "$")
    rows = _require(grid, "rows", int, "$.grid")
    cols = _require(grid, "cols", int, "$.grid")
    if rows < 1 or cols < 1:
        raise ConfigError(f"grid size {rows}x{cols} must be positive", "$.grid")
    bounds = (rows, cols)
    start = _cell(_require(grid, "start", list, "$.grid"), bounds, "$.grid.start")

    terminals = set()
    for i, item in enumerate(_optional(grid, "terminals", list, "$.grid", [])):
        terminals.add(_cell(item, bounds, f"$.grid.terminals[{i}]"))
    walls = set()
    for i, item in enumerate(_optional(grid, "walls", list, "$.grid", [])):
        walls.add(_cell(item, bounds, f"$.grid.walls[{i}]"))
    if start in walls:
        raise ConfigError("start cell is a wall", "$.grid.start")
    overlap = terminals & walls
    if overlap:
        raise ConfigError(f"cells {sorted(overlap)} are both terminal and wall", "$.grid")

    slip = _optional(grid, "slip", (int, float), "$.grid", 0.0)
    if not 0.0 <= slip < 1.0:
        raise ConfigError(f"slip={slip} outside [0, 1)", "$.grid.slip")
    slip = float(slip)
    step_cost = _reward_vector(
        _optional(grid, "step_cost", list, "$.grid", [0.0] * d), d, "$.grid.step_cost"
    )
    cell_rewards = {}
    raw_bonuses = _optional(grid, "cell_rewards", dict, "$.grid", {})
    for key, vec in raw_bonuses.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise ConfigError(f"key {key!r} is not 'row,col'", "$.grid.cell_rewards")
        try:
            cell = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError(f"key {key!r} is not 'row,col'", "$.grid.cell_rewards")
        if not (0 <= cell[0] < rows and 0 <= cell[1] < cols):
            raise ConfigError(
                f"cell {cell} outside the {rows}x{cols} grid", f"$.grid.cell_rewards.{key}"
            )
        cell_rewards[cell] = _reward_vector(vec, d, f"$.grid.cell_rewards.{key}")

    def index(cell):
        return cell[0] * cols + cell[1]

    def reward_into(cell):
        bonus = cell_rewards.get(cell)
        if bonus is None:
            return list(step_cost)
        return [s + b for s, b in zip(step_cost, bonus)]

    num_states = rows * cols
    blocked = terminals | walls
    transitions = [[] for _ in range(num_states)]
    for r in range(rows):
        for c in range(cols):
            if (r, c) in blocked:
                continue
            state_rows = []
            for a in range(4):
                outcomes = {}
                moves = [(a, 1.0 - slip)] if slip == 0.0 else [
                    (a, 1.0 - slip),
                    ((a + 1) % 4, slip / 2.0),
                    ((a + 3) % 4, slip / 2.0),
                ]
                for direction, p in moves:
                    if p == 0.0:
                        continue
                    dr, dc = _GRID_DELTAS[direction]
                    target = (r + dr, c + dc)
                    if not (0 <= target[0] < rows and 0 <= target[1] < cols):
                        target = (r, c)
                    elif target in walls:
                        target = (r, c)
                    outcomes[target] = outcomes.get(target, 0.0) + p
                state_rows.append(
                    [(index(cell), p, reward_into(cell)) for cell, p in sorted(outcomes.items())]
                )
            transitions[index((r, c))] = state_rows

    grid_info = {
        "rows": rows,
        "cols": cols,
        "start": list(start),
        "terminals": sorted(list(t) for t in terminals),
        "walls": sorted(list(w) for w in walls),
        "action_names": list(GRID_ACTIONS),
        "cell_rewards": {f"{r},{c}": v for (r, c), v in sorted(cell_rewards.items())},
    }
    try:
        return make_momdp(
            transitions,
            gamma=gamma,
            horizon=horizon,
            start_state=index(start),
            terminal_states={index(t) for t in blocked},
            objective_labels=labels,
            grid_info=grid_info,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "$.grid") from exc


def _expand_tabular(config, d, gamma, horizon, labels) -> Momdp:
    num_states = _require(config, "states", int, "$")
    if num_states < 1:
        raise ConfigError(f"states={num_states} must be >= 1", "$.states")
    start = _optional(config, "start", int, "$", 0)
    if not 0 <= start < num_states:
        raise ConfigError(f"start={start} outside 0..{num_states - 1}", "$.start")
    terminals = _optional(config, "terminals", list, "$", [])
    for i, t in enumerate(terminals):
        if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < num_states:
            raise ConfigError(f"bad terminal state {t!r}", f"$.terminals[{i}]")
    terminal_set = set(terminals)

    trans_doc = _require(config, "transitions", list, "$")
    reward_doc = _require(config, "rewards", list, "$")
    if len(trans_doc) != num_states:
        raise ConfigError(
            f"{len(trans_doc)} transition rows for {num_states} states", "$.transitions"
        )
    if len(reward_doc) != num_states:
        raise ConfigError(
            f"{len(reward_doc)} reward rows for {num_states} states", "$.rewards"
        )

    transitions = []
    for s in range(num_states):
        state_trans = trans_doc[s]
        state_rew = reward_doc[s]
        if not isinstance(state_trans, list):
            raise ConfigError("expected a per-action list", f"$.transitions[{s}]")
        if not isinstance(state_rew, list):
            raise ConfigError("expected a per-action list", f"$.rewards[{s}]")
        if s in terminal_set:
            if state_trans or state_rew:
                raise ConfigError(
                    f"terminal state {s} must have empty transition and reward rows",
                    f"$.transitions[{s}]",
                )
            transitions.append([])
            continue
        if len(state_trans) != len(state_rew):
            raise ConfigError(
                f"state {s}: {len(state_trans)} transition rows vs {len(state_rew)} reward rows",
                f"$.rewards[{s}]",
            )
        if not state_trans:
            raise ConfigError(f"non-terminal state {s} has no actions", f"$.transitions[{s}]")
        state_rows = []
        for a, (row, rew_row) in enumerate(zip(state_trans, state_rew)):
            path = f"$.transitions[{s}][{a}]"
            if not isinstance(row, list) or not row:
                raise ConfigError("expected a nonempty list of [next, prob] pairs", path)
            if not isinstance(rew_row, list) or len(rew_row) != len(row):
                raise ConfigError(
                    f"reward row length {len(rew_row) if isinstance(rew_row, list) else '?'} "
                    f"does not match {len(row)} transition entries",
                    f"$.rewards[{s}][{a}]",
                )
            total = 0.0
            entries = []
            for k, pair in enumerate(row):
                if (
                    not isinstance(pair, list)
                    or len(pair) != 2
                    or not isinstance(pair[0], int)
                    or isinstance(pair[0], bool)
                    or not isinstance(pair[1], (int, float))
                    or isinstance(pair[1], bool)
                ):
                    raise ConfigError("expected [next_state, probability]", f"{path}[{k}]")
                ns, p = int(pair[0]), float(pair[1])
                if not 0 <= ns < num_states:
                    raise ConfigError(f"next state {ns} out of range", f"{path}[{k}]")
                if not math.isfinite(p) or p < 0.0:
                    raise ConfigError(f"bad probability {p}", f"{path}[{k}]")
                total += p
                vec = _reward_vector(rew_row[k], d, f"$.rewards[{s}][{a}][{k}]")
                entries.append((ns, p, vec))
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(
                    f"probabilities for state {s}, action {a} sum to {total!r}, not 1", path
                )
            state_rows.append(entries)
        transitions.append(state_rows)

    try:
        return make_momdp(
            transitions,
            gamma=gamma,
            horizon=horizon,
            start_state=start,
            terminal_states=terminal_set,
            objective_labels=labels,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "$") from exc
