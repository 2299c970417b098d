"""Juries, Bayesian preference inference, and the run-time steering loop.

A steering session executes a policy drawn from a precomputed coverage set
and adjusts which entry runs as stakeholder feedback arrives. Selection is
pure evaluation over the stored entry values, so nothing here ever calls
back into the solver; the invocation counter in coverage makes that claim
testable.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import CoverageSet
from .errors import ConfigError, DomainError, FingerprintMismatchError
from .momdp import Momdp
from .weights import simplex_grid, validate_weight_vector
from .welfare import (
    Ggf,
    Linear,
    PluralisticGgf,
    SelectionResult,
    evaluate,
    member_dimension,
    select_policy,
    spec_dimension,
    utility_from_json,
    utility_to_json,
)

DEFAULT_BETA = 5.0
DEFAULT_RESOLUTION = 20
MAX_JURY = 10


@dataclass(frozen=True)
class Stakeholder:
    id: str
    utility: Linear | Ggf
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("stakeholder id must be a nonempty string")
        if not isinstance(self.utility, (Linear, Ggf)):
            raise ValueError(
                f"stakeholder {self.id}: utility must be Linear or Ggf, "
                f"got {type(self.utility).__name__}"
            )


@dataclass(frozen=True)
class Jury:
    """Ordered stakeholders plus the aggregation that scores shared outcomes.

    The aggregation is either a PluralisticGgf whose members mirror the
    stakeholder utilities in order, or a plain Ggf over per-stakeholder
    utility vectors (one weight per member).
    """

    members: tuple[Stakeholder, ...]
    aggregation: PluralisticGgf | Ggf

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not 1 <= len(members) <= MAX_JURY:
            raise ValueError(f"jury size {len(members)} outside 1..{MAX_JURY}")
        ids = [m.id for m in members]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate stakeholder ids in {ids}")
        dims = {len(m.utility.weights) for m in members}
        if len(dims) != 1:
            raise ValueError(f"stakeholder utilities disagree on dimension: {sorted(dims)}")
        if isinstance(self.aggregation, PluralisticGgf):
            if self.aggregation.members != tuple(m.utility for m in members):
                raise ValueError(
                    "aggregation members must equal the stakeholder utilities, in order"
                )
        elif isinstance(self.aggregation, Ggf):
            if len(self.aggregation.weights) != len(members):
                raise ValueError(
                    f"aggregation has {len(self.aggregation.weights)} weights "
                    f"for {len(members)} stakeholders"
                )
        else:
            raise ValueError(
                f"aggregation must be PluralisticGgf or Ggf, got {type(self.aggregation).__name__}"
            )

    @property
    def dimension(self) -> int:
        return len(self.members[0].utility.weights)


def jury_welfare(jury: Jury, v) -> tuple[float, list[tuple[str, float]]]:
    """Aggregate welfare plus each stakeholder's utility, in jury order."""
    per_member = []
    for st in jury.members:
        try:
            per_member.append((st.id, evaluate(st.utility, v)))
        except (DomainError, ValueError) as exc:
            raise type(exc)(f"stakeholder {st.id}: {exc}") from exc
    if isinstance(jury.aggregation, PluralisticGgf):
        welfare = evaluate(jury.aggregation, v)
    else:
        welfare = evaluate(jury.aggregation, [u for _, u in per_member])
    return welfare, per_member


def jury_to_objectives(jury: Jury, base: Momdp) -> Momdp:
    """Rewrite rewards so each objective is one stakeholder's per-step utility.

    Valid only for Linear member utilities: a linear map commutes with the
    discounted sum, so the transformed policy values equal the member
    utilities of the base policy values. Non-linear members are rejected;
    score those through jury_welfare on the final return instead.
    """
    for st in jury.members:
        if not isinstance(st.utility, Linear):
            raise ValueError(
                f"stakeholder {st.id}: only Linear member utilities can become "
                "per-step objectives; non-linear utilities apply to returns, not rewards"
            )
    if jury.dimension != base.num_objectives:
        raise ValueError(
            f"jury utilities over {jury.dimension} objectives, environment has {base.num_objectives}"
        )
    matrix = np.array([st.utility.weights for st in jury.members], dtype=np.float64)
    mapped = base.flat_reward @ matrix.T

    from .momdp import make_momdp

    rows_by_state: list[list[list[tuple]]] = [[] for _ in range(base.num_states)]
    for s in range(base.num_states):
        if base.action_counts[s] > 0:
            rows_by_state[s] = [[] for _ in range(int(base.action_counts[s]))]
    for k in range(base.num_transitions):
        s = int(base.flat_state[k])
        a = int(base.flat_action[k])
        rows_by_state[s][a].append(
            (int(base.flat_next[k]), float(base.flat_prob[k]), mapped[k])
        )
    return make_momdp(
        rows_by_state,
        gamma=base.gamma,
        horizon=base.horizon,
        start_state=base.start_state,
        terminal_states=base.terminal_states,
        objective_labels=tuple(st.id for st in jury.members),
        grid_info=base.grid_info,
    )


def jury_to_json(jury: Jury) -> dict:
    return {
        "members": [
            {
                "id": st.id,
                "utility": utility_to_json(st.utility),
                "metadata": dict(st.metadata),
            }
            for st in jury.members
        ],
        "aggregation": utility_to_json(jury.aggregation),
    }


def jury_from_json(doc: dict, path: str = "$") -> Jury:
    if not isinstance(doc, dict):
        raise ConfigError(f"expected an object, got {type(doc).__name__}", path)
    members_doc = doc.get("members")
    if not isinstance(members_doc, list) or not members_doc:
        raise ConfigError("'members' must be a nonempty list", f"{path}.members")
    members = []
    for i, item in enumerate(members_doc):
        mpath = f"{path}.members[{i}]"
        if not isinstance(item, dict) or "id" not in item or "utility" not in item:
            raise ConfigError("member needs 'id' and 'utility'", mpath)
        utility = utility_from_json(item["utility"], f"{mpath}.utility")
        metadata = item.get("metadata", {})
        if not isinstance(metadata, dict):
            raise ConfigError("'metadata' must be an object", f"{mpath}.metadata")
        try:
            members.append(Stakeholder(id=item["id"], utility=utility, metadata=metadata))
        except ValueError as exc:
            raise ConfigError(str(exc), mpath) from exc
    if "aggregation" not in doc:
        raise ConfigError("missing required key 'aggregation'", path)
    aggregation = utility_from_json(doc["aggregation"], f"{path}.aggregation")
    try:
        return Jury(members=tuple(members), aggregation=aggregation)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


@dataclass(frozen=True)
class PreferenceModel:
    """Discrete posterior over candidate linear preference weights."""

    support: np.ndarray    # (m, d), rows on the simplex
    posterior: np.ndarray  # (m,), sums to 1
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta {self.beta} must be finite and positive")
        if self.support.ndim != 2 or self.support.shape[0] == 0:
            raise ValueError("support must be a nonempty (m, d) array")
        if self.posterior.shape != (self.support.shape[0],):
            raise ValueError("posterior length does not match support")
        if np.any(self.posterior < 0) or abs(float(self.posterior.sum()) - 1.0) > 1e-9:
            raise ValueError("posterior must be nonnegative and sum to 1")


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str
    step_index: int
    context_policy_id: int

    def __post_init__(self):
        if self.kind not in ("approve", "disapprove"):
            raise ValueError(f"feedback kind {self.kind!r} (approve or disapprove)")
        if self.step_index < 0:
            raise ValueError(f"step_index {self.step_index} must be nonnegative")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def init_preference_model(
    resolution: int, d: int, beta: float = DEFAULT_BETA
) -> PreferenceModel:
    """Uniform posterior over the simplex grid; same guard as the solver grid."""
    support = simplex_grid(resolution, d)
    m = support.shape[0]
    return PreferenceModel(
        support=support, posterior=_frozen(np.full(m, 1.0 / m)), beta=float(beta)
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def update_preference_model(
    model: PreferenceModel, cs: CoverageSet, event: FeedbackEvent
) -> PreferenceModel:
    """Bayesian update from one feedback event; returns a new model.

    For each candidate weight w, the approval likelihood is
    sigmoid(beta * (u_w(executed) - max over entries of u_w) / range_w),
    which is 1/2 when the executed policy is w's argmax and decays with the
    regret under w. Disapproval uses one minus that. The regret is divided
    by range_w, the spread of w's utilities across the coverage set, so the
    likelihood does not change when every reward is rescaled by a constant;
    beta therefore means the same thing in every environment. A candidate
    that is indifferent across all entries (zero range) contributes no
    evidence: both likelihoods are 1/2.
    """
    try:
        entry = cs.entry_by_id(event.context_policy_id)
    except KeyError as exc:
        raise ValueError(
            f"feedback context policy {event.context_policy_id} is not in the coverage set"
        ) from exc
    utilities = model.support @ cs.values().T        # (m, k)
    executed = model.support @ entry.value           # (m,)
    spread = utilities.max(axis=1) - utilities.min(axis=1)
    regret = executed - utilities.max(axis=1)        # <= 0
    scaled = np.divide(
        regret, spread, out=np.zeros_like(regret), where=spread > 0.0
    )
    approve_like = _sigmoid(model.beta * scaled)
    like = approve_like if event.kind == "approve" else 1.0 - approve_like
    unnorm = model.posterior * like
    total = float(unnorm.sum())
    if total <= 0.0:
        raise ValueError(
            "posterior mass vanished; feedback is inconsistent beyond float range"
        )
    return PreferenceModel(
        support=model.support, posterior=_frozen(unnorm / total), beta=model.beta
    )


def posterior_mean(model: PreferenceModel) -> np.ndarray:
    mean = model.posterior @ model.support
    return mean / float(mean.sum())


def posterior_summary(model: PreferenceModel) -> dict:
    p = model.posterior
    nonzero = p[p > 0]
    return {
        "mean": [float(x) for x in posterior_mean(model)],
        "entropy": float(-(nonzero * np.log(nonzero)).sum()),
        "max_probability": float(p.max()),
        "support_size": int(p.shape[0]),
    }


def reselect_policy(model: PreferenceModel, cs: CoverageSet) -> SelectionResult:
    """Select under the posterior-mean weights. Pure evaluation, no solving."""
    mean = posterior_mean(model)
    return select_policy(cs, Linear(weights=tuple(float(x) for x in mean)))


class SteeringSession:
    """Mutable state for one steering loop: environment cursor, preference
    model, current selection, and an append-only record log.

    Records are JSON-safe dicts; replay_session reconstructs an identical
    session from them. Not thread-safe; callers serialize access per session.
    """

    def __init__(
        self,
        momdp: Momdp,
        cs: CoverageSet,
        *,
        beta: float = DEFAULT_BETA,
        resolution: int = DEFAULT_RESOLUTION,
        seed: int = 0,
        jury: Jury | None = None,
    ):
        if cs.momdp_fingerprint != momdp.fingerprint:
            raise FingerprintMismatchError(
                f"coverage set was built for MOMDP {cs.momdp_fingerprint[:12]}..., "
                f"got {momdp.fingerprint[:12]}..."
            )
        if jury is not None and jury.dimension != momdp.num_objectives:
            raise ValueError(
                f"jury utilities over {jury.dimension} objectives, "
                f"environment has {momdp.num_objectives}"
            )
        self.momdp = momdp
        self.cs = cs
        self.jury = jury
        self.seed = int(seed)
        self.resolution = int(resolution)
        self.rng = np.random.default_rng(self.seed)
        self.model = init_preference_model(resolution, momdp.num_objectives, beta)
        self.selection = reselect_policy(self.model, cs)
        self.env_state = momdp.start_state
        self.episode = 0
        self.episode_step = 0
        self.total_steps = 0
        self.switches = 0
        self.records: list[dict] = []
        self._record(
            "session_init",
            seed=self.seed,
            beta=float(beta),
            resolution=self.resolution,
            jury=jury_to_json(jury) if jury is not None else None,
            policy_id=self.selection.policy_id,
            posterior=posterior_summary(self.model),
        )

    def _record(self, record: str, **fields) -> None:
        rec = {"record": record, "step": self.total_steps}
        rec.update(fields)
        self.records.append(rec)

    def _welfare_report(self) -> tuple[float, list[tuple[str, float]]]:
        value = self.cs.entry_by_id(self.selection.policy_id).value
        if self.jury is not None:
            return jury_welfare(self.jury, value)
        per_objective = [
            (label, float(component))
            for label, component in zip(self.momdp.objective_labels, value)
        ]
        return self.selection.utility, per_objective

    def state_dict(self) -> dict:
        welfare, per_member = self._welfare_report()
        value = self.cs.entry_by_id(self.selection.policy_id).value
        state = {
            "step": self.total_steps,
            "episode": self.episode,
            "episode_step": self.episode_step,
            "state": int(self.env_state),
            "terminal": self.env_state in self.momdp.terminal_states,
            "policy_id": self.selection.policy_id,
            "value": [float(x) for x in value],
            "welfare": welfare,
            "per_stakeholder_utilities": [
                {"id": sid, "utility": u} for sid, u in per_member
            ],
            "posterior_summary": posterior_summary(self.model),
            "switches": self.switches,
            "grid_view": None,
        }
        if self.momdp.grid_info is not None:
            cols = self.momdp.grid_info["cols"]
            state["grid_view"] = dict(self.momdp.grid_info)
            state["grid_view"]["agent"] = [
                int(self.env_state) // cols,
                int(self.env_state) % cols,
            ]
        return state

    def step(self, count: int = 1) -> dict:
        """Advance the environment under the current policy.

        Stepping while on a terminal state consumes the step as an episode
        reset back to the start state.
        """
        if count < 1:
            raise ValueError(f"step count {count} must be >= 1")
        for _ in range(count):
            if self.env_state in self.momdp.terminal_states:
                self.episode += 1
                self.episode_step = 0
                self.env_state = self.momdp.start_state
                self.total_steps += 1
                self._record("episode_reset", episode=self.episode)
                continue
            entry = self.cs.entry_by_id(self.selection.policy_id)
            action = entry.policy.action_map[self.env_state]
            nxt, prob, rew = self.momdp.transition_row(self.env_state, action)
            if nxt.shape[0] == 1:
                idx = 0
            else:
                cdf = np.cumsum(prob)
                idx = int(np.searchsorted(cdf, self.rng.random(), side="right"))
                idx = min(idx, nxt.shape[0] - 1)
            welfare, per_member = self._welfare_report()
            self.total_steps += 1
            self.episode_step += 1
            previous = self.env_state
            self.env_state = int(nxt[idx])
            self._record(
                "step",
                state=int(previous),
                action=int(action),
                next_state=int(self.env_state),
                reward=[float(x) for x in rew[idx]],
                policy_id=self.selection.policy_id,
                welfare=welfare,
                per_stakeholder={sid: u for sid, u in per_member},
            )
        return self.state_dict()

    def feedback(self, kind: str) -> dict:
        """Process one approve/disapprove event.

        Both kinds update the preference model; disapprovals additionally
        trigger an apology and a reselect, which may switch the policy.
        """
        event = FeedbackEvent(
            kind=kind, step_index=self.total_steps,
            context_policy_id=self.selection.policy_id,
        )
        self.model = update_preference_model(self.model, self.cs, event)
        self._record(
            "feedback",
            kind=kind,
            policy_id=self.selection.policy_id,
            posterior=posterior_summary(self.model),
        )
        apology = kind == "disapprove"
        switched = False
        if apology:
            previous = self.selection.policy_id
            self.selection = reselect_policy(self.model, self.cs)
            switched = self.selection.policy_id != previous
            self._record(
                "apology",
                previous_policy_id=previous,
                policy_id=self.selection.policy_id,
                switched=switched,
            )
            if switched:
                self.switches += 1
                self._record(
                    "switch", from_policy_id=previous, to_policy_id=self.selection.policy_id
                )
        return {
            "apology": apology,
            "switched": switched,
            "policy_id": self.selection.policy_id,
        }

    def set_preferences(self, weights=None, utility_spec=None) -> SelectionResult:
        """Directly steer the selection.

        Explicit weights also re-anchor the posterior to the nearest grid
        candidates (uniform over L1-distance ties). A non-linear utility
        spec selects without touching the linear preference model.
        """
        if (weights is None) == (utility_spec is None):
            raise ValueError("provide exactly one of weights or utility_spec")
        previous = self.selection.policy_id
        if weights is not None:
            w = validate_weight_vector(weights, self.momdp.num_objectives)
            self.selection = select_policy(self.cs, Linear(weights=tuple(float(x) for x in w)))
            dist = np.abs(self.model.support - w).sum(axis=1)
            nearest = dist <= dist.min() + 1e-12
            posterior = np.where(nearest, 1.0 / int(nearest.sum()), 0.0)
            self.model = PreferenceModel(
                support=self.model.support, posterior=_frozen(posterior), beta=self.model.beta
            )
            payload = {"weights": [float(x) for x in w]}
        else:
            dim = spec_dimension(utility_spec)
            if dim is not None and dim != self.momdp.num_objectives:
                raise ValueError(
                    f"utility over {dim} components applied to "
                    f"{self.momdp.num_objectives}-objective environment"
                )
            self.selection = select_policy(self.cs, utility_spec)
            payload = {"utility_spec": utility_to_json(utility_spec)}
        switched = self.selection.policy_id != previous
        self._record(
            "preferences",
            policy_id=self.selection.policy_id,
            switched=switched,
            **payload,
        )
        if switched:
            self.switches += 1
            self._record(
                "switch", from_policy_id=previous, to_policy_id=self.selection.policy_id
            )
        return self.selection

    def log_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records)

    def csv_summary(self) -> str:
        return records_to_csv(self.records)


def records_to_csv(records) -> str:
    """One row per executed step: step, executing policy, welfare, utilities."""
    ids: list[str] = []
    for rec in records:
        if rec["record"] == "step":
            for key in rec["per_stakeholder"]:
                if key not in ids:
                    ids.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["step", "executing_policy", "welfare"] + [f"utility_{i}" for i in ids])
    for rec in records:
        if rec["record"] != "step":
            continue
        writer.writerow(
            [rec["step"], rec["policy_id"], repr(rec["welfare"])]
            + [repr(rec["per_stakeholder"][i]) if i in rec["per_stakeholder"] else "" for i in ids]
        )
    return buf.getvalue()


@dataclass(frozen=True)
class SessionLog:
    """Complete record of a simulated steering session."""

    records: tuple[dict, ...]
    switches: int
    final_policy_id: int
    true_optimum_id: int

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records)

    def to_csv(self) -> str:
        return records_to_csv(self.records)


def steering_session(
    momdp: Momdp,
    cs: CoverageSet,
    true_user,
    steps: int,
    seed: int,
    *,
    beta: float = DEFAULT_BETA,
    resolution: int = DEFAULT_RESOLUTION,
    user_flip_prob: float | None = None,
    jury: Jury | None = None,
) -> SessionLog:
    """Closed loop against a simulated user with hidden linear weights.

    After every environment step the user reacts: disapprove when the
    executing policy is not their true-weight optimum, approve otherwise,
    with the verdict flipped at rate user_flip_prob (default 1/(1+e^beta)).
    Deterministic given (inputs, seed).
    """
    if steps < 0:
        raise ValueError(f"steps {steps} must be nonnegative")
    true_w = validate_weight_vector(true_user, momdp.num_objectives)
    if user_flip_prob is None:
        user_flip_prob = 1.0 / (1.0 + math.exp(beta))
    if not 0.0 <= user_flip_prob <= 1.0:
        raise ValueError(f"user_flip_prob {user_flip_prob} outside [0, 1]")
    true_best = select_policy(cs, Linear(weights=tuple(float(x) for x in true_w))).policy_id
    session = SteeringSession(
        momdp, cs, beta=beta, resolution=resolution, seed=seed, jury=jury
    )
    user_rng = np.random.default_rng([int(seed), 0xFEED])
    for _ in range(steps):
        session.step(1)
        displeased = session.selection.policy_id != true_best
        if user_flip_prob > 0.0 and user_rng.random() < user_flip_prob:
            displeased = not displeased
        session.feedback("disapprove" if displeased else "approve")
    return SessionLog(
        records=tuple(session.records),
        switches=session.switches,
        final_policy_id=session.selection.policy_id,
        true_optimum_id=true_best,
    )


def replay_session(momdp: Momdp, cs: CoverageSet, records) -> SteeringSession:
    """Rebuild a session by re-applying the requests recorded in a log.

    Derived records (apology, switch) are skipped; step and episode_reset
    records each replay as one step call. The reconstructed session must
    end in the same state and produce the same log, which the tests assert.
    """
    records = list(records)
    if not records or records[0].get("record") != "session_init":
        raise ValueError("log does not start with a session_init record")
    init = records[0]
    jury = jury_from_json(init["jury"]) if init.get("jury") else None
    session = SteeringSession(
        momdp,
        cs,
        beta=init["beta"],
        resolution=init["resolution"],
        seed=init["seed"],
        jury=jury,
    )
    for rec in records[1:]:
        kind = rec.get("record")
        if kind in ("step", "episode_reset"):
            session.step(1)
        elif kind == "feedback":
            session.feedback(rec["kind"])
        elif kind == "preferences":
            if "weights" in rec:
                session.set_preferences(weights=rec["weights"])
            else:
                session.set_preferences(utility_spec=utility_from_json(rec["utility_spec"]))
        elif kind in ("apology", "switch", "session_init"):
            continue
        else:
            raise ValueError(f"unknown record kind {kind!r}")
    return session
