/** Payload builders mirroring what the service returns for the shipped
 * three-arm bandit, plus a three-objective variant. */
import type {
  CoverageDoc,
  MomdpSummary,
  SessionState,
} from "../src/types";

export function momdpSummary(d = 2): MomdpSummary {
  const labels = ["first", "second", "third"].slice(0, d);
  return {
    num_states: 2,
    d,
    gamma: 1.0,
    horizon: 1,
    start_state: 0,
    terminal_states: [1],
    objective_labels: labels,
    fingerprint: "f".repeat(64),
    grid: null,
  };
}

export function coverageDoc(d = 2): CoverageDoc {
  const values =
    d === 2
      ? [
          [3, 0],
          [0, 5],
          [2, 2],
        ]
      : [
          [3, 0, 1],
          [0, 5, 1],
          [2, 2, 2],
        ];
  return {
    kind: "pareto",
    momdp_fingerprint: "f".repeat(64),
    entries: values.map((value, i) => ({
      policy_id: i,
      value,
      witness_weights: [],
      action_map: [i, -1],
    })),
  };
}

export function sessionState(overrides: Partial<SessionState> = {}): SessionState {
  return {
    step: 0,
    episode: 0,
    episode_step: 0,
    state: 0,
    terminal: false,
    policy_id: 1,
    value: [0, 5],
    welfare: 2.5,
    per_stakeholder_utilities: [],
    posterior_summary: {
      mean: [0.5, 0.5],
      entropy: Math.log(3),
      max_probability: 1 / 3,
      support_size: 3,
    },
    switches: 0,
    grid_view: null,
    ...overrides,
  };
}
