/** Payload shapes of the steering service HTTP API, mirrored one to one.
 *
 * The UI never derives utilities, welfare, or selections on its own; these
 * types exist so every displayed number can be traced to a response field.
 */

export interface MomdpSummary {
  num_states: number;
  d: number;
  gamma: number;
  horizon: number;
  start_state: number;
  terminal_states: number[];
  objective_labels: string[];
  fingerprint: string;
  grid: GridInfo | null;
}

export interface GridInfo {
  rows: number;
  cols: number;
  start: [number, number];
  terminals: [number, number][];
  walls: [number, number][];
  action_names: string[];
  cell_rewards: Record<string, number[]>;
}

export interface CoverageEntryDoc {
  policy_id: number;
  value: number[];
  witness_weights: number[][];
  action_map: number[];
}

export interface CoverageDoc {
  kind: string;
  momdp_fingerprint: string;
  entries: CoverageEntryDoc[];
}

export interface PosteriorSummary {
  mean: number[];
  entropy: number;
  max_probability: number;
  support_size: number;
}

export interface StakeholderUtility {
  id: string;
  utility: number;
}

export interface SessionState {
  step: number;
  episode: number;
  episode_step: number;
  state: number;
  terminal: boolean;
  policy_id: number;
  value: number[];
  welfare: number;
  per_stakeholder_utilities: StakeholderUtility[];
  posterior_summary: PosteriorSummary;
  switches: number;
  grid_view: (GridInfo & { agent: [number, number] }) | null;
}

export interface SessionCreated {
  session_id: string;
  policy_id: number;
  state: SessionState;
}

export interface SelectionResponse {
  policy_id: number;
  utility: number;
  ranking: [number, number][];
}

export interface FeedbackResponse {
  apology: boolean;
  switched: boolean;
  policy_id: number;
}

export interface ApiError {
  error: string;
  path: string;
}

export type FeedbackKind = "approve" | "disapprove";
