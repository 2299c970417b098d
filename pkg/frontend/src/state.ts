/** View state and the reducers that apply service responses to it.
 *
 * Single source of truth: activePolicyId, utilities, welfare, posterior
 * numbers, and the grid position are only ever assigned from response
 * payloads. The reducers contain no selection or welfare arithmetic.
 */
import type {
  CoverageDoc,
  FeedbackResponse,
  MomdpSummary,
  SelectionResponse,
  SessionState,
} from "./types";

export interface FeedEvent {
  text: string;
  tone: "info" | "apology" | "switch";
}

export interface ViewState {
  phase: "connecting" | "ready" | "unreachable";
  momdp: MomdpSummary | null;
  coverage: CoverageDoc | null;
  activePolicyId: number | null;
  weights: number[];
  axisX: number;
  axisY: number;
  snapshot: SessionState | null;
  feed: FeedEvent[];
  toast: string | null;
  weightsError: string | null;
  needsReconnect: boolean;
  lastError: string | null;
}

export function initialState(): ViewState {
  return {
    phase: "connecting",
    momdp: null,
    coverage: null,
    activePolicyId: null,
    weights: [],
    axisX: 0,
    axisY: 1,
    snapshot: null,
    feed: [],
    toast: null,
    weightsError: null,
    needsReconnect: false,
    lastError: null,
  };
}

const FEED_LIMIT = 60;

function push(state: ViewState, event: FeedEvent): void {
  state.feed.push(event);
  if (state.feed.length > FEED_LIMIT) {
    state.feed.splice(0, state.feed.length - FEED_LIMIT);
  }
}

export function applyConnected(
  state: ViewState,
  momdp: MomdpSummary,
  coverage: CoverageDoc,
  initial: SessionState,
): void {
  state.phase = "ready";
  state.momdp = momdp;
  state.coverage = coverage;
  state.snapshot = initial;
  state.activePolicyId = initial.policy_id;
  state.weights = momdp.objective_labels.map(() => 1 / momdp.d);
  state.axisX = 0;
  state.axisY = momdp.d > 1 ? 1 : 0;
  state.needsReconnect = false;
  state.lastError = null;
  push(state, { text: `connected: policy #${initial.policy_id} executing`, tone: "info" });
}

export function applyUnreachable(state: ViewState, message: string): void {
  state.phase = "unreachable";
  state.lastError = message;
}

export function applySelection(
  state: ViewState,
  submitted: number[],
  selection: SelectionResponse,
): void {
  const previous = state.activePolicyId;
  state.weights = submitted;
  state.activePolicyId = selection.policy_id;
  state.weightsError = null;
  if (previous !== null && previous !== selection.policy_id) {
    push(state, {
      text: `switch: #${previous} -> #${selection.policy_id} (weights applied)`,
      tone: "switch",
    });
  } else {
    push(state, { text: `weights applied, policy #${selection.policy_id}`, tone: "info" });
  }
}

export function applyWeightsRejected(state: ViewState, message: string): void {
  state.weightsError = message;
}

export function applyFeedback(
  state: ViewState,
  kind: string,
  response: FeedbackResponse,
): void {
  const previous = state.activePolicyId;
  state.activePolicyId = response.policy_id;
  push(state, { text: `you sent: ${kind}`, tone: "info" });
  if (response.apology) {
    state.toast = "The agent apologises and has updated its model of your preferences.";
    push(state, { text: "agent apologised", tone: "apology" });
  }
  if (response.switched) {
    push(state, {
      text: `switch: #${previous} -> #${response.policy_id} (after feedback)`,
      tone: "switch",
    });
  }
}

export function dismissToast(state: ViewState): void {
  state.toast = null;
}

export function applySnapshot(state: ViewState, snapshot: SessionState): void {
  const previousEpisode = state.snapshot?.episode;
  state.snapshot = snapshot;
  state.activePolicyId = snapshot.policy_id;
  if (previousEpisode !== undefined && snapshot.episode > previousEpisode) {
    push(state, { text: `episode ${snapshot.episode} started`, tone: "info" });
  }
}

export function applySessionExpired(state: ViewState): void {
  state.needsReconnect = true;
}
