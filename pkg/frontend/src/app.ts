/** Controller: wires the typed client, the view state, and the renderer.
 *
 * All mutating calls run through the client's FIFO queue, so the handler
 * that applies each response runs in submission order; the 1 Hz poll skips
 * a tick while user actions are still in flight rather than interleave.
 */
import { Client, ServiceError, SessionExpiredError, type FetchLike } from "./api";
import { Renderer } from "./render";
import { dragTo, isSimplexValid, renormalize } from "./simplex";
import {
  applyConnected,
  applyFeedback,
  applySelection,
  applySessionExpired,
  applySnapshot,
  applyUnreachable,
  applyWeightsRejected,
  dismissToast,
  initialState,
  type ViewState,
} from "./state";
import type { FeedbackKind } from "./types";

export const POLL_INTERVAL_MS = 1000;

export class App {
  readonly state: ViewState = initialState();
  private client: Client;
  private renderer: Renderer;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly baseUrl: string,
    root: HTMLElement,
    private readonly fetchImpl?: FetchLike,
  ) {
    this.client = this.newClient();
    this.renderer = new Renderer(root, {
      onSlider: (index, value) => this.slide(index, value),
      onFeedback: (kind) => this.sendFeedback(kind),
      onStep: () => this.sendStep(),
      onAxisChange: (axis, objective) => this.setAxis(axis, objective),
      onRetry: () => void this.connect(),
      onReconnect: () => void this.connect(),
      onDismissToast: () => {
        dismissToast(this.state);
        this.renderer.update(this.state);
      },
    });
    this.renderer.update(this.state);
  }

  private newClient(): Client {
    return this.fetchImpl
      ? new Client(this.baseUrl, this.fetchImpl)
      : new Client(this.baseUrl);
  }

  /** Fetch environment and coverage, open a session, start polling. */
  async connect(): Promise<void> {
    this.stopPolling();
    this.client = this.newClient();
    this.state.phase = "connecting";
    this.state.needsReconnect = false;
    this.renderer.update(this.state);
    try {
      const momdp = await this.client.momdp();
      const coverage = await this.client.coverage();
      const created = await this.client.createSession();
      applyConnected(this.state, momdp, coverage, created.state);
      this.startPolling();
    } catch (error) {
      applyUnreachable(this.state, error instanceof Error ? error.message : String(error));
    }
    this.renderer.update(this.state);
  }

  /** One slider moved: renormalize the whole row, show it, submit it. */
  slide(index: number, value: number): Promise<void> {
    const submitted = dragTo(this.state.weights, index, value);
    if (!isSimplexValid(submitted)) {
      // unreachable by construction; guard keeps the invariant visible
      applyWeightsRejected(this.state, "weights must be nonnegative and sum to 1");
      this.renderer.update(this.state);
      return Promise.resolve();
    }
    this.state.weights = submitted;
    this.renderer.update(this.state);
    return this.client
      .setWeights(submitted)
      .then((selection) => applySelection(this.state, submitted, selection))
      .catch((error) => this.fail(error, (msg) => applyWeightsRejected(this.state, msg)))
      .then(() => this.renderer.update(this.state));
  }

  sendFeedback(kind: FeedbackKind): Promise<void> {
    return this.client
      .feedback(kind)
      .then((response) => applyFeedback(this.state, kind, response))
      .catch((error) => this.fail(error))
      .then(() => this.renderer.update(this.state));
  }

  sendStep(count = 1): Promise<void> {
    return this.client
      .step(count)
      .then((snapshot) => applySnapshot(this.state, snapshot))
      .catch((error) => this.fail(error))
      .then(() => this.renderer.update(this.state));
  }

  setAxis(axis: "x" | "y", objective: number): void {
    if (axis === "x") {
      this.state.axisX = objective;
    } else {
      this.state.axisY = objective;
    }
    this.renderer.update(this.state);
  }

  /** Poll the session snapshot; skipped while user requests are queued. */
  private startPolling(): void {
    this.pollTimer = setInterval(() => {
      if (this.client.queue.pending > 0 || this.state.needsReconnect) return;
      void this.client
        .state()
        .then((snapshot) => applySnapshot(this.state, snapshot))
        .catch((error) => this.fail(error))
        .then(() => this.renderer.update(this.state));
    }, POLL_INTERVAL_MS);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private fail(error: unknown, onRejected?: (message: string) => void): void {
    if (error instanceof SessionExpiredError) {
      applySessionExpired(this.state);
      return;
    }
    if (error instanceof ServiceError && onRejected) {
      onRejected(error.message);
      return;
    }
    applyUnreachable(this.state, error instanceof Error ? error.message : String(error));
    this.stopPolling();
  }
}
