/** Typed client for the steering service. All session mutations are
 * serialized through a RequestQueue; reads share it so a poll can never
 * observe a half-applied burst out of order. */
import { RequestQueue } from "./queue";
import type {
  CoverageDoc,
  FeedbackKind,
  FeedbackResponse,
  MomdpSummary,
  SelectionResponse,
  SessionCreated,
  SessionState,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class SessionExpiredError extends Error {}

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly path: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let message = `service returned ${response.status}`;
  let path = "";
  try {
    const body = (await response.json()) as { error?: string; path?: string };
    message = body.error ?? message;
    path = body.path ?? "";
  } catch {
    // non-JSON error body; keep the status-line message
  }
  if (response.status === 404) {
    throw new SessionExpiredError(message);
  }
  throw new ServiceError(message, path, response.status);
}

export class Client {
  readonly queue = new RequestQueue();
  private sessionId: string | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private get(path: string): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`);
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  private session(): string {
    if (this.sessionId === null) {
      throw new Error("no session created yet");
    }
    return this.sessionId;
  }

  momdp(): Promise<MomdpSummary> {
    return this.queue.enqueue(async () => parseOrThrow(await this.get("/api/momdp")));
  }

  coverage(): Promise<CoverageDoc> {
    return this.queue.enqueue(async () => parseOrThrow(await this.get("/api/coverage")));
  }

  createSession(seed = 0): Promise<SessionCreated> {
    return this.queue.enqueue(async () => {
      const created = await parseOrThrow<SessionCreated>(
        await this.post("/api/session", { seed }),
      );
      this.sessionId = created.session_id;
      return created;
    });
  }

  state(): Promise<SessionState> {
    return this.queue.enqueue(async () =>
      parseOrThrow(await this.get(`/api/session/${this.session()}/state`)),
    );
  }

  setWeights(weights: number[]): Promise<SelectionResponse> {
    return this.queue.enqueue(async () =>
      parseOrThrow(
        await this.post(`/api/session/${this.session()}/preferences`, { weights }),
      ),
    );
  }

  feedback(kind: FeedbackKind): Promise<FeedbackResponse> {
    return this.queue.enqueue(async () =>
      parseOrThrow(
        await this.post(`/api/session/${this.session()}/feedback`, { kind }),
      ),
    );
  }

  step(count = 1): Promise<SessionState> {
    return this.queue.enqueue(async () =>
      parseOrThrow(await this.post(`/api/session/${this.session()}/step`, { count })),
    );
  }
}
