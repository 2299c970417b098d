/** FIFO serialization of outbound requests.
 *
 * Every mutating call to the service goes through one queue per session, so
 * responses come back, and get applied, in submission order. A burst of
 * slider drags therefore ends with the view reflecting the service's answer
 * to the LAST drag; an earlier slow response can never overwrite a newer
 * one.
 */
export class RequestQueue {
  private tail: Promise<unknown> = Promise.resolve();
  private depth = 0;

  /** Number of tasks queued or running right now. */
  get pending(): number {
    return this.depth;
  }

  /** Enqueue a task; it starts only after every earlier task settled.
   * Rejections propagate to the caller without breaking the chain. */
  enqueue<T>(task: () => Promise<T>): Promise<T> {
    this.depth += 1;
    const run = this.tail.then(task);
    this.tail = run.then(
      () => {
        this.depth -= 1;
      },
      () => {
        this.depth -= 1;
      },
    );
    return run;
  }
}
