import { describe, expect, it } from "vitest";

import { RequestQueue } from "../src/queue";

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (reason?: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

describe("RequestQueue", () => {
  it("runs tasks strictly in submission order", async () => {
    const queue = new RequestQueue();
    const first = deferred<string>();
    const order: string[] = [];

    const a = queue.enqueue(async () => {
      order.push("a:start");
      const v = await first.promise;
      order.push("a:end");
      return v;
    });
    const b = queue.enqueue(async () => {
      order.push("b:start");
      return "b";
    });

    // b must not start while a is blocked, even after yielding
    await new Promise((r) => setTimeout(r, 0));
    expect(order).toEqual(["a:start"]);

    first.resolve("a");
    expect(await a).toBe("a");
    expect(await b).toBe("b");
    expect(order).toEqual(["a:start", "a:end", "b:start"]);
  });

  it("applies a burst so the last response wins even when early tasks are slow", async () => {
    const queue = new RequestQueue();
    const slow = deferred<number>();
    let applied = -1;

    const tasks = [
      queue.enqueue(() => slow.promise).then((v) => (applied = v)),
      queue.enqueue(async () => 2).then((v) => (applied = v)),
      queue.enqueue(async () => 3).then((v) => (applied = v)),
    ];
    slow.resolve(1);
    await Promise.all(tasks);
    expect(applied).toBe(3);
  });

  it("propagates rejections without breaking the chain", async () => {
    const queue = new RequestQueue();
    const failing = queue.enqueue(async () => {
      throw new Error("boom");
    });
    const following = queue.enqueue(async () => "fine");

    await expect(failing).rejects.toThrow("boom");
    expect(await following).toBe("fine");
  });

  it("tracks pending depth", async () => {
    const queue = new RequestQueue();
    const gate = deferred<void>();
    const running = queue.enqueue(() => gate.promise);
    const waiting = queue.enqueue(async () => undefined);
    expect(queue.pending).toBe(2);
    gate.resolve();
    await Promise.all([running, waiting]);
    expect(queue.pending).toBe(0);
  });
});
