import { describe, expect, it } from "vitest";

import type { PredictionRecord } from "../src/api.js";
import { ReviewQueue } from "../src/reviewQueue.js";

function record(id: number, margin: number): PredictionRecord {
  return { id, path: `s#${id}`, predicted: "particle", margin, votes_particle: 11 };
}

describe("ReviewQueue", () => {
  it("orders ascending by margin with the global minimum first", () => {
    const queue = new ReviewQueue([record(1, 9), record(2, 1), record(3, 5), record(4, 3)]);
    expect(queue.current()?.id).toBe(2);
    expect(queue.margins()).toEqual([1, 3, 5, 9]);
  });

  it("keeps the cursor within bounds", () => {
    const queue = new ReviewQueue([record(1, 1), record(2, 3)]);
    expect(queue.remaining).toBe(2);
    expect(queue.advance()?.id).toBe(2);
    expect(queue.advance()).toBeNull();
    expect(queue.advance()).toBeNull(); // advancing past the end is a no-op
    expect(queue.cursor).toBe(2);
    expect(queue.remaining).toBe(0);
  });

  it("handles an empty queue", () => {
    const queue = new ReviewQueue([]);
    expect(queue.current()).toBeNull();
    expect(queue.remaining).toBe(0);
  });
});
