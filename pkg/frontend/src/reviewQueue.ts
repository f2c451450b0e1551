/**
 * Uncertainty-first review queue: prediction records ordered ascending by
 * vote margin, with a cursor. The queue is rebuilt from /predictions; the
 * only mutation is advancing the cursor as items are reviewed.
 */

import type { PredictionRecord } from "./api.js";

export class ReviewQueue {
  private readonly records: PredictionRecord[];
  private index = 0;

  constructor(records: PredictionRecord[]) {
    this.records = [...records].sort((a, b) => a.margin - b.margin);
  }

  /** Number of records still to review (cursor to end). */
  get remaining(): number {
    return this.records.length - this.index;
  }

  get length(): number {
    return this.records.length;
  }

  get cursor(): number {
    return this.index;
  }

  /** The record under the cursor, or null when the queue is exhausted. */
  current(): PredictionRecord | null {
    return this.index < this.records.length ? this.records[this.index] : null;
  }

  /** Advance past the current record; returns the new current record. */
  advance(): PredictionRecord | null {
    if (this.index < this.records.length) {
      this.index += 1;
    }
    return this.current();
  }

  /** All margins in queue order (ascending by construction). */
  margins(): number[] {
    return this.records.map((r) => r.margin);
  }
}
