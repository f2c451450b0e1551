/**
 * State for the paged labeling grid. Labels shown in the grid are always
 * the server's confirmed records: a submission POSTs to /labels and the
 * tile is updated only from the response (no optimistic updates). Failed
 * submissions are kept in a retry set so nothing is silently lost.
 */

import type { ApiClient, SampleRecord, SampleState } from "./api.js";

export interface LabelCounts {
  labeled: number;
  unlabeled: number;
}

export class LabelGrid {
  samples: SampleRecord[] = [];
  total = 0;
  offset = 0;
  focus = 0;
  pending = new Set<number>();
  failed = new Set<number>();

  constructor(
    private readonly api: ApiClient,
    readonly pageSize = 24,
  ) {}

  async loadPage(offset: number, state?: SampleState): Promise<void> {
    const page = await this.api.getSamples(state, offset, this.pageSize);
    this.samples = page.items;
    this.total = page.total;
    this.offset = page.offset;
    this.focus = 0;
  }

  moveFocus(delta: number): void {
    const next = this.focus + delta;
    if (next >= 0 && next < this.samples.length) {
      this.focus = next;
    }
  }

  focused(): SampleRecord | null {
    return this.samples[this.focus] ?? null;
  }

  /** Label the focused tile; the grid reflects the server's record only. */
  async labelFocused(label: "particle" | "non_particle"): Promise<SampleRecord | null> {
    const sample = this.focused();
    if (sample === null || this.pending.has(sample.id)) return null;
    this.pending.add(sample.id);
    try {
      const confirmed = await this.api.postLabel(sample.id, label);
      this.samples[this.focus] = confirmed;
      this.failed.delete(sample.id);
      return confirmed;
    } catch (err) {
      this.failed.add(sample.id);
      throw err;
    } finally {
      this.pending.delete(sample.id);
    }
  }

  /** Running label counts, taken from the service, never computed locally. */
  async counts(): Promise<LabelCounts> {
    const [labeled, unlabeled] = await Promise.all([
      this.api.getSamples("labeled", 0, 1),
      this.api.getSamples("unlabeled", 0, 1),
    ]);
    return { labeled: labeled.total, unlabeled: unlabeled.total };
  }
}
