// Frame stream ordering: apply strictly by sequence number, buffer anything
// early, resume from the last applied seq after a reconnect.

import type { Frame } from "./types.js";

export class FrameSync {
  private buffer = new Map<number, Frame>();
  private applied = 0;

  constructor(private onFrame: (frame: Frame) => void) {}

  get lastSeq(): number {
    return this.applied;
  }

  /** Feed frames in any order; the callback fires in seq order exactly once. */
  push(frames: Frame[]): void {
    for (const f of frames) {
      if (f.seq > this.applied && !this.buffer.has(f.seq)) {
        this.buffer.set(f.seq, f);
      }
    }
    this.drain();
  }

  /** True when a gap is outstanding (a later frame waits on a missing one). */
  get stalled(): boolean {
    return this.buffer.size > 0;
  }

  private drain(): void {
    for (;;) {
      const next = this.buffer.get(this.applied + 1);
      if (!next) return;
      this.buffer.delete(next.seq);
      this.applied = next.seq;
      this.onFrame(next);
    }
  }
}

/** Poll the events endpoint until the session leaves the live state. */
export async function pollLoop(
  fetchSince: (since: number) => Promise<{ frames: Frame[]; status: string }>,
  sync: FrameSync,
  opts: { intervalMs?: number; sleeper?: (ms: number) => Promise<void> } = {},
): Promise<string> {
  const interval = opts.intervalMs ?? 250;
  const sleep =
    opts.sleeper ?? ((ms: number) => new Promise((r) => setTimeout(r, ms)));
  for (;;) {
    const res = await fetchSince(sync.lastSeq);
    sync.push(res.frames);
    if (res.status !== "live") return res.status;
    await sleep(interval);
  }
}
