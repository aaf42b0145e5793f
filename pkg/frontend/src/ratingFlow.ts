/**
 * One-question-at-a-time rating flow.
 *
 * The server sends a fresh question permutation with every song; answers
 * must reach it in that exact order. Submissions go through an ordered
 * outbox: a failed POST is retried (with backoff) before anything queued
 * behind it is sent, so transient network errors never reorder answers.
 */

export type SubmitFn = (songId: string, question: string, stars: number) => Promise<void>;

export interface QueuedAnswer {
  songId: string;
  question: string;
  stars: number;
}

export interface OutboxOptions {
  maxAttempts?: number;
  retryDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class AnswerOutbox {
  private queue: QueuedAnswer[] = [];
  private flushing = false;
  private readonly maxAttempts: number;
  private readonly retryDelayMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly submit: SubmitFn,
    options: OutboxOptions = {},
  ) {
    this.maxAttempts = options.maxAttempts ?? 5;
    this.retryDelayMs = options.retryDelayMs ?? 500;
    this.sleep = options.sleep ?? defaultSleep;
  }

  get pending(): number {
    return this.queue.length;
  }

  push(answer: QueuedAnswer): Promise<void> {
    this.queue.push(answer);
    return this.flush();
  }

  async flush(): Promise<void> {
    if (this.flushing) return;
    this.flushing = true;
    try {
      while (this.queue.length > 0) {
        const head = this.queue[0];
        await this.sendWithRetry(head);
        this.queue.shift();
      }
    } finally {
      this.flushing = false;
    }
  }

  private async sendWithRetry(answer: QueuedAnswer): Promise<void> {
    let lastError: unknown;
    for (let attempt = 1; attempt <= this.maxAttempts; attempt++) {
      try {
        await this.submit(answer.songId, answer.question, answer.stars);
        return;
      } catch (err) {
        lastError = err;
        if (attempt < this.maxAttempts) {
          await this.sleep(this.retryDelayMs * attempt);
        }
      }
    }
    throw lastError;
  }
}

export class RatingFlow {
  private index = 0;

  constructor(
    readonly songId: string,
    readonly questionOrder: readonly string[],
    private readonly outbox: AnswerOutbox,
  ) {}

  /** The question to show now, or null when the song is fully rated. */
  current(): string | null {
    return this.index < this.questionOrder.length ? this.questionOrder[this.index] : null;
  }

  get answered(): number {
    return this.index;
  }

  get done(): boolean {
    return this.index >= this.questionOrder.length;
  }

  /** Record the answer for the current question and advance. */
  answer(stars: number): Promise<void> {
    const question = this.current();
    if (question === null) {
      throw new Error("all questions for this song are already answered");
    }
    if (!Number.isInteger(stars) || stars < 1 || stars > 5) {
      throw new Error(`stars must be an integer 1-5, got ${stars}`);
    }
    this.index += 1;
    return this.outbox.push({ songId: this.songId, question, stars });
  }

  /** Advance past the current question without submitting anything. */
  skip(): void {
    if (this.current() !== null) this.index += 1;
  }
}
