/**
 * End-to-end test against the real Python backend.
 *
 * Spawns `airadio serve` on a scratch data dir, seeds it with primes
 * (the background worker mock-generates songs), then drives the same
 * client code the browser uses. Verifies the UI contract:
 *   - rating POSTs arrive in the server's question permutation order
 *   - preference sliders round-trip through GET/PUT
 *   - difference = -2 shifts next-song picks toward smaller distances
 *     over 200 draws, relative to a neutral (difference = 0) session
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { RadioApi, type PreferenceWeights, type StorageLike } from "../src/api.js";
import { AnswerOutbox, RatingFlow } from "../src/ratingFlow.js";

const here = dirname(fileURLToPath(import.meta.url));
const CATALOG = resolve(here, "../../data/catalog.json");
const PORT = 8100 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const ADMIN = "e2e-secret";
const SONGS = 8;

let server: ChildProcess;
let dataDir: string;

class MemoryStorage implements StorageLike {
  values = new Map<string, string>();
  getItem(key: string): string | null {
    return this.values.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.values.set(key, value);
  }
}

const freshApi = () => new RadioApi({ baseUrl: BASE, storage: new MemoryStorage() });

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

async function waitForServer(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/api/stats`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await sleep(200);
  }
  throw new Error(`backend did not come up on ${BASE}`);
}

async function submitPrime(i: number): Promise<string> {
  const features = Array.from({ length: 9 }, (_, d) => ((i * 7 + d * 3) % 10) / 10);
  features[3] = -30 - i; // loudness lives in [-60, 0]
  const res = await fetch(`${BASE}/api/admin/prime`, {
    method: "POST",
    headers: { "Content-Type": "application/json", "X-Admin-Token": ADMIN },
    body: JSON.stringify({
      prime_id: `e2e-prime-${i}`,
      contributor_name: "e2e",
      prime_artist_features: features,
      audio_ref: `primes/e2e-${i}.wav`,
    }),
  });
  expect(res.status).toBe(200);
  const body = await res.json();
  return body.job_id as string;
}

async function waitForJob(jobId: string): Promise<void> {
  for (let i = 0; i < 100; i++) {
    const res = await fetch(`${BASE}/api/jobs/${jobId}`);
    if (res.ok) {
      const job = await res.json();
      if (job.state === "complete") return;
      if (job.state === "failed") throw new Error(`job ${jobId} failed: ${job.failure_reason}`);
    }
    await sleep(200);
  }
  throw new Error(`job ${jobId} never completed`);
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "airadio-e2e-"));
  server = spawn(
    "python3",
    [
      "-m",
      "airadio.cli",
      "serve",
      "--catalog",
      CATALOG,
      "--data-dir",
      dataDir,
      "--bind",
      `127.0.0.1:${PORT}`,
      "--admin-token",
      ADMIN,
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  // keep both pipes drained so uvicorn's logging can never block the server
  server.stdout?.on("data", () => {});
  server.stderr?.on("data", () => {});
  await waitForServer(30_000);
  const jobIds = [];
  for (let i = 0; i < SONGS; i++) jobIds.push(await submitPrime(i));
  for (const jobId of jobIds) await waitForJob(jobId);
}, 120_000);

afterAll(() => {
  server?.kill("SIGTERM");
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("rating flow against the live backend", () => {
  it("POSTs answers in the server's permutation order", async () => {
    const api = freshApi();
    const next = await api.nextSong();
    expect(next.question_order).toHaveLength(7);

    const posted: string[] = [];
    const outbox = new AnswerOutbox(async (songId, question, stars) => {
      await api.rate(songId, question, stars);
      posted.push(question);
    });
    const flow = new RatingFlow(next.song.song_id, next.question_order, outbox);
    let stars = 1;
    while (!flow.done) {
      await flow.answer((stars++ % 5) + 1);
    }
    expect(posted).toEqual(next.question_order);

    // the server recorded all seven answers: per-question counts went up
    const stats = await api.stats("per_rating");
    const counts = stats.summaries.map((s) => s.count);
    expect(Math.min(...counts)).toBeGreaterThanOrEqual(1);
  }, 30_000);

  it("hands out a fresh permutation per song", async () => {
    const api = freshApi();
    const orders = new Set<string>();
    for (let i = 0; i < 5; i++) {
      const next = await api.nextSong();
      orders.add(next.question_order.join(","));
    }
    expect(orders.size).toBeGreaterThan(1);
  }, 30_000);
});

describe("preferences against the live backend", () => {
  it("round-trips slider weights through PUT then GET", async () => {
    const api = freshApi();
    const weights: PreferenceWeights = {
      difference: -2,
      happy: 1.5,
      danceable: -0.5,
      artificial: 0,
      upbeat: 2,
    };
    const echoed = await api.putPreferences(weights);
    expect(echoed).toEqual(weights);
    const fetched = await api.getPreferences();
    expect(fetched).toEqual(weights);
  }, 30_000);
});

describe("difference = -2 biases the stream toward similar songs", () => {
  const featureCache = new Map<string, number[]>();

  async function songFeatures(api: RadioApi, songId: string): Promise<number[]> {
    let features = featureCache.get(songId);
    if (!features) {
      features = (await api.song(songId)).song_features;
      featureCache.set(songId, features);
    }
    return features;
  }

  function zscore(rows: number[][]): (v: number[]) => number[] {
    const dims = rows[0].length;
    const mean = Array(dims).fill(0);
    const sd = Array(dims).fill(0);
    for (const row of rows) row.forEach((v, d) => (mean[d] += v / rows.length));
    for (const row of rows) row.forEach((v, d) => (sd[d] += (v - mean[d]) ** 2 / rows.length));
    for (let d = 0; d < dims; d++) sd[d] = Math.sqrt(sd[d]) || 1;
    return (v) => v.map((x, d) => (x - mean[d]) / sd[d]);
  }

  const dist = (a: number[], b: number[]) =>
    Math.sqrt(a.reduce((acc, x, d) => acc + (x - b[d]) ** 2, 0));

  async function meanStepDistance(difference: number, draws: number): Promise<number> {
    const api = freshApi();
    await api.putPreferences({ difference, happy: 0, danceable: 0, artificial: 0, upbeat: 0 });
    const ids: string[] = [];
    for (let i = 0; i < draws; i++) {
      const next = await api.nextSong();
      ids.push(next.song.song_id);
    }
    const raw = await Promise.all(ids.map((songId) => songFeatures(api, songId)));
    const z = zscore([...featureCache.values()]);
    let total = 0;
    for (let i = 1; i < raw.length; i++) {
      total += dist(z(raw[i - 1]), z(raw[i]));
    }
    return total / (raw.length - 1);
  }

  it("yields smaller step distances than a neutral session over 200 draws", async () => {
    const similar = await meanStepDistance(-2, 200);
    const neutral = await meanStepDistance(0, 200);
    expect(similar).toBeLessThan(neutral);
  }, 120_000);
});
