/**
 * Typed client for the radio service HTTP API.
 *
 * The server mints an opaque session token on first contact and echoes
 * it in every response; the client persists it and threads it through
 * all subsequent requests (query param on GETs, body field otherwise).
 */

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface SongInfo {
  song_id: string;
  prime_id: string;
  artist_prompt: string;
  genre_prompt: string;
  song_features: number[];
  audio_ref: string;
}

export interface NextSongResponse {
  session: string;
  song: SongInfo;
  audio_url: string;
  question_order: string[];
  question_text: Record<string, string>;
}

export type PreferenceWeights = {
  difference: number;
  happy: number;
  danceable: number;
  artificial: number;
  upbeat: number;
};

export interface QuestionSummary {
  question: string;
  count: number;
  histogram: number[];
  mean: number | null;
  stddev: number | null;
}

export interface CorrelationCell {
  question_a: string;
  question_b: string;
  r: number | null;
  p: number | null;
  n: number;
  stars: string;
  note: string | null;
}

export interface StatsReport {
  unit: string;
  summaries: QuestionSummary[];
  correlations: CorrelationCell[][];
  question_tests: {
    question: string;
    t: number | null;
    p: number | null;
    stars: string;
  }[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

const SESSION_KEY = "airadio.session";

class MemoryStorage implements StorageLike {
  private values = new Map<string, string>();
  getItem(key: string): string | null {
    return this.values.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.values.set(key, value);
  }
}

function defaultStorage(): StorageLike {
  try {
    if (typeof localStorage !== "undefined") return localStorage;
  } catch {
    // sandboxed iframe or node: fall through
  }
  return new MemoryStorage();
}

export class RadioApi {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly storage: StorageLike;

  constructor(options: { baseUrl?: string; fetchFn?: FetchLike; storage?: StorageLike } = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.fetchFn = options.fetchFn ?? ((input, init) => fetch(input, init));
    this.storage = options.storage ?? defaultStorage();
  }

  get session(): string | null {
    return this.storage.getItem(SESSION_KEY);
  }

  private remember(session: unknown): void {
    if (typeof session === "string" && session.length > 0) {
      this.storage.setItem(SESSION_KEY, session);
    }
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        String(body.error ?? "unknown"),
        String(body.message ?? response.statusText),
      );
    }
    this.remember(body.session);
    return body as T;
  }

  private withSession(path: string): string {
    const session = this.session;
    if (!session) return path;
    const sep = path.includes("?") ? "&" : "?";
    return `${path}${sep}session=${encodeURIComponent(session)}`;
  }

  audioUrl(path: string): string {
    return this.baseUrl + path;
  }

  nextSong(): Promise<NextSongResponse> {
    return this.request<NextSongResponse>(this.withSession("/api/next"));
  }

  rate(songId: string, question: string, stars: number): Promise<void> {
    return this.request("/api/rate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        session: this.session,
        song_id: songId,
        question,
        stars,
      }),
    });
  }

  async getPreferences(): Promise<PreferenceWeights> {
    const body = await this.request<{ weights: PreferenceWeights }>(
      this.withSession("/api/preferences"),
    );
    return body.weights;
  }

  async putPreferences(weights: PreferenceWeights): Promise<PreferenceWeights> {
    const body = await this.request<{ weights: PreferenceWeights }>("/api/preferences", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ session: this.session, weights }),
    });
    return body.weights;
  }

  stats(unit: "per_song_mean" | "per_rating" = "per_song_mean"): Promise<StatsReport> {
    return this.request<StatsReport>(`/api/stats?unit=${unit}`);
  }

  song(songId: string): Promise<SongInfo> {
    return this.request<SongInfo>(`/api/songs/${encodeURIComponent(songId)}`);
  }
}
