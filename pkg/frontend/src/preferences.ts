/**
 * Preference slider state.
 *
 * The five weights (difference, happy, danceable, artificial, upbeat)
 * live in [-2, 2]. Slider input updates local state immediately; the
 * PUT to the server is debounced so dragging produces one request.
 */

import type { PreferenceWeights } from "./api.js";
import { debounce } from "./debounce.js";

export const PREFERENCE_KEYS = [
  "difference",
  "happy",
  "danceable",
  "artificial",
  "upbeat",
] as const;

export type PreferenceKey = (typeof PREFERENCE_KEYS)[number];

export const WEIGHT_MIN = -2;
export const WEIGHT_MAX = 2;

export function clampWeight(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(WEIGHT_MAX, Math.max(WEIGHT_MIN, value));
}

export const DEFAULT_WEIGHTS: PreferenceWeights = {
  difference: 2,
  happy: 0,
  danceable: 0,
  artificial: 0,
  upbeat: 0,
};

export interface PreferencePanelOptions {
  put: (weights: PreferenceWeights) => Promise<PreferenceWeights>;
  onLocalChange?: (weights: PreferenceWeights) => void;
  onSaved?: (weights: PreferenceWeights) => void;
  onError?: (err: unknown) => void;
  debounceMs?: number;
}

export class PreferencePanel {
  private weights: PreferenceWeights;
  private readonly save: ReturnType<typeof debounce<[PreferenceWeights]>>;

  constructor(
    initial: PreferenceWeights,
    private readonly options: PreferencePanelOptions,
  ) {
    this.weights = { ...initial };
    this.save = debounce((weights: PreferenceWeights) => {
      this.options
        .put(weights)
        .then((saved) => this.options.onSaved?.(saved))
        .catch((err) => this.options.onError?.(err));
    }, options.debounceMs ?? 300);
  }

  get current(): PreferenceWeights {
    return { ...this.weights };
  }

  /** Slider input: clamp, update local state, schedule a debounced PUT. */
  set(key: PreferenceKey, value: number): void {
    this.weights = { ...this.weights, [key]: clampWeight(value) };
    this.options.onLocalChange?.(this.current);
    this.save(this.current);
  }

  /** Slider release: push the latest value without waiting out the delay. */
  commit(): void {
    this.save.flushNow();
  }
}
