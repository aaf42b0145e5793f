/** Thin wrapper around HTMLAudioElement so the rest of the app (and the
 * tests) never touch the DOM audio API directly. */

export interface AudioLike {
  src: string;
  volume: number;
  onended: (() => void) | null;
  play(): Promise<void>;
  pause(): void;
}

export type AudioFactory = (url: string) => AudioLike;

const domAudio: AudioFactory = (url) => new Audio(url) as unknown as AudioLike;

export class Player {
  private audio: AudioLike | null = null;

  constructor(private readonly createAudio: AudioFactory = domAudio) {}

  play(url: string, onEnded?: () => void): Promise<void> {
    this.stop();
    this.audio = this.createAudio(url);
    if (onEnded) this.audio.onended = onEnded;
    return this.audio.play().catch((err) => {
      console.error("playback failed:", err);
    });
  }

  stop(): void {
    if (this.audio) {
      this.audio.pause();
      this.audio.onended = null;
      this.audio = null;
    }
  }

  setVolume(volume: number): void {
    if (this.audio) {
      this.audio.volume = Math.max(0, Math.min(1, volume));
    }
  }

  get playing(): boolean {
    return this.audio !== null;
  }
}
