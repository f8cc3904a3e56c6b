/** Player abstraction: the app only needs a clock, a duration, and seek.
 * Html5Player wraps a real <video>; ScriptedPlayer drives demos and tests. */

export interface VideoPlayer {
  readonly currentTime: number;
  readonly durationS: number;
  readonly playing: boolean;
  seek(t: number): void;
  onTimeUpdate(listener: () => void): void;
}

export class Html5Player implements VideoPlayer {
  constructor(private readonly video: HTMLVideoElement) {}

  get currentTime(): number {
    return this.video.currentTime;
  }

  get durationS(): number {
    return Number.isFinite(this.video.duration) ? this.video.duration : 0;
  }

  get playing(): boolean {
    return !this.video.paused;
  }

  seek(t: number): void {
    this.video.currentTime = t;
  }

  onTimeUpdate(listener: () => void): void {
    this.video.addEventListener("timeupdate", listener);
    this.video.addEventListener("seeked", listener);
    this.video.addEventListener("durationchange", listener);
  }
}

/** A player whose clock is advanced by the caller. Seeks are observable,
 * which is what the seek-on-circle-click tests assert against. */
export class ScriptedPlayer implements VideoPlayer {
  currentTime = 0;
  playing = false;
  readonly seeks: number[] = [];
  private listeners: Array<() => void> = [];

  constructor(readonly durationS: number) {}

  seek(t: number): void {
    this.currentTime = Math.max(0, Math.min(t, this.durationS));
    this.seeks.push(this.currentTime);
    this.emit();
  }

  setTime(t: number): void {
    this.currentTime = Math.max(0, Math.min(t, this.durationS));
    this.emit();
  }

  onTimeUpdate(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }
}
