/** Pure view logic: which citations are active, where circles sit on the
 * track, and what the add form should be prefilled with. No DOM, no network,
 * so every rule here is unit-testable and shared by all views. */

import type { CitationTypeWire, PlaybackState, WireCitation } from "./types.js";

export const DEFAULT_SPAN_S = 10;

/** Color treatment per citation type, used everywhere a type shows up. */
export const TYPE_COLORS: Record<CitationTypeWire, string> = {
  support: "green",
  refute: "red",
  context: "blue",
};

/** The three selectable citation types, with their full form labels. */
export const TYPE_OPTIONS: ReadonlyArray<{ value: CitationTypeWire; label: string }> = [
  { value: "support", label: "support the video clip claim" },
  { value: "refute", label: "refute the video clip claim" },
  { value: "context", label: "provide further explanation" },
];

/** End time suggested when the author leaves the field blank: ten seconds
 * after the start, clamped to the end of the video when known. */
export function defaultEnd(startS: number, durationS?: number): number {
  const end = startS + DEFAULT_SPAN_S;
  return durationS !== undefined ? Math.min(end, durationS) : end;
}

/** Display order: start time, then creation time, then id. created_at is a
 * fixed-width UTC timestamp, so string comparison is chronological. */
export function compareCitations(a: WireCitation, b: WireCitation): number {
  if (a.start_s !== b.start_s) return a.start_s - b.start_s;
  if (a.created_at !== b.created_at) return a.created_at < b.created_at ? -1 : 1;
  return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
}

/** Citations whose half-open interval [start, end) covers playback time t:
 * active at the start time, no longer active at the end time. */
export function activeCitations(citations: WireCitation[], t: number): WireCitation[] {
  return citations
    .filter((c) => c.start_s <= t && t < c.end_s)
    .sort(compareCitations);
}

export interface TimelineMarker {
  fraction: number;
  citation: WireCitation;
  color: string;
}

/** One marker per citation at start/duration along the track, sorted by
 * position. Clicking a marker seeks to its citation's start time. */
export function timelineMarkers(
  citations: WireCitation[],
  durationS: number,
): TimelineMarker[] {
  if (!(durationS > 0)) return [];
  return citations
    .slice()
    .sort(compareCitations)
    .map((citation) => ({
      fraction: citation.start_s / durationS,
      citation,
      color: TYPE_COLORS[citation.type],
    }))
    .sort((a, b) => a.fraction - b.fraction);
}

/** Prefill for the add-citation form: the current playback position and the
 * default end preview; both stay editable. */
export function formPrefill(state: PlaybackState): { startS: number; endS: number } {
  const startS = roundMs(state.currentT);
  return { startS, endS: roundMs(defaultEnd(startS, state.durationS)) };
}

export function roundMs(seconds: number): number {
  return Math.round(seconds * 1000) / 1000;
}

/** m:ss (or h:mm:ss) for citation cards and the form hint. */
export function formatClock(seconds: number): string {
  const whole = Math.floor(seconds);
  const h = Math.floor(whole / 3600);
  const m = Math.floor((whole % 3600) / 60);
  const s = whole % 60;
  const mmss = h > 0 ? `${m}`.padStart(2, "0") : `${m}`;
  return (h > 0 ? `${h}:` : "") + `${mmss}:${`${s}`.padStart(2, "0")}`;
}

export function formatTimespan(startS: number, endS: number): string {
  return `${formatClock(startS)} to ${formatClock(endS)}`;
}

/** Field the inline message belongs to for each server rejection code. */
export function fieldForErrorCode(code: string): "url" | "start" | "end" | "note" | "form" {
  switch (code) {
    case "MalformedUrl":
      return "url";
    case "InvertedInterval":
      return "end";
    case "OutOfBounds":
      return "end";
    case "NoteTooLong":
      return "note";
    default:
      return "form";
  }
}
