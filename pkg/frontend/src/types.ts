/** Wire shapes exchanged with the citation service, mirrored field-for-field. */

export type CitationTypeWire = "support" | "refute" | "context";

export type FetchStatusWire = "fetched" | "degraded" | "failed";

export interface SourceMetadataWire {
  title: string | null;
  author: string | null;
  source: string | null;
  description: string | null;
  cover_image_url: string | null;
  fetch_status: FetchStatusWire;
}

export interface WireCitation {
  id: string;
  video_id: string;
  url: string;
  type: CitationTypeWire;
  note: string;
  start_s: number;
  end_s: number;
  metadata: SourceMetadataWire;
  author_id: string;
  created_at: string;
}

export interface CitationDraft {
  url: string;
  type: CitationTypeWire;
  note: string;
  start_s: number;
  end_s?: number;
  author_id: string;
}

export type InteractionKindWire = "timeline_view" | "list_view" | "click_through";

export interface ApiErrorBody {
  error: string;
  detail: string;
}

/** Playback snapshot reported by whatever player hosts the video. */
export interface PlaybackState {
  videoId: string;
  currentT: number;
  durationS: number;
  playing: boolean;
}
