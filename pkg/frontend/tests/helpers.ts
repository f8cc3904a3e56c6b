import { JSDOM, VirtualConsole } from "jsdom";

import type { CitationApi, PostCitationResult } from "../src/api.js";
import type {
  CitationDraft,
  CitationTypeWire,
  InteractionKindWire,
  WireCitation,
} from "../src/types.js";

/** Fresh documents per test; the virtual console stays silent so jsdom's
 * "navigation not implemented" chatter does not pollute the run. */
export function makeDom(): JSDOM {
  return new JSDOM("<!DOCTYPE html><body></body>", {
    virtualConsole: new VirtualConsole(),
    url: "http://localhost/",
  });
}

let counter = 0;

export function makeCitation(overrides: Partial<WireCitation> = {}): WireCitation {
  counter += 1;
  const start = overrides.start_s ?? 10;
  return {
    id: `cit-${String(counter).padStart(3, "0")}`,
    video_id: "video-11",
    url: "https://example.org/source",
    type: "context",
    note: "",
    start_s: start,
    end_s: overrides.end_s ?? start + 10,
    metadata: {
      title: "A Source",
      author: null,
      source: "example.org",
      description: null,
      cover_image_url: null,
      fetch_status: "fetched",
    },
    author_id: "author-1",
    created_at: `2024-05-01T10:00:${String(counter % 60).padStart(2, "0")}.000Z`,
    ...overrides,
  };
}

export interface LoggedEvent {
  videoId: string;
  participantId: string;
  kind: InteractionKindWire;
  citationId?: string;
}

/** In-memory stand-in for the service, recording every call. */
export class FakeApi implements CitationApi {
  citations: WireCitation[] = [];
  events: LoggedEvent[] = [];
  nextPostError: { error: string; detail: string } | null = null;

  async listCitations(): Promise<WireCitation[]> {
    return [...this.citations];
  }

  async postCitation(videoId: string, draft: CitationDraft): Promise<PostCitationResult> {
    if (this.nextPostError) {
      const error = this.nextPostError;
      this.nextPostError = null;
      return { ok: false, ...error };
    }
    const citation = makeCitation({
      video_id: videoId,
      url: draft.url,
      type: draft.type as CitationTypeWire,
      note: draft.note,
      start_s: draft.start_s,
      end_s: draft.end_s ?? draft.start_s + 10,
      author_id: draft.author_id,
    });
    this.citations.push(citation);
    return { ok: true, citation };
  }

  async postEvent(
    videoId: string,
    participantId: string,
    kind: InteractionKindWire,
    citationId?: string,
  ): Promise<void> {
    this.events.push({ videoId, participantId, kind, citationId });
  }
}
