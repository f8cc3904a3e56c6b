/** Thin typed client for the citation service. Event logging is
 * fire-and-forget (optimistic); citation creation waits for the 201. */

import type {
  ApiErrorBody,
  CitationDraft,
  InteractionKindWire,
  WireCitation,
} from "./types.js";

export type PostCitationResult =
  | { ok: true; citation: WireCitation }
  | { ok: false; error: string; detail: string };

/** What the app needs from the service; ApiClient is the real one. */
export interface CitationApi {
  listCitations(videoId: string): Promise<WireCitation[]>;
  postCitation(videoId: string, draft: CitationDraft): Promise<PostCitationResult>;
  postEvent(
    videoId: string,
    participantId: string,
    kind: InteractionKindWire,
    citationId?: string,
  ): Promise<void>;
}

export class ApiClient implements CitationApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async listCitations(videoId: string): Promise<WireCitation[]> {
    const resp = await fetch(this.url(`/videos/${encodeURIComponent(videoId)}/citations`));
    if (!resp.ok) throw new Error(`list citations failed: ${resp.status}`);
    return (await resp.json()) as WireCitation[];
  }

  async activeCitations(videoId: string, t: number): Promise<WireCitation[]> {
    const resp = await fetch(
      this.url(`/videos/${encodeURIComponent(videoId)}/citations/active?t=${t}`),
    );
    if (!resp.ok) throw new Error(`active citations failed: ${resp.status}`);
    return (await resp.json()) as WireCitation[];
  }

  async postCitation(videoId: string, draft: CitationDraft): Promise<PostCitationResult> {
    const resp = await fetch(this.url(`/videos/${encodeURIComponent(videoId)}/citations`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(draft),
    });
    if (resp.status === 201) {
      return { ok: true, citation: (await resp.json()) as WireCitation };
    }
    const body = (await resp.json().catch(() => null)) as ApiErrorBody | null;
    return {
      ok: false,
      error: body?.error ?? `Http${resp.status}`,
      detail: body?.detail ?? `request failed with status ${resp.status}`,
    };
  }

  /** Log a UI interaction; failures are swallowed so the UI never blocks. */
  postEvent(
    videoId: string,
    participantId: string,
    kind: InteractionKindWire,
    citationId?: string,
  ): Promise<void> {
    const body: Record<string, string> = { participant_id: participantId, kind };
    if (citationId !== undefined) body.citation_id = citationId;
    return fetch(this.url(`/videos/${encodeURIComponent(videoId)}/events`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then(
      () => undefined,
      () => undefined,
    );
  }
}
