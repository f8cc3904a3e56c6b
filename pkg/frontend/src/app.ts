/** Controller: owns the citation list, keeps the active cards in sync with
 * the player clock, switches between the timeline and list views, and logs
 * the interaction events the reports aggregate. */

import type { CitationApi } from "./api.js";
import { activeCitations, compareCitations, formPrefill } from "./model.js";
import type { VideoPlayer } from "./player.js";
import type { CitationDraft, PlaybackState, WireCitation } from "./types.js";
import {
  renderActiveCards,
  renderAddForm,
  renderList,
  renderPlayhead,
  renderTimelineTrack,
  type AddFormHandle,
} from "./view.js";

export type ViewName = "timeline" | "list" | "add";

export interface AppOptions {
  videoId: string;
  authorId: string;
  participantId?: string;
  /** Keep a card on screen at least this long even if its interval is
   * shorter. Off by default; the exact threshold is an open design knob. */
  minShowTimeS?: number;
}

export class ViblioApp {
  readonly api: CitationApi;
  readonly player: VideoPlayer;
  readonly opts: AppOptions;

  citations: WireCitation[] = [];
  view: ViewName = "timeline";
  private activeIds = "";

  private track!: HTMLElement;
  private activeContainer!: HTMLElement;
  private listContainer!: HTMLElement;
  private formContainer!: HTMLElement;
  private tabs!: Record<ViewName, HTMLButtonElement>;
  private formHandle!: AddFormHandle;

  constructor(root: HTMLElement, api: CitationApi, player: VideoPlayer, opts: AppOptions) {
    this.api = api;
    this.player = player;
    this.opts = opts;
    this.buildChrome(root);
    this.player.onTimeUpdate(() => this.sync());
  }

  get participantId(): string {
    return this.opts.participantId ?? this.opts.authorId;
  }

  playbackState(): PlaybackState {
    return {
      videoId: this.opts.videoId,
      currentT: this.player.currentTime,
      durationS: this.player.durationS,
      playing: this.player.playing,
    };
  }

  async init(): Promise<void> {
    this.citations = (await this.api.listCitations(this.opts.videoId)).sort(compareCitations);
    this.switchView("timeline");
    this.renderAll();
  }

  /** Active card set for time t. With minShowTimeS set, a card stays up
   * until max(end, start + minShowTime); the option is off by default. */
  computeActive(t: number): WireCitation[] {
    const hold = this.opts.minShowTimeS;
    if (hold === undefined) return activeCitations(this.citations, t);
    return this.citations
      .filter((c) => c.start_s <= t && t < Math.max(c.end_s, c.start_s + hold))
      .sort(compareCitations);
  }

  switchView(view: ViewName): void {
    this.view = view;
    for (const [name, tab] of Object.entries(this.tabs)) {
      tab.classList.toggle("viblio-tab--current", name === view);
    }
    this.track.parentElement!.hidden = view !== "timeline";
    this.activeContainer.hidden = view !== "timeline";
    this.listContainer.hidden = view !== "list";
    this.formContainer.hidden = view !== "add";
    if (view === "timeline") {
      void this.api.postEvent(this.opts.videoId, this.participantId, "timeline_view");
    } else if (view === "list") {
      void this.api.postEvent(this.opts.videoId, this.participantId, "list_view");
    } else {
      const { startS, endS } = formPrefill(this.playbackState());
      this.formHandle.setPrefill(startS, endS);
    }
  }

  /** Recompute everything time-dependent; cheap enough to run per tick. */
  sync(): void {
    const t = this.player.currentTime;
    renderPlayhead(this.track, t, this.player.durationS);
    const active = this.computeActive(t);
    const ids = active.map((c) => c.id).join(",");
    if (ids !== this.activeIds) {
      this.activeIds = ids;
      renderActiveCards(this.activeContainer, active, (c) => this.logClickThrough(c));
    }
  }

  renderAll(): void {
    renderTimelineTrack(this.track, this.citations, this.player.durationS, (startS) =>
      this.player.seek(startS),
    );
    renderList(this.listContainer, this.citations, (c) => this.logClickThrough(c));
    this.activeIds = "";
    this.sync();
  }

  logClickThrough(citation: WireCitation): void {
    void this.api.postEvent(
      this.opts.videoId,
      this.participantId,
      "click_through",
      citation.id,
    );
  }

  /** POST the draft; on 201 the citation joins the local set and the new
   * circle shows up with no reload. Rejections surface inline on the form. */
  async submitCitation(draft: CitationDraft): Promise<boolean> {
    const result = await this.api.postCitation(this.opts.videoId, draft);
    if (!result.ok) {
      this.formHandle.showError(result.error, result.detail);
      return false;
    }
    this.citations = [...this.citations, result.citation].sort(compareCitations);
    this.renderAll();
    this.switchView("timeline");
    return true;
  }

  private buildChrome(root: HTMLElement): void {
    const d = root.ownerDocument;
    root.classList.add("viblio");

    const tabBar = d.createElement("div");
    tabBar.className = "viblio-tabs";
    const makeTab = (view: ViewName, label: string): HTMLButtonElement => {
      const tab = d.createElement("button");
      tab.type = "button";
      tab.className = "viblio-tab";
      tab.dataset.view = view;
      tab.textContent = label;
      tab.addEventListener("click", () => this.switchView(view));
      tabBar.appendChild(tab);
      return tab;
    };
    this.tabs = {
      timeline: makeTab("timeline", "Timeline"),
      list: makeTab("list", "List"),
      add: makeTab("add", "Add citation"),
    };
    root.appendChild(tabBar);

    const trackWrap = d.createElement("div");
    trackWrap.className = "viblio-track-wrap";
    this.track = d.createElement("div");
    this.track.className = "viblio-track";
    trackWrap.appendChild(this.track);
    root.appendChild(trackWrap);

    this.activeContainer = d.createElement("div");
    this.activeContainer.className = "viblio-active-cards";
    root.appendChild(this.activeContainer);

    this.listContainer = d.createElement("div");
    this.listContainer.className = "viblio-list";
    this.listContainer.hidden = true;
    root.appendChild(this.listContainer);

    this.formContainer = d.createElement("div");
    this.formContainer.className = "viblio-form-wrap";
    this.formContainer.hidden = true;
    root.appendChild(this.formContainer);
    this.formHandle = renderAddForm(this.formContainer, this.opts.authorId, (draft) => {
      void this.submitCitation(draft);
    });
  }
}
