/** DOM renderers. Each takes a container and builds from its ownerDocument,
 * so the same code runs in the page and under jsdom. Everything visual
 * carries a data-* hook or a viblio-* class for styling and tests. */

import {
  TYPE_COLORS,
  TYPE_OPTIONS,
  fieldForErrorCode,
  formatTimespan,
  timelineMarkers,
} from "./model.js";
import type { CitationDraft, CitationTypeWire, WireCitation } from "./types.js";

function doc(el: Element): Document {
  return el.ownerDocument;
}

function clear(el: Element): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

/** The track with one colored circle per citation, positioned at
 * start/duration of the width. Clicking a circle seeks to the start. */
export function renderTimelineTrack(
  track: HTMLElement,
  citations: WireCitation[],
  durationS: number,
  onSeek: (startS: number) => void,
): void {
  clear(track);
  for (const marker of timelineMarkers(citations, durationS)) {
    const circle = doc(track).createElement("button");
    circle.type = "button";
    circle.className = `viblio-circle viblio-circle--${marker.color}`;
    circle.style.left = `${(marker.fraction * 100).toFixed(3)}%`;
    circle.dataset.citationId = marker.citation.id;
    circle.dataset.color = marker.color;
    circle.dataset.startS = String(marker.citation.start_s);
    circle.title = marker.citation.metadata.title ?? marker.citation.url;
    circle.addEventListener("click", () => onSeek(marker.citation.start_s));
    track.appendChild(circle);
  }
}

/** Playback progress indicator on the same track. */
export function renderPlayhead(track: HTMLElement, t: number, durationS: number): void {
  const existing = track.querySelector<HTMLElement>(".viblio-playhead");
  const head = existing ?? doc(track).createElement("span");
  if (!existing) {
    head.className = "viblio-playhead";
    track.appendChild(head);
  }
  const fraction = durationS > 0 ? Math.min(Math.max(t / durationS, 0), 1) : 0;
  head.style.left = `${(fraction * 100).toFixed(3)}%`;
}

/** One citation card: scraped metadata when available, the author's note,
 * the referenced timespan, and the type badge in its color. */
export function renderCitationCard(
  container: Element,
  citation: WireCitation,
  onClickThrough: (citation: WireCitation) => void,
): HTMLElement {
  const d = doc(container);
  const card = d.createElement("article");
  card.className = `viblio-card viblio-card--${TYPE_COLORS[citation.type]}`;
  card.dataset.citationId = citation.id;

  const badge = d.createElement("span");
  badge.className = "viblio-badge";
  badge.dataset.color = TYPE_COLORS[citation.type];
  badge.textContent = citation.type;
  card.appendChild(badge);

  const md = citation.metadata;
  if (md.cover_image_url) {
    const img = d.createElement("img");
    img.className = "viblio-cover";
    img.src = md.cover_image_url;
    img.alt = "";
    card.appendChild(img);
  }

  const title = d.createElement("a");
  title.className = "viblio-title";
  title.href = citation.url;
  title.target = "_blank";
  title.rel = "noopener";
  title.textContent = md.title ?? citation.url;
  title.addEventListener("click", () => onClickThrough(citation));
  card.appendChild(title);

  if (md.source) {
    const source = d.createElement("div");
    source.className = "viblio-source";
    source.textContent = md.source;
    card.appendChild(source);
  }
  if (md.description) {
    const desc = d.createElement("p");
    desc.className = "viblio-description";
    desc.textContent = md.description;
    card.appendChild(desc);
  }
  if (citation.note) {
    const note = d.createElement("p");
    note.className = "viblio-note";
    note.textContent = citation.note;
    card.appendChild(note);
  }

  const span = d.createElement("div");
  span.className = "viblio-timespan";
  span.textContent = formatTimespan(citation.start_s, citation.end_s);
  card.appendChild(span);

  return card;
}

/** Cards shown under the timeline for citations covering the current time. */
export function renderActiveCards(
  container: HTMLElement,
  active: WireCitation[],
  onClickThrough: (citation: WireCitation) => void,
): void {
  clear(container);
  if (active.length === 0) {
    const idle = doc(container).createElement("p");
    idle.className = "viblio-idle";
    idle.textContent = "No citations for this moment.";
    container.appendChild(idle);
    return;
  }
  for (const citation of active) {
    container.appendChild(renderCitationCard(container, citation, onClickThrough));
  }
}

/** Scrollable list of every citation with shortcut buttons on the left. */
export function renderList(
  container: HTMLElement,
  citations: WireCitation[],
  onClickThrough: (citation: WireCitation) => void,
): void {
  clear(container);
  const d = doc(container);
  const shortcuts = d.createElement("nav");
  shortcuts.className = "viblio-shortcuts";
  const cards = d.createElement("div");
  cards.className = "viblio-list-cards";

  citations.forEach((citation, index) => {
    const card = renderCitationCard(cards, citation, onClickThrough);
    cards.appendChild(card);

    const shortcut = d.createElement("button");
    shortcut.type = "button";
    shortcut.className = `viblio-shortcut viblio-shortcut--${TYPE_COLORS[citation.type]}`;
    shortcut.dataset.citationId = citation.id;
    shortcut.textContent = String(index + 1);
    shortcut.addEventListener("click", () => {
      card.scrollIntoView?.({ behavior: "smooth", block: "nearest" });
    });
    shortcuts.appendChild(shortcut);
  });

  container.appendChild(shortcuts);
  container.appendChild(cards);
}

export interface AddFormHandle {
  readonly form: HTMLFormElement;
  setPrefill(startS: number, endS: number): void;
  showError(code: string, detail: string): void;
  clearErrors(): void;
}

/** The add-citation form. Start and end arrive prefilled (current position
 * and the default span) and stay editable; the type selector offers exactly
 * the three labeled options; server rejection codes land inline next to the
 * field they concern. */
export function renderAddForm(
  container: HTMLElement,
  authorId: string,
  onSubmit: (draft: CitationDraft) => void,
): AddFormHandle {
  clear(container);
  const d = doc(container);
  const form = d.createElement("form");
  form.className = "viblio-add-form";
  form.noValidate = true;

  const fieldError: Record<string, HTMLElement> = {};

  function labeledInput(name: string, label: string, type: string): HTMLInputElement {
    const row = d.createElement("label");
    row.className = "viblio-field";
    const caption = d.createElement("span");
    caption.textContent = label;
    row.appendChild(caption);
    const input = d.createElement("input");
    input.name = name;
    input.type = type;
    if (type === "number") input.step = "0.001";
    row.appendChild(input);
    const err = d.createElement("span");
    err.className = "viblio-field-error";
    err.dataset.field = name;
    row.appendChild(err);
    fieldError[name] = err;
    form.appendChild(row);
    return input;
  }

  const url = labeledInput("url", "Link to the citation", "url");
  url.placeholder = "https://";

  const typeRow = d.createElement("fieldset");
  typeRow.className = "viblio-types";
  const legend = d.createElement("legend");
  legend.textContent = "This source will";
  typeRow.appendChild(legend);
  for (const option of TYPE_OPTIONS) {
    const label = d.createElement("label");
    label.className = `viblio-type-option viblio-type-option--${TYPE_COLORS[option.value]}`;
    label.dataset.color = TYPE_COLORS[option.value];
    const radio = d.createElement("input");
    radio.type = "radio";
    radio.name = "type";
    radio.value = option.value;
    if (option.value === "support") radio.checked = true;
    label.appendChild(radio);
    label.appendChild(d.createTextNode(option.label));
    typeRow.appendChild(label);
  }
  form.appendChild(typeRow);

  const note = labeledInput("note", "Comments or notes (optional)", "text");
  const start = labeledInput("start", "Start time (seconds)", "number");
  const end = labeledInput("end", "End time (seconds)", "number");

  const formError = d.createElement("p");
  formError.className = "viblio-form-error";
  formError.dataset.field = "form";
  fieldError.form = formError;
  form.appendChild(formError);

  const submit = d.createElement("button");
  submit.type = "submit";
  submit.className = "viblio-submit";
  submit.textContent = "Add citation";
  form.appendChild(submit);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handle.clearErrors();
    const selected = form.querySelector<HTMLInputElement>("input[name=type]:checked");
    const draft: CitationDraft = {
      url: url.value.trim(),
      type: (selected?.value ?? "support") as CitationTypeWire,
      note: note.value,
      start_s: Number(start.value),
      author_id: authorId,
    };
    if (end.value.trim() !== "") draft.end_s = Number(end.value);
    onSubmit(draft);
  });

  container.appendChild(form);

  const handle: AddFormHandle = {
    form,
    setPrefill(startS: number, endS: number): void {
      start.value = String(startS);
      end.value = String(endS);
    },
    showError(code: string, detail: string): void {
      const field = fieldForErrorCode(code);
      const target = fieldError[field] ?? formError;
      target.textContent = `${code}: ${detail}`;
    },
    clearErrors(): void {
      for (const el of Object.values(fieldError)) el.textContent = "";
    },
  };
  return handle;
}
