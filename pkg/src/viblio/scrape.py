"""Fetch a cited URL and pull display metadata out of its markup.

Fetching is bounded (redirects, time, bytes) and never stores cookies.
Extraction is a pure function over the raw bytes, so the golden tests run
fully offline. A failed fetch is not an error for callers: the citation is
still storable and renders URL-only.
"""
from __future__ import annotations

import codecs
import logging
import re
import threading
from dataclasses import dataclass
from html.parser import HTMLParser
from http.cookiejar import DefaultCookiePolicy
from urllib.parse import urljoin, urlsplit

import requests

from .core import FAILED_METADATA, FetchStatus, SourceMetadata, is_absolute_http_url

log = logging.getLogger(__name__)

USER_AGENT = "viblio-citation-scraper/0.1 (fetches cited pages for display metadata)"
DEFAULT_TIMEOUT_S = 10.0
DEFAULT_MAX_BYTES = 2 * 1024 * 1024
DEFAULT_MAX_CONCURRENT = 8
MAX_REDIRECTS = 5
FIELD_MAX_CHARS = 4096
TRUNCATION_MARKER = "…"

_HTML_CONTENT_TYPES = ("text/html", "application/xhtml+xml")


class FetchError(Exception):
    """Why a document could not be fetched; kind is a stable string."""

    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail

    TIMEOUT = "Timeout"
    TOO_LARGE = "TooLarge"
    NETWORK = "NetworkError"
    NON_HTML = "NonHtmlContent"


@dataclass(frozen=True, slots=True)
class FetchedDocument:
    body: bytes
    final_url: str
    content_type: str | None


def fetch_document(
    url: str,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    max_bytes: int = DEFAULT_MAX_BYTES,
) -> FetchedDocument:
    """GET an absolute http(s) URL, following at most five redirects.

    Raises FetchError(TooLarge) once the body exceeds max_bytes rather than
    buffering further; an absent Content-Type is given the benefit of the
    doubt, a present non-HTML one is refused.
    """
    if not is_absolute_http_url(url):
        raise FetchError(FetchError.NETWORK, f"not an absolute http(s) URL: {url!r}")
    session = requests.Session()
    session.max_redirects = MAX_REDIRECTS
    session.cookies.set_policy(DefaultCookiePolicy(allowed_domains=[]))
    try:
        with session.get(
            url,
            stream=True,
            timeout=timeout_s,
            allow_redirects=True,
            headers={"User-Agent": USER_AGENT, "Accept": "text/html,application/xhtml+xml"},
        ) as response:
            content_type = response.headers.get("Content-Type")
            if content_type is not None:
                mime = content_type.split(";", 1)[0].strip().lower()
                if mime and mime not in _HTML_CONTENT_TYPES:
                    raise FetchError(
                        FetchError.NON_HTML, f"content type {mime!r} is not HTML/XHTML"
                    )
            declared = response.headers.get("Content-Length")
            if declared is not None and declared.isdigit() and int(declared) > max_bytes:
                raise FetchError(
                    FetchError.TOO_LARGE, f"declared length {declared} > cap {max_bytes}"
                )
            chunks = []
            received = 0
            for chunk in response.iter_content(chunk_size=65536):
                received += len(chunk)
                if received > max_bytes:
                    raise FetchError(
                        FetchError.TOO_LARGE, f"body exceeds cap of {max_bytes} bytes"
                    )
                chunks.append(chunk)
            return FetchedDocument(b"".join(chunks), response.url, content_type)
    except requests.Timeout as exc:
        raise FetchError(FetchError.TIMEOUT, str(exc)) from exc
    except requests.TooManyRedirects as exc:
        raise FetchError(
            FetchError.NETWORK, f"more than {MAX_REDIRECTS} redirects"
        ) from exc
    except requests.RequestException as exc:
        raise FetchError(FetchError.NETWORK, str(exc)) from exc
    finally:
        session.close()


class _MetaCollector(HTMLParser):
    """Lenient one-pass collector of <meta> key/content pairs and <title> text.

    Both property= and name= spellings are accepted for every key because
    real pages mix them freely; the first occurrence of a key wins.
    """

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.meta: dict[str, str] = {}
        self.title_parts: list[str] = []
        self._title_done = False
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        if tag == "meta":
            attrs = dict(attrs)
            key = attrs.get("property") or attrs.get("name")
            content = attrs.get("content")
            if key and content is not None:
                key = key.strip().lower()
                if key and key not in self.meta:
                    self.meta[key] = content
        elif tag == "title" and not self._title_done:
            self._in_title = True

    def handle_endtag(self, tag):
        if tag == "title" and self._in_title:
            self._in_title = False
            self._title_done = True

    def handle_data(self, data):
        if self._in_title:
            self.title_parts.append(data)

    @property
    def title_text(self) -> str | None:
        if not self.title_parts:
            return None
        return "".join(self.title_parts)


_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?([A-Za-z0-9_][A-Za-z0-9_\-.:]*)""",
    re.IGNORECASE,
)

# Multi-label public suffixes common enough to matter for the domain fallback.
_MULTI_LABEL_SUFFIXES = frozenset(
    [
        "co.uk", "org.uk", "ac.uk", "gov.uk", "net.uk", "me.uk",
        "com.au", "net.au", "org.au", "edu.au", "gov.au",
        "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp",
        "com.br", "com.mx", "com.ar", "com.cn", "com.tw", "com.hk", "com.sg",
        "co.in", "co.nz", "co.za", "co.kr",
    ]
)


def registrable_domain(host: str) -> str:
    """Approximate registrable domain: the last two labels, or three when the
    trailing pair is a known multi-label public suffix (co.uk and friends)."""
    host = host.strip().lower().rstrip(".")
    labels = host.split(".")
    if len(labels) <= 2 or all(part.isdigit() for part in labels):
        return host
    if ".".join(labels[-2:]) in _MULTI_LABEL_SUFFIXES:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def _decode(document: bytes) -> str:
    """Honor a BOM or a declared meta charset; otherwise UTF-8, lossily."""
    if document.startswith(codecs.BOM_UTF8):
        return document.decode("utf-8-sig", errors="replace")
    if document.startswith((codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE)):
        return document.decode("utf-16", errors="replace")
    m = _CHARSET_RE.search(document[:2048])
    if m:
        try:
            encoding = codecs.lookup(m.group(1).decode("ascii")).name
            return document.decode(encoding, errors="replace")
        except (LookupError, UnicodeDecodeError):
            pass
    return document.decode("utf-8", errors="replace")


def _clean(value: str | None) -> str | None:
    """Collapse whitespace runs and enforce the output length cap."""
    if value is None:
        return None
    collapsed = " ".join(value.split())
    if not collapsed:
        return None
    if len(collapsed) > FIELD_MAX_CHARS:
        collapsed = collapsed[: FIELD_MAX_CHARS - 1] + TRUNCATION_MARKER
    return collapsed


def extract_metadata(document: bytes, page_url: str) -> SourceMetadata:
    """Pull title/author/source/description/cover image out of the markup.

    Pure over its inputs and never raises on malformed markup. Field priority:
    Open Graph, then Twitter card, then generic HTML; the source falls back to
    the page's registrable domain. Status is fetched only when a title was found.
    """
    collector = _MetaCollector()
    try:
        collector.feed(_decode(document))
        collector.close()
    except Exception:  # html.parser is lenient; belt and suspenders
        log.warning("metadata parse aborted for %s", page_url, exc_info=True)
    meta = collector.meta

    def first(*keys: str) -> str | None:
        for key in keys:
            value = meta.get(key)
            if value is not None and value.strip():
                return value
        return None

    title = _clean(first("og:title", "twitter:title") or collector.title_text)
    description = _clean(first("og:description", "description", "twitter:description"))
    author = _clean(first("author", "article:author"))

    cover = first("og:image", "twitter:image")
    cover_url = None
    if cover is not None:
        resolved = urljoin(page_url, cover.strip())
        if is_absolute_http_url(resolved):
            cover_url = _clean(resolved)

    source = _clean(first("og:site_name"))
    if source is None:
        host = urlsplit(page_url).hostname
        if host:
            source = _clean(registrable_domain(host))

    status = FetchStatus.FETCHED if title is not None else FetchStatus.DEGRADED
    return SourceMetadata(
        title=title,
        author=author,
        source=source,
        description=description,
        cover_image_url=cover_url,
        fetch_status=status,
    )


class Scraper:
    """Scrape pipeline with a bound on concurrent fetches.

    scrape() never raises: fetch failures come back as a failed
    SourceMetadata so the citation can still be stored.
    """

    def __init__(
        self,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_bytes: int = DEFAULT_MAX_BYTES,
        max_concurrent: int = DEFAULT_MAX_CONCURRENT,
    ):
        self.timeout_s = timeout_s
        self.max_bytes = max_bytes
        self._slots = threading.BoundedSemaphore(max_concurrent)

    def scrape(self, url: str) -> SourceMetadata:
        with self._slots:
            try:
                doc = fetch_document(url, self.timeout_s, self.max_bytes)
            except FetchError as exc:
                log.info("scrape failed for %s: %s", url, exc)
                return FAILED_METADATA
        return extract_metadata(doc.body, doc.final_url)


def scrape(
    url: str,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    max_bytes: int = DEFAULT_MAX_BYTES,
) -> SourceMetadata:
    """One-shot fetch+extract; failures yield metadata with status failed."""
    try:
        doc = fetch_document(url, timeout_s, max_bytes)
    except FetchError as exc:
        log.info("scrape failed for %s: %s", url, exc)
        return FAILED_METADATA
    return extract_metadata(doc.body, doc.final_url)
