"""Crossref harvesting: updated-DOI windows, works lookups and update-to edges."""

from __future__ import annotations

import datetime as _dt
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional
from urllib.parse import quote

from .config import PatternConfig, default_config
from .http import HttpClient, MalformedResponse, NotFound
from .model import (
    METADATA,
    Doi,
    InvalidRecord,
    MalformedDoi,
    NoticeLink,
    NoticeType,
    PartialDate,
    PublicationRecord,
    SourceTag,
    normalize_doi,
)
from .titles import classify_title

log = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.crossref.org"

UPDATE_TYPES = {
    "erratum": NoticeType.ERRATUM,
    "correction": NoticeType.CORRECTION,
    "corrigendum": NoticeType.CORRECTION,
    "expression_of_concern": NoticeType.EXPRESSION_OF_CONCERN,
    "retraction": NoticeType.RETRACTION,
    "partial_retraction": NoticeType.RETRACTION,
    "withdrawal": NoticeType.WITHDRAWAL,
    "removal": NoticeType.REMOVAL,
    "addendum": NoticeType.ADDENDUM,
    "clarification": NoticeType.CLARIFICATION,
    "comment": NoticeType.COMMENT,
}
# version chains rather than notices
IGNORED_UPDATE_TYPES = frozenset({"new_edition", "new_version"})

_DATE_FIELDS = ("published", "published-print", "published-online", "issued", "created")


def map_update_type(raw: str) -> Optional[NoticeType]:
    """Notice type for a Crossref update type, or None for version updates."""
    key = raw.strip().lower().replace("-", "_").replace(" ", "_")
    if key in IGNORED_UPDATE_TYPES:
        return None
    kind = UPDATE_TYPES.get(key)
    if kind is None:
        log.warning("unknown Crossref update type %r", raw)
        return NoticeType.UNKNOWN
    return kind


@dataclass(frozen=True)
class UpdateToRecord:
    notice_doi: Doi
    target_doi: Doi
    update_type: str
    updated_date: Optional[PartialDate] = None


def _date_from(obj) -> Optional[PartialDate]:
    if not isinstance(obj, dict):
        return None
    parts = obj.get("date-parts")
    if not parts or not isinstance(parts, list) or not isinstance(parts[0], list):
        return None
    try:
        return PartialDate.from_parts(parts[0])
    except (TypeError, ValueError):
        return None


def parse_update_to(work: dict) -> list:
    """One record per well-formed ``update-to`` entry of a works document."""
    if "message" in work and isinstance(work["message"], dict):
        work = work["message"]
    try:
        notice = normalize_doi(work.get("DOI"))
    except MalformedDoi:
        log.warning("work without a usable DOI: %r", work.get("DOI"))
        return []
    out = []
    for entry in work.get("update-to") or []:
        if not isinstance(entry, dict):
            continue
        try:
            target = normalize_doi(entry.get("DOI"))
        except MalformedDoi:
            log.warning("%s: dropping update-to with bad DOI %r", notice, entry.get("DOI"))
            continue
        kind = (entry.get("type") or "").strip()
        if not kind:
            log.warning("%s: dropping update-to without a type", notice)
            continue
        out.append(UpdateToRecord(notice, target, kind, _date_from(entry.get("updated"))))
    return out


def work_to_record(work: dict) -> PublicationRecord:
    if "message" in work and isinstance(work["message"], dict):
        work = work["message"]
    title = work.get("title") or ""
    if isinstance(title, list):
        title = title[0] if title else ""
    date = None
    for name in _DATE_FIELDS:
        date = _date_from(work.get(name))
        if date is not None:
            break
    return PublicationRecord(normalize_doi(work.get("DOI")), title, date)


AMBIGUOUS = None


def orient_pair(a: PublicationRecord, b: PublicationRecord, config: Optional[PatternConfig] = None):
    """Decide which of two mutually-updating records is the notice.

    Returns ``(notice, target)`` or ``AMBIGUOUS``. A record whose title carries
    a notice marker wins; otherwise the strictly later one is the notice.
    """
    config = config or default_config()
    a_marked = classify_title(a.title, config).is_notice
    b_marked = classify_title(b.title, config).is_notice
    if a_marked != b_marked:
        return (a, b) if a_marked else (b, a)
    if a.published_date is not None and b.published_date is not None:
        c = a.published_date.compare(b.published_date)
        if c > 0:
            return a, b
        if c < 0:
            return b, a
    return AMBIGUOUS


def _as_date(d) -> str:
    if isinstance(d, (_dt.date, _dt.datetime)):
        return d.strftime("%Y-%m-%d")
    return str(d)


class CrossrefClient:
    def __init__(self, base_url: str = DEFAULT_BASE_URL, mailto: Optional[str] = None,
                 rate: float = 5.0, rows: int = 1000, http: Optional[HttpClient] = None):
        self.base_url = base_url.rstrip("/")
        self.mailto = mailto if mailto is not None else os.environ.get("NOTICES_CONTACT_EMAIL")
        self.rows = rows
        agent = "noticedetect/0.1" + (f" (mailto:{self.mailto})" if self.mailto else "")
        self.http = http or HttpClient(rate=rate, user_agent=agent)

    def _params(self, **extra) -> dict:
        if self.mailto:
            extra["mailto"] = self.mailto
        return extra

    def iter_update_pages(self, from_date, until_date, cursor: Optional[str] = None) -> Iterator[tuple]:
        """Yield ``(dois, next_cursor)`` per page; ``next_cursor`` is None on the last page."""
        if _as_date(from_date) > _as_date(until_date):
            raise ValueError("from_date is after until_date")
        cursor = cursor or "*"
        filt = f"from-update-date:{_as_date(from_date)},until-update-date:{_as_date(until_date)}"
        while True:
            data = self.http.get_json(
                f"{self.base_url}/works",
                self._params(filter=filt, select="DOI", cursor=cursor, rows=self.rows),
            )
            try:
                message = data["message"]
                items = message["items"]
            except (KeyError, TypeError) as exc:
                raise MalformedResponse(f"works listing without message/items: {exc}") from exc
            dois = []
            for item in items:
                try:
                    dois.append(normalize_doi(item.get("DOI")))
                except MalformedDoi:
                    log.warning("skipping malformed DOI %r", item.get("DOI"))
            nxt = message.get("next-cursor")
            last = not items or not nxt or nxt == cursor
            yield dois, (None if last else nxt)
            if last:
                return
            cursor = nxt

    def fetch_updated_dois(self, from_date, until_date, cursor: Optional[str] = None) -> Iterator[Doi]:
        for dois, _ in self.iter_update_pages(from_date, until_date, cursor):
            yield from dois

    def fetch_work(self, doi) -> dict:
        doi = normalize_doi(doi)
        data = self.http.get_json(f"{self.base_url}/works/{quote(doi.value, safe='/')}", self._params())
        if not isinstance(data, dict) or not isinstance(data.get("message"), dict):
            raise MalformedResponse(f"works/{doi}: no message object")
        work = data["message"]
        work.setdefault("update-to", [])
        return work


class CrossrefSnapshot:
    """Directory of JSONL files, one works document per line, standing in for the API.

    Every work in the snapshot counts as updated, whatever the window.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._works = {}
        files = [self.path] if self.path.is_file() else sorted(self.path.glob("*.jsonl"))
        for f in files:
            with f.open(encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    work = json.loads(line)
                    if "message" in work and isinstance(work["message"], dict):
                        work = work["message"]
                    try:
                        self._works[normalize_doi(work.get("DOI")).value] = work
                    except MalformedDoi:
                        log.warning("%s: skipping work with bad DOI %r", f, work.get("DOI"))

    def iter_update_pages(self, from_date, until_date, cursor=None):
        if _as_date(from_date) > _as_date(until_date):
            raise ValueError("from_date is after until_date")
        yield [Doi(d) for d in sorted(self._works)], None

    def fetch_updated_dois(self, from_date, until_date, cursor=None):
        for dois, _ in self.iter_update_pages(from_date, until_date, cursor):
            yield from dois

    def fetch_work(self, doi) -> dict:
        doi = normalize_doi(doi)
        try:
            work = dict(self._works[doi.value])
        except KeyError:
            raise NotFound(doi.value) from None
        work.setdefault("update-to", [])
        return work


@dataclass
class IngestReport:
    fetched: int = 0
    links: int = 0
    ambiguous: int = 0
    side_table: int = 0
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "fetched": self.fetched,
            "links": self.links,
            "ambiguous": self.ambiguous,
            "side_table": self.side_table,
            "failures": len(self.failures),
        }


def _safe(fn, arg):
    try:
        return fn(arg), None
    except Exception as exc:  # reported per item, the run goes on
        return None, exc


def ingest_crossref(source, store, from_date, until_date, config: Optional[PatternConfig] = None,
                    workers: int = 4) -> IngestReport:
    """Harvest a window of updated works into ``store`` and record their update-to edges."""
    config = config or default_config()
    report = IngestReport()
    cursor_key = f"crossref:{_as_date(from_date)}:{_as_date(until_date)}"

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for dois, nxt in source.iter_update_pages(from_date, until_date, store.get_cursor(cursor_key)):
            for doi, (work, exc) in zip(dois, pool.map(lambda d: _safe(source.fetch_work, d), dois)):
                if exc is not None:
                    log.error("%s: %s", doi, exc)
                    report.failures.append((doi.value, repr(exc)))
                    continue
                report.fetched += 1
                _ingest_work(work, store, report)
            # a crash after this point resumes from the next page
            store.set_cursor(cursor_key, nxt)
            store.save()

    report.ambiguous = _orient_circular(store, config)
    for link in store.iter_links():
        if SourceTag.CROSSREF in link.sources and link.target_doi is not None:
            store.mark_known_notice(link.notice_doi)
    store.save()
    return report


def _ingest_work(work: dict, store, report: IngestReport):
    try:
        rec = work_to_record(work)
    except (MalformedDoi, InvalidRecord) as err:
        report.failures.append((str(work.get("DOI")), repr(err)))
        return
    old = store.get_publication(rec.doi)
    if old is not None and old.is_known_notice:
        rec = PublicationRecord(rec.doi, rec.title, rec.published_date, True)
    store.upsert_publication(rec)
    for upd in parse_update_to(work):
        kind = map_update_type(upd.update_type)
        if kind is None or upd.notice_doi == upd.target_doi:
            continue
        link = NoticeLink(upd.notice_doi, upd.target_doi, kind, upd.updated_date,
                          frozenset({SourceTag.CROSSREF}), METADATA)
        try:
            store.record_notice_link(link)
        except InvalidRecord as exc:
            log.error("%s", exc)
            report.failures.append((upd.notice_doi.value, repr(exc)))
            continue
        report.links += 1


def _orient_circular(store, config: PatternConfig) -> int:
    """Keep one direction of every A->B / B->A pair of Crossref edges.

    Returns the number of pairs that could not be oriented; both of their
    Crossref edges are withdrawn.
    """
    edges = {
        l.key for l in store.iter_links()
        if SourceTag.CROSSREF in l.sources and l.target_doi is not None and not l.is_drop_in
    }
    ambiguous = 0
    for n, t in sorted(edges):
        if n > t or (t, n) not in edges:
            continue
        a, b = store.get_publication(Doi(n)), store.get_publication(Doi(t))
        oriented = orient_pair(a, b, config) if a is not None and b is not None else AMBIGUOUS
        if oriented is AMBIGUOUS:
            log.warning("circular update-to between %s and %s left unresolved", n, t)
            ambiguous += 1
            losers = [(n, t), (t, n)]
        else:
            notice, target = oriented
            losers = [(target.doi.value, notice.doi.value)]
        for ln, lt in losers:
            store.drop_source(Doi(ln), Doi(lt), SourceTag.CROSSREF)
    return ambiguous
