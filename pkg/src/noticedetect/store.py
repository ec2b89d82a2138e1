"""Embedded file-backed store.

Each table is kept in memory and persisted as one JSONL file under the store
root. The title index is rebuilt from the publications table on load.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import os
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .merge import reconcile_type
from .model import (
    DETECTION_METHODS,
    DROP_IN_REPLACEMENT,
    METADATA,
    Doi,
    InvalidRecord,
    NoticeLink,
    NoticeType,
    PublicationRecord,
    SourceTag,
    earliest,
    normalize_doi,
)

log = logging.getLogger(__name__)

DEFAULT_DB_PATH = "notices-db"

PUBLICATIONS = "publications.jsonl"
LINKS = "links.jsonl"
PENDING = "pending.jsonl"
GENERIC = "generic.jsonl"
PMID_DOI = "pmid_doi.jsonl"
PMID_ONLY = "pmid_only_links.jsonl"
CURSORS = "cursors.json"


class StorageFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class PendingMatch:
    notice_doi: Doi
    candidate_title: str
    matched_dois: tuple
    recorded_at: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def __post_init__(self):
        dois = tuple(sorted(normalize_doi(d) for d in self.matched_dois))
        object.__setattr__(self, "matched_dois", dois)
        if len(set(dois)) < 2:
            raise InvalidRecord("a pending match needs at least two candidates")
        if self.notice_doi in dois:
            raise InvalidRecord("a notice cannot be its own candidate")

    def to_json(self) -> dict:
        return {
            "notice_doi": self.notice_doi.value,
            "candidate_title": self.candidate_title,
            "matched_dois": [d.value for d in self.matched_dois],
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_json(cls, row) -> "PendingMatch":
        return cls(
            normalize_doi(row["notice_doi"]),
            row["candidate_title"],
            tuple(row["matched_dois"]),
            row.get("recorded_at") or "",
        )


def _method_rank(method: str) -> int:
    return DETECTION_METHODS.index(method)


def _combine(old: NoticeLink, new: NoticeLink) -> NoticeLink:
    types = dict(old.source_types)
    types.update(dict(new.source_types))
    method = min(old.detection_method, new.detection_method, key=_method_rank)
    if old.notice_date and new.notice_date and old.notice_date.compare(new.notice_date) != 0:
        log.debug("date disagreement on %s: %s vs %s", old.key, old.notice_date, new.notice_date)
    return NoticeLink(
        old.notice_doi,
        old.target_doi,
        reconcile_type(types),
        earliest(old.notice_date, new.notice_date),
        old.sources | new.sources,
        method,
        tuple(types.items()),
    )


class MetadataStore:
    """Publications, notice links and side tables, optionally backed by a directory.

    One writer at a time (guarded by a lock); reads take the same lock so they
    never see a half-applied write. ``root=None`` gives a purely in-memory store.
    """

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else None
        self._lock = threading.RLock()
        self._pubs = {}
        self._title_index = defaultdict(set)
        self._links = {}
        self._pending = {}
        self._generic = {}
        self._pmid_doi = {}
        self._pmid_only = {}
        self._cursors = {}
        if self.root is not None:
            self._load()

    @classmethod
    def from_env(cls, path=None) -> "MetadataStore":
        return cls(path or os.environ.get("NOTICES_DB_PATH") or DEFAULT_DB_PATH)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            self.save()

    # -- persistence ---------------------------------------------------------

    def _rows(self, name: str) -> Iterator[dict]:
        path = self.root / name
        if not path.exists():
            return
        try:
            with path.open(encoding="utf-8") as fh:
                for n, line in enumerate(fh, 1):
                    if line.strip():
                        yield json.loads(line)
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"{path}: {exc}") from exc

    def _load(self):
        for row in self._rows(PUBLICATIONS):
            self._put_pub(PublicationRecord.from_json(row))
        for row in self._rows(LINKS):
            link = NoticeLink.from_json(row)
            self._links[link.key] = link
        for row in self._rows(PENDING):
            p = PendingMatch.from_json(row)
            self._pending[p.notice_doi.value] = p
        for row in self._rows(GENERIC):
            self._generic[row["doi"]] = row
        for row in self._rows(PMID_DOI):
            self._pmid_doi[int(row["pmid"])] = row.get("doi")
        for row in self._rows(PMID_ONLY):
            self._pmid_only[(int(row["pmid"]), int(row["notice_pmid"]))] = row
        cursor_file = self.root / CURSORS
        if cursor_file.exists():
            try:
                self._cursors = json.loads(cursor_file.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise StorageFailure(f"{cursor_file}: {exc}") from exc

    def _write(self, name: str, rows: Iterable[dict]):
        path = self.root / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            with tmp.open("w", encoding="utf-8", newline="\n") as fh:
                for row in rows:
                    fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
                    fh.write("\n")
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"{path}: {exc}") from exc

    def save(self):
        if self.root is None:
            return
        with self._lock:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc
            self._write(PUBLICATIONS, (self._pubs[k].to_json() for k in sorted(self._pubs)))
            self._write(LINKS, (l.to_json() for l in self._sorted_links()))
            self._write(PENDING, (self._pending[k].to_json() for k in sorted(self._pending)))
            self._write(GENERIC, (self._generic[k] for k in sorted(self._generic)))
            self._write(
                PMID_DOI,
                ({"pmid": k, "doi": self._pmid_doi[k]} for k in sorted(self._pmid_doi)),
            )
            self._write(PMID_ONLY, (self._pmid_only[k] for k in sorted(self._pmid_only)))
            try:
                (self.root / CURSORS).write_text(json.dumps(self._cursors, sort_keys=True), encoding="utf-8")
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc

    # -- publications --------------------------------------------------------

    def _put_pub(self, rec: PublicationRecord):
        old = self._pubs.get(rec.doi.value)
        if old is not None:
            bucket = self._title_index.get(old.normalized_title)
            if bucket is not None:
                bucket.discard(rec.doi.value)
                if not bucket:
                    del self._title_index[old.normalized_title]
        self._pubs[rec.doi.value] = rec
        self._title_index[rec.normalized_title].add(rec.doi.value)

    def upsert_publication(self, rec: PublicationRecord):
        with self._lock:
            self._put_pub(rec)

    def mark_known_notice(self, doi: Doi):
        with self._lock:
            rec = self._pubs.get(doi.value)
            if rec is not None and not rec.is_known_notice:
                self._put_pub(PublicationRecord(rec.doi, rec.title, rec.published_date, True))

    def get_publication(self, doi) -> Optional[PublicationRecord]:
        with self._lock:
            return self._pubs.get(normalize_doi(doi).value)

    def iter_publications(self) -> list:
        with self._lock:
            return [self._pubs[k] for k in sorted(self._pubs)]

    def __len__(self):
        return len(self._pubs)

    def find_by_exact_title(self, normalized_title: str) -> list:
        with self._lock:
            return [Doi(d) for d in sorted(self._title_index.get(normalized_title, ()))]

    # -- links ---------------------------------------------------------------

    def record_notice_link(self, link: NoticeLink):
        with self._lock:
            old = self._links.get(link.key)
            self._links[link.key] = link if old is None else _combine(old, link)

    def replace_link(self, link: NoticeLink):
        with self._lock:
            self._links[link.key] = link

    def delete_link(self, notice_doi: Doi, target_doi: Optional[Doi]):
        with self._lock:
            self._links.pop((notice_doi.value, target_doi.value if target_doi else None), None)

    def get_link(self, notice_doi: Doi, target_doi: Optional[Doi]) -> Optional[NoticeLink]:
        with self._lock:
            return self._links.get((notice_doi.value, target_doi.value if target_doi else None))

    def _sorted_links(self) -> list:
        return sorted(self._links.values(), key=lambda l: (l.target_doi.value if l.target_doi else "", l.notice_doi.value))

    def iter_links(self) -> list:
        with self._lock:
            return self._sorted_links()

    def list_notices(self, notice_type=None, source=None, date_range=None) -> list:
        """Links ordered by (target, notice), optionally filtered.

        ``date_range`` is an inclusive ``(start, end)`` pair of partial dates;
        either end may be None. Links without a date never match a date filter.
        """
        kind = NoticeType(notice_type) if notice_type is not None else None
        src = SourceTag(source) if source is not None else None
        out = []
        for link in self.iter_links():
            if kind is not None and link.notice_type is not kind:
                continue
            if src is not None and src not in link.sources:
                continue
            if date_range is not None:
                start, end = date_range
                d = link.notice_date
                if d is None:
                    continue
                if start is not None and d.compare(start) < 0:
                    continue
                if end is not None and d.compare(end) > 0:
                    continue
            out.append(link)
        return out

    def clear_source(self, source: SourceTag):
        """Withdraw everything a source contributed to the links table."""
        with self._lock:
            for key in list(self._links):
                self._drop_source(key, source)

    def drop_source(self, notice_doi: Doi, target_doi: Optional[Doi], source: SourceTag):
        """Withdraw one source's contribution to a single link."""
        with self._lock:
            self._drop_source((notice_doi.value, target_doi.value if target_doi else None), source)

    def _drop_source(self, key, source: SourceTag):
        link = self._links.get(key)
        if link is None or source not in link.sources:
            return
        rest = link.sources - {source}
        if not rest:
            del self._links[key]
            return
        types = tuple((s, t) for s, t in link.source_types if s != source)
        method = link.detection_method
        if source is SourceTag.TITLE_DETECTION:
            method = DROP_IN_REPLACEMENT if link.is_drop_in else METADATA
        self._links[key] = NoticeLink(
            link.notice_doi, link.target_doi, reconcile_type(types),
            link.notice_date, rest, method, types,
        )

    # -- side tables ---------------------------------------------------------

    def record_pending(self, p: PendingMatch):
        with self._lock:
            old = self._pending.get(p.notice_doi.value)
            if old is not None and old.matched_dois == p.matched_dois and old.candidate_title == p.candidate_title:
                return  # keep the original timestamp
            self._pending[p.notice_doi.value] = p

    def list_pending(self) -> list:
        with self._lock:
            return [self._pending[k] for k in sorted(self._pending)]

    def record_generic(self, doi: Doi, title: str, notice_type: NoticeType):
        with self._lock:
            self._generic[doi.value] = {"doi": doi.value, "title": title, "notice_type": notice_type.value}

    def list_generic(self) -> list:
        with self._lock:
            return [self._generic[k] for k in sorted(self._generic)]

    def replace_detection_side_tables(self, pending: Iterable[PendingMatch], generic: Iterable[tuple]):
        """Swap in a fresh detection run's pending and generic rows.

        Pending rows identical to an existing one keep their first timestamp.
        """
        with self._lock:
            old = self._pending
            self._pending = {}
            self._generic = {}
            for p in pending:
                self._pending[p.notice_doi.value] = p
                prev = old.get(p.notice_doi.value)
                if prev is not None and prev.matched_dois == p.matched_dois and prev.candidate_title == p.candidate_title:
                    self._pending[p.notice_doi.value] = prev
            for doi, title, kind in generic:
                self.record_generic(doi, title, kind)

    def cached_pmid_doi(self, pmid: int):
        """(hit, doi) where doi may be None for a cached miss."""
        with self._lock:
            if pmid in self._pmid_doi:
                d = self._pmid_doi[pmid]
                return True, (Doi(d) if d else None)
            return False, None

    def cache_pmid_doi(self, pmid: int, doi: Optional[Doi]):
        with self._lock:
            self._pmid_doi[int(pmid)] = doi.value if doi else None

    def record_pmid_only(self, pmid: int, notice_pmid: int, notice_type: NoticeType, doi=None, notice_doi=None):
        with self._lock:
            self._pmid_only[(int(pmid), int(notice_pmid))] = {
                "pmid": int(pmid),
                "notice_pmid": int(notice_pmid),
                "notice_type": notice_type.value,
                "doi": doi.value if doi else None,
                "notice_doi": notice_doi.value if notice_doi else None,
            }

    def list_pmid_only(self) -> list:
        with self._lock:
            return [self._pmid_only[k] for k in sorted(self._pmid_only)]

    def get_cursor(self, name: str) -> Optional[str]:
        with self._lock:
            return self._cursors.get(name)

    def set_cursor(self, name: str, token: Optional[str]):
        with self._lock:
            if token is None:
                self._cursors.pop(name, None)
            else:
                self._cursors[name] = token

    # -- whitelist / blacklist passthroughs ---------------------------------

    @staticmethod
    def is_whitelisted(doi, config) -> bool:
        return config.is_whitelisted(doi)

    @staticmethod
    def is_blacklisted_title(normalized_title: str, config) -> bool:
        return config.is_blacklisted_title(normalized_title)
