"""PubMed harvesting through Eutils: notice searches, notice references and PMID to DOI mapping."""

from __future__ import annotations

import json
import logging
import os
import threading
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .config import default_pubmed_terms
from .crossref import IngestReport
from .http import HttpClient, MalformedResponse, NotFound
from .model import (
    DROP_IN_REPLACEMENT,
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

log = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils"

REF_TYPES = {
    "ErratumIn": NoticeType.ERRATUM,
    "RetractionIn": NoticeType.RETRACTION,
    "ExpressionOfConcernIn": NoticeType.EXPRESSION_OF_CONCERN,
    "CorrectedandRepublishedIn": NoticeType.CORRECTED_AND_REPUBLISHED,
    "RetractedandRepublishedIn": NoticeType.RETRACTED_AND_REPUBLISHED,
    "CommentIn": NoticeType.COMMENT,
}
RETRACTED_PUBLICATION = "Retracted Publication"
MONTHS = {m: i for i, m in enumerate(
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"], 1)}


@dataclass(frozen=True)
class PmidMapping:
    pmid: int
    doi: Optional[Doi] = None

    def __post_init__(self):
        if self.pmid <= 0:
            raise ValueError(f"bad PMID {self.pmid}")


@dataclass(frozen=True)
class PubmedRecord:
    pmid: int
    doi: Optional[Doi]
    title: str
    published_date: Optional[PartialDate]
    publication_types: tuple
    notices: tuple  # (notice pmid, NoticeType) in document order

    @property
    def is_retracted_publication(self) -> bool:
        return RETRACTED_PUBLICATION in self.publication_types


def _month(text: Optional[str]) -> Optional[int]:
    if not text:
        return None
    text = text.strip()
    if text.isdigit():
        return int(text)
    return MONTHS.get(text[:3].lower())


def _date(node) -> Optional[PartialDate]:
    if node is None:
        return None
    year = node.findtext("Year")
    if not year:
        medline = node.findtext("MedlineDate") or ""
        year = medline[:4] if medline[:4].isdigit() else None
        if not year:
            return None
        return PartialDate(int(year))
    month = _month(node.findtext("Month") or node.findtext("Season"))
    day = node.findtext("Day")
    try:
        if month is None:
            return PartialDate(int(year))
        if day and day.strip().isdigit():
            return PartialDate(int(year), month, int(day))
        return PartialDate(int(year), month)
    except ValueError:
        return PartialDate(int(year))


def _parse_article(art) -> PubmedRecord:
    mc = art.find("MedlineCitation")
    if mc is None or not (mc.findtext("PMID") or "").strip().isdigit():
        raise MalformedResponse("PubmedArticle without MedlineCitation/PMID")
    pmid = int(mc.findtext("PMID"))
    article = mc.find("Article")
    title = ""
    date = None
    ptypes = ()
    doi = None
    if article is not None:
        t = article.find("ArticleTitle")
        title = "".join(t.itertext()).strip() if t is not None else ""
        date = _date(article.find("ArticleDate")) or _date(article.find("Journal/JournalIssue/PubDate"))
        ptypes = tuple((p.text or "").strip() for p in article.findall("PublicationTypeList/PublicationType"))
        for loc in article.findall("ELocationID"):
            if loc.get("EIdType") == "doi" and loc.text:
                doi = _doi_or_none(loc.text)
    for aid in art.findall("PubmedData/ArticleIdList/ArticleId"):
        if aid.get("IdType") == "doi" and aid.text:
            doi = _doi_or_none(aid.text) or doi
            break
    notices = []
    for cc in mc.findall("CommentsCorrectionsList/CommentsCorrections"):
        kind = REF_TYPES.get(cc.get("RefType", ""))
        ref = (cc.findtext("PMID") or "").strip()
        if kind is not None and ref.isdigit():
            notices.append((int(ref), kind))
    return PubmedRecord(pmid, doi, title, date, ptypes, tuple(notices))


def _doi_or_none(text: str) -> Optional[Doi]:
    try:
        return normalize_doi(text)
    except MalformedDoi:
        log.warning("ignoring malformed DOI %r", text)
        return None


def parse_pubmed_xml(text) -> list:
    """Parse an efetch ``PubmedArticleSet`` into records."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedResponse(f"efetch XML: {exc}") from exc
    return [_parse_article(a) for a in root.iter("PubmedArticle")]


def term_query(term: str) -> str:
    # terms are kept in URL form ("retracted+publication[...]")
    return term.replace("+", " ")


class _RecordSource:
    """Shared notice/DOI helpers on top of ``fetch_record``."""

    def fetch_record(self, pmid: int) -> PubmedRecord:
        raise NotImplementedError

    def efetch_notices(self, pmid: int) -> list:
        return list(self.fetch_record(pmid).notices)

    def map_pmid_to_doi(self, pmid: int, store=None) -> Optional[Doi]:
        """DOI from the record's own article-id fields, cached in ``store``."""
        if store is not None:
            hit, doi = store.cached_pmid_doi(pmid)
            if hit:
                return doi
        rec = self.fetch_record(pmid)
        if store is not None:
            store.cache_pmid_doi(pmid, rec.doi)
        return rec.doi


class PubmedClient(_RecordSource):
    def __init__(self, base_url: str = DEFAULT_BASE_URL, api_key: Optional[str] = None,
                 rate: Optional[float] = None, http: Optional[HttpClient] = None):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("NOTICES_EUTILS_API_KEY")
        if rate is None:
            rate = 10.0 if self.api_key else 3.0
        self.http = http or HttpClient(rate=rate)
        self._cache = {}
        self._cache_lock = threading.Lock()

    def _params(self, **extra) -> dict:
        if self.api_key:
            extra["api_key"] = self.api_key
        return extra

    def esearch(self, term: str, batch_size: int = 1000) -> Iterator[int]:
        if not 1 <= batch_size <= 10000:
            raise ValueError("batch_size must be in [1, 10000]")
        retstart = 0
        while True:
            data = self.http.get_json(
                f"{self.base_url}/esearch.fcgi",
                self._params(db="pubmed", term=term_query(term), retmode="json",
                             retmax=batch_size, retstart=retstart),
            )
            try:
                result = data["esearchresult"]
                count = int(result["count"])
                ids = [int(x) for x in result["idlist"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponse(f"esearch {term!r}: {exc}") from exc
            yield from ids
            retstart += batch_size
            if not ids or retstart >= count:
                return

    def fetch_record(self, pmid: int) -> PubmedRecord:
        pmid = int(pmid)
        with self._cache_lock:
            if pmid in self._cache:
                return self._cache[pmid]
        resp = self.http.get(
            f"{self.base_url}/efetch.fcgi", self._params(db="pubmed", id=pmid, retmode="xml")
        )
        records = [r for r in parse_pubmed_xml(resp.content) if r.pmid == pmid]
        if not records:
            raise NotFound(f"PMID {pmid}")
        with self._cache_lock:
            self._cache[pmid] = records[0]
        return records[0]


class PubmedSnapshot(_RecordSource):
    """Offline stand-in: ``esearch.json`` ({term: [pmid, ...]}) plus efetch XML files."""

    def __init__(self, path):
        self.path = Path(path)
        search = self.path / "esearch.json"
        self._search = json.loads(search.read_text(encoding="utf-8")) if search.exists() else {}
        self._records = {}
        for f in sorted(self.path.glob("*.xml")):
            for rec in parse_pubmed_xml(f.read_bytes()):
                self._records[rec.pmid] = rec

    def esearch(self, term: str, batch_size: int = 1000) -> Iterator[int]:
        if not 1 <= batch_size <= 10000:
            raise ValueError("batch_size must be in [1, 10000]")
        ids = self._search.get(term)
        if ids is None:
            ids = self._search.get(term_query(term), [])
        for x in ids:
            yield int(x)

    def fetch_record(self, pmid: int) -> PubmedRecord:
        try:
            return self._records[int(pmid)]
        except KeyError:
            raise NotFound(f"PMID {pmid}") from None


def _upsert_if_absent(store, rec: PubmedRecord, known_notice: bool = False):
    if rec.doi is None:
        return
    old = store.get_publication(rec.doi)
    if old is None:
        try:
            store.upsert_publication(PublicationRecord(rec.doi, rec.title, rec.published_date, known_notice))
        except InvalidRecord as exc:
            log.warning("%s", exc)
    elif known_notice:
        store.mark_known_notice(rec.doi)


def build_pubmed_links(source, store, terms: Optional[Iterable[str]] = None,
                       batch_size: int = 1000, workers: int = 4) -> IngestReport:
    """Search every notice term, fetch the hits and store one link per mapped notice."""
    report = IngestReport()
    terms = list(terms) if terms is not None else default_pubmed_terms()
    pmids = {}
    for term in terms:
        try:
            for pmid in source.esearch(term, batch_size):
                pmids.setdefault(pmid, None)
        except Exception as exc:
            log.error("esearch %r failed: %s", term, exc)
            report.failures.append((term, repr(exc)))

    def fetch(pmid):
        try:
            return source.fetch_record(pmid), None
        except Exception as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        fetched = list(zip(pmids, pool.map(fetch, pmids)))

    for pmid, (rec, exc) in fetched:
        if exc is not None:
            log.error("PMID %s: %s", pmid, exc)
            report.failures.append((pmid, repr(exc)))
            continue
        report.fetched += 1
        try:
            _links_for(rec, source, store, report)
        except Exception as exc:
            log.error("PMID %s: %s", pmid, exc)
            report.failures.append((pmid, repr(exc)))
    store.save()
    return report


def _links_for(rec: PubmedRecord, source, store, report: IngestReport):
    store.cache_pmid_doi(rec.pmid, rec.doi)
    _upsert_if_absent(store, rec)
    target = rec.doi

    if rec.is_retracted_publication and not any(k is NoticeType.RETRACTION for _, k in rec.notices):
        # retracted without a separate notice record
        if target is None:
            store.record_pmid_only(rec.pmid, rec.pmid, NoticeType.RETRACTION)
            report.side_table += 1
        else:
            store.record_notice_link(NoticeLink(
                target, target, NoticeType.RETRACTION, None,
                frozenset({SourceTag.PUBMED}), DROP_IN_REPLACEMENT,
            ))
            report.links += 1

    for notice_pmid, kind in rec.notices:
        try:
            notice_doi = source.map_pmid_to_doi(notice_pmid, store)
        except NotFound:
            notice_doi = None
        notice_date = None
        if notice_doi is not None:
            # PubMed's own date, whatever other sources stored for the notice
            nrec = source.fetch_record(notice_pmid)
            _upsert_if_absent(store, nrec, known_notice=True)
            notice_date = nrec.published_date
        if target is None or notice_doi is None or notice_doi == target:
            store.record_pmid_only(rec.pmid, notice_pmid, kind, target, notice_doi)
            report.side_table += 1
            continue
        try:
            store.record_notice_link(NoticeLink(
                notice_doi, target, kind, notice_date, frozenset({SourceTag.PUBMED}), METADATA,
            ))
        except InvalidRecord as exc:
            log.error("%s", exc)
            report.failures.append((rec.pmid, repr(exc)))
            continue
        report.links += 1
