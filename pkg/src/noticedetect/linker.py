"""Link title-detected notices to the articles they refer to.

Resolution runs candidate titles through an exact normalized-title lookup and
then a fixed chain of safeguards: whitelist, date order, registrant prefix and
"target is not itself a notice".
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .config import PatternConfig
from .model import (
    DROP_IN_REPLACEMENT,
    Doi,
    NoticeLink,
    PublicationRecord,
    SourceTag,
    normalize_title,
)
from .store import PendingMatch
from .titles import (
    GENERIC_UNMARKED,
    NOT_A_NOTICE,
    MarkerPosition,
    TitleClassification,
    _strip_citation,
    classify_title,
)

log = logging.getLogger(__name__)


class Kind(str, enum.Enum):
    LINKED = "linked"
    DROP_IN_SELF = "drop_in_self"
    GENERIC = "generic"
    MULTI_MATCH = "multi_match"
    REJECTED = "rejected"


class Reason(str, enum.Enum):
    DATE_ORDER = "date_order"
    PREFIX_MISMATCH = "prefix_mismatch"
    TARGET_IS_NOTICE = "target_is_notice"
    WHITELISTED = "whitelisted"


PASS = None


@dataclass(frozen=True)
class Resolution:
    kind: Kind
    target: Optional[Doi] = None
    candidates: tuple = ()
    reason: Optional[Reason] = None
    method: Optional[str] = None
    candidate_title: Optional[str] = None

    def __post_init__(self):
        if self.kind is Kind.MULTI_MATCH and len(self.candidates) < 2:
            raise ValueError("a multi-match needs at least two candidates")
        if (self.kind is Kind.REJECTED) != (self.reason is not None):
            raise ValueError("exactly the rejected resolutions carry a reason")

    @classmethod
    def linked(cls, target: Doi, method: str) -> "Resolution":
        return cls(Kind.LINKED, target=target, method=method)

    @classmethod
    def rejected(cls, reason: Reason, target: Optional[Doi] = None) -> "Resolution":
        return cls(Kind.REJECTED, target=target, reason=reason)


def safeguard_date(notice: PublicationRecord, target: PublicationRecord):
    """A notice cannot predate its target (compared at shared precision)."""
    if notice.published_date is None or target.published_date is None:
        log.warning("no date to order %s against %s; letting it pass", notice.doi, target.doi)
        return PASS
    if notice.published_date.compare(target.published_date) < 0:
        return Reason.DATE_ORDER
    return PASS


def safeguard_prefix(notice: Doi, target: Doi):
    if notice.prefix != target.prefix:
        return Reason.PREFIX_MISMATCH
    return PASS


def safeguard_not_notice(target: PublicationRecord, config: PatternConfig):
    if target.is_known_notice:
        return Reason.TARGET_IS_NOTICE
    if classify_title(target.title, config).matched_marker is not None:
        return Reason.TARGET_IS_NOTICE
    return PASS


def _method(cls: TitleClassification, index: int, stripped: bool, removed_citation: bool) -> str:
    if cls.marker_position is MarkerPosition.POSTFIX:
        return "title_append"
    if removed_citation:
        return "alternative_title_2"
    if index > 0 or stripped:
        return "alternative_title_1"
    return "simple_prepend"


def resolve(notice: PublicationRecord, cls: TitleClassification, store, config: PatternConfig) -> Resolution:
    """Resolve one classified notice against the store. Does not write."""
    if config.is_whitelisted(notice.doi):
        return Resolution.rejected(Reason.WHITELISTED)
    if cls.is_generic:
        return Resolution(Kind.GENERIC)
    if cls.matched_marker is None:
        raise ValueError(f"{notice.doi}: title is not a notice")

    for index, candidate in enumerate(cls.candidates):
        tries = [(candidate, False, False)]
        stripped, removed = _strip_citation(candidate)
        if stripped != candidate.strip():
            tries.append((stripped, True, removed))
        for text, was_stripped, removed_citation in tries:
            key = normalize_title(text)
            if not key:
                continue
            hits = [d for d in store.find_by_exact_title(key) if d != notice.doi]
            if not hits:
                continue
            if len(hits) > 1:
                return Resolution(Kind.MULTI_MATCH, candidates=tuple(hits), candidate_title=key)
            target = store.get_publication(hits[0])
            if config.is_whitelisted(target.doi):
                return Resolution.rejected(Reason.WHITELISTED, target.doi)
            for reason in (
                safeguard_date(notice, target),
                safeguard_prefix(notice.doi, target.doi),
                safeguard_not_notice(target, config),
            ):
                if reason is not PASS:
                    return Resolution.rejected(reason, target.doi)
            return Resolution.linked(target.doi, _method(cls, index, was_stripped, removed_citation))

    return Resolution(Kind.DROP_IN_SELF, target=notice.doi, method=DROP_IN_REPLACEMENT)


@dataclass
class RunReport:
    linked: int = 0
    drop_in_self: int = 0
    generic: int = 0
    multi: int = 0
    rejected: Counter = field(default_factory=Counter)
    failed: int = 0
    resolutions: dict = field(default_factory=dict, repr=False)

    @property
    def total(self) -> int:
        return self.linked + self.drop_in_self + self.generic + self.multi + sum(self.rejected.values())

    def add(self, doi: Doi, res: Resolution):
        self.resolutions[doi.value] = res
        if res.kind is Kind.LINKED:
            self.linked += 1
        elif res.kind is Kind.DROP_IN_SELF:
            self.drop_in_self += 1
        elif res.kind is Kind.GENERIC:
            self.generic += 1
        elif res.kind is Kind.MULTI_MATCH:
            self.multi += 1
        else:
            self.rejected[res.reason.value] += 1

    def to_json(self) -> dict:
        return {
            "linked": self.linked,
            "drop_in_self": self.drop_in_self,
            "generic": self.generic,
            "multi": self.multi,
            "rejected": sum(self.rejected.values()),
            "rejected_by_reason": {r.value: self.rejected.get(r.value, 0) for r in Reason},
            "failed": self.failed,
            "total": self.total,
        }


def classify_all(pubs: list, config: PatternConfig) -> list:
    """Classify many records, using the batch kernel to skip obvious non-notices."""
    hits = kernels.scan_titles([p.title for p in pubs], config.prefixes, config.postfixes)
    out = []
    for pub, hit in zip(pubs, hits):
        if hit is None and not pub.title.rstrip().endswith(")"):
            if config.is_blacklisted_title(pub.normalized_title):
                out.append(GENERIC_UNMARKED)
            else:
                out.append(NOT_A_NOTICE)
            continue
        out.append(classify_title(pub.title, config))
    return out


def detect_all(store, config: PatternConfig) -> RunReport:
    """Classify every stored title and persist the resolutions.

    Earlier title-detection results are withdrawn first, so a rerun over the
    same store and config leaves it unchanged.
    """
    report = RunReport()
    store.clear_source(SourceTag.TITLE_DETECTION)
    pubs = store.iter_publications()
    pending, generic = [], []
    for pub, cls in zip(pubs, classify_all(pubs, config)):
        if not cls.is_notice:
            continue
        try:
            res = resolve(pub, cls, store, config)
        except Exception:
            log.exception("%s: resolution failed", pub.doi)
            report.failed += 1
            continue
        report.add(pub.doi, res)
        if res.kind in (Kind.LINKED, Kind.DROP_IN_SELF):
            store.record_notice_link(NoticeLink(
                pub.doi, res.target, cls.inferred_type, pub.published_date,
                frozenset({SourceTag.TITLE_DETECTION}), res.method,
            ))
        elif res.kind is Kind.GENERIC:
            generic.append((pub.doi, pub.title, cls.inferred_type))
        elif res.kind is Kind.MULTI_MATCH:
            pending.append(PendingMatch(pub.doi, res.candidate_title, res.candidates))
    store.replace_detection_side_tables(pending, generic)
    store.save()
    return report
