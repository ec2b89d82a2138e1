"""Core vocabulary: DOIs, partial dates, notice types, publication records and links."""

from __future__ import annotations

import datetime as _dt
import enum
import re
import unicodedata
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional
from urllib.parse import unquote


class MalformedDoi(ValueError):
    pass


class InvalidRecord(ValueError):
    pass


class NoticeType(str, enum.Enum):
    ERRATUM = "erratum"
    CORRECTION = "correction"
    EXPRESSION_OF_CONCERN = "expression_of_concern"
    RETRACTION = "retraction"
    WITHDRAWAL = "withdrawal"
    REMOVAL = "removal"
    COMMENT = "comment"
    ADDENDUM = "addendum"
    CLARIFICATION = "clarification"
    CORRECTED_AND_REPUBLISHED = "corrected_and_republished"
    RETRACTED_AND_REPUBLISHED = "retracted_and_republished"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "NoticeType":
        key = re.sub(r"[\s\-]+", "_", text.strip()).lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        # CamelCase names as written in config files, e.g. ExpressionOfConcern
        camel = re.sub(r"(?<!^)(?=[A-Z])", "_", text.strip()).lower()
        for member in cls:
            if camel == member.value:
                return member
        raise ValueError(f"unknown notice type: {text!r}")


class SourceTag(str, enum.Enum):
    CROSSREF = "crossref_update_to"
    PUBMED = "pubmed_eutils"
    TITLE_DETECTION = "title_detection"


# --- DOIs -------------------------------------------------------------------

_DOI_URL = re.compile(r"^(?:https?://)?(?:dx\.)?doi\.org/", re.IGNORECASE)
_DOI_LABEL = re.compile(r"^doi\s*:\s*", re.IGNORECASE)
_DOI_SHAPE = re.compile(r"^10\.\d+(?:\.\d+)*/\S+$")


@dataclass(frozen=True, order=True)
class Doi:
    value: str

    def __post_init__(self):
        if not _DOI_SHAPE.match(self.value) or self.value != self.value.lower():
            raise MalformedDoi(self.value)

    @property
    def prefix(self) -> str:
        return self.value.split("/", 1)[0]

    def __str__(self) -> str:
        return self.value


def normalize_doi(raw) -> Doi:
    """Parse a DOI given bare, as ``doi:...`` or as a doi.org URL.

    >>> normalize_doi("https://doi.org/10.1111/WVN.12426").value
    '10.1111/wvn.12426'
    """
    if isinstance(raw, Doi):
        return raw
    if raw is None:
        raise MalformedDoi("empty DOI")
    text = str(raw).strip()
    if not text:
        raise MalformedDoi("empty DOI")
    if _DOI_URL.match(text):
        text = unquote(_DOI_URL.sub("", text)).strip()
    text = _DOI_LABEL.sub("", text)
    text = text.lower()
    if not _DOI_SHAPE.match(text):
        raise MalformedDoi(raw)
    return Doi(text)


# --- Titles -----------------------------------------------------------------

_TAG = re.compile(r"<[^<>]*>")
_WS = re.compile(r"\s+")
_QUOTES = str.maketrans(
    {
        "‘": "'", "’": "'", "‚": "'", "‛": "'",
        "′": "'", "´": "'", "ʼ": "'", "`": "'",
        "“": '"', "”": '"', "„": '"', "‟": '"',
        "″": '"', "«": '"', "»": '"',
    }
)


def _normalize_once(text: str) -> str:
    text = unicodedata.normalize("NFKC", text)
    while True:
        stripped = _TAG.sub("", text)
        if stripped == text:
            break
        text = stripped
    text = unicodedata.normalize("NFKC", text.casefold())
    text = text.translate(_QUOTES)
    text = _WS.sub(" ", text).strip()
    # one trailing period, but leave "..." and other runs alone
    if text.endswith(".") and not text[:-1].rstrip().endswith("."):
        text = text[:-1].rstrip()
    return text


def normalize_title(raw: Optional[str]) -> str:
    """Canonical form of a title used as the exact-match search key."""
    if not raw:
        return ""
    text = _normalize_once(raw)
    # casefold/NFKC interplay can expose new tags or spaces on rare inputs
    for _ in range(4):
        again = _normalize_once(text)
        if again == text:
            break
        text = again
    return text


# --- Partial dates ----------------------------------------------------------


@dataclass(frozen=True)
class PartialDate:
    year: int
    month: Optional[int] = None
    day: Optional[int] = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise ValueError("day given without month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"bad month {self.month}")
        if self.day is not None:
            _dt.date(self.year, self.month, self.day)  # raises on invalid day

    @property
    def precision(self) -> int:
        return 1 + (self.month is not None) + (self.day is not None)

    def parts(self) -> tuple:
        return tuple(p for p in (self.year, self.month, self.day) if p is not None)

    @classmethod
    def from_parts(cls, parts: Iterable) -> Optional["PartialDate"]:
        values = []
        for p in parts or ():
            if p is None:
                break
            values.append(int(p))
        if not values:
            return None
        return cls(*values[:3])

    @classmethod
    def parse(cls, text: Optional[str]) -> Optional["PartialDate"]:
        if text is None or text == "":
            return None
        m = re.fullmatch(r"(\d{4})(?:-(\d{1,2})(?:-(\d{1,2}))?)?", text.strip())
        if not m:
            raise ValueError(f"bad partial date {text!r}")
        return cls.from_parts(g for g in m.groups() if g is not None)

    def isoformat(self) -> str:
        out = f"{self.year:04d}"
        if self.month is not None:
            out += f"-{self.month:02d}"
        if self.day is not None:
            out += f"-{self.day:02d}"
        return out

    __str__ = isoformat

    def compare(self, other: "PartialDate") -> int:
        """Three-way comparison truncated to the coarser of the two precisions."""
        n = min(self.precision, other.precision)
        a, b = self.parts()[:n], other.parts()[:n]
        return (a > b) - (a < b)


def earliest(a: Optional[PartialDate], b: Optional[PartialDate]) -> Optional[PartialDate]:
    """Earlier of two partial dates; on a tie at shared precision keep the more precise."""
    if a is None:
        return b
    if b is None:
        return a
    c = a.compare(b)
    if c:
        return a if c < 0 else b
    if a.precision != b.precision:
        return a if a.precision > b.precision else b
    return min(a, b, key=lambda d: d.parts())


# --- Records ----------------------------------------------------------------


@dataclass(frozen=True)
class PublicationRecord:
    doi: Doi
    title: str
    published_date: Optional[PartialDate] = None
    is_known_notice: bool = False
    normalized_title: str = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.doi, Doi):
            object.__setattr__(self, "doi", normalize_doi(self.doi))
        object.__setattr__(self, "title", self.title or "")
        object.__setattr__(self, "normalized_title", normalize_title(self.title))
        if self.published_date is not None:
            year = self.published_date.year
            if not 1500 <= year <= _dt.date.today().year + 1:
                raise InvalidRecord(f"{self.doi}: implausible year {year}")

    @property
    def registrant_prefix(self) -> str:
        return self.doi.prefix

    def with_title(self, title: str) -> "PublicationRecord":
        return replace(self, title=title)

    def to_json(self) -> dict:
        return {
            "doi": self.doi.value,
            "title": self.title,
            "published_date": self.published_date.isoformat() if self.published_date else None,
            "is_known_notice": self.is_known_notice,
        }

    @classmethod
    def from_json(cls, row: Mapping) -> "PublicationRecord":
        return cls(
            doi=normalize_doi(row["doi"]),
            title=row.get("title") or "",
            published_date=PartialDate.parse(row.get("published_date")),
            is_known_notice=bool(row.get("is_known_notice", False)),
        )


DROP_IN_REPLACEMENT = "drop_in_replacement"
METADATA = "metadata"
DETECTION_METHODS = (
    "simple_prepend",
    "alternative_title_1",
    "alternative_title_2",
    "title_append",
    DROP_IN_REPLACEMENT,
    METADATA,
)


@dataclass(frozen=True)
class NoticeLink:
    """Edge from a notice DOI to the DOI it refers to.

    ``source_types`` remembers the notice type each source reported, so that
    merging can reconcile disagreements later.
    """

    notice_doi: Doi
    target_doi: Optional[Doi]
    notice_type: NoticeType
    notice_date: Optional[PartialDate] = None
    sources: frozenset = frozenset()
    detection_method: str = METADATA
    source_types: tuple = ()

    def __post_init__(self):
        if not self.sources:
            raise InvalidRecord("a notice link needs at least one source")
        object.__setattr__(self, "sources", frozenset(SourceTag(s) for s in self.sources))
        if self.detection_method not in DETECTION_METHODS:
            raise InvalidRecord(f"unknown detection method {self.detection_method!r}")
        if (
            self.target_doi is not None
            and self.notice_doi == self.target_doi
            and self.detection_method != DROP_IN_REPLACEMENT
        ):
            raise InvalidRecord(f"{self.notice_doi}: notice cannot point at itself")
        types = dict(self.source_types)
        for s in self.sources:
            types.setdefault(s, self.notice_type)
        object.__setattr__(
            self,
            "source_types",
            tuple(sorted(((SourceTag(s), NoticeType(t)) for s, t in types.items() if s in self.sources), key=lambda kv: kv[0].value)),
        )

    @property
    def key(self) -> tuple:
        return (self.notice_doi.value, self.target_doi.value if self.target_doi else None)

    @property
    def is_drop_in(self) -> bool:
        return self.target_doi is not None and self.notice_doi == self.target_doi

    def type_from(self, source: SourceTag) -> Optional[NoticeType]:
        return dict(self.source_types).get(source)

    def to_json(self) -> dict:
        return {
            "notice_doi": self.notice_doi.value,
            "target_doi": self.target_doi.value if self.target_doi else None,
            "notice_type": self.notice_type.value,
            "notice_date": self.notice_date.isoformat() if self.notice_date else None,
            "sources": sorted(s.value for s in self.sources),
            "detection_method": self.detection_method,
            "source_types": {s.value: t.value for s, t in self.source_types},
        }

    @classmethod
    def from_json(cls, row: Mapping) -> "NoticeLink":
        target = row.get("target_doi")
        return cls(
            notice_doi=normalize_doi(row["notice_doi"]),
            target_doi=normalize_doi(target) if target else None,
            notice_type=NoticeType(row["notice_type"]),
            notice_date=PartialDate.parse(row.get("notice_date")),
            sources=frozenset(SourceTag(s) for s in row["sources"]),
            detection_method=row.get("detection_method") or METADATA,
            source_types=tuple(
                (SourceTag(s), NoticeType(t)) for s, t in (row.get("source_types") or {}).items()
            ),
        )
