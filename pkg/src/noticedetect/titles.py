"""Title detection: recognise notice markers in titles and pull out the title of
the article a notice refers to."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional

from . import kernels
from .config import PatternConfig
from .model import NoticeType, normalize_title


class MarkerPosition(str, enum.Enum):
    PREFIX = "prefix"
    POSTFIX = "postfix"


@dataclass(frozen=True)
class TitleClassification:
    matched_marker: Optional[str]
    marker_position: Optional[MarkerPosition]
    inferred_type: NoticeType
    candidates: tuple = ()
    is_generic: bool = False

    @property
    def is_notice(self) -> bool:
        return self.matched_marker is not None or self.is_generic


NOT_A_NOTICE = TitleClassification(None, None, NoticeType.UNKNOWN)
GENERIC_UNMARKED = TitleClassification(None, None, NoticeType.UNKNOWN, (), True)

_QUOTE_PAIRS = (('"', '"'), ("“", "”"), ("'", "'"), ("‘", "’"))
_SEPARATORS = ":-–—"
_TRAILING_PAREN = re.compile(r"\s*\(([^()]*)\)\s*$")
_TRAILING_BRACKET = re.compile(r"\s*\[([^\[\]]{2,80})\]\s*$")
_CITATION_SHAPE = re.compile(
    r"\b(?:1[5-9]\d\d|20\d\d)\b|\bvol\b|\bpg\s*\d|\bpp?\.\s*\d|\d+\s*[;:]\s*\d",
    re.IGNORECASE,
)
_JOURNAL_ABBREV = re.compile(r"[A-Z][A-Za-z.&\- ]*")
MIN_QUOTED_CHARS = 15
MIN_QUOTED_WORDS = 3


def _quoted_spans(text: str):
    for open_q, close_q in _QUOTE_PAIRS:
        if open_q not in text:
            continue
        start = None
        n = len(text)
        for i, ch in enumerate(text):
            if ch != open_q and ch != close_q:
                continue
            opener = ch == open_q and (i == 0 or not text[i - 1].isalnum())
            closer = ch == close_q and (i == n - 1 or not text[i + 1].isalnum())
            if start is None:
                if opener:
                    start = i
            elif closer:
                yield start, i
                start = None


def extract_quoted(text: Optional[str]) -> Optional[str]:
    """Longest quoted span of at least 15 characters and 3 words, if any.

    Quotes must open at a word start and close at a word end, which keeps
    apostrophes ("Parkinson's") from being paired as quotation marks.
    """
    if not text:
        return None
    best = None
    for i, j in _quoted_spans(text):
        inner = text[i + 1 : j].strip()
        if len(inner) < MIN_QUOTED_CHARS or len(inner.split()) < MIN_QUOTED_WORDS:
            continue
        if best is None or len(inner) > len(best):
            best = inner
    return best


def _unwrap_quotes(s: str) -> str:
    for open_q, close_q in _QUOTE_PAIRS:
        if len(s) > 2 and s[0] == open_q and s[-1] == close_q:
            return s[1:-1].strip()
    return s


def _strip_citation(candidate: str) -> tuple:
    """Return (stripped text, whether a citation or journal tag was removed)."""
    s = candidate.strip()
    removed = False
    paren_done = bracket_done = False
    for _ in range(2):
        m = _TRAILING_PAREN.search(s)
        if not paren_done and m and _CITATION_SHAPE.search(m.group(1)):
            s = s[: m.start()].rstrip()
            paren_done = removed = True
            continue
        m = _TRAILING_BRACKET.search(s)
        if (
            not bracket_done
            and m
            and _JOURNAL_ABBREV.fullmatch(m.group(1).strip())
            and "retract" not in m.group(1).lower()
        ):
            s = s[: m.start()].rstrip()
            bracket_done = removed = True
            continue
        break
    # '"Title" J. Am. Chem. Soc.' keeps only the quoted title
    for open_q, close_q in _QUOTE_PAIRS:
        if s[:1] == open_q:
            end = s.rfind(close_q, 1)
            tail = s[end + 1 :].strip() if end > 0 else ""
            if tail and len(tail) <= 60 and _JOURNAL_ABBREV.fullmatch(tail):
                s = s[: end + 1]
                removed = True
            break
    return _unwrap_quotes(s), removed


def strip_trailing_citation(candidate: str) -> str:
    """Drop a trailing volume/page/year parenthetical or bracketed journal
    abbreviation, then any quotes enclosing the whole remainder."""
    return _strip_citation(candidate)[0]


def _after_prefix(title: str, end: int, marker: str) -> str:
    rest = title[end:].lstrip()
    if rest[:1] and rest[0] in _SEPARATORS and marker[-1] not in _SEPARATORS:
        rest = rest[1:].lstrip()
    if marker.endswith("[") and rest.endswith("]"):
        rest = rest[:-1].rstrip()
    return rest


def _before_postfix(title: str, start: int) -> str:
    rest = title[:start].rstrip()
    if rest[-1:] and rest[-1] in _SEPARATORS:
        rest = rest[:-1].rstrip()
    return rest


def _appended_marker(title: str, config: PatternConfig):
    """Match a trailing '(Retraction of vol 51, pg 443, 2007)' style note."""
    if not title.endswith(")"):
        return None
    m = _TRAILING_PAREN.search(title)
    if not m:
        return None
    body = m.group(1).strip()
    if not _CITATION_SHAPE.search(body):
        return None
    i, _ = kernels.match_prefix(body, config.appended_markers)
    if i < 0:
        return None
    return config.appended_markers[i], title[: m.start()].rstrip()


def classify_title(title: Optional[str], config: PatternConfig) -> TitleClassification:
    t = (title or "").strip()
    if not t:
        return NOT_A_NOTICE
    marker = position = None
    remainder = ""

    i, end = kernels.match_prefix(t, config.prefixes)
    if i >= 0:
        marker, position = config.prefixes[i], MarkerPosition.PREFIX
        remainder = _after_prefix(t, end, marker)
    else:
        i, start = kernels.match_postfix(t, config.postfixes)
        if i >= 0:
            marker, position = config.postfixes[i], MarkerPosition.POSTFIX
            remainder = _before_postfix(t, start)
        else:
            hit = _appended_marker(t, config)
            if hit is not None:
                marker, remainder = hit
                position = MarkerPosition.POSTFIX

    full = normalize_title(t)
    if marker is None:
        if config.is_blacklisted_title(full):
            return GENERIC_UNMARKED
        return NOT_A_NOTICE

    kind = config.type_of(marker)
    rem_norm = normalize_title(remainder)
    if not rem_norm or config.is_blacklisted_title(rem_norm):
        return TitleClassification(marker, position, kind, (), True)

    candidates = [remainder]
    quoted = extract_quoted(remainder) or extract_quoted(t)
    if quoted and normalize_title(quoted) != rem_norm:
        candidates.append(quoted)
    candidates = tuple(c for c in candidates if normalize_title(c) != full)
    return TitleClassification(marker, position, kind, candidates, False)
