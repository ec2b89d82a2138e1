"""Combining links from several sources: type reconciliation, Venn regions and
per-source descriptive tables."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from typing import Iterable, Mapping

from .model import NoticeLink, NoticeType, SourceTag

log = logging.getLogger(__name__)

WEAK_TYPES = frozenset(
    {NoticeType.ADDENDUM, NoticeType.CLARIFICATION, NoticeType.COMMENT, NoticeType.UNKNOWN}
)
# Higher number wins when concrete types disagree.
SEVERITY = {
    NoticeType.RETRACTION: 4,
    NoticeType.WITHDRAWAL: 4,
    NoticeType.REMOVAL: 4,
    NoticeType.RETRACTED_AND_REPUBLISHED: 4,
    NoticeType.EXPRESSION_OF_CONCERN: 3,
    NoticeType.CORRECTED_AND_REPUBLISHED: 2,
    NoticeType.CORRECTION: 2,
    NoticeType.ERRATUM: 2,
}
SOURCE_PRECEDENCE = (SourceTag.TITLE_DETECTION, SourceTag.PUBMED, SourceTag.CROSSREF)
SOURCE_LABELS = {
    SourceTag.CROSSREF: "Crossref",
    SourceTag.PUBMED: "PubMed",
    SourceTag.TITLE_DETECTION: "TitleDetection",
}


def _by_precedence(votes: Mapping) -> list:
    return [(s, votes[s]) for s in SOURCE_PRECEDENCE if s in votes]


def reconcile_type(votes) -> NoticeType:
    """Pick one notice type from per-source reports.

    Concrete types always beat Addendum/Clarification/Comment/Unknown. Among
    disagreeing concrete types the most severe wins, ties broken by source
    precedence (title detection, then PubMed, then Crossref).
    """
    votes = dict(votes)
    if not votes:
        raise ValueError("reconcile_type needs at least one source")
    ranked = _by_precedence({SourceTag(k): NoticeType(v) for k, v in votes.items()})
    concrete = [(s, t) for s, t in ranked if t not in WEAK_TYPES]
    if not concrete:
        return ranked[0][1]
    kinds = {t for _, t in concrete}
    if len(kinds) == 1:
        return concrete[0][1]
    top = max(SEVERITY[t] for t in kinds)
    chosen = next(t for _, t in concrete if SEVERITY[t] == top)
    log.info("notice type conflict %s resolved to %s", {s.value: t.value for s, t in ranked}, chosen.value)
    return chosen


def merge_links(store) -> list:
    """Canonical link set: one link per (notice, target), types reconciled.

    The store already unions sources on write; this pass re-derives the
    reconciled type for every edge and writes back any that changed.
    """
    out = []
    for link in store.iter_links():
        kind = reconcile_type(link.source_types)
        if kind is not link.notice_type:
            link = NoticeLink(
                link.notice_doi, link.target_doi, kind, link.notice_date,
                link.sources, link.detection_method, link.source_types,
            )
            store.replace_link(link)
        out.append(link)
    out.sort(key=lambda l: (l.target_doi.value if l.target_doi else "", l.notice_doi.value))
    return out


def region_name(sources: Iterable) -> str:
    return "+".join(SOURCE_LABELS[s] for s in sorted(set(sources), key=SOURCE_PRECEDENCE[::-1].index))


def all_regions() -> list:
    order = SOURCE_PRECEDENCE[::-1]
    regions = []
    for k in (1, 2, 3):
        for combo in itertools.combinations(order, k):
            regions.append(frozenset(combo))
    return regions


def _links_of(obj) -> list:
    if hasattr(obj, "iter_links"):
        return [l for l in merge_links(obj) if l.target_doi is not None]
    return list(obj)


def venn_counts(links) -> dict:
    """Number of distinct edges in each of the 7 source-combination regions.

    Accepts a store (merged first) or any iterable of links.
    """
    links = _links_of(links)
    counts = Counter()
    seen = set()
    for link in links:
        if link.key in seen:
            continue
        seen.add(link.key)
        counts[frozenset(link.sources)] += 1
    return {region_name(r): counts.get(r, 0) for r in all_regions()}


def descriptive_stats(links) -> dict:
    """Per source and per reported type: edges in total, and edges no other source has."""
    links = _links_of(links)
    table = {SOURCE_LABELS[s]: {} for s in SOURCE_PRECEDENCE[::-1]}
    for link in {l.key: l for l in links}.values():
        for source, kind in link.source_types:
            row = table[SOURCE_LABELS[source]].setdefault(kind.value, {"total": 0, "unique_to_source": 0})
            row["total"] += 1
            if link.sources == {source}:
                row["unique_to_source"] += 1
    return {src: dict(sorted(rows.items())) for src, rows in table.items()}


def format_table(stats: Mapping) -> str:
    """Aligned plain-text rendering of :func:`descriptive_stats`."""
    header = ("Notice type", "# Total from source", "# Unique to source")
    rows = []
    for source, kinds in stats.items():
        rows.append((source, "", ""))
        for kind, row in kinds.items():
            rows.append(("  " + kind, f"{row['total']:,}", f"{row['unique_to_source']:,}"))
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(3)]
    lines = [
        f"{header[0]:<{widths[0]}}  {header[1]:>{widths[1]}}  {header[2]:>{widths[2]}}",
        "  ".join("-" * w for w in widths),
    ]
    for a, b, c in rows:
        lines.append(f"{a:<{widths[0]}}  {b:>{widths[1]}}  {c:>{widths[2]}}".rstrip())
    return "\n".join(lines) + "\n"


def format_venn(counts: Mapping) -> str:
    width = max(len(k) for k in counts)
    return "".join(f"{k:<{width}}  {v:>10,}\n" for k, v in counts.items())
