"""Detect editorial notices (retractions, errata, corrections, ...) in scholarly metadata."""

from .config import PatternConfig, default_config, load_config
from .linker import Kind, Reason, Resolution, detect_all, resolve
from .merge import descriptive_stats, merge_links, reconcile_type, venn_counts
from .model import (
    Doi,
    MalformedDoi,
    NoticeLink,
    NoticeType,
    PartialDate,
    PublicationRecord,
    SourceTag,
    normalize_doi,
    normalize_title,
)
from .store import MetadataStore, PendingMatch
from .titles import TitleClassification, classify_title, extract_quoted, strip_trailing_citation

__version__ = "0.1.0"

__all__ = [
    "Doi",
    "Kind",
    "MalformedDoi",
    "MetadataStore",
    "NoticeLink",
    "NoticeType",
    "PartialDate",
    "PatternConfig",
    "PendingMatch",
    "PublicationRecord",
    "Reason",
    "Resolution",
    "SourceTag",
    "TitleClassification",
    "classify_title",
    "default_config",
    "descriptive_stats",
    "detect_all",
    "extract_quoted",
    "load_config",
    "merge_links",
    "normalize_doi",
    "normalize_title",
    "reconcile_type",
    "resolve",
    "strip_trailing_citation",
    "venn_counts",
]
