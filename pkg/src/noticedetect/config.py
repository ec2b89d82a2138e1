"""Pattern configuration: title markers, generic-title blacklist and DOI whitelist.

All lists are plain text, one entry per line, ``#`` starts a comment. The
marker to notice type map is a two-column tab separated file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .model import Doi, NoticeType, normalize_doi, normalize_title

PathLike = Union[str, os.PathLike]

PREFIXES_FILE = "prefixes.txt"
POSTFIXES_FILE = "postfixes.txt"
MARKER_TYPES_FILE = "marker_types.tsv"
BLACKLIST_FILE = "blacklist.txt"
WHITELIST_FILE = "whitelist.txt"
PUBMED_TERMS_FILE = "pubmed_terms.txt"


class ConfigError(ValueError):
    pass


def _read_lines(text: str) -> list:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def _data_text(name: str) -> str:
    return resources.files("noticedetect").joinpath("data", name).read_text(encoding="utf-8")


def read_list(path: Optional[PathLike] = None, default: Optional[str] = None) -> list:
    if path is not None:
        return _read_lines(Path(path).read_text(encoding="utf-8"))
    return _read_lines(_data_text(default))


def read_marker_types(path: Optional[PathLike] = None) -> dict:
    text = Path(path).read_text(encoding="utf-8") if path else _data_text(MARKER_TYPES_FILE)
    mapping = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            marker, kind = line.rstrip("\n").split("\t")
        except ValueError:
            raise ConfigError(f"line {n}: expected 'marker<TAB>type', got {line!r}") from None
        mapping[marker.strip()] = NoticeType.parse(kind)
    return mapping


def _longest_first(markers: Iterable[str]) -> tuple:
    seen = []
    for m in markers:
        if m not in seen:
            seen.append(m)
    # stable sort keeps file order among equal lengths
    return tuple(sorted(seen, key=len, reverse=True))


@dataclass(frozen=True)
class PatternConfig:
    prefixes: tuple
    postfixes: tuple
    marker_type_map: Mapping[str, NoticeType]
    title_blacklist: frozenset = frozenset()
    doi_whitelist: frozenset = frozenset()
    _appended: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prefixes", _longest_first(self.prefixes))
        object.__setattr__(self, "postfixes", _longest_first(self.postfixes))
        object.__setattr__(self, "marker_type_map", dict(self.marker_type_map))
        object.__setattr__(self, "title_blacklist", frozenset(normalize_title(t) for t in self.title_blacklist))
        object.__setattr__(self, "doi_whitelist", frozenset(normalize_doi(d) for d in self.doi_whitelist))
        missing = [m for m in self.prefixes + self.postfixes if m not in self.marker_type_map]
        if missing:
            raise ConfigError(f"markers without a notice type: {missing}")
        # Words that may open an appended "(Retraction of vol 51, ...)" parenthetical,
        # derived from the prefix markers.
        words = []
        for m in self.prefixes:
            w = m.rstrip(":[ ").strip()
            if w and not w.startswith("[") and w not in words:
                words.append(w)
        object.__setattr__(self, "_appended", tuple(sorted(words, key=len, reverse=True)))

    @property
    def appended_markers(self) -> tuple:
        return self._appended

    def type_of(self, marker: str) -> NoticeType:
        if marker in self.marker_type_map:
            return self.marker_type_map[marker]
        for m in self.prefixes:
            if m.rstrip(":[ ").strip() == marker:
                return self.marker_type_map[m]
        return NoticeType.UNKNOWN

    def is_whitelisted(self, doi: Doi) -> bool:
        return normalize_doi(doi) in self.doi_whitelist

    def is_blacklisted_title(self, normalized_title: str) -> bool:
        return normalized_title in self.title_blacklist

    def with_whitelist(self, dois: Iterable) -> "PatternConfig":
        return PatternConfig(
            self.prefixes, self.postfixes, self.marker_type_map,
            self.title_blacklist, frozenset(dois),
        )


def load_config(
    patterns: Optional[PathLike] = None,
    blacklist: Optional[PathLike] = None,
    whitelist: Optional[PathLike] = None,
) -> PatternConfig:
    """Load pattern config, falling back to the bundled defaults.

    ``patterns`` is a directory holding ``prefixes.txt``, ``postfixes.txt``
    and ``marker_types.tsv``; any of them missing falls back to the default.
    """
    pdir = Path(patterns) if patterns else None

    def pick(name):
        if pdir is not None and (pdir / name).exists():
            return pdir / name
        return None

    return PatternConfig(
        prefixes=tuple(read_list(pick(PREFIXES_FILE), PREFIXES_FILE)),
        postfixes=tuple(read_list(pick(POSTFIXES_FILE), POSTFIXES_FILE)),
        marker_type_map=read_marker_types(pick(MARKER_TYPES_FILE)),
        title_blacklist=frozenset(read_list(blacklist, BLACKLIST_FILE)),
        doi_whitelist=frozenset(read_list(whitelist, WHITELIST_FILE)),
    )


def default_config() -> PatternConfig:
    return load_config()


def default_pubmed_terms() -> list:
    return read_list(None, PUBMED_TERMS_FILE)
