"""Synthetic notice corpora with known answers, and scoring of detector output."""

from __future__ import annotations

import datetime as _dt
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .config import PatternConfig, default_config, read_list
from .linker import Kind, RunReport, detect_all
from .model import Doi, PartialDate, PublicationRecord
from .store import MetadataStore

PATTERNS = (
    "simple_prepend",
    "alternative_title_1",
    "alternative_title_2",
    "title_append",
    "drop_in_replacement",
    "generic_notice",
)
NO_NOTICE = "none"

DEFAULT_MIX = {
    NO_NOTICE: 0.50,
    "simple_prepend": 0.20,
    "alternative_title_1": 0.07,
    "alternative_title_2": 0.05,
    "title_append": 0.08,
    "drop_in_replacement": 0.05,
    "generic_notice": 0.05,
}

_CONNECTORS = ("of", "in", "and", "for", "with", "during", "after")
_QUOTES = (('"', '"'), ("“", "”"), ("'", "'"), ("‘", "’"))
_ALT_MARKERS = ("Retraction of", "Retraction for", "Retraction notice to", "Erratum to:",
                "Correction to:", "Notice of Retraction:", "Retraction:", "Erratum:")
_JOURNALS = ("J Biol Chem", "Nat Commun", "PLoS One", "J. Am. Chem. Soc.", "Clin Infect Dis", "Sci Rep")
_GENERIC_TITLES = ("Retraction", "Errata", "Erratum", "Retraction note:", "Notice of Retraction",
                   "Expression of concern", "Correction", "Retraction Note:")
_DROP_IN_PREFIXES = ("WITHDRAWN:", "RETRACTED:", "Retracted:", "RETRACTED ARTICLE:", "Withdrawn:", "REMOVED:")


class InvalidWeights(ValueError):
    pass


class CorpusMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TruthEntry:
    kind: Kind
    target: Optional[Doi]
    pattern: str
    noise: Optional[str] = None

    def to_json(self, notice: str) -> dict:
        return {
            "notice_doi": notice,
            "kind": self.kind.value,
            "target_doi": self.target.value if self.target else None,
            "pattern": self.pattern,
            "noise": self.noise,
        }


@dataclass
class GroundTruth:
    entries: dict = field(default_factory=dict)  # notice DOI -> TruthEntry
    corpus_dois: frozenset = frozenset()

    def add(self, notice: Doi, entry: TruthEntry):
        if notice.value in self.entries:
            raise ValueError(f"duplicate truth entry for {notice}")
        self.entries[notice.value] = entry


@dataclass
class Corpus:
    publications: list
    truth: GroundTruth

    def load_into(self, store: MetadataStore) -> MetadataStore:
        for rec in self.publications:
            store.upsert_publication(rec)
        return store

    def write(self, directory) -> None:
        """Publications in the store's JSONL format plus a ``truth.jsonl`` sidecar."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with (d / "publications.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for rec in self.publications:
                fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        with (d / "truth.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for k in sorted(self.truth.entries):
                fh.write(json.dumps(self.truth.entries[k].to_json(k), ensure_ascii=False, sort_keys=True) + "\n")


def _check_mix(mix: Optional[Mapping]) -> dict:
    if mix is None:
        return dict(DEFAULT_MIX)
    out = {}
    for key, w in mix.items():
        if key not in PATTERNS and key != NO_NOTICE:
            raise InvalidWeights(f"unknown pattern {key!r}")
        try:
            w = float(w)
        except (TypeError, ValueError):
            raise InvalidWeights(f"{key}: weight {w!r} is not a number") from None
        if not math.isfinite(w) or w < 0:
            raise InvalidWeights(f"{key}: weight must be finite and non-negative")
        out[key] = w
    if sum(out.values()) <= 0:
        raise InvalidWeights("weights sum to zero")
    return {k: out.get(k, 0.0) for k in (NO_NOTICE,) + PATTERNS}


def _title(rng: random.Random, words: list) -> str:
    n = rng.randint(5, 9)
    parts = []
    for i in range(n):
        parts.append(rng.choice(words))
        if 0 < i < n - 1 and rng.random() < 0.2:
            parts.append(rng.choice(_CONNECTORS))
    title = " ".join(parts)
    if rng.random() < 0.15:
        title += ": " + " ".join(rng.choice(words) for _ in range(rng.randint(2, 4)))
    return title[0].upper() + title[1:]


def _date(rng: random.Random) -> _dt.date:
    return _dt.date(1990, 1, 1) + _dt.timedelta(days=rng.randrange(0, 30 * 365))


def _pd(d: _dt.date) -> PartialDate:
    return PartialDate(d.year, d.month, d.day)


def generate_corpus(seed: int, n_papers: int, mix: Optional[Mapping] = None,
                    duplicate_rate: float = 0.02, inversion_rate: float = 0.01,
                    config: Optional[PatternConfig] = None) -> Corpus:
    """Fabricate ``n_papers`` originals and their notices, one Table-2 style pattern each.

    Noise: a fraction of originals get an unrelated same-titled twin under
    another DOI, and a fraction of separate notices are dated before their
    original. Fully determined by ``seed``.
    """
    weights = _check_mix(mix)
    config = config or default_config()
    rng = random.Random(seed)
    words = read_list(None, "words.txt")
    registrants = [f"10.{5000 + k}" for k in range(12)]
    names = list(weights)
    cum = [weights[k] for k in names]
    simple_markers = [m for m in config.prefixes if not m.endswith("[") and m not in ("Retraction of", "Retraction for")]
    postfixes = list(config.postfixes)

    pubs = []
    truth = GroundTruth()
    seen_titles = set()

    for i in range(n_papers):
        prefix = rng.choice(registrants)
        doi = Doi(f"{prefix}/syn.{seed}.{i:06d}")
        while True:
            title = _title(rng, words)
            if title.lower() not in seen_titles:
                seen_titles.add(title.lower())
                break
        published = _date(rng)
        pattern = rng.choices(names, cum)[0]

        if rng.random() < duplicate_rate:
            twin = Doi(f"{rng.choice(registrants)}/syn.{seed}.{i:06d}.twin")
            pubs.append(PublicationRecord(twin, title, _pd(_date(rng))))

        if pattern == "drop_in_replacement":
            if rng.random() < 0.75:
                marked = f"{rng.choice(_DROP_IN_PREFIXES)} {title}"
            else:
                marked = f"{title} {rng.choice(postfixes)}"
            pubs.append(PublicationRecord(doi, marked, _pd(published)))
            truth.add(doi, TruthEntry(Kind.DROP_IN_SELF, doi, pattern))
            continue

        pubs.append(PublicationRecord(doi, title, _pd(published)))
        if pattern == NO_NOTICE:
            continue

        notice = Doi(f"{prefix}/syn.{seed}.{i:06d}.notice")
        noise = None
        notice_date = published + _dt.timedelta(days=rng.randint(30, 2000))
        if pattern != "generic_notice" and rng.random() < inversion_rate:
            notice_date = published - _dt.timedelta(days=rng.randint(30, 2000))
            noise = "date_inversion"
        q1, q2 = rng.choice(_QUOTES)

        if pattern == "simple_prepend":
            ntitle = f"{rng.choice(simple_markers)} {title}"
        elif pattern == "alternative_title_1":
            ntitle = f"{rng.choice(_ALT_MARKERS)} {q1}{title}{q2}"
        elif pattern == "alternative_title_2":
            journal = rng.choice(_JOURNALS)
            tail = f"[{journal}]" if rng.random() < 0.5 else journal
            ntitle = f"{rng.choice(_ALT_MARKERS)} {q1}{title}{q2} {tail}"
        elif pattern == "title_append":
            r = rng.random()
            if r < 0.4:
                ntitle = f"{title} {rng.choice(postfixes)}"
            elif r < 0.7:
                ntitle = f"{q1}{title}{q2} {rng.choice(postfixes)}"
            else:
                ntitle = (f"{title} (Retraction of vol {rng.randint(1, 120)}, "
                          f"pg {rng.randint(1, 2000)}, {published.year})")
        else:  # generic_notice
            ntitle = rng.choice(_GENERIC_TITLES)

        pubs.append(PublicationRecord(notice, ntitle, _pd(notice_date)))
        if pattern == "generic_notice":
            truth.add(notice, TruthEntry(Kind.GENERIC, None, pattern))
        else:
            truth.add(notice, TruthEntry(Kind.LINKED, doi, pattern, noise))

    truth.corpus_dois = frozenset(p.doi.value for p in pubs)
    return Corpus(pubs, truth)


@dataclass
class EvalResult:
    precision: float
    recall: float
    asserted: int
    correct: int
    linkable: int
    confusion: dict

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "asserted": self.asserted,
            "correct": self.correct,
            "linkable": self.linkable,
            "confusion": self.confusion,
        }


ASSERTING = (Kind.LINKED, Kind.DROP_IN_SELF)


def evaluate(detected, truth: GroundTruth) -> EvalResult:
    """Score resolutions (a RunReport or a {notice DOI: Resolution} mapping).

    precision = correct Linked/DropInSelf assertions / all such assertions;
    recall = correct / truth entries that should be Linked or DropInSelf.
    """
    resolutions = detected.resolutions if isinstance(detected, RunReport) else dict(detected)
    resolutions = {(k.value if isinstance(k, Doi) else k): v for k, v in resolutions.items()}
    strays = [k for k in resolutions if k not in truth.corpus_dois]
    if strays:
        raise CorpusMismatch(f"{len(strays)} detected DOIs are not in the corpus, e.g. {strays[0]}")

    asserted = correct = 0
    for doi, res in resolutions.items():
        if res.kind not in ASSERTING:
            continue
        asserted += 1
        want = truth.entries.get(doi)
        if want is not None and want.kind is res.kind and want.target == res.target:
            correct += 1

    confusion = {}
    for doi, want in truth.entries.items():
        res = resolutions.get(doi)
        col = res.kind.value if res is not None else "undetected"
        row = confusion.setdefault(want.pattern, Counter())
        row[col] += 1
    for doi, res in resolutions.items():
        if doi not in truth.entries:
            confusion.setdefault(NO_NOTICE, Counter())[res.kind.value] += 1

    linkable = sum(1 for e in truth.entries.values() if e.kind in ASSERTING)
    return EvalResult(
        precision=correct / asserted if asserted else 1.0,
        recall=correct / linkable if linkable else 1.0,
        asserted=asserted,
        correct=correct,
        linkable=linkable,
        confusion={k: dict(sorted(v.items())) for k, v in sorted(confusion.items())},
    )


def run_eval(seed: int, size: int, mix: Optional[Mapping] = None, config: Optional[PatternConfig] = None,
             out_dir=None) -> EvalResult:
    corpus = generate_corpus(seed, size, mix, config=config)
    if out_dir is not None:
        corpus.write(out_dir)
    store = corpus.load_into(MetadataStore())
    report = detect_all(store, config or default_config())
    return evaluate(report, corpus.truth)
