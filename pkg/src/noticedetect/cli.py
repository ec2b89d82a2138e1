"""Command line entry point: ``noticedetect [--db PATH] <command> ...``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .config import ConfigError, default_config, load_config, read_list
from .crossref import CrossrefClient, CrossrefSnapshot, ingest_crossref
from .evaluation import InvalidWeights, run_eval
from .linker import detect_all
from .merge import descriptive_stats, format_table, format_venn, merge_links, venn_counts
from .model import NoticeLink
from .pubmed import PubmedClient, PubmedSnapshot, build_pubmed_links
from .store import MetadataStore, StorageFailure

log = logging.getLogger("noticedetect")

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2
EXPORT_COLUMNS = ("doi", "notice_doi", "notice_type", "notice_date", "sources", "detection_method")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FATAL, f"{self.prog}: error: {message}\n")


def _iso_date(text: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {text!r}") from None


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noticedetect", description="Harvest, detect and export editorial notices.")
    p.add_argument("--db", help="store directory (default: $NOTICES_DB_PATH, then ./notices-db)")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ingest = sub.add_parser("ingest", help="harvest notice links from a metadata source")
    isub = ingest.add_subparsers(dest="source", required=True, parser_class=_Parser)
    cr = isub.add_parser("crossref", help="works updated in a date window")
    cr.add_argument("--from-update-date", required=True, type=_iso_date)
    cr.add_argument("--until-update-date", required=True, type=_iso_date)
    cr.add_argument("--snapshot", help="read works from JSONL files instead of the API")
    cr.add_argument("--rate-limit", type=_positive, default=5.0, help="requests per second")
    pm = isub.add_parser("pubmed", help="notice searches through Eutils")
    terms = pm.add_mutually_exclusive_group()
    terms.add_argument("--term", action="append", help="search term (repeatable)")
    terms.add_argument("--terms-file", help="one search term per line")
    pm.add_argument("--snapshot", help="read esearch.json and efetch XML from a directory")

    det = sub.add_parser("detect", help="run title detection over the stored publications")
    det.add_argument("--patterns", help="directory with prefixes.txt, postfixes.txt, marker_types.tsv")
    det.add_argument("--blacklist")
    det.add_argument("--whitelist")

    sub.add_parser("merge", help="reconcile notice types across sources")

    st = sub.add_parser("stats", help="source overlap and per-type counts")
    which = st.add_mutually_exclusive_group()
    which.add_argument("--venn", action="store_true", help="source-combination counts as text")
    which.add_argument("--table3", action="store_true", help="per-source, per-type table as text")

    ex = sub.add_parser("export", help="write the linked notices")
    ex.add_argument("--format", choices=("csv", "jsonl"), required=True)
    ex.add_argument("--out", required=True, help="output file, '-' for standard output")

    ev = sub.add_parser("eval", help="score detection on a synthetic corpus")
    ev.add_argument("--seed", type=int, required=True)
    ev.add_argument("--size", type=int, required=True)
    ev.add_argument("--mix", help="JSON object of pattern weights")
    ev.add_argument("--out", help="also write the corpus and its truth here")
    return p


# -- export ------------------------------------------------------------------


def export_rows(links: Iterable[NoticeLink]) -> list:
    """Links with a target, as ordered export rows."""
    rows = []
    for link in links:
        if link.target_doi is None:
            continue
        rows.append({
            "doi": link.target_doi.value,
            "notice_doi": link.notice_doi.value,
            "notice_type": link.notice_type.value,
            "notice_date": link.notice_date.isoformat() if link.notice_date else "",
            "sources": sorted(s.value for s in link.sources),
            "detection_method": link.detection_method,
            "source_types": {s.value: t.value for s, t in link.source_types},
        })
    rows.sort(key=lambda r: (r["doi"], r["notice_doi"]))
    return rows


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(EXPORT_COLUMNS)
    for r in rows:
        w.writerow([";".join(r["sources"]) if c == "sources" else r[c] for c in EXPORT_COLUMNS])
    return buf.getvalue()


def render_jsonl(rows: list) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)


def read_export_jsonl(path) -> list:
    """Links back from a JSONL export."""
    links = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            links.append(NoticeLink.from_json({
                "notice_doi": r["notice_doi"],
                "target_doi": r["doi"],
                "notice_type": r["notice_type"],
                "notice_date": r.get("notice_date") or None,
                "sources": r["sources"],
                "detection_method": r["detection_method"],
                "source_types": r.get("source_types"),
            }))
    return links


def import_links(store: MetadataStore, path) -> int:
    links = read_export_jsonl(path)
    for link in links:
        store.record_notice_link(link)
    return len(links)


def _write_out(target: str, text: str):
    if target == "-":
        sys.stdout.write(text)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- commands ----------------------------------------------------------------


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _cmd_ingest(args, store) -> int:
    if args.source == "crossref":
        if args.from_update_date > args.until_update_date:
            log.error("--from-update-date is after --until-update-date")
            return EXIT_FATAL
        source = CrossrefSnapshot(args.snapshot) if args.snapshot else CrossrefClient(rate=args.rate_limit)
        report = ingest_crossref(source, store, args.from_update_date, args.until_update_date)
    else:
        terms = args.term
        if args.terms_file:
            terms = read_list(args.terms_file)
        source = PubmedSnapshot(args.snapshot) if args.snapshot else PubmedClient()
        report = build_pubmed_links(source, store, terms)
    _emit(report.to_json())
    return EXIT_PARTIAL if report.failures else EXIT_OK


def _cmd_detect(args, store) -> int:
    config = load_config(args.patterns, args.blacklist, args.whitelist)
    report = detect_all(store, config)
    _emit(report.to_json())
    return EXIT_PARTIAL if report.failed else EXIT_OK


def _cmd_merge(args, store) -> int:
    links = merge_links(store)
    store.save()
    _emit({"links": len(links)})
    return EXIT_OK


def _cmd_stats(args, store) -> int:
    if args.venn:
        sys.stdout.write(format_venn(venn_counts(store)))
    elif args.table3:
        sys.stdout.write(format_table(descriptive_stats(store)))
    else:
        _emit({"venn": venn_counts(store), "table3": descriptive_stats(store)})
    return EXIT_OK


def _cmd_export(args, store) -> int:
    rows = export_rows(store.iter_links())
    if args.format == "csv":
        _write_out(args.out, render_csv(rows))
    else:
        _write_out(args.out, render_jsonl([{k: r[k] for k in EXPORT_COLUMNS + ("source_types",)} for r in rows]))
    log.info("exported %d links", len(rows))
    return EXIT_OK


def _cmd_eval(args, store) -> int:
    if args.size < 0:
        log.error("--size must be non-negative")
        return EXIT_FATAL
    mix = None
    if args.mix:
        mix = json.loads(Path(args.mix).read_text(encoding="utf-8"))
        if not isinstance(mix, dict):
            raise InvalidWeights("mix file must hold a JSON object")
    result = run_eval(args.seed, args.size, mix, default_config(), args.out)
    _emit(result.to_json())
    return EXIT_OK


COMMANDS = {
    "ingest": _cmd_ingest,
    "detect": _cmd_detect,
    "merge": _cmd_merge,
    "stats": _cmd_stats,
    "export": _cmd_export,
    "eval": _cmd_eval,
}


def run(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FATAL
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        store = MetadataStore() if args.command == "eval" else MetadataStore.from_env(args.db)
        return COMMANDS[args.command](args, store)
    except (ConfigError, InvalidWeights, StorageFailure, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    except Exception:
        log.exception("%s failed", args.command)
        return EXIT_FATAL


def main(argv: Optional[list] = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
