"""Shared fixtures: the named-case corpus, a synthetic harvest universe and a
fault-injecting mock of the Crossref and Eutils endpoints."""

from __future__ import annotations

import json
import random
import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit
from xml.sax.saxutils import escape

from noticedetect.config import default_config
from noticedetect.model import Doi, PartialDate, PublicationRecord
from noticedetect.store import MetadataStore

# -- named cases ---------------------------------------------------------------

TILDESLEY_ORIG = "10.1016/j.jcjd.2015.01.002"
TILDESLEY_NOTICE = "10.1016/j.jcjd.2016.02.011"
ALBADI = "10.1016/j.tetlet.2014.06.017"
WETHERBY_ORIG = "10.1021/cs300313x"
WETHERBY_NOTICE = "10.1021/acscatal.5b00461"
WAKEFIELD = "10.1016/s0140-6736(97)11096-0"
TRIPATHI_ORIG = "10.1111/j.1574-695x.2007.00329.x"
TRIPATHI_NOTICE = "10.1111/j.1574-695x.2012.01014.x"
ELLISON = "10.1038/s41564-018-0174-y"
GENERIC_NOTICE = "10.1002/gen.1001"
DUP_A = "10.1002/dup.1"
DUP_B = "10.1002/dup.2"
DUP_NOTICE = "10.1002/dup.notice"

PAPER_CASES = [
    (TILDESLEY_ORIG, "Internet Diabetes Management: A Practical Approach", "2015-06-01"),
    (TILDESLEY_NOTICE, "WITHDRAWN: Internet Diabetes Management: A Practical Approach", "2016-04-01"),
    (ALBADI, "WITHDRAWN: Click synthesis of 1,2,3-triazole derivatives catalyzed by a "
             "CuO–CeO₂ nanocomposite in the presence of Amberlite-supported azide", "2014"),
    (WETHERBY_ORIG, "High Activity and Selectivity for Silane Dehydrocoupling by an Iridium Catalyst",
     "2012-07"),
    (WETHERBY_NOTICE, "Retraction of ‘High Activity and Selectivity for Silane Dehydrocoupling "
                      "by an Iridium Catalyst’", "2015"),
    (WAKEFIELD, "RETRACTED: Ileal-lymphoid-nodular hyperplasia, non-specific colitis, and "
                "pervasive developmental disorder in children", "1998-02-28"),
    (TRIPATHI_ORIG, "The role of nitric oxide in inflammatory reactions", "2007"),
    (TRIPATHI_NOTICE, "The role of nitric oxide in inflammatory reactions "
                      "(Retraction of vol 51, pg 443, 2007)", "2012"),
    (ELLISON, "Retraction of DNA-bound type IV competence pili initiates DNA uptake during "
              "natural transformation in Vibrio cholerae", "2018"),
    (GENERIC_NOTICE, "Retraction", "2019"),
    (DUP_A, "Editorial board and contents", "2010"),
    (DUP_B, "Editorial Board and Contents", "2011"),
    (DUP_NOTICE, "Erratum: Editorial board and contents", "2012"),
]

# hand-derived expectation for the fixture above
PAPER_EXPECTED = {
    TILDESLEY_NOTICE: ("linked", TILDESLEY_ORIG),
    ALBADI: ("drop_in_self", ALBADI),
    WETHERBY_NOTICE: ("linked", WETHERBY_ORIG),
    WAKEFIELD: ("drop_in_self", WAKEFIELD),
    TRIPATHI_NOTICE: ("linked", TRIPATHI_ORIG),
    ELLISON: ("rejected", None),
    GENERIC_NOTICE: ("generic", None),
    DUP_NOTICE: ("multi_match", None),
}
PAPER_COUNTS = {"linked": 3, "drop_in_self": 2, "generic": 1, "multi": 1, "rejected": 1}


def paper_records() -> list:
    return [PublicationRecord(Doi(d), t, PartialDate.parse(dt)) for d, t, dt in PAPER_CASES]


def paper_store(root=None) -> MetadataStore:
    store = MetadataStore(root)
    for rec in paper_records():
        store.upsert_publication(rec)
    return store


def paper_config():
    return default_config().with_whitelist([ELLISON])


# -- synthetic harvest universe -------------------------------------------------

_WORDS = (
    "adaptive membrane kinetics cortical signalling lattice thermal coupling "
    "sparse inference cohort variability mineral sediment protein folding "
    "regional climate neural stability dynamics receptor tissue flux urban "
    "catalytic surface oxide plasma vortex genome hepatic bacterial ligand"
).split()


def _title(rng):
    words = [rng.choice(_WORDS) for _ in range(rng.randint(5, 8))]
    return " ".join(words).capitalize() + f" {rng.randint(1, 10**6)}"


def _cr_date(d: PartialDate):
    return {"date-parts": [list(d.parts())]}


class Universe:
    """Crossref works and PubMed records that share DOIs."""

    def __init__(self, seed: int = 0, n: int = 40):
        rng = random.Random(seed)
        self.works = {}
        self.articles = {}  # pmid -> (doi or None, title, date, types, notices)
        self.search = {}
        prefixes = ["10.7001", "10.7002", "10.7003"]
        pmid = 100000
        kinds = ["erratum", "retraction", "correction", "expression_of_concern"]
        ref_for = {"erratum": "ErratumIn", "retraction": "RetractionIn",
                   "expression_of_concern": "ExpressionOfConcernIn", "correction": "ErratumIn"}
        term_for = {"ErratumIn": "haserratumin", "RetractionIn": "hasretractionin",
                    "ExpressionOfConcernIn": "hasexpressionofconcernin"}

        for i in range(n):
            p = rng.choice(prefixes)
            orig = f"{p}/orig.{i}"
            title = _title(rng)
            y = rng.randint(2000, 2015)
            odate = PartialDate(y, rng.randint(1, 12), rng.randint(1, 28))
            ndate = PartialDate(y + rng.randint(1, 5), rng.randint(1, 12), rng.randint(1, 28))
            kind = rng.choice(kinds)
            notice = f"{p}/notice.{i}"
            scenario = rng.choice(["crossref", "pubmed", "both", "both", "self", "pmid_only",
                                   "circular", "title", "version", "plain"])
            self.works[orig] = {"DOI": orig, "title": [title], "published": _cr_date(odate)}
            nt = f"{kind.replace('_', ' ').capitalize()}: {title}"
            if scenario in ("crossref", "both", "circular", "title", "version"):
                work = {"DOI": notice, "title": [nt], "published": _cr_date(ndate)}
                if scenario != "title":
                    utype = "new_version" if scenario == "version" else kind
                    work["update-to"] = [{"DOI": orig, "type": utype, "updated": _cr_date(ndate)}]
                if scenario == "circular":
                    self.works[orig]["update-to"] = [{"DOI": notice, "type": kind, "updated": _cr_date(odate)}]
                self.works[notice] = work
            if scenario in ("pubmed", "both", "self", "pmid_only"):
                opmid, npmid = pmid, pmid + 1
                pmid += 2
                if scenario == "self":
                    self.articles[opmid] = (orig, "RETRACTED: " + title, odate, ("Retracted Publication",), ())
                    self.search.setdefault("retracted+publication[Publication+Type]", []).append(opmid)
                    continue
                ref = ref_for[kind]
                self.articles[opmid] = (orig, title, odate, ("Journal Article",), ((npmid, ref),))
                self.articles[npmid] = (None if scenario == "pmid_only" else notice, nt, ndate,
                                        ("Published Erratum",), ())
                self.search.setdefault(term_for[ref], []).append(opmid)
        for ids in self.search.values():
            ids.sort()

    # serialisations

    def article_xml(self, pmid: int) -> str:
        doi, title, date, types, notices = self.articles[pmid]
        ptypes = "".join(f"<PublicationType>{escape(t)}</PublicationType>" for t in types)
        eloc = f'<ELocationID EIdType="doi">{doi}</ELocationID>' if doi else ""
        pubdate = f"<Year>{date.year}</Year>"
        if date.month:
            pubdate += f"<Month>{date.month:02d}</Month>"
        if date.day:
            pubdate += f"<Day>{date.day:02d}</Day>"
        cc = "".join(
            f'<CommentsCorrections RefType="{ref}"><PMID>{n}</PMID></CommentsCorrections>' for n, ref in notices
        )
        ids = f'<ArticleId IdType="pubmed">{pmid}</ArticleId>'
        if doi:
            ids += f'<ArticleId IdType="doi">{doi}</ArticleId>'
        return (
            f"<PubmedArticle><MedlineCitation><PMID>{pmid}</PMID><Article>"
            f"<Journal><JournalIssue><PubDate>{pubdate}</PubDate></JournalIssue></Journal>"
            f"<ArticleTitle>{escape(title)}</ArticleTitle>{eloc}"
            f"<PublicationTypeList>{ptypes}</PublicationTypeList></Article>"
            f"<CommentsCorrectionsList>{cc}</CommentsCorrectionsList></MedlineCitation>"
            f"<PubmedData><ArticleIdList>{ids}</ArticleIdList></PubmedData></PubmedArticle>"
        )

    def efetch(self, pmids) -> str:
        body = "".join(self.article_xml(p) for p in pmids if p in self.articles)
        return f'<?xml version="1.0"?><PubmedArticleSet>{body}</PubmedArticleSet>'

    def write_crossref_snapshot(self, path, order_seed=None, files: int = 1):
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        dois = sorted(self.works)
        if order_seed is not None:
            random.Random(order_seed).shuffle(dois)
        for k in range(files):
            with (path / f"part{k}.jsonl").open("w", encoding="utf-8") as fh:
                for d in dois[k::files]:
                    fh.write(json.dumps({"message": self.works[d]}) + "\n")
        return path

    def write_pubmed_snapshot(self, path, order_seed=None):
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        search = {t: list(ids) for t, ids in self.search.items()}
        pmids = sorted(self.articles)
        if order_seed is not None:
            rng = random.Random(order_seed)
            for ids in search.values():
                rng.shuffle(ids)
            rng.shuffle(pmids)
        (path / "esearch.json").write_text(json.dumps(search), encoding="utf-8")
        half = len(pmids) // 2
        (path / "a.xml").write_text(self.efetch(pmids[:half]), encoding="utf-8")
        (path / "b.xml").write_text(self.efetch(pmids[half:]), encoding="utf-8")
        return path


def canonical_state(store: MetadataStore) -> dict:
    return {
        "publications": sorted(json.dumps(p.to_json(), sort_keys=True) for p in store.iter_publications()),
        "links": sorted(json.dumps(l.to_json(), sort_keys=True) for l in store.iter_links()),
        "pmid_only": sorted(json.dumps(r, sort_keys=True) for r in store.list_pmid_only()),
    }


# -- mock server ---------------------------------------------------------------


class MockApi:
    """Serves a Universe as Crossref ``/works`` and Eutils ``/esearch.fcgi`` / ``/efetch.fcgi``.

    Faults: every ``throttle_every``-th request answers 429 (with Retry-After
    ``retry_after``), and the cursor listed in ``fail_cursor_once`` answers
    500 the first time it is requested.
    """

    def __init__(self, universe: Universe, rows: int = 7, throttle_every: int = 0,
                 retry_after: str = "0", fail_cursor_once=None, fail_works=()):
        self.u = universe
        self.rows = rows
        self.throttle_every = throttle_every
        self.retry_after = retry_after
        self.fail_cursor_once = fail_cursor_once
        self.fail_works = set(fail_works)
        self.counts = Counter()
        self.lock = threading.Lock()
        self._n = 0
        api = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *a):
                pass

            def do_GET(self):
                api._handle(self)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.server.daemon_threads = True
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.server.server_address[1]}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()

    def _send(self, h, status, body=b"", ctype="application/json", headers=None):
        h.send_response(status)
        h.send_header("Content-Type", ctype)
        for k, v in (headers or {}).items():
            h.send_header(k, v)
        h.send_header("Content-Length", str(len(body)))
        h.end_headers()
        h.wfile.write(body)

    def _handle(self, h):
        parts = urlsplit(h.path)
        q = {k: v[0] for k, v in parse_qs(parts.query).items()}
        with self.lock:
            self._n += 1
            n = self._n
            self.counts["total"] += 1
        if self.throttle_every and n % self.throttle_every == 0:
            with self.lock:
                self.counts["429"] += 1
            return self._send(h, 429, b"{}", headers={"Retry-After": self.retry_after})
        path = unquote(parts.path)
        if path == "/works":
            return self._works_page(h, q)
        if path.startswith("/works/"):
            doi = path[len("/works/"):].lower()
            with self.lock:
                if doi in self.fail_works:
                    self.counts["500"] += 1
                    return self._send(h, 500, b"{}")
            work = self.u.works.get(doi)
            if work is None:
                return self._send(h, 404, b"{}")
            return self._send(h, 200, json.dumps({"status": "ok", "message": work}).encode())
        if path == "/esearch.fcgi":
            ids = self.u.search.get(q.get("term", "").replace(" ", "+"), [])
            start, size = int(q.get("retstart", 0)), int(q.get("retmax", 20))
            body = {"esearchresult": {"count": str(len(ids)),
                                      "idlist": [str(x) for x in ids[start:start + size]]}}
            return self._send(h, 200, json.dumps(body).encode())
        if path == "/efetch.fcgi":
            pmids = [int(x) for x in q.get("id", "").split(",") if x.strip().isdigit()]
            return self._send(h, 200, self.u.efetch(pmids).encode(), "text/xml")
        return self._send(h, 404, b"{}")

    def _works_page(self, h, q):
        cursor = q.get("cursor", "*")
        with self.lock:
            self.counts[f"cursor:{cursor}"] += 1
            if cursor == self.fail_cursor_once:
                self.fail_cursor_once = None
                self.counts["500"] += 1
                return self._send(h, 500, b"{}")
        rows = int(q.get("rows", self.rows))
        dois = sorted(self.u.works)
        start = 0 if cursor == "*" else int(cursor[1:])
        page = dois[start:start + rows]
        nxt = f"c{start + rows}"
        msg = {"items": [{"DOI": d.upper()} for d in page], "next-cursor": nxt,
               "total-results": len(dois)}
        return self._send(h, 200, json.dumps({"status": "ok", "message": msg}).encode())
