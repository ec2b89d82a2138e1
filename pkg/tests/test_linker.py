from noticedetect.config import default_config
from noticedetect.linker import (
    Kind,
    Reason,
    detect_all,
    resolve,
    safeguard_date,
    safeguard_not_notice,
    safeguard_prefix,
)
from noticedetect.model import Doi, NoticeLink, NoticeType, PartialDate, PublicationRecord, SourceTag
from noticedetect.store import MetadataStore
from noticedetect.titles import classify_title

from support import PAPER_COUNTS, PAPER_EXPECTED, canonical_state, paper_config, paper_store

CONFIG = default_config()


def pub(doi, title, date=None, known=False):
    return PublicationRecord(Doi(doi), title, PartialDate.parse(date), known)


def store_of(*recs):
    s = MetadataStore()
    for r in recs:
        s.upsert_publication(r)
    return s


def run(store, notice, config=CONFIG):
    return resolve(notice, classify_title(notice.title, config), store, config)


def test_safeguards():
    assert safeguard_date(pub("10.1/n", "x", "2006"), pub("10.1/t", "y", "2007")) is Reason.DATE_ORDER
    assert safeguard_date(pub("10.1/n", "x", "2012"), pub("10.1/t", "y", "2007")) is None
    assert safeguard_date(pub("10.1/n", "x", "2015"), pub("10.1/t", "y", "2015-12-31")) is None
    assert safeguard_date(pub("10.1/n", "x"), pub("10.1/t", "y", "2015")) is None
    assert safeguard_prefix(Doi("10.1/a"), Doi("10.2/b")) is Reason.PREFIX_MISMATCH
    assert safeguard_prefix(Doi("10.1/a"), Doi("10.1/b")) is None
    assert safeguard_not_notice(pub("10.1/t", "Plain"), CONFIG) is None
    assert safeguard_not_notice(pub("10.1/t", "Plain", known=True), CONFIG) is Reason.TARGET_IS_NOTICE
    assert safeguard_not_notice(pub("10.1/t", "Retraction note: Plain thing"), CONFIG) is Reason.TARGET_IS_NOTICE


def test_each_rejection_reason():
    target = pub("10.1/t", "A study of things", "2010")
    s = store_of(target)
    assert run(s, pub("10.1/n", "Erratum: A study of things", "2009")).reason is Reason.DATE_ORDER
    assert run(s, pub("10.2/n", "Erratum: A study of things", "2011")).reason is Reason.PREFIX_MISMATCH
    wl = CONFIG.with_whitelist(["10.1/t"])
    r = run(s, pub("10.1/n", "Erratum: A study of things", "2011"), wl)
    assert r.kind is Kind.REJECTED and r.reason is Reason.WHITELISTED and r.target == Doi("10.1/t")
    wl = CONFIG.with_whitelist(["10.1/n"])
    assert run(s, pub("10.1/n", "Erratum: A study of things", "2011"), wl).reason is Reason.WHITELISTED


def test_target_that_is_itself_a_notice():
    inner = pub("10.1/t", "Retraction note: X", "2010")
    s = store_of(inner)
    r = run(s, pub("10.1/n", "Erratum: Retraction note: X", "2012"))
    assert r.kind is Kind.REJECTED and r.reason is Reason.TARGET_IS_NOTICE
    s = store_of(pub("10.1/t", "Another study here", "2010", known=True))
    assert run(s, pub("10.1/n", "Erratum: Another study here", "2012")).reason is Reason.TARGET_IS_NOTICE


def test_notice_does_not_match_itself():
    s = store_of(pub("10.1/n", "WITHDRAWN: Only me", "2012"))
    r = run(s, s.get_publication(Doi("10.1/n")))
    assert r.kind is Kind.DROP_IN_SELF and r.target == Doi("10.1/n")


def test_empty_store():
    s = MetadataStore()
    report = detect_all(s, CONFIG)
    assert report.total == 0 and s.iter_links() == []


def test_paper_fixture_partition():
    s = paper_store()
    report = detect_all(s, paper_config())
    got = {d: (r.kind.value, r.target.value if r.target else None) for d, r in report.resolutions.items()}
    for doi, (kind, target) in PAPER_EXPECTED.items():
        assert got[doi][0] == kind
        if kind in ("linked", "drop_in_self"):
            assert got[doi][1] == target
    js = report.to_json()
    for k, v in PAPER_COUNTS.items():
        assert js[k] == v
    assert js["total"] == sum(PAPER_COUNTS.values())
    assert len(s.list_pending()) == 1 and len(s.list_generic()) == 1


def test_rerun_is_idempotent():
    s = paper_store()
    detect_all(s, paper_config())
    first = canonical_state(s)
    pending = [p.to_json() for p in s.list_pending()]
    detect_all(s, paper_config())
    assert canonical_state(s) == first
    assert [p.to_json() for p in s.list_pending()] == pending


def test_detection_keeps_metadata_links():
    s = paper_store()
    s.record_notice_link(NoticeLink(Doi("10.1016/j.jcjd.2016.02.011"), Doi("10.1016/j.jcjd.2015.01.002"),
                                    NoticeType.RETRACTION, None, frozenset({SourceTag.CROSSREF})))
    detect_all(s, paper_config())
    link = next(l for l in s.iter_links() if l.notice_doi.value == "10.1016/j.jcjd.2016.02.011")
    assert link.sources == {SourceTag.CROSSREF, SourceTag.TITLE_DETECTION}
    assert link.type_from(SourceTag.TITLE_DETECTION) is NoticeType.WITHDRAWAL
    assert link.type_from(SourceTag.CROSSREF) is NoticeType.RETRACTION


def test_detection_does_not_mark_known_notice():
    s = paper_store()
    detect_all(s, paper_config())
    assert not any(p.is_known_notice for p in s.iter_publications())
