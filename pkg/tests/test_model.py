import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noticedetect.model import (
    Doi,
    InvalidRecord,
    MalformedDoi,
    NoticeLink,
    NoticeType,
    PartialDate,
    PublicationRecord,
    SourceTag,
    earliest,
    normalize_doi,
    normalize_title,
)


@pytest.mark.parametrize("raw, value", [
    ("10.1111/WVN.12426", "10.1111/wvn.12426"),
    ("https://doi.org/10.1111/j.1574-695X.2007.00329.x", "10.1111/j.1574-695x.2007.00329.x"),
    ("http://dx.doi.org/10.1016/S0140-6736%2897%2911096-0", "10.1016/s0140-6736(97)11096-0"),
    ("doi:10.1038/S41564-018-0174-Y", "10.1038/s41564-018-0174-y"),
    ("  10.1000.10/abc  ", "10.1000.10/abc"),
])
def test_normalize_doi(raw, value):
    assert normalize_doi(raw).value == value


def test_doi_prefix():
    d = normalize_doi("10.1111/WVN.12426")
    assert d.prefix == "10.1111"
    assert str(d) == "10.1111/wvn.12426"


@pytest.mark.parametrize("raw", ["not-a-doi", "", "   ", None, "10.1111/", "11.1111/x", "10.abc/x", "10.1/a b"])
def test_malformed_doi(raw):
    with pytest.raises(MalformedDoi):
        normalize_doi(raw)


def test_doi_constructor_rejects_mixed_case():
    with pytest.raises(MalformedDoi):
        Doi("10.1111/WVN")


@pytest.mark.parametrize("raw, out", [
    ("The role of nitric oxide in inflammatory reactions", "the role of nitric oxide in inflammatory reactions"),
    ("  Internet   Diabetes Management: A Practical Approach. ", "internet diabetes management: a practical approach"),
    ("", ""),
    (None, ""),
    ("To be continued...", "to be continued..."),
    ("Ends with two..", "ends with two.."),
    ("<i>Vibrio cholerae</i> pili", "vibrio cholerae pili"),
    ("&lt;b&gt;", "&lt;b&gt;"),
    ("Retraction of ‘High Activity’", "retraction of 'high activity'"),
    ("“Quoted”\tand\nspaced", '"quoted" and spaced'),
    ("ＦＵＬＬＷＩＤＴＨ", "fullwidth"),
    ("Straße", "strasse"),
])
def test_normalize_title(raw, out):
    assert normalize_title(raw) == out


def test_title_variants_collide():
    variants = [
        "High Activity and Selectivity",
        "high activity  and selectivity.",
        "HIGH ACTIVITY AND SELECTIVITY",
        " High Activity and Selectivity ",
    ]
    assert len({normalize_title(v) for v in variants}) == 1


@settings(max_examples=500)
@given(st.text())
def test_normalize_title_idempotent(s):
    once = normalize_title(s)
    assert normalize_title(once) == once


doi_text = st.from_regex(r"10\.[0-9]{1,6}/[A-Za-z0-9._;()/:-]{1,30}", fullmatch=True)


@settings(max_examples=500)
@given(doi_text)
def test_normalize_doi_idempotent(s):
    d = normalize_doi(s)
    assert normalize_doi(d.value) == d
    assert normalize_doi("https://doi.org/" + d.value) == d


def test_partial_date_parse_and_format():
    assert PartialDate.parse("2020-03-26") == PartialDate(2020, 3, 26)
    assert PartialDate.parse("2020-03").isoformat() == "2020-03"
    assert PartialDate.parse("2020").precision == 1
    assert PartialDate.parse("") is None
    with pytest.raises(ValueError):
        PartialDate.parse("March 2020")
    with pytest.raises(ValueError):
        PartialDate(2020, None, 3)
    with pytest.raises(ValueError):
        PartialDate(2021, 2, 30)


def test_partial_date_compare_at_shared_precision():
    assert PartialDate(2012).compare(PartialDate(2007)) > 0
    assert PartialDate(2006).compare(PartialDate(2007)) < 0
    assert PartialDate(2015).compare(PartialDate(2015)) == 0
    assert PartialDate(2015).compare(PartialDate(2015, 12, 31)) == 0
    assert PartialDate(2015, 3).compare(PartialDate(2015, 2, 28)) > 0


def test_earliest_prefers_precise_on_tie():
    assert earliest(PartialDate(2015), PartialDate(2015, 4, 2)) == PartialDate(2015, 4, 2)
    assert earliest(PartialDate(2014), PartialDate(2015, 4, 2)) == PartialDate(2014)
    assert earliest(None, PartialDate(2014)) == PartialDate(2014)
    assert earliest(None, None) is None


def test_publication_record():
    rec = PublicationRecord("10.1111/WVN.12418", "Some <i>Title</i>.", PartialDate(2020))
    assert rec.doi.value == "10.1111/wvn.12418"
    assert rec.normalized_title == "some title"
    assert rec.registrant_prefix == "10.1111"
    assert PublicationRecord.from_json(rec.to_json()) == rec
    assert rec.with_title("Other").normalized_title == "other"


def test_publication_year_bounds():
    with pytest.raises(InvalidRecord):
        PublicationRecord("10.1/x", "t", PartialDate(1499))
    with pytest.raises(InvalidRecord):
        PublicationRecord("10.1/x", "t", PartialDate(dt.date.today().year + 2))
    PublicationRecord("10.1/x", "t", PartialDate(dt.date.today().year + 1))


def test_notice_type_parse():
    assert NoticeType.parse("ExpressionOfConcern") is NoticeType.EXPRESSION_OF_CONCERN
    assert NoticeType.parse("expression of concern") is NoticeType.EXPRESSION_OF_CONCERN
    assert NoticeType.parse("Retraction") is NoticeType.RETRACTION
    with pytest.raises(ValueError):
        NoticeType.parse("bogus")


def test_notice_link_invariants():
    a, b = Doi("10.1/a"), Doi("10.1/b")
    with pytest.raises(InvalidRecord):
        NoticeLink(a, a, NoticeType.RETRACTION, None, frozenset({SourceTag.CROSSREF}))
    with pytest.raises(InvalidRecord):
        NoticeLink(a, b, NoticeType.RETRACTION, None, frozenset())
    with pytest.raises(InvalidRecord):
        NoticeLink(a, b, NoticeType.RETRACTION, None, frozenset({SourceTag.CROSSREF}), "guesswork")
    self_link = NoticeLink(a, a, NoticeType.RETRACTION, None, frozenset({SourceTag.PUBMED}), "drop_in_replacement")
    assert self_link.is_drop_in
    link = NoticeLink(a, b, NoticeType.ERRATUM, PartialDate(2020, 3), frozenset({SourceTag.CROSSREF}))
    assert link.type_from(SourceTag.CROSSREF) is NoticeType.ERRATUM
    assert NoticeLink.from_json(link.to_json()) == link
    row = link.to_json()
    assert row["notice_type"] == "erratum" and row["sources"] == ["crossref_update_to"]
    assert row["notice_date"] == "2020-03"
