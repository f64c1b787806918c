import datetime as dt
import json

import httpx
import pytest

from factagent.claims import NewsClaim, Veracity
from factagent.evidence import (
    EMPTY_SEARCH_RATIONALE,
    DomainRecord,
    DomainStore,
    MissingDomain,
    SearchQuery,
    SearchResult,
    SearchTransportError,
    SerpApiSearch,
    StaticSearchProvider,
    filter_before,
    record_verification,
    render_digest,
    run_search_tool,
    run_url_tool,
)
from factagent.llm import Gateway, ScriptedProvider
from factagent.tools import Signal, ToolKind

from conftest import hits


def gw(*replies):
    provider = ScriptedProvider(replies)
    return provider, Gateway(provider)


def test_search_query_uses_title_and_date(riverdale):
    search = StaticSearchProvider()
    provider, g = gw()
    run_search_tool(riverdale, g, search)
    assert search.queries == [SearchQuery(riverdale.title, dt.date(2017, 4, 25), 8)]


def test_empty_results_skip_llm(riverdale):
    provider, g = gw()
    findings = run_search_tool(riverdale, g, StaticSearchProvider())
    assert findings.observation.signal is Signal.INCONCLUSIVE
    assert findings.observation.rationale == EMPTY_SEARCH_RATIONALE
    assert provider.transcript == []


def test_search_digest_and_verdict(riverdale):
    search = StaticSearchProvider({riverdale.title: hits(3)})
    provider, g = gw("VERDICT: FAKE\ntwo outlets report the opposite")
    findings = run_search_tool(riverdale, g, search)
    assert findings.observation.tool is ToolKind.SEARCH
    assert findings.observation.signal is Signal.SUPPORTS_FAKE
    assert len(findings.results) == 3
    prompt = provider.transcript[0].user_text
    assert "1. headline 0 (undated)" in prompt and "3. headline 2" in prompt


def test_results_on_or_after_cutoff_dropped(riverdale):
    cutoff = riverdale.publish_date
    results = [
        SearchResult("before", published=cutoff - dt.timedelta(days=1)),
        SearchResult("same day", published=cutoff),
        SearchResult("after", published=cutoff + dt.timedelta(days=3)),
        SearchResult("undated"),
    ]
    assert [r.title for r in filter_before(results, cutoff)] == ["before", "undated"]
    assert len(filter_before(results, None)) == 4


def test_max_results_respected(riverdale):
    search = StaticSearchProvider({riverdale.title: hits(20)})
    provider, g = gw("x\nVERDICT: REAL")
    findings = run_search_tool(riverdale, g, search, max_results=5)
    assert len(findings.results) == 5
    assert search.queries[0].max_results == 5


def test_search_transport_error_propagates(riverdale):
    search = StaticSearchProvider(fail_on=[riverdale.title])
    with pytest.raises(SearchTransportError):
        run_search_tool(riverdale, gw()[1], search)


def test_digest_numbering():
    digest = render_digest([SearchResult("a", "sa", published=dt.date(2017, 1, 2)), SearchResult("b")])
    assert digest == "1. a (2017-01-02)\n   sa\n2. b (undated)"


def test_serpapi_params_and_parsing():
    seen = {}

    def handler(request):
        seen.update(dict(request.url.params))
        return httpx.Response(
            200,
            json={
                "organic_results": [
                    {"title": "t1", "snippet": "s1", "link": "https://a", "date": "Apr 20, 2017"},
                    {"title": "t2", "snippet": "s2", "link": "https://b"},
                ]
            },
        )

    serp = SerpApiSearch("key", client=httpx.Client(transport=httpx.MockTransport(handler)))
    results = serp.search(SearchQuery("some claim", dt.date(2017, 4, 25), 5))
    assert seen["q"] == "some claim" and seen["num"] == "5" and seen["api_key"] == "key"
    assert seen["tbs"] == "cdr:1,cd_max:04/24/2017"
    assert results[0].published == dt.date(2017, 4, 20)
    assert results[1].published is None


def test_serpapi_error():
    serp = SerpApiSearch("key", client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(500))))
    with pytest.raises(SearchTransportError):
        serp.search(SearchQuery("q"))


def test_url_tool_known_domain(riverdale, store):
    record_verification(store, "tvline.com", Veracity.REAL, dt.date(2017, 1, 1))
    for _ in range(4):
        record_verification(store, "tvline.com", Veracity.REAL, dt.date(2017, 1, 1))
    provider, g = gw("An entertainment news site.", "VERDICT: REAL\nestablished entertainment outlet, clean history")
    obs = run_url_tool(riverdale, g, store)
    assert (obs.tool, obs.signal) == (ToolKind.URL, Signal.SUPPORTS_REAL)
    assert len(provider.transcript) == 2
    second = provider.transcript[1].user_text
    assert "An entertainment news site." in second
    assert "5 news item(s) from tvline.com verified real and 0 verified fake" in second


def test_url_tool_unknown_domain(riverdale, store):
    provider, g = gw("Not sure.", "VERDICT: UNCERTAIN\nno history")
    obs = run_url_tool(riverdale, g, store)
    assert obs.signal is Signal.INCONCLUSIVE
    assert "no prior verification history" in provider.transcript[1].user_text


def test_url_tool_requires_domain(store):
    with pytest.raises(MissingDomain):
        run_url_tool(NewsClaim("t"), gw()[1], store)


def test_record_creates_and_increments(store):
    rec = record_verification(store, "x.com", Veracity.FAKE, dt.date(2020, 1, 1))
    assert (rec.domain, rec.real_count, rec.fake_count) == ("x.com", 0, 1)
    rec = record_verification(store, "x.com", Veracity.FAKE, dt.date(2020, 1, 2))
    assert rec.fake_count == 2 and rec.last_updated == dt.date(2020, 1, 2)


def test_record_durable(tmp_path):
    store = DomainStore(tmp_path / "d.jsonl")
    record_verification(store, "x.com", Veracity.FAKE, dt.date(2020, 1, 1))
    record_verification(store, "y.org", Veracity.REAL, dt.date(2020, 1, 1), overview="a blog")
    reopened = DomainStore(tmp_path / "d.jsonl")
    assert reopened.snapshot() == store.snapshot()
    assert reopened.get("y.org").llm_overview == "a blog"
    lines = (tmp_path / "d.jsonl").read_text().splitlines()
    assert [json.loads(l)["domain"] for l in lines] == ["x.com", "y.org"]
    assert set(json.loads(lines[0])) == {"domain", "real_count", "fake_count", "last_updated", "llm_overview"}


def test_domain_lookup_is_case_insensitive(store):
    record_verification(store, "TVLine.com", Veracity.REAL, dt.date(2020, 1, 1))
    assert store.get("tvline.com") == store.get("TVLine.com") == store.get("https://www.tvline.com/x")
    assert len(store) == 1


def test_record_rejects_bad_input(store):
    with pytest.raises(ValueError):
        record_verification(store, " ", Veracity.REAL, dt.date(2020, 1, 1))
    with pytest.raises(ValueError):
        DomainRecord("X.com")
    with pytest.raises(ValueError):
        DomainRecord("x.com", real_count=-1)


def test_corrupt_store_line_reported(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"domain": "a.com", "real_count": 1, "fake_count": 0}\nnot json\n')
    with pytest.raises(ValueError, match=":2:"):
        DomainStore(path)


def test_no_temp_files_left(tmp_path):
    store = DomainStore(tmp_path / "d.jsonl")
    for i in range(5):
        record_verification(store, f"d{i}.com", Veracity.REAL, dt.date(2020, 1, 1))
    assert [p.name for p in tmp_path.iterdir()] == ["d.jsonl"]
