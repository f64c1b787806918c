"""External-knowledge tools: date-limited web search and the domain credibility store."""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
import tempfile
import threading
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol, Sequence

import httpx

from .claims import NewsClaim, Veracity, format_publish_date, normalize_domain, render_descriptor
from .llm import Gateway
from .tools import DEFAULT_PROMPTS, PromptLibrary, Signal, ToolKind, ToolObservation, ask_parsed, parse_tool_output

log = logging.getLogger(__name__)

DEFAULT_MAX_RESULTS = 8
EMPTY_SEARCH_RATIONALE = "no corroborating or conflicting coverage found"


class SearchTransportError(Exception):
    pass


class MissingDomain(ValueError):
    pass


@dataclass(frozen=True)
class SearchQuery:
    query_text: str
    before_date: Optional[dt.date] = None
    max_results: int = DEFAULT_MAX_RESULTS

    def __post_init__(self) -> None:
        if not self.query_text.strip():
            raise ValueError("query_text must be non-empty")
        if self.max_results < 1:
            raise ValueError("max_results must be positive")


@dataclass(frozen=True)
class SearchResult:
    title: str
    snippet: str = ""
    source_url: str = ""
    published: Optional[dt.date] = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "SearchResult":
        published = d.get("published")
        if isinstance(published, str):
            published = dt.date.fromisoformat(published)
        return cls(d.get("title", ""), d.get("snippet", ""), d.get("source_url", ""), published)


@dataclass(frozen=True)
class SearchFindings:
    results: tuple[SearchResult, ...]
    conflict_summary: str
    observation: ToolObservation


class SearchProvider(Protocol):
    def search(self, query: SearchQuery) -> list[SearchResult]: ...


class StaticSearchProvider:
    """Offline provider answering from a mapping of query text to results; records every query.

    ``fail_on`` names queries that raise SearchTransportError, for failure-path tests.
    """

    def __init__(
        self,
        results: "Mapping[str, Sequence[SearchResult]] | Callable[[SearchQuery], Sequence[SearchResult]] | None" = None,
        fail_on: Iterable[str] = (),
    ):
        self._results = results or {}
        self._fail_on = set(fail_on)
        self._lock = threading.Lock()
        self.queries: list[SearchQuery] = []

    @classmethod
    def from_json(cls, path: "str | os.PathLike[str]") -> "StaticSearchProvider":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls({q: [SearchResult.from_dict(r) for r in rs] for q, rs in raw.items()})

    def search(self, query: SearchQuery) -> list[SearchResult]:
        with self._lock:
            self.queries.append(query)
        if query.query_text in self._fail_on:
            raise SearchTransportError(f"search failed for {query.query_text!r}")
        if callable(self._results):
            found = list(self._results(query))
        else:
            found = list(self._results.get(query.query_text, ()))
        return found[: query.max_results]


_SERP_DATE_FORMATS = ("%b %d, %Y", "%B %d, %Y", "%Y-%m-%d", "%m/%d/%Y", "%d %b %Y")


def _parse_serp_date(text: Optional[str]) -> Optional[dt.date]:
    if not text:
        return None
    for fmt in _SERP_DATE_FORMATS:
        try:
            return dt.datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            continue
    return None


class SerpApiSearch:
    """Google results via SerpApi with a custom date range ending the day before the cutoff."""

    endpoint = "https://serpapi.com/search.json"

    def __init__(self, api_key: Optional[str] = None, client: Optional[httpx.Client] = None, timeout: float = 30.0):
        self.api_key = api_key if api_key is not None else os.environ.get("SERPAPI_API_KEY")
        self._client = client or httpx.Client(timeout=timeout)

    def params(self, query: SearchQuery) -> dict[str, str]:
        params = {"engine": "google", "q": query.query_text, "num": str(query.max_results)}
        if query.before_date is not None:
            # cd_max is inclusive; the cutoff is exclusive
            last_day = query.before_date - dt.timedelta(days=1)
            params["tbs"] = f"cdr:1,cd_max:{format_publish_date(last_day)}"
        if self.api_key:
            params["api_key"] = self.api_key
        return params

    def search(self, query: SearchQuery) -> list[SearchResult]:
        try:
            resp = self._client.get(self.endpoint, params=self.params(query))
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise SearchTransportError(str(exc)) from exc
        results = []
        for item in payload.get("organic_results", [])[: query.max_results]:
            results.append(
                SearchResult(
                    title=item.get("title", ""),
                    snippet=item.get("snippet", ""),
                    source_url=item.get("link", ""),
                    published=_parse_serp_date(item.get("date")),
                )
            )
        return results


def build_search_query(claim: NewsClaim, max_results: int = DEFAULT_MAX_RESULTS) -> SearchQuery:
    return SearchQuery(claim.title, before_date=claim.publish_date, max_results=max_results)


def filter_before(results: Iterable[SearchResult], before_date: Optional[dt.date]) -> list[SearchResult]:
    """Drop dated results on or after the cutoff; undated ones are kept."""
    if before_date is None:
        return list(results)
    return [r for r in results if r.published is None or r.published < before_date]


def render_digest(results: Sequence[SearchResult]) -> str:
    lines = []
    for i, r in enumerate(results, 1):
        when = r.published.isoformat() if r.published else "undated"
        line = f"{i}. {r.title} ({when})"
        if r.snippet:
            line += f"\n   {r.snippet}"
        lines.append(line)
    return "\n".join(lines)


def run_search_tool(
    claim: NewsClaim,
    gateway: Gateway,
    search_provider: SearchProvider,
    max_results: int = DEFAULT_MAX_RESULTS,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> SearchFindings:
    query = build_search_query(claim, max_results)
    results = filter_before(search_provider.search(query), query.before_date)[:max_results]
    if not results:
        obs = ToolObservation(ToolKind.SEARCH, Signal.INCONCLUSIVE, EMPTY_SEARCH_RATIONALE, "")
        return SearchFindings((), EMPTY_SEARCH_RATIONALE, obs)

    prompt = prompts.render("search", descriptor=render_descriptor(claim), evidence=render_digest(results))
    (signal, rationale), raw = ask_parsed(gateway, prompt, parse_tool_output)
    obs = ToolObservation(ToolKind.SEARCH, signal, rationale, raw)
    return SearchFindings(tuple(results), rationale, obs)


@dataclass(frozen=True)
class DomainRecord:
    domain: str
    real_count: int = 0
    fake_count: int = 0
    last_updated: Optional[dt.date] = None
    llm_overview: Optional[str] = None

    def __post_init__(self) -> None:
        if self.real_count < 0 or self.fake_count < 0:
            raise ValueError("counts must be non-negative")
        if self.domain != self.domain.lower():
            raise ValueError(f"domain must be lower-case: {self.domain!r}")

    def to_json(self) -> str:
        d = asdict(self)
        d["last_updated"] = self.last_updated.isoformat() if self.last_updated else None
        return json.dumps(d, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "DomainRecord":
        d = json.loads(line)
        updated = d.get("last_updated")
        return cls(
            domain=d["domain"],
            real_count=int(d.get("real_count", 0)),
            fake_count=int(d.get("fake_count", 0)),
            last_updated=dt.date.fromisoformat(updated) if updated else None,
            llm_overview=d.get("llm_overview"),
        )


class DomainStore:
    """Verified-domain history kept in a JSON-lines file.

    Every write rewrites the whole file through a temp file and ``os.replace``,
    so a concurrent reader opening the path sees either the old or the new
    file, never a partial one. Writes are serialized by a lock.
    """

    def __init__(self, path: "str | os.PathLike[str]"):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, DomainRecord] = {}
        self.reload()

    def reload(self) -> None:
        records = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        rec = DomainRecord.from_json(line)
                    except (ValueError, KeyError) as exc:
                        raise ValueError(f"{self.path}:{lineno}: bad domain record: {exc}") from exc
                    records[rec.domain] = rec
        with self._lock:
            self._records = records

    def get(self, domain: str) -> Optional[DomainRecord]:
        key = normalize_domain(domain)
        with self._lock:
            return self._records.get(key)

    def snapshot(self) -> dict[str, DomainRecord]:
        with self._lock:
            return dict(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def put(self, record: DomainRecord) -> None:
        with self._lock:
            records = dict(self._records)
            records[record.domain] = record
            self._write(records)
            self._records = records

    def update(self, domain: str, change: Callable[[DomainRecord], DomainRecord]) -> DomainRecord:
        key = normalize_domain(domain)
        with self._lock:
            current = self._records.get(key) or DomainRecord(key)
            new = change(current)
            records = dict(self._records)
            records[key] = new
            self._write(records)
            self._records = records
            return new

    def _write(self, records: Mapping[str, DomainRecord]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{self.path.name}.", dir=self.path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for key in sorted(records):
                    fh.write(records[key].to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def record_verification(
    store: DomainStore,
    domain: str,
    label: Veracity,
    when: dt.date,
    overview: Optional[str] = None,
) -> DomainRecord:
    if not domain or not domain.strip():
        raise ValueError("domain must be non-empty")
    label = Veracity(label)

    def bump(rec: DomainRecord) -> DomainRecord:
        return replace(
            rec,
            real_count=rec.real_count + (label is Veracity.REAL),
            fake_count=rec.fake_count + (label is Veracity.FAKE),
            last_updated=when,
            llm_overview=overview if overview is not None else rec.llm_overview,
        )

    return store.update(domain, bump)


def describe_history(domain: str, record: Optional[DomainRecord]) -> str:
    if record is None or record.real_count + record.fake_count == 0:
        return f"Verification history: no prior verification history for {domain}."
    updated = f", last updated {record.last_updated.isoformat()}" if record.last_updated else ""
    return (
        f"Verification history: {record.real_count} news item(s) from {domain} verified real "
        f"and {record.fake_count} verified fake{updated}."
    )


def run_url_tool(
    claim: NewsClaim,
    gateway: Gateway,
    store: DomainStore,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> ToolObservation:
    if not claim.domain_url:
        raise MissingDomain(f"claim {claim.claim_id} has no domain URL")
    domain = claim.domain_url
    descriptor = render_descriptor(claim)
    overview = gateway.ask(prompts.render("url_overview", descriptor=descriptor, domain=domain)).strip()
    record = store.get(domain)
    evidence = f"Overview of {domain}:\n{overview or '(no overview available)'}\n\n{describe_history(domain, record)}"
    prompt = prompts.render("url", descriptor=descriptor, evidence=evidence, domain=domain)
    (signal, rationale), raw = ask_parsed(gateway, prompt, parse_tool_output)
    return ToolObservation(ToolKind.URL, signal, rationale, raw)
