import datetime as dt

import pytest

from factagent.claims import NewsClaim
from factagent.evidence import DomainStore, SearchResult, StaticSearchProvider
from factagent.llm import Gateway, ScriptedProvider
from factagent.workflow import Services, WorkflowConfig


def scripted(replies, search=None, store=None, config=WorkflowConfig(), max_calls=64):
    """(provider, services) over a fresh scripted provider."""
    provider = ScriptedProvider(replies)
    gateway = Gateway(provider, max_calls=max_calls, sleep=lambda s: None)
    return provider, Services(gateway, search or StaticSearchProvider(), store, config=config)


def hits(n, published=None):
    return [SearchResult(f"headline {i}", f"snippet {i}", f"https://n{i}.example", published) for i in range(n)]


@pytest.fixture
def store(tmp_path):
    return DomainStore(tmp_path / "domains.jsonl")


@pytest.fixture
def riverdale():
    return NewsClaim(
        "Riverdale Set to Recast a Major Character Ahead of Season 2",
        "tvline.com",
        dt.date(2017, 4, 25),
        claim_id="riverdale",
    )


@pytest.fixture
def senate():
    return NewsClaim("Senator proposes ban on all cars by 2025", "politicsnow.com", dt.date(2020, 1, 15), "senate")


@pytest.fixture
def snopes():
    return NewsClaim("Shark swims down flooded highway", claim_id="shark")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
