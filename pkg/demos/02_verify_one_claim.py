"""
Verifying one claim offline
===========================

The workflow talks to the model only through a Gateway. A ScriptedProvider
plays back canned replies, which makes a run fully reproducible.
"""

import datetime as dt
import tempfile
from pathlib import Path

from factagent import NewsClaim
from factagent.evidence import DomainStore, SearchResult, StaticSearchProvider
from factagent.llm import Gateway, ScriptedProvider
from factagent.workflow import Services, Strategy, render_report, verify_claim

claim = NewsClaim.create(
    "Senator proposes ban on all cars by 2025", url="politicsnow.com", date="01/15/2020", claim_id="senate"
)

# replies in call order: politics gate, four internal tools, domain
# overview, URL judgement, search digest, checklist summary
replies = [
    "ANSWER: POLITICAL\nThe headline concerns a lawmaker.",
    "The headline uses an alarming absolute.\nVERDICT: FAKE",
    "Grammar and capitalization are normal.\nVERDICT: REAL",
    "A total ban within five years is implausible.\nVERDICT: FAKE",
    "The framing targets a partisan audience.\nVERDICT: FAKE",
    "politicsnow.com is a small site with little editorial information.",
    "No track record and an opinionated style.\nVERDICT: UNCERTAIN",
    "Earlier coverage describes a much narrower emissions proposal.\nVERDICT: FAKE",
    "Most checklist items fail, and the evidence contradicts the claim.\nVERDICT: FAKE",
]

search = StaticSearchProvider({
    claim.title: [
        SearchResult("Senator floats tighter emissions rules", "A proposal on vehicle emissions...",
                     "https://example.org/a", dt.date(2020, 1, 10)),
    ]
})
store = DomainStore(Path(tempfile.mkdtemp()) / "domains.jsonl")

provider = ScriptedProvider(replies)
services = Services(Gateway(provider), search, store)
verdict = verify_claim(claim, services)
print(render_report(claim, verdict))

# every request the workflow made is kept on the provider
print(len(provider.transcript), "model calls")

# majority voting skips the final summary call
provider = ScriptedProvider(replies[:-1])
verdict = verify_claim(claim, Services(Gateway(provider), search, store), strategy=Strategy.MAJORITY)
print(verdict.label, "-", verdict.reasoning)
