"""
Search cutoffs and domain history
=================================

Search results are restricted to coverage published before the claim, and
the domain history records how earlier claims from a site were judged.
"""

import datetime as dt
import tempfile
from pathlib import Path

from factagent import NewsClaim
from factagent.evidence import (
    DomainStore,
    SearchResult,
    StaticSearchProvider,
    build_search_query,
    describe_history,
    filter_before,
    record_verification,
    render_digest,
)

claim = NewsClaim.create("Singer cancels remaining tour dates after vocal cord surgery", "variety.com", "02/11/2018")
query = build_search_query(claim)
print(query)

results = [
    SearchResult("Tour dates pulled", "The singer's team said...", "https://a.example", dt.date(2018, 2, 9)),
    SearchResult("Recovery update", "Months later...", "https://b.example", dt.date(2018, 6, 1)),
    SearchResult("Fan reactions", "Undated blog post", "https://c.example", None),
]
# the later article is dropped; the undated one is kept and marked
kept = filter_before(results, query.before_date)
print(render_digest(kept))

# the static provider records every query it receives
provider = StaticSearchProvider({claim.title: results})
provider.search(query)
print(provider.queries)

store = DomainStore(Path(tempfile.mkdtemp()) / "domains.jsonl")
print(describe_history("variety.com", store.get("variety.com")))
record_verification(store, "www.variety.com", "real", dt.date(2018, 1, 20))
record_verification(store, "https://variety.com/x", "fake", dt.date(2018, 2, 1))
print(describe_history("variety.com", store.get("variety.com")))

# the file survives a reopen
print(DomainStore(store.path).snapshot())
