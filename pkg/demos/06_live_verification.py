"""
Verifying against a live model
==============================

With credentials in the environment the same workflow runs against an
OpenAI-compatible chat endpoint and SerpApi. Without them this script
only explains what is missing.
"""

import os
import sys
import tempfile
from pathlib import Path

from factagent import NewsClaim
from factagent.evidence import DomainStore, SerpApiSearch
from factagent.llm import Gateway, HTTPChatProvider
from factagent.workflow import Services, render_report, verify_claim

if not (os.environ.get("FACTAGENT_LLM_API_KEY") or os.environ.get("OPENAI_API_KEY")) or not os.environ.get(
    "SERPAPI_API_KEY"
):
    print("set FACTAGENT_LLM_API_KEY and SERPAPI_API_KEY to run this demo")
    sys.exit(0)

claim = NewsClaim.create(
    "Riverdale Set to Recast a Major Character Ahead of Season 2", "tvline.com", "04/25/2017"
)
services = Services(
    Gateway(HTTPChatProvider.from_env()),
    SerpApiSearch(),
    DomainStore(Path(tempfile.mkdtemp()) / "domains.jsonl"),
)
verdict = verify_claim(claim, services)
print(render_report(claim, verdict))
print(services.gateway.calls, "model calls")
