"""Regenerate the shipped 12-claim fixture (dataset, search results, domain history, LLM scripts).

Each claim's row below fixes the politics answer, one signal per tool, the
number of search hits, and the checklist replies. The scripts are the replies
an LLM would give in call order, so the fixture's verdicts can be worked out
by hand from this table.

    python scripts/build_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

from factagent.llm import dump_script

OUT = Path(__file__).resolve().parents[1] / "src" / "factagent" / "data" / "fixture"

RATIONALE = {
    "Phrase": {
        "R": "The wording is plain and descriptive, with no teaser or emotional hook.",
        "F": "The headline relies on a sensational hook and exaggerated language.",
        "U": "The phrasing is somewhat dramatic but within the range of normal headlines.",
    },
    "Language": {
        "R": "Grammar, capitalization and quotation marks are all used normally.",
        "F": "The headline has odd capitalization and a misused quotation mark.",
        "U": "There is a minor stylistic quirk, but nothing clearly wrong.",
    },
    "Commonsense": {
        "R": "The event described is ordinary and consistent with what is publicly known.",
        "F": "The claim contradicts well-known facts and reads like a rumour.",
        "U": "The claim is plausible but cannot be judged from general knowledge alone.",
    },
    "Standing": {
        "R": "The item reports a political event without taking sides.",
        "F": "The item frames one side as villains and plays to a partisan audience.",
        "U": "There is some slant, but the core statement is factual.",
    },
    "Url": {
        "R": "The domain is an established outlet with a clean verification record.",
        "F": "The domain is known for fabricated stories and has a poor record.",
        "U": "Little is known about this domain and there is no history to go on.",
    },
    "Search": {
        "R": "Several independent outlets report the same facts before the publish date.",
        "F": "Earlier coverage from other outlets directly contradicts the claim.",
        "U": "Coverage mentions the topic but neither confirms nor refutes the claim.",
    },
}

VERDICT_WORD = {"R": "REAL", "F": "FAKE", "U": "UNCERTAIN"}

# id, gold label, source, title, url, date, political, signals, search hits,
# checklist replies, self-designed planner reply, self-designed checklist replies
CLAIMS = [
    dict(
        id="fx01", label="true", source="politifact",
        title="Senate passes bipartisan infrastructure bill after weeks of negotiation",
        url="https://www.reuters.com/politics/senate-infrastructure", date="08/10/2021",
        political=True, signals=dict(Phrase="R", Language="R", Commonsense="R", Standing="R", Url="R", Search="R"),
        hits=3, final=["REAL"], planner="Phrase, Commonsense, Standing, Search", self_final=["REAL"],
    ),
    dict(
        id="fx02", label="pants-fire", source="politifact",
        title="Governor SECRETLY signs order to confiscate every hunting rifle in the state",
        url="yournewswire.com", date="2018-03-14",
        political=True, signals=dict(Phrase="F", Language="F", Commonsense="F", Standing="F", Url="F", Search="F"),
        hits=3, final=["FAKE"],
        planner="1. Phrase_tool\n2. Language_tool\n3. Standing_tool\n4. Search_tool", self_final=["FAKE"],
    ),
    dict(
        id="fx03", label="barely-true", source="politifact",
        title="Congressman says new tax plan will double every family's bill overnight",
        url="dailypoliticalwire.net", date="11/02/2019",
        political=True, signals=dict(Phrase="F", Language="R", Commonsense="F", Standing="F", Url="U", Search="R"),
        hits=2, final=["FAKE"], planner="Commonsense, Search, Commonsense, Factcheck", self_final=["FAKE"],
    ),
    dict(
        id="fx04", label="mostly-true", source="politifact",
        title="City council approves budget with modest increase for public transit",
        url="apnews.com", date="06/30/2020",
        political=True, signals=dict(Phrase="F", Language="R", Commonsense="R", Standing="F", Url="R", Search="U"),
        hits=0, final=["REAL"], planner="Phrase, Url, Search", self_final=["REAL"],
    ),
    dict(
        id="fx05", label="true", source="gossipcop",
        title="Riverdale Set to Recast a Major Character Ahead of Season 2",
        url="tvline.com", date="04/25/2017",
        political=False, signals=dict(Phrase="R", Language="R", Commonsense="U", Url="R", Search="R"),
        hits=2, final=["REAL"], planner="Phrase, Language, Commonsense, Search", self_final=["REAL"],
    ),
    dict(
        id="fx06", label="false", source="gossipcop",
        title="Pop star FAKED her own wedding to hide SHOCKING secret, insiders reveal",
        url="hollywoodgossipdaily.co", date="2019-09-01",
        political=False, signals=dict(Phrase="F", Language="F", Commonsense="F", Url="U", Search="F"),
        hits=1, final=["FAKE"], planner="Phrase, Standing, Commonsense", self_final=["FAKE"],
    ),
    dict(
        id="fx07", label="fake", source="gossipcop",
        title="Actor quietly buys private island to escape fame, sources say",
        url="celebbuzzwire.com", date="07/19/2018",
        political=False, signals=dict(Phrase="R", Language="R", Commonsense="F", Url="F", Search="U"),
        hits=2, final=["UNCERTAIN", "FAKE"], planner="Language, Commonsense, Search", self_final=["FAKE"],
    ),
    dict(
        id="fx08", label="real", source="gossipcop",
        title="Singer cancels remaining tour dates after vocal cord surgery",
        url="variety.com", date="02/11/2018",
        political=False, signals=dict(Phrase="F", Language="R", Commonsense="F", Url="R", Search="R"),
        hits=3, final=["FAKE"], planner="Phrase, Commonsense, Search", self_final=["FAKE"],
    ),
    dict(
        id="fx09", label="false", source="snopes",
        title="Drinking hot water with lemon cures cancer, doctors stunned",
        url=None, date=None,
        political=False, signals=dict(Phrase="F", Language="U", Commonsense="F", Search="F"),
        hits=2, final=["FAKE"], planner="Phrase, Url, Search", self_final=["FAKE"],
    ),
    dict(
        id="fx10", label="false", source="snopes",
        title="Airline adds a fee for passengers who recline their seats",
        url=None, date=None,
        political=False, signals=dict(Phrase="R", Language="R", Commonsense="R", Search="U"),
        hits=1, final=["REAL"], planner="Commonsense, Search", self_final=["REAL"],
    ),
    dict(
        id="fx11", label="half-true", source="snopes",
        title="State legislature votes to extend early voting hours",
        url=None, date=None,
        political=True, signals=dict(Phrase="R", Language="R", Commonsense="R", Standing="F", Search="R"),
        hits=2, final=["UNCERTAIN", "UNCERTAIN"],
        planner="Phrase, Commonsense, Standing, Search", self_final=["UNCERTAIN", "UNCERTAIN"],
    ),
    dict(
        id="fx12", label="pants-fire", source="snopes",
        title="Photo shows shark swimming down flooded highway after hurricane",
        url=None, date=None,
        political=False, signals=dict(Phrase="F", Language="FAIL", Commonsense="U", Search="R"),
        hits=1, final=["FAKE"], planner="Sure! I would use: Phrase, Commonsense, Search", self_final=["FAKE"],
        politics_reprompt=True,
    ),
]

EXPERT_ORDER = ["Phrase", "Language", "Commonsense", "Standing", "Url", "Search"]
FINAL_RATIONALE = {
    "REAL": "Most checklist items are satisfied and the evidence points to a genuine report.",
    "FAKE": "Several checklist items are violated, so the claim is most likely fabricated.",
    "UNCERTAIN": "The observations conflict and do not settle the question.",
}

DOMAINS = [
    dict(domain="reuters.com", real_count=9, fake_count=0, last_updated="2021-07-30", llm_overview=None),
    dict(domain="apnews.com", real_count=7, fake_count=0, last_updated="2020-06-01", llm_overview=None),
    dict(domain="tvline.com", real_count=5, fake_count=0, last_updated="2017-03-02", llm_overview=None),
    dict(domain="variety.com", real_count=6, fake_count=1, last_updated="2018-01-20", llm_overview=None),
    dict(domain="yournewswire.com", real_count=0, fake_count=14, last_updated="2018-02-28", llm_overview=None),
    dict(domain="celebbuzzwire.com", real_count=1, fake_count=4, last_updated="2018-05-05", llm_overview=None),
]


def tool_replies(tool: str, signal: str, domain: str | None) -> list[str]:
    if signal == "FAIL":
        return ["I am not able to assess this headline.", "Still not sure what to say here."]
    reply = f"{RATIONALE[tool][signal]}\nVERDICT: {VERDICT_WORD[signal]}"
    if tool == "Url":
        return [f"{domain} is a news website; its reputation is summarised from general knowledge.", reply]
    return [reply]


def claim_script(c: dict, steps: list[str], finals: list[str], planner: str | None) -> list[str]:
    domain = None
    if c["url"]:
        from factagent.claims import normalize_domain

        domain = normalize_domain(c["url"])
    replies = []
    if c.get("politics_reprompt"):
        replies.append("Hard to say.")
    answer = "POLITICAL" if c["political"] else "NOT_POLITICAL"
    replies.append(f"ANSWER: {answer}\nThe item is {'' if c['political'] else 'not '}about politics.")
    if planner is not None:
        replies.append(planner)
    for tool in steps:
        if tool == "Search" and c["hits"] == 0:
            continue
        replies.extend(tool_replies(tool, c["signals"][tool], domain))
    for word in finals:
        replies.append(f"{FINAL_RATIONALE[word]}\nVERDICT: {word}")
    return replies


def self_steps(c: dict) -> list[str]:
    from factagent.workflow import parse_plan_reply

    steps = []
    for _, kind in parse_plan_reply(c["planner"]):
        if kind is None or kind.value in steps:
            continue
        if kind.value == "Standing" and not c["political"]:
            continue
        if kind.value == "Url" and not c["url"]:
            continue
        steps.append(kind.value)
    return steps


def search_results(c: dict) -> list[dict]:
    out = []
    for i in range(c["hits"]):
        out.append(
            dict(
                title=f"Coverage {i + 1} related to: {c['title'][:48]}",
                snippet=f"Report {i + 1} discussing the events in the claim.",
                source_url=f"https://news{i + 1}.example.org/story",
                published="2000-01-0%d" % (i + 1),
            )
        )
    if c["id"] == "fx02":
        # published after the claim date; the client-side cutoff must drop it
        out.append(dict(title="Later follow-up piece", snippet="Published after the claim.",
                        source_url="https://late.example.org/x", published="2019-01-01"))
    return out


def main() -> None:
    for sub in ("scripts/expert", "scripts/self-designed"):
        (OUT / sub).mkdir(parents=True, exist_ok=True)
    with (OUT / "dataset.jsonl").open("w", encoding="utf-8") as fh:
        for c in CLAIMS:
            row = {"id": c["id"], "title": c["title"], "label": c["label"], "source": c["source"]}
            if c["url"]:
                row["url"] = c["url"]
            if c["date"]:
                row["date"] = c["date"]
            fh.write(json.dumps(row) + "\n")

    search = {c["title"]: search_results(c) for c in CLAIMS if c["hits"]}
    (OUT / "search.json").write_text(json.dumps(search, indent=2) + "\n", encoding="utf-8")

    with (OUT / "domains.jsonl").open("w", encoding="utf-8") as fh:
        for d in DOMAINS:
            fh.write(json.dumps(d, sort_keys=True) + "\n")

    for c in CLAIMS:
        expert = [t for t in EXPERT_ORDER if t in c["signals"]]
        dump_script(claim_script(c, expert, c["final"], None), OUT / "scripts/expert" / f"{c['id']}.txt")
        dump_script(
            claim_script(c, self_steps(c), c["self_final"], c["planner"]),
            OUT / "scripts/self-designed" / f"{c['id']}.txt",
        )


if __name__ == "__main__":
    main()
