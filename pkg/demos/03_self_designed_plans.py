"""
Letting the model choose the tools
==================================

In self-designed mode the model proposes a tool sequence. Replies are
messy, so the plan is repaired and each repair is logged.
"""

from factagent import NewsClaim
from factagent.llm import Gateway, ScriptedProvider
from factagent.tools import PoliticsFlag, ToolKind
from factagent.workflow import WorkflowConfig, parse_plan_reply, plan_expert, plan_self_designed

claim = NewsClaim.create("Airline adds a fee for passengers who recline their seats")
not_political = PoliticsFlag(False, "consumer news")

# the fixed expert order, for comparison
print("expert:", [str(t) for t in plan_expert(claim, not_political).steps])

replies = [
    "Phrase, Commonsense, Search",
    "1. Phrase_tool\n2. Standing_tool\n3. Phrase_tool\n4. Oracle",
    "Sure! I would use: Commonsense -> Url -> Search",
]
for reply in replies:
    print(repr(reply), "->", parse_plan_reply(reply))
    gateway = Gateway(ScriptedProvider([reply]))
    plan = plan_self_designed(claim, gateway, politics=not_political)
    print("   plan:", [str(t) for t in plan.steps])
    for note in plan.repairs:
        print("   repair:", note)

# disabled tools are removed from either kind of plan
config = WorkflowConfig(disabled=frozenset({ToolKind.SEARCH}))
plan = plan_self_designed(claim, Gateway(ScriptedProvider(["Search, Phrase"])), config, not_political)
print([str(t) for t in plan.steps], plan.repairs)
