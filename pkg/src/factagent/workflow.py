"""Workflow planning (expert or self-designed), step execution, and final decision strategies."""

from __future__ import annotations

import datetime as dt
import enum
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .claims import NewsClaim, Veracity, render_descriptor
from .evidence import (
    DEFAULT_MAX_RESULTS,
    DomainStore,
    SearchProvider,
    record_verification,
    run_search_tool,
    run_url_tool,
)
from .llm import BudgetExceeded, Gateway
from .tools import (
    DEFAULT_PROMPTS,
    INTERNAL_TOOLS,
    PoliticsFlag,
    PromptLibrary,
    Signal,
    ToolKind,
    ToolObservation,
    UnparsableOutput,
    ask_parsed,
    classify_politics,
    parse_tool_output,
    run_internal_tool,
)

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    EXPERT = "expert"
    SELF_DESIGNED = "self-designed"

    def __str__(self) -> str:
        return self.value


class Strategy(str, enum.Enum):
    CHECKLIST = "checklist"
    MAJORITY = "majority"

    def __str__(self) -> str:
        return self.value


class EmptyPlan(ValueError):
    pass


class EmptyObservations(ValueError):
    pass


EXPERT_ORDER = (
    ToolKind.PHRASE,
    ToolKind.LANGUAGE,
    ToolKind.COMMONSENSE,
    ToolKind.STANDING,
    ToolKind.URL,
    ToolKind.SEARCH,
)

FINAL_REPROMPT = "Answer again ending with a line 'VERDICT: REAL|FAKE'."


@dataclass(frozen=True)
class WorkflowConfig:
    disabled: frozenset[ToolKind] = frozenset()
    max_results: int = DEFAULT_MAX_RESULTS
    record_outcomes: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "disabled", frozenset(ToolKind(t) for t in self.disabled))


@dataclass(frozen=True)
class WorkflowPlan:
    steps: tuple[ToolKind, ...]
    mode: Mode
    politics: PoliticsFlag
    repairs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise EmptyPlan("workflow plan has no steps")
        if len(set(self.steps)) != len(self.steps):
            raise ValueError(f"duplicate steps in plan: {self.steps}")
        if ToolKind.STANDING in self.steps and not self.politics.is_political:
            raise ValueError("Standing step requires a political claim")

    def check_claim(self, claim: NewsClaim) -> None:
        if ToolKind.URL in self.steps and not claim.domain_url:
            raise ValueError(f"Url step planned for claim {claim.claim_id} without a domain")


@dataclass(frozen=True)
class ChecklistItem:
    tool: ToolKind
    criterion: str


@dataclass(frozen=True)
class FinalVerdict:
    label: Veracity
    reasoning: str
    observations: tuple[ToolObservation, ...]
    strategy: Strategy
    plan: Optional[WorkflowPlan] = None
    fallback: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "observations", tuple(self.observations))
        if self.plan is not None and tuple(o.tool for o in self.observations) != self.plan.steps:
            raise ValueError("observations must align with plan steps")


@dataclass
class Services:
    """Everything one claim's workflow needs to run its steps."""

    gateway: Gateway
    search: Optional[SearchProvider] = None
    store: Optional[DomainStore] = None
    prompts: PromptLibrary = field(default_factory=lambda: DEFAULT_PROMPTS)
    config: WorkflowConfig = field(default_factory=WorkflowConfig)

    def fork(self) -> "Services":
        return Services(self.gateway.fork(), self.search, self.store, self.prompts, self.config)


def plan_expert(claim: NewsClaim, politics: PoliticsFlag, config: WorkflowConfig = WorkflowConfig()) -> WorkflowPlan:
    steps = []
    for tool in EXPERT_ORDER:
        if tool in config.disabled:
            continue
        if tool is ToolKind.STANDING and not politics.is_political:
            continue
        if tool is ToolKind.URL and not claim.domain_url:
            continue
        steps.append(tool)
    if not steps:
        raise EmptyPlan("every applicable tool is disabled")
    return WorkflowPlan(tuple(steps), Mode.EXPERT, politics)


_LIST_MARKER = re.compile(r"^\s*(?:\d+[.)]|[-*•])\s*")


def _tool_or_none(candidates: Sequence[str]) -> Optional[ToolKind]:
    for c in candidates:
        try:
            return ToolKind.parse(c)
        except ValueError:
            continue
    return None


def parse_plan_reply(raw: str) -> list[tuple[str, Optional[ToolKind]]]:
    """Split a planner reply into (token, tool-or-None) pairs.

    Raises UnparsableOutput when no token names a known tool.
    """
    out = []
    for chunk in re.split(r"[,\n;]|->", raw):
        text = _LIST_MARKER.sub("", chunk)
        # "use: Phrase" and "Phrase: checks wording" both name Phrase
        candidates = [c.strip().strip("'\"`*.") for c in (text.split(":")[-1], text.split(":")[0])]
        token = next((c for c in candidates if c), "")
        if not token:
            continue
        out.append((token, _tool_or_none(candidates)))
    if not any(kind for _, kind in out):
        raise UnparsableOutput(raw, "no tool names in plan")
    return out


def repair_plan(
    parsed: Sequence[tuple[str, Optional[ToolKind]]],
    claim: NewsClaim,
    politics: PoliticsFlag,
    config: WorkflowConfig = WorkflowConfig(),
) -> tuple[list[ToolKind], list[str]]:
    steps: list[ToolKind] = []
    repairs: list[str] = []
    for token, kind in parsed:
        if kind is None:
            repairs.append(f"dropped unknown tool {token!r}")
        elif kind in steps:
            repairs.append(f"dropped duplicate {kind}")
        elif kind is ToolKind.STANDING and not politics.is_political:
            repairs.append("removed Standing: claim is not political")
        elif kind is ToolKind.URL and not claim.domain_url:
            repairs.append("removed Url: claim has no domain URL")
        elif kind in config.disabled:
            repairs.append(f"removed {kind}: disabled by configuration")
        else:
            steps.append(kind)
    return steps, repairs


def plan_self_designed(
    claim: NewsClaim,
    gateway: Gateway,
    config: WorkflowConfig = WorkflowConfig(),
    politics: Optional[PoliticsFlag] = None,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> WorkflowPlan:
    """Let the model pick and order the tools, then repair the plan so it is valid for this claim."""
    if politics is None:
        politics = classify_politics(claim, gateway, prompts)
    descriptions = prompts.descriptions()
    tools_text = "\n".join(f"- {kind.value}: {descriptions.get(kind, '')}".rstrip() for kind in EXPERT_ORDER)
    prompt = prompts.render("planner", descriptor=render_descriptor(claim), tools=tools_text)
    reprompt = "Answer again with only a comma-separated list of tool names chosen from: " + ", ".join(
        k.value for k in EXPERT_ORDER
    )
    parsed, _ = ask_parsed(gateway, prompt, parse_plan_reply, reprompt)
    steps, repairs = repair_plan(parsed, claim, politics, config)
    for note in repairs:
        log.info("plan repair for %s: %s", claim.claim_id, note)
    if not steps:
        raise EmptyPlan(f"no valid tools left after repairs: {'; '.join(repairs)}")
    return WorkflowPlan(tuple(steps), Mode.SELF_DESIGNED, politics, tuple(repairs))


def run_step(tool: ToolKind, claim: NewsClaim, services: Services) -> ToolObservation:
    if tool in INTERNAL_TOOLS:
        return run_internal_tool(tool, claim, services.gateway, services.prompts)
    if tool is ToolKind.SEARCH:
        if services.search is None:
            raise RuntimeError("no search provider configured")
        findings = run_search_tool(
            claim, services.gateway, services.search, services.config.max_results, services.prompts
        )
        return findings.observation
    if tool is ToolKind.URL:
        if services.store is None:
            raise RuntimeError("no domain store configured")
        return run_url_tool(claim, services.gateway, services.store, services.prompts)
    raise ValueError(f"unknown tool {tool!r}")


def execute(plan: WorkflowPlan, claim: NewsClaim, services: Services) -> list[ToolObservation]:
    """Run the plan's steps in order; a failing tool yields an inconclusive observation."""
    plan.check_claim(claim)
    observations = []
    for tool in plan.steps:
        try:
            obs = run_step(tool, claim, services)
        except BudgetExceeded:
            raise
        except Exception as exc:
            log.warning("%s failed on %s: %s", tool, claim.claim_id, exc)
            obs = ToolObservation(tool, Signal.INCONCLUSIVE, f"tool failed: {exc}", "")
        observations.append(obs)
    return observations


def checklist_items(plan: WorkflowPlan, prompts: PromptLibrary = DEFAULT_PROMPTS) -> list[ChecklistItem]:
    criteria = prompts.checklist()
    return [ChecklistItem(tool, criteria.get(tool, f"The {tool} check raises no concerns.")) for tool in plan.steps]


_SIGNAL_WORDS = {
    Signal.SUPPORTS_REAL: "suggests real",
    Signal.SUPPORTS_FAKE: "suggests fake",
    Signal.INCONCLUSIVE: "inconclusive",
}


def _one_line(text: str) -> str:
    return " ".join(text.split())


def build_checklist_prompt(
    observations: Sequence[ToolObservation],
    plan: WorkflowPlan,
    claim: NewsClaim,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> str:
    blocks = []
    for i, (item, obs) in enumerate(zip(checklist_items(plan, prompts), observations), 1):
        blocks.append(
            f"Checklist item {i} ({item.tool}): {_one_line(item.criterion)}\n"
            f"Observation {i} ({obs.tool}, {_SIGNAL_WORDS[obs.signal]}): {_one_line(obs.rationale)}"
        )
    return prompts.render("final", descriptor=render_descriptor(claim), checklist="\n\n".join(blocks))


def _parse_final(raw: str) -> tuple[Signal, str]:
    signal, rationale = parse_tool_output(raw)
    if signal is Signal.INCONCLUSIVE:
        raise UnparsableOutput(raw, "final verdict may not be UNCERTAIN")
    return signal, rationale


def decide_checklist(
    observations: Sequence[ToolObservation],
    plan: WorkflowPlan,
    claim: NewsClaim,
    gateway: Gateway,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> FinalVerdict:
    if len(observations) != len(plan.steps):
        raise ValueError("observations must align with plan steps")
    prompt = build_checklist_prompt(observations, plan, claim, prompts)
    try:
        (signal, rationale), _ = ask_parsed(gateway, prompt, _parse_final, FINAL_REPROMPT)
    except UnparsableOutput as exc:
        log.warning("checklist summary unusable for %s (%s); using majority vote", claim.claim_id, exc.reason)
        vote = decide_majority(observations, plan)
        return FinalVerdict(
            vote.label,
            "The checklist summary gave no usable verdict, so the tool signals were put to a majority vote. "
            + vote.reasoning,
            vote.observations,
            Strategy.CHECKLIST,
            plan,
            fallback=True,
        )
    label = Veracity.REAL if signal is Signal.SUPPORTS_REAL else Veracity.FAKE
    return FinalVerdict(label, rationale, tuple(observations), Strategy.CHECKLIST, plan)


def tally(observations: Iterable[ToolObservation]) -> tuple[int, int, int]:
    """(real votes, fake votes, inconclusive) over the observations."""
    real = fake = unsure = 0
    for obs in observations:
        if obs.signal is Signal.SUPPORTS_REAL:
            real += 1
        elif obs.signal is Signal.SUPPORTS_FAKE:
            fake += 1
        else:
            unsure += 1
    return real, fake, unsure


def decide_majority(observations: Sequence[ToolObservation], plan: Optional[WorkflowPlan] = None) -> FinalVerdict:
    """Majority of the decisive tool signals; ties, including no decisive signal at all, go to fake."""
    if not observations:
        raise EmptyObservations("majority vote needs at least one observation")
    real, fake, unsure = tally(observations)
    counts = f"{fake} suggest fake, {real} suggest real, {unsure} inconclusive"
    if real > fake:
        label, reasoning = Veracity.REAL, f"Majority vote: {counts}; real wins {real}-{fake}."
    elif fake > real:
        label, reasoning = Veracity.FAKE, f"Majority vote: {counts}; fake wins {fake}-{real}."
    else:
        label = Veracity.FAKE
        reasoning = f"Majority vote: {counts}; the {real}-{fake} tie is resolved as fake (tie rule)."
    return FinalVerdict(label, reasoning, tuple(observations), Strategy.MAJORITY, plan)


def verify_claim(
    claim: NewsClaim,
    services: Services,
    mode: Mode = Mode.EXPERT,
    strategy: Strategy = Strategy.CHECKLIST,
) -> FinalVerdict:
    """Politics gate, plan, execute, decide. BudgetExceeded propagates and aborts the claim."""
    mode, strategy = Mode(mode), Strategy(strategy)
    gateway, prompts, config = services.gateway, services.prompts, services.config
    try:
        politics = classify_politics(claim, gateway, prompts)
    except UnparsableOutput as exc:
        politics = PoliticsFlag(False, f"politics gate failed ({exc.reason}); treated as not political")

    if mode is Mode.EXPERT:
        plan = plan_expert(claim, politics, config)
    else:
        plan = plan_self_designed(claim, gateway, config, politics, prompts)

    observations = execute(plan, claim, services)
    if strategy is Strategy.MAJORITY:
        verdict = decide_majority(observations, plan)
    else:
        verdict = decide_checklist(observations, plan, claim, gateway, prompts)

    if config.record_outcomes and claim.domain_url and services.store is not None:
        record_verification(services.store, claim.domain_url, verdict.label, claim.publish_date or dt.date.today())
    return verdict


def verdict_record(claim: NewsClaim, verdict: FinalVerdict) -> dict:
    """Machine-readable form of a verdict."""
    plan = verdict.plan
    return {
        "claim_id": claim.claim_id,
        "descriptor": render_descriptor(claim),
        "mode": str(plan.mode) if plan else None,
        "political": plan.politics.is_political if plan else None,
        "politics_rationale": plan.politics.rationale if plan else None,
        "steps": [str(t) for t in plan.steps] if plan else [o.tool.value for o in verdict.observations],
        "repairs": list(plan.repairs) if plan else [],
        "observations": [
            {"tool": str(o.tool), "signal": str(o.signal), "rationale": o.rationale} for o in verdict.observations
        ],
        "strategy": str(verdict.strategy),
        "fallback": verdict.fallback,
        "label": str(verdict.label),
        "reasoning": verdict.reasoning,
    }


def render_report(claim: NewsClaim, verdict: FinalVerdict) -> str:
    """Human-readable walk through each step's observation followed by the final reasoning."""
    lines = [f"News: {render_descriptor(claim)}"]
    plan = verdict.plan
    if plan is not None:
        politics = "political" if plan.politics.is_political else "not political"
        why = f" ({_one_line(plan.politics.rationale)})" if plan.politics.rationale else ""
        lines.append(f"Politics: {politics}{why}")
        lines.append(f"Workflow ({plan.mode}): " + " -> ".join(f"{t}_tool" for t in plan.steps))
        for note in plan.repairs:
            lines.append(f"  plan repair: {note}")
    lines.append("")
    for i, obs in enumerate(verdict.observations, 1):
        lines.append(f"Step {i}: {obs.tool}_tool [{_SIGNAL_WORDS[obs.signal]}]")
        lines.extend(f"    {line}" for line in obs.rationale.splitlines())
    lines.append("")
    how = "checklist summary" if verdict.strategy is Strategy.CHECKLIST else "majority vote"
    if verdict.fallback:
        how += ", majority-vote fallback"
    lines.append(f"VERDICT: {verdict.label.value.upper()} ({how})")
    lines.append("Reasoning:")
    lines.extend(f"    {line}" for line in verdict.reasoning.splitlines())
    return "\n".join(lines) + "\n"
