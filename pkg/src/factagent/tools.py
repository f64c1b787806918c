"""Internal-knowledge tools, the politics gate, and the verdict output protocol."""

from __future__ import annotations

import enum
import logging
import os
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, TypeVar

from .claims import NewsClaim, render_descriptor
from .llm import Gateway

log = logging.getLogger(__name__)

T = TypeVar("T")


class ToolKind(str, enum.Enum):
    PHRASE = "Phrase"
    LANGUAGE = "Language"
    COMMONSENSE = "Commonsense"
    STANDING = "Standing"
    SEARCH = "Search"
    URL = "Url"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "ToolKind":
        """Accept ``Phrase``, ``phrase``, ``Phrase_tool``, ``URL tool`` and similar spellings."""
        key = re.sub(r"[\s_-]*tool$", "", name.strip().lower())
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown tool name: {name!r}")


INTERNAL_TOOLS = (ToolKind.PHRASE, ToolKind.LANGUAGE, ToolKind.COMMONSENSE, ToolKind.STANDING)


class Signal(str, enum.Enum):
    SUPPORTS_REAL = "supports_real"
    SUPPORTS_FAKE = "supports_fake"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


class UnparsableOutput(ValueError):
    def __init__(self, raw: str, reason: str = "no verdict line"):
        super().__init__(f"{reason}: {raw[:120]!r}")
        self.raw = raw
        self.reason = reason


@dataclass(frozen=True)
class ToolObservation:
    tool: ToolKind
    signal: Signal
    rationale: str
    raw_output: str = ""

    def __post_init__(self) -> None:
        if not self.rationale.strip():
            raise ValueError("observation rationale must be non-empty")


@dataclass(frozen=True)
class PoliticsFlag:
    is_political: bool
    rationale: str = ""


_VERDICT_LINE = re.compile(r"^[\s*#>_`]*verdict\s*:\s*(real|fake|uncertain)[\s*_`.]*$", re.IGNORECASE)
_ANSWER_LINE = re.compile(r"^[\s*#>_`]*answer\s*:\s*(political|not[_ ]political)[\s*_`.]*$", re.IGNORECASE)

_SIGNALS = {
    "real": Signal.SUPPORTS_REAL,
    "fake": Signal.SUPPORTS_FAKE,
    "uncertain": Signal.INCONCLUSIVE,
}

VERDICT_REPROMPT = "Answer again ending with a line 'VERDICT: REAL|FAKE|UNCERTAIN'."
POLITICS_REPROMPT = "Answer again starting with a line 'ANSWER: POLITICAL|NOT_POLITICAL'."


def _split_last(raw: str, pattern: re.Pattern[str]) -> Optional[tuple[str, str]]:
    lines = raw.splitlines()
    for i in range(len(lines) - 1, -1, -1):
        m = pattern.match(lines[i])
        if m:
            rest = "\n".join(lines[:i] + lines[i + 1 :]).strip()
            return m.group(1).lower(), rest
    return None


def parse_tool_output(raw: str) -> tuple[Signal, str]:
    """Extract (signal, rationale) from a reply; the last ``VERDICT:`` line wins."""
    found = _split_last(raw, _VERDICT_LINE)
    if found is None:
        raise UnparsableOutput(raw)
    token, rationale = found
    if not rationale:
        raise UnparsableOutput(raw, "empty rationale")
    return _SIGNALS[token], rationale


def parse_politics_output(raw: str) -> PoliticsFlag:
    found = _split_last(raw, _ANSWER_LINE)
    if found is None:
        raise UnparsableOutput(raw, "no ANSWER line")
    token, rationale = found
    return PoliticsFlag(is_political=token == "political", rationale=rationale)


def ask_parsed(
    gateway: Gateway,
    prompt: str,
    parse: Callable[[str], T],
    reprompt: str = VERDICT_REPROMPT,
) -> tuple[T, str]:
    """One exchange, plus a single reprompt if the reply does not parse.

    Returns the parsed value and the raw reply it came from.
    """
    raw = gateway.ask(prompt)
    try:
        return parse(raw), raw
    except UnparsableOutput:
        log.info("unparsable reply, reprompting once")
    raw = gateway.ask(f"{prompt}\n\n{reprompt}")
    return parse(raw), raw


class PromptLibrary:
    """Prompt templates and checklist text, read from an override directory first, then the defaults.

    Templates use ``{descriptor}``, ``{evidence}`` and a few tool-specific
    placeholders; substitution is literal, so braces in claim titles are safe.
    ``files`` maps single template names to replacement files.
    """

    def __init__(
        self,
        prompt_dir: "str | os.PathLike[str] | None" = None,
        checklist_path: "str | os.PathLike[str] | None" = None,
        files: "Optional[dict[str, str | os.PathLike[str]]]" = None,
    ):
        self.prompt_dir = Path(prompt_dir) if prompt_dir else None
        self.checklist_path = Path(checklist_path) if checklist_path else None
        self.files = {name: Path(p) for name, p in (files or {}).items()}

    def template(self, name: str) -> str:
        if name in self.files:
            return self.files[name].read_text(encoding="utf-8")
        if self.prompt_dir is not None:
            candidate = self.prompt_dir / f"{name}.txt"
            if candidate.is_file():
                return candidate.read_text(encoding="utf-8")
        return _default_template(name)

    def render(self, name: str, **values: str) -> str:
        text = self.template(name)
        return re.sub(r"\{(\w+)\}", lambda m: values.get(m.group(1), m.group(0)), text).strip()

    def checklist(self) -> dict[ToolKind, str]:
        if self.checklist_path is not None:
            return parse_keyed_lines(self.checklist_path.read_text(encoding="utf-8"))
        return parse_keyed_lines(self.template("checklist"))

    def descriptions(self) -> dict[ToolKind, str]:
        return parse_keyed_lines(self.template("descriptions"))


@lru_cache(maxsize=None)
def _default_template(name: str) -> str:
    return resources.files("factagent").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")


def parse_keyed_lines(text: str) -> dict[ToolKind, str]:
    """Parse ``Tool: text`` lines, skipping blanks and ``#`` comments."""
    out: dict[ToolKind, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, body = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected '<Tool>: <text>'")
        out[ToolKind.parse(name)] = body.strip()
    return out


DEFAULT_PROMPTS = PromptLibrary()

_TEMPLATE_NAMES = {
    ToolKind.PHRASE: "phrase",
    ToolKind.LANGUAGE: "language",
    ToolKind.COMMONSENSE: "commonsense",
    ToolKind.STANDING: "standing",
}


def tool_prompt(kind: ToolKind, claim: NewsClaim, prompts: PromptLibrary = DEFAULT_PROMPTS) -> str:
    if kind not in _TEMPLATE_NAMES:
        raise ValueError(f"{kind} is not an internal tool")
    return prompts.render(_TEMPLATE_NAMES[kind], descriptor=render_descriptor(claim), evidence="")


def classify_politics(
    claim: NewsClaim, gateway: Gateway, prompts: PromptLibrary = DEFAULT_PROMPTS
) -> PoliticsFlag:
    prompt = prompts.render("politics", descriptor=render_descriptor(claim))
    flag, _ = ask_parsed(gateway, prompt, parse_politics_output, POLITICS_REPROMPT)
    return flag


def run_internal_tool(
    kind: ToolKind, claim: NewsClaim, gateway: Gateway, prompts: PromptLibrary = DEFAULT_PROMPTS
) -> ToolObservation:
    (signal, rationale), raw = ask_parsed(gateway, tool_prompt(kind, claim, prompts), parse_tool_output)
    return ToolObservation(kind, signal, rationale, raw)
