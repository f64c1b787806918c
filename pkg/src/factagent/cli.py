"""Command-line front end: ``verify``, ``plan``, ``evaluate`` and ``db``.

Settings come from flags, then a JSON config file (``--config``), then
built-in defaults. Credentials are read only from the environment:
``FACTAGENT_LLM_API_KEY`` (or ``OPENAI_API_KEY``) and ``SERPAPI_API_KEY``.

``verify`` exits 0 for a real verdict, 1 for fake and 2 on errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .claims import DateParseError, NewsClaim, Veracity, render_descriptor
from .evaluation import (
    InfeasibleConstraint,
    SamplingSpec,
    load_dataset,
    render_table,
    run_evaluation,
    sample_test_set,
)
from .evidence import DomainStore, SearchProvider, SerpApiSearch, StaticSearchProvider, record_verification
from .fixture import fixture_dir, per_claim_scripts
from .llm import Gateway, HTTPChatProvider, LLMError, RetryPolicy, ScriptedProvider, load_script
from .tools import PromptLibrary, ToolKind, classify_politics
from .workflow import (
    Mode,
    Services,
    Strategy,
    WorkflowConfig,
    plan_expert,
    plan_self_designed,
    render_report,
    verdict_record,
    verify_claim,
)

log = logging.getLogger("factagent")

EXIT_REAL, EXIT_FAKE, EXIT_ERROR = 0, 1, 2
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    endpoint: str = DEFAULT_ENDPOINT
    model_id: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_output_tokens: int = 512
    max_calls: int = 64
    retry_attempts: int = 3
    backoff_base: float = 0.5
    max_results: int = 8
    mode: str = "expert"
    strategy: str = "checklist"
    disabled_tools: list[str] = field(default_factory=list)
    prompt_dir: Optional[str] = None
    checklist: Optional[str] = None
    self_plan_prompt: Optional[str] = None
    store_path: str = "domains.jsonl"
    record_outcomes: bool = False
    parallelism: int = 1
    out_dir: Optional[str] = None
    provider: str = "live"
    script: Optional[str] = None
    search_results: Optional[str] = None

    def validate(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.mode not in {m.value for m in Mode}:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.strategy not in {s.value for s in Strategy}:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.provider not in ("live", "scripted"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        for name in self.disabled_tools:
            try:
                ToolKind.parse(name)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.self_plan_prompt and self.mode != Mode.SELF_DESIGNED.value:
            raise ConfigError("--self-plan-prompt only applies to --mode self-designed")
        if self.provider == "live" and self.script:
            raise ConfigError("--script requires --provider scripted")
        if self.provider == "scripted" and not self.script:
            raise ConfigError("--provider scripted requires --script")
        if self.script and Path(self.script).is_file() and self.parallelism > 1:
            raise ConfigError("a single script file is only deterministic with --parallelism 1")

    @property
    def workflow(self) -> WorkflowConfig:
        return WorkflowConfig(
            disabled=frozenset(ToolKind.parse(t) for t in self.disabled_tools),
            max_results=self.max_results,
            record_outcomes=self.record_outcomes,
        )

    @property
    def prompts(self) -> PromptLibrary:
        files = {"planner": self.self_plan_prompt} if self.self_plan_prompt else None
        return PromptLibrary(self.prompt_dir, self.checklist, files)


_FLAG_TO_FIELD = {
    "endpoint": "endpoint",
    "model": "model_id",
    "temperature": "temperature",
    "max_calls": "max_calls",
    "max_results": "max_results",
    "mode": "mode",
    "strategy": "strategy",
    "disable_tool": "disabled_tools",
    "prompt_dir": "prompt_dir",
    "checklist": "checklist",
    "self_plan_prompt": "self_plan_prompt",
    "db": "store_path",
    "record_outcomes": "record_outcomes",
    "parallelism": "parallelism",
    "out": "out_dir",
    "provider": "provider",
    "script": "script",
    "search_results": "search_results",
}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and explicit flags, then validate."""
    cfg = RunConfig()
    known = {f.name for f in dataclasses.fields(RunConfig)}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = dataclasses.replace(cfg, **data)
    for flag, name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None and value != []:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def make_gateway(cfg: RunConfig, script: Optional[str] = None) -> Gateway:
    if cfg.provider == "scripted":
        provider = ScriptedProvider(load_script(script or cfg.script))
    else:
        if not (os.environ.get("FACTAGENT_LLM_API_KEY") or os.environ.get("OPENAI_API_KEY")):
            raise ConfigError("no LLM credential: set FACTAGENT_LLM_API_KEY")
        provider = HTTPChatProvider.from_env(cfg.endpoint)
    return Gateway(
        provider,
        retry=RetryPolicy(max_attempts=cfg.retry_attempts, backoff_base=cfg.backoff_base),
        max_calls=cfg.max_calls,
        model_id=cfg.model_id,
        temperature=cfg.temperature,
        max_output_tokens=cfg.max_output_tokens,
    )


def make_search(cfg: RunConfig) -> SearchProvider:
    if cfg.search_results:
        return StaticSearchProvider.from_json(cfg.search_results)
    if cfg.provider == "scripted":
        return StaticSearchProvider()
    if not os.environ.get("SERPAPI_API_KEY"):
        raise ConfigError("no search credential: set SERPAPI_API_KEY or pass --search-results")
    return SerpApiSearch()


def make_services(cfg: RunConfig) -> Services:
    store = DomainStore(cfg.store_path)
    return Services(make_gateway(cfg), make_search(cfg), store, cfg.prompts, cfg.workflow)


def claim_from_args(args: argparse.Namespace) -> NewsClaim:
    if not args.title or not args.title.strip():
        raise ConfigError("title must be non-empty")
    return NewsClaim.create(args.title, url=args.url, date=args.date, claim_id=args.id)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    claim = claim_from_args(args)
    services = make_services(cfg)
    verdict = verify_claim(claim, services, Mode(cfg.mode), Strategy(cfg.strategy))
    record = verdict_record(claim, verdict)
    if args.json:
        print(json.dumps(record, indent=2, ensure_ascii=False))
    else:
        sys.stdout.write(render_report(claim, verdict))
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        _write_json(out / f"{claim.claim_id}.json", record)
        (out / f"{claim.claim_id}.txt").write_text(render_report(claim, verdict), encoding="utf-8")
    return EXIT_REAL if verdict.label is Veracity.REAL else EXIT_FAKE


def cmd_plan(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    claim = claim_from_args(args)
    gateway = make_gateway(cfg)
    politics = classify_politics(claim, gateway, cfg.prompts)
    if cfg.mode == Mode.EXPERT.value:
        plan = plan_expert(claim, politics, cfg.workflow)
    else:
        plan = plan_self_designed(claim, gateway, cfg.workflow, politics, cfg.prompts)
    print(f"News: {render_descriptor(claim)}")
    print(f"Political: {'yes' if politics.is_political else 'no'}")
    print(f"Plan ({plan.mode}): " + ", ".join(str(t) for t in plan.steps))
    for note in plan.repairs:
        print(f"  repair: {note}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.fixture:
        if args.dataset or args.script or args.search_results or args.db:
            raise ConfigError("--fixture supplies its own dataset, scripts, search results and store")
        root = fixture_dir()
        args.dataset = str(root / "dataset.jsonl")
        args.provider = "scripted"
        args.script = str(root / "scripts" / (args.mode or "expert"))
        args.search_results = str(root / "search.json")
        args.db = str(root / "domains.jsonl")
        if args.record_outcomes:
            raise ConfigError("--record-outcomes would modify the bundled fixture store")
    if not args.dataset:
        raise ConfigError("--dataset is required")
    cfg = build_config(args)

    records = load_dataset(args.dataset, strict=args.strict)
    if args.n is not None or args.seed is not None:
        spec = SamplingSpec(n=args.n or 100, seed=args.seed or 0)
        records = sample_test_set(records, spec)

    if cfg.provider == "scripted" and Path(cfg.script).is_dir():
        services = per_claim_scripts(
            cfg.script,
            make_search(cfg),
            DomainStore(cfg.store_path),
            cfg.prompts,
            cfg.workflow,
            max_calls=cfg.max_calls,
        )
    else:
        services = make_services(cfg)

    out = Path(cfg.out_dir or "factagent-run")
    report = run_evaluation(
        records,
        services,
        Strategy(cfg.strategy),
        Mode(cfg.mode),
        parallelism=cfg.parallelism,
        traces_dir=out / "traces",
    )
    out.mkdir(parents=True, exist_ok=True)
    report.save(out / "report.json")
    label = f"factagent ({cfg.mode}, {cfg.strategy})"
    table = render_table(report, label)
    (out / "table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def cmd_db(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    store = DomainStore(cfg.store_path)
    if args.db_command == "add":
        when = dt.date.fromisoformat(args.date) if args.date else dt.date.today()
        rec = record_verification(store, args.domain, Veracity(args.label), when)
    else:
        rec = store.get(args.domain)
        if rec is None:
            print(f"no record for {args.domain}")
            return 1
    updated = rec.last_updated.isoformat() if rec.last_updated else "-"
    print(f"domain={rec.domain} real_count={rec.real_count} fake_count={rec.fake_count} last_updated={updated}")
    if rec.llm_overview:
        print(f"overview: {rec.llm_overview}")
    return 0


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file of RunConfig fields")
    parser.add_argument("--db", help="domain history file (JSON lines)")
    parser.add_argument("-v", "--verbose", action="store_true")


def _engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in Mode])
    parser.add_argument("--strategy", choices=[s.value for s in Strategy])
    parser.add_argument("--disable-tool", action="append", default=[], metavar="NAME", help="repeatable")
    parser.add_argument("--provider", choices=["live", "scripted"])
    parser.add_argument("--script", help="script file, or a directory of <claim_id>.txt scripts")
    parser.add_argument("--search-results", help="JSON map of query text to results (offline search)")
    parser.add_argument("--prompt-dir", help="directory of prompt template overrides")
    parser.add_argument("--checklist", help="checklist criteria file")
    parser.add_argument("--self-plan-prompt", help="planner prompt template (self-designed mode only)")
    parser.add_argument("--endpoint")
    parser.add_argument("--model")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--max-calls", type=int, help="LLM call budget per claim")
    parser.add_argument("--max-results", type=int, help="search results per query")
    parser.add_argument("--record-outcomes", action="store_const", const=True, default=None,
                        help="add each verdict to the domain history")
    parser.add_argument("--out", help="output directory")


def _claim_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("title")
    parser.add_argument("--url", help="source URL or domain")
    parser.add_argument("--date", help="publish date, MM/DD/YYYY or YYYY-MM-DD")
    parser.add_argument("--id", help="claim id")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factagent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify one claim and print the step-by-step report")
    _claim_args(p)
    _engine_flags(p)
    _common(p)
    p.add_argument("--json", action="store_true", help="print the machine-readable record instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plan", help="show the workflow a claim would get, without running it")
    _claim_args(p)
    _engine_flags(p)
    _common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("evaluate", help="run a labelled dataset and report metrics")
    p.add_argument("--dataset")
    p.add_argument("--fixture", action="store_true", help="use the bundled 12-claim scripted fixture")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="sample this many claims")
    p.add_argument("--strict", action="store_true", help="fail on malformed dataset lines")
    p.add_argument("--parallelism", type=int)
    _engine_flags(p)
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("db", help="inspect or update the domain history")
    dbsub = p.add_subparsers(dest="db_command", required=True)
    add = dbsub.add_parser("add")
    add.add_argument("domain")
    add.add_argument("label", choices=["real", "fake"])
    add.add_argument("--date", help="ISO date of the verification (default today)")
    _common(add)
    show = dbsub.add_parser("show")
    show.add_argument("domain")
    _common(show)
    p.set_defaults(func=cmd_db)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DateParseError, InfeasibleConstraint, LLMError, OSError, ValueError) as exc:
        print(f"factagent: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
