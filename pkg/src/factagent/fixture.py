"""Offline runs: per-claim scripted transcripts and the bundled 12-claim fixture."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .claims import DatasetRecord
from .evaluation import load_dataset
from .evidence import DomainStore, SearchProvider, StaticSearchProvider
from .llm import Gateway, ScriptedProvider, load_script
from .tools import DEFAULT_PROMPTS, PromptLibrary
from .workflow import Mode, Services, WorkflowConfig


def fixture_dir() -> Path:
    return Path(str(resources.files("factagent").joinpath("data", "fixture")))


def per_claim_scripts(
    script_dir: "str | os.PathLike[str]",
    search: Optional[SearchProvider] = None,
    store: Optional[DomainStore] = None,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
    config: WorkflowConfig = WorkflowConfig(),
    max_calls: Optional[int] = 64,
    providers: Optional[dict[str, ScriptedProvider]] = None,
) -> Callable[[DatasetRecord], Services]:
    """Services factory giving each claim a ScriptedProvider loaded from ``<script_dir>/<claim_id>.txt``.

    A missing script file gives an empty provider, so the claim fails with
    "script exhausted". Pass ``providers`` to collect the providers by claim id.
    """
    script_dir = Path(script_dir)

    def build(record: DatasetRecord) -> Services:
        path = script_dir / f"{record.claim.claim_id}.txt"
        provider = ScriptedProvider(load_script(path) if path.is_file() else [])
        if providers is not None:
            providers[record.claim.claim_id] = provider
        return Services(Gateway(provider, max_calls=max_calls), search, store, prompts, config)

    return build


def load_fixture() -> list[DatasetRecord]:
    return load_dataset(fixture_dir() / "dataset.jsonl", strict=True)


def fixture_services(
    mode: Mode = Mode.EXPERT,
    config: WorkflowConfig = WorkflowConfig(),
    store_path: "str | os.PathLike[str] | None" = None,
    providers: Optional[dict[str, ScriptedProvider]] = None,
    search: Optional[SearchProvider] = None,
) -> Callable[[DatasetRecord], Services]:
    """Services factory replaying the fixture transcripts for ``mode``.

    The domain history is read from the bundled file unless ``store_path``
    points elsewhere; use a copy when ``config.record_outcomes`` is set.
    """
    root = fixture_dir()
    store = DomainStore(store_path or root / "domains.jsonl")
    search = search or StaticSearchProvider.from_json(root / "search.json")
    return per_claim_scripts(root / "scripts" / Mode(mode).value, search, store, config=config, providers=providers)
