"""Dataset loading, seeded test-set sampling, batch runs, metrics and tool-usage statistics."""

from __future__ import annotations

import json
import logging
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

from .claims import DatasetRecord, NewsClaim, Source, UnknownLabelError, Veracity, normalize_label
from .tools import ToolKind
from .workflow import Mode, Services, Strategy, WorkflowPlan, verdict_record, verify_claim

log = logging.getLogger(__name__)


class DatasetFormatError(ValueError):
    def __init__(self, path: str, lineno: int, reason: str):
        super().__init__(f"{path}:{lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


class InfeasibleConstraint(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def _parse_record(obj: object, default_id: str, source: Optional[Source]) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    title = obj.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ValueError("missing title")
    if "label" not in obj:
        raise ValueError("missing label")
    label = normalize_label(str(obj["label"]))
    claim = NewsClaim.create(
        title,
        url=obj.get("url") or None,
        date=obj.get("date") or None,
        claim_id=str(obj["id"]) if obj.get("id") not in (None, "") else default_id,
    )
    src = source or Source(str(obj.get("source", "other")).lower())
    return DatasetRecord(claim, label, src)


def load_dataset(
    path: "str | os.PathLike[str]",
    strict: bool = False,
    source: Optional[Source] = None,
    errors: Optional[list[DatasetFormatError]] = None,
) -> list[DatasetRecord]:
    """Read JSON-lines claims with ``title``, ``label`` and optional ``url``, ``date``, ``id``, ``source``.

    Labels go through :func:`normalize_label`. Bad lines raise DatasetFormatError
    when ``strict``; otherwise they are logged, appended to ``errors`` if given,
    and skipped.
    """
    path = Path(path)
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = _parse_record(json.loads(line), f"{path.stem}-{lineno:05d}", source)
                if rec.claim.claim_id in seen:
                    raise ValueError(f"duplicate id {rec.claim.claim_id!r}")
            except (ValueError, UnknownLabelError) as exc:
                err = DatasetFormatError(str(path), lineno, str(exc))
                if strict:
                    raise err from exc
                log.warning("skipping %s", err)
                if errors is not None:
                    errors.append(err)
                continue
            seen.add(rec.claim.claim_id)
            records.append(rec)
    return records


@dataclass(frozen=True)
class SamplingSpec:
    """``max_ratio`` bounds how far either class may outnumber the other; None disables the check."""

    n: int = 100
    seed: int = 0
    max_ratio: Optional[float] = 2.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.max_ratio is not None and self.max_ratio < 1:
            raise ValueError("max_ratio must be >= 1")


def _ratio_ok(real: int, fake: int, max_ratio: Optional[float]) -> bool:
    if max_ratio is None:
        return True
    return real * max_ratio >= fake and fake * max_ratio >= real


def sample_test_set(records: Sequence[DatasetRecord], spec: SamplingSpec = SamplingSpec()) -> list[DatasetRecord]:
    """Seeded subset of ``min(n, len(records))`` records whose class balance respects ``max_ratio``.

    Class counts follow the pool's proportions as closely as the ratio bound allows.
    """
    if not records:
        raise EmptyInput("no records to sample from")
    reals = [r for r in records if r.gold_label is Veracity.REAL]
    fakes = [r for r in records if r.gold_label is Veracity.FAKE]
    size = min(spec.n, len(records))

    feasible = [
        r for r in range(size + 1) if r <= len(reals) and size - r <= len(fakes) and _ratio_ok(r, size - r, spec.max_ratio)
    ]
    if not feasible:
        raise InfeasibleConstraint(
            f"cannot draw {size} records within ratio {spec.max_ratio} from {len(reals)} real / {len(fakes)} fake"
        )
    target = size * len(reals) / len(records)
    n_real = min(feasible, key=lambda r: (abs(r - target), r))

    rng = random.Random(spec.seed)
    chosen = rng.sample(reals, n_real) + rng.sample(fakes, size - n_real)
    rng.shuffle(chosen)
    return chosen


@dataclass(frozen=True)
class Confusion:
    """Confusion counts with fake as the positive class."""

    tp_fake: int
    fp_fake: int
    fn_fake: int
    tn_fake: int

    @property
    def n(self) -> int:
        return self.tp_fake + self.fp_fake + self.fn_fake + self.tn_fake


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class Metrics:
    n: int
    accuracy: float
    f1_macro: float
    f1_real: float
    f1_fake: float
    confusion: Confusion


def compute_metrics(pairs: Iterable[tuple[Veracity, Veracity]]) -> Metrics:
    """Accuracy, per-class F1 and their macro average from (gold, predicted) pairs."""
    tp = fp = fn = tn = 0
    for gold, pred in pairs:
        gold, pred = Veracity(gold), Veracity(pred)
        if pred is Veracity.FAKE:
            if gold is Veracity.FAKE:
                tp += 1
            else:
                fp += 1
        elif gold is Veracity.FAKE:
            fn += 1
        else:
            tn += 1
    n = tp + fp + fn + tn
    if n == 0:
        raise EmptyInput("no prediction pairs")
    f1_fake = _f1(tp, fp, fn)
    # real as positive: tp=tn, fp=fn, fn=fp
    f1_real = _f1(tn, fn, fp)
    return Metrics(n, (tp + tn) / n, (f1_real + f1_fake) / 2, f1_real, f1_fake, Confusion(tp, fp, fn, tn))


def tool_usage_frequency(plans: Sequence[WorkflowPlan]) -> dict[ToolKind, float]:
    """Fraction of plans that include each tool (every tool is listed, unused ones at 0)."""
    if not plans:
        raise EmptyInput("no plans")
    return {kind: sum(kind in p.steps for p in plans) / len(plans) for kind in ToolKind}


@dataclass(frozen=True)
class ClaimTrace:
    claim_id: str
    gold: Veracity
    predicted: Veracity
    strategy: Strategy
    mode: Mode
    failed: bool = False
    error: Optional[str] = None


@dataclass(frozen=True)
class EvaluationReport:
    n: int
    accuracy: float
    f1_macro: float
    f1_real: float
    f1_fake: float
    confusion: Confusion
    per_claim: tuple[ClaimTrace, ...]
    tool_usage: dict[ToolKind, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.confusion.n != self.n:
            raise ValueError("confusion counts must sum to n")
        if any(not 0.0 <= v <= 1.0 for v in self.tool_usage.values()):
            raise ValueError("tool usage fractions must lie in [0, 1]")

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.per_claim)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "f1_real": self.f1_real,
            "f1_fake": self.f1_fake,
            "confusion": asdict(self.confusion),
            "per_claim": [
                {**asdict(t), "gold": str(t.gold), "predicted": str(t.predicted), "strategy": str(t.strategy), "mode": str(t.mode)}
                for t in self.per_claim
            ],
            "tool_usage": {str(k): v for k, v in self.tool_usage.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        traces = tuple(
            ClaimTrace(
                t["claim_id"],
                Veracity(t["gold"]),
                Veracity(t["predicted"]),
                Strategy(t["strategy"]),
                Mode(t["mode"]),
                bool(t.get("failed", False)),
                t.get("error"),
            )
            for t in d["per_claim"]
        )
        return cls(
            n=d["n"],
            accuracy=d["accuracy"],
            f1_macro=d["f1_macro"],
            f1_real=d["f1_real"],
            f1_fake=d["f1_fake"],
            confusion=Confusion(**d["confusion"]),
            per_claim=traces,
            tool_usage={ToolKind(k): v for k, v in d.get("tool_usage", {}).items()},
        )

    def save(self, path: "str | os.PathLike[str]") -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: "str | os.PathLike[str]") -> "EvaluationReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def render_table(report: EvaluationReport, label: str = "factagent") -> str:
    """Metrics row in the F1 / Acc. / F1_real / F1_fake column layout, plus tool usage."""
    width = max(len(label), len("Model"))
    lines = [
        f"{'Model':<{width}}  {'F1':>5}  {'Acc.':>5}  {'F1_real':>7}  {'F1_fake':>7}",
        f"{label:<{width}}  {report.f1_macro:>5.2f}  {report.accuracy:>5.2f}  {report.f1_real:>7.2f}  {report.f1_fake:>7.2f}",
        "",
        "n={n}  tp_fake={c.tp_fake}  fp_fake={c.fp_fake}  fn_fake={c.fn_fake}  tn_fake={c.tn_fake}  failed={f}".format(
            n=report.n, c=report.confusion, f=report.failures
        ),
    ]
    if report.tool_usage:
        usage = "  ".join(f"{k}={v:.2f}" for k, v in report.tool_usage.items())
        lines.append(f"tool usage: {usage}")
    return "\n".join(lines) + "\n"


ServicesSource = Union[Services, Callable[[DatasetRecord], Services]]


def _verify_one(record: DatasetRecord, services: Services, mode: Mode, strategy: Strategy) -> tuple[ClaimTrace, Optional[WorkflowPlan], dict]:
    claim = record.claim
    try:
        verdict = verify_claim(claim, services, mode, strategy)
    except Exception as exc:
        log.warning("claim %s failed: %s", claim.claim_id, exc)
        error = f"{type(exc).__name__}: {exc}"
        trace = ClaimTrace(claim.claim_id, record.gold_label, Veracity.FAKE, strategy, mode, True, error)
        return trace, None, {"claim_id": claim.claim_id, "failed": True, "error": error}
    trace = ClaimTrace(claim.claim_id, record.gold_label, verdict.label, strategy, mode)
    return trace, verdict.plan, verdict_record(claim, verdict)


def run_evaluation(
    records: Sequence[DatasetRecord],
    services: ServicesSource,
    strategy: Strategy = Strategy.CHECKLIST,
    mode: Mode = Mode.EXPERT,
    parallelism: int = 1,
    traces_dir: "str | os.PathLike[str] | None" = None,
) -> EvaluationReport:
    """Verify every record and aggregate metrics and tool usage.

    ``services`` is either one Services object, forked per claim so each claim
    gets its own call budget, or a factory building Services for a record.
    A claim that fails outright is scored as predicted fake and marked failed.
    Sharing one scripted provider across claims is only deterministic with
    ``parallelism=1``.
    """
    if not records:
        raise EmptyInput("no records to evaluate")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    strategy, mode = Strategy(strategy), Mode(mode)

    def services_for(record: DatasetRecord) -> Services:
        return services(record) if callable(services) else services.fork()

    def work(record: DatasetRecord):
        return record, _verify_one(record, services_for(record), mode, strategy)

    if parallelism == 1:
        outcomes = [work(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(work, records))
    outcomes.sort(key=lambda item: item[0].claim.claim_id)

    if traces_dir is not None:
        tdir = Path(traces_dir)
        tdir.mkdir(parents=True, exist_ok=True)
        for record, (trace, _, detail) in outcomes:
            body = {**detail, "gold": str(record.gold_label), "predicted": str(trace.predicted)}
            (tdir / f"{_safe_name(record.claim.claim_id)}.json").write_text(
                json.dumps(body, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )

    traces = tuple(trace for _, (trace, _, _) in outcomes)
    plans = [plan for _, (_, plan, _) in outcomes if plan is not None]
    metrics = compute_metrics((t.gold, t.predicted) for t in traces)
    usage = tool_usage_frequency(plans) if plans else {kind: 0.0 for kind in ToolKind}
    return EvaluationReport(
        n=metrics.n,
        accuracy=metrics.accuracy,
        f1_macro=metrics.f1_macro,
        f1_real=metrics.f1_real,
        f1_fake=metrics.f1_fake,
        confusion=metrics.confusion,
        per_claim=traces,
        tool_usage=usage,
    )


def _safe_name(claim_id: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in claim_id)
