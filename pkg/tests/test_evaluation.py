import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from factagent.claims import DatasetRecord, NewsClaim, Source, Veracity
from factagent.evaluation import (
    DatasetFormatError,
    EmptyInput,
    EvaluationReport,
    InfeasibleConstraint,
    SamplingSpec,
    compute_metrics,
    load_dataset,
    render_table,
    run_evaluation,
    sample_test_set,
    tool_usage_frequency,
)
from factagent.fixture import fixture_services, load_fixture
from factagent.tools import PoliticsFlag, ToolKind
from factagent.workflow import Mode, Strategy, WorkflowConfig, WorkflowPlan

R, F = Veracity.REAL, Veracity.FAKE


def write_jsonl(path, rows):
    path.write_text("\n".join(r if isinstance(r, str) else json.dumps(r) for r in rows) + "\n")
    return path


def pool(n_real, n_fake):
    out = []
    for i in range(n_real):
        out.append(DatasetRecord(NewsClaim(f"real {i}", claim_id=f"r{i:04d}"), R))
    for i in range(n_fake):
        out.append(DatasetRecord(NewsClaim(f"fake {i}", claim_id=f"f{i:04d}"), F))
    return out


def test_load_dataset_normalizes(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [
        {"title": "A", "label": "Pants on Fire", "url": "https://www.x.com/a", "date": "2019-01-02", "source": "politifact"},
        {"title": "B", "label": "mostly_true", "id": "b"},
    ])
    a, b = load_dataset(path)
    assert a.gold_label is F and a.source is Source.POLITIFACT
    assert a.claim.domain_url == "x.com" and a.claim.claim_id == "d-00001"
    assert b.gold_label is R and b.claim.claim_id == "b"


def test_load_dataset_strict_names_line(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [{"title": "A", "label": "true"}, {"label": "false"}])
    with pytest.raises(DatasetFormatError) as info:
        load_dataset(path, strict=True)
    assert info.value.lineno == 2
    assert str(info.value).endswith("d.jsonl:2: missing title")


def test_load_dataset_lenient_skips(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [
        {"title": "A", "label": "true"}, "not json", {"title": "C", "label": "sorta"}, {"title": "D", "label": "fake", "date": "13/40/2020"},
    ])
    errors = []
    records = load_dataset(path, errors=errors)
    assert [r.claim.title for r in records] == ["A"]
    assert [e.lineno for e in errors] == [2, 3, 4]


def test_load_dataset_rejects_duplicate_ids(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [{"title": "A", "label": "true", "id": "x"}, {"title": "B", "label": "true", "id": "x"}])
    with pytest.raises(DatasetFormatError):
        load_dataset(path, strict=True)


def test_sampling_deterministic_and_balanced():
    records = pool(80, 80)
    first = sample_test_set(records, SamplingSpec(n=100, seed=7))
    again = sample_test_set(records, SamplingSpec(n=100, seed=7))
    assert [r.claim.claim_id for r in first] == [r.claim.claim_id for r in again]
    n_real = sum(r.gold_label is R for r in first)
    assert len(first) == 100 and n_real == 50
    other = sample_test_set(records, SamplingSpec(n=100, seed=8))
    assert [r.claim.claim_id for r in other] != [r.claim.claim_id for r in first]


def test_sampling_infeasible():
    with pytest.raises(InfeasibleConstraint):
        sample_test_set(pool(100, 0), SamplingSpec(n=100))


def test_sampling_clamps_to_ratio():
    sample = sample_test_set(pool(90, 20), SamplingSpec(n=60))
    n_real = sum(r.gold_label is R for r in sample)
    assert n_real <= 2 * (60 - n_real)


def test_sampling_empty():
    with pytest.raises(EmptyInput):
        sample_test_set([])


@given(st.integers(0, 60), st.integers(0, 60), st.integers(1, 80), st.integers(0, 10**6))
def test_sampling_properties(n_real, n_fake, n, seed):
    records = pool(n_real, n_fake)
    if not records:
        return
    try:
        sample = sample_test_set(records, SamplingSpec(n=n, seed=seed))
    except InfeasibleConstraint:
        size = min(n, len(records))
        assert not any(
            r <= n_real and size - r <= n_fake and 2 * r >= size - r and 2 * (size - r) >= r for r in range(size + 1)
        )
        return
    ids = [r.claim.claim_id for r in sample]
    assert len(ids) == len(set(ids)) == min(n, len(records))
    reals = sum(r.gold_label is R for r in sample)
    fakes = len(sample) - reals
    assert 2 * reals >= fakes and 2 * fakes >= reals


def oracle(pairs):
    """Metrics straight from precision/recall definitions, in exact arithmetic."""
    def f1(positive):
        tp = sum(g == positive and p == positive for g, p in pairs)
        fp = sum(g != positive and p == positive for g, p in pairs)
        fn = sum(g == positive and p != positive for g, p in pairs)
        if tp == 0:
            return Fraction(0)
        prec, rec = Fraction(tp, tp + fp), Fraction(tp, tp + fn)
        return 2 * prec * rec / (prec + rec)

    acc = Fraction(sum(g == p for g, p in pairs), len(pairs))
    return acc, f1(R), f1(F), (f1(R) + f1(F)) / 2


def test_metrics_example():
    m = compute_metrics(zip([F, F, R, R], [F, R, R, R]))
    assert m.accuracy == pytest.approx(0.75, abs=1e-12)
    assert m.f1_fake == pytest.approx(2 / 3, abs=1e-12)
    assert m.f1_real == pytest.approx(0.8, abs=1e-12)
    assert m.f1_macro == pytest.approx(11 / 15, abs=1e-12)
    assert (m.confusion.tp_fake, m.confusion.fp_fake, m.confusion.fn_fake, m.confusion.tn_fake) == (1, 0, 1, 2)


def test_metrics_degenerate_all_real():
    m = compute_metrics([(R, R)] * 3)
    assert (m.accuracy, m.f1_real, m.f1_fake, m.f1_macro) == (1.0, 1.0, 0.0, 0.5)


def test_metrics_empty():
    with pytest.raises(EmptyInput):
        compute_metrics([])


@given(st.lists(st.tuples(st.sampled_from([R, F]), st.sampled_from([R, F])), min_size=1, max_size=50))
def test_metrics_match_oracle(pairs):
    m = compute_metrics(pairs)
    acc, f1_real, f1_fake, macro = oracle(pairs)
    for got, want in [(m.accuracy, acc), (m.f1_real, f1_real), (m.f1_fake, f1_fake), (m.f1_macro, macro)]:
        assert abs(got - float(want)) < 1e-12
        assert 0.0 <= got <= 1.0
    assert m.confusion.n == len(pairs)


def test_tool_usage_example():
    nonpol = PoliticsFlag(False)
    plans = [
        WorkflowPlan((ToolKind.PHRASE, ToolKind.SEARCH), Mode.SELF_DESIGNED, nonpol),
        WorkflowPlan((ToolKind.PHRASE,), Mode.SELF_DESIGNED, nonpol),
    ]
    usage = tool_usage_frequency(plans)
    assert usage[ToolKind.PHRASE] == 1.0 and usage[ToolKind.SEARCH] == 0.5 and usage[ToolKind.URL] == 0.0
    assert set(usage) == set(ToolKind)


def test_report_round_trip(tmp_path):
    report = run_evaluation(load_fixture(), fixture_services(Mode.EXPERT))
    report.save(tmp_path / "r.json")
    assert EvaluationReport.load(tmp_path / "r.json") == report


def test_report_rejects_inconsistent_counts():
    m = compute_metrics([(R, R)])
    with pytest.raises(ValueError):
        EvaluationReport(2, m.accuracy, m.f1_macro, m.f1_real, m.f1_fake, m.confusion, ())


def test_fixture_expert_checklist_exact():
    report = run_evaluation(load_fixture(), fixture_services(Mode.EXPERT))
    c = report.confusion
    assert (c.tp_fake, c.fp_fake, c.fn_fake, c.tn_fake) == (6, 1, 1, 4)
    assert abs(report.f1_macro - 29 / 35) < 1e-12
    assert report.failures == 0
    assert report.tool_usage[ToolKind.STANDING] == pytest.approx(5 / 12)


def test_strategy_comparison_same_claims():
    records = load_fixture()
    checklist = run_evaluation(records, fixture_services(Mode.EXPERT), Strategy.CHECKLIST)
    majority = run_evaluation(records, fixture_services(Mode.EXPERT), Strategy.MAJORITY)
    assert checklist.n == majority.n == 12
    assert checklist.tool_usage == majority.tool_usage
    assert abs(majority.f1_macro - 131 / 143) < 1e-12


def test_usage_recount_from_traces(tmp_path):
    report = run_evaluation(
        load_fixture(), fixture_services(Mode.SELF_DESIGNED), mode=Mode.SELF_DESIGNED, traces_dir=tmp_path
    )
    assert report.failures == 0
    traces = [json.loads(p.read_text()) for p in sorted(tmp_path.glob("*.json"))]
    assert len(traces) == 12
    for kind in ToolKind:
        count = sum(kind.value in t["steps"] for t in traces)
        assert report.tool_usage[kind] == count / 12


def test_search_disabled_never_appears(tmp_path):
    config = WorkflowConfig(disabled=frozenset({ToolKind.SEARCH}))
    providers = {}
    report = run_evaluation(load_fixture(), fixture_services(Mode.EXPERT, config, providers=providers), traces_dir=tmp_path)
    assert report.tool_usage[ToolKind.SEARCH] == 0.0
    assert report.failures == 0
    assert all(not any("Search results published before" in r.user_text for r in p.transcript) for p in providers.values())
    for p in tmp_path.glob("*.json"):
        trace = json.loads(p.read_text())
        assert "Search" not in trace.get("steps", [])


def test_parallel_matches_serial():
    records = load_fixture()
    serial = run_evaluation(records, fixture_services(Mode.EXPERT))
    parallel = run_evaluation(records, fixture_services(Mode.EXPERT), parallelism=4)
    assert serial == parallel


def test_failed_claim_scored_fake(tmp_path):
    records = load_fixture()[:2]
    from factagent.fixture import per_claim_scripts

    report = run_evaluation(records, per_claim_scripts(tmp_path))
    assert report.failures == 2
    assert all(t.predicted is F and t.failed for t in report.per_claim)


def test_render_table_layout():
    report = run_evaluation(load_fixture(), fixture_services(Mode.EXPERT))
    text = render_table(report, "factagent")
    header, row = text.splitlines()[:2]
    assert header.split() == ["Model", "F1", "Acc.", "F1_real", "F1_fake"]
    assert row.split()[1:] == ["0.83", "0.83", "0.80", "0.86"]
