"""
Evaluating on the bundled fixture
=================================

Twelve synthetic claims ship with scripted model transcripts, so the whole
evaluation harness can be exercised offline and compared across settings.
"""

from factagent.evaluation import (
    SamplingSpec,
    compute_metrics,
    render_table,
    run_evaluation,
    sample_test_set,
)
from factagent.fixture import fixture_services, load_fixture
from factagent.tools import ToolKind
from factagent.workflow import Mode, Strategy, WorkflowConfig

records = load_fixture()
print(len(records), "claims")

for mode in Mode:
    for strategy in Strategy:
        report = run_evaluation(records, fixture_services(mode), strategy, mode)
        print(render_table(report, f"{mode}/{strategy}"))

# metrics on hand-made predictions
m = compute_metrics([("fake", "fake"), ("fake", "real"), ("real", "real"), ("real", "real")])
print(m.accuracy, m.f1_real, m.f1_fake, m.f1_macro)

# a balanced, seeded subsample
sample = sample_test_set(records, SamplingSpec(n=8, seed=1))
print([r.claim.claim_id for r in sample])

# ablation: switch off web search. The transcripts were recorded for the
# full plan, so later replies shift by one; this shows the mechanics only.
config = WorkflowConfig(disabled=frozenset({ToolKind.SEARCH}))
report = run_evaluation(records, fixture_services(Mode.EXPERT, config))
print(render_table(report, "no search"))
