"""LLM agent that checks news claims through a workflow of small verification tools."""

from .claims import DatasetRecord, NewsClaim, Source, Veracity, normalize_label, parse_publish_date, render_descriptor
from .evaluation import EvaluationReport, SamplingSpec, compute_metrics, load_dataset, run_evaluation, sample_test_set
from .evidence import DomainStore, SearchQuery, SearchResult, StaticSearchProvider, record_verification
from .llm import Gateway, PromptRequest, RetryPolicy, ScriptedProvider
from .tools import PoliticsFlag, PromptLibrary, Signal, ToolKind, ToolObservation
from .workflow import (
    FinalVerdict,
    Mode,
    Services,
    Strategy,
    WorkflowConfig,
    WorkflowPlan,
    decide_majority,
    plan_expert,
    render_report,
    verify_claim,
)

__version__ = "0.1.0"
