from adaptstore.adaptation.conditions import (
    Advisory,
    Condition,
    QoSPolicy,
    analyze,
    classify_traffic,
)
from adaptstore.adaptation.engine import (
    ExecutionReport,
    MapeEngine,
    PlanInvalidError,
    StepFailedError,
)
from adaptstore.adaptation.metrics import EndpointMetrics, MetricsWindow, Monitor
from adaptstore.adaptation.planner import AdaptationPlan, ReconfigStep, plan

__all__ = [
    "AdaptationPlan",
    "Advisory",
    "Condition",
    "EndpointMetrics",
    "ExecutionReport",
    "MapeEngine",
    "MetricsWindow",
    "Monitor",
    "PlanInvalidError",
    "QoSPolicy",
    "StepFailedError",
    "ReconfigStep",
    "analyze",
    "classify_traffic",
    "plan",
]
