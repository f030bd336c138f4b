from mathvr.orchestrator.segments import Segment, detect_segments
from mathvr.orchestrator.loop import (
    OrchestratorConfig,
    ReasoningTrace,
    TokenUsage,
    run_problem,
)
from mathvr.orchestrator.replay import ReplayReport, replay
from mathvr.orchestrator.tracestore import TraceStore

__all__ = [
    "Segment",
    "detect_segments",
    "OrchestratorConfig",
    "ReasoningTrace",
    "TokenUsage",
    "run_problem",
    "ReplayReport",
    "replay",
    "TraceStore",
]
