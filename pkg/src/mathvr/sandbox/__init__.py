from mathvr.sandbox.pool import (
    ExecRequest,
    ExecResult,
    RunnerPool,
    percent_1dp,
    success_rate,
)

__all__ = ["ExecRequest", "ExecResult", "RunnerPool", "success_rate", "percent_1dp"]
