from mathvr.service.review import (
    FLAG_REASONS,
    ReviewDecision,
    ReviewLog,
    ReviewQueueItem,
    export_benchmark,
)
from mathvr.service.app import create_app

__all__ = [
    "FLAG_REASONS",
    "ReviewDecision",
    "ReviewLog",
    "ReviewQueueItem",
    "export_benchmark",
    "create_app",
]
