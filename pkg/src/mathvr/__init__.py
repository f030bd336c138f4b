"""Harness for visual math reasoning benchmarks.

Subpackages:
    corpus       -- Math-VR-format data model, ingestion, validation, statistics.
    orchestrator -- code-driven reasoning loop: segment model output, execute
                    plot code, re-inject rendered figures, persist traces.
    sandbox      -- pool of isolated runner processes executing plot code.
    runner       -- interpreter-side runner shim (spawned, never imported).
    judge        -- two-stage grading pipeline (rubric extraction + grading)
                    and the Answer Correctness / Process Score metrics.
    analytics    -- report aggregation, inter-rater agreement, cost accounting,
                    converter fidelity tournaments.
    service      -- HTTP review workflow and run inspection API.
"""

__version__ = "0.1.0"
