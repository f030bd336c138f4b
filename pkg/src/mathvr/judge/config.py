"""Judge pipeline configuration."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class JudgeConfig:
    """Knobs for the two-stage grading pipeline.

    ``alpha`` is the partial-credit discount applied when the final answer is
    wrong; 0.7 is the published default. Temperature is pinned to 0 so a
    playback judge makes the pipeline a pure function of its inputs.
    """

    alpha: float = 0.7
    model_id: str = "judge"
    max_json_repair_retries: int = 2
    temperature: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.max_json_repair_retries < 0:
            raise ValueError("max_json_repair_retries must be >= 0")
