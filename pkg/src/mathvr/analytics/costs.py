"""Output-cost accounting over reasoning traces.

Code tokens are attributed per rendered image: only blocks whose execution
produced at least one figure count toward the per-image rate, mirroring how
the visual-reasoning cost is quoted (text tokens plus code tokens for
rendered images). By construction the identity

    avg_total = avg_text + avg_images_per_problem * avg_code_tokens_per_image

holds over any trace multiset, including image-free ones (both factors 0).
"""

from __future__ import annotations

from dataclasses import dataclass

from mathvr.errors import EmptyInput
from mathvr.orchestrator.loop import ReasoningTrace
from mathvr.tokens import DEFAULT_COUNTER, TokenCounter


@dataclass(frozen=True)
class CostStats:
    avg_text_tokens: float
    avg_code_tokens_per_image: float
    avg_images_per_problem: float
    total_images: int
    avg_total_output_tokens: float

    def to_json(self) -> dict:
        return {
            "avg_text_tokens": self.avg_text_tokens,
            "avg_code_tokens_per_image": self.avg_code_tokens_per_image,
            "avg_images_per_problem": self.avg_images_per_problem,
            "total_images": self.total_images,
            "avg_total_output_tokens": self.avg_total_output_tokens,
        }


def cost_stats(traces: list[ReasoningTrace], counter: TokenCounter = DEFAULT_COUNTER) -> CostStats:
    if not traces:
        raise EmptyInput("cost accounting needs at least one trace")

    n = len(traces)
    total_text = 0
    total_attributed_code = 0
    total_images = 0
    for trace in traces:
        total_text += sum(
            counter.count(s.payload)
            for s in trace.segments
            if s.kind in ("text", "final_answer") and s.origin == "model"
        )
        code_segments = trace.code_segments()
        for i, result in enumerate(trace.exec_results):
            figures = len(result.figures) if result.status == "ok" else 0
            if figures > 0:
                total_attributed_code += counter.count(code_segments[i].payload)
                total_images += figures

    avg_text = total_text / n
    avg_images = total_images / n
    per_image = (total_attributed_code / total_images) if total_images else 0.0
    avg_total = (total_text + total_attributed_code) / n
    return CostStats(
        avg_text_tokens=avg_text,
        avg_code_tokens_per_image=per_image,
        avg_images_per_problem=avg_images,
        total_images=total_images,
        avg_total_output_tokens=avg_total,
    )
