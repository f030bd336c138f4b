from __future__ import annotations

import random

import pytest

from factories import make_trace
from mathvr.analytics.costs import cost_stats
from mathvr.errors import EmptyInput


class TestCostStats:
    def test_two_trace_hand_example(self):
        # trace 1: 100 text tokens, one 50-token block rendering 1 figure
        # trace 2: 200 text tokens, no code
        traces = [
            make_trace("a", text_words=100, blocks=[(50, 1)]),
            make_trace("b", text_words=200, blocks=[]),
        ]
        # the factory adds a short final answer; strip it from the hand check
        # by measuring exactly what the counter sees
        stats = cost_stats(traces)
        answer_tokens = 3  # "Answer: 42" under the approximate counter
        assert stats.avg_text_tokens == pytest.approx((100 + 200) / 2 + answer_tokens)
        assert stats.avg_images_per_problem == pytest.approx(0.5)
        assert stats.avg_code_tokens_per_image == pytest.approx(50.0)
        assert stats.total_images == 1
        assert stats.avg_total_output_tokens == pytest.approx(175.0 + answer_tokens)

    def test_trace_without_code_contributes_zero_images(self):
        stats = cost_stats([make_trace("a", blocks=[])])
        assert stats.total_images == 0
        assert stats.avg_code_tokens_per_image == 0.0
        assert stats.avg_total_output_tokens == stats.avg_text_tokens

    def test_failed_blocks_not_attributed(self):
        # error blocks produce no figures; their code tokens stay out of the
        # per-image attribution and out of the identity's total
        stats = cost_stats([make_trace("a", text_words=10, blocks=[(40, -1), (30, 2)])])
        assert stats.total_images == 2
        assert stats.avg_code_tokens_per_image == pytest.approx(15.0)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            cost_stats([])

    def test_identity_on_random_trace_sets(self):
        rng = random.Random(2026)
        for _ in range(200):
            traces = []
            for t in range(rng.randint(1, 8)):
                blocks = []
                for _ in range(rng.randint(0, 4)):
                    failed = rng.random() < 0.3
                    blocks.append((rng.randint(1, 80), -1 if failed else rng.randint(0, 3)))
                traces.append(
                    make_trace(f"t{t}", text_words=rng.randint(0, 120), blocks=blocks,
                               truncated=rng.random() < 0.2)
                )
            stats = cost_stats(traces)
            identity = stats.avg_text_tokens + stats.avg_images_per_problem * stats.avg_code_tokens_per_image
            assert stats.avg_total_output_tokens == pytest.approx(identity, abs=1e-6)
