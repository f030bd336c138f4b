"""Inter-rater agreement kernels for the human-correlation study.

Binary judgments (answer correctness) get Cohen's kappa and the Matthews
correlation coefficient; continuous scores (process score) get Pearson and
Spearman. Conventions for the degenerate corners, since every published
definition leaves them open:

  * kappa with chance agreement 1 (both raters constant): 1.0 when the
    vectors agree everywhere, else 0.0; counted in
    ``degenerate_kappa_count`` and logged.
  * MCC with a zero denominator (any margin empty): 0.0.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from mathvr.errors import LengthMismatch, ZeroVariance

log = logging.getLogger(__name__)

degenerate_kappa_count = 0


@dataclass(frozen=True)
class AgreementStats:
    kappa: float
    mcc: float
    pearson: float
    spearman: float
    n: int

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "mcc": self.mcc,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "n": self.n,
        }


def _check_paired(a, b, minimum: int = 1) -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"paired vectors differ in length: {len(a)} vs {len(b)}")
    if len(a) < minimum:
        raise LengthMismatch(f"need at least {minimum} pairs, got {len(a)}")


def _contingency(a: list[int], b: list[int]) -> tuple[int, int, int, int]:
    """2x2 table (both 1, a-only 1, b-only 1, both 0) for binary vectors."""
    for name, vec in (("a", a), ("b", b)):
        bad = {v for v in vec if v not in (0, 1)}
        if bad:
            raise ValueError(f"vector {name} must be binary 0/1, found {sorted(bad)}")
    tt = sum(1 for x, y in zip(a, b) if x == 1 and y == 1)
    tf = sum(1 for x, y in zip(a, b) if x == 1 and y == 0)
    ft = sum(1 for x, y in zip(a, b) if x == 0 and y == 1)
    ff = sum(1 for x, y in zip(a, b) if x == 0 and y == 0)
    return tt, tf, ft, ff


def cohen_kappa(a: list[int], b: list[int]) -> float:
    """(p_o - p_e) / (1 - p_e) with marginal-product chance agreement."""
    global degenerate_kappa_count
    _check_paired(a, b, minimum=1)
    tt, tf, ft, ff = _contingency(a, b)
    n = len(a)
    p_o = (tt + ff) / n
    p_a1 = (tt + tf) / n  # rater a positives
    p_b1 = (tt + ft) / n
    p_e = p_a1 * p_b1 + (1 - p_a1) * (1 - p_b1)
    if p_e == 1.0:
        degenerate_kappa_count += 1
        identical = a == b
        log.warning("kappa degenerate: both raters constant; returning %s", 1.0 if identical else 0.0)
        return 1.0 if identical else 0.0
    return (p_o - p_e) / (1 - p_e)


def mcc(a: list[int], b: list[int]) -> float:
    """Matthews correlation over the 2x2 table; zero denominator gives 0."""
    _check_paired(a, b, minimum=1)
    tt, tf, ft, ff = _contingency(a, b)
    denom_sq = (tt + tf) * (ft + ff) * (tt + ft) * (tf + ff)
    if denom_sq == 0:
        return 0.0
    return (tt * ff - tf * ft) / math.sqrt(denom_sq)


def pearson(x: list[float], y: list[float]) -> float:
    """Product-moment correlation; raises ``ZeroVariance`` on constant input."""
    _check_paired(x, y, minimum=2)
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("pearson needs nonzero variance in both vectors")
    return sum(u * v for u, v in zip(dx, dy)) / math.sqrt(sxx * syy)


def average_ranks(values: list[float]) -> list[float]:
    """1-based ranks with ties replaced by the mean of their rank run."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(x: list[float], y: list[float]) -> float:
    """Pearson correlation of average-ranked data."""
    _check_paired(x, y, minimum=2)
    return pearson(average_ranks(list(x)), average_ranks(list(y)))


def agreement_stats(
    binary_a: list[int],
    binary_b: list[int],
    scores_a: list[float],
    scores_b: list[float],
) -> AgreementStats:
    _check_paired(binary_a, binary_b, minimum=2)
    _check_paired(scores_a, scores_b, minimum=2)
    return AgreementStats(
        kappa=cohen_kappa(binary_a, binary_b),
        mcc=mcc(binary_a, binary_b),
        pearson=pearson(scores_a, scores_b),
        spearman=spearman(scores_a, scores_b),
        n=len(scores_a),
    )


def load_rater_csv(path: Path) -> dict[str, float]:
    """Two-column rater file: id, label-or-score. Header row optional."""
    out: dict[str, float] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if len(row) < 2 or not row[0].strip():
                continue
            try:
                value = float(row[1])
            except ValueError:
                continue  # header or junk line
            out[row[0].strip()] = value
    return out


def paired_vectors(a: dict[str, float], b: dict[str, float]) -> tuple[list[float], list[float]]:
    """Inner-join two rater maps on id, ordered by id for determinism."""
    shared = sorted(set(a) & set(b))
    if len(shared) < len(a) or len(shared) < len(b):
        log.warning("rater files share %d ids (a=%d, b=%d)", len(shared), len(a), len(b))
    return [a[k] for k in shared], [b[k] for k in shared]
