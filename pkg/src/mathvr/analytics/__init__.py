from mathvr.analytics.agreement import (
    AgreementStats,
    cohen_kappa,
    mcc,
    pearson,
    spearman,
)
from mathvr.analytics.aggregate import BenchmarkReport, SubsetAggregate, aggregate_report, weighted_mean
from mathvr.analytics.costs import CostStats, cost_stats
from mathvr.analytics.fidelity import FidelityItem, FidelityReport, fidelity_tournament
from mathvr.analytics.assignment import make_annotation_assignment

__all__ = [
    "AgreementStats",
    "cohen_kappa",
    "mcc",
    "pearson",
    "spearman",
    "BenchmarkReport",
    "SubsetAggregate",
    "aggregate_report",
    "weighted_mean",
    "CostStats",
    "cost_stats",
    "FidelityItem",
    "FidelityReport",
    "fidelity_tournament",
    "make_annotation_assignment",
]
