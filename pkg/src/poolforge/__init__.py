"""Diversity-driven classifier pool generation.

Builds pools of linear classifiers by evolving training-instance bags
toward spread in a data-complexity space and decision diversity,
evaluates them under majority voting and dynamic selection, and
compares against bagging with paired statistics.
"""

__version__ = "0.1.0"

from .complexity import (
    ALL_MEASURES,
    NEIGHBORHOOD_MEASURES,
    OVERLAPPING_MEASURES,
    Measure,
    compute_profile,
)
from .dataset import Dataset, Split, generate_synthetic, load_csv, stratified_split, write_csv
from .diversity import ddv, ddv_all, double_fault
from .dynsel import evaluate_pool, knora_e, knora_u, lca, ola, rank
from .errors import CatalogError, DataError, DegenerateBagError, PoolforgeError
from .experiment import ExperimentConfig, ExperimentReport, render_report, run_experiment
from .learner import (
    Perceptron,
    PerceptronConfig,
    Pool,
    bagging_generate,
    majority_vote,
    train_perceptron,
)
from .metricsel import VoteTally, select_metrics
from .moga import GaConfig, GenerationRecord, g_disp, nsga2_select, run_pgdcs
from .stats import WilcoxonResult, WtlTally, wilcoxon_signed_rank, win_tie_loss

__all__ = [
    "ALL_MEASURES",
    "CatalogError",
    "DataError",
    "Dataset",
    "DegenerateBagError",
    "ExperimentConfig",
    "ExperimentReport",
    "GaConfig",
    "GenerationRecord",
    "Measure",
    "NEIGHBORHOOD_MEASURES",
    "OVERLAPPING_MEASURES",
    "Perceptron",
    "PerceptronConfig",
    "Pool",
    "PoolforgeError",
    "Split",
    "VoteTally",
    "WilcoxonResult",
    "WtlTally",
    "bagging_generate",
    "compute_profile",
    "ddv",
    "ddv_all",
    "double_fault",
    "evaluate_pool",
    "g_disp",
    "generate_synthetic",
    "knora_e",
    "knora_u",
    "lca",
    "load_csv",
    "majority_vote",
    "nsga2_select",
    "ola",
    "rank",
    "render_report",
    "run_experiment",
    "run_pgdcs",
    "select_metrics",
    "stratified_split",
    "train_perceptron",
    "wilcoxon_signed_rank",
    "win_tie_loss",
    "write_csv",
]
