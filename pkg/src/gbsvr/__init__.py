"""Granular-ball support vector regression.

Training data are compressed into granular regression balls (quantile labels
plus recursive 2-means splitting) and an epsilon-insensitive regressor is fit
on the balls by solving a norm-coupled dual problem.
"""

from .baseline import SvrModel, svr_fit, svr_predict
from .data import (
    Dataset,
    DataError,
    FoldPlan,
    Standardization,
    fit_standardize,
    kfold,
    load_csv,
    train_test_split,
    write_csv,
)
from .datagen import NoiseSpec, SyntheticSpec, gen_synthetic, inject_target_noise
from .evaluation import BenchResult, MetricsReport, ablation_sweep, crossval_bench, metrics
from .granulation import (
    BallSet,
    GranularRegressionBall,
    GranulationConfig,
    ball_stats,
    generate_balls,
    quantile_labels,
    two_means_split,
)
from .kernel import KernelSpec, gram, k_eval
from .model import GbsvrModel, GbsvrParams, fit, predict
from .solver import (
    DualProblem,
    DualSolution,
    NumericalError,
    SolverConfig,
    WeightRepr,
    dual_gradient,
    dual_objective,
    oracle_grid_solve,
    project_feasible,
    recover_weights,
    solve_dual,
)
from .timeseries import WindowSpec, chrono_split, windowize

__version__ = "0.1.0"
