"""Multi-task nonparallel support vector machine.

Trains one pair of nonparallel hyperplanes per task, sharing structure across
related tasks, by solving two box-constrained dual QPs with ADMM.
"""

from .admm import AdmmSettings, AdmmSolution, AdmmTrace, objective, solve, thresholds
from .data import (
    MultiTaskDataset,
    StackedDesign,
    TaskData,
    blob_means,
    kfold_split,
    load_csv,
    stack_by_class,
    synth_blobs,
    write_csv,
)
from .duals import BlockLayout, BoxQP, assemble_first, assemble_second, build_M
from .errors import DataError, OracleConvergenceError, SolverError
from .evaluation import (
    AccuracyTable,
    CellResult,
    GridSpec,
    cross_validate,
    friedman,
    friedman_from_table,
    rank_rows,
    task_mean_accuracy,
)
from .kernels import KernelSpec, augmented_gram, gram, kernel_eval
from .model import (
    Hyperparams,
    KktReport,
    LinearParams,
    SVCounts,
    TrainedModel,
    count_support_vectors,
    decision_values,
    decision_values_batch,
    fit,
    kkt_report,
    load_model,
    predict,
    predict_batch,
    recover_parameters,
    save_model,
)
from .refqp import projected_gradient_solve

__version__ = "0.1.0"

__all__ = [
    "AccuracyTable",
    "AdmmSettings",
    "AdmmSolution",
    "AdmmTrace",
    "BlockLayout",
    "BoxQP",
    "CellResult",
    "DataError",
    "GridSpec",
    "Hyperparams",
    "KernelSpec",
    "KktReport",
    "LinearParams",
    "MultiTaskDataset",
    "OracleConvergenceError",
    "SVCounts",
    "SolverError",
    "StackedDesign",
    "TaskData",
    "TrainedModel",
    "assemble_first",
    "assemble_second",
    "augmented_gram",
    "blob_means",
    "build_M",
    "count_support_vectors",
    "cross_validate",
    "decision_values",
    "decision_values_batch",
    "fit",
    "friedman",
    "friedman_from_table",
    "gram",
    "kernel_eval",
    "kfold_split",
    "kkt_report",
    "load_csv",
    "load_model",
    "objective",
    "predict",
    "predict_batch",
    "projected_gradient_solve",
    "rank_rows",
    "recover_parameters",
    "save_model",
    "solve",
    "stack_by_class",
    "synth_blobs",
    "task_mean_accuracy",
    "thresholds",
    "write_csv",
]
