"""Evaluation protocol: task-mean accuracy, CV grid search, ranks, Friedman test.

The reporting metric everywhere is the unweighted mean of per-task accuracies,
not the pooled accuracy, so small tasks weigh as much as large ones.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .admm import AdmmSettings
from .data import MultiTaskDataset, kfold_split
from .errors import DataError
from .kernels import KernelSpec
from .model import Hyperparams, fit, predict_batch

POWERS_OF_TWO = tuple(float(2.0**i) for i in range(-3, 4))
EPSILON_GRID = (0.1, 0.2, 0.3, 0.4, 0.5)
POLYNOMIAL_DEGREES = tuple(float(v) for v in range(1, 8))


@dataclass(frozen=True)
class AccuracyTable:
    """Rectangular accuracy matrix: rows are experiments, columns algorithms."""

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.rows), len(self.columns)):
            raise DataError(
                f"table shape {values.shape} does not match "
                f"{len(self.rows)} rows x {len(self.columns)} columns"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("accuracy table contains non-finite entries")
        if np.any(values < 0) or np.any(values > 1):
            raise DataError("accuracies must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_csv(cls, path):
        """Read a table whose header names the algorithm columns.

        An optional leading label column names the rows.  Entries above 1 are
        taken to be percentages and divided by 100.
        """
        try:
            fh = open(path, newline="", encoding="utf-8")
        except FileNotFoundError:
            raise DataError(f"{path}: file not found") from None
        with fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise DataError(f"{path}: empty table") from None
            data_rows = [row for row in reader if row]
        if not data_rows:
            raise DataError(f"{path}: table has no data rows")

        try:
            float(data_rows[0][0])
            has_labels = False
        except ValueError:
            has_labels = True

        columns = tuple(header[1:] if has_labels else header)
        labels = []
        values = []
        for lineno, row in enumerate(data_rows, start=2):
            if len(row) != len(columns) + (1 if has_labels else 0):
                raise DataError(f"{path}:{lineno}: ragged row")
            labels.append(row[0].strip() if has_labels else f"row{lineno - 1}")
            cells = row[1:] if has_labels else row
            try:
                values.append([float(cell) for cell in cells])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric accuracy cell") from None
        values = np.asarray(values, dtype=float)
        if values.size and values.max() > 1.0:
            values = values / 100.0
        return cls(tuple(labels), columns, values)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment"] + list(self.columns))
            for label, row in zip(self.rows, self.values):
                writer.writerow([label] + [repr(float(v)) for v in row])


@dataclass(frozen=True)
class GridSpec:
    """Candidate sets for the hyperparameter search.

    ``rho`` is shared by both problems, ``c_band`` sets the band penalties
    (c1 = c3), ``c_margin`` the margin penalties (c2 = c4), mirroring the
    usual 5-parameter search.  ``delta`` defaults per kernel kind (powers of
    two for RBF, degrees 1..7 for polynomial) and is ignored for linear.
    """

    rho: tuple[float, ...] = POWERS_OF_TWO
    c_band: tuple[float, ...] = POWERS_OF_TWO
    c_margin: tuple[float, ...] = POWERS_OF_TWO
    epsilon: tuple[float, ...] = EPSILON_GRID
    kernel_kind: str = "rbf"
    delta: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("rho", "c_band", "c_margin", "epsilon"):
            if not getattr(self, name):
                raise ValueError(f"grid set {name!r} must be non-empty")
        if self.delta is not None and not self.delta:
            raise ValueError("grid set 'delta' must be non-empty")

    def delta_set(self):
        if self.kernel_kind == "linear":
            return (1.0,)
        if self.delta is not None:
            return self.delta
        return POLYNOMIAL_DEGREES if self.kernel_kind == "polynomial" else POWERS_OF_TWO

    def cells(self):
        """Yield every grid cell as Hyperparams, in deterministic grid order."""
        for rho, c_band, c_margin, eps, delta in itertools.product(
            self.rho, self.c_band, self.c_margin, self.epsilon, self.delta_set()
        ):
            yield Hyperparams(
                rho1=rho, rho2=rho,
                c1=c_band, c2=c_margin, c3=c_band, c4=c_margin,
                epsilon=eps,
                kernel=KernelSpec(self.kernel_kind, delta),
            )


@dataclass(frozen=True)
class CellResult:
    hyper: Hyperparams
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float


def task_mean_accuracy(predictions, labels, task_ids) -> float:
    """Unweighted mean over tasks of the per-task accuracy."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    task_ids = np.asarray(task_ids)
    if not predictions.shape == labels.shape == task_ids.shape:
        raise DataError("predictions, labels, and task ids must be aligned")
    if predictions.size == 0:
        raise DataError("cannot score an empty prediction set")
    accuracies = [
        float(np.mean(predictions[task_ids == t] == labels[task_ids == t]))
        for t in np.unique(task_ids)
    ]
    return float(np.mean(accuracies))


def _score_fold(train, val, hyper, settings, threads):
    model = fit(train, hyper, settings, threads=threads)
    predictions, labels, tasks = [], [], []
    for task in val.tasks:
        predictions.append(predict_batch(model, task.X, task.task_id))
        labels.append(task.y)
        tasks.append(np.full(task.n_samples, task.task_id))
    return task_mean_accuracy(
        np.concatenate(predictions), np.concatenate(labels), np.concatenate(tasks)
    )


def cross_validate(
    dataset: MultiTaskDataset,
    grid: GridSpec,
    k: int = 5,
    seed: int = 0,
    settings: AdmmSettings = AdmmSettings(),
    threads: int = 2,
):
    """Grid search with stratified k-fold CV; returns (best cell, all results).

    Every cell is scored by the mean over folds of the task-mean validation
    accuracy.  Ties are broken by smaller total box penalty c1+c2+c3+c4, then
    smaller epsilon, then grid order, so selection is reproducible.
    """
    folds = kfold_split(dataset, k, seed)
    results = []
    best = None
    best_key = None
    for hyper in grid.cells():
        accuracies = tuple(
            _score_fold(train, val, hyper, settings, threads) for train, val in folds
        )
        mean_accuracy = float(np.mean(accuracies))
        results.append(CellResult(hyper, accuracies, mean_accuracy))
        key = (
            -mean_accuracy,
            hyper.c1 + hyper.c2 + hyper.c3 + hyper.c4,
            hyper.epsilon,
        )
        if best_key is None or key < best_key:
            best = hyper
            best_key = key
    return best, results


def rank_rows(table) -> np.ndarray:
    """Per-row ranks, 1 for the highest accuracy; ties share the average rank."""
    values = table.values if isinstance(table, AccuracyTable) else np.asarray(table, dtype=float)
    if values.ndim != 2:
        raise DataError(f"expected a 2-D table, got shape {values.shape}")
    return rankdata(-values, method="average", axis=1)


def friedman(avg_ranks, N: int, k: int):
    """Friedman chi-square and its F-distributed refinement from average ranks."""
    avg_ranks = np.asarray(avg_ranks, dtype=float)
    if k < 2 or N < 2:
        raise DataError(f"the statistic needs k >= 2 algorithms and N >= 2 rows, got k={k}, N={N}")
    if avg_ranks.shape[0] != k:
        raise DataError(f"expected {k} average ranks, got {avg_ranks.shape[0]}")
    chi2 = 12.0 * N / (k * (k + 1)) * (np.sum(avg_ranks**2) - k * (k + 1) ** 2 / 4.0)
    denominator = N * (k - 1) - chi2
    if denominator <= 0:
        raise DataError(
            f"F statistic undefined: N(k-1) - chi2 = {denominator} is not positive"
        )
    return float(chi2), float((N - 1) * chi2 / denominator)


def friedman_from_table(table):
    """Convenience composition: rank rows, average, then the two statistics.

    Returns (ranks, average ranks, chi2, F).
    """
    ranks = rank_rows(table)
    avg = ranks.mean(axis=0)
    chi2, ff = friedman(avg, N=ranks.shape[0], k=ranks.shape[1])
    return ranks, avg, chi2, ff
