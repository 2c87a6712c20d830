"""Multi-task dataset containers, CSV loading, splitting, and synthetic data.

A dataset is a collection of binary classification tasks over a shared feature
space.  Labels are strictly +1/-1.  The canonical sample order used everywhere
downstream is ascending task id, then original row order within a task; the
class-stacked layout produced by :func:`stack_by_class` relies on it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

CSV_TASK_COLUMN = "task"
CSV_LABEL_COLUMN = "label"

# Distance between the two class means of a synthetic task.
BLOB_SEPARATION = 4.0


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TaskData:
    """Samples of one task: feature matrix X (n_t x d) and labels y in {+1,-1}."""

    task_id: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DataError(
                f"task {self.task_id}: {X.shape[0]} rows but {y.shape[0]} labels"
            )
        if not np.all(np.isfinite(X)):
            raise DataError(f"task {self.task_id}: non-finite feature value")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DataError(f"task {self.task_id}: invalid label (must be +1 or -1)")
        object.__setattr__(self, "X", _frozen_array(X))
        object.__setattr__(self, "y", _frozen_array(y))

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def positive(self):
        """Rows labelled +1, in original order."""
        return self.X[self.y > 0]

    @property
    def negative(self):
        return self.X[self.y < 0]


@dataclass(frozen=True)
class MultiTaskDataset:
    """T tasks sharing one feature space, kept sorted by task id."""

    tasks: tuple[TaskData, ...]
    feature_dim: int = field(init=False)

    def __post_init__(self):
        tasks = tuple(sorted(self.tasks, key=lambda t: t.task_id))
        if not tasks:
            raise DataError("dataset needs at least one task")
        ids = [t.task_id for t in tasks]
        if len(set(ids)) != len(ids):
            raise DataError(f"duplicate task ids: {ids}")
        dims = {t.X.shape[1] for t in tasks}
        if len(dims) != 1:
            raise DataError(f"tasks disagree on feature dimension: {sorted(dims)}")
        object.__setattr__(self, "tasks", tasks)
        object.__setattr__(self, "feature_dim", dims.pop())

    @property
    def n_tasks(self):
        return len(self.tasks)

    @property
    def task_ids(self):
        return tuple(t.task_id for t in self.tasks)

    @property
    def n_samples(self):
        return sum(t.n_samples for t in self.tasks)


@dataclass(frozen=True)
class StackedDesign:
    """Class-stacked sample matrices with task-contiguous block layout.

    ``Apos`` holds every positive row of every task, stacked in ascending task
    order; ``pos_slices[t]`` is the (start, stop) range of task t's rows inside
    it.  Same for ``Bneg``/``neg_slices``.  This row order defines the
    coordinate order of every dual vector built on top of it.
    """

    Apos: np.ndarray
    Bneg: np.ndarray
    pos_slices: tuple[tuple[int, int], ...]
    neg_slices: tuple[tuple[int, int], ...]
    task_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "Apos", _frozen_array(self.Apos))
        object.__setattr__(self, "Bneg", _frozen_array(self.Bneg))
        for name, slices, total in (
            ("pos_slices", self.pos_slices, self.Apos.shape[0]),
            ("neg_slices", self.neg_slices, self.Bneg.shape[0]),
        ):
            cursor = 0
            for start, stop in slices:
                if start != cursor or stop <= start:
                    raise DataError(f"{name} do not tile [0, {total}) contiguously")
                cursor = stop
            if cursor != total:
                raise DataError(f"{name} cover {cursor} rows, expected {total}")
        if not (len(self.pos_slices) == len(self.neg_slices) == len(self.task_ids)):
            raise DataError("slice metadata and task ids disagree on task count")

    @property
    def n_tasks(self):
        return len(self.task_ids)

    @property
    def p(self):
        return self.Apos.shape[0]

    @property
    def q(self):
        return self.Bneg.shape[0]

    @property
    def pos_counts(self):
        return tuple(stop - start for start, stop in self.pos_slices)

    @property
    def neg_counts(self):
        return tuple(stop - start for start, stop in self.neg_slices)

    def positive_block(self, t):
        start, stop = self.pos_slices[t]
        return self.Apos[start:stop]

    def negative_block(self, t):
        start, stop = self.neg_slices[t]
        return self.Bneg[start:stop]


def load_csv(path) -> MultiTaskDataset:
    """Read a dataset from CSV with header ``task,label,f1,...,fd``.

    Task ids are integers, labels admit ``+1``, ``1`` and ``-1``, features are
    decimal numbers.  Rows are grouped into tasks; within a task the file order
    is preserved.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != CSV_TASK_COLUMN or header[1] != CSV_LABEL_COLUMN:
            raise DataError(
                f"{path}: header must be '{CSV_TASK_COLUMN},{CSV_LABEL_COLUMN},f1,...,fd', got {header}"
            )
        d = len(header) - 2

        rows_by_task: dict[int, list[tuple[list[float], float]]] = {}
        n_rows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise DataError(
                    f"{path}:{lineno}: expected {d} feature columns, got {len(row) - 2}"
                )
            try:
                task_id = int(row[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: task id {row[0]!r} is not an integer") from None
            label_text = row[1].strip()
            if label_text in ("+1", "1"):
                label = 1.0
            elif label_text == "-1":
                label = -1.0
            else:
                raise DataError(f"{path}:{lineno}: invalid label {label_text!r}")
            try:
                features = [float(cell) for cell in row[2:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric feature cell") from None
            rows_by_task.setdefault(task_id, []).append((features, label))
            n_rows += 1

    if n_rows == 0:
        raise DataError(f"{path}: empty file (no data rows)")
    tasks = tuple(
        TaskData(task_id, [f for f, _ in rows], [l for _, l in rows])
        for task_id, rows in rows_by_task.items()
    )
    return MultiTaskDataset(tasks)


def write_csv(dataset: MultiTaskDataset, path):
    """Write a dataset in the same CSV format :func:`load_csv` reads."""
    d = dataset.feature_dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([CSV_TASK_COLUMN, CSV_LABEL_COLUMN] + [f"f{j}" for j in range(1, d + 1)])
        for task in dataset.tasks:
            for x, label in zip(task.X, task.y):
                writer.writerow([task.task_id, int(label)] + [repr(float(v)) for v in x])


def stack_by_class(dataset: MultiTaskDataset) -> StackedDesign:
    """Stack positive and negative rows task-contiguously in ascending task order."""
    pos_blocks, neg_blocks = [], []
    pos_slices, neg_slices = [], []
    p = q = 0
    for task in dataset.tasks:
        pos, neg = task.positive, task.negative
        if pos.shape[0] == 0 or neg.shape[0] == 0:
            raise DataError(
                f"task {task.task_id} needs at least one sample of each class "
                f"(has {pos.shape[0]} positive, {neg.shape[0]} negative)"
            )
        pos_blocks.append(pos)
        neg_blocks.append(neg)
        pos_slices.append((p, p + pos.shape[0]))
        neg_slices.append((q, q + neg.shape[0]))
        p += pos.shape[0]
        q += neg.shape[0]
    return StackedDesign(
        Apos=np.vstack(pos_blocks),
        Bneg=np.vstack(neg_blocks),
        pos_slices=tuple(pos_slices),
        neg_slices=tuple(neg_slices),
        task_ids=dataset.task_ids,
    )


def kfold_split(dataset: MultiTaskDataset, k: int, seed: int):
    """Stratified k-fold split, per task and per class.

    Returns a list of k (train, validation) dataset pairs.  The validation
    folds partition every task's samples; each fold's class counts per task are
    within one sample of proportional.  Deterministic under a fixed seed.
    """
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    rng = np.random.default_rng(seed)

    # fold_of[task_id] -> fold index per sample, filled class by class
    fold_of = {}
    for task in dataset.tasks:
        assignment = np.empty(task.n_samples, dtype=int)
        for sign in (1.0, -1.0):
            idx = np.flatnonzero(task.y == sign)
            if idx.size < k:
                raise DataError(
                    f"task {task.task_id}: class {int(sign):+d} has {idx.size} samples, "
                    f"fewer than k={k}"
                )
            perm = rng.permutation(idx)
            sizes = np.full(k, idx.size // k)
            sizes[: idx.size % k] += 1
            stop = np.cumsum(sizes)
            start = stop - sizes
            for fold in range(k):
                assignment[perm[start[fold]:stop[fold]]] = fold
        fold_of[task.task_id] = assignment

    pairs = []
    for fold in range(k):
        train_tasks, val_tasks = [], []
        for task in dataset.tasks:
            mask = fold_of[task.task_id] == fold
            val_tasks.append(TaskData(task.task_id, task.X[mask], task.y[mask]))
            train_tasks.append(TaskData(task.task_id, task.X[~mask], task.y[~mask]))
        pairs.append((MultiTaskDataset(tuple(train_tasks)), MultiTaskDataset(tuple(val_tasks))))
    return pairs


def blob_means(T: int, d: int, task_rotation: float):
    """Per-task (positive mean, negative mean) used by :func:`synth_blobs`.

    The separation direction starts along the first axis and rotates by
    ``task_rotation`` radians per task index inside the first two coordinates.
    """
    means = []
    for t in range(T):
        angle = t * task_rotation
        direction = np.zeros(d)
        direction[0] = np.cos(angle)
        direction[1] = np.sin(angle)
        mu = 0.5 * BLOB_SEPARATION * direction
        means.append((mu, -mu))
    return means


def synth_blobs(
    T: int,
    n_per_class: int,
    d: int,
    task_rotation: float = 0.2,
    noise: float = 0.2,
    seed: int = 0,
) -> MultiTaskDataset:
    """Generate T related tasks, each two Gaussian blobs of ``n_per_class`` samples.

    Tasks share a base separation direction that rotates per task index, so
    they are related but not identical.  Deterministic under ``seed``.
    """
    if T < 1 or n_per_class < 1:
        raise DataError("T and n_per_class must be at least 1")
    if d < 2:
        raise DataError(f"d must be at least 2, got {d}")
    if noise <= 0:
        raise DataError(f"noise must be positive, got {noise}")
    rng = np.random.default_rng(seed)
    tasks = []
    for t, (mu_pos, mu_neg) in enumerate(blob_means(T, d, task_rotation)):
        pos = rng.normal(loc=mu_pos, scale=noise, size=(n_per_class, d))
        neg = rng.normal(loc=mu_neg, scale=noise, size=(n_per_class, d))
        X = np.vstack([pos, neg])
        y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
        tasks.append(TaskData(t + 1, X, y))
    return MultiTaskDataset(tuple(tasks))
