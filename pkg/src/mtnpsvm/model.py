"""End-to-end multi-task nonparallel SVM.

Training assembles the two dual box QPs, solves both with ADMM (concurrently,
they share no state), and keeps the dual coefficient vectors.  Prediction
compares the distances of a sample to the two recovered hyperplanes of its
task: the positive-class plane is scored by g1, the negative-class plane by
g2, and the label is the class whose plane is closer.

For the linear kernel the hyperplanes are also materialized explicitly: each
task's plane is a common vector plus a per-task offset, both recovered from
the duals through the stationarity conditions.  The kernel-expansion and
explicit-parameter decision paths agree to floating-point accuracy, which is
one of the main internal consistency checks.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .admm import AdmmSettings, AdmmSolution, AdmmTrace, solve
from .data import MultiTaskDataset, StackedDesign, stack_by_class
from .duals import BlockLayout, assemble_first, assemble_second
from .errors import DataError
from .kernels import KernelSpec, augmented_gram

MODEL_FORMAT = "mtnpsvm-model"
MODEL_FORMAT_VERSION = 1

# Scale-free defaults relative to the relevant box bound.
SV_TOL_SCALE = 1e-5
KKT_TOL_SCALE = 1e-6
BAND_MARGIN_SCALE = 1e-3


@dataclass(frozen=True)
class Hyperparams:
    """Task-coupling strengths, box penalties, band half-width, and kernel.

    rho1/rho2 control how strongly tasks share the common hyperplane of each
    problem (large rho shrinks the common part, decoupling tasks).  c1/c2
    bound the duals of the first problem (band and margin constraints), c3/c4
    those of the second.  epsilon is the half-width of the insensitive band.
    """

    rho1: float = 1.0
    rho2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    epsilon: float = 0.1
    kernel: KernelSpec = KernelSpec("linear")

    def __post_init__(self):
        for name in ("rho1", "rho2", "c1", "c2", "c3", "c4"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")


@dataclass(frozen=True)
class LinearParams:
    """Explicit hyperplanes of a linear-kernel model.

    Each vector has d+1 entries, the last one the bias.  The plane of task t
    for the positive problem is ``pos_common + pos_task[t]``; likewise for the
    negative problem.
    """

    pos_common: np.ndarray
    pos_task: np.ndarray
    neg_common: np.ndarray
    neg_task: np.ndarray


@dataclass(frozen=True)
class SolveSummary:
    """Outcome of one dual solve; ``trace`` is None on models loaded from disk."""

    status: str
    iterations: int
    final_primal_norm: float
    final_dual_norm: float
    factorizations: int
    trace: AdmmTrace | None


@dataclass(frozen=True)
class SVCounts:
    """Support-vector counts per problem, split into own and other class."""

    first_own: int
    first_other: int
    second_own: int
    second_other: int


@dataclass(frozen=True)
class KktReport:
    """Optimality diagnostics evaluated at the fitted duals.

    Complementarity is the largest min(alpha, alpha_star) over paired
    coordinates (exactly zero at the true optimum).  Box violation is the
    distance of the returned duals outside [0, c] (zero after the solver
    clamp).  The stationarity residuals measure the linear-kernel recovery
    identities and are zero by construction.  The band numbers spot-check
    that strictly interior own-class duals sit on the epsilon band.
    """

    complementarity_first: float
    complementarity_second: float
    complementarity_tol_first: float
    complementarity_tol_second: float
    box_violation_first: float
    box_violation_second: float
    stationarity_common_first: float | None
    stationarity_task_first: float | None
    stationarity_common_second: float | None
    stationarity_task_second: float | None
    band_violation_first: float | None
    band_checked_first: int
    band_violation_second: float | None
    band_checked_second: int

    @property
    def complementarity_ok(self):
        return (
            self.complementarity_first <= self.complementarity_tol_first
            and self.complementarity_second <= self.complementarity_tol_second
        )


@dataclass(frozen=True)
class Diagnostics:
    first: SolveSummary
    second: SolveSummary
    sv_counts: SVCounts
    kkt: KktReport


@dataclass(frozen=True)
class TrainedModel:
    """Fitted model: stored training rows, duals for both problems, diagnostics."""

    design: StackedDesign
    hyper: Hyperparams
    layout_first: BlockLayout
    layout_second: BlockLayout
    pi_first: np.ndarray
    pi_second: np.ndarray
    linear_params: LinearParams | None
    diagnostics: Diagnostics

    @property
    def task_ids(self):
        return self.design.task_ids

    @property
    def feature_dim(self):
        return self.design.Apos.shape[1]

    def duals_first(self):
        """(alpha_star, alpha, beta) of the positive-plane problem."""
        return self.layout_first.split(self.pi_first)

    def duals_second(self):
        return self.layout_second.split(self.pi_second)

    def task_position(self, task_id):
        try:
            return self.task_ids.index(task_id)
        except ValueError:
            raise DataError(
                f"unknown task id {task_id}; model was trained on tasks {self.task_ids}"
            ) from None


def _augment(rows):
    """Append the bias column of ones."""
    return np.hstack([rows, np.ones((rows.shape[0], 1))])


def _recover_linear(design: StackedDesign, hyper: Hyperparams, pi_first, pi_second,
                    layout_first, layout_second) -> LinearParams:
    """Explicit hyperplanes from the duals via the stationarity conditions.

    Common vectors: rho * common = sum_t [own_t' (a*_t - a_t) -/+ other_t' b_t]
    with a minus for the positive problem and a plus for the negative one (the
    margin constraint flips sides).  Task offsets are the same per-task
    expression scaled by T.
    """
    T = design.n_tasks
    a_star1, a1, b1 = layout_first.split(pi_first)
    a_star2, a2, b2 = layout_second.split(pi_second)
    w1 = a_star1 - a1
    w2 = a_star2 - a2
    apos = _augment(design.Apos)
    bneg = _augment(design.Bneg)

    pos_common = (apos.T @ w1 - bneg.T @ b1) / hyper.rho1
    neg_common = (bneg.T @ w2 + apos.T @ b2) / hyper.rho2

    d1 = apos.shape[1]
    pos_task = np.zeros((T, d1))
    neg_task = np.zeros((T, d1))
    for t in range(T):
        ps, pe = design.pos_slices[t]
        ns, ne = design.neg_slices[t]
        pos_task[t] = T * (apos[ps:pe].T @ w1[ps:pe] - bneg[ns:ne].T @ b1[ns:ne])
        neg_task[t] = T * (bneg[ns:ne].T @ w2[ns:ne] + apos[ps:pe].T @ b2[ps:pe])
    return LinearParams(pos_common, pos_task, neg_common, neg_task)


def _decision_batch(design, hyper, pi_first, pi_second, layout_first, layout_second,
                    X, task_pos):
    """Kernel-expansion decision values (g1, g2) for rows X of one task."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != design.Apos.shape[1]:
        raise DataError(
            f"feature dimension mismatch: {X.shape[1]} vs model {design.Apos.shape[1]}"
        )
    T = design.n_tasks
    a_star1, a1, b1 = layout_first.split(pi_first)
    a_star2, a2, b2 = layout_second.split(pi_second)
    w1 = a_star1 - a1
    w2 = a_star2 - a2

    ka = augmented_gram(hyper.kernel, X, design.Apos)
    kb = augmented_gram(hyper.kernel, X, design.Bneg)
    ps, pe = design.pos_slices[task_pos]
    ns, ne = design.neg_slices[task_pos]

    g1 = (ka @ w1 - kb @ b1) / hyper.rho1 + T * (
        ka[:, ps:pe] @ w1[ps:pe] - kb[:, ns:ne] @ b1[ns:ne]
    )
    g2 = (kb @ w2 + ka @ b2) / hyper.rho2 + T * (
        kb[:, ns:ne] @ w2[ns:ne] + ka[:, ps:pe] @ b2[ps:pe]
    )
    return g1, g2


def _label_from_values(g1, g2):
    """Class whose hyperplane is closer; exact ties go to +1."""
    return 1 if abs(g1) <= abs(g2) else -1


def _count_svs(duals_first, duals_second, hyper, sv_tol=None) -> SVCounts:
    a_star1, a1, b1 = duals_first
    a_star2, a2, b2 = duals_second
    tol1 = sv_tol if sv_tol is not None else SV_TOL_SCALE * hyper.c1
    tol2 = sv_tol if sv_tol is not None else SV_TOL_SCALE * hyper.c2
    tol3 = sv_tol if sv_tol is not None else SV_TOL_SCALE * hyper.c3
    tol4 = sv_tol if sv_tol is not None else SV_TOL_SCALE * hyper.c4
    return SVCounts(
        first_own=int(np.count_nonzero(np.abs(a_star1 - a1) > tol1)),
        first_other=int(np.count_nonzero(b1 > tol2)),
        second_own=int(np.count_nonzero(np.abs(a_star2 - a2) > tol3)),
        second_other=int(np.count_nonzero(b2 > tol4)),
    )


def count_support_vectors(model: TrainedModel, sv_tol: float | None = None) -> SVCounts:
    """Count nonzero dual coefficients per problem and class.

    Own-class coordinates count when |alpha_star - alpha| exceeds the
    tolerance (equivalent to max(alpha_star, alpha) under complementarity),
    other-class when beta does.  The default tolerance is scale-free,
    ``1e-5`` times the relevant box bound.
    """
    return _count_svs(model.duals_first(), model.duals_second(), model.hyper, sv_tol)


def _kkt_report(design, hyper, pi_first, pi_second, layout_first, layout_second,
                linear_params, kkt_tol=None) -> KktReport:
    a_star1, a1, b1 = layout_first.split(pi_first)
    a_star2, a2, b2 = layout_second.split(pi_second)

    tol1 = kkt_tol if kkt_tol is not None else KKT_TOL_SCALE * hyper.c1
    tol2 = kkt_tol if kkt_tol is not None else KKT_TOL_SCALE * hyper.c3
    comp1 = float(np.max(np.minimum(a_star1, a1)))
    comp2 = float(np.max(np.minimum(a_star2, a2)))

    upper1 = np.concatenate([
        np.full(a1.shape[0], hyper.c1),
        np.full(a1.shape[0], hyper.c1),
        np.full(b1.shape[0], hyper.c2),
    ])
    upper2 = np.concatenate([
        np.full(a2.shape[0], hyper.c3),
        np.full(a2.shape[0], hyper.c3),
        np.full(b2.shape[0], hyper.c4),
    ])
    box1 = float(max(0.0, np.max(-pi_first), np.max(pi_first - upper1)))
    box2 = float(max(0.0, np.max(-pi_second), np.max(pi_second - upper2)))

    stat_common1 = stat_task1 = stat_common2 = stat_task2 = None
    if linear_params is not None:
        T = design.n_tasks
        apos = _augment(design.Apos)
        bneg = _augment(design.Bneg)
        w1 = a_star1 - a1
        w2 = a_star2 - a2
        stat_common1 = float(np.linalg.norm(
            hyper.rho1 * linear_params.pos_common - (apos.T @ w1 - bneg.T @ b1)
        ))
        stat_common2 = float(np.linalg.norm(
            hyper.rho2 * linear_params.neg_common - (bneg.T @ w2 + apos.T @ b2)
        ))
        res1 = []
        res2 = []
        for t in range(T):
            ps, pe = design.pos_slices[t]
            ns, ne = design.neg_slices[t]
            res1.append(np.linalg.norm(
                linear_params.pos_task[t] / T
                - (apos[ps:pe].T @ w1[ps:pe] - bneg[ns:ne].T @ b1[ns:ne])
            ))
            res2.append(np.linalg.norm(
                linear_params.neg_task[t] / T
                - (bneg[ns:ne].T @ w2[ns:ne] + apos[ps:pe].T @ b2[ps:pe])
            ))
        stat_task1 = float(max(res1))
        stat_task2 = float(max(res2))

    # Band activity: strictly interior own-class duals must sit on the band,
    # g = +eps for the alpha side and g = -eps for the alpha_star side.
    def band_check(own_rows_per_task, alpha, alpha_star, c_band, g_index):
        margin = BAND_MARGIN_SCALE * c_band
        g_all = []
        for t, rows in enumerate(own_rows_per_task):
            g = _decision_batch(
                design, hyper, pi_first, pi_second, layout_first, layout_second,
                rows, t,
            )[g_index]
            g_all.append(g)
        g_all = np.concatenate(g_all)
        interior_a = (alpha > margin) & (alpha < c_band - margin)
        interior_s = (alpha_star > margin) & (alpha_star < c_band - margin)
        residuals = np.concatenate([
            np.abs(g_all[interior_a] - hyper.epsilon),
            np.abs(g_all[interior_s] + hyper.epsilon),
        ])
        checked = int(residuals.shape[0])
        worst = float(np.max(residuals)) if checked else None
        return worst, checked

    pos_blocks = [design.positive_block(t) for t in range(design.n_tasks)]
    neg_blocks = [design.negative_block(t) for t in range(design.n_tasks)]
    band1, checked1 = band_check(pos_blocks, a1, a_star1, hyper.c1, 0)
    band2, checked2 = band_check(neg_blocks, a2, a_star2, hyper.c3, 1)

    return KktReport(
        complementarity_first=comp1,
        complementarity_second=comp2,
        complementarity_tol_first=tol1,
        complementarity_tol_second=tol2,
        box_violation_first=box1,
        box_violation_second=box2,
        stationarity_common_first=stat_common1,
        stationarity_task_first=stat_task1,
        stationarity_common_second=stat_common2,
        stationarity_task_second=stat_task2,
        band_violation_first=band1,
        band_checked_first=checked1,
        band_violation_second=band2,
        band_checked_second=checked2,
    )


def kkt_report(model: TrainedModel, kkt_tol: float | None = None) -> KktReport:
    """Recompute the optimality diagnostics for a fitted model."""
    return _kkt_report(
        model.design, model.hyper, model.pi_first, model.pi_second,
        model.layout_first, model.layout_second, model.linear_params, kkt_tol,
    )


def _summary(solution: AdmmSolution) -> SolveSummary:
    return SolveSummary(
        status=solution.status,
        iterations=solution.iterations,
        final_primal_norm=float(solution.trace.primal_norm[-1]),
        final_dual_norm=float(solution.trace.dual_norm[-1]),
        factorizations=solution.factorizations,
        trace=solution.trace,
    )


def fit(
    dataset: MultiTaskDataset,
    hyper: Hyperparams = Hyperparams(),
    settings: AdmmSettings = AdmmSettings(),
    threads: int = 2,
) -> TrainedModel:
    """Train on a multi-task dataset by solving both dual QPs with ADMM.

    The two problems are independent and run concurrently when ``threads`` is
    at least 2 (the linear algebra releases the GIL).  A solve that hits the
    iteration cap is recorded in the diagnostics, not raised.
    """
    design = stack_by_class(dataset)

    def run(problem):
        assemble = assemble_first if problem == "first" else assemble_second
        qp, layout = assemble(design, hyper)
        return solve(qp, settings), layout

    if threads >= 2:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fut1 = pool.submit(run, "first")
            fut2 = pool.submit(run, "second")
            (sol1, layout1), (sol2, layout2) = fut1.result(), fut2.result()
    else:
        sol1, layout1 = run("first")
        sol2, layout2 = run("second")

    linear_params = None
    if hyper.kernel.kind == "linear":
        linear_params = _recover_linear(
            design, hyper, sol1.pi, sol2.pi, layout1, layout2
        )

    diagnostics = Diagnostics(
        first=_summary(sol1),
        second=_summary(sol2),
        sv_counts=_count_svs(
            layout1.split(sol1.pi), layout2.split(sol2.pi), hyper
        ),
        kkt=_kkt_report(
            design, hyper, sol1.pi, sol2.pi, layout1, layout2, linear_params
        ),
    )
    return TrainedModel(
        design=design,
        hyper=hyper,
        layout_first=layout1,
        layout_second=layout2,
        pi_first=sol1.pi,
        pi_second=sol2.pi,
        linear_params=linear_params,
        diagnostics=diagnostics,
    )


def recover_parameters(model: TrainedModel):
    """Explicit (common, per-task) hyperplane parameters of a linear model.

    Returns (pos_common, pos_task, neg_common, neg_task); raises for nonlinear
    kernels, whose hyperplanes only exist through :func:`decision_values`.
    """
    if model.linear_params is None:
        raise ValueError(
            "explicit hyperplanes exist only for the linear kernel; "
            "use decision_values for nonlinear models"
        )
    lp = model.linear_params
    return lp.pos_common, lp.pos_task, lp.neg_common, lp.neg_task


def decision_values(model: TrainedModel, x, task_id):
    """Signed distances-to-plane pair (g1, g2) of one sample in one task."""
    task_pos = model.task_position(task_id)
    g1, g2 = _decision_batch(
        model.design, model.hyper, model.pi_first, model.pi_second,
        model.layout_first, model.layout_second,
        np.asarray(x, dtype=float)[None, :], task_pos,
    )
    return float(g1[0]), float(g2[0])


def decision_values_batch(model: TrainedModel, X, task_id):
    """Vectorized :func:`decision_values` over the rows of X (one task)."""
    task_pos = model.task_position(task_id)
    return _decision_batch(
        model.design, model.hyper, model.pi_first, model.pi_second,
        model.layout_first, model.layout_second, X, task_pos,
    )


def predict(model: TrainedModel, x, task_id):
    """Label of one sample: +1 when the positive plane is at least as close."""
    g1, g2 = decision_values(model, x, task_id)
    return _label_from_values(g1, g2)


def predict_batch(model: TrainedModel, X, task_id):
    g1, g2 = decision_values_batch(model, X, task_id)
    return np.where(np.abs(g1) <= np.abs(g2), 1, -1)


def _kkt_to_json(kkt: KktReport):
    return {
        "complementarity_first": kkt.complementarity_first,
        "complementarity_second": kkt.complementarity_second,
        "complementarity_tol_first": kkt.complementarity_tol_first,
        "complementarity_tol_second": kkt.complementarity_tol_second,
        "box_violation_first": kkt.box_violation_first,
        "box_violation_second": kkt.box_violation_second,
        "stationarity_common_first": kkt.stationarity_common_first,
        "stationarity_task_first": kkt.stationarity_task_first,
        "stationarity_common_second": kkt.stationarity_common_second,
        "stationarity_task_second": kkt.stationarity_task_second,
        "band_violation_first": kkt.band_violation_first,
        "band_checked_first": kkt.band_checked_first,
        "band_violation_second": kkt.band_violation_second,
        "band_checked_second": kkt.band_checked_second,
    }


def _summary_to_json(summary: SolveSummary):
    return {
        "status": summary.status,
        "iterations": summary.iterations,
        "final_primal_norm": summary.final_primal_norm,
        "final_dual_norm": summary.final_dual_norm,
        "factorizations": summary.factorizations,
    }


def save_model(model: TrainedModel, path):
    """Persist a model as a versioned JSON document (atomic write).

    Stores hyperparameters, training rows per class per task, the six dual
    blocks, optional explicit hyperplanes, and a diagnostics summary (without
    the per-iteration traces).  A saved-then-loaded model predicts
    bit-identically to the in-memory one.
    """
    design = model.design
    a_star1, a1, b1 = model.duals_first()
    a_star2, a2, b2 = model.duals_second()
    document = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "hyper": {
            "rho1": model.hyper.rho1,
            "rho2": model.hyper.rho2,
            "c1": model.hyper.c1,
            "c2": model.hyper.c2,
            "c3": model.hyper.c3,
            "c4": model.hyper.c4,
            "epsilon": model.hyper.epsilon,
            "kernel": {"kind": model.hyper.kernel.kind, "delta": model.hyper.kernel.delta},
        },
        "feature_dim": model.feature_dim,
        "tasks": [
            {
                "task_id": int(task_id),
                "positive": design.positive_block(t).tolist(),
                "negative": design.negative_block(t).tolist(),
            }
            for t, task_id in enumerate(design.task_ids)
        ],
        "duals": {
            "first": {
                "alpha_star": a_star1.tolist(),
                "alpha": a1.tolist(),
                "beta": b1.tolist(),
            },
            "second": {
                "alpha_star": a_star2.tolist(),
                "alpha": a2.tolist(),
                "beta": b2.tolist(),
            },
        },
        "linear_params": None
        if model.linear_params is None
        else {
            "pos_common": model.linear_params.pos_common.tolist(),
            "pos_task": model.linear_params.pos_task.tolist(),
            "neg_common": model.linear_params.neg_common.tolist(),
            "neg_task": model.linear_params.neg_task.tolist(),
        },
        "diagnostics": {
            "first": _summary_to_json(model.diagnostics.first),
            "second": _summary_to_json(model.diagnostics.second),
            "sv_counts": {
                "first_own": model.diagnostics.sv_counts.first_own,
                "first_other": model.diagnostics.sv_counts.first_other,
                "second_own": model.diagnostics.sv_counts.second_own,
                "second_other": model.diagnostics.sv_counts.second_other,
            },
            "kkt": _kkt_to_json(model.diagnostics.kkt),
        },
    }
    text = json.dumps(document, indent=1, allow_nan=False)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load_model(path) -> TrainedModel:
    """Load a model saved by :func:`save_model`."""
    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    with fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not a valid model file: {exc}") from exc
    if document.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} document")
    if document.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataError(
            f"{path}: unsupported format version {document.get('format_version')}"
        )

    h = document["hyper"]
    hyper = Hyperparams(
        rho1=h["rho1"], rho2=h["rho2"], c1=h["c1"], c2=h["c2"], c3=h["c3"], c4=h["c4"],
        epsilon=h["epsilon"],
        kernel=KernelSpec(h["kernel"]["kind"], h["kernel"]["delta"]),
    )

    pos_blocks, neg_blocks, pos_slices, neg_slices, task_ids = [], [], [], [], []
    p = q = 0
    for entry in document["tasks"]:
        pos = np.asarray(entry["positive"], dtype=float)
        neg = np.asarray(entry["negative"], dtype=float)
        pos_blocks.append(pos)
        neg_blocks.append(neg)
        pos_slices.append((p, p + pos.shape[0]))
        neg_slices.append((q, q + neg.shape[0]))
        p += pos.shape[0]
        q += neg.shape[0]
        task_ids.append(int(entry["task_id"]))
    design = StackedDesign(
        Apos=np.vstack(pos_blocks),
        Bneg=np.vstack(neg_blocks),
        pos_slices=tuple(pos_slices),
        neg_slices=tuple(neg_slices),
        task_ids=tuple(task_ids),
    )
    layout_first = BlockLayout("first", design.pos_slices, design.neg_slices)
    layout_second = BlockLayout("second", design.neg_slices, design.pos_slices)

    duals = document["duals"]
    pi_first = layout_first.join(
        np.asarray(duals["first"]["alpha_star"], dtype=float),
        np.asarray(duals["first"]["alpha"], dtype=float),
        np.asarray(duals["first"]["beta"], dtype=float),
    )
    pi_second = layout_second.join(
        np.asarray(duals["second"]["alpha_star"], dtype=float),
        np.asarray(duals["second"]["alpha"], dtype=float),
        np.asarray(duals["second"]["beta"], dtype=float),
    )
    if pi_first.shape[0] != layout_first.n or pi_second.shape[0] != layout_second.n:
        raise DataError(f"{path}: dual vector lengths disagree with stored rows")

    lp = document.get("linear_params")
    linear_params = None
    if lp is not None:
        linear_params = LinearParams(
            pos_common=np.asarray(lp["pos_common"], dtype=float),
            pos_task=np.asarray(lp["pos_task"], dtype=float),
            neg_common=np.asarray(lp["neg_common"], dtype=float),
            neg_task=np.asarray(lp["neg_task"], dtype=float),
        )

    diag = document["diagnostics"]

    def summary_from(entry):
        return SolveSummary(
            status=entry["status"],
            iterations=entry["iterations"],
            final_primal_norm=entry["final_primal_norm"],
            final_dual_norm=entry["final_dual_norm"],
            factorizations=entry["factorizations"],
            trace=None,
        )

    kk = diag["kkt"]
    diagnostics = Diagnostics(
        first=summary_from(diag["first"]),
        second=summary_from(diag["second"]),
        sv_counts=SVCounts(
            first_own=diag["sv_counts"]["first_own"],
            first_other=diag["sv_counts"]["first_other"],
            second_own=diag["sv_counts"]["second_own"],
            second_other=diag["sv_counts"]["second_other"],
        ),
        kkt=KktReport(**kk),
    )

    return TrainedModel(
        design=design,
        hyper=hyper,
        layout_first=layout_first,
        layout_second=layout_second,
        pi_first=pi_first,
        pi_second=pi_second,
        linear_params=linear_params,
        diagnostics=diagnostics,
    )
