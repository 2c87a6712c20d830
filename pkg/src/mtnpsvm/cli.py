"""Command-line interface: synth, train, predict, tune, sparsity, friedman.

Exit codes: 0 success, 2 usage error, 3 data error, 4 solver error, 5 I/O
error.  Every option can also be supplied through a JSON config file; explicit
flags win over the config file, which wins over built-in defaults.  Output
files are written atomically (temp file + rename).  The only environment
override is MTNPSVM_THREADS, which caps the solver thread count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from .admm import AdmmSettings
from .data import load_csv, synth_blobs, write_csv
from .errors import DataError, SolverError
from .evaluation import (
    EPSILON_GRID,
    POWERS_OF_TWO,
    AccuracyTable,
    GridSpec,
    cross_validate,
    friedman,
    rank_rows,
)
from .kernels import KERNEL_KINDS, KernelSpec
from .model import (
    Hyperparams,
    count_support_vectors,
    decision_values_batch,
    fit,
    load_model,
    save_model,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SOLVER = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


def _to_int(value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"expected an integer, got {value!r}") from None


def _to_float(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"expected a number, got {value!r}") from None


def _positive_int(value):
    v = _to_int(value)
    if v <= 0:
        raise UsageError(f"expected a positive integer, got {value!r}")
    return v


def _int_at_least_2(value):
    v = _to_int(value)
    if v < 2:
        raise UsageError(f"expected an integer >= 2, got {value!r}")
    return v


def _any_int(value):
    return _to_int(value)


def _positive_float(value):
    v = _to_float(value)
    if not np.isfinite(v) or v <= 0:
        raise UsageError(f"expected a positive number, got {value!r}")
    return v


def _nonnegative_float(value):
    v = _to_float(value)
    if not np.isfinite(v) or v < 0:
        raise UsageError(f"expected a non-negative number, got {value!r}")
    return v


def _any_float(value):
    return _to_float(value)


def _float_list(value):
    if isinstance(value, (list, tuple)):
        items = [_to_float(v) for v in value]
    else:
        items = [_to_float(part) for part in str(value).split(",") if part.strip() != ""]
    if not items:
        raise UsageError(f"expected a non-empty comma-separated list, got {value!r}")
    return tuple(items)


def _kernel_kind(value):
    if value not in KERNEL_KINDS:
        raise UsageError(f"kernel must be one of {KERNEL_KINDS}, got {value!r}")
    return value


# (dest, converter, default, flag, help)
HYPER_SPEC = [
    ("rho1", _positive_float, 1.0, "--rho1", "task-coupling strength of problem 1"),
    ("rho2", _positive_float, 1.0, "--rho2", "task-coupling strength of problem 2"),
    ("c1", _positive_float, 1.0, "--c1", "band penalty of problem 1"),
    ("c2", _positive_float, 1.0, "--c2", "margin penalty of problem 1"),
    ("c3", _positive_float, 1.0, "--c3", "band penalty of problem 2"),
    ("c4", _positive_float, 1.0, "--c4", "margin penalty of problem 2"),
    ("epsilon", _nonnegative_float, 0.1, "--epsilon", "insensitive-band half-width"),
    ("kernel", _kernel_kind, "linear", "--kernel", "kernel kind"),
    ("delta", _positive_float, 1.0, "--delta", "kernel parameter (RBF width or degree)"),
]

ADMM_SPEC = [
    ("mu", _positive_float, 1.0, "--mu", "ADMM penalty factor"),
    ("tol_abs", _nonnegative_float, 1e-10, "--tol-abs", "absolute stopping tolerance"),
    ("tol_rel", _nonnegative_float, 1e-10, "--tol-rel", "relative stopping tolerance"),
    ("max_iter", _positive_int, 5000, "--max-iter", "ADMM iteration cap"),
]


def _add_spec(parser, spec):
    for dest, _converter, default, flag, help_text in spec:
        parser.add_argument(flag, dest=dest, default=None, help=f"{help_text} (default {default})")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: invalid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError(f"config file {path}: expected a JSON object")
    return config


def _merge(args, spec):
    """Resolve each option as flag > config file > default, then convert."""
    config = _load_config(getattr(args, "config", None))
    values = {}
    for dest, converter, default, _flag, _help in spec:
        raw = getattr(args, dest, None)
        if raw is None:
            raw = config.get(dest)
        values[dest] = default if raw is None else converter(raw)
    return values


def _hyper_from(values):
    return Hyperparams(
        rho1=values["rho1"], rho2=values["rho2"],
        c1=values["c1"], c2=values["c2"], c3=values["c3"], c4=values["c4"],
        epsilon=values["epsilon"],
        kernel=KernelSpec(values["kernel"], values["delta"]),
    )


def _settings_from(values):
    return AdmmSettings(
        mu=values["mu"],
        delta_abs=values["tol_abs"],
        delta_rel=values["tol_rel"],
        max_iter=values["max_iter"],
    )


def _threads():
    raw = os.environ.get("MTNPSVM_THREADS")
    if raw is None:
        return 2
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"MTNPSVM_THREADS must be an integer, got {raw!r}") from None


def _atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def cmd_synth(args):
    spec = [
        ("tasks", _positive_int, 3, "", ""),
        ("per_class", _positive_int, 40, "", ""),
        ("dim", _int_at_least_2, 2, "", ""),
        ("rotation", _any_float, 0.2, "", ""),
        ("noise", _positive_float, 0.2, "", ""),
        ("seed", _any_int, 0, "", ""),
    ]
    values = _merge(args, spec)
    dataset = synth_blobs(
        T=values["tasks"],
        n_per_class=values["per_class"],
        d=values["dim"],
        task_rotation=values["rotation"],
        noise=values["noise"],
        seed=values["seed"],
    )
    directory = os.path.dirname(os.path.abspath(args.output))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        write_csv(dataset, tmp_path)
        os.replace(tmp_path, args.output)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    print(f"wrote {dataset.n_samples} rows ({dataset.n_tasks} tasks) to {args.output}")
    return EXIT_OK


def _print_train_report(model):
    diag = model.diagnostics
    for name, summary in (("problem 1", diag.first), ("problem 2", diag.second)):
        print(
            f"{name}: status={summary.status} iterations={summary.iterations} "
            f"primal={summary.final_primal_norm:.3e} dual={summary.final_dual_norm:.3e} "
            f"factorizations={summary.factorizations}"
        )
    sv = diag.sv_counts
    print(
        f"support vectors: problem1 own={sv.first_own} other={sv.first_other}; "
        f"problem2 own={sv.second_own} other={sv.second_other}"
    )
    kkt = diag.kkt
    print(
        f"kkt complementarity: {kkt.complementarity_first:.3e} / {kkt.complementarity_second:.3e} "
        f"(tol {kkt.complementarity_tol_first:.1e} / {kkt.complementarity_tol_second:.1e})"
    )
    print(f"kkt box violation: {kkt.box_violation_first:.3e} / {kkt.box_violation_second:.3e}")
    if kkt.stationarity_common_first is not None:
        print(
            f"kkt stationarity: common {kkt.stationarity_common_first:.3e} / "
            f"{kkt.stationarity_common_second:.3e}, task {kkt.stationarity_task_first:.3e} / "
            f"{kkt.stationarity_task_second:.3e}"
        )
    band1 = "n/a" if kkt.band_violation_first is None else f"{kkt.band_violation_first:.3e}"
    band2 = "n/a" if kkt.band_violation_second is None else f"{kkt.band_violation_second:.3e}"
    print(
        f"kkt band activity: {band1} over {kkt.band_checked_first} coords / "
        f"{band2} over {kkt.band_checked_second} coords"
    )


def _write_trace(model, path):
    rows = []
    for label, summary in (("1", model.diagnostics.first), ("2", model.diagnostics.second)):
        trace = summary.trace
        for i in range(len(trace)):
            rows.append([
                label,
                i + 1,
                repr(float(trace.objective[i])),
                repr(float(trace.primal_norm[i])),
                repr(float(trace.dual_norm[i])),
                repr(float(trace.primal_threshold[i])),
                repr(float(trace.dual_threshold[i])),
            ])
    header = [
        "problem", "iteration", "objective",
        "primal_norm", "dual_norm", "primal_threshold", "dual_threshold",
    ]
    _atomic_write_text(path, _csv_text(header, rows))


def cmd_train(args):
    values = _merge(args, HYPER_SPEC + ADMM_SPEC)
    dataset = load_csv(args.input)
    model = fit(dataset, _hyper_from(values), _settings_from(values), threads=_threads())
    save_model(model, args.output)
    _print_train_report(model)
    if args.trace:
        _write_trace(model, args.trace)
        print(f"trace written to {args.trace}")
    print(f"model written to {args.output}")
    return EXIT_OK


def _read_feature_csv(path, feature_dim):
    """Rows of (task_id, features) from a CSV with or without a label column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if not header or header[0] != "task":
            raise DataError(f"{path}: first column must be 'task'")
        skip = 2 if len(header) > 1 and header[1] == "label" else 1
        if len(header) - skip != feature_dim:
            raise DataError(
                f"{path}: {len(header) - skip} feature columns, model expects {feature_dim}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: ragged row")
            try:
                task_id = int(row[0])
                features = [float(cell) for cell in row[skip:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
            rows.append((lineno, task_id, features))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def cmd_predict(args):
    model = load_model(args.model)
    rows = _read_feature_csv(args.input, model.feature_dim)

    known = set(model.task_ids)
    for lineno, task_id, _features in rows:
        if task_id not in known:
            raise DataError(
                f"{args.input}:{lineno}: unknown task id {task_id} "
                f"(model tasks: {model.task_ids})"
            )

    by_task = {}
    for position, (_lineno, task_id, features) in enumerate(rows):
        by_task.setdefault(task_id, []).append((position, features))

    predictions = [None] * len(rows)
    for task_id, members in by_task.items():
        X = np.asarray([features for _pos, features in members], dtype=float)
        g1, g2 = decision_values_batch(model, X, task_id)
        labels = np.where(np.abs(g1) <= np.abs(g2), 1, -1)
        for (position, _features), label, v1, v2 in zip(members, labels, g1, g2):
            predictions[position] = (task_id, int(label), float(v1), float(v2))

    out_rows = [
        [task_id, label, repr(v1), repr(v2)] for task_id, label, v1, v2 in predictions
    ]
    _atomic_write_text(
        args.output, _csv_text(["task", "prediction", "g1", "g2"], out_rows)
    )
    print(f"wrote {len(out_rows)} predictions to {args.output}")
    return EXIT_OK


def cmd_tune(args):
    spec = [
        ("rho_grid", _float_list, POWERS_OF_TWO, "", ""),
        ("c_band_grid", _float_list, POWERS_OF_TWO, "", ""),
        ("c_margin_grid", _float_list, POWERS_OF_TWO, "", ""),
        ("epsilon_grid", _float_list, EPSILON_GRID, "", ""),
        ("kernel", _kernel_kind, "linear", "", ""),
        ("delta_grid", _float_list, None, "", ""),
        ("folds", _int_at_least_2, 5, "", ""),
        ("seed", _any_int, 0, "", ""),
    ]
    values = _merge(args, spec + ADMM_SPEC)
    dataset = load_csv(args.input)
    grid = GridSpec(
        rho=values["rho_grid"],
        c_band=values["c_band_grid"],
        c_margin=values["c_margin_grid"],
        epsilon=values["epsilon_grid"],
        kernel_kind=values["kernel"],
        delta=values["delta_grid"],
    )
    best, results = cross_validate(
        dataset, grid, k=values["folds"], seed=values["seed"],
        settings=_settings_from(values), threads=_threads(),
    )
    best_result = next(r for r in results if r.hyper == best)
    print(
        "best cell: "
        f"rho={best.rho1:g} c_band={best.c1:g} c_margin={best.c2:g} "
        f"epsilon={best.epsilon:g} kernel={best.kernel.kind} delta={best.kernel.delta:g}"
    )
    print(f"best cv task-mean accuracy: {best_result.mean_accuracy:.4f}")

    k = values["folds"]
    header = ["rho", "c_band", "c_margin", "epsilon", "kernel", "delta"] + [
        f"fold_{i + 1}" for i in range(k)
    ] + ["mean_accuracy"]
    rows = [
        [
            repr(r.hyper.rho1), repr(r.hyper.c1), repr(r.hyper.c2),
            repr(r.hyper.epsilon), r.hyper.kernel.kind, repr(r.hyper.kernel.delta),
        ]
        + [repr(a) for a in r.fold_accuracies]
        + [repr(r.mean_accuracy)]
        for r in results
    ]
    _atomic_write_text(args.output, _csv_text(header, rows))
    print(f"wrote {len(rows)} grid cells to {args.output}")
    return EXIT_OK


def cmd_sparsity(args):
    spec = [item for item in HYPER_SPEC if item[0] != "epsilon"] + [
        ("epsilons", _float_list, EPSILON_GRID, "", ""),
    ]
    values = _merge(args, spec + ADMM_SPEC)
    dataset = load_csv(args.input)
    settings = _settings_from(values)
    rows = []
    for eps in values["epsilons"]:
        hyper = Hyperparams(
            rho1=values["rho1"], rho2=values["rho2"],
            c1=values["c1"], c2=values["c2"], c3=values["c3"], c4=values["c4"],
            epsilon=eps,
            kernel=KernelSpec(values["kernel"], values["delta"]),
        )
        model = fit(dataset, hyper, settings, threads=_threads())
        sv = count_support_vectors(model)
        rows.append([
            repr(float(eps)), sv.first_own, sv.first_other, sv.second_own, sv.second_other,
        ])
        print(
            f"epsilon={eps:g}: problem1 own={sv.first_own} other={sv.first_other}, "
            f"problem2 own={sv.second_own} other={sv.second_other}"
        )
    header = ["epsilon", "first_own", "first_other", "second_own", "second_other"]
    _atomic_write_text(args.output, _csv_text(header, rows))
    print(f"wrote sweep to {args.output}")
    return EXIT_OK


def cmd_friedman(args):
    table = AccuracyTable.from_csv(args.input)
    ranks = rank_rows(table)
    print("per-row ranks (1 = best):")
    for label, row in zip(table.rows, ranks):
        print(f"  {label}: " + " ".join(f"{r:g}" for r in row))
    avg = ranks.mean(axis=0)
    print("average ranks: " + " ".join(
        f"{name}={value:.4f}" for name, value in zip(table.columns, avg)
    ))
    if ranks.shape[0] < 2:
        print("friedman statistic skipped: needs at least 2 rows")
        return EXIT_OK
    chi2, ff = friedman(avg, N=ranks.shape[0], k=ranks.shape[1])
    print(f"chi2_F={chi2:.4f}")
    print(f"F_F={ff:.4f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mtnpsvm",
        description="Multi-task nonparallel SVM: train, predict, tune, and analyze.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic multi-task dataset CSV")
    p_synth.add_argument("--tasks", default=None, help="number of tasks (default 3)")
    p_synth.add_argument("--per-class", dest="per_class", default=None,
                         help="samples per class per task (default 40)")
    p_synth.add_argument("--dim", default=None, help="feature dimension (default 2)")
    p_synth.add_argument("--rotation", default=None,
                         help="per-task rotation of the class separation, radians (default 0.2)")
    p_synth.add_argument("--noise", default=None, help="blob standard deviation (default 0.2)")
    p_synth.add_argument("--seed", default=None, help="random seed (default 0)")
    p_synth.add_argument("--config", default=None, help="JSON config file")
    p_synth.add_argument("-o", "--output", required=True, help="output CSV path")
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="train a model on a dataset CSV")
    p_train.add_argument("-i", "--input", required=True, help="dataset CSV")
    p_train.add_argument("-o", "--output", required=True, help="model JSON path")
    p_train.add_argument("--trace", default=None, help="write the ADMM iteration trace CSV here")
    p_train.add_argument("--config", default=None, help="JSON config file")
    _add_spec(p_train, HYPER_SPEC + ADMM_SPEC)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="predict labels with a trained model")
    p_predict.add_argument("-m", "--model", required=True, help="model JSON path")
    p_predict.add_argument("-i", "--input", required=True,
                           help="feature CSV (header task,f1..fd; a label column is ignored)")
    p_predict.add_argument("-o", "--output", required=True, help="predictions CSV path")
    p_predict.set_defaults(func=cmd_predict)

    p_tune = sub.add_parser("tune", help="grid search with stratified k-fold CV")
    p_tune.add_argument("-i", "--input", required=True, help="dataset CSV")
    p_tune.add_argument("-o", "--output", required=True, help="CV table CSV path")
    p_tune.add_argument("--rho-grid", dest="rho_grid", default=None,
                        help="comma-separated rho candidates")
    p_tune.add_argument("--c-band-grid", dest="c_band_grid", default=None,
                        help="comma-separated band-penalty candidates (c1=c3)")
    p_tune.add_argument("--c-margin-grid", dest="c_margin_grid", default=None,
                        help="comma-separated margin-penalty candidates (c2=c4)")
    p_tune.add_argument("--epsilon-grid", dest="epsilon_grid", default=None,
                        help="comma-separated epsilon candidates")
    p_tune.add_argument("--kernel", default=None, help="kernel kind (default linear)")
    p_tune.add_argument("--delta-grid", dest="delta_grid", default=None,
                        help="comma-separated kernel parameter candidates")
    p_tune.add_argument("--folds", default=None, help="number of CV folds (default 5)")
    p_tune.add_argument("--seed", default=None, help="fold seed (default 0)")
    p_tune.add_argument("--config", default=None, help="JSON config file")
    _add_spec(p_tune, ADMM_SPEC)
    p_tune.set_defaults(func=cmd_tune)

    p_sparsity = sub.add_parser("sparsity", help="sweep epsilon and record SV counts")
    p_sparsity.add_argument("-i", "--input", required=True, help="dataset CSV")
    p_sparsity.add_argument("-o", "--output", required=True, help="sweep CSV path")
    p_sparsity.add_argument("--epsilons", default=None,
                            help="comma-separated epsilon sweep (default 0.1..0.5)")
    p_sparsity.add_argument("--config", default=None, help="JSON config file")
    _add_spec(p_sparsity, [item for item in HYPER_SPEC if item[0] != "epsilon"] + ADMM_SPEC)
    p_sparsity.set_defaults(func=cmd_sparsity)

    p_friedman = sub.add_parser("friedman", help="rank an accuracy table and test significance")
    p_friedman.add_argument("-i", "--input", required=True, help="accuracy table CSV")
    p_friedman.set_defaults(func=cmd_friedman)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
