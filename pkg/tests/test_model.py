import dataclasses
import json

import numpy as np
import pytest

from mtnpsvm import (
    AdmmSettings,
    DataError,
    Hyperparams,
    KernelSpec,
    MultiTaskDataset,
    TaskData,
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
    stack_by_class,
    synth_blobs,
)
from mtnpsvm.model import _label_from_values, _recover_linear

FAST = AdmmSettings(delta_abs=1e-8, delta_rel=1e-8, max_iter=20000)


@pytest.fixture(scope="module")
def blobs():
    return synth_blobs(T=2, n_per_class=12, d=2, seed=6)


@pytest.fixture(scope="module")
def linear_model(blobs):
    return fit(blobs, Hyperparams(), FAST)


class TestHyperparams:
    def test_positivity(self):
        with pytest.raises(ValueError, match="rho1"):
            Hyperparams(rho1=0.0)
        with pytest.raises(ValueError, match="c2"):
            Hyperparams(c2=-1.0)

    def test_epsilon_nonnegative(self):
        with pytest.raises(ValueError, match="epsilon"):
            Hyperparams(epsilon=-0.1)
        Hyperparams(epsilon=0.0)


class TestFit:
    def test_training_accuracy_on_separable_data(self, blobs, linear_model):
        accuracies = []
        for task in blobs.tasks:
            pred = predict_batch(linear_model, task.X, task.task_id)
            accuracies.append(np.mean(pred == task.y))
        assert np.mean(accuracies) >= 0.95

    def test_training_accuracy_three_tasks(self):
        ds = synth_blobs(T=3, n_per_class=40, d=2, seed=2)
        model = fit(ds, Hyperparams(), FAST)
        accuracies = [
            np.mean(predict_batch(model, task.X, task.task_id) == task.y)
            for task in ds.tasks
        ]
        assert np.mean(accuracies) >= 0.95

    def test_deterministic(self, blobs, linear_model):
        again = fit(blobs, Hyperparams(), FAST)
        assert again.pi_first.tobytes() == linear_model.pi_first.tobytes()
        assert again.pi_second.tobytes() == linear_model.pi_second.tobytes()

    def test_duals_inside_boxes(self, linear_model):
        h = linear_model.hyper
        a_star, a, b = linear_model.duals_first()
        assert np.all(a_star >= 0) and np.all(a_star <= h.c1)
        assert np.all(a >= 0) and np.all(a <= h.c1)
        assert np.all(b >= 0) and np.all(b <= h.c2)
        a_star, a, b = linear_model.duals_second()
        assert np.all(a_star <= h.c3) and np.all(b <= h.c4)

    def test_single_thread_matches(self, blobs, linear_model):
        serial = fit(blobs, Hyperparams(), FAST, threads=1)
        assert serial.pi_first.tobytes() == linear_model.pi_first.tobytes()

    def test_diagnostics_recorded(self, linear_model):
        diag = linear_model.diagnostics
        assert diag.first.status == "converged"
        assert diag.first.factorizations == 1
        assert len(diag.first.trace) == diag.first.iterations


class TestRecovery:
    def test_zero_duals_give_zero_parameters(self, blobs):
        design = stack_by_class(blobs)
        hyper = Hyperparams()
        n1 = 2 * design.p + design.q
        n2 = 2 * design.q + design.p
        from mtnpsvm.duals import BlockLayout

        lp = _recover_linear(
            design, hyper, np.zeros(n1), np.zeros(n2),
            BlockLayout("first", design.pos_slices, design.neg_slices),
            BlockLayout("second", design.neg_slices, design.pos_slices),
        )
        assert not lp.pos_common.any() and not lp.pos_task.any()
        assert not lp.neg_common.any() and not lp.neg_task.any()

    def test_rho_scaling(self, blobs, linear_model):
        # common vector scales with 1/rho, task offsets do not depend on rho
        design = linear_model.design
        scaled = dataclasses.replace(Hyperparams(), rho1=5.0, rho2=5.0)
        lp1 = _recover_linear(design, Hyperparams(), linear_model.pi_first,
                              linear_model.pi_second, linear_model.layout_first,
                              linear_model.layout_second)
        lp5 = _recover_linear(design, scaled, linear_model.pi_first,
                              linear_model.pi_second, linear_model.layout_first,
                              linear_model.layout_second)
        np.testing.assert_allclose(lp5.pos_common, lp1.pos_common / 5.0, rtol=1e-12)
        np.testing.assert_allclose(lp5.neg_common, lp1.neg_common / 5.0, rtol=1e-12)
        np.testing.assert_array_equal(lp5.pos_task, lp1.pos_task)
        np.testing.assert_array_equal(lp5.neg_task, lp1.neg_task)

    def test_two_path_equivalence(self, linear_model):
        rng = np.random.default_rng(1)
        X = rng.normal(scale=2.0, size=(50, 2))
        Xa = np.hstack([X, np.ones((50, 1))])
        u, u_t, v, v_t = recover_parameters(linear_model)
        for t_pos, task_id in enumerate(linear_model.task_ids):
            g1, g2 = decision_values_batch(linear_model, X, task_id)
            np.testing.assert_allclose(g1, Xa @ (u + u_t[t_pos]), atol=1e-8)
            np.testing.assert_allclose(g2, Xa @ (v + v_t[t_pos]), atol=1e-8)

    def test_nonlinear_model_has_no_explicit_planes(self, blobs):
        model = fit(blobs, Hyperparams(kernel=KernelSpec("rbf", 2.0)), FAST)
        assert model.linear_params is None
        with pytest.raises(ValueError, match="decision_values"):
            recover_parameters(model)


class TestDecisionRule:
    def test_label_selection(self):
        assert _label_from_values(0.1, 0.5) == 1
        assert _label_from_values(0.5, 0.1) == -1
        assert _label_from_values(0.3, -0.3) == 1  # tie goes to +1

    def test_predict_matches_batch(self, blobs, linear_model):
        task = blobs.tasks[0]
        batch = predict_batch(linear_model, task.X, task.task_id)
        single = [predict(linear_model, x, task.task_id) for x in task.X]
        np.testing.assert_array_equal(batch, single)

    def test_zero_duals_give_zero_values(self, blobs, linear_model):
        zeroed = dataclasses.replace(
            linear_model,
            pi_first=np.zeros_like(linear_model.pi_first),
            pi_second=np.zeros_like(linear_model.pi_second),
        )
        g1, g2 = decision_values(zeroed, np.array([1.0, 2.0]), blobs.task_ids[0])
        assert g1 == 0.0 and g2 == 0.0

    def test_single_task_combined_weight_identity(self):
        # with one task the global and per-task expansions share Gram rows,
        # so the value reduces to a (1/rho + 1) weighted expansion
        ds = synth_blobs(T=1, n_per_class=8, d=2, seed=3)
        hyper = Hyperparams(rho1=0.7, rho2=1.3)
        model = fit(ds, hyper, FAST)
        from mtnpsvm.kernels import augmented_gram

        rng = np.random.default_rng(2)
        X = rng.normal(size=(10, 2))
        a_star, a, b = model.duals_first()
        ka = augmented_gram(hyper.kernel, X, model.design.Apos)
        kb = augmented_gram(hyper.kernel, X, model.design.Bneg)
        expected = (1.0 / hyper.rho1 + 1.0) * (ka @ (a_star - a) - kb @ b)
        g1, _ = decision_values_batch(model, X, 1)
        np.testing.assert_allclose(g1, expected, rtol=1e-12, atol=1e-12)

    def test_unknown_task(self, linear_model):
        with pytest.raises(DataError, match="unknown task"):
            decision_values(linear_model, np.zeros(2), 99)

    def test_dimension_mismatch(self, linear_model):
        with pytest.raises(DataError, match="dimension"):
            decision_values(linear_model, np.zeros(3), 1)


class TestLabelSwapSymmetry:
    def test_predictions_negate(self):
        ds = synth_blobs(T=2, n_per_class=10, d=2, seed=9)
        swapped = MultiTaskDataset(tuple(
            TaskData(t.task_id, t.X, -t.y) for t in ds.tasks
        ))
        hyper = Hyperparams(rho1=0.5, rho2=2.0, c1=0.4, c2=0.8, c3=1.6, c4=0.6, epsilon=0.2)
        swapped_hyper = Hyperparams(rho1=2.0, rho2=0.5, c1=1.6, c2=0.6, c3=0.4, c4=0.8,
                                    epsilon=0.2)
        tight = AdmmSettings(delta_abs=1e-11, delta_rel=1e-11, max_iter=100000)
        model = fit(ds, hyper, tight)
        mirror = fit(swapped, swapped_hyper, tight)

        rng = np.random.default_rng(3)
        X = rng.normal(scale=2.0, size=(40, 2))
        for task_id in ds.task_ids:
            g1, g2 = decision_values_batch(model, X, task_id)
            m1, m2 = decision_values_batch(mirror, X, task_id)
            # problems swap roles and the plane flips orientation
            np.testing.assert_allclose(m1, -g2, atol=1e-6)
            np.testing.assert_allclose(m2, -g1, atol=1e-6)
            margin = np.abs(np.abs(g1) - np.abs(g2)) > 1e-4
            np.testing.assert_array_equal(
                predict_batch(model, X[margin], task_id),
                -predict_batch(mirror, X[margin], task_id),
            )


class TestSupportVectorCounts:
    def test_zero_duals(self, linear_model):
        zeroed = dataclasses.replace(
            linear_model,
            pi_first=np.zeros_like(linear_model.pi_first),
            pi_second=np.zeros_like(linear_model.pi_second),
        )
        sv = count_support_vectors(zeroed)
        assert (sv.first_own, sv.first_other, sv.second_own, sv.second_other) == (0, 0, 0, 0)

    def test_beta_at_bound_counts_all(self, linear_model):
        layout = linear_model.layout_first
        h = linear_model.hyper
        pi = layout.join(
            np.zeros(layout.own_count),
            np.zeros(layout.own_count),
            np.full(layout.other_count, h.c2),
        )
        model = dataclasses.replace(linear_model, pi_first=pi)
        sv = count_support_vectors(model)
        assert sv.first_other == layout.other_count

    def test_counting_rules_agree_at_complementary_solutions(self, linear_model):
        # when min(a, a*) = 0 per coordinate, |a* - a| equals max(a*, a)
        a_star, a, _ = linear_model.duals_first()
        comp = np.minimum(a_star, a)
        mask = comp < 1e-9
        np.testing.assert_allclose(
            np.abs(a_star - a)[mask], np.maximum(a_star, a)[mask], atol=2e-9
        )


class TestKktReport:
    def test_zero_duals_zero_violation(self, linear_model):
        zeroed = dataclasses.replace(
            linear_model,
            pi_first=np.zeros_like(linear_model.pi_first),
            pi_second=np.zeros_like(linear_model.pi_second),
            linear_params=None,
        )
        report = kkt_report(zeroed)
        assert report.complementarity_first == 0.0
        assert report.complementarity_second == 0.0
        assert report.box_violation_first == 0.0

    def test_converged_fit_complementarity(self, linear_model):
        report = kkt_report(linear_model)
        assert report.complementarity_first <= 1e-6 * linear_model.hyper.c1
        assert report.complementarity_second <= 1e-6 * linear_model.hyper.c3
        assert report.complementarity_ok

    def test_stationarity_identity(self, linear_model):
        report = kkt_report(linear_model)
        assert report.stationarity_common_first <= 1e-12
        assert report.stationarity_task_first <= 1e-12
        assert report.stationarity_common_second <= 1e-12
        assert report.stationarity_task_second <= 1e-12

    def test_band_activity_on_tight_fit(self, blobs):
        model = fit(blobs, Hyperparams(),
                    AdmmSettings(delta_abs=1e-12, delta_rel=1e-12, max_iter=200000))
        report = kkt_report(model)
        if report.band_checked_first:
            assert report.band_violation_first <= 1e-5
        if report.band_checked_second:
            assert report.band_violation_second <= 1e-5


class TestPersistence:
    def test_round_trip_predictions_bit_exact(self, blobs, linear_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(linear_model, path)
        loaded = load_model(path)
        rng = np.random.default_rng(4)
        X = rng.normal(scale=2.0, size=(100, 2))
        for task_id in blobs.task_ids:
            g1a, g2a = decision_values_batch(linear_model, X, task_id)
            g1b, g2b = decision_values_batch(loaded, X, task_id)
            assert g1a.tobytes() == g1b.tobytes()
            assert g2a.tobytes() == g2b.tobytes()
            np.testing.assert_array_equal(
                predict_batch(linear_model, X, task_id),
                predict_batch(loaded, X, task_id),
            )

    def test_round_trip_preserves_metadata(self, linear_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(linear_model, path)
        loaded = load_model(path)
        assert loaded.hyper == linear_model.hyper
        assert loaded.task_ids == linear_model.task_ids
        assert loaded.diagnostics.first.iterations == linear_model.diagnostics.first.iterations
        assert loaded.diagnostics.sv_counts == linear_model.diagnostics.sv_counts
        assert loaded.diagnostics.first.trace is None

    def test_nonlinear_round_trip(self, blobs, tmp_path):
        model = fit(blobs, Hyperparams(kernel=KernelSpec("rbf", 1.5)), FAST)
        path = tmp_path / "rbf.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.linear_params is None
        X = blobs.tasks[0].X
        a = decision_values_batch(model, X, 1)
        b = decision_values_batch(loaded, X, 1)
        assert a[0].tobytes() == b[0].tobytes()

    def test_rejects_non_model_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format": "something-else"}))
        with pytest.raises(DataError, match="not a"):
            load_model(path)

    def test_rejects_wrong_version(self, linear_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(linear_model, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(DataError, match="version"):
            load_model(path)

    def test_rejects_corrupt_json(self, tmp_path):
        path = tmp_path / "corrupt.json"
        path.write_text("{not json")
        with pytest.raises(DataError, match="not a valid"):
            load_model(path)
