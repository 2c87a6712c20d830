import numpy as np
import pytest

from mtnpsvm import (
    BlockLayout,
    BoxQP,
    Hyperparams,
    KernelSpec,
    MultiTaskDataset,
    TaskData,
    assemble_first,
    assemble_second,
    augmented_gram,
    build_M,
    stack_by_class,
    synth_blobs,
)


def small_design(seed=0, T=2, n_pos=3, n_neg=2, d=2):
    rng = np.random.default_rng(seed)
    tasks = []
    for t in range(T):
        X = rng.normal(size=(n_pos + n_neg, d))
        y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
        tasks.append(TaskData(t + 1, X, y))
    return stack_by_class(MultiTaskDataset(tuple(tasks)))


def naive_build_M(spec, rho, X, x_slices, Z, z_slices):
    # per-entry oracle: the task term applies only when i and j share a task
    def task_of(slices, row):
        for t, (s, e) in enumerate(slices):
            if s <= row < e:
                return t
        raise AssertionError

    T = len(x_slices)
    full = augmented_gram(spec, X, Z)
    out = np.empty_like(full)
    for i in range(X.shape[0]):
        for j in range(Z.shape[0]):
            value = full[i, j] / rho
            if task_of(x_slices, i) == task_of(z_slices, j):
                value += T * full[i, j]
            out[i, j] = value
    return out


class TestBuildM:
    def test_single_task_identity(self):
        design = small_design(T=1)
        spec = KernelSpec("rbf", 1.1)
        rho = 0.7
        M = build_M(spec, rho, design.Apos, design.pos_slices, design.Apos, design.pos_slices)
        expected = (1.0 / rho + 1.0) * augmented_gram(spec, design.Apos, design.Apos)
        np.testing.assert_allclose(M, expected, rtol=1e-14)

    def test_zero_rows_two_tasks(self):
        X = np.zeros((4, 2))
        slices = ((0, 2), (2, 4))
        M = build_M(KernelSpec("linear"), 1.0, X, slices, X, slices)
        # augmented kernel of zero vectors is 1: within-task 1 + 2*1 = 3, cross-task 1
        expected = np.ones((4, 4))
        expected[:2, :2] = 3.0
        expected[2:, 2:] = 3.0
        np.testing.assert_array_equal(M, expected)

    def test_matches_naive_loop(self):
        design = small_design(seed=3)
        spec = KernelSpec("rbf", 0.9)
        M = build_M(spec, 2.0, design.Apos, design.pos_slices, design.Bneg, design.neg_slices)
        expected = naive_build_M(spec, 2.0, design.Apos, design.pos_slices,
                                 design.Bneg, design.neg_slices)
        np.testing.assert_allclose(M, expected, rtol=1e-13)

    def test_invalid_rho(self):
        design = small_design(T=1)
        with pytest.raises(ValueError, match="rho"):
            build_M(KernelSpec("linear"), 0.0, design.Apos, design.pos_slices,
                    design.Apos, design.pos_slices)

    def test_slice_misalignment(self):
        design = small_design(T=2)
        with pytest.raises(ValueError, match="misalignment"):
            build_M(KernelSpec("linear"), 1.0, design.Apos, design.pos_slices,
                    design.Bneg, design.neg_slices[:1])


class TestBoxQP:
    def test_symmetrized_on_construction(self):
        quad = np.array([[1.0, 2.0], [0.0, 1.0]])
        qp = BoxQP(quad, np.zeros(2), np.ones(2))
        np.testing.assert_array_equal(qp.quad, qp.quad.T)
        assert qp.quad[0, 1] == 1.0

    def test_rejects_negative_upper(self):
        with pytest.raises(ValueError, match="non-negative"):
            BoxQP(np.eye(2), np.zeros(2), np.array([1.0, -0.5]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            BoxQP(np.eye(2), np.array([np.inf, 0.0]), np.ones(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            BoxQP(np.eye(3), np.zeros(2), np.ones(2))


def direct_first_objective(design, hyper, alpha_star, alpha, beta):
    spec = hyper.kernel
    maa = build_M(spec, hyper.rho1, design.Apos, design.pos_slices,
                  design.Apos, design.pos_slices)
    mab = build_M(spec, hyper.rho1, design.Apos, design.pos_slices,
                  design.Bneg, design.neg_slices)
    mbb = build_M(spec, hyper.rho1, design.Bneg, design.neg_slices,
                  design.Bneg, design.neg_slices)
    w = alpha_star - alpha
    return (0.5 * w @ maa @ w - w @ mab @ beta + 0.5 * beta @ mbb @ beta
            + hyper.epsilon * np.sum(alpha_star + alpha) - np.sum(beta))


def direct_second_objective(design, hyper, alpha_star, alpha, beta):
    # stationarity of the second primal carries +A'beta, so the cross term is +
    spec = hyper.kernel
    mbb = build_M(spec, hyper.rho2, design.Bneg, design.neg_slices,
                  design.Bneg, design.neg_slices)
    mba = build_M(spec, hyper.rho2, design.Bneg, design.neg_slices,
                  design.Apos, design.pos_slices)
    maa = build_M(spec, hyper.rho2, design.Apos, design.pos_slices,
                  design.Apos, design.pos_slices)
    w = alpha_star - alpha
    return (0.5 * w @ mbb @ w + w @ mba @ beta + 0.5 * beta @ maa @ beta
            + hyper.epsilon * np.sum(alpha_star + alpha) - np.sum(beta))


class TestAssembly:
    def test_first_dimensions(self):
        design = small_design(T=1, n_pos=3, n_neg=2)
        qp, layout = assemble_first(design, Hyperparams())
        assert qp.n == 8
        assert layout.segment("alpha_star") == (0, 3)
        assert layout.segment("alpha") == (3, 6)
        assert layout.segment("beta") == (6, 8)

    def test_second_dimensions(self):
        design = small_design(T=1, n_pos=3, n_neg=2)
        qp, layout = assemble_second(design, Hyperparams())
        assert qp.n == 7
        assert layout.own_count == 2 and layout.other_count == 3

    def test_linear_term_and_box(self):
        design = small_design(T=2, n_pos=2, n_neg=1)
        hyper = Hyperparams(c1=0.5, c2=2.0, c3=3.0, c4=4.0, epsilon=0.25)
        qp1, _ = assemble_first(design, hyper)
        p, q = design.p, design.q
        np.testing.assert_array_equal(qp1.linear[: 2 * p], 0.25)
        np.testing.assert_array_equal(qp1.linear[2 * p:], -1.0)
        np.testing.assert_array_equal(qp1.upper, [0.5] * (2 * p) + [2.0] * q)
        qp2, _ = assemble_second(design, hyper)
        np.testing.assert_array_equal(qp2.upper, [3.0] * (2 * q) + [4.0] * p)

    @pytest.mark.parametrize("kind,delta", [("linear", 1.0), ("rbf", 0.8)])
    def test_first_objective_equivalence(self, kind, delta):
        design = small_design(seed=7)
        hyper = Hyperparams(rho1=0.6, rho2=1.4, epsilon=0.2, kernel=KernelSpec(kind, delta))
        qp, layout = assemble_first(design, hyper)
        rng = np.random.default_rng(9)
        for _ in range(10):
            a_star = rng.uniform(0, 1, design.p)
            a = rng.uniform(0, 1, design.p)
            b = rng.uniform(0, 1, design.q)
            pi = layout.join(a_star, a, b)
            lhs = 0.5 * pi @ qp.quad @ pi + qp.linear @ pi
            rhs = direct_first_objective(design, hyper, a_star, a, b)
            assert lhs == pytest.approx(rhs, rel=1e-10)

    @pytest.mark.parametrize("kind,delta", [("linear", 1.0), ("rbf", 0.8)])
    def test_second_objective_equivalence(self, kind, delta):
        design = small_design(seed=8)
        hyper = Hyperparams(rho1=0.6, rho2=1.4, epsilon=0.2, kernel=KernelSpec(kind, delta))
        qp, layout = assemble_second(design, hyper)
        rng = np.random.default_rng(10)
        for _ in range(10):
            a_star = rng.uniform(0, 1, design.q)
            a = rng.uniform(0, 1, design.q)
            b = rng.uniform(0, 1, design.p)
            pi = layout.join(a_star, a, b)
            lhs = 0.5 * pi @ qp.quad @ pi + qp.linear @ pi
            rhs = direct_second_objective(design, hyper, a_star, a, b)
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_quad_exactly_symmetric(self):
        design = small_design(seed=11)
        for assemble in (assemble_first, assemble_second):
            qp, _ = assemble(design, Hyperparams(kernel=KernelSpec("rbf", 1.2)))
            np.testing.assert_array_equal(qp.quad, qp.quad.T)

    def test_class_and_parameter_swap_maps_between_problems(self):
        # Swapping labels and (rho1, c1, c2) <-> (rho2, c3, c4) turns one
        # problem into the other, up to exchanging the two alpha segments
        # (the swap also flips the sign of w = alpha_star - alpha).
        ds = synth_blobs(T=2, n_per_class=4, d=2, seed=13)
        swapped = MultiTaskDataset(tuple(
            TaskData(t.task_id, t.X, -t.y) for t in ds.tasks
        ))
        hyper = Hyperparams(rho1=0.5, rho2=2.0, c1=0.3, c2=0.7, c3=1.3, c4=1.9, epsilon=0.15)
        swapped_hyper = Hyperparams(rho1=2.0, rho2=0.5, c1=1.3, c2=1.9, c3=0.3, c4=0.7,
                                    epsilon=0.15)
        qp2, layout2 = assemble_second(stack_by_class(ds), hyper)
        qp1s, _ = assemble_first(stack_by_class(swapped), swapped_hyper)

        n_own = layout2.own_count
        perm = np.concatenate([
            np.arange(n_own, 2 * n_own),        # alpha <- alpha_star
            np.arange(0, n_own),                # alpha_star <- alpha
            np.arange(2 * n_own, layout2.n),    # beta unchanged
        ])
        np.testing.assert_allclose(qp2.quad[np.ix_(perm, perm)], qp1s.quad, rtol=1e-13)
        np.testing.assert_array_equal(qp2.linear[perm], qp1s.linear)
        np.testing.assert_array_equal(qp2.upper[perm], qp1s.upper)

    def test_positive_semidefinite(self):
        for seed in range(3):
            design = small_design(seed=seed, T=2, n_pos=4, n_neg=3)
            for assemble in (assemble_first, assemble_second):
                qp, _ = assemble(design, Hyperparams(kernel=KernelSpec("rbf", 1.0)))
                eigs = np.linalg.eigvalsh(qp.quad)
                assert eigs.min() >= -1e-9 * max(eigs.max(), 1.0)

    def test_assembled_upper_strictly_positive(self):
        design = small_design()
        for assemble in (assemble_first, assemble_second):
            qp, _ = assemble(design, Hyperparams())
            assert np.all(qp.upper > 0)


class TestBlockLayout:
    def test_index_round_trip_identity(self):
        design = small_design(T=3, n_pos=2, n_neg=4)
        _, layout = assemble_first(design, Hyperparams())
        for i in range(layout.n):
            block, task_pos, row = layout.locate(i)
            assert layout.flat_index(block, task_pos, row) == i

    def test_locate_blocks(self):
        layout = BlockLayout("first", ((0, 2), (2, 3)), ((0, 1), (1, 3)))
        assert layout.n == 9
        assert layout.locate(0) == ("alpha_star", 0, 0)
        assert layout.locate(4) == ("alpha", 0, 1)
        assert layout.locate(6) == ("beta", 0, 0)
        assert layout.locate(8) == ("beta", 1, 1)

    def test_split_and_join(self):
        layout = BlockLayout("second", ((0, 2),), ((0, 3),))
        vec = np.arange(7.0)
        a_star, a, b = layout.split(vec)
        np.testing.assert_array_equal(a_star, [0.0, 1.0])
        np.testing.assert_array_equal(a, [2.0, 3.0])
        np.testing.assert_array_equal(b, [4.0, 5.0, 6.0])
        np.testing.assert_array_equal(layout.join(a_star, a, b), vec)

    def test_invalid_problem_name(self):
        with pytest.raises(ValueError, match="first"):
            BlockLayout("third", ((0, 1),), ((0, 1),))
