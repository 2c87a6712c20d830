"""Assembly of the two dual box-constrained QPs from a stacked design.

Each dual minimizes  0.5 * pi' Q pi + l' pi  over the box 0 <= pi <= upper.
The variable of the first problem is pi = (alpha_star; alpha; beta) with the
alpha segments indexed by the positive rows and beta by the negative rows; the
second problem swaps the class roles.  The task coupling enters through

    M(X, Z) = (1/rho) * Kb(X, Z) + T * blkdiag(Kb(X_1, Z_1), ..., Kb(X_T, Z_T))

where Kb is the bias-augmented Gram matrix, so entries outside the diagonal
task blocks carry only the (1/rho) term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import StackedDesign
from .kernels import KernelSpec, augmented_gram

BLOCKS = ("alpha_star", "alpha", "beta")


@dataclass(frozen=True)
class BoxQP:
    """Symmetric quadratic form, linear term, and per-coordinate box [0, upper].

    The quadratic matrix is symmetrized on construction to erase floating-point
    asymmetry; the ADMM linear solve assumes a symmetric operator.
    """

    quad: np.ndarray
    linear: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        quad = np.asarray(self.quad, dtype=float)
        linear = np.asarray(self.linear, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        n = linear.shape[0]
        if quad.shape != (n, n):
            raise ValueError(f"quad must be {n}x{n}, got {quad.shape}")
        if upper.shape[0] != n:
            raise ValueError(f"upper has length {upper.shape[0]}, expected {n}")
        if not (np.all(np.isfinite(quad)) and np.all(np.isfinite(linear)) and np.all(np.isfinite(upper))):
            raise ValueError("QP data must be finite")
        if np.any(upper < 0):
            raise ValueError("upper bounds must be non-negative")
        quad = 0.5 * (quad + quad.T)
        quad.setflags(write=False)
        linear.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self):
        return self.linear.shape[0]


@dataclass(frozen=True)
class BlockLayout:
    """Coordinate semantics of a dual vector (alpha_star; alpha; beta).

    ``own_slices`` are the per-task ranges of the class the problem's
    epsilon-band is fitted to (positives for the first problem, negatives for
    the second); both alpha segments use them.  ``other_slices`` index the beta
    segment.  Segments tile [0, n) in the order alpha_star, alpha, beta.
    """

    problem: str
    own_slices: tuple[tuple[int, int], ...]
    other_slices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.problem not in ("first", "second"):
            raise ValueError(f"problem must be 'first' or 'second', got {self.problem!r}")

    @property
    def n_tasks(self):
        return len(self.own_slices)

    @property
    def own_count(self):
        return self.own_slices[-1][1]

    @property
    def other_count(self):
        return self.other_slices[-1][1]

    @property
    def n(self):
        return 2 * self.own_count + self.other_count

    def segment(self, block):
        """(start, stop) of one of the three blocks within the flat vector."""
        own = self.own_count
        if block == "alpha_star":
            return (0, own)
        if block == "alpha":
            return (own, 2 * own)
        if block == "beta":
            return (2 * own, 2 * own + self.other_count)
        raise ValueError(f"unknown block {block!r}")

    def split(self, vector):
        """Flat dual vector -> (alpha_star, alpha, beta) views."""
        vector = np.asarray(vector)
        if vector.shape[0] != self.n:
            raise ValueError(f"vector has length {vector.shape[0]}, layout expects {self.n}")
        parts = []
        for block in BLOCKS:
            start, stop = self.segment(block)
            parts.append(vector[start:stop])
        return tuple(parts)

    def join(self, alpha_star, alpha, beta):
        return np.concatenate([alpha_star, alpha, beta])

    def locate(self, index):
        """Flat index -> (block, task position, row within the task block)."""
        if not 0 <= index < self.n:
            raise IndexError(f"index {index} outside [0, {self.n})")
        for block in BLOCKS:
            start, stop = self.segment(block)
            if start <= index < stop:
                offset = index - start
                slices = self.own_slices if block != "beta" else self.other_slices
                for task_pos, (ts, te) in enumerate(slices):
                    if ts <= offset < te:
                        return (block, task_pos, offset - ts)
        raise IndexError(f"index {index} not covered by any block")  # unreachable

    def flat_index(self, block, task_pos, row):
        """Inverse of :meth:`locate`."""
        start, _ = self.segment(block)
        slices = self.own_slices if block != "beta" else self.other_slices
        ts, te = slices[task_pos]
        if not 0 <= row < te - ts:
            raise IndexError(f"row {row} outside task block of size {te - ts}")
        return start + ts + row


def build_M(spec: KernelSpec, rho: float, X, x_slices, Z, z_slices) -> np.ndarray:
    """Task-coupled kernel matrix (1/rho) * Kb(X, Z) + T * blkdiag(Kb(X_t, Z_t)).

    ``x_slices``/``z_slices`` give each task's contiguous row range; both sides
    must cover the same number of tasks and tile their matrices exactly.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if len(x_slices) != len(z_slices):
        raise ValueError(
            f"slice misalignment: {len(x_slices)} vs {len(z_slices)} tasks"
        )
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    for slices, total in ((x_slices, X.shape[0]), (z_slices, Z.shape[0])):
        if slices[-1][1] != total or slices[0][0] != 0:
            raise ValueError("slice misalignment: slices do not tile the rows")
    T = len(x_slices)
    full = augmented_gram(spec, X, Z)
    M = full / rho
    for (xs, xe), (zs, ze) in zip(x_slices, z_slices):
        M[xs:xe, zs:ze] += T * full[xs:xe, zs:ze]
    return M


def _assemble(design: StackedDesign, hyper, problem):
    """Shared assembly for both dual problems.

    The first problem couples rows as (own, own), (own, other), (other, other)
    with own = positive class; the second swaps classes.  With w = a* - a the
    quadratic part is

        0.5 * w' M_oo w + s * w' M_oo' b + 0.5 * b' M_xx b

    where primal stationarity fixes s = -1 for the first problem and s = +1
    for the second: the margin constraint pushes the other class below the
    plane in the first problem but above it in the second, which flips the
    sign of the beta contribution to the plane (own' w + s * other' b) / rho
    and with it the alpha/beta cross blocks of the 3x3 matrix.
    """
    if problem == "first":
        own, own_slices = design.Apos, design.pos_slices
        other, other_slices = design.Bneg, design.neg_slices
        rho, c_band, c_margin = hyper.rho1, hyper.c1, hyper.c2
        sign = -1.0
    else:
        own, own_slices = design.Bneg, design.neg_slices
        other, other_slices = design.Apos, design.pos_slices
        rho, c_band, c_margin = hyper.rho2, hyper.c3, hyper.c4
        sign = 1.0

    spec = hyper.kernel
    m_own = build_M(spec, rho, own, own_slices, own, own_slices)
    m_cross = sign * build_M(spec, rho, own, own_slices, other, other_slices)
    m_other = build_M(spec, rho, other, other_slices, other, other_slices)

    quad = np.block(
        [
            [m_own, -m_own, m_cross],
            [-m_own, m_own, -m_cross],
            [m_cross.T, -m_cross.T, m_other],
        ]
    )
    n_own = own.shape[0]
    n_other = other.shape[0]
    eps = hyper.epsilon
    linear = np.concatenate(
        [np.full(n_own, eps), np.full(n_own, eps), np.full(n_other, -1.0)]
    )
    upper = np.concatenate(
        [np.full(n_own, c_band), np.full(n_own, c_band), np.full(n_other, c_margin)]
    )
    layout = BlockLayout(problem, own_slices, other_slices)
    return BoxQP(quad, linear, upper), layout


def assemble_first(design: StackedDesign, hyper):
    """Dual QP whose hyperplane hugs the positive class (variable size 2p + q)."""
    return _assemble(design, hyper, "first")


def assemble_second(design: StackedDesign, hyper):
    """Dual QP whose hyperplane hugs the negative class (variable size 2q + p)."""
    return _assemble(design, hyper, "second")
