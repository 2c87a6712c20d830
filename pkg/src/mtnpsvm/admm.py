"""ADMM for box-constrained QPs with a cached Cholesky factorization.

The box QP  min 0.5*pi' Q pi + l' pi  s.t. 0 <= pi <= c  is split by
introducing a slack lam with pi + lam = c and the box indicator on lam.
One iteration is

    pi   <- solve (Q + mu*I) pi = -l - mu*(lam - c + h)     (factorized once)
    lam  <- clamp(c - pi - h, 0, c)
    h    <- h + (pi + lam - c)

with scaled dual h.  The primal residual is the constraint residual
r = pi + lam - c and the dual residual s = mu*(lam_new - lam_old); iteration
stops when ||r|| and ||s|| fall below mixed absolute/relative thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .duals import BoxQP
from .errors import SolverError

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max_iter_reached"


@dataclass(frozen=True)
class AdmmSettings:
    """Penalty factor, stopping tolerances, and the iteration cap.

    The default tolerances are tight because downstream KKT diagnostics
    (complementarity, band activity) are only meaningful near the exact
    optimum; iterations are cheap once the factorization is cached.  Loosen
    them for throughput work such as wide grid searches.
    """

    mu: float = 1.0
    delta_abs: float = 1e-10
    delta_rel: float = 1e-10
    max_iter: int = 5000

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.delta_abs < 0 or self.delta_rel < 0:
            raise ValueError("tolerances must be non-negative")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass(frozen=True)
class AdmmTrace:
    """Per-iteration objective, residual norms, and stopping thresholds."""

    objective: np.ndarray
    primal_norm: np.ndarray
    dual_norm: np.ndarray
    primal_threshold: np.ndarray
    dual_threshold: np.ndarray

    def __len__(self):
        return self.objective.shape[0]


@dataclass(frozen=True)
class AdmmSolution:
    """Solver output: iterates, status, and the iteration trace.

    ``pi`` is clamped into [0, upper] before being returned so downstream
    KKT-based recovery can assume box feasibility; the clamp moves it by at
    most the final primal residual.
    """

    pi: np.ndarray
    lambda_slack: np.ndarray
    h: np.ndarray
    status: str
    iterations: int
    trace: AdmmTrace
    factorizations: int

    @property
    def converged(self):
        return self.status == STATUS_CONVERGED


def objective(qp: BoxQP, pi) -> float:
    """QP objective 0.5*pi' Q pi + l' pi."""
    pi = np.asarray(pi, dtype=float)
    return float(0.5 * pi @ qp.quad @ pi + qp.linear @ pi)


def thresholds(pi, lambda_slack, h, mu, delta_abs, delta_rel, n):
    """Mixed absolute/relative stopping thresholds (primal, dual)."""
    root_n = np.sqrt(n)
    primal = delta_abs * root_n + delta_rel * max(
        np.linalg.norm(pi), np.linalg.norm(lambda_slack)
    )
    dual = delta_abs * root_n + delta_rel * np.linalg.norm(mu * np.asarray(h))
    return primal, dual


def solve(qp: BoxQP, settings: AdmmSettings = AdmmSettings()) -> AdmmSolution:
    """Run ADMM on a box QP from the zero start.

    The factorization of (Q + mu*I) happens exactly once, at the first
    iteration; every later iteration reuses it, so the per-iteration cost is
    quadratic in n.  Hitting ``max_iter`` is reported through ``status``, not
    raised: hyperparameter searches must be able to traverse bad cells.
    """
    n = qp.n
    c = qp.upper
    mu = settings.mu

    try:
        factor = cho_factor(qp.quad + mu * np.eye(n), lower=True)
    except LinAlgError as exc:
        raise SolverError(f"Cholesky factorization of (Q + mu*I) failed: {exc}") from exc
    factorizations = 1

    pi = np.zeros(n)
    lam = np.zeros(n)
    h = np.zeros(n)

    objs, r_norms, s_norms, p_thresholds, d_thresholds = [], [], [], [], []
    status = STATUS_MAX_ITER
    iterations = settings.max_iter

    for k in range(1, settings.max_iter + 1):
        pi = cho_solve(factor, -qp.linear - mu * (lam - c + h))
        if not np.all(np.isfinite(pi)):
            raise SolverError(f"non-finite iterate at iteration {k} (check mu={mu})")
        lam_prev = lam
        lam = np.clip(c - pi - h, 0.0, c)
        r = pi + lam - c
        h = h + r
        s = mu * (lam - lam_prev)

        r_norm = np.linalg.norm(r)
        s_norm = np.linalg.norm(s)
        d_p, d_d = thresholds(
            pi, lam, h, mu, settings.delta_abs, settings.delta_rel, n
        )

        objs.append(objective(qp, pi))
        r_norms.append(r_norm)
        s_norms.append(s_norm)
        p_thresholds.append(d_p)
        d_thresholds.append(d_d)

        if r_norm <= d_p and s_norm <= d_d:
            status = STATUS_CONVERGED
            iterations = k
            break

    trace = AdmmTrace(
        objective=np.array(objs),
        primal_norm=np.array(r_norms),
        dual_norm=np.array(s_norms),
        primal_threshold=np.array(p_thresholds),
        dual_threshold=np.array(d_thresholds),
    )
    return AdmmSolution(
        pi=np.clip(pi, 0.0, c),
        lambda_slack=lam,
        h=h,
        status=status,
        iterations=iterations,
        trace=trace,
        factorizations=factorizations,
    )
