"""Projected-gradient reference solver, used as a correctness oracle for ADMM.

Deliberately simple: fixed step 1/L with L an upper bound on the largest
eigenvalue, exact box projection every step, monotone objective.  Its failure
modes are independent of the ADMM path, which makes disagreement between the
two solvers a useful bug detector.
"""

from __future__ import annotations

import numpy as np

from .duals import BoxQP
from .errors import OracleConvergenceError, SolverError

POWER_ITERATIONS = 20
STEP_SAFETY = 1.1


def _lipschitz_bound(quad):
    """Upper bound on the top eigenvalue via a short power iteration."""
    n = quad.shape[0]
    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(POWER_ITERATIONS):
        w = quad @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        estimate = norm
        v = w / norm
    return max(STEP_SAFETY * estimate, 1e-8)


def projected_gradient_solve(qp: BoxQP, tol: float = 1e-8, max_iter: int = 200_000):
    """Minimize the box QP by projected gradient descent with step 1/L.

    Stops when the projected-gradient norm ||pi - clamp(pi - grad, 0, c)||
    falls below ``tol``.  Raises :class:`OracleConvergenceError` carrying the
    best iterate if ``max_iter`` is exhausted: an oracle must not silently
    under-converge.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    c = qp.upper
    L = _lipschitz_bound(qp.quad)

    pi = np.zeros(qp.n)
    f = 0.5 * pi @ qp.quad @ pi + qp.linear @ pi
    for _ in range(max_iter):
        grad = qp.quad @ pi + qp.linear
        if np.linalg.norm(pi - np.clip(pi - grad, 0.0, c)) <= tol:
            return pi
        pi = np.clip(pi - grad / L, 0.0, c)
        f_new = 0.5 * pi @ qp.quad @ pi + qp.linear @ pi
        if f_new > f + 1e-12 * (1.0 + abs(f)):
            raise SolverError(
                f"objective increased ({f} -> {f_new}); step bound L={L} is invalid"
            )
        f = f_new
    raise OracleConvergenceError(
        f"no convergence to tol={tol} within {max_iter} iterations", best=pi
    )
