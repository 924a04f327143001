"""Levenberg-Marquardt least squares with forward-difference Jacobians.

Classic damped Gauss-Newton (Madsen/Nielsen gain-ratio update).  The cost
convention is ``0.5 * sum(r^2)``; termination on relative cost decrease,
gradient infinity norm, or the iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SolverDiverged


@dataclass
class LMResult:
    x: np.ndarray
    residual: np.ndarray
    cost: float
    grad_norm: float
    iterations: int
    converged: bool
    status: str


def numeric_jacobian(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                     f0: np.ndarray | None = None,
                     rel_step: float = 1e-6, abs_step: float = 1e-8) -> np.ndarray:
    """Forward-difference Jacobian, one residual evaluation per parameter.

    Step per parameter: ``max(rel_step * |x_j|, abs_step)``, taken in the
    direction of sign(x_j) so the sample stays on the current side of the
    |x| kinks that the L1-style loss rows introduce at zero.
    """
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = fun(x)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = max(rel_step * abs(x[j]), abs_step)
        if x[j] < 0.0:
            h = -h
        xj = x.copy()
        xj[j] += h
        jac[:, j] = (fun(xj) - f0) / h
    return jac


def levenberg_marquardt(fun: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, *,
                        jac: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                        max_iter: int = 400, ftol: float = 1e-10, gtol: float = 1e-10,
                        rel_step: float = 1e-6, abs_step: float = 1e-8,
                        init_mu_factor: float = 1e-3) -> LMResult:
    """Minimize ``0.5 * ||fun(x)||^2`` from ``x0``.

    ``jac(x, f0)`` may supply a problem-specific forward-difference
    Jacobian (e.g. one that only re-evaluates the model terms a parameter
    touches); the default is the dense `numeric_jacobian`.

    Raises SolverDiverged if the cost at the starting point is not finite;
    non-finite trial steps are rejected by raising the damping instead.
    """
    if jac is None:
        def jac(xj, fj):
            return numeric_jacobian(fun, xj, fj, rel_step, abs_step)
    x = np.array(x0, dtype=float)
    f = np.asarray(fun(x), dtype=float)
    cost = 0.5 * float(f @ f)
    if not np.isfinite(cost):
        raise SolverDiverged(f"non-finite cost {cost} at initial point")

    jacobian = jac(x, f)
    hess = jacobian.T @ jacobian
    grad = jacobian.T @ f
    mu = init_mu_factor * max(float(np.max(np.diag(hess))), 1e-12)
    nu = 2.0

    iterations = 0
    status = "max_iterations"
    converged = False
    eye = np.eye(x.size)
    while iterations < max_iter:
        iterations += 1
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= gtol:
            status, converged = "gtol", True
            break
        try:
            step = np.linalg.solve(hess + mu * eye, -grad)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        x_new = x + step
        f_new = np.asarray(fun(x_new), dtype=float)
        cost_new = 0.5 * float(f_new @ f_new)
        predicted = 0.5 * float(step @ (mu * step - grad))
        if np.isfinite(cost_new) and predicted > 0.0 and cost_new < cost:
            rho = (cost - cost_new) / predicted
            rel_decrease = (cost - cost_new) / max(cost, 1e-300)
            rel_predicted = predicted / max(cost, 1e-300)
            x, f, cost = x_new, f_new, cost_new
            jacobian = jac(x, f)
            hess = jacobian.T @ jacobian
            grad = jacobian.T @ f
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            # actual and predicted relative reduction both below ftol
            if rel_decrease < ftol and rel_predicted < ftol:
                status, converged = "ftol", True
                break
        else:
            mu *= nu
            nu *= 2.0
            if mu > 1e64:
                # step collapsed to numerical zero; best point reached
                status, converged = "stalled", True
                break
    grad_norm = float(np.max(np.abs(grad)))
    return LMResult(x, f, cost, grad_norm, iterations, converged, status)
