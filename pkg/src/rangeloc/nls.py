"""Damped Gauss-Newton (Levenberg-Marquardt) solver for small dense problems.

One solver backs trilateration, rigid transform fitting, and joint position
refinement.  Problems supply a callable returning the residual vector and its
Jacobian; the solver minimizes the sum of squared residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

ResidualFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class LeastSquaresResult:
    x: np.ndarray
    cost: float                 # sum of squared residuals at x
    gradient_norm: float
    iterations: int
    converged: bool             # gradient norm fell below gtol
    stalled: bool               # stopped after a window without improvement
    cost_trace: list[float]     # cost after every accepted step


def levenberg_marquardt(
    fun: ResidualFn,
    x0: np.ndarray,
    gtol: float = 1e-10,
    max_iter: int = 100,
    stall_window: int = 10,
) -> LeastSquaresResult:
    """Minimize sum(r(x)**2) for r, J = fun(x).

    Stops when the gradient 2-norm drops below ``gtol``, after ``max_iter``
    iterations, or when ``stall_window`` consecutive iterations fail to
    improve the best cost (the best iterate is returned in every case).
    """
    x = np.asarray(x0, dtype=float).copy()
    r, jac = fun(x)
    cost = float(r @ r)
    trace = [cost]
    best_x, best_cost = x.copy(), cost
    lam = 1e-3
    gradient_norm = float(np.linalg.norm(2.0 * (jac.T @ r)))
    converged = gradient_norm < gtol
    stalled = False
    stall = 0
    iterations = 0

    while not converged and iterations < max_iter:
        iterations += 1
        g = jac.T @ r
        hess = jac.T @ jac
        damping = np.maximum(np.diag(hess), 1e-12)
        improved = False
        for _ in range(25):
            try:
                step = np.linalg.solve(hess + lam * np.diag(damping), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = x + step
            r_new, jac_new = fun(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                x, r, jac, cost = x_new, r_new, jac_new, cost_new
                lam = max(lam / 3.0, 1e-12)
                improved = True
                break
            lam *= 10.0
        trace.append(cost)
        if cost < best_cost - 1e-15 * (1.0 + best_cost):
            best_x, best_cost = x.copy(), cost
            stall = 0
        else:
            stall += 1
        gradient_norm = float(np.linalg.norm(2.0 * (jac.T @ r)))
        if gradient_norm < gtol:
            converged = True
            break
        if not improved or stall >= stall_window:
            stalled = True
            break

    return LeastSquaresResult(
        x=best_x,
        cost=best_cost,
        gradient_norm=gradient_norm,
        iterations=iterations,
        converged=converged,
        stalled=stalled,
        cost_trace=trace,
    )
