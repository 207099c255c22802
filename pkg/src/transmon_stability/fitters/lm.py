"""Levenberg-Marquardt least squares with analytic Jacobians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    residuals: np.ndarray
    jac: np.ndarray
    cost: float  # 0.5 * ||r||^2
    nit: int
    converged: bool
    message: str

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(2.0 * self.cost))

    def covariance(self) -> np.ndarray:
        """Parameter covariance scaled by the residual variance."""
        n, k = self.jac.shape
        dof = max(n - k, 1)
        s2 = 2.0 * self.cost / dof
        return np.linalg.pinv(self.jac.T @ self.jac) * s2


def levenberg_marquardt(
    fun: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    x0,
    *,
    max_iter: int = 200,
    xtol: float = 1e-10,
    ftol: float = 1e-12,
    feasible: Callable[[np.ndarray], bool] | None = None,
    lam0: float = 1e-3,
) -> LMResult:
    """Minimise ``0.5 * ||fun(x)||^2``.

    Uses Marquardt's diagonal damping. Stops when the relative step falls
    below ``xtol``, the relative cost decrease below ``ftol``, or after
    ``max_iter`` accepted-or-rejected iterations. Trial points rejected by
    ``feasible`` are treated like cost increases.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(fun(x), dtype=float)
    cost = 0.5 * float(r @ r)
    J = np.asarray(jac(x), dtype=float)
    lam = lam0
    message = "maximum iterations reached"
    converged = False
    nit = 0
    tiny = np.finfo(float).tiny

    for nit in range(1, max_iter + 1):
        if cost == 0.0:
            converged, message = True, "zero residual"
            break
        g = J.T @ r
        A = J.T @ J
        d = np.maximum(np.diag(A), 1e-300)
        if np.max(np.abs(g) / np.sqrt(d)) <= 1e-15 * np.sqrt(2 * cost):
            converged, message = True, "gradient vanished"
            break
        try:
            step = np.linalg.solve(A + lam * np.diag(d), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        rel_step = float(np.max(np.abs(step) / (np.abs(x) + xtol)))
        trial = x + step
        ok = np.all(np.isfinite(trial)) and (feasible is None or feasible(trial))
        if ok:
            r_new = np.asarray(fun(trial), dtype=float)
            cost_new = 0.5 * float(r_new @ r_new)
            ok = np.isfinite(cost_new)
        if ok and cost_new <= cost:
            rel_drop = (cost - cost_new) / max(cost, tiny)
            x, r, cost = trial, r_new, cost_new
            J = np.asarray(jac(x), dtype=float)
            lam = max(lam / 10.0, 1e-15)
            if rel_step < xtol:
                converged, message = True, "relative step below xtol"
                break
            if rel_drop < ftol:
                converged, message = True, "relative cost change below ftol"
                break
        else:
            if rel_step < xtol:
                converged, message = True, "relative step below xtol"
                break
            lam *= 10.0
            if lam > 1e16:
                converged, message = True, "damping saturated at a stationary point"
                break

    return LMResult(x, r, J, cost, nit, converged, message)
