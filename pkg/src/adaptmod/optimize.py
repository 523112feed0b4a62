"""Gradient-only BFGS with a backtracking (Armijo) line search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BfgsResult", "bfgs"]


@dataclass
class BfgsResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    converged: bool
    message: str
    history: list = field(default_factory=list)


def _safe(fun, x):
    try:
        f = float(fun(x))
    except (ArithmeticError, ValueError):
        return np.inf
    return f if np.isfinite(f) else np.inf


def bfgs(fun, grad, x0, tol=1e-4, max_iters=500, max_halvings=50, c1=1e-4, max_step=None) -> BfgsResult:
    """Minimise ``fun`` from ``x0``.

    Stops when ``||grad|| < tol`` or after ``max_iters`` accepted steps. A
    trial point where ``fun`` raises or is non-finite counts as no decrease.
    If the line search finds no sufficient decrease within ``max_halvings``
    halvings (after one retry along steepest descent), the current iterate is
    returned with ``converged=False``.

    ``history`` holds the objective at every accepted iterate, starting with
    ``fun(x0)``; it is non-increasing by construction.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=float)
    h = np.eye(n)
    scaled = False
    history = [f]

    for it in range(max_iters + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return BfgsResult(x, f, gnorm, it, True, "gradient norm below tolerance", history)
        if it == max_iters:
            break

        d = -h @ g
        slope = float(g @ d)
        if slope >= 0:
            h = np.eye(n)
            d, slope = -g, -gnorm * gnorm

        if max_step is not None:
            dnorm = float(np.linalg.norm(d))
            if dnorm > max_step:
                d, slope = d * (max_step / dnorm), slope * (max_step / dnorm)

        accepted = False
        for attempt in range(2):
            t = 1.0
            for _ in range(max_halvings + 1):
                x_new = x + t * d
                f_new = _safe(fun, x_new)
                if f_new <= f + c1 * t * slope:
                    accepted = True
                    break
                t *= 0.5
            if accepted or attempt == 1:
                break
            # retry along steepest descent with a fresh curvature model
            h = np.eye(n)
            d, slope = -g, -gnorm * gnorm
        if not accepted:
            return BfgsResult(x, f, gnorm, it, False, "line search failed", history)

        g_new = np.asarray(grad(x_new), dtype=float)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if not scaled:
                h = np.eye(n) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            hy = h @ y
            h = h - rho * (np.outer(s, hy) + np.outer(hy, s)) + (rho * rho * float(y @ hy) + rho) * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        history.append(f)

    return BfgsResult(x, f, float(np.linalg.norm(g)), max_iters, False, "maximum iterations reached", history)
