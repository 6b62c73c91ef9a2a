"""Gradient ascent with Armijo backtracking for smooth objectives."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidStartError

CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"
LINE_SEARCH_FAILED = "line_search_failed"


@dataclass(frozen=True)
class OptimizeOptions:
    """Settings for :func:`maximize`.

    ``direction="gradient"`` is plain gradient ascent; each line search is
    seeded with a Barzilai-Borwein step (``step_rule="bb"``) or always
    starts at ``initial_step`` (``"fixed"``).  ``direction="lbfgs"`` scales
    the gradient by a limited-memory inverse-curvature estimate built from
    the last ``memory`` accepted steps and starts each line search at 1.
    """

    max_iterations: int = 100
    gradient_tolerance: float = 1e-5
    initial_step: float = 1.0
    backtracking: float = 0.5
    sufficient_increase: float = 1e-4
    max_backtracks: int = 60
    step_rule: str = "bb"
    direction: str = "gradient"
    memory: int = 10

    def __post_init__(self):
        if self.max_iterations < 0 or self.gradient_tolerance <= 0 or self.initial_step <= 0:
            raise InvalidInputError("optimizer budgets and tolerances must be positive")
        if not 0 < self.backtracking < 1:
            raise InvalidInputError("backtracking factor must lie in (0, 1)")
        if not 0 < self.sufficient_increase < 1:
            raise InvalidInputError("sufficient-increase constant must lie in (0, 1)")
        if self.step_rule not in ("bb", "fixed"):
            raise InvalidInputError(f"unknown step rule {self.step_rule!r}")
        if self.direction not in ("gradient", "lbfgs") or self.memory < 1:
            raise InvalidInputError(f"unknown direction {self.direction!r}")


@dataclass(frozen=True)
class OptimizeResult:
    x: np.ndarray
    value: float
    iterations: int
    gradient_norm: float
    status: str
    evaluations: int


def _lbfgs_direction(g, pairs):
    """Two-loop recursion for an ascent direction (curvature pairs from -f)."""
    d = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ d)
        alphas.append(a)
        d -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        d *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ d)
        d += (a - b) * s
    return d


def maximize(fun, x0, opts=None):
    """Maximise ``fun`` starting from ``x0``.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, gradient)``.
    x0 : array_like
    opts : OptimizeOptions, optional

    Returns
    -------
    OptimizeResult
        ``status`` is one of ``"converged"`` (inf-norm of the gradient below
        tolerance), ``"max_iterations"`` or ``"line_search_failed"``.
    """
    opts = opts or OptimizeOptions()
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    g = np.asarray(g, dtype=float)
    evals = 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise InvalidStartError("objective or gradient is not finite at the starting point")
    lbfgs = opts.direction == "lbfgs"
    pairs = []
    step = opts.initial_step
    it = 0
    while True:
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm <= opts.gradient_tolerance:
            return OptimizeResult(x, float(f), it, gnorm, CONVERGED, evals)
        if it >= opts.max_iterations:
            return OptimizeResult(x, float(f), it, gnorm, MAX_ITERATIONS, evals)
        d = g
        if lbfgs and pairs:
            d = _lbfgs_direction(g, pairs)
            if g @ d <= 0:
                pairs.clear()
                d = g
            else:
                step = 1.0
        slope = float(g @ d)
        t = step
        for _ in range(opts.max_backtracks):
            x_new = x + t * d
            f_new, g_new = fun(x_new)
            evals += 1
            if np.isfinite(f_new) and f_new >= f + opts.sufficient_increase * t * slope:
                break
            t *= opts.backtracking
        else:
            if lbfgs and pairs:
                # stale curvature; retry from a plain gradient step
                pairs.clear()
                step = opts.initial_step
                it += 1
                continue
            return OptimizeResult(x, float(f), it, gnorm, LINE_SEARCH_FAILED, evals)
        g_new = np.asarray(g_new, dtype=float)
        s, y = x_new - x, g_new - g
        curv = -float(s @ y)
        if lbfgs and curv > 1e-12 * float(s @ s):
            # store pairs for the convex problem -f: (s, -y)
            pairs.append((s, -y, 1.0 / curv))
            del pairs[:-opts.memory]
        if opts.step_rule == "bb":
            step = float(s @ s) / curv if curv > 0 else 2.0 * t
            step = min(max(step, 1e-20), 1e20)
        else:
            step = opts.initial_step
        x, f, g = x_new, f_new, g_new
        it += 1
