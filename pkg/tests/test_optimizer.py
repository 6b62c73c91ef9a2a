import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingmix.errors import InvalidInputError, InvalidStartError
from isingmix.optimizer import (CONVERGED, LINE_SEARCH_FAILED, MAX_ITERATIONS, OptimizeOptions,
                                maximize)

DIRECTIONS = ["gradient", "lbfgs"]


def bowl(c, scales=None):
    c = np.asarray(c, float)
    s = np.ones_like(c) if scales is None else np.asarray(scales, float)

    def f(x):
        d = x - c
        return -float(s @ (d * d)), -2.0 * s * d
    return f


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_quadratic_bowl(direction):
    c = np.array([1.5, -2.0, 0.25])
    res = maximize(bowl(c, [1.0, 10.0, 0.1]), np.zeros(3),
                   OptimizeOptions(max_iterations=500, gradient_tolerance=1e-9, direction=direction))
    assert res.status == CONVERGED
    assert np.max(np.abs(res.x - c)) <= 1e-6


def test_stationary_start_returns_immediately():
    x0 = np.array([3.0, 4.0])
    res = maximize(bowl(x0), x0)
    assert res.status == CONVERGED and res.iterations == 0 and res.evaluations == 1
    assert np.array_equal(res.x, x0)


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_weighted_coin_closed_form(direction):
    # k heads in n tosses, logit parameter: maximiser is log(k / (n - k))
    k, n = 37.0, 100.0

    def f(x):
        t = x[0]
        value = k * t - n * np.logaddexp(0.0, t)
        return value, np.array([k - n / (1.0 + np.exp(-t))])

    res = maximize(f, np.array([2.0]), OptimizeOptions(gradient_tolerance=1e-10, max_iterations=200,
                                                       direction=direction))
    assert abs(res.x[0] - np.log(k / (n - k))) <= 1e-6


def test_non_finite_start():
    with pytest.raises(InvalidStartError):
        maximize(lambda x: (np.nan, x), np.zeros(2))
    with pytest.raises(InvalidStartError):
        maximize(lambda x: (0.0, np.array([np.inf, 0.0])), np.zeros(2))


def test_iteration_budget_status():
    res = maximize(bowl([100.0, -50.0], [1.0, 1e-4]), np.zeros(2), OptimizeOptions(max_iterations=2))
    assert res.status == MAX_ITERATIONS and res.iterations == 2


def test_line_search_failure_status():
    # the reported gradient claims ascent but every trial point is worse
    def f(x):
        return (0.0 if x[0] == 0 else -1.0 - abs(x[0])), np.array([1.0])

    res = maximize(f, np.array([0.0]), OptimizeOptions(max_backtracks=5))
    assert res.status == LINE_SEARCH_FAILED
    assert res.x[0] == 0.0


@pytest.mark.parametrize("kw", [dict(max_iterations=-1), dict(gradient_tolerance=0.0),
                                dict(initial_step=0.0), dict(backtracking=1.0),
                                dict(sufficient_increase=0.0), dict(step_rule="exact"),
                                dict(direction="newton"), dict(memory=0)])
def test_option_validation(kw):
    with pytest.raises(InvalidInputError):
        OptimizeOptions(**kw)


@pytest.mark.invariant
@given(seed=st.integers(0, 10 ** 6), direction=st.sampled_from(DIRECTIONS),
       rule=st.sampled_from(["bb", "fixed"]))
def test_accepted_steps_never_decrease(seed, direction, rule):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4))
    Q = A @ A.T + 0.1 * np.eye(4)
    b = rng.normal(size=4)

    def f(x):
        v = -0.5 * x @ Q @ x + b @ x - 0.1 * np.sum(np.log1p(x * x))
        return v, -Q @ x + b - 0.2 * x / (1 + x * x)

    x0 = rng.normal(size=4)
    # the run truncated after t iterations ends on the t-th accepted iterate
    values = [maximize(f, x0, OptimizeOptions(max_iterations=t, direction=direction, step_rule=rule)).value
              for t in range(25)]
    assert all(v1 >= v0 for v0, v1 in zip(values, values[1:]))


@pytest.mark.invariant
@given(seed=st.integers(0, 10 ** 6))
def test_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=5)
    s = rng.uniform(0.2, 3.0, size=5)
    perm = rng.permutation(5)
    x0 = rng.normal(size=5)
    opts = OptimizeOptions(max_iterations=30)
    a = maximize(bowl(c, s), x0, opts)
    b = maximize(bowl(c[perm], s[perm]), x0[perm], opts)
    assert np.allclose(a.x[perm], b.x, rtol=0, atol=1e-12)
    assert a.iterations == b.iterations
