"""
Brute-force enumeration over all ``q**N`` configurations.

Only usable for small systems; everything here exists to check the
pseudolikelihood machinery against exact quantities.  States are enumerated
lexicographically with site 0 most significant, i.e. the order of
``itertools.product(range(q), repeat=N)``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError, InvalidInputError
from .spin_models import (Dataset, SpinConfiguration, log_potentials,
                          sufficient_statistics)

MAX_STATES = 2 ** 24
_CHUNK = 2 ** 15


@dataclass(frozen=True)
class ExactSummary:
    log_Z: float
    state_probabilities: Optional[np.ndarray] = None


def _check_capacity(N, q):
    if q ** N > MAX_STATES:
        raise CapacityError(f"q**N = {q}**{N} exceeds the enumeration limit 2**24")


def enumerate_states(N, q, start=0, stop=None):
    """Configurations ``start..stop-1`` in lexicographic order as an int matrix."""
    _check_capacity(N, q)
    total = q ** N
    stop = total if stop is None else min(stop, total)
    idx = np.arange(start, stop, dtype=np.int64)
    powers = q ** np.arange(N - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % q


def _chunks(p):
    total = p.q ** p.N
    for start in range(0, total, _CHUNK):
        yield enumerate_states(p.N, p.q, start, start + _CHUNK)


def partition_function(p, with_probabilities=True):
    """Exact ``log Z`` and, optionally, the full state distribution."""
    _check_capacity(p.N, p.q)
    logw = np.concatenate([log_potentials(X, p) for X in _chunks(p)])
    log_Z = float(logsumexp(logw))
    probs = np.exp(logw - log_Z) if with_probabilities else None
    return ExactSummary(log_Z, probs)


def model_moments(p, log_Z=None):
    """Expectation of :func:`sufficient_statistics` under the exact distribution."""
    if log_Z is None:
        log_Z = partition_function(p, with_probabilities=False).log_Z
    acc = np.zeros(p.n_free)
    for X in _chunks(p):
        prob = np.exp(log_potentials(X, p) - log_Z)
        acc += prob @ sufficient_statistics(X, p)
    return acc


def exact_site_conditionals(s, n, p, summary=None):
    """Conditional of site ``n`` read off the enumerated joint distribution."""
    X = np.asarray(s.states if isinstance(s, SpinConfiguration) else s, dtype=np.int64)
    if not 0 <= n < p.N:
        raise InvalidInputError(f"site {n} out of range")
    if summary is None or summary.state_probabilities is None:
        summary = partition_function(p)
    powers = p.q ** np.arange(p.N - 1, -1, -1, dtype=np.int64)
    base = int(X @ powers - X[n] * powers[n])
    rows = base + np.arange(p.q) * powers[n]
    joint = summary.state_probabilities[rows]
    return joint / joint.sum()


def _component_log_densities(data, m):
    X = data.states if isinstance(data, Dataset) else np.atleast_2d(data.states)
    out = np.empty((X.shape[0], m.K))
    for k, comp in enumerate(m.components):
        log_Z = partition_function(comp, with_probabilities=False).log_Z
        out[:, k] = log_potentials(X, comp) - log_Z
    return out


def exact_log_likelihood(data, m):
    """``sum_b log sum_k pi_k p_k(s_b)`` with exact partition functions."""
    logp = _component_log_densities(data, m)
    with np.errstate(divide="ignore"):
        logpi = np.log(m.pi)
    return float(logsumexp(logp + logpi, axis=1).sum())


def exact_responsibility_matrix(data, m):
    """Exact posterior component probabilities, shape ``(B, K)``."""
    logp = _component_log_densities(data, m)
    with np.errstate(divide="ignore"):
        a = logp + np.log(m.pi)
    return np.exp(a - logsumexp(a, axis=1, keepdims=True))


def exact_responsibilities(s, m):
    """Exact responsibilities of every component for one configuration."""
    if not isinstance(s, SpinConfiguration):
        s = SpinConfiguration(s, m.q)
    return exact_responsibility_matrix(s, m)[0]


def exact_loglik_gradient(data, m, k, sample_weights=None):
    """Gradient of :func:`exact_log_likelihood` w.r.t. component ``k``'s free parameters.

    ``sum_b g_b * gamma_bk * (f(s_b) - E_k[f])`` where ``f`` are the
    sufficient statistics and ``g_b`` optional sample weights (default 1).
    """
    if not 0 <= k < m.K:
        raise InvalidInputError(f"component {k} out of range")
    gamma = exact_responsibility_matrix(data, m)[:, k]
    if sample_weights is not None:
        gamma = gamma * np.asarray(sample_weights, dtype=float)
    comp = m.components[k]
    stats = sufficient_statistics(data, comp)
    return gamma @ stats - gamma.sum() * model_moments(comp)
