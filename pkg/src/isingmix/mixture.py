"""
Mixtures of Ising/Potts components fitted by pseudolikelihood EM.

The E-step replaces each component's likelihood by its pseudolikelihood,
``gamma_bk = softmax_k(log pi_k + log PL_k(s_b))``.  The M-step maximises
``sum_b gamma_bk log PL_k(s_b)`` separately for every component, so fitting
``K`` components costs about as much as fitting ``K`` single models.  The
monitored objective is the mixture pseudolikelihood built from flip ratios,

    1/u_bn = sum_k gamma_bk * sum_{a != s_bn} phi_k(s_b with n -> a) / phi_k(s_b),
    log PL = (1/B) sum_b sum_n -log1p(1/u_bn).
"""
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from .errors import (DegenerateSampleError, InvalidInputError, InvalidModelError,
                     NumericOverflowError)
from .optimizer import OptimizeOptions, maximize
from .spin_models import (FREE, INFINITE_RANGE, ComponentParams, Dataset,
                          ising_local_fields, local_energies, sample_log_pl, weighted_log_pl_and_grad)

THREADS_ENV = "ISINGMIX_THREADS"
_LOG_MAX = np.log(np.finfo(float).max)


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """``K`` components sharing ``(N, q)`` and mixing coefficients ``pi``."""

    pi: np.ndarray
    components: tuple

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float).ravel()
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "components", tuple(self.components))
        self.validate()

    def validate(self):
        if len(self.components) < 1:
            raise InvalidModelError("a mixture needs at least one component")
        if self.pi.shape != (len(self.components),):
            raise InvalidModelError("need one mixing coefficient per component")
        if not np.all(np.isfinite(self.pi)) or np.any(self.pi < 0):
            raise InvalidModelError("mixing coefficients must be nonnegative")
        if abs(self.pi.sum() - 1.0) > 1e-12:
            raise InvalidModelError(f"mixing coefficients sum to {self.pi.sum()!r}, not 1")
        c0 = self.components[0]
        if any(c.N != c0.N or c.q != c0.q for c in self.components):
            raise InvalidModelError("components must share N and q")

    @property
    def K(self):
        return len(self.components)

    @property
    def N(self):
        return self.components[0].N

    @property
    def q(self):
        return self.components[0].q

    @classmethod
    def uniform(cls, components):
        components = tuple(components)
        return cls(np.full(len(components), 1.0 / len(components)), components)

    def permuted(self, order):
        order = list(order)
        return MixtureModel(self.pi[order], [self.components[k] for k in order])


def check_responsibilities(r, B=None, K=None, atol=1e-10):
    """Validate a ``(B, K)`` row-stochastic matrix and return it as an array."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 2:
        raise InvalidInputError("responsibilities must be a (B, K) matrix")
    if (B is not None and r.shape[0] != B) or (K is not None and r.shape[1] != K):
        raise InvalidInputError(f"responsibilities have shape {r.shape}, expected ({B}, {K})")
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise InvalidInputError("responsibilities must be finite and nonnegative")
    if np.any(np.abs(r.sum(axis=1) - 1.0) > atol):
        raise InvalidInputError("responsibility rows must sum to 1")
    return r


def _logsumexp_last(a):
    if a.shape[-1] == 1:
        return a[..., 0]
    if a.shape[-1] == 2:
        return np.logaddexp(a[..., 0], a[..., 1])
    return logsumexp(a, axis=-1)


def _check_data(data, m):
    if not isinstance(data, Dataset):
        raise InvalidInputError("expected a Dataset")
    if data.N != m.N or data.q != m.q:
        raise InvalidInputError("data and model disagree on N or q")


def component_log_pl_matrix(data, m):
    """``(B, K)`` matrix of per-sample log PL under each component."""
    _check_data(data, m)
    return np.stack([sample_log_pl(data, c) for c in m.components], axis=1)


def _responsibilities_from_log_pl(L, pi):
    with np.errstate(divide="ignore"):
        a = L + np.log(pi)
    norm = logsumexp(a, axis=1, keepdims=True)
    bad = ~np.isfinite(norm[:, 0])
    if np.any(bad):
        raise DegenerateSampleError(f"sample {int(np.flatnonzero(bad)[0])} has zero "
                                    "pseudolikelihood under every component")
    return np.exp(a - norm)


def responsibilities_pl(data, m):
    """Responsibilities with each component likelihood replaced by its pseudolikelihood."""
    return _responsibilities_from_log_pl(component_log_pl_matrix(data, m), m.pi)


def update_mixing(r):
    """``pi_k = (1/B) sum_b gamma_bk``."""
    r = check_responsibilities(r)
    pi = r.mean(axis=0)
    return pi / pi.sum()


def mixture_log_pl(data, m, r):
    """Mixture log pseudolikelihood and the table of inverse flip ratios ``1/u_bn``.

    Returns
    -------
    value : float
        ``(1/B) sum_b sum_n -log1p(1/u_bn)``.
    inv_u : ndarray, shape (B, N)
    """
    _check_data(data, m)
    r = check_responsibilities(r, data.B, m.K)
    X = data.states
    B, N = X.shape
    log_terms = np.empty((B, N, m.K))
    for k, comp in enumerate(m.components):
        if comp.q == 2:
            H, S = ising_local_fields(X, comp)
            delta = -2.0 * comp.beta * S * H       # log phi(flipped) - log phi(s)
            bad = delta > _LOG_MAX
        else:
            E = local_energies(X, comp)
            delta = E - np.take_along_axis(E, X[:, :, None], axis=2)
            bad = (delta > _LOG_MAX).any(axis=2)
            np.put_along_axis(delta, X[:, :, None], -np.inf, axis=2)
            delta = logsumexp(delta, axis=2)
        if np.any(bad | np.isnan(delta)):
            b, n = np.argwhere(bad | np.isnan(delta))[0]
            raise NumericOverflowError(b, n, k)
        with np.errstate(divide="ignore"):
            log_terms[:, :, k] = np.log(r[:, k])[:, None] + delta
    log_inv_u = _logsumexp_last(log_terms)
    if np.any(log_inv_u > _LOG_MAX):
        b, n = np.argwhere(log_inv_u > _LOG_MAX)[0]
        raise NumericOverflowError(b, n, int(np.argmax(log_terms[b, n])))
    inv_u = np.exp(log_inv_u)
    value = -np.logaddexp(0.0, log_inv_u).sum() / B
    return float(value), inv_u


# -- fitting ----------------------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    """Settings for :func:`m_step` and :func:`fit`.

    ``lam=None`` picks 0 for Ising data and 0.01 for Potts data.
    ``learn_fields=False`` keeps every component's fields at their initial
    values and only optimises couplings.  ``lam_per_sample=True`` multiplies
    ``lam`` by each component's effective count, which matches penalising a
    sample-averaged pseudolikelihood.
    """

    beta: float = 1.0
    tie_mode: str = FREE
    lam: Optional[float] = None
    learn_fields: bool = True
    max_iterations: int = 200
    tol: float = 1e-6
    optimizer: OptimizeOptions = field(default_factory=OptimizeOptions)
    n_threads: Optional[int] = None
    lam_per_sample: bool = False

    def regularization(self, q):
        if self.lam is not None:
            return float(self.lam)
        return 0.0 if q == 2 else 0.01


@dataclass
class MStepDetails:
    results: list
    objective_before: np.ndarray
    objective_after: np.ndarray
    collapsed: List[int]
    responsibilities: np.ndarray


@dataclass
class IterationRecord:
    iteration: int
    mixture_log_pl: float
    pi: np.ndarray
    effective_counts: np.ndarray
    inner_iterations: List[int]
    inner_status: List[str]
    events: List[str]
    wall_clock: float


@dataclass
class FitReport:
    records: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    events: List[str] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def objective(self):
        return np.array([rec.mixture_log_pl for rec in self.records])

    @property
    def pi_trajectory(self):
        return np.array([rec.pi for rec in self.records])


def _n_workers(opts, K):
    n = opts.n_threads
    if n is None:
        n = int(os.environ.get(THREADS_ENV, os.cpu_count() or 1))
    return max(1, min(n, K))


def _fit_component(data, w, comp, lam, opts):
    """Maximise the weighted PL of one component from its current parameters."""
    theta0 = comp.to_vector()
    lo = 0 if opts.learn_fields else comp.field_slots()

    def objective(x):
        theta = theta0.copy()
        theta[lo:] = x
        value, grad = weighted_log_pl_and_grad(data, w, comp.with_vector(theta), lam)
        return value, grad[lo:]

    before = objective(theta0[lo:])[0]
    res = maximize(objective, theta0[lo:], opts.optimizer)
    theta = theta0.copy()
    theta[lo:] = res.x
    return comp.with_vector(theta), res, before


def _rescue_collapsed(r, L):
    """Reseed components whose effective count fell below one.

    Each collapsed component takes, hard, the sample whose best component
    log PL is lowest (distinct samples for distinct components).
    """
    r = r.copy()
    collapsed = [k for k in range(r.shape[1]) if r[:, k].sum() < 1.0]
    if not collapsed:
        return r, collapsed
    order = np.argsort(L.max(axis=1), kind="stable")
    for k, b in zip(collapsed, order):
        r[:, k] = 0.0
        r[b] = 0.0
        r[b, k] = 1.0
    r /= r.sum(axis=1, keepdims=True)
    return r, collapsed


def m_step(data, r, m, opts=None):
    """Update ``pi`` and every component given responsibilities ``r``.

    Returns
    -------
    model : MixtureModel
    details : MStepDetails
        Inner optimiser results, weighted objectives before and after, and
        the indices of components that were reseeded after collapsing.
    """
    opts = opts or FitOptions()
    _check_data(data, m)
    r = check_responsibilities(r, data.B, m.K)
    r, collapsed = _rescue_collapsed(r, component_log_pl_matrix(data, m)) \
        if np.any(r.sum(axis=0) < 1.0) else (r, [])
    lam = opts.regularization(m.q)
    lams = r.sum(axis=0) * lam if opts.lam_per_sample else np.full(m.K, lam)
    jobs = [(r[:, k], comp, lams[k]) for k, comp in enumerate(m.components)]
    workers = _n_workers(opts, m.K)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(lambda job: _fit_component(data, *job, opts), jobs))
    else:
        out = [_fit_component(data, *job, opts) for job in jobs]
    comps = [o[0] for o in out]
    details = MStepDetails(
        results=[o[1] for o in out],
        objective_before=np.array([o[2] for o in out]),
        objective_after=np.array([o[1].value for o in out]),
        collapsed=collapsed,
        responsibilities=r,
    )
    return MixtureModel(update_mixing(r), comps), details


def initial_components(data, K, opts):
    tie = opts.tie_mode
    return [ComponentParams.zeros(data.N, data.q, opts.beta, tie) for _ in range(K)]


def fit(data, K, init, opts=None, initial_model=None):
    """Pseudolikelihood EM.

    Parameters
    ----------
    data : Dataset
    K : int
    init : array_like, shape (B, K)
        Initial responsibilities (see :mod:`isingmix.initialization`).
    opts : FitOptions
    initial_model : MixtureModel, optional
        Starting parameters; defaults to all-zero components built from
        ``opts.beta`` and ``opts.tie_mode``.

    Returns
    -------
    model : MixtureModel
    report : FitReport
    """
    opts = opts or FitOptions()
    if K < 1:
        raise InvalidInputError("K must be at least 1")
    r = check_responsibilities(init, data.B, K)
    if initial_model is None:
        comps = initial_components(data, K, opts)
        model = MixtureModel(update_mixing(r), comps)
    else:
        model = initial_model
        if model.K != K:
            raise InvalidInputError("initial model has the wrong number of components")
    _check_data(data, model)

    report = FitReport()
    t_start = time.perf_counter()
    prev = None
    for it in range(opts.max_iterations):
        model, details = m_step(data, r, model, opts)
        events = [f"collapse:{k}" for k in details.collapsed]
        L = component_log_pl_matrix(data, model)
        r = _responsibilities_from_log_pl(L, model.pi)
        value, _ = mixture_log_pl(data, model, r)
        if prev is not None and value < prev - 1e-6 * abs(prev):
            events.append("objective_decrease")
        report.records.append(IterationRecord(
            iteration=it,
            mixture_log_pl=value,
            pi=model.pi.copy(),
            effective_counts=details.responsibilities.sum(axis=0),
            inner_iterations=[res.iterations for res in details.results],
            inner_status=[res.status for res in details.results],
            events=events,
            wall_clock=time.perf_counter() - t_start,
        ))
        report.events.extend(f"{it}:{e}" for e in events)
        if prev is not None and abs(value - prev) <= opts.tol * abs(prev):
            report.converged = True
            break
        prev = value
    report.wall_clock = time.perf_counter() - t_start
    return model, report


# -- tied-coupling surfaces ---------------------------------------------------
#
# For zero-field tied models the log flip ratio is J * D_bn with
# D_bn = -2 beta s_bn (M_b - s_bn), so every grid point reuses one (B, N) table.


def _ir_flip_table(data, beta):
    H, S = ising_local_fields(data.states, ComponentParams.infinite_range(data.N, 1.0, beta))
    return -2.0 * beta * S * H


def ir_log_pl_curve(data, beta, grid):
    """Mixture log PL of ``K = 1`` zero-field tied models over a grid of ``J`` values."""
    D = _ir_flip_table(data, beta)
    return np.array([-np.logaddexp(0.0, J * D).sum() / data.B for J in np.asarray(grid, float)])


def ir_log_pl_surface(data, beta, grid1, grid2=None):
    """``K = 2`` zero-field tied surface with ``pi`` fixed at uniform.

    At each grid point the responsibilities are recomputed from the two
    components' pseudolikelihoods (as :func:`responsibilities_pl` does) and
    the mixture log PL is evaluated with them.
    """
    grid1 = np.asarray(grid1, dtype=float)
    grid2 = grid1 if grid2 is None else np.asarray(grid2, dtype=float)
    if grid1.size == 0 or grid2.size == 0:
        raise InvalidInputError("empty grid")
    D = _ir_flip_table(data, beta)
    pl1 = np.array([-np.logaddexp(0.0, J * D).sum(axis=1) for J in grid1])
    pl2 = np.array([-np.logaddexp(0.0, J * D).sum(axis=1) for J in grid2])
    out = np.empty((grid1.size, grid2.size))
    for a, J1 in enumerate(grid1):
        t1 = J1 * D
        for b, J2 in enumerate(grid2):
            # log gamma_b1, log gamma_b2 under uniform pi
            norm = np.logaddexp(pl1[a], pl2[b])
            lg1, lg2 = pl1[a] - norm, pl2[b] - norm
            log_inv_u = np.logaddexp(lg1[:, None] + t1, lg2[:, None] + J2 * D)
            out[a, b] = -np.logaddexp(0.0, log_inv_u).sum() / data.B
    return out
