"""
Sequential-scan Gibbs sampling for single components and mixtures.

Randomness comes from numpy's counter-based Philox generator, so a given
seed gives the same samples on every machine.  One long chain is run per
component: ``burn_in`` sweeps are discarded and then every ``thin``-th sweep
is kept.
"""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidInputError
from .spin_models import INFINITE_RANGE, Dataset

UNIFORM_RANDOM = "uniform-random"
ALL_SAME = "all-same-state"
_SWEEPS_PER_BLOCK = 256


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    burn_in: int = 1000
    thin: int = 10
    init: str = UNIFORM_RANDOM

    def __post_init__(self):
        if self.burn_in < 0 or self.thin < 1:
            raise InvalidInputError("need burn_in >= 0 and thin >= 1")
        if self.init not in (UNIFORM_RANDOM, ALL_SAME):
            raise InvalidInputError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class LabeledDataset:
    data: Dataset
    labels: np.ndarray


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


@numba.njit(cache=True)
def _sweeps_potts(x, h, J, u, out, keep_from, thin):
    # x: (N,) state; h: (N, q) beta-scaled; J: (N, N, q, q) beta-scaled
    # u: (n_sweeps, N) uniforms; sweeps t >= keep_from with (t - keep_from) % thin == thin - 1 kept
    N, q = h.shape
    e = np.empty(q)
    kept = 0
    for t in range(u.shape[0]):
        for n in range(N):
            for a in range(q):
                acc = h[n, a]
                for j in range(N):
                    if j != n:
                        acc += J[n, j, a, x[j]]
                e[a] = acc
            mx = e.max()
            tot = 0.0
            for a in range(q):
                e[a] = np.exp(e[a] - mx)
                tot += e[a]
            r = u[t, n] * tot
            a = 0
            cum = e[0]
            while cum <= r and a < q - 1:
                a += 1
                cum += e[a]
            x[n] = a
        if t >= keep_from and (t - keep_from) % thin == thin - 1:
            out[kept] = x
            kept += 1
    return kept


@numba.njit(cache=True)
def _sweeps_infinite_range(x, h, J, beta, u, out, keep_from, thin):
    # x holds states {0, 1}; H_n = h_n + J (M - s_n) with running magnetisation M
    N = x.shape[0]
    M = 0.0
    for n in range(N):
        M += 2.0 * x[n] - 1.0
    kept = 0
    for t in range(u.shape[0]):
        for n in range(N):
            s = 2.0 * x[n] - 1.0
            H = h[n] + J * (M - s)
            # same inversion rule as the generic kernel: state 0 owns [0, P(0))
            p_down = 1.0 / (1.0 + np.exp(2.0 * beta * H))
            new = 0 if u[t, n] < p_down else 1
            M += 2.0 * new - 1.0 - s
            x[n] = new
        if t >= keep_from and (t - keep_from) % thin == thin - 1:
            out[kept] = x
            kept += 1
    return kept


def _run_chain(p, count, cfg, rng):
    N, q = p.N, p.q
    if cfg.init == UNIFORM_RANDOM:
        x = rng.integers(0, q, size=N).astype(np.int64)
    else:
        x = np.zeros(N, dtype=np.int64)
    total = cfg.burn_in + count * cfg.thin
    out = np.empty((count, N), dtype=np.int64)
    if p.tie_mode == INFINITE_RANGE:
        h = np.ascontiguousarray(p.h, dtype=float)
        kernel = lambda ub, ob, kf: _sweeps_infinite_range(x, h, p.J, p.beta, ub, ob, kf, cfg.thin)
    else:
        h = np.ascontiguousarray(p.beta * p.field_table())
        J = np.ascontiguousarray(p.beta * p.coupling_tensor())
        kernel = lambda ub, ob, kf: _sweeps_potts(x, h, J, ub, ob, kf, cfg.thin)
    done = 0
    kept = 0
    buf = np.empty((_SWEEPS_PER_BLOCK, N), dtype=np.int64)
    while done < total:
        n = min(_SWEEPS_PER_BLOCK, total - done)
        u = rng.random((n, N))
        # keep rule is evaluated in global sweep time
        keep_from = cfg.burn_in - done
        got = kernel(u, buf, keep_from)
        out[kept:kept + got] = buf[:got]
        kept += got
        done += n
    assert kept == count
    return out


def gibbs_sample(p, count, cfg=None):
    """Draw ``count`` thinned samples from component ``p``."""
    cfg = cfg or SamplerConfig()
    if count < 1:
        raise InvalidInputError("count must be at least 1")
    return Dataset(_run_chain(p, count, cfg, make_rng(cfg.seed)), p.q)


def sample_mixture(m, count, cfg=None):
    """Draw labels from ``pi`` and then samples from the labelled components.

    Labels come from the ``cfg.seed`` stream; component ``k`` runs its own
    chain seeded by the ``k``-th child of ``SeedSequence(cfg.seed)``.
    """
    cfg = cfg or SamplerConfig()
    if count < 1:
        raise InvalidInputError("count must be at least 1")
    m.validate()
    rng = make_rng(cfg.seed)
    labels = rng.choice(m.K, size=count, p=m.pi)
    children = np.random.SeedSequence(cfg.seed).spawn(m.K)
    states = np.empty((count, m.N), dtype=np.int64)
    for k, comp in enumerate(m.components):
        idx = np.flatnonzero(labels == k)
        if idx.size == 0:
            continue
        child_rng = np.random.Generator(np.random.Philox(children[k]))
        states[idx] = _run_chain(comp, idx.size, cfg, child_rng)
    return LabeledDataset(Dataset(states, m.q), labels.astype(np.int64))
