"""Planted Potts models used by the synthetic mixture experiments."""
import itertools
from dataclasses import dataclass

import numpy as np

from .dca import ContactMap, coupling_scores, tp_rate_curve
from .sampler import SamplerConfig, gibbs_sample, make_rng
from .spin_models import ComponentParams, Dataset


def planted_block(q, strength):
    """Zero-sum block rewarding equal states: ``+c`` on the diagonal, ``-c/(q-1)`` elsewhere."""
    return strength * (np.eye(q) * (1.0 + 1.0 / (q - 1)) - 1.0 / (q - 1))


def disjoint_edge_sets(N, n_edges, n_sets, seed=0, matching=False):
    """``n_sets`` edge lists over ``N`` sites with no edge shared between sets.

    With ``matching=True`` no two edges of the same set share a site, which
    keeps indirect (chain) correlations out of the planted structure.
    """
    rng = make_rng(seed)
    if not matching:
        iu, ju = np.triu_indices(N, 1)
        order = rng.permutation(iu.size)[: n_edges * n_sets]
        pairs = [(int(iu[t]), int(ju[t])) for t in order]
        return [sorted(pairs[s * n_edges:(s + 1) * n_edges]) for s in range(n_sets)]
    if 2 * n_edges > N:
        raise ValueError(f"a matching of {n_edges} edges needs at least {2 * n_edges} sites")
    used, sets = set(), []
    for _ in range(n_sets):
        for _attempt in range(1000):
            perm = rng.permutation(N)[: 2 * n_edges]
            edges = sorted((int(min(a, b)), int(max(a, b))) for a, b in zip(perm[::2], perm[1::2]))
            if used.isdisjoint(edges):
                break
        else:
            raise ValueError("could not draw disjoint matchings; use fewer edges or sets")
        used.update(edges)
        sets.append(edges)
    return sets


def planted_potts(N, q, edges, coupling, field=0.0, seed=0, beta=1.0):
    """Potts component with planted couplings on ``edges`` and random preferred-state fields.

    Every site gets a field of magnitude ``field`` on one uniformly chosen
    preferred state (zero-sum over states).
    """
    rng = make_rng(seed)
    preferred = rng.integers(0, q, size=N)
    h = np.full((N, q), -field / q)
    h[np.arange(N), preferred] += field
    blocks = {(i, j): planted_block(q, coupling) for i, j in edges}
    return ComponentParams.potts(h, blocks, beta)


@dataclass(frozen=True)
class PlantedMixture:
    """A concatenation of samples from planted Potts components, with its ground truth."""

    data: Dataset
    labels: np.ndarray
    components: list
    edges: list


def planted_mixture(seed, N=15, q=3, n_edges=7, coupling=1.5, field=2.0, per_component=500,
                    K=2, sampler=None):
    """Sample ``per_component`` configurations from each of ``K`` planted Potts models.

    Edge sets are vertex-disjoint matchings, mutually disjoint across
    components.  Component ``k`` uses field seed ``K * seed + k`` and its
    chain is seeded with ``10 * seed + k + 1`` unless ``sampler`` is given.
    """
    edges = disjoint_edge_sets(N, n_edges, K, seed=seed, matching=True)
    comps = [planted_potts(N, q, e, coupling, field, seed=K * seed + k + 1)
             for k, e in enumerate(edges)]
    parts = []
    for k, comp in enumerate(comps):
        cfg = sampler or SamplerConfig(seed=10 * seed + k + 1)
        parts.append(gibbs_sample(comp, per_component, cfg).states)
    labels = np.repeat(np.arange(K), per_component)
    return PlantedMixture(Dataset(np.concatenate(parts), q), labels, comps, edges)


def assignment_accuracy(gamma, labels):
    """Fraction of samples whose argmax component matches the label, best over relabelings.

    Also returns the matching permutation: ``perm[k]`` is the fitted
    component assigned to true label ``k``.
    """
    guess = np.asarray(gamma).argmax(axis=1)
    K = np.asarray(gamma).shape[1]
    best, best_perm = -1.0, None
    for perm in itertools.permutations(range(K)):
        acc = float(np.mean(np.asarray(perm)[labels] == guess))
        if acc > best:
            best, best_perm = acc, perm
    return best, best_perm


def top_edge_tp(p, edges):
    """Fraction of the ``len(edges)`` highest coupling scores that fall on planted edges."""
    truth = ContactMap(frozenset((i + 1, j + 1) for i, j in edges), p.N)
    return tp_rate_curve(coupling_scores(p), truth, min_sep=0)[len(edges) - 1][1]
