"""Initial responsibilities: random rows, or hard assignment to far-apart codewords."""
import numpy as np

from .errors import InvalidInputError
from .sampler import make_rng
from .spin_models import SpinConfiguration


def random_init(B, K, seed=0):
    """Independent rows drawn from the flat Dirichlet distribution."""
    if K < 1 or B < K:
        raise InvalidInputError(f"need B >= K >= 1, got B={B}, K={K}")
    rng = make_rng(seed)
    # normalised exponentials == Dirichlet(1, ..., 1); clipped away from 0
    e = np.maximum(rng.standard_exponential((B, K)), 1e-300)
    return e / e.sum(axis=1, keepdims=True)


def hamming_distance(a, b):
    """Number of sites at which two configurations differ."""
    if isinstance(a, SpinConfiguration) and isinstance(b, SpinConfiguration) and a.q != b.q:
        raise InvalidInputError("configurations have different q")
    sa = np.asarray(getattr(a, "states", a))
    sb = np.asarray(getattr(b, "states", b))
    if sa.shape != sb.shape or sa.ndim != 1:
        raise InvalidInputError("configurations must have the same length")
    return int(np.count_nonzero(sa != sb))


def pairwise_hamming(X, Y):
    """``(len(X), len(Y))`` matrix of Hamming distances between state rows."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    out = np.empty((X.shape[0], Y.shape[0]), dtype=np.int64)
    for i in range(Y.shape[0]):
        out[:, i] = np.count_nonzero(X != Y[i], axis=1)
    return out


def default_subset_size(B, K):
    return min(B, max(10 * K, 100))


def select_codewords(X, K):
    """Greedy max-min farthest-point selection among the rows of ``X``.

    The first pick maximises the total distance to the other rows; each
    further pick maximises its minimum distance to the picks so far.  Ties
    go to the lowest row index.  Returns the chosen row indices and the
    min-distance of each pick at its selection step (``inf`` for the first).
    """
    D = pairwise_hamming(X, X)
    chosen = [int(np.argmax(D.sum(axis=1)))]
    margins = [np.inf]
    min_d = D[chosen[0]].astype(float)
    for _ in range(1, K):
        cand = min_d.copy()
        cand[chosen] = -1.0
        nxt = int(np.argmax(cand))
        chosen.append(nxt)
        margins.append(float(min_d[nxt]))
        min_d = np.minimum(min_d, D[nxt])
    return np.array(chosen), np.array(margins)


def codeword_init(data, K, subset_size=None, seed=0):
    """Hard responsibilities from ``K`` mutually distant codewords.

    Codewords are picked by :func:`select_codewords` from a uniform random
    subset of the data; every sample is assigned to its nearest codeword
    (ties to the lowest codeword index).
    """
    B = data.B
    if K < 1 or B < K:
        raise InvalidInputError(f"need B >= K >= 1, got B={B}, K={K}")
    if subset_size is None:
        subset_size = default_subset_size(B, K)
    if subset_size > B or subset_size < K:
        raise InvalidInputError(f"subset size {subset_size} must lie in [K, B] = [{K}, {B}]")
    rng = make_rng(seed)
    subset = np.sort(rng.choice(B, size=subset_size, replace=False))
    picks, _ = select_codewords(data.states[subset], K)
    codewords = data.states[subset[picks]]
    nearest = np.argmin(pairwise_hamming(data.states, codewords), axis=1)
    r = np.zeros((B, K))
    r[np.arange(B), nearest] = 1.0
    return r
