"""
Ising and Potts components and their single-model pseudolikelihood.

States are always stored as integers in ``{0, ..., q-1}``.  For ``q = 2`` the
Ising reading maps state 0 to spin -1 and state 1 to spin +1, and parameters
are kept in the compact Ising form (one field per site, one coupling per
pair).  The equivalent Potts tables are

    h_i(1) = +h_i,  h_i(0) = -h_i,
    J_ij(a, b) = J_ij * spin(a) * spin(b),

which is exactly what :meth:`ComponentParams.field_table` and
:meth:`ComponentParams.coupling_tensor` return.

Free-parameter layout (the flat vectors returned by
:meth:`ComponentParams.to_vector` and by :func:`weighted_log_pl_and_grad`):

* ``q = 2``, ``tie_mode="free"``: ``h_0..h_{N-1}`` then ``J_ij`` for
  ``i < j`` in row-major order (``np.triu_indices(N, 1)``).
* ``q = 2``, ``tie_mode="infinite_range"``: ``h_0..h_{N-1}`` then the single
  shared coupling ``J``.
* ``q > 2``: ``h`` flattened as ``(N, q)`` row-major, then for every pair
  ``i < j`` (row-major) the ``q x q`` block ``J_ij(a, b)`` row-major.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateWeightsError, InvalidInputError, InvalidModelError

FREE = "free"
INFINITE_RANGE = "infinite_range"
TIE_MODES = (FREE, INFINITE_RANGE)


def decode_spins(states):
    """Map Ising states {0, 1} to spins {-1, +1}."""
    return 2 * np.asarray(states, dtype=np.int64) - 1


def encode_spins(spins):
    """Map spins {-1, +1} to Ising states {0, 1}."""
    spins = np.asarray(spins, dtype=np.int64)
    if not np.all(np.abs(spins) == 1):
        raise InvalidInputError("spins must be -1 or +1")
    return (spins + 1) // 2


def _as_state_matrix(states, q):
    arr = np.asarray(states)
    if arr.dtype.kind not in "iub":
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InvalidInputError("states must be integers")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= q):
        raise InvalidInputError(f"states must lie in [0, {q})")
    return arr


@dataclass(frozen=True, eq=False)
class SpinConfiguration:
    """A single sample of ``N`` categorical sites with ``q`` states each."""

    states: np.ndarray
    q: int = 2

    def __post_init__(self):
        if self.q < 2:
            raise InvalidInputError("q must be at least 2")
        arr = _as_state_matrix(self.states, self.q)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidInputError("a configuration is a non-empty 1-D vector")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    @property
    def N(self):
        return self.states.shape[0]

    @classmethod
    def from_spins(cls, spins):
        return cls(encode_spins(spins), 2)

    def spins(self):
        if self.q != 2:
            raise InvalidInputError("spin view only exists for q = 2")
        return decode_spins(self.states)

    def __eq__(self, other):
        return (isinstance(other, SpinConfiguration) and self.q == other.q
                and np.array_equal(self.states, other.states))


@dataclass(frozen=True, eq=False)
class Dataset:
    """``B`` samples stored as a ``(B, N)`` integer matrix sharing one ``q``."""

    states: np.ndarray
    q: int = 2

    def __post_init__(self):
        if self.q < 2:
            raise InvalidInputError("q must be at least 2")
        arr = _as_state_matrix(self.states, self.q)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError("a dataset needs B >= 1 samples of N >= 1 sites")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    @property
    def B(self):
        return self.states.shape[0]

    @property
    def N(self):
        return self.states.shape[1]

    def __len__(self):
        return self.B

    def __getitem__(self, b):
        return SpinConfiguration(self.states[b], self.q)

    def __eq__(self, other):
        return (isinstance(other, Dataset) and self.q == other.q
                and np.array_equal(self.states, other.states))

    def spins(self):
        if self.q != 2:
            raise InvalidInputError("spin view only exists for q = 2")
        return decode_spins(self.states)

    def subset(self, index):
        return Dataset(self.states[np.asarray(index)], self.q)

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        if not samples:
            raise InvalidInputError("a dataset needs at least one sample")
        q = samples[0].q
        if any(s.q != q or s.N != samples[0].N for s in samples):
            raise InvalidInputError("samples must share N and q")
        return cls(np.stack([s.states for s in samples]), q)

    @classmethod
    def concatenate(cls, *datasets):
        q = datasets[0].q
        if any(d.q != q or d.N != datasets[0].N for d in datasets):
            raise InvalidInputError("datasets must share N and q")
        return cls(np.concatenate([d.states for d in datasets]), q)


@lru_cache(maxsize=64)
def _upper_pairs(N):
    iu, ju = np.triu_indices(N, 1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


def _logsumexp_states(E):
    """Log-sum-exp over the last (state) axis, keeping it."""
    mx = E.max(axis=-1, keepdims=True)
    return mx + np.log(np.exp(E - mx).sum(axis=-1, keepdims=True))


@dataclass(frozen=True, eq=False)
class ComponentParams:
    """Parameters of one Ising (``q = 2``) or Potts (``q > 2``) component.

    Use the constructors :meth:`zeros`, :meth:`ising`, :meth:`infinite_range`
    and :meth:`potts` rather than building instances by hand.  Coupling
    storage is symmetric (``J[j, i] == J[i, j].T``, zero diagonal) so local
    fields are one matrix product; only the ``i < j`` half is a free parameter.
    """

    N: int
    q: int
    h: np.ndarray
    J: object
    beta: float = 1.0
    tie_mode: str = FREE
    _jmat: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise InvalidModelError("beta must be a positive finite number")
        if self.tie_mode not in TIE_MODES:
            raise InvalidModelError(f"unknown tie_mode {self.tie_mode!r}")
        if self.N < 1 or self.q < 2:
            raise InvalidModelError("need N >= 1 and q >= 2")
        h = np.array(self.h, dtype=float)
        if self.q == 2:
            if h.shape != (self.N,):
                raise InvalidModelError("Ising fields must have shape (N,)")
        elif h.shape != (self.N, self.q):
            raise InvalidModelError("Potts fields must have shape (N, q)")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.tie_mode == INFINITE_RANGE:
            if self.q != 2:
                raise InvalidModelError("infinite_range tying requires q = 2")
            object.__setattr__(self, "J", float(self.J))
            return
        J = np.array(self.J, dtype=float)
        shape = (self.N, self.N) if self.q == 2 else (self.N, self.N, self.q, self.q)
        if J.shape != shape:
            raise InvalidModelError(f"couplings must have shape {shape}")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)
        if self.q > 2:
            jmat = J.transpose(0, 2, 1, 3).reshape(self.N * self.q, self.N * self.q)
            object.__setattr__(self, "_jmat", jmat)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, N, q=2, beta=1.0, tie_mode=FREE):
        h = np.zeros(N) if q == 2 else np.zeros((N, q))
        if tie_mode == INFINITE_RANGE:
            return cls(N, q, h, 0.0, beta, tie_mode)
        J = np.zeros((N, N)) if q == 2 else np.zeros((N, N, q, q))
        return cls(N, q, h, J, beta, tie_mode)

    @classmethod
    def ising(cls, h, J, beta=1.0):
        """Ising component from fields ``h`` and couplings ``J``.

        Only the strict upper triangle of ``J`` is read; the stored matrix
        is its symmetric completion.
        """
        h = np.asarray(h, dtype=float)
        J = np.asarray(J, dtype=float)
        N = h.shape[0]
        if J.shape != (N, N):
            raise InvalidModelError("J must be N x N")
        upper = np.triu(J, 1)
        return cls(N, 2, h, upper + upper.T, beta, FREE)

    @classmethod
    def infinite_range(cls, N, J, beta=1.0, h=None):
        """Ising component with one coupling ``J`` shared by every pair."""
        h = np.zeros(N) if h is None else np.asarray(h, dtype=float)
        return cls(N, 2, h, float(J), beta, INFINITE_RANGE)

    @classmethod
    def potts(cls, h, J, beta=1.0):
        """Potts component from an ``(N, q)`` field table and couplings.

        ``J`` is either an ``(N, N, q, q)`` array, of which only blocks with
        ``i < j`` are read, or a mapping ``{(i, j): block}``.
        """
        h = np.asarray(h, dtype=float)
        N, q = h.shape
        full = np.zeros((N, N, q, q))
        if isinstance(J, dict):
            for (i, j), block in J.items():
                block = np.asarray(block, dtype=float)
                if i == j or block.shape != (q, q):
                    raise InvalidModelError("coupling blocks need i != j and shape (q, q)")
                if i > j:
                    i, j, block = j, i, block.T
                full[i, j] = block
        else:
            J = np.asarray(J, dtype=float)
            if J.shape != (N, N, q, q):
                raise InvalidModelError("J must have shape (N, N, q, q)")
            iu, ju = _upper_pairs(N)
            full[iu, ju] = J[iu, ju]
        iu, ju = _upper_pairs(N)
        full[ju, iu] = full[iu, ju].transpose(0, 2, 1)
        if q == 2:
            raise InvalidModelError("use ComponentParams.ising for q = 2")
        return cls(N, q, h, full, beta, FREE)

    # -- views ------------------------------------------------------------

    @property
    def n_free(self):
        P = self.N * (self.N - 1) // 2
        if self.q == 2:
            return self.N + (1 if self.tie_mode == INFINITE_RANGE else P)
        return self.N * self.q + P * self.q * self.q

    def ising_couplings(self):
        """Dense symmetric ``(N, N)`` Ising coupling matrix (``q = 2`` only)."""
        if self.q != 2:
            raise InvalidInputError("Ising couplings only exist for q = 2")
        if self.tie_mode == INFINITE_RANGE:
            return self.J * (np.ones((self.N, self.N)) - np.eye(self.N))
        return np.array(self.J)

    def field_table(self):
        """Fields as an ``(N, q)`` table in the Potts convention."""
        if self.q == 2:
            return np.stack([-self.h, self.h], axis=1)
        return np.array(self.h)

    def coupling_block(self, i, j):
        """The ``q x q`` block ``J_ij(a, b)`` for ``i != j``."""
        if i == j or not (0 <= i < self.N and 0 <= j < self.N):
            raise InvalidInputError("need two distinct sites in range")
        if self.q == 2:
            Jij = self.J if self.tie_mode == INFINITE_RANGE else self.J[i, j]
            return Jij * np.array([[1.0, -1.0], [-1.0, 1.0]])
        return np.array(self.J[i, j])

    def coupling_tensor(self):
        """Full symmetric ``(N, N, q, q)`` coupling tensor with zero diagonal blocks."""
        if self.q == 2:
            sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
            return self.ising_couplings()[:, :, None, None] * sign
        return np.array(self.J)

    # -- flat parameter vectors --------------------------------------------

    def to_vector(self):
        iu, ju = _upper_pairs(self.N)
        if self.q == 2:
            tail = [self.J] if self.tie_mode == INFINITE_RANGE else self.J[iu, ju]
            return np.concatenate([self.h, np.asarray(tail, dtype=float)])
        return np.concatenate([self.h.ravel(), self.J[iu, ju].ravel()])

    def with_vector(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_free,):
            raise InvalidInputError(f"expected {self.n_free} parameters, got {x.shape}")
        if self.q == 2:
            h = x[:self.N]
            if self.tie_mode == INFINITE_RANGE:
                return ComponentParams.infinite_range(self.N, x[self.N], self.beta, h)
            J = np.zeros((self.N, self.N))
            J[_upper_pairs(self.N)] = x[self.N:]
            return ComponentParams.ising(h, J, self.beta)
        nh = self.N * self.q
        h = x[:nh].reshape(self.N, self.q)
        J = np.zeros((self.N, self.N, self.q, self.q))
        J[_upper_pairs(self.N)] = x[nh:].reshape(-1, self.q, self.q)
        return ComponentParams.potts(h, J, self.beta)

    def field_slots(self):
        """Number of leading entries of the flat vector that belong to the fields."""
        return self.N if self.q == 2 else self.N * self.q

    def replace(self, **changes):
        kw = dict(N=self.N, q=self.q, h=self.h, J=self.J, beta=self.beta,
                  tie_mode=self.tie_mode)
        kw.update(changes)
        return ComponentParams(**kw)


# -- vectorised local quantities --------------------------------------------


def _check_states(states, p):
    if isinstance(states, (SpinConfiguration, Dataset)):
        if states.q != p.q:
            raise InvalidInputError(f"sample has q={states.q}, parameters have q={p.q}")
        states = states.states
    X = _as_state_matrix(states, p.q)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != p.N:
        raise InvalidInputError(f"sample has N={X.shape[1]}, parameters have N={p.N}")
    return X


def _one_hot(X, q):
    B, N = X.shape
    out = np.zeros((B, N * q))
    out[np.arange(B)[:, None], np.arange(N) * q + X] = 1.0
    return out


def ising_local_fields(X, p):
    """``H_bn = h_n + sum_{j != n} J_nj s_bj`` for Ising data (no beta factor)."""
    S = decode_spins(X).astype(float)
    if p.tie_mode == INFINITE_RANGE:
        M = S.sum(axis=1, keepdims=True)
        return p.h + p.J * (M - S), S
    return p.h + S @ p.J, S


def local_energies(states, p):
    """``beta * (h_n(a) + sum_{j != n} J_nj(a, s_j))`` with shape ``(B, N, q)``."""
    X = _check_states(states, p)
    if p.q == 2:
        H, _ = ising_local_fields(X, p)
        bH = p.beta * H
        return np.stack([-bH, bH], axis=2)
    F = _one_hot(X, p.q) @ p._jmat
    return p.beta * (F.reshape(X.shape[0], p.N, p.q) + p.h)


def log_potentials(states, p):
    """Vectorised :func:`log_potential` over a ``(B, N)`` state matrix."""
    X = _check_states(states, p)
    if p.q == 2:
        S = decode_spins(X).astype(float)
        if p.tie_mode == INFINITE_RANGE:
            M = S.sum(axis=1)
            pair = p.J * 0.5 * (M * M - p.N)
        else:
            pair = 0.5 * np.einsum("bi,ij,bj->b", S, p.J, S)
        return p.beta * (S @ p.h + pair)
    O = _one_hot(X, p.q)
    field_term = O @ p.h.ravel()
    pair = 0.5 * np.einsum("bi,bi->b", O @ p._jmat, O)
    return p.beta * (field_term + pair)


def log_potential(s, p):
    """Log of the unnormalised weight, ``beta * (sum_i h_i(s_i) + sum_{i<j} J_ij(s_i, s_j))``."""
    return float(log_potentials(s, p)[0])


def sufficient_statistics(states, p):
    """Per-sample gradient of ``log_potential`` w.r.t. the free parameters.

    Returns a ``(B, n_free)`` matrix; ``log_potentials == stats @ p.to_vector()``.
    """
    X = _check_states(states, p)
    iu, ju = _upper_pairs(p.N)
    if p.q == 2:
        S = decode_spins(X).astype(float)
        if p.tie_mode == INFINITE_RANGE:
            M = S.sum(axis=1)
            pair = (0.5 * (M * M - p.N))[:, None]
        else:
            pair = S[:, iu] * S[:, ju]
        return p.beta * np.concatenate([S, pair], axis=1)
    O = _one_hot(X, p.q).reshape(X.shape[0], p.N, p.q)
    pair = O[:, iu, :, None] * O[:, ju, None, :]
    return p.beta * np.concatenate([O.reshape(X.shape[0], -1),
                                    pair.reshape(X.shape[0], -1)], axis=1)


def site_log_conditionals(states, p):
    """Log conditionals ``log p(s_n = a | s_-n)`` with shape ``(B, N, q)``."""
    E = local_energies(states, p)
    return E - _logsumexp_states(E)


def site_conditionals(s, n, p):
    """Conditional distribution of site ``n`` given the rest of ``s``."""
    X = _check_states(s, p)
    if X.shape[0] != 1:
        raise InvalidInputError("site_conditionals takes a single configuration")
    if not 0 <= n < p.N:
        raise InvalidInputError(f"site {n} out of range for N={p.N}")
    E = local_energies(X, p)[0, n]
    w = np.exp(E - E.max())
    return w / w.sum()


def sample_log_pl(states, p):
    """Per-sample log pseudolikelihood ``sum_n log p(s_bn | s_b,-n)``, shape ``(B,)``."""
    X = _check_states(states, p)
    if p.q == 2:
        H, S = ising_local_fields(X, p)
        return -np.logaddexp(0.0, -2.0 * p.beta * S * H).sum(axis=1)
    L = site_log_conditionals(X, p)
    return np.take_along_axis(L, X[:, :, None], axis=2)[:, :, 0].sum(axis=1)


def component_log_pl(s, p):
    """Log pseudolikelihood of one configuration under one component."""
    X = _check_states(s, p)
    if X.shape[0] != 1:
        raise InvalidInputError("component_log_pl takes a single configuration")
    return float(sample_log_pl(X, p)[0])


def l2_penalty(p):
    """``||h||^2 + ||J||^2`` over the free parameters."""
    x = p.to_vector()
    return float(x @ x)


def weighted_log_pl_and_grad(data, w, p, lam=0.0):
    """Weighted log-PL objective and its analytic gradient.

    Parameters
    ----------
    data : Dataset
    w : array_like, shape (B,)
        Nonnegative sample weights (responsibilities of one component).
    p : ComponentParams
    lam : float
        L2 strength; the objective is
        ``sum_b w_b log PL(s_b) - lam * (||h||^2 + ||J||^2)``.

    Returns
    -------
    value : float
    grad : ndarray, shape (p.n_free,)
        Laid out like :meth:`ComponentParams.to_vector`.
    """
    X = _check_states(data, p)
    w = np.asarray(w, dtype=float)
    if w.shape != (X.shape[0],):
        raise InvalidInputError("need one weight per sample")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidInputError("weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise DegenerateWeightsError("all sample weights are zero")
    if lam < 0:
        raise InvalidInputError("regularisation strength must be nonnegative")
    beta = p.beta
    theta = p.to_vector()
    iu, ju = _upper_pairs(p.N)

    if p.q == 2:
        H, S = ising_local_fields(X, p)
        value = float(w @ -np.logaddexp(0.0, -2.0 * beta * S * H).sum(axis=1))
        # d/dH_bn log sigma(2 beta s H) = beta * (s - tanh(beta H))
        R = S - np.tanh(beta * H)
        g_h = beta * (w @ R)
        if p.tie_mode == INFINITE_RANGE:
            M = S.sum(axis=1, keepdims=True)
            g_J = np.array([beta * float(w @ (R * (M - S)).sum(axis=1))])
        else:
            WR = w[:, None] * R
            G = WR.T @ S
            g_J = beta * (G + G.T)[iu, ju]
        grad = np.concatenate([g_h, g_J])
    else:
        q = p.q
        L = site_log_conditionals(X, p)
        value = float(w @ np.take_along_axis(L, X[:, :, None], axis=2)[:, :, 0].sum(axis=1))
        O = _one_hot(X, q)
        R = O - np.exp(L).reshape(X.shape[0], -1)
        g_h = beta * (w @ R)
        G = (w[:, None] * R).T @ O
        G = (G + G.T).reshape(p.N, q, p.N, q).transpose(0, 2, 1, 3)
        grad = np.concatenate([g_h, beta * G[iu, ju].ravel()])

    if lam:
        value -= lam * float(theta @ theta)
        grad = grad - 2.0 * lam * theta
    return value, grad
