"""
Direct coupling analysis helpers: alignment ingestion, coupling scores and
true-positive curves.

Alignment alphabet (q = 21): gap ``-``/``.`` and any unrecognised symbol map
to state 0, the twenty amino acids ``ACDEFGHIKLMNPQRSTVWY`` map to 1..20.
"""
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidInputError
from .spin_models import ComponentParams, Dataset

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
GAP = "-"
Q_PROTEIN = 21
_CODE = {aa: i + 1 for i, aa in enumerate(AMINO_ACIDS)}
_SYMBOL = GAP + AMINO_ACIDS


def parse_fasta(text):
    """List of ``(name, sequence)`` records."""
    records = []
    name, chunks = None, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if name is not None:
                records.append((name, "".join(chunks)))
            name, chunks = line[1:].strip(), []
        elif name is None:
            raise FormatError(f"line {lineno}: sequence data before the first '>' header")
        else:
            chunks.append(line)
    if name is not None:
        records.append((name, "".join(chunks)))
    return records


def read_msa(text):
    """Aligned FASTA text to a ``q = 21`` :class:`Dataset`."""
    records = parse_fasta(text)
    if not records:
        raise FormatError("alignment is empty")
    length = len(records[0][1])
    if length == 0:
        raise FormatError(f"record {records[0][0]!r} is empty")
    rows = []
    for name, seq in records:
        if len(seq) != length:
            raise FormatError(f"record {name!r} has length {len(seq)}, expected {length}")
        rows.append([_CODE.get(ch, 0) for ch in seq.upper()])
    return Dataset(np.array(rows, dtype=np.int64), Q_PROTEIN)


def write_msa(data, names=None):
    """Inverse of :func:`read_msa`; state 0 is written as a gap."""
    if data.q != Q_PROTEIN:
        raise InvalidInputError("only q = 21 datasets can be written as protein alignments")
    names = names or [f"seq{b}" for b in range(data.B)]
    lines = []
    for name, row in zip(names, data.states):
        lines.append(f">{name}")
        lines.append("".join(_SYMBOL[a] for a in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ContactMap:
    """True contacts as 1-based pairs ``i < j`` on a chain of length ``N``."""

    pairs: frozenset
    N: int

    def __post_init__(self):
        pairs = set()
        for i, j in self.pairs:
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if not 1 <= i < j <= self.N:
                raise InvalidInputError(f"contact ({i}, {j}) outside 1 <= i < j <= {self.N}")
            pairs.add((i, j))
        object.__setattr__(self, "pairs", frozenset(pairs))

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    def __len__(self):
        return len(self.pairs)


def zero_sum_gauge(p):
    """Equivalent parameters whose coupling blocks have zero row and column sums.

    Row and column means removed from each block are moved into the fields
    (constant offsets only change ``Z`` and are dropped), so every site
    conditional is unchanged.
    """
    if p.q == 2:
        # the +-1 Ising reparameterisation is already zero-sum
        return p
    J = p.coupling_tensor()
    row = J.mean(axis=3, keepdims=True)
    col = J.mean(axis=2, keepdims=True)
    grand = J.mean(axis=(2, 3), keepdims=True)
    J0 = J - row - col + grand
    # full tensor is symmetric, so summing row means over all partners j covers both halves
    h = p.field_table() + row[..., 0].sum(axis=1)
    h = h - h.mean(axis=1, keepdims=True)
    return ComponentParams.potts(h, J0, p.beta)


def apc(F):
    """Average product correction over off-diagonal entries; zero diagonal."""
    F = np.asarray(F, dtype=float)
    N = F.shape[0]
    off = ~np.eye(N, dtype=bool)
    mean_all = F[off].mean() if N > 1 else 0.0
    if mean_all == 0.0:
        return np.zeros_like(F)
    mean_row = (F * off).sum(axis=1) / max(N - 1, 1)
    S = F - np.outer(mean_row, mean_row) / mean_all
    S[~off] = 0.0
    return S


def frobenius_scores(p):
    """Frobenius norms of the zero-sum-gauge coupling blocks, ``(N, N)``."""
    J = zero_sum_gauge(p).coupling_tensor()
    F = np.sqrt((J ** 2).sum(axis=(2, 3)))
    np.fill_diagonal(F, 0.0)
    return F


def coupling_scores(p):
    """APC-corrected Frobenius coupling scores, symmetric with zero diagonal."""
    S = apc(frobenius_scores(p))
    return 0.5 * (S + S.T)


def ranked_pairs(scores, min_sep=4):
    """0-based pairs with ``j - i > min_sep`` sorted by descending score, ties by ``(i, j)``."""
    scores = np.asarray(scores, dtype=float)
    N = scores.shape[0]
    iu, ju = np.triu_indices(N, 1)
    keep = (ju - iu) > min_sep
    iu, ju = iu[keep], ju[keep]
    order = np.lexsort((ju, iu, -scores[iu, ju]))
    return iu[order], ju[order]


def tp_rate_curve(scores, truth, min_sep=4):
    """``[(rank, tp_rate), ...]`` for the ranked predictions.

    ``tp_rate(r)`` is the fraction of the top ``r`` pairs that are true
    contacts.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise InvalidInputError("scores must be a square matrix")
    if scores.shape[0] != truth.N:
        raise InvalidInputError(f"scores are for N={scores.shape[0]}, contacts for N={truth.N}")
    if min_sep < 0:
        raise InvalidInputError("min_sep must be nonnegative")
    iu, ju = ranked_pairs(scores, min_sep)
    hits = np.array([(int(i) + 1, int(j) + 1) in truth.pairs for i, j in zip(iu, ju)], dtype=float)
    ranks = np.arange(1, hits.size + 1)
    rates = np.cumsum(hits) / ranks
    return [(int(r), float(t)) for r, t in zip(ranks, rates)]
