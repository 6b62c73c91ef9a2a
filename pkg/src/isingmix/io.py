"""
On-disk formats.

Dataset file::

    # optional comment lines
    q N
    s_11 s_12 ... s_1N
    ...

Model file (JSON)::

    {"version": 1, "K": K, "q": q, "N": N, "pi": [...],
     "invocation": "...",
     "components": [{"beta": ..., "tie_mode": "free" | "infinite_range",
                     "h": N x q table,
                     "J": [{"i": i, "j": j, "block": q*q row-major}, ...]   # free
                     "J": scalar                                             # infinite_range
                    }, ...]}

Fields and blocks are always written in the Potts convention; for ``q = 2``
they are the +-1 Ising expansion and are folded back on reading.  ``i < j``
are 0-based site indices.  Only nonzero blocks are written.

Labels file: comment lines then one integer per line.  CSV outputs (report,
scores, TP curve) start with one comment line, then a header row.
"""
import csv
import io as _io
import json

import numpy as np

from .errors import FormatError
from .mixture import MixtureModel
from .spin_models import FREE, INFINITE_RANGE, ComponentParams, Dataset

MODEL_VERSION = 1


def _comment(text):
    return "".join(f"# {line}\n" for line in str(text).splitlines() or [""])


def format_dataset(data, comment=None):
    buf = _io.StringIO()
    if comment is not None:
        buf.write(_comment(comment))
    buf.write(f"{data.q} {data.N}\n")
    for row in data.states:
        buf.write(" ".join(map(str, row)))
        buf.write("\n")
    return buf.getvalue()


def parse_dataset(text):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("dataset file is empty")
    try:
        q, N = (int(v) for v in lines[0].split())
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"dataset file is malformed: {exc}") from None
    if not rows:
        raise FormatError("dataset file has no samples")
    for b, row in enumerate(rows):
        if len(row) != N:
            raise FormatError(f"sample {b} has {len(row)} sites, header says {N}")
    try:
        return Dataset(np.array(rows, dtype=np.int64), q)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def write_dataset(path, data, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_dataset(data, comment))


def read_dataset(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh.read())


def write_labels(path, labels, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        if comment is not None:
            fh.write(_comment(comment))
        fh.writelines(f"{int(v)}\n" for v in labels)


def read_labels(path):
    with open(path, encoding="utf-8") as fh:
        return np.array([int(ln) for ln in fh if ln.strip() and not ln.startswith("#")],
                        dtype=np.int64)


def component_to_dict(p):
    out = {"beta": p.beta, "tie_mode": p.tie_mode, "h": p.field_table().tolist()}
    if p.tie_mode == INFINITE_RANGE:
        out["J"] = p.J
        return out
    blocks = []
    for i, j in zip(*np.triu_indices(p.N, 1)):
        block = p.coupling_block(int(i), int(j))
        if np.any(block != 0.0):
            blocks.append({"i": int(i), "j": int(j), "block": block.ravel().tolist()})
    out["J"] = blocks
    return out


def component_from_dict(d, N, q):
    try:
        beta = float(d["beta"])
        tie = d.get("tie_mode", FREE)
        h = np.asarray(d["h"], dtype=float)
        if h.shape != (N, q):
            raise FormatError(f"field table has shape {h.shape}, expected {(N, q)}")
        if q == 2:
            h_ising = 0.5 * (h[:, 1] - h[:, 0])
            if tie == INFINITE_RANGE:
                return ComponentParams.infinite_range(N, float(d["J"]), beta, h_ising)
            J = np.zeros((N, N))
            for e in d["J"]:
                b = np.asarray(e["block"], dtype=float).reshape(2, 2)
                J[min(e["i"], e["j"]), max(e["i"], e["j"])] = 0.25 * (b[1, 1] - b[1, 0] - b[0, 1] + b[0, 0])
            return ComponentParams.ising(h_ising, J, beta)
        blocks = {(int(e["i"]), int(e["j"])): np.asarray(e["block"], dtype=float).reshape(q, q)
                  for e in d["J"]}
        return ComponentParams.potts(h, blocks, beta)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed component: {exc}") from None


def model_to_dict(m, invocation=None):
    out = {"version": MODEL_VERSION, "K": m.K, "q": m.q, "N": m.N, "pi": m.pi.tolist()}
    if invocation is not None:
        out["invocation"] = invocation
    out["components"] = [component_to_dict(c) for c in m.components]
    return out


def model_from_dict(d):
    try:
        if int(d.get("version", MODEL_VERSION)) != MODEL_VERSION:
            raise FormatError(f"unsupported model version {d['version']}")
        N, q, K = int(d["N"]), int(d["q"]), int(d["K"])
        comps = [component_from_dict(c, N, q) for c in d["components"]]
        if len(comps) != K:
            raise FormatError(f"K={K} but {len(comps)} components")
        return MixtureModel(np.asarray(d["pi"], dtype=float), comps)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed model file: {exc}") from None


def write_model(path, m, invocation=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(m, invocation), fh, indent=1)
        fh.write("\n")


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(d)


def write_csv(path, header, rows, comment=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment is not None:
            fh.write(_comment(comment))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path):
    """Header and rows of a CSV file, skipping ``#`` comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError(f"{path}: no header row") from None
    return header, [row for row in reader]


def read_scores(path):
    """Square score matrix from an ``i,j,score`` CSV (1-based, ``i < j``)."""
    header, rows = read_csv(path)
    if header[:3] != ["i", "j", "score"]:
        raise FormatError(f"{path}: expected header i,j,score")
    try:
        entries = [(int(r[0]), int(r[1]), float(r[2])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not entries:
        raise FormatError(f"{path}: no scores")
    N = max(max(i, j) for i, j, _ in entries)
    S = np.zeros((N, N))
    for i, j, s in entries:
        if i < 1 or j < 1 or i == j:
            raise FormatError(f"{path}: bad pair ({i}, {j})")
        S[i - 1, j - 1] = S[j - 1, i - 1] = s
    return S


def read_contact_pairs(path):
    """1-based pairs from an ``i,j`` CSV and the length from a ``# N=<length>`` line, if any."""
    declared = None
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if ln.startswith("#") and ln[1:].strip().startswith("N="):
                try:
                    declared = int(ln[1:].strip()[2:])
                except ValueError:
                    raise FormatError(f"{path}: bad length line {ln!r}") from None
    header, rows = read_csv(path)
    if header[:2] != ["i", "j"]:
        raise FormatError(f"{path}: expected header i,j")
    try:
        pairs = [(int(r[0]), int(r[1])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    return pairs, declared


def read_contacts(path, N=None):
    """``ContactMap`` from an ``i,j`` CSV; length from ``N``, a ``# N=`` line, or the largest index."""
    from .dca import ContactMap

    pairs, declared = read_contact_pairs(path)
    if N is None:
        N = declared if declared is not None else max((max(p) for p in pairs), default=0)
    return ContactMap(frozenset(pairs), N)


def write_contacts(path, contacts, comment=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment is not None:
            fh.write(_comment(comment))
        fh.write(f"# N={contacts.N}\n")
        fh.write("i,j\n")
        fh.writelines(f"{i},{j}\n" for i, j in sorted(contacts.pairs))
