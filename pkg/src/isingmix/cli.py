"""
Command-line front end.

Subcommands: ``generate``, ``fit``, ``surface``, ``dca-score``, ``tprate``.
Exit codes: 0 success, 1 runtime or numeric failure, 2 usage error.
"""
import argparse
import shlex
import sys
import time

import numpy as np

from . import io
from .dca import ContactMap, coupling_scores, tp_rate_curve
from .errors import InvalidInputError, IsingMixError, NumericOverflowError
from .initialization import codeword_init, random_init
from .mixture import FitOptions, fit, ir_log_pl_curve, ir_log_pl_surface
from .optimizer import OptimizeOptions
from .sampler import ALL_SAME, UNIFORM_RANDOM, SamplerConfig, gibbs_sample, sample_mixture
from .spin_models import FREE, INFINITE_RANGE, ComponentParams

PROG = "isingmix"


class UsageError(Exception):
    pass


def _grid(text):
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be jmin:jmax:steps, got {text!r}") from None
    if steps < 1 or hi < lo or (steps == 1 and hi != lo):
        raise argparse.ArgumentTypeError(f"empty or invalid grid {text!r}")
    return np.linspace(lo, hi, steps)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="Gibbs-sample a dataset")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model file to sample from (K > 1 also writes labels)")
    src.add_argument("--ir-J", type=float, help="shared coupling of an infinite-range model")
    g.add_argument("--beta", type=float, default=0.001, help="inverse temperature for --ir-J")
    g.add_argument("--N", type=_positive_int, default=1000, help="sites for --ir-J")
    g.add_argument("--count", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--burn-in", type=int, default=1000)
    g.add_argument("--thin", type=_positive_int, default=10)
    g.add_argument("--init", choices=[UNIFORM_RANDOM, ALL_SAME], default=UNIFORM_RANDOM)
    g.add_argument("--out", required=True)
    g.add_argument("--labels", help="labels file (default: <out>.labels when K > 1)")

    f = sub.add_parser("fit", help="fit a mixture by pseudolikelihood EM")
    f.add_argument("--data", required=True)
    f.add_argument("--K", type=_positive_int, required=True)
    f.add_argument("--tie-ir", action="store_true", help="one shared coupling per component")
    f.add_argument("--learn-fields", action="store_true",
                   help="also learn fields with --tie-ir (fields are always learned otherwise)")
    f.add_argument("--beta", type=float, default=1.0)
    f.add_argument("--init", choices=["random", "codeword"], default="codeword")
    f.add_argument("--subset-size", type=_positive_int)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--lambda", dest="lam", type=float, help="L2 strength (default 0 Ising, 0.01 Potts)")
    f.add_argument("--lambda-per-sample", dest="lam_per_sample", action="store_true",
                   help="scale the L2 strength by each component's effective sample count")
    f.add_argument("--lbfgs", action="store_true", help="limited-memory directions in the M-step")
    f.add_argument("--max-iter", type=_positive_int, default=200)
    f.add_argument("--tol", type=float, default=1e-6)
    f.add_argument("--inner-iter", type=_positive_int, default=100)
    f.add_argument("--out", required=True)
    f.add_argument("--report")

    s = sub.add_parser("surface", help="pseudolikelihood of tied-coupling models on a grid")
    s.add_argument("--data", required=True)
    s.add_argument("--K", type=int, choices=[1, 2], default=1)
    s.add_argument("--beta", type=float, default=0.001)
    s.add_argument("--grid", type=_grid, required=True, help="jmin:jmax:steps")
    s.add_argument("--grid2", type=_grid, help="second axis for K=2 (default: --grid)")
    s.add_argument("--out", required=True)

    d = sub.add_parser("dca-score", help="APC-corrected coupling scores of one component")
    d.add_argument("--model", required=True)
    d.add_argument("--component", type=int, default=0)
    d.add_argument("--out", required=True)

    t = sub.add_parser("tprate", help="true-positive rate curve of ranked scores")
    t.add_argument("--scores", required=True)
    t.add_argument("--contacts", required=True)
    t.add_argument("--min-sep", type=int, default=4)
    t.add_argument("--out", required=True)
    return parser


def cmd_generate(args, invocation):
    cfg = SamplerConfig(seed=args.seed, burn_in=args.burn_in, thin=args.thin, init=args.init)
    labels = None
    if args.ir_J is not None:
        if args.beta <= 0:
            raise UsageError("--beta must be positive")
        data = gibbs_sample(ComponentParams.infinite_range(args.N, args.ir_J, args.beta),
                            args.count, cfg)
    else:
        model = io.read_model(args.model)
        if model.K == 1:
            data = gibbs_sample(model.components[0], args.count, cfg)
        else:
            out = sample_mixture(model, args.count, cfg)
            data, labels = out.data, out.labels
    io.write_dataset(args.out, data, invocation)
    summary = f"B={data.B} N={data.N} q={data.q}"
    if data.q == 2:
        mag = data.spins().mean(axis=1)
        summary += f" mean|m|={np.abs(mag).mean():.4f}"
    if labels is not None:
        path = args.labels or args.out + ".labels"
        io.write_labels(path, labels, invocation)
        summary += f" labels={path}"
    print(summary)


def cmd_fit(args, invocation):
    data = io.read_dataset(args.data)
    if args.K > data.B:
        raise UsageError(f"--K {args.K} exceeds the number of samples {data.B}")
    if args.tie_ir and data.q != 2:
        raise UsageError("--tie-ir needs binary (q = 2) data")
    if args.beta <= 0:
        raise UsageError("--beta must be positive")
    if args.init == "random":
        init = random_init(data.B, args.K, args.seed)
    else:
        subset = args.subset_size
        if subset is not None and not args.K <= subset <= data.B:
            raise UsageError(f"--subset-size must lie in [K, B] = [{args.K}, {data.B}]")
        init = codeword_init(data, args.K, subset, args.seed)
    opts = FitOptions(
        beta=args.beta,
        tie_mode=INFINITE_RANGE if args.tie_ir else FREE,
        lam=args.lam,
        learn_fields=args.learn_fields or not args.tie_ir,
        max_iterations=args.max_iter,
        tol=args.tol,
        optimizer=OptimizeOptions(max_iterations=args.inner_iter,
                                  direction="lbfgs" if args.lbfgs else "gradient"),
        lam_per_sample=args.lam_per_sample,
    )
    t0 = time.perf_counter()
    model, report = fit(data, args.K, init, opts)
    io.write_model(args.out, model, invocation)
    if args.report:
        K = model.K
        header = (["iteration", "mixture_log_pl"] + [f"pi_{k}" for k in range(K)]
                  + [f"neff_{k}" for k in range(K)] + ["events"])
        rows = [[rec.iteration, repr(rec.mixture_log_pl)] + [repr(float(v)) for v in rec.pi]
                + [repr(float(v)) for v in rec.effective_counts] + [";".join(rec.events)]
                for rec in report.records]
        io.write_csv(args.report, header, rows, invocation)
    status = "converged" if report.converged else "stopped at iteration budget"
    print(f"{status} after {len(report.records)} iterations, "
          f"mixture log PL {report.records[-1].mixture_log_pl:.6f}, pi {np.round(model.pi, 4).tolist()}")
    if args.tie_ir:
        print("tied J:", " ".join(f"{c.J:.6f}" for c in model.components))
    print(f"wall clock {time.perf_counter() - t0:.2f}s", file=sys.stderr)


def cmd_surface(args, invocation):
    data = io.read_dataset(args.data)
    if data.q != 2:
        raise UsageError("surface scans need binary (q = 2) data")
    if args.beta <= 0:
        raise UsageError("--beta must be positive")
    if args.K == 1:
        if args.grid2 is not None:
            raise UsageError("--grid2 only applies to --K 2")
        values = ir_log_pl_curve(data, args.beta, args.grid)
        rows = [[repr(float(J)), repr(float(v))] for J, v in zip(args.grid, values)]
        io.write_csv(args.out, ["J1", "logPL"], rows, invocation)
        best = int(np.argmax(values))
        print(f"argmax J1={args.grid[best]:.6g} logPL={values[best]:.6f}")
        return
    grid2 = args.grid if args.grid2 is None else args.grid2
    values = ir_log_pl_surface(data, args.beta, args.grid, grid2)
    rows = [[repr(float(J1)), repr(float(J2)), repr(float(values[a, b]))]
            for a, J1 in enumerate(args.grid) for b, J2 in enumerate(grid2)]
    io.write_csv(args.out, ["J1", "J2", "logPL"], rows, invocation)
    a, b = np.unravel_index(int(np.argmax(values)), values.shape)
    print(f"argmax J1={args.grid[a]:.6g} J2={grid2[b]:.6g} logPL={values[a, b]:.6f}")


def cmd_dca_score(args, invocation):
    model = io.read_model(args.model)
    if not 0 <= args.component < model.K:
        raise UsageError(f"--component must lie in [0, {model.K})")
    S = coupling_scores(model.components[args.component])
    iu, ju = np.triu_indices(model.N, 1)
    rows = [[int(i) + 1, int(j) + 1, repr(float(S[i, j]))] for i, j in zip(iu, ju)]
    io.write_csv(args.out, ["i", "j", "score"], rows, invocation)
    best = int(np.argmax(S[iu, ju])) if iu.size else None
    if best is not None:
        print(f"top pair ({iu[best] + 1}, {ju[best] + 1}) score {S[iu[best], ju[best]]:.6g}")


def cmd_tprate(args, invocation):
    if args.min_sep < 0:
        raise UsageError("--min-sep must be nonnegative")
    S = io.read_scores(args.scores)
    pairs, declared = io.read_contact_pairs(args.contacts)
    N = S.shape[0]
    if declared is not None and declared != N:
        raise InvalidInputError(f"contacts declare N={declared}, scores cover N={N}")
    truth = ContactMap(frozenset(pairs), N)
    curve = tp_rate_curve(S, truth, args.min_sep)
    io.write_csv(args.out, ["rank", "tp_rate"], [[r, repr(t)] for r, t in curve], invocation)
    if curve:
        r = min(max(len(truth), 1), len(curve))
        print(f"{len(curve)} ranked pairs; tp_rate at rank {r}: {curve[r - 1][1]:.4f}")


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "surface": cmd_surface,
    "dca-score": cmd_dca_score,
    "tprate": cmd_tprate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    invocation = shlex.join([PROG] + argv)
    try:
        COMMANDS[args.command](args, invocation)
    except UsageError as exc:
        parser.error(str(exc))
    except NumericOverflowError as exc:
        print(f"{PROG}: numeric overflow at sample {exc.b}, site {exc.n}, component {exc.k}",
              file=sys.stderr)
        return 1
    except (IsingMixError, OSError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
