"""Command-line interface.

Subcommands: ``simulate`` (synthetic logistic / grid Ising data),
``fit`` (trace a path for any loss kind, optionally sharded),
``eval`` (auc, cv-logistic, cv-mdc, sign-scan, irr), ``ingest-incidence``
(item-entity CSV to a +-1 design matrix), ``graph-export`` (edge list
at a requested sparsity level) and ``rerun`` (replay a config sidecar).

Every command is deterministic given its flags: rerunning writes
byte-identical outputs.  Exit codes: 0 success, 1 invalid flags or
input values, 2 filesystem errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import serialize
from .evaluate import (irr_constant, kfold_cv_ising_mdc, kfold_cv_logistic,
                       path_auc, sign_consistency_scan)
from .exceptions import ConvergenceError, DivergenceError
from .losses import LOSS_KINDS, Dataset, make_loss, pair_indices
from .parallel import parallel_logistic_path
from .simulate import (IsingSpec, LogisticSpec, gen_ising, gen_logistic,
                       toeplitz_design_cov)
from .solver import SolverConfig, run_path

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _auto_or(type_fn):
    def parse(text):
        if text == "auto":
            return "auto"
        return type_fn(text)
    return parse


def _parse_support(text):
    """1-based column ranges like ``1-20`` or ``1,4,9-12`` to 0-based indices."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            if lo < 1 or hi < lo:
                raise ValueError(f"bad support range {part!r}")
            out.extend(range(lo - 1, hi))
        else:
            v = int(part)
            if v < 1:
                raise ValueError("support columns are 1-based")
            out.append(v - 1)
    if not out:
        raise ValueError("empty support specification")
    return np.unique(np.array(out, dtype=np.int64))


def _solver_config(args) -> SolverConfig:
    return SolverConfig(kappa=args.kappa, delta=args.delta,
                        max_iters=args.max_iters,
                        auto_multiple=args.auto_multiple,
                        checkpoint_stride=args.stride)


def _add_solver_flags(p):
    p.add_argument("--kappa", type=float, default=10.0,
                   help="inverse shrinkage scale (default 10)")
    p.add_argument("--delta", type=_auto_or(float), default="auto",
                   help="step size, or 'auto' for 1/(kappa*Lambda_hat)")
    p.add_argument("--max-iters", type=_auto_or(int), default="auto",
                   help="iteration budget, or 'auto' for auto-multiple * k0")
    p.add_argument("--auto-multiple", type=int, default=1000,
                   help="budget multiplier for auto max-iters (default 1000)")
    p.add_argument("--stride", type=_auto_or(int), default="auto",
                   help="checkpoint stride, or 'auto'")


def _sidecar(args, out_dir, name="run_config.json"):
    serialize.write_json(os.path.join(out_dir, name), {"argv": args._argv})


# --- simulate -----------------------------------------------------------

def _cmd_simulate(args):
    out = serialize.ensure_dir(args.out_dir)
    if args.kind == "logistic":
        spec = LogisticSpec(p=args.p, s=args.s, n=args.n, signal=args.signal,
                            correlation=args.correlation, seed=args.seed)
        data, truth = gen_logistic(spec)
        serialize.write_theta_json(os.path.join(out, "truth.json"), truth,
                                   "logistic", spec.p)
    else:
        spec = IsingSpec(side=args.side, temperature=args.temperature,
                         n=args.n, seed=args.seed, burn_in=args.burn_in,
                         thin=args.thin)
        data, truth = gen_ising(spec)
        serialize.write_theta_json(os.path.join(out, "truth.json"), truth,
                                   "ising", spec.side ** 2)
    serialize.write_dataset_csv(os.path.join(out, "dataset.csv"), data)
    serialize.write_json(os.path.join(out, "spec.json"), spec.__dict__)
    _sidecar(args, out)
    n, p = data.X.shape
    print(f"wrote {n}x{p} {args.kind} dataset to {out}")
    return 0


# --- fit ----------------------------------------------------------------

def _cmd_fit(args):
    data = serialize.read_dataset_csv(args.data)
    model = make_loss(args.loss, data.X, data.y, q=args.q,
                      with_intercept=not args.no_intercept)
    config = _solver_config(args)
    if args.shards > 1:
        if args.loss != "logistic":
            raise ValueError("--shards applies to the logistic loss only; "
                             f"{args.loss} runs serial")
        path = parallel_logistic_path(model, config, n_shards=args.shards)
    else:
        path = run_path(model, config)
    out = serialize.ensure_dir(args.out_dir)
    serialize.write_path(os.path.join(out, "path.csv"),
                         os.path.join(out, "path.json"), path)
    _sidecar(args, out)
    final = path.final
    print(f"path: {len(path.checkpoints)} checkpoints, k_max={path.meta['k_max']}, "
          f"k0={path.meta['k0']}, delta={path.meta['delta']!r}, "
          f"final nonzeros={final.beta_indices.size}")
    return 0


# --- eval ---------------------------------------------------------------

def _read_path_prefix(prefix):
    return serialize.read_path(prefix + ".csv", prefix + ".json")


def _maybe_report(args, obj, name):
    if args.out_dir:
        out = serialize.ensure_dir(args.out_dir)
        serialize.write_json(os.path.join(out, name), obj)
        _sidecar(args, out, name.replace(".json", "_config.json"))


def _cmd_eval(args):
    if args.metric == "auc":
        path = _read_path_prefix(args.path)
        _, tobj = serialize.read_theta_json(args.truth)
        value = path_auc(path, np.asarray(tobj["support"], dtype=np.int64))
        print(f"auc {value!r}")
        _maybe_report(args, {"auc": value}, "auc.json")
    elif args.metric == "cv-logistic":
        data = serialize.read_dataset_csv(args.data)
        report = kfold_cv_logistic(data, _solver_config(args),
                                   folds=args.folds, grid_size=args.grid_size,
                                   seed=args.seed)
        print(f"cv misclassification {report.selected_score!r} "
              f"at k={report.selected_k} (t={report.selected_t!r})")
        if args.out_dir:
            out = serialize.ensure_dir(args.out_dir)
            serialize.write_cv_report(os.path.join(out, "cv_logistic"), report)
            _sidecar(args, out)
    elif args.metric == "cv-mdc":
        data = serialize.read_dataset_csv(args.data)
        report = kfold_cv_ising_mdc(data, kind=args.loss,
                                    config=_solver_config(args),
                                    folds=args.folds, grid_size=args.grid_size,
                                    seed=args.seed, burn_in=args.burn_in,
                                    thin=args.thin)
        print(f"cv pair-marginal correlation {report.selected_score!r} "
              f"at k={report.selected_k} (t={report.selected_t!r})")
        if args.out_dir:
            out = serialize.ensure_dir(args.out_dir)
            serialize.write_cv_report(os.path.join(out, "cv_mdc"), report)
            _sidecar(args, out)
    elif args.metric == "sign-scan":
        path = _read_path_prefix(args.path)
        truth, _ = serialize.read_theta_json(args.truth)
        first, clean = sign_consistency_scan(path, truth.beta)
        shown = "none" if first is None else first
        print(f"first_sign_match={shown} clean_prefix={clean}")
        _maybe_report(args, {"first_sign_match": first, "clean_prefix": clean},
                      "sign_scan.json")
    elif args.metric == "irr":
        if args.data:
            data = serialize.read_dataset_csv(args.data)
            sigma = np.cov(data.X, rowvar=False)
        elif args.toeplitz is not None:
            if not args.p:
                raise ValueError("--toeplitz requires --p")
            sigma = toeplitz_design_cov(args.p, args.toeplitz)
        else:
            raise ValueError("irr needs --data or --toeplitz")
        support = _parse_support(args.support)
        value = irr_constant(sigma, support)
        print(f"irr {value!r}")
        _maybe_report(args, {"irr": value, "support": support}, "irr.json")
    else:  # unreachable behind argparse choices
        raise ValueError(f"unknown metric {args.metric!r}")
    return 0


# --- ingest-incidence ----------------------------------------------------

def _cmd_ingest(args):
    pairs = []
    with open(args.input) as fh:
        header = fh.readline()
        if not header.strip():
            raise ValueError(f"{args.input}: empty file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) < 2 or not fields[0] or not fields[1]:
                raise ValueError(f"{args.input}: line {lineno}: "
                                 "expected item-id,entity-id")
            pairs.append((fields[0], fields[1]))
    if not pairs:
        raise ValueError(f"{args.input}: no incidence rows")
    pairs = list(dict.fromkeys(pairs))  # dedupe, first-seen order
    counts: dict = {}
    for _, ent in pairs:
        counts[ent] = counts.get(ent, 0) + 1
    eligible = [e for e, c in counts.items() if c >= args.min_degree]
    # highest count first; ties broken by entity id
    eligible.sort(key=lambda e: (-counts[e], e))
    kept = eligible[: args.top]
    if not kept:
        raise ValueError("no entity passes the count filter")
    col = {e: j for j, e in enumerate(kept)}
    items = []
    seen = set()
    for item, ent in pairs:
        if ent in col and item not in seen:
            seen.add(item)
            items.append(item)
    X = -np.ones((len(items), len(kept)))
    row = {it: i for i, it in enumerate(items)}
    for item, ent in pairs:
        if item in row and ent in col:
            X[row[item], col[ent]] = 1.0
    out = serialize.ensure_dir(args.out_dir)
    serialize.write_dataset_csv(os.path.join(out, "dataset.csv"), Dataset(X))
    serialize.write_json(os.path.join(out, "columns.json"), {
        "columns": kept,
        "counts": {e: counts[e] for e in kept},
        "items": items,
        "min_degree": args.min_degree,
    })
    _sidecar(args, out)
    print(f"wrote {len(items)}x{len(kept)} incidence matrix to {out}")
    return 0


# --- graph-export --------------------------------------------------------

def _cmd_graph_export(args):
    path = _read_path_prefix(args.path)
    kind = path.meta["kind"]
    if kind not in ("ising-composite", "ising-mpf", "group-mrf"):
        raise ValueError("graph export requires a graphical-model path")
    p = int(path.meta["p"])
    q = path.meta.get("q")
    block = int(q) ** 2 if kind == "group-mrf" and q else 1
    n_pairs = p * (p - 1) // 2

    def nonzero_pairs(cp):
        if block == 1:
            return cp.beta_indices
        return np.unique(cp.beta_indices // block)

    if args.checkpoint is not None:
        try:
            cp = path.checkpoint_at(args.checkpoint)
        except KeyError as exc:
            raise ValueError(str(exc)) from exc
    else:
        fracs = np.array([nonzero_pairs(c).size / n_pairs
                          for c in path.checkpoints])
        i = int(np.argmin(np.abs(fracs - args.sparsity)))
        cp = path.checkpoints[i]
        if abs(fracs[i] - args.sparsity) > 0.5 / n_pairs:
            print(f"warning: requested sparsity {args.sparsity} not reachable; "
                  f"using checkpoint k={cp.k} at {fracs[i]:.4f}",
                  file=sys.stderr)
    rows_idx, cols_idx = pair_indices(p)
    edges = []
    if block == 1:
        for idx, wgt in zip(cp.beta_indices, cp.beta_values):
            edges.append((int(rows_idx[idx]), int(cols_idx[idx]), float(wgt)))
    else:
        dense = path.beta_dense(cp).reshape(n_pairs, block)
        for pr in nonzero_pairs(cp):
            blk = dense[pr]
            wgt = float(np.linalg.norm(blk))
            wgt = wgt if blk.sum() >= 0 else -wgt
            edges.append((int(rows_idx[pr]), int(cols_idx[pr]), wgt))
    serialize.write_edges_csv(args.out, edges)
    print(f"wrote {len(edges)} edges (checkpoint k={cp.k}, "
          f"pair fraction {len(edges) / n_pairs:.4f}) to {args.out}")
    return 0


def _cmd_rerun(args):
    sidecar = serialize.read_json(args.config)
    argv = sidecar.get("argv")
    if not isinstance(argv, list) or not argv:
        raise ValueError(f"{args.config}: no argv record")
    return main([str(a) for a in argv])


def _build_parser() -> _Parser:
    parser = _Parser(prog="bregpath",
                     description="Sparse regularization paths via linearized "
                                 "Bregman iterations")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic data")
    sim_sub = sim.add_subparsers(dest="kind", required=True)
    sl = sim_sub.add_parser("logistic")
    sl.add_argument("--p", type=int, required=True)
    sl.add_argument("--s", type=int, required=True)
    sl.add_argument("--n", type=int, required=True)
    sl.add_argument("--signal", type=float, default=1.0)
    sl.add_argument("--correlation", type=float, default=0.25)
    sl.add_argument("--seed", type=int, default=0)
    sl.add_argument("--out-dir", required=True)
    sl.set_defaults(func=_cmd_simulate)
    si = sim_sub.add_parser("ising")
    si.add_argument("--side", type=int, required=True)
    si.add_argument("--temperature", type=float, required=True)
    si.add_argument("--n", type=int, required=True)
    si.add_argument("--burn-in", type=int, default=100)
    si.add_argument("--thin", type=int, default=10)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--out-dir", required=True)
    si.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="trace a regularization path")
    fit.add_argument("--loss", required=True, choices=LOSS_KINDS)
    fit.add_argument("--data", required=True)
    fit.add_argument("--q", type=int, default=None,
                     help="state count for group-mrf data")
    fit.add_argument("--no-intercept", action="store_true")
    fit.add_argument("--shards", type=int, default=1)
    _add_solver_flags(fit)
    fit.add_argument("--out-dir", required=True)
    fit.set_defaults(func=_cmd_fit)

    ev = sub.add_parser("eval", help="score paths and datasets")
    ev.add_argument("metric", choices=("auc", "cv-logistic", "cv-mdc",
                                       "sign-scan", "irr"))
    ev.add_argument("--path", help="path file prefix (expects .csv and .json)")
    ev.add_argument("--truth", help="truth JSON file")
    ev.add_argument("--data", help="dataset CSV")
    ev.add_argument("--loss", default="ising-mpf",
                    choices=("ising-composite", "ising-mpf"),
                    help="loss kind for cv-mdc")
    ev.add_argument("--folds", type=int, default=5)
    ev.add_argument("--grid-size", type=int, default=50)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--burn-in", type=int, default=100)
    ev.add_argument("--thin", type=int, default=10)
    ev.add_argument("--toeplitz", type=float, default=None,
                    help="Toeplitz correlation for irr")
    ev.add_argument("--p", type=int, default=None, help="dimension for --toeplitz")
    ev.add_argument("--support", default=None,
                    help="1-based columns like 1-20 or 1,4,9-12 (irr)")
    _add_solver_flags(ev)
    ev.add_argument("--out-dir", default=None)
    ev.set_defaults(func=_cmd_eval)

    ing = sub.add_parser("ingest-incidence",
                         help="item,entity CSV to +-1 matrix")
    ing.add_argument("--input", required=True)
    ing.add_argument("--top", type=int, default=30,
                     help="keep this many highest-count entities")
    ing.add_argument("--min-degree", type=int, default=1,
                     help="drop entities appearing on fewer items")
    ing.add_argument("--out-dir", required=True)
    ing.set_defaults(func=_cmd_ingest)

    gx = sub.add_parser("graph-export", help="edge list from a path")
    gx.add_argument("--path", required=True, help="path file prefix")
    group = gx.add_mutually_exclusive_group(required=True)
    group.add_argument("--sparsity", type=float,
                       help="target fraction of nonzero pairs over C(p,2)")
    group.add_argument("--checkpoint", type=int, help="exact iteration k")
    gx.add_argument("--out", required=True)
    gx.set_defaults(func=_cmd_graph_export)

    rr = sub.add_parser("rerun", help="replay a run_config.json sidecar")
    rr.add_argument("config")
    rr.set_defaults(func=_cmd_rerun)
    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, ConvergenceError, DivergenceError) as exc:
        print(f"bregpath: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bregpath: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
