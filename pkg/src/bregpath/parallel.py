"""Column-sharded path engine for the logistic loss.

Mirrors a distributed data layout inside one process: the design
matrix is split by columns, each worker thread owns the velocity
coordinates of its columns, and one coordinator applies the intercept
update and reduces the per-shard weight vectors ``w_l = X_l beta_l``
in ascending shard order.  The per-iteration exchange is one length-n
vector per shard, independent of p.

Workers operate on the loss's fixed 64-column blocks (the same blocks
the serial gradient uses) and the reduction order over blocks never
depends on the worker count, so the produced path is bitwise identical
to ``run_path`` for every number of shards.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from threading import Barrier, Thread

import numpy as np
from threadpoolctl import threadpool_limits

from .exceptions import ConvergenceError, DivergenceError
from .losses import Dataset, LogisticLoss
from .simulate import LogisticSpec, gen_logistic
from .solver import (HARD_ITER_CAP, Path, PathRecorder, SolverConfig,
                     _auto_stride, resolve_run, run_path, soft_threshold)

__all__ = ["ShardPlan", "plan_shards", "parallel_logistic_path",
           "scaling_benchmark"]


@dataclass(frozen=True)
class ShardPlan:
    """Contiguous balanced column ranges covering 0..total."""

    total: int
    ranges: tuple

    @property
    def sizes(self):
        return tuple(b - a for a, b in self.ranges)


def plan_shards(total: int, n_shards: int) -> ShardPlan:
    """Split ``total`` columns into ``n_shards`` contiguous ranges.

    Sizes differ by at most one; the first ``total % n_shards`` shards
    take the extra column.
    """
    if n_shards < 1 or n_shards > total:
        raise ValueError(f"need 1 <= n_shards <= {total}, got {n_shards}")
    base, rem = divmod(total, n_shards)
    sizes = [base + 1] * rem + [base] * (n_shards - rem)
    ranges = []
    a = 0
    for s in sizes:
        ranges.append((a, a + s))
        a += s
    return ShardPlan(total, tuple(ranges))


def parallel_logistic_path(data, config: SolverConfig = SolverConfig(),
                           n_shards: int = 1) -> Path:
    """Sharded equivalent of ``run_path`` for the logistic loss.

    ``data`` may be a ``Dataset`` or an already-built ``LogisticLoss``.
    Support restriction is not available on sharded runs.
    """
    if isinstance(data, LogisticLoss):
        model = data
    elif isinstance(data, Dataset):
        model = LogisticLoss(data.X, data.y)
    else:
        raise TypeError("data must be a Dataset or LogisticLoss")
    if config.support is not None:
        raise ValueError("sharded runs do not accept a support restriction")
    plan = plan_shards(model.p, n_shards)
    kappa, delta, lambda_hat, k_max, stride, _, _ = resolve_run(model, config)

    auto_info = {"n_shards": int(n_shards),
                 "shard_ranges": [list(r) for r in plan.ranges]}
    if config.max_iters == "auto":
        auto_info["auto_multiple"] = int(config.auto_multiple)
    rec = PathRecorder(model, kappa, delta, stride, lambda_hat, False, None,
                       auto_info)

    n, G = model.n, len(model.blocks)
    alpha = model.init_intercept()
    z = np.zeros(model.n_beta)
    beta = np.zeros(model.n_beta)
    w = np.zeros(n)
    partials: list = [None] * G
    batches = np.array_split(np.arange(G), n_shards)

    ctrl = {"g": None, "stop": False, "exc": None}
    start = Barrier(n_shards + 1)
    done = Barrier(n_shards + 1)

    def worker(batch):
        while True:
            start.wait()
            if ctrl["stop"]:
                return
            if ctrl["exc"] is None:
                try:
                    g = ctrl["g"]
                    for gi in batch:
                        a, b = model.block_ranges[gi]
                        Xg = model.blocks[gi]
                        z[a:b] -= delta * (Xg.T @ g)
                        beta[a:b] = kappa * soft_threshold(z[a:b])
                        bg = beta[a:b]
                        partials[gi] = Xg @ bg if bg.any() else None
                except BaseException as exc:  # noqa: BLE001 - forwarded to caller
                    ctrl["exc"] = exc
            done.wait()

    threads = [Thread(target=worker, args=(batch,), daemon=True)
               for batch in batches]
    for th in threads:
        th.start()

    rec.observe(0, alpha, beta)
    k = 0
    k0 = None
    try:
        while k_max is None or k < k_max:
            k += 1
            if k > HARD_ITER_CAP:
                raise ConvergenceError(
                    f"no coordinate entered within the {HARD_ITER_CAP}-iteration "
                    "cap; cannot resolve the auto budget")
            u = w + alpha[0] if model.n_alpha else w
            g = model.margin_gradient(u)
            if model.n_alpha:
                alpha = alpha - kappa * delta * np.array([g.sum()])
            ctrl["g"] = g
            start.wait()
            done.wait()
            if ctrl["exc"] is not None:
                raise ctrl["exc"]
            w = np.zeros(n)
            for gi in range(G):
                if partials[gi] is not None:
                    w += partials[gi]
            if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(z))):
                raise DivergenceError(
                    f"iterates became non-finite at iteration {k}",
                    iteration=k, path=rec.partial(k))
            if k0 is None and beta.any():
                k0 = k - 1
                if k_max is None:
                    k_max = min(int(config.auto_multiple) * max(k0, 1),
                                HARD_ITER_CAP)
                    if rec.stride is None:
                        rec.resolve_stride(_auto_stride(model.p, k_max))
            rec.observe(k, alpha, beta)
    finally:
        ctrl["stop"] = True
        start.wait()
        for th in threads:
            th.join()

    if k0 is None:
        k0 = k
    return rec.finish(k, alpha, beta, {"k_max": k, "k0": int(k0)})


def scaling_benchmark(shard_counts=(1, 2, 4), p: int = 2000, s: int = 200,
                      n: int = 6000, signal: float = 1.0,
                      correlation: float = 0.25, max_iters: int = 1000,
                      kappa: float = 10.0, delta: float | str = 0.1,
                      seed: int = 0, csv_path=None) -> dict:
    """Time the sharded engine over worker counts on one dataset.

    Runs a fixed iteration budget per worker count with BLAS pinned to
    one thread (so measured parallelism comes from the shard workers
    alone), checks that all runs produce the same path digest, and
    returns rows of (L, seconds, speedup = t_1 / t_L).  Optionally
    writes the table as CSV.
    """
    data, _ = gen_logistic(LogisticSpec(p=p, s=s, n=n, signal=signal,
                                        correlation=correlation, seed=seed))
    model = LogisticLoss(data.X, data.y)
    config = SolverConfig(kappa=kappa, delta=delta, max_iters=max_iters)
    rows = []
    digests = []
    with threadpool_limits(limits=1):
        for L in shard_counts:
            t0 = time.perf_counter()
            path = parallel_logistic_path(model, config, n_shards=L)
            seconds = time.perf_counter() - t0
            rows.append({"L": int(L), "seconds": seconds})
            digests.append(path.digest())
    t1 = rows[0]["seconds"]
    for row in rows:
        row["speedup"] = t1 / row["seconds"]
    result = {"rows": rows, "digest": digests[0],
              "identical": len(set(digests)) == 1,
              "config": {"p": p, "s": s, "n": n, "signal": signal,
                         "correlation": correlation, "max_iters": max_iters,
                         "kappa": kappa, "delta": delta, "seed": seed}}
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["L", "seconds", "speedup"])
            for row in rows:
                writer.writerow([row["L"], repr(row["seconds"]),
                                 repr(row["speedup"])])
    return result
