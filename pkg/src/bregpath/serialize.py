"""File formats: CSV tables with JSON sidecars.

All floats are written with ``repr`` (shortest round-trip form) and all
JSON with sorted keys, so identical inputs produce byte-identical
files.  Indices inside JSON files are 0-based free-coordinate indices;
CSV column names ``x1..xp`` and edge endpoints in exported edge lists
are 1-based, matching the usual mathematical numbering of variables.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .losses import Dataset, Theta
from .solver import Checkpoint, Path

__all__ = [
    "write_json",
    "read_json",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_theta_json",
    "read_theta_json",
    "write_path",
    "read_path",
    "write_cv_report",
    "write_edges_csv",
    "ensure_dir",
]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _fmt(v) -> str:
    return repr(float(v))


def write_dataset_csv(path, data: Dataset):
    """Write a design matrix (with optional leading label column y)."""
    X = np.asarray(data.X, dtype=float)
    n, p = X.shape
    cols = [f"x{j + 1}" for j in range(p)]
    with open(path, "w") as fh:
        if data.y is not None:
            fh.write(",".join(["y"] + cols) + "\n")
            for yi, row in zip(data.y, X):
                fh.write(",".join([_fmt(yi)] + [_fmt(v) for v in row]) + "\n")
        else:
            fh.write(",".join(cols) + "\n")
            for row in X:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_dataset_csv(path) -> Dataset:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    labeled = bool(header) and header[0] == "y"
    arr = np.array([[float(v) for v in row] for row in rows], dtype=float)
    if arr.size == 0:
        raise ValueError(f"{path}: no data rows")
    if arr.shape[1] != len(header):
        raise ValueError(f"{path}: row width does not match header")
    if labeled:
        return Dataset(arr[:, 1:], arr[:, 0])
    return Dataset(arr)


def write_theta_json(path, theta: Theta, kind: str, p: int, q: int | None = None):
    """Store model parameters (free-coordinate form) with their context."""
    obj = {
        "kind": kind,
        "p": int(p),
        "q": None if q is None else int(q),
        "alpha": theta.alpha,
        "beta": theta.beta,
        "support": np.flatnonzero(theta.beta),
    }
    write_json(path, obj)


def read_theta_json(path):
    obj = read_json(path)
    theta = Theta(np.asarray(obj["alpha"], dtype=float),
                  np.asarray(obj["beta"], dtype=float))
    return theta, obj


def write_path(csv_path, json_path, path: Path):
    """Write a path as a checkpoint table plus a JSON header.

    CSV columns ``k,t,block,index,value``: per checkpoint every
    intercept coordinate (block ``alpha``) and the nonzero coefficients
    (block ``beta``, ascending index).  The JSON header echoes the
    resolved configuration and the exact entry iterations (``null``
    for coordinates that never entered).
    """
    with open(csv_path, "w") as fh:
        fh.write("k,t,block,index,value\n")
        for cp in path.checkpoints:
            k, t = cp.k, _fmt(cp.t)
            for i, v in enumerate(cp.alpha):
                fh.write(f"{k},{t},alpha,{i},{_fmt(v)}\n")
            for i, v in zip(cp.beta_indices, cp.beta_values):
                fh.write(f"{k},{t},beta,{i},{_fmt(v)}\n")
    entries = [None if np.isinf(e) else float(e) for e in path.entry_iteration]
    write_json(json_path, {"meta": path.meta,
                           "entry_iteration": entries,
                           "checkpoint_count": len(path.checkpoints),
                           "digest": path.digest()})


def read_path(csv_path, json_path) -> Path:
    header = read_json(json_path)
    meta = header["meta"]
    n_alpha, n_beta = int(meta["n_alpha"]), int(meta["n_beta"])
    entries = np.array([np.inf if e is None else float(e)
                        for e in header["entry_iteration"]])
    checkpoints = []
    with open(csv_path) as fh:
        if fh.readline().strip() != "k,t,block,index,value":
            raise ValueError(f"{csv_path}: unexpected header")
        cur_k = None
        alpha = idx = val = None

        def flush():
            if cur_k is not None:
                checkpoints.append(Checkpoint(
                    cur_k[0], cur_k[1], np.array(alpha),
                    np.array(idx, dtype=np.int64), np.array(val)))
        for line in fh:
            line = line.strip()
            if not line:
                continue
            ks, ts, block, index, value = line.split(",")
            k = int(ks)
            if cur_k is None or k != cur_k[0]:
                flush()
                cur_k = (k, float(ts))
                alpha, idx, val = [], [], []
            if block == "alpha":
                alpha.append(float(value))
            elif block == "beta":
                idx.append(int(index))
                val.append(float(value))
            else:
                raise ValueError(f"{csv_path}: unknown block {block!r}")
        flush()
    for cp in checkpoints:
        if cp.alpha.size != n_alpha:
            raise ValueError(f"{csv_path}: intercept block width mismatch")
        if cp.beta_indices.size and cp.beta_indices.max() >= n_beta:
            raise ValueError(f"{csv_path}: coefficient index out of range")
    return Path(checkpoints, entries, meta)


def write_cv_report(prefix, report):
    """Write ``<prefix>.json`` (selection) and ``<prefix>_curve.csv`` (scores)."""
    write_json(f"{prefix}.json", {
        "mode": report.mode,
        "selected_index": int(report.selected_index),
        "selected_k": int(report.selected_k),
        "selected_t": float(report.selected_t),
        "selected_score": report.selected_score,
        "alpha": report.alpha,
        "beta_indices": report.beta_indices,
        "beta_values": report.beta_values,
        "warnings": list(report.warnings),
        "meta": report.meta,
    })
    folds = report.fold_scores.shape[0]
    with open(f"{prefix}_curve.csv", "w") as fh:
        fh.write("k,t,mean_score," +
                 ",".join(f"fold_{f}" for f in range(folds)) + "\n")
        for g in range(report.grid_k.size):
            row = [str(int(report.grid_k[g])), _fmt(report.grid_t[g]),
                   _fmt(report.mean_scores[g])]
            row += [_fmt(report.fold_scores[f, g]) for f in range(folds)]
            fh.write(",".join(row) + "\n")


def write_edges_csv(path, edges):
    """Write rows (j, j_prime, weight, sign); endpoints are 1-based."""
    with open(path, "w") as fh:
        fh.write("j,j_prime,weight,sign\n")
        for a, b, wgt in edges:
            sign = 1 if wgt > 0 else -1
            fh.write(f"{a + 1},{b + 1},{_fmt(wgt)},{sign}\n")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
