"""Path and model-quality metrics.

Selection quality is scored by where coordinates enter the path (AUC
over entry iterations), prediction quality by K-fold cross-validation
with positions matched across folds in continuous time t = k * delta,
and distribution fit for spin models by the correlation of pairwise
marginal tables between held-out and re-sampled data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .losses import Dataset, LogisticLoss, Theta, make_loss
from .rng import substream
from .simulate import gibbs_sample
from .solver import Path, SolverConfig, run_path

__all__ = [
    "path_auc",
    "pair_marginals",
    "mdc",
    "irr_constant",
    "sign_consistency_scan",
    "CVReport",
    "kfold_cv_logistic",
    "kfold_cv_ising_mdc",
]


def path_auc(path: Path, true_support) -> float:
    """Mann-Whitney AUC of entry iterations: true before false.

    A pair (true coordinate, false coordinate) scores 1 when the true
    one entered strictly earlier, 1/2 on ties (including both never
    entering, at infinity), 0 otherwise; the AUC is the mean over all
    pairs.  Invariant under monotone transforms of the iteration index.
    """
    entries = np.asarray(path.entry_iteration, dtype=float)
    true_idx = np.unique(np.asarray(true_support, dtype=np.int64))
    if true_idx.size and (true_idx[0] < 0 or true_idx[-1] >= entries.size):
        raise ValueError("true_support indices out of range")
    if true_idx.size == 0 or true_idx.size == entries.size:
        raise ValueError("AUC undefined for empty or full true support")
    mask = np.zeros(entries.size, dtype=bool)
    mask[true_idx] = True
    e_true = entries[mask][:, None]
    e_false = entries[~mask][None, :]
    wins = (e_true < e_false).sum() + 0.5 * (e_true == e_false).sum()
    return float(wins) / (e_true.size * e_false.size)


def pair_marginals(X: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Joint frequency tables of every coordinate pair of spin data.

    Returns shape (p, p, 2, 2) with state order (+1, -1): entry
    ``[j, j', a, b]`` is the relative frequency of ``x_j = s_a`` and
    ``x_j' = s_b``.  Off-diagonal blocks of the diagonal pair (j, j)
    are zero; every block sums to 1.  ``weights`` turns the sample
    average into a weighted one (used with exact state enumerations).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    if not np.all(np.isin(X, (-1.0, 1.0))):
        raise ValueError("spin data must take values +1 or -1")
    n, p = X.shape
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,) or np.any(w < 0):
            raise ValueError("weights must be a non-negative length-n vector")
        w = w / w.sum()
    P = (X > 0).astype(float)
    Q = 1.0 - P
    Pw = P * w[:, None]
    Qw = Q * w[:, None]
    out = np.empty((p, p, 2, 2))
    out[:, :, 0, 0] = Pw.T @ P
    out[:, :, 0, 1] = Pw.T @ Q
    out[:, :, 1, 0] = Qw.T @ P
    out[:, :, 1, 1] = Qw.T @ Q
    return out


def mdc(table_a: np.ndarray, table_b: np.ndarray) -> float:
    """Pearson correlation between two vectorized pair-marginal tables."""
    a = np.asarray(table_a, dtype=float).ravel()
    b = np.asarray(table_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("marginal tables must have the same shape")
    da = a - a.mean()
    db = b - b.mean()
    na = np.linalg.norm(da)
    nb = np.linalg.norm(db)
    if na == 0.0 or nb == 0.0:
        raise ValueError("degenerate marginal table: zero variance")
    return float(da @ db / (na * nb))


def irr_constant(sigma: np.ndarray, support) -> float:
    """Incoherence of a design covariance w.r.t. a support set.

    Max absolute row sum of ``Sigma[S^c, S] @ inv(Sigma[S, S])``; values
    below 1 mean the irrepresentable condition holds.  0 by convention
    when either block of coordinates is empty.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("sigma must be square")
    p = sigma.shape[0]
    s_idx = np.unique(np.asarray(support, dtype=np.int64))
    if s_idx.size and (s_idx[0] < 0 or s_idx[-1] >= p):
        raise ValueError("support indices out of range")
    mask = np.zeros(p, dtype=bool)
    mask[s_idx] = True
    if s_idx.size == 0 or mask.all():
        return 0.0
    cross = sigma[np.ix_(~mask, mask)]
    m = np.linalg.solve(sigma[np.ix_(mask, mask)].T, cross.T).T
    return float(np.abs(m).sum(axis=1).max())


def sign_consistency_scan(path: Path, true_beta: np.ndarray):
    """Scan a stride-1 path for support and sign recovery.

    Returns ``(first_match_k, clean_prefix_k)``: the first recorded
    iteration whose coefficient signs equal ``sign(true_beta)`` exactly
    (``None`` if never), and the largest recorded iteration such that no
    earlier checkpoint contains a coordinate outside the true support.
    """
    if path.meta.get("checkpoint_stride", 1) != 1:
        raise ValueError("sign scan requires a stride-1 path")
    truth = np.asarray(true_beta, dtype=float)
    if truth.shape != (path.meta["n_beta"],):
        raise ValueError("true_beta has the wrong length")
    true_sign = np.sign(truth)
    true_supp = truth != 0
    first_match = None
    clean_prefix = 0
    clean = True
    for cp in path.checkpoints:
        beta = path.beta_dense(cp)
        if clean:
            if np.any((beta != 0) & ~true_supp):
                clean = False
            else:
                clean_prefix = cp.k
        if first_match is None and np.array_equal(np.sign(beta), true_sign):
            first_match = cp.k
    return first_match, clean_prefix


@dataclass
class CVReport:
    """K-fold cross-validation over path positions matched by t = k*delta.

    ``grid_k``/``grid_t`` index positions on the full-data path;
    ``fold_scores[f, g]`` is fold f's held-out score at position g (nan
    for skipped folds), ``mean_scores`` the across-fold average.  The
    selected position optimizes the mean (``mode`` says in which
    direction, ties toward smaller k) and ``alpha``/``beta_*`` hold the
    full-data path estimator at that position.
    """

    mode: str
    grid_k: np.ndarray
    grid_t: np.ndarray
    fold_scores: np.ndarray
    mean_scores: np.ndarray
    selected_index: int
    selected_k: int
    selected_t: float
    alpha: np.ndarray
    beta_indices: np.ndarray
    beta_values: np.ndarray
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def selected_score(self) -> float:
        return float(self.mean_scores[self.selected_index])


def _fold_indices(n: int, folds: int, seed: int):
    perm = substream(seed, "cv-folds").permutation(n)
    return np.array_split(perm, folds)


def _position_grid(path: Path, grid_size: int):
    k0 = max(int(path.meta["k0"]), 1)
    k_max = int(path.meta["k_max"])
    k0 = min(k0, k_max)
    ks = np.unique(np.round(np.logspace(np.log10(k0), np.log10(k_max),
                                        grid_size)).astype(np.int64))
    return ks, ks * float(path.meta["delta"])


def _cv_scaffold(n: int, folds: int, grid_size: int, seed: int):
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError("need at least one sample per fold")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    return _fold_indices(n, folds, seed)


def kfold_cv_logistic(data: Dataset, config: SolverConfig = SolverConfig(),
                      folds: int = 5, grid_size: int = 50,
                      seed: int = 0) -> CVReport:
    """Select a path position by K-fold misclassification error.

    Fits the full-data path, lays a log-spaced iteration grid from k0
    to the budget, then for each fold refits on the complement and
    scores ``sign(alpha + x'beta)`` on the held-out part at the nearest
    recorded checkpoint in time t.  Folds whose training part contains
    a single class are skipped with a warning.  Returns the position
    minimizing the mean error and the full-data estimator there.
    """
    X, y = data.X, data.y
    model = LogisticLoss(X, y)
    full_path = run_path(model, config)
    grid_k, grid_t = _position_grid(full_path, grid_size)
    parts = _cv_scaffold(model.n, folds, grid_size, seed)

    warnings = []
    fold_scores = np.full((folds, grid_k.size), np.nan)
    for f, held in enumerate(parts):
        train = np.setdiff1d(np.arange(model.n), held)
        y_tr = y[train]
        if np.all(y_tr > 0) or np.all(y_tr < 0):
            warnings.append(f"fold {f}: single-class training part, skipped")
            continue
        fold_path = run_path(LogisticLoss(X[train], y_tr), config)
        Xh, yh = X[held], y[held]
        for g, t in enumerate(grid_t):
            cp = fold_path.nearest_t(t)
            margin = cp.alpha[0] + Xh[:, cp.beta_indices] @ cp.beta_values
            pred = np.where(margin > 0, 1.0, -1.0)
            fold_scores[f, g] = float(np.mean(pred != yh))
    return _assemble_report("min", full_path, grid_k, grid_t, fold_scores,
                            warnings, {"folds": folds, "seed": seed,
                                       "metric": "misclassification"})


def kfold_cv_ising_mdc(data: Dataset, kind: str = "ising-mpf",
                       config: SolverConfig = SolverConfig(),
                       folds: int = 5, grid_size: int = 50, seed: int = 0,
                       burn_in: int = 100, thin: int = 10) -> CVReport:
    """Select a path position by held-out pairwise-marginal correlation.

    For each fold and grid position, draws a synthetic sample of the
    held-out size by Gibbs sampling from the fold estimator (stream
    keyed by (seed, "cv-mdc", fold, position)) and scores the
    correlation between held-out and synthetic pair marginals; selects
    the maximum of the fold average.
    """
    X = data.X
    if data.y is not None:
        raise ValueError("spin data carries no labels")
    model = make_loss(kind, X)
    full_path = run_path(model, config)
    grid_k, grid_t = _position_grid(full_path, grid_size)
    parts = _cv_scaffold(model.n, folds, grid_size, seed)

    warnings = []
    fold_scores = np.full((folds, grid_k.size), np.nan)
    for f, held in enumerate(parts):
        train = np.setdiff1d(np.arange(model.n), held)
        fold_path = run_path(make_loss(kind, X[train]), config)
        held_tables = pair_marginals(X[held])
        for g, t in enumerate(grid_t):
            cp = fold_path.nearest_t(t)
            theta = Theta(cp.alpha, fold_path.beta_dense(cp))
            synth = gibbs_sample(theta, held.size, burn_in, thin,
                                 rng=substream(seed, "cv-mdc", f, g))
            try:
                fold_scores[f, g] = mdc(held_tables, pair_marginals(synth))
            except ValueError as exc:
                warnings.append(f"fold {f} position {g}: {exc}")
    return _assemble_report("max", full_path, grid_k, grid_t, fold_scores,
                            warnings, {"folds": folds, "seed": seed,
                                       "metric": "pair-marginal correlation",
                                       "burn_in": burn_in, "thin": thin,
                                       "loss": kind})


def _assemble_report(mode, full_path, grid_k, grid_t, fold_scores, warnings,
                     meta) -> CVReport:
    used = ~np.all(np.isnan(fold_scores), axis=1)
    if not used.any():
        raise ValueError("all folds degenerate; cannot cross-validate")
    with np.errstate(invalid="ignore"):
        mean_scores = np.nanmean(fold_scores[used], axis=0)
    if np.all(np.isnan(mean_scores)):
        raise ValueError("no position received a finite score")
    if mode == "min":
        sel = int(np.nanargmin(mean_scores))
    else:
        sel = int(np.nanargmax(mean_scores))
    cp = full_path.nearest_t(grid_t[sel])
    meta = dict(meta)
    meta.update({"kappa": full_path.meta["kappa"],
                 "delta": full_path.meta["delta"],
                 "k0": full_path.meta["k0"],
                 "k_max": full_path.meta["k_max"]})
    return CVReport(mode, grid_k, grid_t, fold_scores, mean_scores, sel,
                    int(cp.k), float(cp.t), cp.alpha.copy(),
                    cp.beta_indices.copy(), cp.beta_values.copy(),
                    warnings, meta)
