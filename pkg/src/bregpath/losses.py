"""Loss models for sparse path fitting.

Every model exposes the same surface: a parameter container ``Theta``
split into an unpenalized intercept block ``alpha`` and a penalized
coefficient block ``beta`` (stored as a flat vector of free
coordinates), plus ``value``, ``gradient`` and ``init_intercept``.

Free-coordinate conventions
---------------------------
linear / logistic
    ``beta`` is the usual length-``p`` coefficient vector and ``alpha``
    a length-1 intercept (length 0 when ``with_intercept=False``).
ising (composite or matched-flow)
    ``alpha`` has one entry per node; ``beta`` holds the strict upper
    triangle of the symmetric zero-diagonal interaction matrix in
    ``numpy.triu_indices(p, 1)`` order, so symmetry and the zero
    diagonal hold by construction.
general discrete model (``group-mrf``)
    each node takes states ``1..q``; ``alpha`` is the flat ``p*q``
    node/state intercept and ``beta`` stores one ``q x q`` block per
    node pair ``j < j'`` (pair-major, row-major inside a block).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import substream

__all__ = [
    "Theta",
    "Dataset",
    "LossModel",
    "LinearLoss",
    "LogisticLoss",
    "IsingCompositeLoss",
    "IsingMPFLoss",
    "GroupMRFLoss",
    "make_loss",
    "curvature_bound",
    "pack_theta",
    "pair_indices",
    "symmetric_from_pairs",
]

LOSS_KINDS = ("linear", "logistic", "ising-composite", "ising-mpf", "group-mrf")

# Intercept initializers clamp empirical count ratios to this range so
# single-class columns stay finite.
RATIO_CLAMP = (1e-8, 1e8)

# Column-block width for the logistic margin/gradient computation.  Both
# the serial solver and the sharded engine accumulate over these fixed
# blocks in ascending order, which is what makes their floating-point
# results identical for any worker count.
BLOCK_COLS = 64


def sigmoid(u):
    """Numerically stable logistic function."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(u, dtype=float)))


@dataclass
class Theta:
    """Parameter pair: intercept block and free penalized coordinates."""

    alpha: np.ndarray
    beta: np.ndarray

    def copy(self) -> "Theta":
        return Theta(self.alpha.copy(), self.beta.copy())


@dataclass
class Dataset:
    """Design matrix plus optional labels.

    ``y`` is required for linear and logistic models and must be absent
    for the graphical models, whose columns are the variables.
    """

    X: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y, dtype=float)
            if y.shape != (X.shape[0],):
                raise ValueError("y must have one entry per row of X")
            object.__setattr__(self, "y", y)


def _as_theta(alpha, beta) -> Theta:
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    b = np.asarray(beta, dtype=float)
    return Theta(a, b)


def pack_theta(theta: Theta) -> np.ndarray:
    """Concatenate the intercept and coefficient blocks into one vector."""
    return np.concatenate([np.asarray(theta.alpha, dtype=float).ravel(),
                           np.asarray(theta.beta, dtype=float).ravel()])


def pair_indices(p: int):
    """Row/column index arrays of the strict upper triangle of a p x p grid."""
    return np.triu_indices(p, 1)


def symmetric_from_pairs(free: np.ndarray, p: int) -> np.ndarray:
    """Expand strict-upper-triangle entries into a symmetric matrix."""
    free = np.asarray(free, dtype=float)
    r, c = pair_indices(p)
    if free.shape != r.shape:
        raise ValueError(f"expected {r.size} pair entries for p={p}, got {free.size}")
    mat = np.zeros((p, p))
    mat[r, c] = free
    mat[c, r] = free
    return mat


def _log_count_ratio(n_pos, n_neg):
    ratio = np.divide(n_pos, n_neg, out=np.full(np.shape(n_pos), np.inf, dtype=float),
                      where=np.asarray(n_neg) > 0)
    return np.log(np.clip(ratio, *RATIO_CLAMP))


class LossModel:
    """Shared bookkeeping for all loss kinds."""

    kind: str = ""
    n_alpha: int = 0
    n_beta: int = 0
    p: int = 0           # number of predictors / nodes
    n: int = 0           # sample count
    group_size: int | None = None  # block length for grouped shrinkage

    def value(self, theta: Theta) -> float:
        raise NotImplementedError

    def gradient(self, theta: Theta) -> Theta:
        raise NotImplementedError

    def init_intercept(self) -> np.ndarray:
        raise NotImplementedError

    def make_theta(self, alpha, beta) -> Theta:
        theta = _as_theta(alpha, beta)
        if theta.alpha.shape != (self.n_alpha,):
            raise ValueError(f"alpha must have shape ({self.n_alpha},), got {theta.alpha.shape}")
        if theta.beta.shape != (self.n_beta,):
            raise ValueError(f"beta must have shape ({self.n_beta},), got {theta.beta.shape}")
        return theta

    def zero_theta(self) -> Theta:
        return Theta(np.zeros(self.n_alpha), np.zeros(self.n_beta))

    def initial_theta(self) -> Theta:
        """Start of every path: fitted intercept, all coefficients zero."""
        return Theta(self.init_intercept(), np.zeros(self.n_beta))

    def unpack(self, flat: np.ndarray) -> Theta:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_alpha + self.n_beta,):
            raise ValueError("packed parameter has wrong length")
        return Theta(flat[: self.n_alpha].copy(), flat[self.n_alpha:].copy())


def _validate_xy(X, y, need_y):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    if need_y:
        if y is None:
            raise ValueError("this loss requires labels y")
        y = np.asarray(y, dtype=float)
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one entry per row of X")
    return X, y


class LinearLoss(LossModel):
    """Mean squared error ||y - alpha - X beta||^2 / (2n)."""

    kind = "linear"

    def __init__(self, X, y, with_intercept: bool = True):
        X, y = _validate_xy(X, y, need_y=True)
        self.X = np.ascontiguousarray(X)
        self.y = y
        self.n, self.p = X.shape
        self.with_intercept = bool(with_intercept)
        self.n_alpha = 1 if with_intercept else 0
        self.n_beta = self.p

    def _residual(self, theta):
        r = self.X @ theta.beta - self.y
        if self.n_alpha:
            r = r + theta.alpha[0]
        return r

    def value(self, theta):
        r = self._residual(theta)
        return float(r @ r) / (2.0 * self.n)

    def gradient(self, theta):
        r = self._residual(theta) / self.n
        ga = np.array([r.sum()]) if self.n_alpha else np.zeros(0)
        return Theta(ga, self.X.T @ r)

    def init_intercept(self):
        return np.array([self.y.mean()]) if self.n_alpha else np.zeros(0)


class LogisticLoss(LossModel):
    """Average logistic deviance for labels in {+1, -1}.

    ``(1/n) sum_i log(1 + exp(-(alpha + x_i' beta) y_i))``.

    Margins and coefficient gradients are accumulated over fixed
    column blocks (``BLOCK_COLS`` wide, ascending order, blocks whose
    coefficients are all zero skipped).  The sharded path engine
    reuses exactly these per-block products, so its output matches the
    serial solver bit for bit regardless of the worker count.
    """

    kind = "logistic"

    def __init__(self, X, y, with_intercept: bool = True):
        X, y = _validate_xy(X, y, need_y=True)
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("logistic labels must be +1 or -1")
        self.X = np.ascontiguousarray(X)
        self.y = y
        self.n, self.p = X.shape
        self.with_intercept = bool(with_intercept)
        self.n_alpha = 1 if with_intercept else 0
        self.n_beta = self.p
        self.block_ranges = [(a, min(a + BLOCK_COLS, self.p))
                             for a in range(0, self.p, BLOCK_COLS)]
        self.blocks = [np.ascontiguousarray(self.X[:, a:b]) for a, b in self.block_ranges]

    def weights_from_beta(self, beta: np.ndarray) -> np.ndarray:
        """X @ beta accumulated block by block in ascending order."""
        w = np.zeros(self.n)
        for (a, b), Xg in zip(self.block_ranges, self.blocks):
            bg = beta[a:b]
            if bg.any():
                w += Xg @ bg
        return w

    def margins(self, theta: Theta) -> np.ndarray:
        u = self.weights_from_beta(theta.beta)
        if self.n_alpha:
            u = u + theta.alpha[0]
        return u

    def margin_gradient(self, u: np.ndarray) -> np.ndarray:
        """d loss / d margin, one entry per sample."""
        return -(self.y * sigmoid(-u * self.y)) / self.n

    def value(self, theta):
        u = self.margins(theta)
        return float(np.logaddexp(0.0, -u * self.y).sum()) / self.n

    def gradient(self, theta):
        g = self.margin_gradient(self.margins(theta))
        ga = np.array([g.sum()]) if self.n_alpha else np.zeros(0)
        gb = np.concatenate([Xg.T @ g for Xg in self.blocks])
        return Theta(ga, gb)

    def init_intercept(self):
        if not self.n_alpha:
            return np.zeros(0)
        n_pos = float(np.sum(self.y > 0))
        return np.atleast_1d(_log_count_ratio(n_pos, self.n - n_pos))


def _validate_spins(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    if not np.all(np.isin(X, (-1.0, 1.0))):
        raise ValueError("spin data must take values +1 or -1")
    return X


class _PairwiseSpinLoss(LossModel):
    """Shared margin plumbing for the two binary graphical-model losses.

    The local field of node j in sample i is
    ``m_ij = alpha_j + sum_{j' != j} beta_{jj'} x_ij'``; subclasses turn
    the n x p field matrix into a scalar objective and its derivative.
    """

    def __init__(self, X):
        self.X = np.ascontiguousarray(_validate_spins(X))
        self.n, self.p = self.X.shape
        self.n_alpha = self.p
        self._rows, self._cols = pair_indices(self.p)
        self.n_beta = self._rows.size

    def interaction_matrix(self, beta: np.ndarray) -> np.ndarray:
        return symmetric_from_pairs(beta, self.p)

    def fields(self, theta: Theta) -> np.ndarray:
        return theta.alpha[None, :] + self.X @ self.interaction_matrix(theta.beta)

    def _field_grad_to_theta(self, D: np.ndarray) -> Theta:
        ga = D.sum(axis=0)
        A = self.X.T @ D
        sym = A + A.T
        return Theta(ga, sym[self._rows, self._cols])

    def init_intercept(self):
        n_pos = (self.X > 0).sum(axis=0).astype(float)
        return _log_count_ratio(n_pos, self.n - n_pos)


class IsingCompositeLoss(_PairwiseSpinLoss):
    """Composite conditional likelihood for a {+1,-1} pairwise model.

    Sums the logistic regression loss of every node given the rest:
    ``(1/n) sum_i sum_j log(1 + exp(-m_ij x_ij))``.
    """

    kind = "ising-composite"

    def value(self, theta):
        mx = self.fields(theta) * self.X
        return float(np.logaddexp(0.0, -mx).sum()) / self.n

    def gradient(self, theta):
        mx = self.fields(theta) * self.X
        D = -(self.X * sigmoid(-mx)) / self.n
        return self._field_grad_to_theta(D)


class IsingMPFLoss(_PairwiseSpinLoss):
    """Minimum probability flow objective for a {+1,-1} pairwise model.

    ``(1/n) sum_i sum_j exp(-m_ij x_ij / 2)``: the outflow of
    probability from the data states through single-spin flips.
    """

    kind = "ising-mpf"

    def value(self, theta):
        mx = self.fields(theta) * self.X
        return float(np.exp(-0.5 * mx).sum()) / self.n

    def gradient(self, theta):
        mx = self.fields(theta) * self.X
        D = -(0.5 / self.n) * self.X * np.exp(-0.5 * mx)
        return self._field_grad_to_theta(D)


class GroupMRFLoss(LossModel):
    """Composite conditional likelihood for q-state variables.

    Data entries are states in ``1..q``.  With one-hot encoding
    ``Xh`` (n x pq) and block interaction matrix ``B`` the node/state
    scores are ``M = alpha + Xh B``, and the loss is the summed
    multinomial deviance of each node given the rest:
    ``(1/n) sum_i sum_j [logsumexp_m M_i(j;m) - M_i(j;x_ij)]``.

    ``beta`` stores a q x q block per pair j < j'; under grouped
    shrinkage each block enters or leaves the model as a unit.
    """

    kind = "group-mrf"

    def __init__(self, X, q: int):
        X = np.asarray(X)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        codes = X.astype(int)
        if not np.array_equal(codes, X) or codes.min() < 1 or codes.max() > q:
            raise ValueError(f"state data must be integers in 1..{q}")
        self.q = int(q)
        self.codes = codes
        self.n, self.p = codes.shape
        self.n_alpha = self.p * self.q
        self._rows, self._cols = pair_indices(self.p)
        self.n_pairs = self._rows.size
        self.n_beta = self.n_pairs * self.q * self.q
        self.group_size = self.q * self.q
        onehot = np.zeros((self.n, self.p * self.q))
        cols = (np.arange(self.p) * self.q)[None, :] + (codes - 1)
        onehot[np.arange(self.n)[:, None], cols] = 1.0
        self.onehot = onehot
        # index grids of each free block inside the pq x pq matrix
        off = np.arange(self.q)
        self._blk_r = (self._rows[:, None, None] * self.q + off[None, :, None])
        self._blk_c = (self._cols[:, None, None] * self.q + off[None, None, :])

    def interaction_matrix(self, beta: np.ndarray) -> np.ndarray:
        blocks = np.asarray(beta, dtype=float).reshape(self.n_pairs, self.q, self.q)
        B = np.zeros((self.p * self.q, self.p * self.q))
        B[self._blk_r, self._blk_c] = blocks
        return B + B.T

    def scores(self, theta: Theta) -> np.ndarray:
        return theta.alpha[None, :] + self.onehot @ self.interaction_matrix(theta.beta)

    def value(self, theta):
        M = self.scores(theta).reshape(self.n, self.p, self.q)
        mmax = M.max(axis=2)
        lse = mmax + np.log(np.exp(M - mmax[:, :, None]).sum(axis=2))
        observed = (self.onehot * self.scores(theta)).sum()
        return float(lse.sum() - observed) / self.n

    def gradient(self, theta):
        M = self.scores(theta).reshape(self.n, self.p, self.q)
        mmax = M.max(axis=2, keepdims=True)
        E = np.exp(M - mmax)
        P = (E / E.sum(axis=2, keepdims=True)).reshape(self.n, self.p * self.q)
        D = (P - self.onehot) / self.n
        ga = D.sum(axis=0)
        A = self.onehot.T @ D
        sym = A + A.T
        return Theta(ga, sym[self._blk_r, self._blk_c].ravel())

    def init_intercept(self):
        freq = self.onehot.sum(axis=0) / self.n
        logf = np.log(np.clip(freq, RATIO_CLAMP[0], None))
        per_node = logf.reshape(self.p, self.q)
        return (per_node - per_node.mean(axis=1, keepdims=True)).ravel()


def make_loss(kind: str, X, y=None, q: int | None = None,
              with_intercept: bool = True) -> LossModel:
    """Construct a loss model by kind name."""
    if kind == "linear":
        return LinearLoss(X, y, with_intercept)
    if kind == "logistic":
        return LogisticLoss(X, y, with_intercept)
    if kind in ("ising-composite", "ising-mpf"):
        if y is not None:
            raise ValueError(f"{kind} takes no labels")
        cls = IsingCompositeLoss if kind == "ising-composite" else IsingMPFLoss
        return cls(X)
    if kind == "group-mrf":
        if y is not None:
            raise ValueError("group-mrf takes no labels")
        if q is None:
            raise ValueError("group-mrf requires the state count q")
        return GroupMRFLoss(X, q)
    raise ValueError(f"unknown loss kind {kind!r}; valid kinds: {', '.join(LOSS_KINDS)}")


def curvature_bound(model: LossModel, theta: Theta | None = None,
                    n_iters: int = 20, fd_step: float = 1e-6,
                    inflation: float = 1.1) -> float:
    """Upper estimate of the largest Hessian eigenvalue at ``theta``.

    Runs ``n_iters`` power-iteration steps where each Hessian-vector
    product is a forward difference of the analytic gradient, then
    inflates the estimate by ``inflation`` to compensate for power
    iteration converging from below.  Deterministic: the start vector
    comes from a fixed stream keyed only by the parameter dimension.
    """
    if theta is None:
        theta = model.initial_theta()
    base = pack_theta(theta)
    g0 = pack_theta(model.gradient(theta))
    d = base.size
    v = substream(0, "curvature", d).standard_normal(d)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(n_iters):
        gv = pack_theta(model.gradient(model.unpack(base + fd_step * v)))
        hv = (gv - g0) / fd_step
        nrm = float(np.linalg.norm(hv))
        if not np.isfinite(nrm):
            raise ValueError("curvature estimate is not finite")
        if nrm == 0.0:
            raise ValueError("curvature estimate vanished; Hessian is zero along the probe")
        v = hv / nrm
        est = nrm
    return inflation * est
