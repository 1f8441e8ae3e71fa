"""Regularization-path solver.

The iteration maintains an intercept block ``alpha``, a dual/velocity
vector ``z`` and the coefficient vector ``beta = kappa * S(z, 1)``
where ``S`` is the (block) soft-thresholding operator:

    alpha <- alpha - kappa * delta * grad_alpha(alpha, beta)
    z     <- z - delta * grad_beta(alpha, beta)
    beta  <- kappa * S(z, 1)

started from ``z = beta = 0`` and the fitted null intercept.  Running
it traces a full regularization path indexed by ``t = k * delta``;
coordinates enter the model one by one as their ``|z|`` crosses 1.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, DivergenceError
from .losses import LossModel, Theta, curvature_bound, pack_theta

__all__ = [
    "soft_threshold",
    "block_soft_threshold",
    "resolve_delta",
    "SolverConfig",
    "SolverState",
    "initial_state",
    "step",
    "run_path",
    "Checkpoint",
    "Path",
    "fit_oracle",
    "bregman_potential",
    "potential_trace",
    "stop_iteration_bound",
]

HARD_ITER_CAP = 10_000_000
STRIDE_DENSE_LIMIT = 500     # record every iteration when p is at most this
STRIDE_TARGET = 2000         # otherwise aim for about this many checkpoints


def soft_threshold(z: np.ndarray, thresh: float = 1.0) -> np.ndarray:
    """Componentwise soft thresholding sign(z) * max(|z| - thresh, 0)."""
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)


def block_soft_threshold(z: np.ndarray, group_size: int, thresh: float = 1.0) -> np.ndarray:
    """Blockwise shrinkage (1 - thresh/||z_b||)_+ z_b on consecutive blocks."""
    z = np.asarray(z, dtype=float)
    if group_size <= 0 or z.size % group_size:
        raise ValueError("z length must be a positive multiple of group_size")
    blocks = z.reshape(-1, group_size)
    norms = np.linalg.norm(blocks, axis=1)
    scale = np.zeros_like(norms)
    np.divide(thresh, norms, out=scale, where=norms > 0)
    scale = np.maximum(1.0 - scale, 0.0)
    scale[norms == 0] = 0.0
    return (blocks * scale[:, None]).ravel()


def resolve_delta(kappa: float, lambda_hat: float) -> float:
    """Step size 1 / (kappa * lambda_hat), safely inside the stability range."""
    if kappa <= 0 or lambda_hat <= 0:
        raise ValueError("kappa and lambda_hat must be positive")
    return 1.0 / (kappa * lambda_hat)


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of a path run.

    ``delta``, ``max_iters`` and ``checkpoint_stride`` accept the string
    ``"auto"``: the step size is then ``1/(kappa * Lambda_hat)`` with
    ``Lambda_hat`` the inflated curvature bound at the start point, the
    iteration budget is ``auto_multiple * k0`` where ``k0`` is the last
    iteration with an all-zero ``beta``, and the stride keeps every
    iteration for small problems or about ``2000`` checkpoints
    otherwise.  ``support`` restricts the dynamics to the given free
    coordinates (all others stay pinned at zero); ``group_mode=None``
    defers to the loss (grouped shrinkage for blocked models).
    """

    kappa: float = 10.0
    delta: float | str = "auto"
    max_iters: int | str = "auto"
    auto_multiple: int = 1000
    checkpoint_stride: int | str = "auto"
    group_mode: bool | None = None
    support: object = None


@dataclass
class SolverState:
    k: int
    alpha: np.ndarray
    z: np.ndarray
    beta: np.ndarray


def initial_state(model: LossModel) -> SolverState:
    """State at t = 0: null-model intercept, zero velocity and coefficients."""
    return SolverState(0, model.init_intercept(), np.zeros(model.n_beta),
                       np.zeros(model.n_beta))


def _normalize_support(model: LossModel, support, group_size: int | None):
    if support is None:
        return None
    idx = np.unique(np.asarray(support, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= model.n_beta):
        raise ValueError("support indices out of range")
    if group_size:
        blocks = np.unique(idx // group_size)
        full = np.concatenate([np.arange(b * group_size, (b + 1) * group_size)
                               for b in blocks]) if blocks.size else idx
        if idx.size != full.size or not np.array_equal(idx, full):
            raise ValueError("support must cover whole blocks in group mode")
    return idx


def _shrink(z: np.ndarray, group_size: int | None) -> np.ndarray:
    if group_size:
        return block_soft_threshold(z, group_size)
    return soft_threshold(z)


def step(model: LossModel, state: SolverState, kappa: float, delta: float,
         support: np.ndarray | None = None,
         group_size: int | None = None) -> SolverState:
    """One iteration of the path dynamics.

    ``support`` (free-coordinate indices) pins all other coordinates of
    ``z`` and ``beta`` at zero; the intercept block is never restricted.
    """
    grad = model.gradient(Theta(state.alpha, state.beta))
    if model.n_alpha:
        alpha = state.alpha - kappa * delta * grad.alpha
    else:
        alpha = state.alpha.copy()
    z = state.z.copy()
    if support is None:
        z -= delta * grad.beta
    else:
        z[support] -= delta * grad.beta[support]
    beta = kappa * _shrink(z, group_size)
    return SolverState(state.k + 1, alpha, z, beta)


@dataclass
class Checkpoint:
    """Sparse snapshot of the state after iteration ``k`` (t = k * delta)."""

    k: int
    t: float
    alpha: np.ndarray
    beta_indices: np.ndarray
    beta_values: np.ndarray


@dataclass
class Path:
    """Recorded regularization path.

    ``entry_iteration[j]`` is the first iteration at which free
    coordinate ``j`` became nonzero (``inf`` if it never did); entries
    are exact regardless of the checkpoint stride.  ``meta`` echoes the
    resolved configuration (kappa, delta, stride, ``k0``, budget, loss
    kind and shapes).
    """

    checkpoints: list[Checkpoint]
    entry_iteration: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def ks(self) -> np.ndarray:
        return np.array([cp.k for cp in self.checkpoints], dtype=np.int64)

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    def beta_dense(self, cp: Checkpoint) -> np.ndarray:
        out = np.zeros(self.meta["n_beta"])
        out[cp.beta_indices] = cp.beta_values
        return out

    def checkpoint_at(self, k: int) -> Checkpoint:
        i = int(np.searchsorted(self.ks, k))
        if i == len(self.checkpoints) or self.checkpoints[i].k != k:
            raise KeyError(f"no checkpoint recorded at iteration {k}")
        return self.checkpoints[i]

    def nearest_t(self, t: float) -> Checkpoint:
        ts = np.array([cp.t for cp in self.checkpoints])
        return self.checkpoints[int(np.argmin(np.abs(ts - t)))]

    def digest(self) -> str:
        """SHA-256 over the exact bytes of every checkpoint and entry record."""
        h = hashlib.sha256()
        for cp in self.checkpoints:
            h.update(np.int64(cp.k).tobytes())
            h.update(np.float64(cp.t).tobytes())
            h.update(np.ascontiguousarray(cp.alpha, dtype=np.float64).tobytes())
            h.update(np.ascontiguousarray(cp.beta_indices, dtype=np.int64).tobytes())
            h.update(np.ascontiguousarray(cp.beta_values, dtype=np.float64).tobytes())
        h.update(np.ascontiguousarray(self.entry_iteration, dtype=np.float64).tobytes())
        return h.hexdigest()


class PathRecorder:
    """Checkpoint bookkeeping shared by the serial and sharded runners.

    Handles the auto stride (unknown until the budget is resolved),
    exact entry-iteration tracking and the guarantee that iteration 0
    and the final iteration are always recorded.
    """

    def __init__(self, model, kappa, delta, stride, lambda_hat, group_mode,
                 support, auto_info=None):
        self.model = model
        self.delta = delta
        self.stride = stride  # None while unresolved
        self.entry = np.full(model.n_beta, np.inf)
        self.checkpoints: list[Checkpoint] = []
        self.meta = {
            "kind": model.kind,
            "n": model.n,
            "p": model.p,
            "q": getattr(model, "q", None),
            "n_alpha": model.n_alpha,
            "n_beta": model.n_beta,
            "kappa": kappa,
            "delta": delta,
            "lambda_hat": lambda_hat,
            "group_mode": bool(group_mode),
            "support": None if support is None else [int(i) for i in support],
        }
        if auto_info:
            self.meta.update(auto_info)

    def observe(self, k: int, alpha: np.ndarray, beta: np.ndarray):
        fresh = (beta != 0) & np.isinf(self.entry)
        if fresh.any():
            self.entry[fresh] = k
        if self.stride is None or k % self.stride == 0:
            self._append(k, alpha, beta)

    def _append(self, k, alpha, beta):
        idx = np.flatnonzero(beta)
        self.checkpoints.append(Checkpoint(k, k * self.delta, alpha.copy(),
                                           idx.astype(np.int64), beta[idx].copy()))

    def resolve_stride(self, stride: int):
        self.stride = int(stride)
        self.checkpoints = [cp for cp in self.checkpoints if cp.k % self.stride == 0]

    def finish(self, k: int, alpha: np.ndarray, beta: np.ndarray, extra: dict) -> Path:
        if not self.checkpoints or self.checkpoints[-1].k != k:
            self._append(k, alpha, beta)
        meta = dict(self.meta)
        meta.update(extra)
        meta["checkpoint_stride"] = self.stride if self.stride else 1
        return Path(self.checkpoints, self.entry, meta)

    def partial(self, diverged_at: int) -> Path:
        meta = dict(self.meta)
        meta["diverged_at"] = diverged_at
        meta["checkpoint_stride"] = self.stride if self.stride else 1
        return Path(self.checkpoints, self.entry, meta)


def _auto_stride(p: int, k_max: int) -> int:
    if p <= STRIDE_DENSE_LIMIT:
        return 1
    return max(1, math.ceil(k_max / STRIDE_TARGET))


def resolve_run(model: LossModel, config: SolverConfig):
    """Resolve auto fields of ``config`` against ``model``.

    Returns ``(kappa, delta, lambda_hat, k_max_or_None, stride_or_None,
    group_size, support)``; ``k_max``/``stride`` stay ``None`` when they
    depend on the not-yet-observed ``k0``.
    """
    kappa = float(config.kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    group_mode = config.group_mode
    if group_mode is None:
        group_mode = model.group_size is not None
    if group_mode and not model.group_size:
        raise ValueError("group_mode requires a loss with block structure")
    group_size = model.group_size if group_mode else None
    support = _normalize_support(model, config.support, group_size)

    lambda_hat = None
    if config.delta == "auto":
        lambda_hat = curvature_bound(model)
        delta = resolve_delta(kappa, lambda_hat)
    else:
        delta = float(config.delta)
        if delta <= 0:
            raise ValueError("delta must be positive")

    if config.max_iters == "auto":
        if config.auto_multiple < 1:
            raise ValueError("auto_multiple must be at least 1")
        k_max = None
    else:
        k_max = int(config.max_iters)
        if k_max < 1:
            raise ValueError("max_iters must be at least 1")

    if config.checkpoint_stride == "auto":
        stride = _auto_stride(model.p, k_max) if k_max is not None else (
            1 if model.p <= STRIDE_DENSE_LIMIT else None)
    else:
        stride = int(config.checkpoint_stride)
        if stride < 1:
            raise ValueError("checkpoint_stride must be at least 1")
    return kappa, delta, lambda_hat, k_max, stride, group_size, support


def run_path(model: LossModel, config: SolverConfig = SolverConfig()) -> Path:
    """Trace the regularization path of ``model`` under ``config``.

    Runs until the resolved iteration budget; with ``max_iters="auto"``
    the budget is ``auto_multiple * max(k0, 1)`` capped at 1e7, where
    ``k0`` is the last iteration before any coordinate enters.  Raises
    ``DivergenceError`` (carrying the partial path) if iterates become
    non-finite, or ``ConvergenceError`` if no coordinate ever enters
    within the hard cap.
    """
    kappa, delta, lambda_hat, k_max, stride, group_size, support = \
        resolve_run(model, config)
    auto_info = {}
    if config.max_iters == "auto":
        auto_info["auto_multiple"] = int(config.auto_multiple)

    rec = PathRecorder(model, kappa, delta, stride, lambda_hat,
                       group_size is not None, support, auto_info)
    state = initial_state(model)
    rec.observe(0, state.alpha, state.beta)

    k0 = None
    k = 0
    while k_max is None or k < k_max:
        k += 1
        if k > HARD_ITER_CAP:
            raise ConvergenceError(
                f"no coordinate entered within the {HARD_ITER_CAP}-iteration cap; "
                "cannot resolve the auto budget")
        state = step(model, state, kappa, delta, support, group_size)
        if not (np.all(np.isfinite(state.alpha)) and np.all(np.isfinite(state.z))):
            raise DivergenceError(f"iterates became non-finite at iteration {k}",
                                  iteration=k, path=rec.partial(k))
        if k0 is None and state.beta.any():
            k0 = k - 1
            if k_max is None:
                k_max = min(int(config.auto_multiple) * max(k0, 1), HARD_ITER_CAP)
                if stride is None:
                    stride = _auto_stride(model.p, k_max)
                    rec.resolve_stride(stride)
        rec.observe(k, state.alpha, state.beta)

    if k0 is None:
        k0 = k  # nothing entered within an explicit budget
    return rec.finish(k, state.alpha, state.beta,
                      {"k_max": k, "k0": int(k0)})


def fit_oracle(model: LossModel, support, grad_tol: float = 1e-10,
               max_iter: int = 200, fd_step: float = 1e-6,
               norm_cap: float = 1e6) -> Theta:
    """Minimize the loss over {beta restricted to ``support``}.

    Damped Newton on the intercept block plus the supported free
    coordinates; the Hessian is built by forward differences of the
    analytic gradient.  Stops when the restricted gradient infinity
    norm is at most ``grad_tol`` or after ``max_iter`` iterations,
    returning the current iterate either way (the finite-difference
    Hessian has a noise floor near 1e-10, so the cap is a normal exit).
    Raises ``DivergenceError`` if the iterate norm exceeds ``norm_cap``
    (no finite minimizer, e.g. separable data).
    """
    support = _normalize_support(model, support, None)
    if support is None:
        support = np.arange(model.n_beta, dtype=np.int64)
    idx = np.concatenate([np.arange(model.n_alpha, dtype=np.int64),
                          model.n_alpha + support])
    x = pack_theta(model.initial_theta())
    if idx.size == 0:
        return model.unpack(x)

    grad_norm = np.inf
    for _ in range(max_iter):
        theta = model.unpack(x)
        g = pack_theta(model.gradient(theta))[idx]
        grad_norm = float(np.max(np.abs(g)))
        if grad_norm <= grad_tol:
            return theta
        H = np.empty((idx.size, idx.size))
        for col, i in enumerate(idx):
            xh = x.copy()
            xh[i] += fd_step
            gh = pack_theta(model.gradient(model.unpack(xh)))[idx]
            H[:, col] = (gh - g) / fd_step
        H = 0.5 * (H + H.T)
        scale = max(float(np.max(np.abs(np.diag(H)))), 1.0)
        direction = None
        for ridge in (0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1.0):
            try:
                d = np.linalg.solve(H + ridge * scale * np.eye(idx.size), -g)
            except np.linalg.LinAlgError:
                continue
            if g @ d < 0:
                direction = d
                break
        if direction is None:
            direction = -g  # gradient fallback
        f0 = model.value(theta)
        slope = float(g @ direction)
        t = 1.0
        while t > 1e-14:
            xt = x.copy()
            xt[idx] += t * direction
            if model.value(model.unpack(xt)) <= f0 + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            # no representable decrease left: numerical optimum
            return theta
        x[idx] += t * direction
        if np.linalg.norm(x) > norm_cap:
            raise DivergenceError(
                "restricted minimizer diverges (norm cap exceeded); "
                "the loss may have no finite minimum on this support")
    return model.unpack(x)


def _penalty_and_rho(z_s, group_size):
    rho = z_s - _shrink(z_s, group_size)
    return rho


def bregman_potential(state: SolverState, oracle: Theta, kappa: float,
                      support=None, group_size: int | None = None) -> float:
    """Lyapunov potential of the restricted dynamics around the oracle.

    ``Psi = P(beta_o) - <beta_o, rho> + d^2 / (2 kappa)`` where ``P`` is
    the penalty (l1, or sum of block norms in group mode), ``rho = z -
    S(z, 1)`` is the dual certificate on the support, and ``d`` is the
    Euclidean distance of (alpha, beta restricted) to the oracle.  It
    is non-increasing along a support-restricted run whenever the step
    size is inside the stability range, which is the checkable face of
    the convergence guarantee.
    """
    if support is None:
        sel = slice(None)
        n_sel = state.z.size
    else:
        sel = np.asarray(support, dtype=np.int64)
        n_sel = sel.size
    z_s = state.z[sel]
    beta_s = state.beta[sel]
    beta_o = oracle.beta[sel] if oracle.beta.size != n_sel else oracle.beta
    if beta_o.size != n_sel:
        raise ValueError("oracle beta does not match the support size")
    rho = _penalty_and_rho(z_s, group_size)
    if group_size:
        pen = float(np.linalg.norm(beta_o.reshape(-1, group_size), axis=1).sum())
    else:
        pen = float(np.abs(beta_o).sum())
    d2 = float(np.sum((state.alpha - oracle.alpha) ** 2) + np.sum((beta_s - beta_o) ** 2))
    return pen - float(beta_o @ rho) + d2 / (2.0 * kappa)


def potential_trace(model: LossModel, support, kappa: float = 10.0,
                    delta: float | str = "auto", n_iters: int = 500,
                    group_mode: bool | None = None):
    """Run the support-restricted dynamics and record the diagnostics.

    Returns a dict with the potential and restricted loss after every
    iteration (index 0 is the start state), the resolved step size and
    the oracle parameters.  Both sequences should be non-increasing up
    to rounding when the automatic step size is used.
    """
    config = SolverConfig(kappa=kappa, delta=delta, max_iters=n_iters,
                          group_mode=group_mode, support=support)
    kappa_r, delta_r, _, k_max, _, group_size, support_r = resolve_run(model, config)
    oracle = fit_oracle(model, support_r)
    state = initial_state(model)
    psi = [bregman_potential(state, oracle, kappa_r, support_r, group_size)]
    loss = [model.value(Theta(state.alpha, state.beta))]
    for _ in range(k_max):
        state = step(model, state, kappa_r, delta_r, support_r, group_size)
        psi.append(bregman_potential(state, oracle, kappa_r, support_r, group_size))
        loss.append(model.value(Theta(state.alpha, state.beta)))
    return {"psi": np.array(psi), "loss": np.array(loss),
            "delta": delta_r, "kappa": kappa_r, "oracle": oracle}


def stop_iteration_bound(model: LossModel, theta_star: Theta, eta: float,
                         growth_const: float, delta: float) -> float:
    """Iteration count below the early-phase time bound.

    The guarantee for sign recovery holds up to time
    ``tau = eta / (2 (C + 1) * ||grad(theta_star)||_inf)``; this returns
    ``ceil(tau / delta)``, or ``inf`` when the gradient at the truth
    vanishes (noise-free data, no finite bound needed).
    """
    if not (0 < eta <= 1):
        raise ValueError("eta must lie in (0, 1]")
    if growth_const < 0 or delta <= 0:
        raise ValueError("growth_const must be >= 0 and delta > 0")
    g = pack_theta(model.gradient(theta_star))
    gmax = float(np.max(np.abs(g))) if g.size else 0.0
    if gmax == 0.0:
        return math.inf
    tau = eta / (2.0 * (growth_const + 1.0) * gmax)
    return math.ceil(tau / delta)
