"""Synthetic data generators.

Two model families: a correlated-design logistic regression and a
two-dimensional grid Ising model sampled by Gibbs sweeps.  Every draw
comes from a labeled :func:`bregpath.rng.substream`, so datasets are
reproducible entry by entry from the spec seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import Dataset, Theta, pair_indices, sigmoid
from .rng import substream

__all__ = [
    "LogisticSpec",
    "IsingSpec",
    "gen_logistic",
    "toeplitz_design_cov",
    "grid_edges",
    "pair_rank",
    "grid_ising_params",
    "gibbs_sample",
    "gen_ising",
    "exact_ising_distribution",
    "enumerate_states",
]


@dataclass(frozen=True)
class LogisticSpec:
    """Correlated logistic design with support {1..s}.

    The intercept and the s active coefficients are i.i.d. uniform on
    [-2*signal, -signal] u [signal, 2*signal]; rows of X are N(0, Sigma)
    with Toeplitz Sigma_jk = correlation^|j-k|.
    """

    p: int
    s: int
    n: int
    signal: float = 1.0
    correlation: float = 0.25
    seed: int = 0


@dataclass(frozen=True)
class IsingSpec:
    """Aperiodic side x side grid with 4-nearest-neighbor edges.

    Node biases and edge couplings are i.i.d. uniform on
    [-2/T, -1/T] u [1/T, 2/T] where T = temperature; n samples are
    drawn by Gibbs sweeps with the given burn-in and thinning.
    """

    side: int
    temperature: float
    n: int
    seed: int = 0
    burn_in: int = 100
    thin: int = 10


def _signed_uniform(rng: np.random.Generator, low: float, high: float, size: int):
    # magnitudes first, then signs: the documented draw order
    mag = rng.uniform(low, high, size)
    sign = 2.0 * rng.integers(0, 2, size) - 1.0
    return mag * sign


def toeplitz_design_cov(p: int, r: float) -> np.ndarray:
    """Toeplitz covariance r^|j-k|."""
    idx = np.arange(p)
    return np.asarray(r, dtype=float) ** np.abs(idx[:, None] - idx[None, :])


def gen_logistic(spec: LogisticSpec):
    """Draw (dataset, truth) for the logistic family.

    Streams: ``(seed, "logistic-truth")`` for the intercept and active
    coefficients (magnitudes then signs), ``(seed, "logistic-design")``
    for X, ``(seed, "logistic-labels")`` for y.
    """
    if not (0 < spec.s <= spec.p):
        raise ValueError("need 0 < s <= p")
    if spec.signal <= 0 or not (0 <= spec.correlation < 1):
        raise ValueError("signal must be positive and correlation in [0, 1)")
    vals = _signed_uniform(substream(spec.seed, "logistic-truth"),
                           spec.signal, 2.0 * spec.signal, spec.s + 1)
    alpha = vals[:1]
    beta = np.zeros(spec.p)
    beta[: spec.s] = vals[1:]

    cov = toeplitz_design_cov(spec.p, spec.correlation)
    chol = np.linalg.cholesky(cov)
    X = substream(spec.seed, "logistic-design").standard_normal((spec.n, spec.p)) @ chol.T

    prob = sigmoid(alpha[0] + X @ beta)
    u = substream(spec.seed, "logistic-labels").random(spec.n)
    y = np.where(u < prob, 1.0, -1.0)
    return Dataset(X, y), Theta(alpha, beta)


def grid_edges(side: int):
    """Edges of the aperiodic side x side grid in draw order.

    Nodes are numbered row-major; each node lists its right neighbor
    then its down neighbor.  2 * side * (side - 1) edges in total.
    """
    edges = []
    for r in range(side):
        for c in range(side):
            j = r * side + c
            if c + 1 < side:
                edges.append((j, j + 1))
            if r + 1 < side:
                edges.append((j, j + side))
    return edges


def pair_rank(p: int, a: int, b: int) -> int:
    """Position of pair (a, b), a < b, in numpy.triu_indices(p, 1) order."""
    if not (0 <= a < b < p):
        raise ValueError("need 0 <= a < b < p")
    return a * (2 * p - a - 1) // 2 + (b - a - 1)


def grid_ising_params(spec: IsingSpec) -> Theta:
    """Draw grid-model truth in free-coordinate form.

    Stream ``(seed, "ising-truth")``: node bias magnitudes, node bias
    signs, coupling magnitudes, coupling signs, in that order; edges
    follow :func:`grid_edges` order.
    """
    if spec.side < 2 or spec.temperature <= 0:
        raise ValueError("need side >= 2 and positive temperature")
    p = spec.side ** 2
    lo, hi = 1.0 / spec.temperature, 2.0 / spec.temperature
    rng = substream(spec.seed, "ising-truth")
    alpha = _signed_uniform(rng, lo, hi, p)
    edges = grid_edges(spec.side)
    coupl = _signed_uniform(rng, lo, hi, len(edges))
    beta = np.zeros(p * (p - 1) // 2)
    for (a, b), v in zip(edges, coupl):
        beta[pair_rank(p, a, b)] = v
    return Theta(alpha, beta)


def _interaction_matrix(theta: Theta) -> np.ndarray:
    p = theta.alpha.size
    r, c = pair_indices(p)
    B = np.zeros((p, p))
    B[r, c] = theta.beta
    B[c, r] = theta.beta
    return B


def gibbs_sample(theta: Theta, n: int, burn_in: int = 100, thin: int = 10,
                 rng: np.random.Generator | None = None,
                 seed: int | None = None) -> np.ndarray:
    """Systematic-scan Gibbs sampler for the {+1,-1} pairwise model.

    Each sweep updates sites 0..p-1 in order using conditional odds
    ``P(x_j = +1 | rest) = sigmoid(alpha_j + sum_j' beta_jj' x_j')``.
    Consumes exactly p uniforms for the initial state and p per sweep,
    in site order, so output is reproducible given the stream.  Keeps
    one state every ``thin`` sweeps after ``burn_in`` sweeps.
    """
    if rng is None:
        rng = substream(0 if seed is None else seed, "ising-gibbs")
    if n < 1 or burn_in < 0 or thin < 1:
        raise ValueError("need n >= 1, burn_in >= 0, thin >= 1")
    p = theta.alpha.size
    B = _interaction_matrix(theta)
    alpha = theta.alpha
    x = np.where(rng.random(p) < 0.5, 1.0, -1.0)
    out = np.empty((n, p))
    kept = 0
    sweep = 0
    total = burn_in + n * thin
    while sweep < total:
        u = rng.random(p)
        for j in range(p):
            m = alpha[j] + B[j] @ x
            x[j] = 1.0 if u[j] < sigmoid(m) else -1.0
        sweep += 1
        if sweep > burn_in and (sweep - burn_in) % thin == 0:
            out[kept] = x
            kept += 1
    return out


def gen_ising(spec: IsingSpec):
    """Draw (dataset, truth) for the grid Ising family."""
    theta = grid_ising_params(spec)
    X = gibbs_sample(theta, spec.n, spec.burn_in, spec.thin,
                     rng=substream(spec.seed, "ising-gibbs"))
    return Dataset(X), theta


def enumerate_states(p: int) -> np.ndarray:
    """All 2^p spin configurations; bit b of the row index sets x_b."""
    if p > 20:
        raise ValueError("state enumeration is limited to p <= 20")
    idx = np.arange(2 ** p)
    return ((idx[:, None] >> np.arange(p)[None, :]) & 1) * 2.0 - 1.0


def exact_ising_distribution(theta: Theta, max_p: int = 12):
    """Exact state probabilities of the pairwise model by enumeration.

    ``P(x) ~ exp(0.5 * alpha' x + 0.5 * sum_{j<j'} beta_jj' x_j x_j')``.
    Returns ``(states, probs)`` with states in :func:`enumerate_states`
    order.  Intended as a small-p oracle (defaults to p <= 12).
    """
    p = theta.alpha.size
    if p > max_p:
        raise ValueError(f"exact enumeration limited to p <= {max_p}")
    states = enumerate_states(p)
    B = _interaction_matrix(theta)
    energy = 0.5 * states @ theta.alpha + 0.25 * np.einsum("si,ij,sj->s", states, B, states)
    energy -= energy.max()
    w = np.exp(energy)
    return states, w / w.sum()
