"""Shared test oracles.

These implementations are deliberately independent of the package
internals: finite differences for gradients, scipy's generic minimizer
for proximal problems, dense linear algebra for restricted fits.  Tests
compare package output against these, never the other way around.
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from bregpath.losses import pack_theta


def fd_gradient(model, theta, step=1e-5):
    """Central finite differences of the loss value in packed coordinates."""
    x0 = pack_theta(theta)
    g = np.zeros_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (model.value(model.unpack(xp))
                - model.value(model.unpack(xm))) / (2 * step)
    return g


def analytic_gradient(model, theta):
    return pack_theta(model.gradient(theta))


def rel_err(approx, exact):
    denom = max(float(np.linalg.norm(exact)), 1e-12)
    return float(np.linalg.norm(np.asarray(approx) - np.asarray(exact))) / denom


def brute_prox_l1(z, kappa):
    """argmin_b kappa*||b||_1 + 0.5*||b - kappa*z||^2, coordinatewise numeric."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        res = minimize(lambda b: kappa * abs(b[0]) + 0.5 * (b[0] - kappa * zi) ** 2,
                       x0=[kappa * zi], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 500})
        out[i] = res.x[0]
    return out


def brute_prox_group(z, kappa):
    """argmin_b kappa*||b||_2 + 0.5*||b - kappa*z||^2 over one block."""
    z = np.asarray(z, dtype=float).ravel()

    def objective(b):
        return kappa * np.linalg.norm(b) + 0.5 * np.sum((b - kappa * z) ** 2)

    res = minimize(objective, x0=kappa * z, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14,
                            "maxiter": 20000, "maxfev": 20000})
    return res.x


def random_instance(kind, rng, n=None, p=None, q=3):
    """A small random dataset/model pair of the requested loss kind."""
    from bregpath.losses import make_loss

    n = n or int(rng.integers(20, 51))
    p = p or int(rng.integers(3, 11))
    if kind in ("linear", "logistic"):
        X = rng.standard_normal((n, p))
        beta = np.zeros(p)
        k = max(1, p // 3)
        beta[:k] = rng.uniform(0.5, 1.5, k) * rng.choice([-1.0, 1.0], k)
        eta = 0.3 + X @ beta
        if kind == "linear":
            y = eta + 0.2 * rng.standard_normal(n)
        else:
            y = np.where(rng.random(n) < 1.0 / (1.0 + np.exp(-eta)), 1.0, -1.0)
        return make_loss(kind, X, y)
    if kind in ("ising-composite", "ising-mpf"):
        X = rng.choice([-1.0, 1.0], size=(n, p))
        return make_loss(kind, X)
    if kind == "group-mrf":
        X = rng.integers(1, q + 1, size=(n, p)).astype(float)
        return make_loss(kind, X, q=q)
    raise ValueError(kind)


def random_theta(model, rng, scale=0.2):
    return model.make_theta(scale * rng.standard_normal(model.n_alpha),
                            scale * rng.standard_normal(model.n_beta))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
