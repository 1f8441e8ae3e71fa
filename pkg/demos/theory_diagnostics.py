"""Inspect the quantities behind the path's consistency guarantees.

Three diagnostics on one linear problem: the potential that certifies
the support-restricted dynamics never move away from the restricted
optimum, the design incoherence constant that controls false entries,
and the shrinking gap between paths as the step size is halved.
"""

import numpy as np

from bregpath.evaluate import irr_constant
from bregpath.losses import curvature_bound, make_loss
from bregpath.rng import substream
from bregpath.simulate import LogisticSpec, gen_logistic, toeplitz_design_cov
from bregpath.solver import SolverConfig, potential_trace, resolve_delta, run_path

design, truth = gen_logistic(LogisticSpec(p=30, s=5, n=400, signal=2.0,
                                          correlation=0.25, seed=3))
y = truth.alpha + design.X @ truth.beta \
    + 0.5 * substream(3, "linear-noise").standard_normal(400)
model = make_loss("linear", design.X, y)
support = np.flatnonzero(truth.beta)

trace = potential_trace(model, support, n_iters=300)
steps = np.diff(trace["psi"])
print(f"potential: start {trace['psi'][0]:.4f}, end {trace['psi'][-1]:.2e}, "
      f"largest increase {steps.max():.2e} (should be <= 0 up to rounding)")

sigma = toeplitz_design_cov(30, 0.25)
print(f"incoherence irr0 = {irr_constant(sigma, support):.3f} "
      "(< 1 permits sign-consistent recovery)")

kappa = 10.0
delta = resolve_delta(kappa, curvature_bound(model))
grid = np.linspace(delta, 250 * delta, 60)
paths = {}
for d in (delta, delta / 2, delta / 4):
    cfg = SolverConfig(kappa=kappa, delta=d,
                       max_iters=int(np.ceil(250 * delta / d)) + 1,
                       checkpoint_stride=1)
    paths[d] = run_path(model, cfg)


def sup_gap(a, b):
    return max(float(np.abs(a.beta_dense(a.nearest_t(t))
                            - b.beta_dense(b.nearest_t(t))).max())
               for t in grid)


g1 = sup_gap(paths[delta], paths[delta / 2])
g2 = sup_gap(paths[delta / 2], paths[delta / 4])
print(f"matched-t sup gap: delta vs delta/2 = {g1:.4f}, "
      f"delta/2 vs delta/4 = {g2:.4f} (ratio {g1 / g2:.2f})")
