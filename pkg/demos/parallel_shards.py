"""Check that the sharded logistic engine reproduces the serial path bit for bit.

Shards only split the gradient reduction; the update sequence is fixed,
so every worker count must yield the same digest.  Timings follow the
core count of the machine and are reported, not asserted.
"""

import numpy as np

from bregpath.losses import make_loss
from bregpath.parallel import parallel_logistic_path, scaling_benchmark
from bregpath.simulate import LogisticSpec, gen_logistic
from bregpath.solver import SolverConfig, run_path

data, _ = gen_logistic(LogisticSpec(p=300, s=30, n=1500, seed=5))
config = SolverConfig(max_iters=400, checkpoint_stride=20)

serial = run_path(make_loss("logistic", data.X, data.y), config)
print(f"serial digest  {serial.digest()}")
for shards in (2, 3, 4):
    path = parallel_logistic_path(data, config, n_shards=shards)
    tag = "match" if path.digest() == serial.digest() else "MISMATCH"
    print(f"{shards} shards digest {path.digest()}  ({tag})")

print("\ntiming sweep (fixed 200-iteration budget):")
out = scaling_benchmark((1, 2, 4), p=600, s=60, n=2000, max_iters=200, seed=5)
print(f"all digests identical: {out['identical']}")
for row in out["rows"]:
    print(f"  L={row['L']}  {row['seconds']:6.2f}s  speedup {row['speedup']:.2f}")
