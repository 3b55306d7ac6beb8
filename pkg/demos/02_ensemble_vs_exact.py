"""
Ensemble average against the exact reduced state
================================================

Averaging |psi><psi| over trajectories recovers the reduced state of the
atom.  For one resonant mode the exact answer is known in closed form, so
the Monte Carlo error can be read off directly and compared with 1/sqrt(N).
"""

import numpy as np

from nmsse import BathSpec, IntegratorConfig, excited, oracle_rho_series, run_ensemble
from nmsse.ensemble import compare

spec = BathSpec.single_mode(1.0)
cfg = IntegratorConfig(dt=1e-3, horizon=1.5, stride=100)
init = excited()

exact = oracle_rho_series(spec, init, cfg.output_times())

for N in (100, 400, 1600):
    acc = run_ensemble(spec, init, cfg, N, master_seed=1)
    rep = compare(acc, acc.times, exact)
    print(f"N={N:5d}  max Bloch diff {rep.max_bloch_diff:.4f}  "
          f"rms {rep.rms_bloch_diff:.4f}  1/sqrt(N) {1 / np.sqrt(N):.4f}")

# the same comparison in the linear (ostensible) picture, with Girsanov weights
acc = run_ensemble(spec, init, cfg, 1600, master_seed=1, mode="linear")
rep = compare(acc, acc.times, exact)
print(f"linear N=1600 max Bloch diff {rep.max_bloch_diff:.4f}, "
      f"mean weight in [{acc.mean_weight().min():.3f}, {acc.mean_weight().max():.3f}]")

# the excited population follows cos^2 t
z = acc.mean_bloch()[:, 2]
for t, zt, ze in zip(acc.times[::3], z[::3], np.cos(2 * acc.times[::3])):
    print(f"t={t:4.2f}  ensemble z {zt:+.3f}  exact z {ze:+.3f}")
