"""
A single position-unraveling trajectory
=======================================

An excited two-level atom coupled to one resonant mode (g = 1).  The bath
coordinate is drawn once from the vacuum position density; after that the
conditioned atom state and the coordinate evolve smoothly.
"""

import numpy as np

from nmsse import BathSpec, IntegratorConfig, excited, run_trajectory

spec = BathSpec.single_mode(1.0)
cfg = IntegratorConfig(dt=1e-4, horizon=1.5, stride=1000)

records = run_trajectory(spec, excited(), cfg, seed=0)

print(f"{'t':>5} {'x':>8} {'y':>8} {'z':>8} {'x_1':>8} {'Re z':>8} {'Im z':>5}")
for r in records:
    print(f"{r.t:5.2f} {r.bloch.x:8.4f} {r.bloch.y:8.4f} {r.bloch.z:8.4f} "
          f"{r.coords[0]:8.4f} {r.re_z:8.4f} {r.im_z:5.1f}")

# a real coupling keeps the noise real, and the state stays on the Bloch sphere
print("max |Im z|:", max(abs(r.im_z) for r in records))
print("max | |b| - 1 |:", max(abs(np.linalg.norm(r.bloch) - 1) for r in records))
