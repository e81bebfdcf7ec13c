# %% [markdown]
# # Two trajectories, one noise path
#
# Below the Hopf threshold two initial conditions driven by the same noise
# realization collapse onto each other. Above it they keep their distance.

# %%
import numpy as np

from brusselator import Params, generate, hopf_threshold, two_point

a, sigma, h = 1.0, 0.1, 1e-3
path = generate(seed=0, h=h, length=150_000)
s0, s1 = (0.6, 1.4), (2.5, 3.0)

# %%
for b in (hopf_threshold(a) - 1, hopf_threshold(a) + 1):
    _, _, d = two_point(Params(a, b, sigma), s0, s1, path, 150.0)
    print(f"b={b:g}: d(0)={d.d[0]:.3f}  max d={d.d.max():.3f}  d(150)={d.d[-1]:.2e}")

# %% [markdown]
# The same experiment over many seeds at once: each pair gets its own stream.

# %%
from brusselator.integrator import two_point_ensemble

rng = np.random.default_rng(1)
starts = rng.uniform(0.5, 1.5, size=(4, 50))
for b in (1.0, 3.0):
    _, d = two_point_ensemble(Params(a, b, sigma), starts[:2], starts[2:], 0, h, 150.0, 50, stride=100)
    print(f"b={b:g}: contracted in {np.sum(d[-1] < d[0])}/50, grew in {np.sum(d.max(0) > d[0])}/50")
