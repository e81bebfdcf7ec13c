# %% [markdown]
# # Molecule counts and the rate equation
#
# The jump process with volume V is matched to the rate equation through
# A = aV and B = bV. As V grows, X/V follows the deterministic solution.

# %%
import numpy as np
from scipy.integrate import solve_ivp

from brusselator import Params
from brusselator.model import drift_deterministic
from brusselator.ssa import JumpState, RateConstants, scaled_sup_distance, simulate_jump

p = Params(1, 1)
grid = np.linspace(0, 10, 501)
ref = solve_ivp(lambda t, z: drift_deterministic(p, z), (0, 10), (2, 0.5), t_eval=grid, rtol=1e-10).y[0]

# %%
for V in (100, 1000, 10000):
    rc = RateConstants.matching(p, V)
    path = simulate_jump(rc, JumpState(2 * V, V // 2), 10.0, seed=0)
    print(f"V={V:>6}: {len(path) - 1:>8} events, sup |X/V - x| = {scaled_sup_distance(path, V, grid, ref):.4f}")

# %% [markdown]
# Above the threshold the counts oscillate instead of settling.

# %%
V = 1000
path = simulate_jump(RateConstants.matching(Params(1, 3), V), JumpState(V, 3 * V), 40.0, seed=1)
t, states = path.resample(0.5)
print("X/V every 2 time units:", np.round(states[::4, 0] / V, 2))
