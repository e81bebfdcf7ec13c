# %% [markdown]
# # Finite-time Lyapunov exponents over the phase plane
#
# The horizon is half the period of the noise-free oscillation at b=4. Every
# grid cell sees the same noise path.

# %%
import numpy as np

from brusselator import Params, generate
from brusselator.ftle import auto_horizon, ftle_field, ftle_series

T = auto_horizon(Params(1, 4))
path = generate(2023, 1e-3, int(round(T / 1e-3)))
print(f"horizon T = {T:.4f}")

# %%
for b in (1.0, 4.0):
    field = ftle_field(Params(1, b, 0.1), (0.05, 4), (0.05, 6), 60, 60, path, T, workers=4)
    v = field.values
    print(f"b={b:g}: FTLE range [{np.nanmin(v):.3f}, {np.nanmax(v):.3f}], "
          f"positive cells {field.positive_fraction():.1%}")

# %% [markdown]
# Coarse text rendering of the b=4 field ('+' marks positive cells).

# %%
for row in field.values.T[::-4]:
    print("".join("+" if x > 0 else "." for x in row[::2]))

# %% [markdown]
# As a function of the horizon the exponent along the limit cycle hovers
# around zero: the direction along the orbit neither grows nor shrinks.

# %%
long_path = generate(0, 1e-3, 100_000)
for T_, lam in ftle_series(Params(1, 4, 0.1), (1, 1), long_path, [5, 10, 25, 50, 100]):
    print(f"T={T_:5.1f}  lambda={lam:+.4f}")
