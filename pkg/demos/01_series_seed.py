"""Series seed at the singular origin.

The profile equations are singular at ``t = 0``. The solution is started from
its Taylor expansion, which is fixed by the single parameter ``q``.
"""

# %%
from __future__ import annotations

import math

import numpy as np

from grs_soliton import SolitonParams, compute_seed, eval_seed, seed_residual
from grs_soliton.powerseries import TruncSeries, exp_series, mul, reciprocal

# %% [markdown]
# Truncated power series are small immutable coefficient vectors. Products,
# reciprocals and exponentials stay within the truncation order.

# %%
s = TruncSeries.from_coeffs([0.0, 1.0, -1.0], 6)
print("exp(t - t^2)      =", np.round(exp_series(s).coeffs, 6))
print("(1 - t) * 1/(1-t) =", mul(TruncSeries.from_coeffs([1, -1], 6), reciprocal(TruncSeries.from_coeffs([1, -1], 6))).coeffs)

# %% [markdown]
# For ``q = -1/2`` the seed is the round sphere, ``phi = sqrt2 sin(t/sqrt2)``
# with ``f = 0``.

# %%
seed = compute_seed(SolitonParams(q=-0.5))
exact = [(-1) ** (n // 2) * 2 ** (-(n - 1) / 2) / math.factorial(n) if n % 2 else 0.0 for n in range(8)]
print("phi coefficients:", seed.phi_series.coeffs[:8])
print("closed form     :", np.array(exact))
print("max |f coeff|   :", np.max(np.abs(seed.f_series.coeffs)))

# %% [markdown]
# A family member from the theorem range. The residual of the truncated
# series shrinks like a power of ``t``; a seed of order 7 loses six decades
# for each decade in ``t``.

# %%
params = SolitonParams(ell=0.0)
print(f"q = {params.q:.12f}")
for N in (7, 24):
    sd = compute_seed(params.replace(series_order=N))
    print(f"order {N:2d}: residual at t=0.1 {max(map(abs, seed_residual(sd, 0.1))):.2e},"
          f" at t=0.01 {max(map(abs, seed_residual(sd, 0.01))):.2e}")

print("state at the handoff point:", eval_seed(compute_seed(params), params.eps_handoff))
