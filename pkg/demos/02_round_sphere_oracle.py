"""Integrating the round-sphere profile and catching its collapse.

``q = -1/2`` has the exact solution ``phi = sqrt2 sin(t/sqrt2)``, ``f = 0``,
which closes up at ``t = pi sqrt2``. It checks the integrator and its
collapse detection end to end.
"""

# %%
from __future__ import annotations

import math

import numpy as np

from grs_soliton import SolitonParams, geometry_along, integrate

# %%
params = SolitonParams(q=-0.5, t_max=10.0)
traj = integrate(params)
print("termination:", traj.termination, " expected collapse at", math.pi * math.sqrt(2))
print("accepted steps:", traj.n_steps)

# %%
t = np.linspace(params.eps_handoff, 3.0, 7)
st = traj.at(t)
for ti, p, f in zip(t, st.phi, st.f):
    print(f"t={ti:6.3f}  phi={p:.12f}  exact={math.sqrt(2) * math.sin(ti / math.sqrt(2)):.12f}  f={f:+.1e}")

# %% [markdown]
# The round sphere has constant curvature 1/2 and ``|H|^2 = 12``.

# %%
geo = geometry_along(traj)
inside = traj.t < 4.0
print("k_rad range:", geo.k_rad[inside].min(), geo.k_rad[inside].max())
print("k_tan range:", geo.k_tan[inside].min(), geo.k_tan[inside].max())
print("|H|^2 range:", geo.normH2[inside].min(), geo.normH2[inside].max())
