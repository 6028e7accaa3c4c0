"""Large-t behaviour of a complete solution.

``f`` becomes asymptotically linear with slope ``-sqrt|6q+5|`` and the
torsion density decays exponentially at the same rate. ``phi^2`` grows
linearly; its measured rate is printed against two candidate constants.
"""

# %%
from __future__ import annotations

import math

from grs_soliton import SolitonParams, fit_asymptotics, integrate

# %%
params = SolitonParams(ell=0.0, t_max=1e4)
traj = integrate(params)
fit = fit_asymptotics(traj)
C = math.sqrt(abs(params.conserved_target))
print(f"window t in [{fit.window[0]:g}, {fit.window[1]:g}]")
print(f"f'(t_max) = {fit.fprime_limit:.8f}  vs  -sqrt|6q+5| = {-C:.8f}")
print(f"-f/(C t) off by at most {fit.R_f_err:.2e}")
print(f"log(h/t^2) slope {fit.h_decay_slope:.5f}")

# %% [markdown]
# ``phi^2 / (2t)`` settles near ``1/C`` rather than ``1/C^2``.

# %%
t_end = traj.t[-1]
print(f"phi^2/(2t) at t={t_end:g}: {traj.phi[-1] ** 2 / (2 * t_end):.6f};"
      f" 1/C = {1 / C:.6f}, 1/C^2 = {1 / C**2:.6f}")
print(f"max relative error against 1/C: {fit.R_phi_quartic_err:.2e}, against 1/C^2: {fit.R_phi_err:.3f}")
