"""Members of the complete family and the qualitative theorems they satisfy.

For ``q < -35/12`` every solution is complete. Along each one, ``phi`` is
increasing and concave, ``f`` is negative and decreasing, and both
sectional curvatures are positive.
"""

# %%
from __future__ import annotations

from grs_soliton import SolitonParams, check_propositions, compute_seed, curvature_limit_q, integrate
from grs_soliton.invariants import est_bound

# %%
for ell in (-1.0, 0.0, 1.0, 2.0):
    params = SolitonParams(ell=ell, t_max=200.0)
    traj = integrate(params)
    report = check_propositions(traj)
    worst = min(report.checks, key=lambda c: c.margin)
    rad, tan = curvature_limit_q(compute_seed(params), params.eps_handoff)
    print(f"ell={ell:+.0f}  q={params.q:.6f}  {traj.termination}  all checks pass: {report.all_passed}")
    print(f"    smallest margin {worst.name} = {worst.margin:.3e} at t = {worst.worst_t:.3g}")
    print(f"    -lim K_rad = {rad:.12f}, -lim K_tan = {tan:.12f}, bound on phi e^f = {est_bound(params.q):.6f}")

# %% [markdown]
# Outside the proven range the same checks are only reported, whatever the
# run does.

# %%
traj = integrate(SolitonParams(q=-1.0, t_max=50.0))
rep = check_propositions(traj)
print(traj.termination, rep.notes)
print("observed:", {c.name: c.passed for c in rep.checks})
