"""Curvatures, torsion and soliton-equation residuals along a profile.

For ``g = dt^2 + phi(t)^2 dsigma^2`` the sectional curvatures are
``K_rad = -phi''/phi`` (planes containing the radial direction) and
``K_tan = (1 - phi'^2)/phi^2`` (tangent to the orbit spheres). The 3-form is
``H = h dt ^ e^12`` with ``h = k phi^2 e^f``, so ``|H|^2 = 6 h^2 / phi^4``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .integrator import Trajectory, rhs
from .seed import SeedExpansion, SolitonState, c2_of, curvature_jet, one_minus_dphi_sq


class GeometrySample(NamedTuple):
    t: float
    k_rad: float
    k_tan: float
    ric_rr: float
    ric_tt: float
    h: float
    normH2: float
    h_density: float
    scal: float


def geometry_at(state: SolitonState, k: float) -> GeometrySample:
    """Derived quantities; ``phi''`` comes from the ODE right-hand side."""
    _, ddphi, _, _ = rhs(state, k)
    phi = state.phi
    k_rad = -ddphi / phi
    k_tan = one_minus_dphi_sq(state) / phi**2
    with np.errstate(under="ignore"):
        h = k * phi**2 * np.exp(state.f)
        normH2 = 6.0 * h**2 / phi**4
        h_density = h / np.asarray(state.t) ** 2
    return GeometrySample(
        state.t,
        k_rad,
        k_tan,
        2.0 * k_rad,
        k_rad + k_tan,
        h,
        normH2,
        h_density,
        2.0 * (2.0 * k_rad + k_tan),
    )


def log_h_density(state: SolitonState, k: float):
    """``log(h / t^2)`` evaluated in log space (``h`` itself underflows for large t)."""
    if k == 0:
        raise ValueError("h vanishes identically when k = 0")
    return math.log(k) + 2.0 * np.log(state.phi) + state.f - 2.0 * np.log(state.t)


def soliton_residual(state: SolitonState, k: float, ddphi=None, ddf=None):
    """Residuals of the two second-order soliton equations.

    With ``ddphi``/``ddf`` omitted they are taken from :func:`rhs` and the
    residuals vanish up to rounding; pass independently reconstructed second
    derivatives (finite differences, re-read CSV data) to test those.
    """
    if ddphi is None or ddf is None:
        _, ddphi_rhs, _, ddf_rhs = rhs(state, k)
        ddphi = ddphi_rhs if ddphi is None else ddphi
        ddf = ddf_rhs if ddf is None else ddf
    phi, dphi, f, df = state.phi, state.dphi, state.f, state.df
    with np.errstate(under="ignore"):
        torsion = c2_of(k) * np.exp(2.0 * f) * phi**2
    r1 = one_minus_dphi_sq(state) - phi * ddphi - (-phi * dphi * df + torsion)
    r2 = -2.0 * phi * ddphi - (-ddf * phi**2 + torsion)
    return r1, r2


def richardson_limit(values, ratio: float = 2.0, power: int = 2) -> float:
    """Extrapolate ``v(t) = L + c1 t^p + c2 t^{2p} + ...`` sampled at ``t, t/ratio, t/ratio^2, ...``."""
    table = [float(v) for v in values]
    j = 1
    while len(table) > 1:
        fac = ratio ** (power * j)
        table = [(fac * b - a) / (fac - 1.0) for a, b in zip(table, table[1:])]
        j += 1
    return table[0]


def curvature_limit_q(trajectory: Trajectory | SeedExpansion, eps: float | None = None):
    """``(-lim K_rad, -lim K_tan)`` as ``t -> 0+``; both should equal ``q``.

    Uses seed evaluations at ``eps, eps/2, eps/4`` and two Richardson levels
    in ``t^2``.
    """
    if isinstance(trajectory, SeedExpansion):
        seed = trajectory
        eps = 1e-3 if eps is None else eps
    else:
        seed = trajectory.seed
        eps = trajectory.params.eps_handoff if eps is None else eps
    ts = [eps, eps / 2.0, eps / 4.0]
    vals = [curvature_jet(seed, t) for t in ts]
    return richardson_limit([v[0] for v in vals]), richardson_limit([v[1] for v in vals])


def geometry_along(trajectory: Trajectory) -> GeometrySample:
    """Vectorised :func:`geometry_at` over every sample."""
    return geometry_at(trajectory.state, trajectory.params.k)
