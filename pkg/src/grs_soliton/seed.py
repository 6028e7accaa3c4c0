"""Formal solution at the singular origin.

Near ``t = 0`` the profile is written ``phi = t * a(t)`` with ``a`` even,
``a(0) = 1``, and ``f`` even with ``f(0) = 0``. Multiplying the ``(a, f)``
system by ``t**2`` gives

    t^2 P'' = A(P) + t B(P, P') + t^2 C(P, P'),     P = (a, f),

and matching the coefficient of ``t^(2n+2)`` yields a 2x2 linear system
``L_2n @ p_{2n+2} = d_2n``. ``L_0`` is singular; that level is fixed by the
free parameter ``q = phi'''(0)`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .powerseries import (
    TruncSeries,
    differentiate,
    eval_horner,
    exp_series,
    integrate,
    mul,
    reciprocal,
    shift_down,
    shift_up,
)

SQRT2 = math.sqrt(2.0)
Q_CRITICAL = -35.0 / 12.0

# dA at P(0) and dB/dQ at (P(0), Q(0)) for the (a, f) system
DA0 = np.array([[-2.0, 0.0], [-4.0, 0.0]])
DBDQ0 = np.array([[-4.0, 1.0], [-4.0, 2.0]])


class SingularLevel(ArithmeticError):
    """A recursion level with n >= 1 produced a numerically singular matrix."""


class SolitonState(NamedTuple):
    """Point on the profile curve. Fields may be floats or equal-length arrays.

    ``one_minus_dphi`` optionally carries ``1 - phi'`` computed without
    cancellation; near the origin ``phi'`` is within ``O(t^2)`` of 1 and the
    curvature-type quotients ``(1 - phi'^2)/phi^2`` lose digits otherwise.
    """

    t: float
    phi: float
    dphi: float
    f: float
    df: float
    one_minus_dphi: float | None = None


def one_minus_dphi_sq(state: SolitonState):
    """``1 - phi'^2``, using the carried defect when present."""
    w = state.one_minus_dphi
    if w is None:
        return 1.0 - state.dphi * state.dphi
    return w * (2.0 - w)


def c2_of(k: float) -> float:
    """``k**2 / 2``, exact for the two admissible values (float sqrt2 squared is not 2)."""
    if k == SQRT2:
        return 1.0
    return 0.5 * k * k


def q_from_ell(ell: float) -> float:
    return Q_CRITICAL - math.exp(-ell)


def _normalize_k(k: float) -> float:
    if k == 0 or math.isclose(k, 0.0, abs_tol=1e-15):
        return 0.0
    if math.isclose(k, SQRT2, rel_tol=1e-12):
        return SQRT2
    raise ValueError(f"torsion constant k must be 0 or sqrt(2), got {k!r}")


@dataclass(frozen=True)
class SolitonParams:
    """Family member and numerical settings.

    Give either ``q`` or ``ell``; with ``ell`` the parameter is
    ``q = -35/12 - exp(-ell)``.
    """

    q: float | None = None
    ell: float | None = None
    k: float = SQRT2
    series_order: int = 24
    eps_handoff: float = 1e-3
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    t_max: float = 100.0

    def __post_init__(self):
        if self.ell is not None:
            q = q_from_ell(self.ell)
            if self.q is not None and not math.isclose(self.q, q, rel_tol=1e-14):
                raise ValueError(f"q={self.q} is inconsistent with ell={self.ell} (q_ell={q})")
            object.__setattr__(self, "q", q)
        if self.q is None:
            raise ValueError("one of q or ell is required")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "k", _normalize_k(float(self.k)))
        if not 0.0 < self.eps_handoff <= 0.1:
            raise ValueError(f"eps_handoff must lie in (0, 0.1], got {self.eps_handoff}")
        if self.series_order < 2:
            raise ValueError("series_order must be at least 2")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.t_max <= self.eps_handoff:
            raise ValueError("t_max must exceed eps_handoff")

    @property
    def c2(self) -> float:
        """Coefficient ``k**2 / 2`` in front of the ``e^{2f}`` terms."""
        return c2_of(self.k)

    @property
    def conserved_target(self) -> float:
        """Value of the conserved quantity: ``6q + 5 k^2/2`` (``6q+5`` when k=sqrt 2)."""
        return 6.0 * self.q + 5.0 * self.c2

    @property
    def in_theorem_regime(self) -> bool:
        return self.k > 0 and self.q < Q_CRITICAL

    def replace(self, **changes) -> SolitonParams:
        from dataclasses import replace

        if "q" in changes and "ell" not in changes:
            changes["ell"] = None
        return replace(self, **changes)


def l_matrix(n: int) -> np.ndarray:
    """``L_2n = I - dA/(2(n+1)(2n+1)) - (dB/dQ)/(2n+1)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.eye(2) - DA0 / (2.0 * (n + 1) * (2 * n + 1)) - DBDQ0 / (2 * n + 1)


def _pad(s: TruncSeries, order: int) -> TruncSeries:
    return s.truncate(order)


def residual_series(a: TruncSeries, f: TruncSeries, c2: float) -> tuple[TruncSeries, TruncSeries]:
    """``t^2 P'' - A - t B - t^2 C`` for polynomial ``a``, ``f`` (same order)."""
    n = a.order
    da, df = _pad(differentiate(a), n), _pad(differentiate(f), n)
    dda, ddf = _pad(differentiate(da), n), _pad(differentiate(df), n)
    inv_a = reciprocal(a)
    inv_a2 = mul(inv_a, inv_a)
    one_minus_a2 = 1.0 - mul(a, a)
    e2f = exp_series(2.0 * f)
    da_inv_a = mul(da, inv_a)

    A1 = mul(one_minus_a2, inv_a)
    A2 = 2.0 * mul(one_minus_a2, inv_a2)
    B1 = mul(a, df) - 4.0 * da
    B2 = 2.0 * (df - 2.0 * da_inv_a)
    C1 = mul(da, df) - mul(mul(da, da), inv_a) - c2 * mul(a, e2f)
    C2 = 2.0 * mul(da_inv_a, df) - 2.0 * mul(da_inv_a, da_inv_a) - c2 * e2f

    E1 = shift_up(dda, 2) - A1 - shift_up(B1, 1) - shift_up(C1, 2)
    E2 = shift_up(ddf, 2) - A2 - shift_up(B2, 1) - shift_up(C2, 2)
    return E1, E2


@dataclass(frozen=True)
class SeedExpansion:
    a_series: TruncSeries
    f_series: TruncSeries
    q: float
    order: int
    k: float = SQRT2
    level_dets: tuple = field(default=(), compare=False)

    @property
    def c2(self) -> float:
        return c2_of(self.k)

    @cached_property
    def phi_series(self) -> TruncSeries:
        return TruncSeries(np.concatenate(([0.0], self.a_series.coeffs)))

    @cached_property
    def dphi_series(self) -> TruncSeries:
        return differentiate(self.phi_series)

    @cached_property
    def dphi_minus_one_series(self) -> TruncSeries:
        c = self.dphi_series.coeffs.copy()
        c[0] = 0.0
        return TruncSeries(c)

    @cached_property
    def ddphi_series(self) -> TruncSeries:
        return differentiate(self.dphi_series)

    @cached_property
    def df_series(self) -> TruncSeries:
        return differentiate(self.f_series)

    @cached_property
    def ddf_series(self) -> TruncSeries:
        return differentiate(self.df_series)

    def taylor_derivative(self, which: str, n: int) -> float:
        """n-th derivative at 0 of ``phi`` or ``f``."""
        s = self.phi_series if which == "phi" else self.f_series
        if n > s.order:
            raise ValueError(f"derivative {n} exceeds series order {s.order}")
        return s[n] * math.factorial(n)

    def p_coefficients(self) -> np.ndarray:
        """Rows ``p_2n = (a^(2n)(0), f^(2n)(0))``: the factorial-scaled view."""
        m = self.order // 2
        return np.array(
            [[self.a_series[2 * j] * math.factorial(2 * j), self.f_series[2 * j] * math.factorial(2 * j)] for j in range(m + 1)]
        )


def compute_seed(params: SolitonParams) -> SeedExpansion:
    N = params.series_order
    q, c2 = params.q, params.c2
    alpha = np.zeros(N + 1)
    beta = np.zeros(N + 1)
    alpha[0] = 1.0
    # level n = 0: L_0 is singular, the free parameter enters here
    alpha[2] = q / 6.0
    beta[2] = 0.5 * (2.0 * q + c2)

    dets = []
    n = 1
    while 2 * n + 2 <= N:
        m = 2 * n + 2
        E1, E2 = residual_series(TruncSeries(alpha), TruncSeries(beta), c2)
        L = l_matrix(n)
        det = float(np.linalg.det(L))
        if not det > 1e-12:
            raise SingularLevel(f"det L_{2 * n} = {det!r}")
        dets.append(det)
        rhs = -np.array([E1[m], E2[m]]) / (m * (m - 1))
        alpha[m], beta[m] = np.linalg.solve(L, rhs)
        n += 1

    return SeedExpansion(
        a_series=TruncSeries(alpha),
        f_series=TruncSeries(beta),
        q=q,
        order=N,
        k=params.k,
        level_dets=tuple(dets),
    )


class SeedJet(NamedTuple):
    """Series values at ``t`` including the cancellation-free ``phi' - 1``."""

    t: float
    phi: float
    dphi: float
    dphi_m1: float
    ddphi: float
    f: float
    df: float
    ddf: float


def seed_jet(seed: SeedExpansion, t) -> SeedJet:
    return SeedJet(
        t,
        eval_horner(seed.phi_series, t),
        eval_horner(seed.dphi_series, t),
        eval_horner(seed.dphi_minus_one_series, t),
        eval_horner(seed.ddphi_series, t),
        eval_horner(seed.f_series, t),
        eval_horner(seed.df_series, t),
        eval_horner(seed.ddf_series, t),
    )


def eval_seed(seed: SeedExpansion, t: float) -> SolitonState:
    j = seed_jet(seed, t)
    return SolitonState(t, j.phi, j.dphi, j.f, j.df, -j.dphi_m1)


def seed_residual(seed: SeedExpansion, t: float) -> tuple[float, float]:
    """Left minus right side of both profile equations, evaluated from the series."""
    j = seed_jet(seed, t)
    one_minus_dphi2 = -j.dphi_m1 * (j.dphi + 1.0)
    e2f = math.exp(2.0 * j.f) if seed.c2 else 0.0
    r_phi = j.ddphi - (one_minus_dphi2 / j.phi + j.dphi * j.df - seed.c2 * j.phi * e2f)
    r_f = j.ddf - (2.0 * one_minus_dphi2 / j.phi**2 + 2.0 * j.dphi / j.phi * j.df - seed.c2 * e2f)
    return r_phi, r_f


def curvature_jet(seed: SeedExpansion, t):
    """``(-K_rad, -K_tan)`` at ``t`` from the series, free of ``1 - phi'^2`` cancellation."""
    j = seed_jet(seed, t)
    neg_k_rad = j.ddphi / j.phi
    neg_k_tan = j.dphi_m1 * (j.dphi + 1.0) / j.phi**2
    return neg_k_rad, neg_k_tan


def radial_log_coordinate(seed: SeedExpansion, t: float) -> float:
    """``r(t) = log t + int_0^t (1/a(s) - 1)/s ds``, an antiderivative of ``1/phi``."""
    g = reciprocal(seed.a_series) - 1.0
    return math.log(t) + eval_horner(integrate(shift_down(g)), t)
