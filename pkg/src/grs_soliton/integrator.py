"""Adaptive integration of the profile equations away from the origin.

The series seed owns ``[0, eps]``; from ``eps`` on we march the first-order
system in ``(phi, w, f, f')`` with ``w = 1 - phi'`` (carrying the defect
keeps ``1 - phi'^2`` accurate where ``phi'`` is close to 1) using an explicit embedded Runge-Kutta
pair (Dormand-Prince 8(5,3), scipy's stepper), stepping manually so that
sampling, collapse detection and failure classification stay under our
control.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import DOP853, OdeSolution

from .seed import (
    SeedExpansion,
    SolitonParams,
    SolitonState,
    c2_of,
    compute_seed,
    eval_seed,
    one_minus_dphi_sq,
)

EVENT_TOL = 1e-10
UNDERFLOW_FACTOR = 1e-14
# a stall with phi below this fraction of its running maximum is a collapse
COLLAPSE_FRACTION = 1e-6


class OrbitCollapse(ArithmeticError):
    """The orbit radius phi reached zero."""


class TerminationKind(enum.Enum):
    REACHED_T_MAX = "ReachedTMax"
    ORBIT_COLLAPSE = "OrbitCollapse"
    STEP_UNDERFLOW = "StepUnderflow"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    t: float

    def __str__(self):
        if self.kind is TerminationKind.REACHED_T_MAX:
            return self.kind.value
        return f"{self.kind.value}({self.t:.12g})"


def _exp2f(f, c2):
    if c2 == 0.0:
        return 0.0 * f
    with np.errstate(over="ignore", under="ignore"):
        return c2 * np.exp(2.0 * f)


def rhs(state: SolitonState, k: float):
    """Derivatives ``(phi', phi'', f', f'')``; works on floats or arrays."""
    phi, dphi, f, df = state.phi, state.dphi, state.f, state.df
    if np.any(np.asarray(phi) <= 0):
        raise OrbitCollapse(f"phi <= 0 at t={state.t}")
    c2 = c2_of(k)
    w = _exp2f(f, c2)
    s = one_minus_dphi_sq(state) / phi
    ddphi = s + dphi * df - phi * w
    ddf = 2.0 * s / phi + 2.0 * dphi / phi * df - w
    return dphi, ddphi, df, ddf


def _profile_fun(c2: float) -> Callable:
    exp = math.exp

    def fun(t, y):
        phi, w1, f, df = y
        dphi = 1.0 - w1
        if c2:
            try:
                w = c2 * exp(2.0 * f)
            except OverflowError:
                w = math.inf
        else:
            w = 0.0
        with np.errstate(all="ignore"):
            inv = 1.0 / phi if phi != 0.0 else math.inf
            s = w1 * (2.0 - w1) * inv
            return np.array([dphi, -(s + dphi * df - phi * w), df, 2.0 * s * inv + 2.0 * dphi * inv * df - w])

    return fun


@dataclass(frozen=True)
class MarchResult:
    x: np.ndarray
    y: np.ndarray
    termination: Termination
    dense: OdeSolution | None
    n_steps: int
    error_estimate: np.ndarray
    x_last: float
    y_last: np.ndarray


def _bisect(g, a, b, ga, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0.0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def march(
    fun: Callable,
    x0: float,
    y0: Sequence[float],
    x_end: float,
    *,
    rtol: float,
    atol: float | np.ndarray,
    samples: Sequence[float] | None = None,
    event: Callable[[np.ndarray], float] | None = None,
    event_tol: float = EVENT_TOL,
    keep_dense: bool = True,
    max_steps: int = 10_000_000,
) -> MarchResult:
    """Shared stepping engine.

    ``samples`` (sorted, within ``[x0, x_end]``) are filled from the dense
    output; without them every accepted step is recorded. ``event`` maps a
    state to a scalar whose sign change terminates the march (collapse).
    """
    y0 = np.asarray(y0, dtype=float)
    solver = DOP853(fun, x0, y0, x_end, rtol=rtol, atol=atol)
    xs, ys = [x0], [y0.copy()]
    pending = None
    if samples is not None:
        pending = np.asarray(samples, dtype=float)
        pending = pending[pending > x0]
    idx = 0
    ts_dense, interps = [x0], []
    err = np.zeros_like(y0)
    g_old = event(y0) if event is not None else None
    termination = None
    n_steps = 0

    while solver.status == "running" and n_steps < max_steps:
        x_old = solver.t
        solver.step()
        if solver.status == "failed":
            kind = TerminationKind.STEP_UNDERFLOW
            if not np.all(np.isfinite(solver.y)):
                kind = TerminationKind.NON_FINITE
            termination = Termination(kind, float(solver.t))
            break
        n_steps += 1
        x_new, y_new = solver.t, solver.y
        if not np.all(np.isfinite(y_new)):
            termination = Termination(TerminationKind.NON_FINITE, float(x_old))
            break
        sol = solver.dense_output()
        try:
            err += np.abs(solver._estimate_error(solver.K, solver.h_previous))
        except AttributeError:  # pragma: no cover - scipy internals moved
            err += atol + rtol * np.abs(y_new)

        x_stop = x_new
        if event is not None:
            g_new = event(y_new)
            if (g_new > 0) != (g_old > 0) or g_new == 0.0:
                x_stop = _bisect(lambda s: event(sol(s)), x_old, x_new, g_old, event_tol)
                termination = Termination(TerminationKind.ORBIT_COLLAPSE, float(x_stop))
            g_old = g_new

        if keep_dense:
            ts_dense.append(x_new)
            interps.append(sol)
        if pending is None:
            if termination is None:
                xs.append(x_new)
                ys.append(y_new.copy())
        else:
            j = idx
            while j < pending.size and pending[j] <= x_new and (termination is None or pending[j] < x_stop):
                j += 1
            if j > idx:
                chunk = pending[idx:j]
                vals = sol(chunk)
                if chunk[-1] == x_new:
                    vals[:, -1] = y_new
                xs.extend(chunk.tolist())
                ys.extend(vals.T.copy())
                idx = j
        if termination is not None:
            break
        if solver.step_size is not None and solver.step_size < UNDERFLOW_FACTOR * abs(x_new):
            termination = Termination(TerminationKind.STEP_UNDERFLOW, float(x_new))
            break

    if termination is None:
        if solver.status == "finished":
            termination = Termination(TerminationKind.REACHED_T_MAX, float(solver.t))
        else:
            termination = Termination(TerminationKind.STEP_UNDERFLOW, float(solver.t))

    dense = OdeSolution(ts_dense, interps) if keep_dense and interps else None
    return MarchResult(
        np.asarray(xs), np.vstack(ys), termination, dense, n_steps, err, float(solver.t), np.array(solver.y)
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled profile solution; row ``i`` of ``y`` is ``(phi, phi', f, f')`` at ``t[i]``."""

    params: SolitonParams
    seed: SeedExpansion
    t: np.ndarray
    y: np.ndarray
    termination: Termination
    one_minus_dphi: np.ndarray | None = None
    dense: OdeSolution | None = field(default=None, repr=False)
    n_steps: int = 0
    error_estimate: np.ndarray | None = None

    @property
    def phi(self):
        return self.y[:, 0]

    @property
    def dphi(self):
        return self.y[:, 1]

    @property
    def f(self):
        return self.y[:, 2]

    @property
    def df(self):
        return self.y[:, 3]

    @property
    def state(self) -> SolitonState:
        """All samples as one state of arrays."""
        return SolitonState(self.t, self.phi, self.dphi, self.f, self.df, self.one_minus_dphi)

    def states(self) -> list[SolitonState]:
        w = self.one_minus_dphi if self.one_minus_dphi is not None else 1.0 - self.dphi
        return [SolitonState(float(t), *map(float, row), float(wi)) for t, row, wi in zip(self.t, self.y, w)]

    def at(self, t) -> SolitonState:
        """Dense-output state at ``t`` (scalar or array)."""
        if self.dense is None:
            raise ValueError("trajectory was integrated without dense output")
        v = self.dense(t)
        return SolitonState(t, v[0], 1.0 - v[1], v[2], v[3], v[1])

    def __len__(self):
        return self.t.size


def component_atol(abs_tol: float, y0, floor: float) -> np.ndarray:
    """Absolute tolerance per component, scaled by its size at the start.

    Used by the phase run, whose offsets start at ``O(eps^2)``: a bare
    ``abs_tol`` would permit large relative errors there, which the
    dynamics near the fixed point carry along. The scale is clipped to
    ``[floor, 1]`` so that components that vanish identically keep a usable
    tolerance. The profile run keeps a scalar ``abs_tol``: scaling it would
    make the stepper track rounding noise in the singular mode near a
    collapse.
    """
    mag = np.abs(np.asarray(y0, dtype=float))
    return abs_tol * np.clip(mag, floor, 1.0)


def sample_grid(eps: float, t_max: float, n: int, spacing: str = "lin") -> np.ndarray:
    if spacing == "log":
        return np.geomspace(eps, t_max, n)
    if spacing == "lin":
        return np.linspace(eps, t_max, n)
    raise ValueError(f"unknown spacing {spacing!r}")


def integrate(
    params: SolitonParams,
    seed: SeedExpansion | None = None,
    samples: Sequence[float] | None = None,
    *,
    keep_dense: bool = True,
) -> Trajectory:
    """Integrate from the handoff point to ``params.t_max``.

    ``samples`` are output times in ``[eps, t_max]``; by default every
    accepted step is recorded. Collapse of ``phi`` stops the run with an
    ``OrbitCollapse`` termination rather than an exception.
    """
    if seed is None:
        seed = compute_seed(params)
    elif seed.q != params.q or seed.k != params.k:
        raise ValueError("seed was computed for different parameters")
    eps = params.eps_handoff
    s0 = eval_seed(seed, eps)
    y0 = [s0.phi, s0.one_minus_dphi, s0.f, s0.df]
    if samples is not None:
        samples = np.asarray(samples, dtype=float)
        if samples.size and (samples[0] < eps or samples[-1] > params.t_max or np.any(np.diff(samples) <= 0)):
            raise ValueError("samples must be strictly increasing within [eps, t_max]")
    res = march(
        _profile_fun(params.c2),
        eps,
        y0,
        params.t_max,
        rtol=params.rel_tol,
        atol=params.abs_tol,
        samples=samples,
        event=lambda y: y[0],
        keep_dense=keep_dense,
    )
    termination = res.termination
    if termination.kind in (TerminationKind.STEP_UNDERFLOW, TerminationKind.NON_FINITE):
        # The pole phi = 0 is a singular point: rounding excites the singular
        # modes and the stepper stalls just before the sign change.
        phi_max = max(float(np.max(res.y[:, 0])), float(res.y_last[0]))
        if np.isfinite(res.y_last[0]) and res.y_last[0] <= COLLAPSE_FRACTION * phi_max:
            termination = Termination(TerminationKind.ORBIT_COLLAPSE, res.x_last)
    w = res.y[:, 1].copy()
    y = res.y.copy()
    y[:, 1] = 1.0 - w
    err = res.error_estimate.copy()
    return Trajectory(params, seed, res.x, y, termination, w, res.dense, res.n_steps, err)


def integrate_phase(params: SolitonParams, seed: SeedExpansion | None = None, **kwargs):
    """Phase-variable run sharing this engine; see :func:`grs_soliton.phase.integrate_phase`."""
    from .phase import integrate_phase as _integrate_phase

    return _integrate_phase(params, seed, **kwargs)
