from __future__ import annotations

import math

import numpy as np
import pytest

from grs_soliton import (
    PhaseState,
    SolitonParams,
    SolitonState,
    compute_seed,
    constraint_residual,
    cross_validate,
    eval_seed,
    integrate,
    integrate_phase,
    phase_rhs,
    profile_r,
    to_phase,
)
from grs_soliton.integrator import integrate_phase as integrate_phase_via_integrator

from oracles import SQRT2, brf_dphi, brf_phi


def brf_u_of_r(r):
    # dr = du / sin u with r ~ log t at the origin
    return 2.0 * np.arctan(np.exp(r) / (2.0 * SQRT2))


@pytest.fixture(scope="module")
def ell0_phase(ell0_run):
    r = profile_r(ell0_run)
    return integrate_phase(ell0_run.params, ell0_run.seed, r_max=float(r[-1]))


class TestToPhase:
    def test_origin_is_fixed_point(self):
        s = eval_seed(compute_seed(SolitonParams(q=-47 / 12)), 1e-8)
        p = to_phase(s)
        assert p.x == pytest.approx(1.0, abs=1e-14)
        assert p.y == pytest.approx(2.0, abs=1e-14)
        assert p.z == pytest.approx(0.0, abs=1e-7)

    def test_brf_closed_form(self):
        t = np.linspace(0.1, 4.0, 9)
        u = t / SQRT2
        p = to_phase(SolitonState(t, brf_phi(t), brf_dphi(t), 0 * t, 0 * t))
        np.testing.assert_allclose(p.x, np.cos(u), atol=1e-15)
        np.testing.assert_allclose(p.y, 2 * np.cos(u), atol=1e-15)
        np.testing.assert_allclose(p.z, SQRT2 * np.sin(u), atol=1e-15)
        lhs = 2 * p.x**2 - p.y**2 + p.z**2 + 2
        np.testing.assert_allclose(lhs, 2 * p.phi_sq, atol=1e-14)

    def test_u_is_nonnegative_in_theorem_regime(self, family_runs):
        for tr in family_runs.values():
            p = to_phase(tr.state)
            np.testing.assert_allclose(p.y - 2 * p.x, -tr.phi * tr.df, rtol=1e-9, atol=1e-15)
            assert np.all(p.y - 2 * p.x > 0)


class TestPhaseRhs:
    def test_fixed_point(self):
        d = phase_rhs(PhaseState(0.0, 1.0, 2.0, 0.0, 0.0))
        assert d[:3] == (0.0, 0.0, 0.0)

    def test_torsion_free_plane_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x, y = rng.normal(size=2)
            assert phase_rhs(PhaseState(0.0, x, y, 0.0, 1.0))[2] == 0.0

    def test_matches_profile_chain_rule(self, ell0_run):
        # d/dr = phi d/dt applied to the profile variables
        from grs_soliton import rhs

        st = ell0_run.state
        _, ddphi, _, ddf = rhs(st, SQRT2)
        p = to_phase(st)
        dx, dy, dz, dp2 = phase_rhs(p)
        np.testing.assert_allclose(dx, st.phi * ddphi, rtol=1e-8, atol=1e-12)
        dy_t = 2 * ddphi - ddf * st.phi - st.df * st.dphi
        np.testing.assert_allclose(dy, st.phi * dy_t, rtol=1e-8, atol=1e-12)
        np.testing.assert_allclose(dz, st.phi * np.exp(st.f) * (st.df * st.phi + st.dphi), rtol=1e-12)
        np.testing.assert_allclose(dp2, 2 * st.phi**2 * st.dphi, rtol=1e-12)


class TestPhaseRun:
    def test_cross_validation(self, ell0_run, ell0_phase):
        cv = cross_validate(ell0_run, ell0_phase)
        assert cv.max_abs_deviation <= 1e-6
        assert cv.constraint_drift <= 1e-8
        assert cv.r_span[0] == pytest.approx(math.log(1e-3), abs=1e-5)
        assert cv.n_points == ell0_run.t.size
        assert set(cv.as_dict()) >= {"max_deviation", "constraint_drift", "constraint_drift_abs"}

    def test_z_monotonicity_rate(self, ell0_phase):
        # stay where z is resolved relative to the interpolation error
        r_hi = ell0_phase.r[ell0_phase.state.z > 1e-20][-1]
        r = np.linspace(ell0_phase.r[0] + 1, r_hi, 30)
        h = 1e-4
        zp = (ell0_phase.at(r + h).z - ell0_phase.at(r - h).z) / (2 * h)
        s = ell0_phase.at(r)
        np.testing.assert_allclose(zp / s.z, 3 * s.x - s.y, rtol=1e-5, atol=1e-7)

    def test_brf_closed_form(self):
        p = SolitonParams(q=-0.5, t_max=3.0)
        seed = compute_seed(p)
        r_end = float(profile_r(integrate(p, seed))[-1])
        ph = integrate_phase(p, seed, r_max=r_end)
        u = brf_u_of_r(ph.r)
        s = ph.state
        err = np.max(np.abs(np.column_stack([s.x - np.cos(u), s.y - 2 * np.cos(u), s.z - SQRT2 * np.sin(u)])))
        assert err <= 1e-8
        assert np.max(ph.constraint_drift()) <= 1e-8

    def test_profile_r_brf(self):
        tr = integrate(SolitonParams(q=-0.5, t_max=3.0))
        u = tr.t / SQRT2
        exact = np.log(np.tan(u / 2)) + math.log(2 * SQRT2)
        np.testing.assert_allclose(profile_r(tr), exact, atol=1e-8)

    def test_shared_entry_point(self, ell0_params):
        a = integrate_phase(ell0_params, r_max=0.0)
        b = integrate_phase_via_integrator(ell0_params, r_max=0.0)
        np.testing.assert_array_equal(a.v, b.v)

    def test_errors(self, ell0_run, ell0_phase):
        with pytest.raises(ValueError):
            integrate_phase(ell0_run.params, r_max=-20.0)
        other = integrate(SolitonParams(q=-4.0, t_max=10.0))
        with pytest.raises(ValueError):
            cross_validate(other, ell0_phase)
        no_dense = integrate_phase(ell0_run.params, r_max=0.0, keep_dense=False)
        with pytest.raises(ValueError):
            no_dense.at(-1.0)

    def test_constraint_residual_forms_agree(self, ell0_phase):
        s = ell0_phase.state
        far = s.r > 0
        a = constraint_residual(s, ell0_phase.params)[far]
        b = constraint_residual(s, ell0_phase.params, ell0_phase.offsets)[far]
        np.testing.assert_allclose(a, b, atol=1e-9)
