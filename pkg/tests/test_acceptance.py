"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL criterion N: ...`` line that the session
prints at the end (see ``conftest.py``). Running this file directly prints
the same lines without pytest.
"""

from __future__ import annotations

import contextlib
import io
import math
import time

import numpy as np

from grs_soliton import (
    SolitonParams,
    TerminationKind,
    check_propositions,
    compute_seed,
    conserved_at,
    cross_validate,
    curvature_limit_q,
    fit_asymptotics,
    integrate,
    integrate_phase,
    profile_r,
    seed_residual,
)
from grs_soliton.cli import main as cli_main
from grs_soliton.invariants import est_bound

from oracles import brf_phi, brf_phi_coefficients

FAMILY = (-1.0, 0.0, 1.0, 2.0)


def _line(n: int, ok: bool, text: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"


def criterion_1():
    """Round-sphere profile: phi, f and collapse time against the closed form."""
    start = time.perf_counter()
    params = SolitonParams(q=-0.5, t_max=10.0, abs_tol=1e-10, rel_tol=1e-10)
    tr = integrate(params)
    elapsed = time.perf_counter() - start
    tw = np.linspace(params.eps_handoff, 3.0, 3001)
    st = tr.at(tw)
    err_phi = float(np.max(np.abs(st.phi - brf_phi(tw))))
    err_f = float(np.max(np.abs(st.f)))
    collapsed = tr.termination.kind is TerminationKind.ORBIT_COLLAPSE
    err_t = abs(tr.termination.t - math.pi * math.sqrt(2.0)) if collapsed else math.inf
    ok = err_phi <= 1e-8 and err_f <= 1e-8 and err_t <= 1e-6 and elapsed < 1.0
    text = (
        f"max|phi-exact|={err_phi:.2e} max|f|={err_f:.2e} (<=1e-8), "
        f"collapse {tr.termination} err={err_t:.2e} (<=1e-6), runtime {elapsed:.2f}s (<1s)"
    )
    return ok, text


def criterion_2():
    """Seed coefficients against the closed form; residual order under t -> t/10."""
    seed = compute_seed(SolitonParams(q=-0.5, series_order=24))
    exact = brf_phi_coefficients(seed.phi_series.order)
    coef_err = float(np.max(np.abs(seed.phi_series.coeffs - exact)))
    f_err = float(np.max(np.abs(seed.f_series.coeffs)))
    worst = 0.0
    for q in (-47 / 12, -4.0):
        for N in (5, 7, 9):
            s = compute_seed(SolitonParams(q=q, series_order=N))
            for t in (0.1, 0.2):
                big = max(map(abs, seed_residual(s, t)))
                tiny = max(map(abs, seed_residual(s, t / 10)))
                worst = max(worst, abs(math.log10(big / tiny) - (N - 1)))
    ok = coef_err <= 1e-12 and f_err <= 1e-12 and worst <= 0.5
    text = (
        f"coefficient error phi {coef_err:.1e}, f {f_err:.1e} (<=1e-12); "
        f"residual exponent off N-1 by at most {worst:.3f} for N in (5,7,9) (<=0.5)"
    )
    return ok, text


def criterion_3():
    """Conservation drift at two tolerances."""
    start = time.perf_counter()
    drifts = []
    for tol in (1e-10, 1e-12):
        params = SolitonParams(ell=0.0, t_max=100.0, abs_tol=tol, rel_tol=tol)
        tr = integrate(params)
        drifts.append(float(np.max(conserved_at(tr.state, params).drift2)))
    elapsed = time.perf_counter() - start
    ratio = drifts[0] / drifts[1]
    ok = drifts[0] <= 1e-6 and ratio >= 10.0 and elapsed < 5.0
    text = (
        f"max|q2-(6q+5)|={drifts[0]:.2e} at tol 1e-10 (<=1e-6), {drifts[1]:.2e} at 1e-12, "
        f"ratio {ratio:.1f} (>=10), runtime {elapsed:.2f}s (<5s)"
    )
    return ok, text


def criterion_4():
    """Qualitative theorems along four family members."""
    start = time.perf_counter()
    failures, worst_est = [], -math.inf
    needed = (
        "phi_positive", "dphi_positive", "dphi_below_one", "phi_concave", "f_negative",
        "f_decreasing", "k_rad_positive", "k_tan_positive", "phi_exp_f_bound",
    )
    for ell in FAMILY:
        params = SolitonParams(ell=ell, t_max=200.0)
        tr = integrate(params)
        if tr.termination.kind is not TerminationKind.REACHED_T_MAX:
            failures.append(f"ell={ell:g}: {tr.termination}")
            continue
        rep = check_propositions(tr, strict=False)
        failures += [f"ell={ell:g}: {name}" for name in needed if not rep[name].passed]
        pe = float(np.max(tr.phi * np.exp(tr.f)))
        worst_est = max(worst_est, pe - est_bound(params.q))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30.0
    text = (
        f"{len(FAMILY) * len(needed) - len(failures)}/{len(FAMILY) * len(needed)} checks hold for ell in "
        f"{FAMILY}, max(phi e^f) - bound = {worst_est:.3e} (<=1e-9), runtime {elapsed:.2f}s (<30s)"
    )
    if failures:
        text += "; failing: " + ", ".join(failures)
    return ok, text


def criterion_5():
    """Large-t rates on the last decade of a run to t = 1e4."""
    tr = integrate(SolitonParams(ell=0.0, t_max=1e4))
    if tr.termination.kind is not TerminationKind.REACHED_T_MAX:
        return False, f"run ended with {tr.termination}"
    fit = fit_asymptotics(tr)
    ok_phi = fit.R_phi_err <= 0.05
    ok_f = fit.R_f_err <= 0.01
    ok_fp = fit.fprime_err <= 1e-3
    ok_h = fit.h_decay_slope is not None and fit.h_decay_slope < 0
    ok = ok_phi and ok_f and ok_fp and ok_h
    lo, hi = fit.window
    text = (
        f"t in [{lo:g}, {hi:g}]: |R_phi-1|={fit.R_phi_err:.3g} (<=0.05) "
        f"[phi^2 sqrt|6q+5|/(2t) gives {fit.R_phi_quartic_err:.2e}], "
        f"|R_f-1|={fit.R_f_err:.2e} (<=0.01), |f'(t_max)+sqrt18.5|={fit.fprime_err:.1e} (<=1e-3), "
        f"log h_density slope {fit.h_decay_slope:.4f} (<0)"
    )
    return ok, text


def criterion_6():
    """Curvature limits at the origin for each family member."""
    worst_q = worst_pair = 0.0
    for ell in FAMILY:
        params = SolitonParams(ell=ell)
        rad, tan = curvature_limit_q(compute_seed(params), params.eps_handoff)
        worst_q = max(worst_q, abs(rad - params.q), abs(tan - params.q))
        worst_pair = max(worst_pair, abs(rad - tan))
    ok = worst_q <= 1e-8 and worst_pair <= 1e-10
    return ok, f"max|lim - q|={worst_q:.1e} (<=1e-8), max|lim_rad - lim_tan|={worst_pair:.1e} (<=1e-10)"


def criterion_7():
    """Profile and phase-variable runs after reparametrisation."""
    params = SolitonParams(ell=0.0, t_max=100.0)
    prof = integrate(params)
    r_end = float(profile_r(prof)[-1])
    ph = integrate_phase(params, prof.seed, r_max=r_end)
    cv = cross_validate(prof, ph)
    dev = cv.max_deviation
    ok = cv.max_abs_deviation <= 1e-6 and cv.constraint_drift <= 1e-8
    text = (
        f"max deviation x {dev['x']:.1e}, y {dev['y']:.1e}, z {dev['z']:.1e} (<=1e-6); "
        f"constraint drift {cv.constraint_drift:.1e} relative to phi^2 (<=1e-8), "
        f"{cv.constraint_drift_abs:.1e} unnormalised"
    )
    return ok, text


def criterion_8(tmp_dir):
    """Byte-identical CSV from two solve runs."""
    paths = [f"{tmp_dir}/run{i}.csv" for i in (1, 2)]
    codes = []
    with contextlib.redirect_stdout(io.StringIO()):
        for p in paths:
            codes.append(cli_main(["solve", "--ell", "0", "--out", p]))
    blobs = [open(p, "rb").read() for p in paths]
    ok = codes == [0, 0] and blobs[0] == blobs[1] and len(blobs[0]) > 0
    return ok, f"exit codes {codes}, {len(blobs[0])} bytes each, identical={blobs[0] == blobs[1]}"


def _record(n, result):
    from conftest import ACCEPTANCE_LINES

    ok, text = result
    line = _line(n, ok, text)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1():
    _record(1, criterion_1())


def test_criterion_2():
    _record(2, criterion_2())


def test_criterion_3():
    _record(3, criterion_3())


def test_criterion_4():
    _record(4, criterion_4())


def test_criterion_5():
    _record(5, criterion_5())


def test_criterion_6():
    _record(6, criterion_6())


def test_criterion_7():
    _record(7, criterion_7())


def test_criterion_8(tmp_path):
    _record(8, criterion_8(tmp_path))


if __name__ == "__main__":
    import sys
    import tempfile

    failed = 0
    for n, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7), 1):
        ok, text = fn()
        failed += not ok
        print(_line(n, ok, text), flush=True)
    with tempfile.TemporaryDirectory() as d:
        ok, text = criterion_8(d)
    failed += not ok
    print(_line(8, ok, text))
    sys.exit(1 if failed else 0)
