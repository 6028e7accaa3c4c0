"""Command-line interface: ``solve``, ``verify`` and ``family``.

Exit codes
----------
  0  run reached t_max / every asserted check passed
  1  usage or configuration error
  2  orbit collapse (``solve``)
  3  any other early termination (``solve``)
  4  an asserted check failed (``verify``, ``family``)
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .geometry import curvature_limit_q, geometry_at
from .integrator import TerminationKind, Trajectory, integrate, sample_grid
from .invariants import (
    ASYMPTOTIC_MIN_T,
    check_propositions,
    conserved_at,
    fit_asymptotics,
)
from .phase import integrate_phase, profile_r, to_phase
from .seed import Q_CRITICAL, SQRT2, SolitonParams, compute_seed, seed_residual

log = logging.getLogger("grs_soliton")

CSV_COLUMNS = (
    "t", "phi", "dphi", "f", "df", "k_rad", "k_tan", "h", "normH2",
    "h_density", "q1", "q2", "drift2", "x", "y", "z",
)
EXIT_OK, EXIT_USAGE, EXIT_COLLAPSE, EXIT_OTHER, EXIT_CHECKS = 0, 1, 2, 3, 4
THREADS_ENV = "GRS_SOLITON_THREADS"

# oracle-check tolerances
CURVATURE_TOL = 1e-8
CURVATURE_PAIR_TOL = 1e-10
SEED_RESIDUAL_TOL = 1e-8
DRIFT_PER_TOL = 1e4  # conservation drift allowed per unit of integrator tolerance
BRF_TOL = 1e-8
BRF_COLLAPSE_TOL = 1e-6
BRF_WINDOW = 3.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Settings for one command: the soliton parameters plus I/O choices."""

    q: float | None = None
    ell: float | None = None
    k: float = SQRT2
    t_max: float = 100.0
    eps: float = 1e-3
    order: int = 24
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    samples: str = "steps"
    out: str | None = None
    observe_only: bool = False
    oracle: str | None = None
    verbose: int = 0
    ells: list[float] = field(default_factory=list)

    def params(self) -> SolitonParams:
        return SolitonParams(
            q=self.q,
            ell=self.ell,
            k=self.k,
            series_order=self.order,
            eps_handoff=self.eps,
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            t_max=self.t_max,
        )


def parse_k(text) -> float:
    s = str(text).strip().lower()
    if s in ("0", "0.0"):
        return 0.0
    if s in ("sqrt2", "sqrt(2)"):
        return SQRT2
    try:
        v = float(s)
    except ValueError:
        raise UsageError(f"--k must be 0 or sqrt2, got {text!r}") from None
    if math.isclose(v, SQRT2, rel_tol=1e-12):
        return SQRT2
    raise UsageError(f"--k must be 0 or sqrt2, got {text!r}")


def parse_samples(text: str, eps: float, t_max: float):
    """``steps`` (every accepted step), ``lin:N`` or ``log:N`` on ``[eps, t_max]``."""
    if text == "steps":
        return None
    kind, _, n = text.partition(":")
    if kind not in ("lin", "log") or not n.isdigit() or int(n) < 2:
        raise UsageError(f"bad sample grid {text!r}; use steps, lin:N or log:N (N >= 2)")
    grid = sample_grid(eps, t_max, int(n), kind)
    grid[0], grid[-1] = eps, t_max
    return grid


def parse_ells(items) -> list[float]:
    out = []
    for item in items:
        for tok in str(item).replace(",", " ").split():
            if ":" in tok:
                a, b, n = tok.split(":")
                out.extend(np.linspace(float(a), float(b), int(n)).tolist())
            else:
                out.append(float(tok))
    if not out:
        raise UsageError("the ell list is empty")
    if not all(math.isfinite(v) for v in out):
        raise UsageError("every ell must be finite")
    return out


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def load_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys are allowed."""
    names = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not sep or key not in names:
            raise UsageError(f"{path}:{lineno}: cannot parse {raw.strip()!r}")
        try:
            if key == "k":
                out[key] = parse_k(value)
            elif key == "observe_only":
                out[key] = _BOOL[value.lower()]
            elif key == "ells":
                out[key] = parse_ells([value])
            elif key == "order" or key == "verbose":
                out[key] = int(value)
            elif key in ("samples", "out", "oracle"):
                out[key] = value
            else:
                out[key] = float(value)
        except (ValueError, KeyError):
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    if "q" in out and "ell" in out:
        raise UsageError(f"{path}: q and ell are mutually exclusive")
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    cli = {k: v for k, v in vars(args).items() if v is not None and k in {f.name for f in fields(RunConfig)}}
    if "q" in cli or "ell" in cli:
        values.pop("q", None)
        values.pop("ell", None)
    if cli.get("observe_only") is False:
        cli.pop("observe_only")
    if cli.get("verbose") == 0:
        cli.pop("verbose")
    if "k" in cli:
        cli["k"] = parse_k(cli["k"])
    if "ells" in cli:
        cli["ells"] = parse_ells(cli["ells"])
    values.update(cli)
    return RunConfig(**values)


# -- tables -------------------------------------------------------------------


def trajectory_table(traj: Trajectory) -> np.ndarray:
    st = traj.state
    p = traj.params
    geo = geometry_at(st, p.k)
    cons = conserved_at(st, p)
    ph = to_phase(st)
    cols = (
        traj.t, st.phi, st.dphi, st.f, st.df, geo.k_rad, geo.k_tan, geo.h, geo.normH2,
        geo.h_density, cons.q1, cons.q2, cons.drift2, ph.x, ph.y, ph.z,
    )
    return np.column_stack([np.broadcast_to(np.asarray(c, dtype=float), traj.t.shape) for c in cols])


def format_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in table:
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        path = Path(out)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _exit_for(traj: Trajectory) -> int:
    kind = traj.termination.kind
    if kind is TerminationKind.REACHED_T_MAX:
        return EXIT_OK
    if kind is TerminationKind.ORBIT_COLLAPSE:
        return EXIT_COLLAPSE
    return EXIT_OTHER


def _check(name, value, tol, asserted=True):
    value = float(value)
    return {"name": name, "value": value, "tol": tol, "pass": bool(value <= tol), "asserted": asserted}


# -- commands -----------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    params = cfg.params()
    samples = parse_samples(cfg.samples, params.eps_handoff, params.t_max)
    traj = integrate(params, samples=samples, keep_dense=False)
    _write(format_csv(trajectory_table(traj)), cfg.out)
    drift = float(np.max(conserved_at(traj.state, params).drift2))
    summary = (
        f"q={params.q:.17g} k={params.k:.17g} termination={traj.termination} "
        f"samples={traj.t.size} steps={traj.n_steps} max_drift2={drift:.3e}"
    )
    print(summary, file=sys.stderr if cfg.out in (None, "-") else sys.stdout)
    return _exit_for(traj)


def _seed_checks(params: SolitonParams, seed, traj: Trajectory) -> list[dict]:
    lim_rad, lim_tan = curvature_limit_q(seed, params.eps_handoff)
    r_phi, r_f = seed_residual(seed, params.eps_handoff)
    drift = float(np.max(conserved_at(traj.state, params).drift2))
    return [
        _check("curvature_limit_rad_vs_q", abs(lim_rad - params.q), CURVATURE_TOL),
        _check("curvature_limit_tan_vs_q", abs(lim_tan - params.q), CURVATURE_TOL),
        _check("curvature_limits_agree", abs(lim_rad - lim_tan), CURVATURE_PAIR_TOL),
        _check("seed_residual_at_eps", max(abs(r_phi), abs(r_f)), SEED_RESIDUAL_TOL),
        _check("conservation_drift", drift, DRIFT_PER_TOL * max(params.abs_tol, params.rel_tol)),
    ]


def brf_oracle(cfg: RunConfig) -> tuple[dict, list[dict]]:
    """Seed, integrator, geometry and phase run against ``phi = sqrt2 sin(t/sqrt2)``, ``f = 0``."""
    params = SolitonParams(
        q=-0.5, k=SQRT2, series_order=cfg.order, eps_handoff=cfg.eps,
        abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol, t_max=max(cfg.t_max, 5.0),
    )
    seed = compute_seed(params)
    exact = np.zeros(params.series_order + 1)
    for n in range(1, params.series_order + 1, 2):
        exact[n] = (-1) ** (n // 2) / (math.factorial(n) * 2.0 ** ((n - 1) / 2))
    seed_err = max(
        float(np.max(np.abs(seed.phi_series.coeffs[: exact.size] - exact))),
        float(np.max(np.abs(seed.f_series.coeffs))),
    )

    traj = integrate(params, seed)
    window = traj.t <= BRF_WINDOW
    t = traj.t[window]
    u = t / SQRT2
    phi_err = float(np.max(np.abs(traj.phi[window] - SQRT2 * np.sin(u))))
    f_err = float(np.max(np.abs(traj.f[window])))
    geo = geometry_at(traj.state, params.k)
    curv_err = float(np.max(np.abs(np.concatenate([geo.k_rad[window], geo.k_tan[window]]) - 0.5)))
    collapse_err = (
        abs(traj.termination.t - math.pi * SQRT2)
        if traj.termination.kind is TerminationKind.ORBIT_COLLAPSE
        else math.inf
    )

    short = params.replace(t_max=BRF_WINDOW)
    ph = integrate_phase(short, seed, r_max=float(profile_r(integrate(short, seed))[-1]))
    # dr = du / sin(u) with r ~ log t at the origin: u(r) = 2 arctan(e^r / (2 sqrt2))
    st = ph.state
    uu = 2.0 * np.arctan(np.exp(ph.r) / (2.0 * SQRT2))
    phase_err = float(
        np.max(np.abs(np.column_stack([st.x - np.cos(uu), st.y - 2.0 * np.cos(uu), st.z - SQRT2 * np.sin(uu)])))
    )

    # the pole is a singular point of the conserved quantity; monitor it on the window
    conservation = _conservation(traj, BRF_WINDOW)
    checks = [
        _check("brf_seed_coefficients", seed_err, 1e-12),
        _check("brf_phi", phi_err, BRF_TOL),
        _check("brf_f", f_err, BRF_TOL),
        _check("brf_collapse_time", collapse_err, BRF_COLLAPSE_TOL),
        _check("brf_curvature_half", curv_err, 1e-6),
        _check("brf_phase_closed_form", phase_err, BRF_TOL),
        _check("brf_conservation", conservation["max_drift2"], BRF_TOL),
    ]
    report = {
        "params": _params_dict(params),
        "termination": str(traj.termination),
        "conservation": conservation,
        "propositions": [c.as_dict() for c in check_propositions(traj, strict=False).checks],
        "asymptotics": None,
        "oracle_checks": checks,
    }
    return report, checks


def _params_dict(params: SolitonParams) -> dict:
    d = asdict(params)
    d["conserved_target"] = params.conserved_target
    return d


def _conservation(traj: Trajectory, upto: float | None = None) -> dict:
    c = conserved_at(traj.state, traj.params)
    keep = slice(None) if upto is None else traj.t <= upto
    return {"max_drift1": float(np.max(c.drift1[keep])), "max_drift2": float(np.max(c.drift2[keep]))}


def verify_report(cfg: RunConfig) -> tuple[dict, bool]:
    """JSON-ready verification report and whether every asserted check passed."""
    if cfg.oracle == "brf":
        report, checks = brf_oracle(cfg)
        return report, all(c["pass"] for c in checks)
    if cfg.oracle is not None:
        raise UsageError(f"unknown oracle {cfg.oracle!r}")

    params = cfg.params()
    if not cfg.observe_only and not params.in_theorem_regime:
        raise UsageError(
            f"q={params.q:.6g} with k={params.k:.6g} is outside q < {Q_CRITICAL:.6g}, k = sqrt2; "
            "pass --observe-only to report without assertions"
        )
    seed = compute_seed(params)
    samples = parse_samples(cfg.samples, params.eps_handoff, params.t_max)
    traj = integrate(params, seed, samples=samples)
    props = check_propositions(traj, strict=False)
    if cfg.observe_only:
        for c in props.checks:
            c.asserted = False
        props.asserted = False
    asymptotics = None
    if traj.t[-1] >= ASYMPTOTIC_MIN_T:
        fit = fit_asymptotics(traj)
        asymptotics = {
            "R_phi_err": fit.R_phi_err,
            "R_f_err": fit.R_f_err,
            "fprime_limit": fit.fprime_limit,
            "h_decay_slope": fit.h_decay_slope,
            "R_phi_quartic_err": fit.R_phi_quartic_err,
            "fprime_err": fit.fprime_err,
            "window": list(fit.window),
        }
    checks = _seed_checks(params, seed, traj)
    if cfg.observe_only:
        for c in checks:
            c["asserted"] = False
    report = {
        "params": _params_dict(params),
        "termination": str(traj.termination),
        "conservation": _conservation(traj),
        "propositions": [c.as_dict() for c in props.checks],
        "asymptotics": asymptotics,
        "oracle_checks": checks,
        "notes": props.notes,
    }
    ok = all(c.passed for c in props.checks if c.asserted) and all(c["pass"] for c in checks if c["asserted"])
    return report, ok


def cmd_verify(cfg: RunConfig) -> int:
    report, ok = verify_report(cfg)
    _write(json.dumps(report, indent=2, default=_json_default) + "\n", cfg.out)
    if not ok:
        bad = [p for p in report["propositions"] if p["asserted"] and not p["pass"]]
        bad += [c for c in report["oracle_checks"] if c["asserted"] and not c["pass"]]
        for rec in bad:
            print(f"check failed: {json.dumps(rec, default=_json_default)}", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _member_name(ell: float) -> str:
    return f"member_ell{ell:+.6g}.csv"


def run_member(cfg: RunConfig, ell: float, out_dir: str) -> dict:
    """One family member: solve (CSV) plus verify; failures are recorded, not raised."""
    member = RunConfig(**{**asdict(cfg), "ell": ell, "q": None, "out": None})
    rec = {"ell": ell}
    try:
        params = member.params()
        seed = compute_seed(params)
        samples = parse_samples(member.samples, params.eps_handoff, params.t_max)
        traj = integrate(params, seed, samples=samples, keep_dense=False)
        csv_path = Path(out_dir) / _member_name(ell)
        csv_path.write_text(format_csv(trajectory_table(traj)))
        props = check_propositions(traj, strict=False)
        lim_rad, lim_tan = curvature_limit_q(seed, params.eps_handoff)
        rec.update(
            q=params.q,
            lim_neg_k_tan=lim_tan,
            lim_neg_k_rad=lim_rad,
            ddf0=seed.taylor_derivative("f", 2),
            termination=str(traj.termination),
            csv=csv_path.name,
            conservation=_conservation(traj),
            propositions_passed=bool(all(c.passed for c in props.checks if c.asserted)),
            asserted=props.asserted,
            failures=[c.as_dict() for c in props.failures()],
            error=None,
        )
    except Exception as exc:  # noqa: BLE001 - recorded per member, the sweep continues
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def worker_count(n_tasks: int) -> int:
    cores = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cores = max(1, min(cores, int(env))) if int(env) > 0 else cores
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return max(1, min(cores, n_tasks))


def fingerprint_table(members: list[dict]) -> dict:
    ok = [m for m in members if m.get("error") is None]
    identity = [
        {"ell": m["ell"], "err": abs(m["lim_neg_k_tan"] - m["q"]), "pass": abs(m["lim_neg_k_tan"] - m["q"]) <= CURVATURE_TOL}
        for m in ok
    ]
    fps = sorted(m["lim_neg_k_tan"] for m in ok)
    gaps = np.diff(fps) if len(fps) > 1 else np.array([])
    min_gap = float(np.min(gaps)) if gaps.size else None
    return {
        "columns": ["ell", "q", "lim_neg_k_tan", "ddf0"],
        "rows": [[m["ell"], m["q"], m["lim_neg_k_tan"], m["ddf0"]] for m in ok],
        "identity": identity,
        "distinct": bool(min_gap is None or min_gap > CURVATURE_TOL),
        "min_gap": min_gap,
    }


def cmd_family(cfg: RunConfig) -> int:
    if not cfg.ells:
        raise UsageError("family needs a non-empty --ells list")
    out_dir = Path(cfg.out or "family_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    n_workers = worker_count(len(cfg.ells))
    log.info("family: %d members on %d workers", len(cfg.ells), n_workers)
    if n_workers == 1:
        members = [run_member(cfg, ell, str(out_dir)) for ell in cfg.ells]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(run_member, cfg, ell, str(out_dir)) for ell in cfg.ells]
            members = [fut.result() for fut in futures]
    table = fingerprint_table(members)
    report = {"members": members, "fingerprints": table}
    (out_dir / "family.json").write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
    for m in members:
        status = m["error"] or m["termination"]
        print(f"ell={m['ell']:+.6g} {status}")
    ok = (
        all(m["error"] is None and m["propositions_passed"] for m in members)
        and all(r["pass"] for r in table["identity"])
        and table["distinct"]
    )
    return EXIT_OK if ok else EXIT_CHECKS


# -- argument parsing ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, with_member: bool = True):
    if with_member:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--q", type=float, help="phi'''(0), the family parameter")
        g.add_argument("--ell", type=float, help="family label, q = -35/12 - exp(-ell)")
    p.add_argument("--k", help="torsion constant: 0 or sqrt2 (default sqrt2)")
    p.add_argument("--t-max", dest="t_max", type=float, help="end of the run (default 100)")
    p.add_argument("--eps", type=float, help="series/integrator handoff point (default 1e-3)")
    p.add_argument("--order", type=int, help="series order (default 24)")
    p.add_argument("--abs-tol", dest="abs_tol", type=float, help="absolute tolerance (default 1e-10)")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, help="relative tolerance (default 1e-10)")
    p.add_argument("--samples", help="steps (default), lin:N or log:N")
    p.add_argument("--out", help="output path ('-' or omitted: stdout)")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grs-soliton", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="integrate one member and write the CSV trajectory")
    _add_common(p)

    p = sub.add_parser("verify", help="integrate one member and write the JSON verification report")
    _add_common(p)
    p.add_argument("--observe-only", dest="observe_only", action="store_true", default=None,
                   help="report every check without asserting it")
    p.add_argument("--oracle", choices=["brf"], help="run a closed-form oracle suite instead")

    p = sub.add_parser("family", help="sweep several members concurrently")
    _add_common(p, with_member=False)
    p.add_argument("--ells", nargs="+", help="ell values (space or comma separated, START:STOP:N for a range)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_family(cfg)
    except (UsageError, ValueError) as exc:
        print(f"grs-soliton: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
