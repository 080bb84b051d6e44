"""Command-line interface.

Exit codes: 0 success, 1 tolerance failure, 2 invalid configuration or
arguments, 3 integration stopped by StepCollapse or the r_min event (the event
is written to stderr as JSON).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from . import conserved, maps, oracle, spectra, wavefn
from .config import ConfigError, RunConfig, json_schema, load_config
from .dynamics import integrate
from .errors import DampmapError, EventHit, StepCollapse
from .model import Frame, State, derive_constants
from .pipelines import PIPELINES, SOURCE_FRAME, run_pipeline

EXIT_OK, EXIT_TOL, EXIT_CONFIG, EXIT_EVENT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- output helpers ----------------------------------------------------------


def _num(x) -> str:
    return repr(float(x))


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_atomic(path: Optional[str], text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; stdout when path is None or '-'."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _span(arg: Optional[str], cfg: RunConfig):
    if arg is None:
        return tuple(cfg.span)
    try:
        a, b = (float(x) for x in arg.split(","))
    except ValueError:
        raise UsageError(f"--span must be 'a,b', got {arg!r}") from None
    if not b > a:
        raise UsageError("--span must be increasing")
    return a, b


def _csv(header, rows, footer: dict) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_num(v) for v in row) for row in rows)
    for key in sorted(footer):
        lines.append(f"# {key}: {json.dumps(footer[key], sort_keys=True)}")
    return "\n".join(lines) + "\n"


# --- commands -------------------------------------------------------------------


def cmd_simulate(args, cfg: RunConfig) -> int:
    frame = Frame.from_slug(args.system)
    params = cfg.params.to_params()
    st = cfg.state
    state0 = State(st.q1, st.q2, st.v1, st.v2, st.s, frame)
    extra = {}
    if frame is Frame.SEXTIC_OSC and params.cal_E is None:
        # the state is read as a transformed-Kepler condition and mapped
        tk = State(st.q1, st.q2, st.v1, st.v2, st.s, Frame.TRANSFORMED_KEPLER)
        cal_e = conserved.cal_E(tk, params)
        params = params.replace(cal_E=cal_e)
        state0 = maps.levi_civita(tk, params, tau=st.s)
        extra["sextic_from_transformed_kepler"] = {"cal_E": cal_e, "U0": state0.as_array().tolist()}
    span = _span(args.span, cfg)
    icfg = cfg.integrator.to_config()
    traj = integrate(frame, params, state0, span, icfg)
    rows = np.column_stack([traj.s, traj.y, traj.diagnostics])
    footer = {"config": cfg.resolved(), "integrator": traj.stats, "system": frame.slug,
              "span": list(span), **extra}
    write_atomic(args.out, _csv(["s", "q1", "q2", "v1", "v2", "conserved1", "conserved2"], rows, footer))
    return EXIT_OK


def cmd_mapcheck(args, cfg: RunConfig) -> int:
    params = cfg.params.to_params()
    st = cfg.state
    state0 = State(st.q1, st.q2, st.v1, st.v2, st.s, SOURCE_FRAME[args.pipeline])
    report = run_pipeline(args.pipeline, params, state0, _span(args.span, cfg),
                          cfg.integrator.to_config(), args.tol)
    out = report.to_dict()
    out["config"] = cfg.resolved()
    write_atomic(args.out, _dumps(out))
    return EXIT_OK if report.passed else EXIT_TOL


def cmd_spectrum(args, cfg: RunConfig) -> int:
    params = cfg.params.to_params()
    if args.side == "mapped-hatom":
        params = params.replace(c=spectra.QUANTUM_C)
    table = spectra.spectrum_table(args.side, params, args.nmax, args.lmax, args.method,
                                   omega0=cfg.quantum.omega0)
    table["config"] = cfg.resolved()
    write_atomic(args.out, _dumps(table))
    return EXIT_OK


def _oracle_me(args, cfg):
    params = cfg.params.to_params()
    rec = spectra.reconciliation_table(params, cfg.quantum.omega0, nmax=args.nmax, lmax=args.lmax)
    out = rec.to_dict()
    ok = out["max_asymmetry"] <= 1e-12 and out["max_out_of_band"] <= 1e-12
    return out, ok


def _oracle_diag(args, cfg):
    params = cfg.params.to_params()
    omega = cfg.quantum.omega0 if args.potential in ("harmonic", "sextic-osc") else None
    pot = oracle.PotentialSpec.from_params(args.potential, params, omega)
    res = oracle.grid_diag(pot, args.l, params.lam, n_levels=args.levels)
    return res.to_dict(), True


def _oracle_residual(args, cfg):
    params = cfg.params.to_params()
    if args.side == "oscillator":
        alpha = params.m * cfg.quantum.omega0 / params.hbar
        r = np.linspace(0.0, 14.0 / np.sqrt(alpha), 7001)
        psi = wavefn.psi0_osc(args.n, args.l, alpha, r)
        pot = oracle.PotentialSpec.from_params("harmonic", params, cfg.quantum.omega0)
        energy = spectra.osc_sextic_E0(args.n, args.l, cfg.quantum.omega0, params.hbar)
    else:
        beta = spectra.hatom_beta(args.n, args.l, params)
        r = np.linspace(0.0, 60.0 / beta, 120001)
        psi = wavefn.psi_hatom(args.n, args.l, beta, r)
        pot = oracle.PotentialSpec.from_params("kepler", params)
        energy = spectra.hatom_like_E0(args.n, args.l, params.m, params.k, params.hbar)
    res = oracle.schrodinger_residual(psi, r, pot, energy, args.l)
    return {"side": args.side, "n": args.n, "l": args.l, "energy": energy, "residual": res,
            "tol": args.tol}, res < args.tol


def _oracle_canonical(args, cfg):
    params = cfg.params.to_params()
    st = cfg.state
    traj = integrate(Frame.DAMPED_KEPLER, params, State(st.q1, st.q2, st.v1, st.v2, st.s,
                                                         Frame.DAMPED_KEPLER),
                     _span(args.span, cfg), cfg.integrator.to_config())
    along = oracle.canonical_check(traj)
    rand = oracle.canonical_check(params=params, n_random=args.n_random, seed=args.seed)
    ok = along.max_violation < 1e-8 and rand.max_violation < 1e-12
    return {"trajectory": along.to_dict(), "random": rand.to_dict(), "max_violation":
            max(along.max_violation, rand.max_violation)}, ok


def _oracle_chainrule(args, cfg):
    lam = cfg.params.lam if args.lam is None else args.lam
    rep = oracle.chainrule_check(args.function, lam)
    return rep.to_dict(), rep.weighted_relation_err < 1e-10


_ORACLES = {"me": _oracle_me, "diag": _oracle_diag, "residual": _oracle_residual,
            "canonical": _oracle_canonical, "chainrule": _oracle_chainrule}


def cmd_oracle(args, cfg: RunConfig) -> int:
    out, ok = _ORACLES[args.check](args, cfg)
    out = {"check": args.check, "passed": bool(ok), "result": out, "config": cfg.resolved()}
    write_atomic(args.out, _dumps(out))
    return EXIT_OK if ok else EXIT_TOL


def _grid(arg: str):
    try:
        r0, r1, n, t0, t1, m = arg.split(",")
        return float(r0), float(r1), int(n), float(t0), float(t1), int(m)
    except ValueError:
        raise UsageError(f"--grid must be r0,r1,N,t0,t1,M, got {arg!r}") from None


def cmd_wavefn(args, cfg: RunConfig) -> int:
    params = cfg.params.to_params()
    r0, r1, n, t0, t1, m = _grid(args.grid)
    if n < 1 or m < 1 or r0 < 0 or r1 < r0:
        raise UsageError("--grid needs 0 <= r0 <= r1 and N, M >= 1")
    if args.side == "hatom" and r0 > 0:
        radial = np.geomspace(r0, r1, n)
    else:
        radial = np.linspace(r0, r1, n)
    angle = np.linspace(t0, t1, m)
    rr, tt = np.meshgrid(radial, angle, indexing="ij")
    variant = "normalized" if args.variant == "normalized" else "raw"
    if args.side == "hatom":
        beta = spectra.hatom_beta(args.n, args.l, params)
        vals = wavefn.psi_hatom(args.n, args.l, beta, rr, tt, variant)
    else:
        if args.side == "oscillator":
            alpha = params.m * cfg.quantum.omega0 / params.hbar
        else:
            alpha = derive_constants(params.replace(cal_E=None)).alpha
        vals = wavefn.psi0_osc(args.n, args.l, alpha, rr, tt, variant)
    if args.variant == "gauge":
        vals = wavefn.gauge_restore(vals, rr, params.lam, params.m, params.hbar)
    rows = np.column_stack([rr.ravel(), tt.ravel(), vals.real.ravel(), vals.imag.ravel()])
    footer = {"config": cfg.resolved(), "wavefn": {"side": args.side, "n": args.n, "l": args.l,
                                                   "variant": args.variant, "grid": args.grid}}
    write_atomic(args.out, _csv(["coord1", "coord2", "re", "im"], rows, footer))
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dampmap", description="Damped central-force equivalence toolkit")
    p.add_argument("--print-config", action="store_true", help="print the default configuration and exit")
    p.add_argument("--print-schema", action="store_true", help="print the configuration JSON schema and exit")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="JSON configuration file (defaults used when omitted)")
        sp.add_argument("--out", help="output path (stdout when omitted)")

    s = sub.add_parser("simulate", help="integrate one system and write a CSV trajectory")
    s.add_argument("--system", required=True, choices=[f.slug for f in Frame])
    s.add_argument("--span", help="a,b (defaults to config span)")
    common(s)

    s = sub.add_parser("mapcheck", help="run a pipeline equivalence check")
    s.add_argument("--pipeline", required=True, choices=PIPELINES)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--span", help="a,b (defaults to config span)")
    common(s)

    s = sub.add_parser("spectrum", help="spectrum table as JSON")
    s.add_argument("--side", required=True, choices=("oscillator", "mapped-hatom", "shifted-ho"))
    s.add_argument("--nmax", type=int, default=2)
    s.add_argument("--lmax", type=int, default=2)
    s.add_argument("--method", choices=spectra.METHODS, default="both")
    common(s)

    s = sub.add_parser("oracle", help="run an independent check")
    s.add_argument("--check", required=True, choices=sorted(_ORACLES))
    s.add_argument("--nmax", type=int, default=6, help="me: largest n_rho")
    s.add_argument("--lmax", type=int, default=4, help="me: largest |l|")
    s.add_argument("--potential", choices=oracle.POTENTIALS, default="harmonic", help="diag")
    s.add_argument("--l", type=int, default=0, help="diag/residual: angular number")
    s.add_argument("--n", type=int, default=0, help="residual: radial number")
    s.add_argument("--levels", type=int, default=3, help="diag: number of levels")
    s.add_argument("--side", choices=("oscillator", "hatom"), default="oscillator", help="residual")
    s.add_argument("--tol", type=float, default=1e-6, help="residual tolerance")
    s.add_argument("--span", help="canonical: a,b")
    s.add_argument("--n-random", type=int, default=100, help="canonical: random points")
    s.add_argument("--seed", type=int, default=0, help="canonical: seed for random points")
    s.add_argument("--function", choices=sorted(oracle.SAMPLE_FUNCTIONS), default="moving-gaussian")
    s.add_argument("--lam", type=float, help="chainrule: damping (defaults to config)")
    common(s)

    s = sub.add_parser("wavefn", help="eigenfunction values on a polar grid as CSV")
    s.add_argument("--side", required=True, choices=("oscillator", "hatom", "shifted-ho"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--grid", default="0,6,61,0,3.141592653589793,5", help="r0,r1,N,t0,t1,M")
    s.add_argument("--variant", choices=("raw", "normalized", "gauge"), default="raw")
    common(s)
    return p


_COMMANDS = {"simulate": cmd_simulate, "mapcheck": cmd_mapcheck, "spectrum": cmd_spectrum,
             "oracle": cmd_oracle, "wavefn": cmd_wavefn}


def _err(msg: str):
    sys.stderr.write(msg.rstrip("\n") + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.print_config:
        sys.stdout.write(_dumps(RunConfig().resolved()))
        return EXIT_OK
    if args.print_schema:
        sys.stdout.write(_dumps(json_schema()))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except UsageError as exc:
        _err(f"usage error: {exc}")
        return EXIT_CONFIG
    except (EventHit, StepCollapse) as exc:
        _err(json.dumps(exc.to_dict(), sort_keys=True))
        return EXIT_EVENT
    except DampmapError as exc:
        _err(f"error: {type(exc).__name__}: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
