"""Command-line driver: certification runs and the non-rigorous diagnostics.

Subcommands
-----------
prove      run the full certification pipeline, write the certificate
recheck    re-validate every inequality record of a stored certificate
simulate   raw orbits at a chosen precision (CSV: j, theta, x, dist_order1)
lyapunov   Lyapunov sums, exponent and maximal oscillation (CSV: j, S_j)
predict    departure/landing angles and oscillation prediction (CSV: theta, h)
curve      invariant-curve approximation and residuals (CSV per theta)

Configuration is a flat ``key = value`` text file (--config); every key is
also a CLI flag, and flags win.  The default output directory is taken from
CURVECERT_OUTDIR, falling back to the working directory.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import fields

from .certificate import Certificate, recheck as recheck_cert
from .errors import ConfigError, DomainViolation, RigorError
from .logistic import (
    DrivenLogisticParams,
    distance_profile,
    curve_approx,
    curve_g1,
    invariance_residual,
    lyapunov_sums,
    oscillation_prediction,
    predict_departure_landing,
    simulate_attractor,
    suggested_precision,
)
from .strips import (
    CurveGuess,
    ProofConfig,
    StripGeometry,
    build_initial_strips,
    run_full_proof,
    strip_csv_rows,
)

_CONFIG_KEYS = {
    "a0": str,
    "eps": str,
    "N": int,
    "precision": int,
    "degree": int,
    "subdivisions": int,
    "strip_count": int,
    "strip_offset": int,
    "chain_sources": int,
    "chain_steps": int,
    "half_height_cap": str,
    "half_height_frac": str,
    "ride_fraction": str,
    "chain_cap_max": str,
    "v_fraction": str,
    "v_cap": str,
    "beta": str,
    "outdir": str,
}


def _load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            k, v = (part.strip() for part in line.split("=", 1))
            if k not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = _CONFIG_KEYS[k](v)
    return out


def _merged(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _outdir(cfg) -> str:
    out = cfg.get("outdir") or os.environ.get("CURVECERT_OUTDIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _params(cfg) -> DrivenLogisticParams:
    try:
        return DrivenLogisticParams(
            a0=cfg.get("a0", "1.31"),
            eps=cfg.get("eps", "0.3"),
            N=cfg.get("N", 200),
            precision=cfg.get("precision", 128),
        )
    except DomainViolation as exc:
        raise ConfigError(str(exc)) from exc


def _proof_config(cfg) -> ProofConfig:
    kwargs = {}
    for f in fields(ProofConfig):
        if f.name in cfg:
            kwargs[f.name] = cfg[f.name]
    pc = ProofConfig(**kwargs)
    if pc.degree < 9:
        # an honest degree-n method carries no higher-order point terms
        pc = ProofConfig(**{**kwargs, "taylor_data_order": pc.degree})
    if pc.precision < 24:
        raise ConfigError("precision too low")
    if not (1 <= pc.degree <= 9):
        raise ConfigError("edge degree must be in 1..9")
    if pc.subdivisions < 1 or pc.strip_count < 8 or pc.chain_sources < 0:
        raise ConfigError("invalid combinatorial configuration")
    return pc


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_prove(args) -> int:
    cfg = _merged(args)
    out = _outdir(cfg)
    if args.recheck:
        return cmd_recheck(args)
    try:
        params = _params(cfg)
        pconf = _proof_config(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    cert = run_full_proof(params, pconf)
    path = os.path.join(out, "certificate.txt")
    with open(path, "w") as fh:
        fh.write(cert.to_text())
    if args.emit_strips:
        geo = StripGeometry.create(params, pconf)
        guess = CurveGuess(params, extra_bits=pconf.guess_extra_bits)
        rows = []
        for k, s in enumerate(build_initial_strips(guess, geo), start=1):
            rows.extend(strip_csv_rows(f"N{k}", s))
        spath = os.path.join(out, "strips.csv")
        _write_csv(spath, ["strip", "theta", "p_d", "p_u"], rows)
        print(f"strip edges: {spath}")
    n_fail = len(cert.failing_records())
    print(
        f"proof verdict: {'PASS' if cert.verdict else 'FAIL'} "
        f"({len(cert.records)} records, {n_fail} failing, {cert.wall_clock:.1f}s)"
    )
    if cert.config.get("min_chain_gap"):
        print(
            f"minimal chain strip gap: {cert.config['min_chain_gap']} "
            f"at {cert.config['min_chain_gap_at']}"
        )
    if not cert.verdict and cert.failure:
        print(f"first failure: {cert.failure}")
    print(f"certificate: {path}")
    return 0 if cert.verdict else 2


def cmd_recheck(args) -> int:
    path = args.recheck if isinstance(args.recheck, str) else args.certificate
    try:
        with open(path) as fh:
            cert = Certificate.from_text(fh.read())
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    ok, notes = recheck_cert(cert)
    print(f"recheck: {'AGREES' if ok else 'MISMATCH'} ({len(cert.records)} records)")
    for note in notes[:10]:
        print(f"  {note}")
    if not ok:
        return 2
    return 0 if cert.verdict else 2


def cmd_simulate(args) -> int:
    cfg = _merged(args)
    out = _outdir(cfg)
    try:
        params = _params(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    precision = args.sim_precision or cfg.get("precision", 128)
    series = simulate_attractor(params, precision, args.transient, args.iters)
    alpha = float(params.alpha)
    a0 = float(params.a0_v)
    eps = float(params.eps_v)
    rows = []
    for j, (tf, xf) in enumerate(series):
        a = a0 + eps * math.sin(2 * math.pi * tf)
        root = math.sqrt(4 * a - 3)
        g0 = (1 - root) / (2 * a)
        g1 = (3 - 2 * a - (8 * a - 9) / root) / (2 * a * a * (4 * a - 3))
        g1 *= 2 * math.pi * eps * math.cos(2 * math.pi * tf)
        rows.append((j, tf, xf, abs(xf - (g0 + alpha * g1))))
    path = os.path.join(out, f"attractor_p{precision}.csv")
    _write_csv(path, ["iterate", "theta", "x", "dist_order1"], rows)
    prof = distance_profile(series, a0, eps, alpha)
    print(
        f"simulated {len(series)} iterates at {precision} bits; "
        f"max distance to order-1 curve: {max(p for p in prof):.3e}"
    )
    print(f"csv: {path}")
    return 0


def cmd_lyapunov(args) -> int:
    cfg = _merged(args)
    out = _outdir(cfg)
    try:
        params = _params(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    if "precision" not in cfg:
        # the oscillation dips below 128-bit resolution for large N
        need = suggested_precision(params.N, params.a0, params.eps)
        if need > params.precision:
            params = DrivenLogisticParams(params.a0, params.eps, params.N, need)
    run = lyapunov_sums(
        params,
        seed=(args.seed_theta, args.seed_x),
        transient=args.transient,
        iters=args.iters,
        series_stride=max(1, args.iters // 2000),
    )
    pred = oscillation_prediction(float(params.a0_v), float(params.eps_v), float(params.alpha))
    path = os.path.join(out, f"lyapunov_N{params.N}.csv")
    _write_csv(path, ["iterate", "S"], run.series)
    print(
        f"N={params.N}: Lambda = {run.lam:.8f}  OS = {run.os_stat:.3f} "
        f"(prediction {pred.value:.3f})"
    )
    print(f"csv: {path}")
    return 0


def cmd_predict(args) -> int:
    cfg = _merged(args)
    out = _outdir(cfg)
    try:
        params = _params(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    a0 = float(params.a0_v)
    eps = float(params.eps_v)
    alpha = float(params.alpha)
    pred = oscillation_prediction(a0, eps, alpha)
    theta_d, theta_l = predict_departure_landing(args.d, args.p, alpha, a0, eps)
    rows = []
    for i in range(args.grid):
        th = pred.theta2 - 1.0 + (i / (args.grid - 1)) * (pred.theta1 - pred.theta2 + 1)
        h = 0.5 * math.log(4 * (a0 - 1 + eps * math.sin(2 * math.pi * th)))
        rows.append((th, h))
    path = os.path.join(out, "lyapunov_integrand.csv")
    _write_csv(path, ["theta", "h"], rows)
    print(
        f"h zeros: theta1 = {pred.theta1:.6f}, theta2 = {pred.theta2:.6f}; "
        f"oscillation prediction {pred.value:.6f} (= {pred.lobe_integral:.9f}/alpha)"
    )
    print(f"departure theta_d = {theta_d:.4f}, landing theta_l = {theta_l:.4f}")
    print(f"csv: {path}")
    return 0


def cmd_curve(args) -> int:
    cfg = _merged(args)
    out = _outdir(cfg)
    try:
        params = _params(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    rows = []
    sup0 = 0.0
    sup1 = 0.0
    for i in range(args.grid):
        th = params.mp(i) / args.grid
        g0 = curve_approx(params, th, 0)
        g1v = curve_g1(params, th)
        r0 = invariance_residual(params, lambda t: curve_approx(params, t, 0), th)
        r1 = invariance_residual(params, lambda t: curve_approx(params, t, 1), th)
        sup0 = max(sup0, abs(float(r0)))
        sup1 = max(sup1, abs(float(r1)))
        rows.append((float(th), float(g0), float(g1v), float(r0), float(r1)))
    path = os.path.join(out, f"curve_N{params.N}.csv")
    _write_csv(path, ["theta", "G0", "G1", "residual_order0", "residual_order1"], rows)
    print(f"sup residual: order0 = {sup0:.3e}, order1 = {sup1:.3e}")
    print(f"csv: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="curvecert",
        description="Certified existence of the invariant curve of the driven "
        "logistic map, plus its non-rigorous diagnostics.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--outdir", help="output directory (or CURVECERT_OUTDIR)")
        p.add_argument("--a0", help="mean map parameter (default 1.31)")
        p.add_argument("--eps", help="forcing amplitude (default 0.3)")
        p.add_argument("--N", type=int, help="alpha = golden_mean / N (default 200)")
        p.add_argument("--precision", type=int, help="working precision in bits (default 128)")

    p = sub.add_parser("prove", help="run the full certification pipeline")
    add_common(p)
    p.add_argument("--degree", type=int, help="edge polynomial degree 1..9 (default 9)")
    p.add_argument("--subdivisions", type=int, help="covering-check subdivisions (default 10)")
    p.add_argument("--strip-count", type=int, dest="strip_count")
    p.add_argument("--strip-offset", type=int, dest="strip_offset")
    p.add_argument("--chain-sources", type=int, dest="chain_sources")
    p.add_argument("--chain-steps", type=int, dest="chain_steps")
    p.add_argument("--half-height-cap", dest="half_height_cap")
    p.add_argument("--half-height-frac", dest="half_height_frac")
    p.add_argument("--ride-fraction", dest="ride_fraction")
    p.add_argument("--chain-cap-max", dest="chain_cap_max")
    p.add_argument("--v-fraction", dest="v_fraction")
    p.add_argument("--v-cap", dest="v_cap")
    p.add_argument("--beta", help="central rescaling for the cone bound matrices")
    p.add_argument("--emit-strips", action="store_true", dest="emit_strips",
                   help="also dump sampled strip edge polynomials to strips.csv")
    p.add_argument("--recheck", metavar="CERT", help="re-validate a stored certificate instead")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("recheck", help="re-validate a stored certificate")
    p.add_argument("certificate", help="path to certificate.txt")
    p.set_defaults(func=cmd_recheck, recheck=None)

    p = sub.add_parser("simulate", help="raw attractor orbit at a chosen precision")
    add_common(p)
    p.add_argument("--sim-precision", type=int, dest="sim_precision",
                   help="orbit precision in bits (defaults to --precision)")
    p.add_argument("--transient", type=int, default=100_000)
    p.add_argument("--iters", type=int, default=100_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lyapunov", help="Lyapunov sums, exponent, oscillation")
    add_common(p)
    p.add_argument("--transient", type=int, default=100_000)
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--seed-theta", type=float, default=0.0, dest="seed_theta")
    p.add_argument("--seed-x", type=float, default=0.5, dest="seed_x")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("predict", help="departure/landing angles, oscillation prediction")
    add_common(p)
    p.add_argument("--d", type=int, default=16, help="working decimal digits (default 16)")
    p.add_argument("--p", type=int, default=4, help="visible pixel digits (default 4)")
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("curve", help="perturbative curve approximation and residuals")
    add_common(p)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(func=cmd_curve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except RigorError as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
