"""``thermoplate`` command-line driver.

Exit codes: 0 ok, 1 check failure, 2 config error, 3 numerical failure.
Heavy modules are imported after argument parsing so ``--threads`` can
still cap the BLAS pools.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SERIES_COLUMNS = ("t", "E", "H", "J", "norm_v", "norm_theta", "norm_eta_M1", "grad_v_sq",
                  "dissipation_residual", "stat_residual", "dist_V0", "dist_u_V2")
DECOMP_COLUMNS = ("norm_zD_V0", "norm_zC_V0", "superposition_error")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermoplate", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, metavar="U64", help="override the config seed")
    common.add_argument("--threads", type=int, metavar="N", help="BLAS thread cap")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("simulate", "run and write series.csv + summary.json"),
                           ("decompose", "run z, z_D, z_C in lockstep"),
                           ("steady", "Newton search for equilibria"),
                           ("verify", "run the acceptance checks"),
                           ("rate", "rate-law and Lojasiewicz probe on one run"),
                           ("kernel-check", "validate the configured memory kernel")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        if name == "verify":
            p.add_argument("--only", nargs="+", metavar="ID", help="subset of check ids (C1..C14)")
    return ap


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _write_csv(path: Path, columns, data) -> None:
    import numpy as np
    arr = np.column_stack([np.asarray(c, dtype=float) for c in data])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in arr:
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def _series_columns(ser):
    return [ser.t, ser.E, ser.H, ser.J, ser.norm_v, ser.norm_theta, ser.norm_eta_M1,
            ser.grad_v_sq, ser.residual, ser.stat_residual, ser.dist_V0, ser.dist_u_V2]


def _f(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else float(x)


class _Run:
    """Shared orchestration for ``simulate``, ``decompose`` and ``rate``."""

    def __init__(self, cfg):
        from .verify import Suite
        self.cfg = cfg
        self.S = Suite(cfg)

    def equilibria(self):
        return self.S.equilibria

    def coefficients(self, tr):
        from . import diagnostics as dg
        pair = self.cfg.functional_pair()
        if pair is not None:
            return pair[0], pair[1], None
        try:
            aud = dg.coefficient_audit(tr)
        except RuntimeError as exc:
            return 0.25, 1.0 / 16, {"error": str(exc)}
        return aud.alpha, aud.eps, {"alpha": aud.alpha, "eps": aud.eps,
                                    "transient": aud.transient, "halvings": aud.halvings}

    def summary(self, tr, ser, target, audit):
        from . import diagnostics as dg
        out = {
            "t_final": float(tr.t[-1]),
            "samples": len(tr),
            "final": {"norm_V0": math.sqrt(float(tr.state_norm_sq(0.0)[-1])),
                      "norm_v": float(ser.norm_v[-1]), "norm_theta": float(ser.norm_theta[-1]),
                      "norm_eta_M1": float(ser.norm_eta_M1[-1]), "E": float(ser.E[-1]),
                      "H": float(ser.H[-1])},
            "audit": audit,
            "dissipation": {"max_abs_residual": float(abs(ser.residual).max()),
                            "sum_abs_residual": float(abs(ser.residual).sum())},
        }
        if target is None:
            out["equilibrium"] = None
            out["converged"] = False
            return out
        kin = float(ser.norm_v[-1] + ser.norm_theta[-1] + ser.norm_eta_M1[-1])
        du = float(ser.dist_u_V2[-1])
        out["equilibrium"] = {"coefficients": target.u.coeffs.tolist(),
                              "residual": target.residual, "nondegenerate": target.nondegenerate,
                              "energy": target.energy, "dist_u_V2": du, "dist_V0": float(ser.dist_V0[-1])}
        out["flags"] = {"kinetic_below_1e-6": kin <= 1e-6, "dist_u_below_1e-4": du <= 1e-4,
                        "target_residual_below_1e-10": target.residual <= 1e-10}
        out["converged"] = all(out["flags"].values())
        rates = {}
        if len(tr) >= 3 and tr.t[-1] > 0:
            try:
                w = dg.signal_window(tr.t, ser.dist_V0, tail=self.cfg.fit_tail)
                fit = dg.fit_rate(tr.t, ser.dist_V0, w)
                rates["dist_V0"] = {"model": fit.model, "p": fit.p, "r2": fit.r2,
                                    "exp_rate": fit.exp_rate, "exp_r2": fit.exp_r2,
                                    "window": list(fit.window), "rho_hat": _f(fit.rho_hat)}
            except ValueError as exc:
                rates["dist_V0"] = {"error": str(exc)}
            try:
                pr = dg.ls_probe(tr, target.u, tail=self.cfg.fit_tail)
                rates["ls_probe"] = {"rho_hat": pr.rho_hat, "sigma": pr.sigma, "r2": pr.r2,
                                     "window": list(pr.window), "n_valid": pr.n_valid,
                                     "constant": pr.constant}
            except ValueError as exc:
                rates["ls_probe"] = {"error": str(exc)}
        out["rate_fits"] = rates
        return out

    def series(self, tr, target, ab):
        from . import diagnostics as dg
        alpha, eps = ab
        cfg = dg.FunctionalConfig(alpha=alpha, eps_H=eps)
        return dg.energy_series(tr, cfg, u_inf=None if target is None else target.u)


def _target(run, tr):
    from .stationary import nearest
    eqs = run.equilibria()
    return nearest(eqs, tr.final.u) if eqs else None


def cmd_simulate(cfg, out: Path) -> int:
    from .dynamics import simulate
    run = _Run(cfg)
    s = cfg.scheme_config()
    tr = simulate(run.S.initial(s), run.S.params, s)
    target = _target(run, tr)
    alpha, eps, audit = run.coefficients(tr)
    ser = run.series(tr, target, (alpha, eps))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "series.csv", SERIES_COLUMNS, _series_columns(ser))
    _write_json(out / "summary.json", run.summary(tr, ser, target, audit))
    return EXIT_OK


def cmd_decompose(cfg, out: Path) -> int:
    import numpy as np
    from . import diagnostics as dg
    from .dynamics import decompose
    run = _Run(cfg)
    s = cfg.scheme_config()
    d = decompose(run.S.initial(s), run.S.params, s)
    target = _target(run, d.full)
    alpha, eps, audit = run.coefficients(d.full)
    sers = [run.series(tr, target, (alpha, eps)) for tr in (d.full, d.decay, d.compact)]
    nD = np.sqrt(d.decay.state_norm_sq(0.0))
    nC = np.sqrt(d.compact.state_norm_sq(0.0))
    summ = run.summary(d.full, sers[0], target, audit)
    n0 = float(nD[0])
    summ["superposition"] = {"max": d.max_superposition,
                             "max_relative": d.max_superposition / n0 if n0 > 0 else d.max_superposition}
    try:
        fD = dg.fit_rate(d.decay.t, nD, (min(5.0, d.decay.t[-1]), min(50.0, d.decay.t[-1])))
        summ["zD_fit"] = {"model": fD.model, "exp_rate": fD.exp_rate, "exp_r2": fD.exp_r2,
                          "p": fD.p, "r2": fD.r2, "window": list(fD.window)}
    except ValueError as exc:
        summ["zD_fit"] = {"error": str(exc)}
    if target is not None:
        lam = run.S.basis.eigenvalues
        c, ui = d.compact, target.u.coeffs
        dC1 = np.sqrt(np.sum(lam ** 3 * (c.u - ui) ** 2, axis=1)
                      + np.sum(lam * (c.v ** 2 + c.theta ** 2), axis=1) + c.eta["M2"])
        try:
            w = dg.signal_window(c.t, dC1, tail=cfg.fit_tail)
            fC = dg.fit_rate(c.t, dC1, w)
            summ["zC_V1_fit"] = {"model": fC.model, "p": fC.p, "r2": fC.r2,
                                 "exp_rate": fC.exp_rate, "exp_r2": fC.exp_r2,
                                 "window": list(fC.window)}
        except ValueError as exc:
            summ["zC_V1_fit"] = {"error": str(exc)}
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "series.csv", SERIES_COLUMNS + DECOMP_COLUMNS,
               _series_columns(sers[0]) + [nD, nC, d.superposition])
    _write_csv(out / "series_zD.csv", SERIES_COLUMNS, _series_columns(sers[1]))
    _write_csv(out / "series_zC.csv", SERIES_COLUMNS, _series_columns(sers[2]))
    _write_json(out / "summary.json", summ)
    return EXIT_OK


def cmd_steady(cfg, out: Path) -> int:
    from .stationary import export_equilibria
    from .verify import Suite
    eqs = Suite(cfg).equilibria
    if not eqs:
        print("error: every Newton attempt failed", file=sys.stderr)
        return EXIT_NUMERIC
    out.mkdir(parents=True, exist_ok=True)
    export_equilibria(eqs, out / "equilibria.json")
    for e in eqs:
        print(f"u[0]={e.u.coeffs[0]:+.12g} residual={e.residual:.3e} "
              f"nondegenerate={e.nondegenerate} energy={e.energy:.12g}")
    return EXIT_OK


def cmd_verify(cfg, out: Path, only=None) -> int:
    from .verify import CHECKS, run_checks
    if only:
        bad = [c for c in only if c not in CHECKS]
        if bad:
            print(f"error: unknown check ids {bad}", file=sys.stderr)
            return EXIT_CONFIG
    results = run_checks(cfg, only, on_result=lambda r: print(r.line(), flush=True))
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", [r.to_record() for r in results])
    failed = [r.id for r in results if r.passed is False]
    skipped = [r.id for r in results if r.passed is None]
    if failed:
        print("failed: " + " ".join(failed), file=sys.stderr)
    if skipped:
        print("skipped: " + " ".join(skipped), file=sys.stderr)
    if failed or skipped:
        return EXIT_CHECK
    return EXIT_OK


def cmd_rate(cfg, out: Path) -> int:
    from .dynamics import simulate
    from .verify import _rate_bound
    import numpy as np
    run = _Run(cfg)
    s = cfg.scheme_config()
    tr = simulate(run.S.initial(s), run.S.params, s)
    target = _target(run, tr)
    if target is None:
        print("error: no equilibrium found", file=sys.stderr)
        return EXIT_NUMERIC
    ser, probe, fit = _rate_bound(tr, target, cfg.fit_tail)
    e = probe.rho_hat / (1 - 2 * probe.rho_hat) if probe.rho_hat < 0.5 else math.inf
    rec = {"rho_hat": probe.rho_hat, "sigma": probe.sigma, "probe_r2": probe.r2,
           "window": list(probe.window), "model": fit.model, "p": fit.p, "r2": fit.r2,
           "exp_rate": fit.exp_rate, "exp_r2": fit.exp_r2,
           "target_nondegenerate": target.nondegenerate}
    if target.nondegenerate:
        ok = fit.model == "exponential" and 0.4 <= probe.rho_hat <= 0.5
    else:
        sel = (tr.t >= probe.window[0]) & (tr.t <= probe.window[1])
        prod = ser.dist_V0[sel] * (1 + tr.t[sel]) ** e
        rec["sup_over_median"] = float(prod.max() / np.median(prod))
        ok = rec["sup_over_median"] <= 2.0
    rec["passed"] = ok
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "rate.json", rec)
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_kernel_check(cfg, out: Path) -> int:
    from .kernel import verify_assumptions
    import numpy as np
    k = cfg.memory_kernel()
    rep = verify_assumptions(k, np.linspace(0.0, 50.0, 5001))
    rec = {"kind": k.kind, "kappa0": k.kappa0, "passed": rep.passed, "margins": rep.margins,
           "delta": rep.delta, "offending_count": {a: len(b) for a, b in rep.offending.items()}}
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "kernel.json", rec)
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK if rep.ok else EXIT_CHECK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return EXIT_CONFIG
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    from .config import ConfigError, load_config
    from .dynamics import NumericalFailure
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            cfg = cfg.with_(seed=args.seed)
        if args.threads is not None:
            cfg = cfg.with_(threads=args.threads)
        out = Path(args.out or cfg.out or "out")
        cmd = args.command
        if cmd in ("simulate", "decompose", "rate"):
            # an unreachable tail tolerance is a configuration error
            cfg.scheme_config().quadrature(cfg.memory_kernel())
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cmd == "simulate":
            return cmd_simulate(cfg, out)
        if cmd == "decompose":
            return cmd_decompose(cfg, out)
        if cmd == "steady":
            return cmd_steady(cfg, out)
        if cmd == "verify":
            return cmd_verify(cfg, out, args.only)
        if cmd == "rate":
            return cmd_rate(cfg, out)
        return cmd_kernel_check(cfg, out)
    except NumericalFailure as exc:
        print(f"numerical failure at {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
