"""Command-line front end: ``sgi-contrast <command> --config FILE``.

Commands
--------
derive          trap parameters and thermal state from ``[physical]``/``[thermal]``
transfer        dephasing or mismatch transfer functions (fig1/fig4 CSV)
psd             Lorentzian PSD curves (fig3 CSV)
contrast-sweep  contrast against sigma and/or n (fig2/fig5 CSV), ``--mc`` adds ensembles
mc              one Monte Carlo ensemble, summary JSON plus per-run CSV
tolerance       largest sigma keeping the contrast above a target, both modes
oracle          truncated number-basis propagator against the closed-form overlap
validate        property suite over all modules

Exit status is 0 on success, 1 when a validation or comparison fails and 2 on
configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic, core, fock, montecarlo, noise, validation
from .qfho import Mode

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("derive", "transfer", "psd", "contrast-sweep", "mc", "tolerance", "oracle", "validate")


class _Ctx:
    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        self.out = Path(args.out)

    def section(self, name):
        sec = self.cfg.get(name, {})
        if not isinstance(sec, dict):
            raise core.ConfigError(f"[{name}] must be a table")
        return sec

    def seed(self, default=0):
        if self.args.seed is not None:
            return self.args.seed
        return int(self.section("mc").get("seed", default))

    def convention(self):
        conv = self.args.psd_convention or self.section("noise").get("convention", "standard")
        if conv not in noise.CONVENTIONS:
            raise core.ConfigError(f"unknown psd convention {conv!r}")
        return conv

    def steps(self, default=4096):
        if self.args.grid is not None:
            return self.args.grid
        return int(self.section("grid").get("steps", default))

    def workers(self):
        return max(1, min(8, os.cpu_count() or 1))


def _float_list(v, what):
    if isinstance(v, (int, float)):
        return [float(v)]
    try:
        return [float(x) for x in v]
    except TypeError:
        raise core.ConfigError(f"{what} must be a number or a list of numbers") from None


def _log_grid(sec, key, what):
    """``key = [..]`` or ``key = {min, max, points, include_zero}``."""
    spec = sec.get(key)
    if spec is None:
        return None
    if isinstance(spec, dict):
        try:
            vals = np.logspace(math.log10(spec["min"]), math.log10(spec["max"]), int(spec["points"]))
        except KeyError as exc:
            raise core.ConfigError(f"{what} grid is missing {exc}") from None
        vals = list(map(float, vals))
        if spec.get("include_zero", False):
            vals = [0.0] + vals
        return vals
    return _float_list(spec, what)


def psd_from_config(sec, sigma=None, gamma=None):
    model = str(sec.get("model", "white")).lower()
    omega = float(sec.get("omega", 1.0))
    sigma = float(sec.get("sigma", 0.0)) if sigma is None else sigma
    if model == "white":
        return noise.White(sigma, omega=omega)
    if model == "lorentzian":
        gamma = float(sec.get("gamma", 1.0)) if gamma is None else gamma
        return noise.Lorentzian(sigma, gamma, omega0=float(sec.get("omega0", 0.0)), omega=omega)
    if model == "tabulated":
        if "table" not in sec:
            raise core.ConfigError("tabulated noise needs a 'table' CSV path")
        return noise.load_tabulated(sec["table"], omega)
    raise core.ConfigError(f"unknown noise model {model!r}")


def _open_csv(ctx, name, meta):
    ctx.out.mkdir(parents=True, exist_ok=True)
    path = ctx.out / name
    fh = open(path, "w", newline="", encoding="utf-8")
    for k, v in meta.items():
        fh.write(f"# {k}={v}\n")
    if not ctx.args.no_timestamp:
        fh.write(f"# generated={_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
    return path, fh


def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def _write_table(ctx, name, meta, header, rows):
    path, fh = _open_csv(ctx, name, meta)
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    print(f"wrote {path}")
    return path


def _x_grid(sec):
    x_max = float(sec.get("x_max", 5.0))
    dx = float(sec.get("dx", 1e-3))
    if not (x_max > 0 and dx > 0):
        raise core.ConfigError("x_max and dx must be positive")
    n = int(round(x_max / dx))
    return np.arange(n + 1) * dx


def cmd_derive(ctx):
    p = core.physical_from_config(ctx.section("physical"))
    t = core.derive_trap(p)
    th = core.thermal_from_config(ctx.section("thermal"), t.omega)
    report = [
        ("mass_kg", p.mass), ("chi_rho_m3_per_kg", p.chi_rho), ("gradient_T_per_m", p.gradient),
        ("moment_J_per_T", p.moment), ("bias_field_T", p.bias_field),
        ("omega_rad_per_s", t.omega), ("coupling_J", t.coupling), ("u", t.u),
        ("width_m", t.width), ("superposition_m", t.superposition), ("z0_m", t.z0),
        ("n", th.n), ("temperature_K", th.temperature),
    ]
    for k, v in report:
        print(f"{k} = {v:.6g}")
    return EXIT_OK


def cmd_transfer(ctx):
    sec = ctx.section("transfer")
    kind = str(sec.get("kind", "dephase")).lower()
    x = _x_grid(sec)
    if kind == "dephase":
        u = float(sec.get("u", 100.0))
        f = analytic.transfer_eval(analytic.Dephase(u), x)
        _write_table(ctx, sec.get("output", "fig1_transfer.csv"),
                     {"model": "transfer-dephase", "u": u, "convention": ctx.convention()},
                     ["x", "F"], zip(x, f))
    elif kind == "mismatch":
        fr = analytic.transfer_eval(analytic.MismatchRe(), x)
        fi = analytic.transfer_eval(analytic.MismatchIm(), x)
        _write_table(ctx, sec.get("output", "fig4_transfer.csv"),
                     {"model": "transfer-mismatch", "convention": ctx.convention()},
                     ["x", "F_re", "F_im"], zip(x, fr, fi))
    else:
        raise core.ConfigError(f"[transfer] kind must be 'dephase' or 'mismatch', got {kind!r}")
    return EXIT_OK


def cmd_psd(ctx):
    sec = ctx.section("psd")
    sigma = float(sec.get("sigma", 1e-2))
    omega = float(sec.get("omega", 1e3))
    omega0 = float(sec.get("omega0", 0.0))
    gammas = _float_list(sec.get("gammas", [0.1, 1.0, 10.0]), "[psd] gammas")
    x = _x_grid(sec)
    cols = [noise.psd_eval(noise.Lorentzian(sigma, g, omega0=omega0, omega=omega), x * omega)
            for g in gammas]
    _write_table(ctx, sec.get("output", "fig3_psd.csv"),
                 {"model": "lorentzian", "sigma": sigma, "omega": omega, "omega0": omega0,
                  "convention": ctx.convention()},
                 ["x", "Omega"] + [f"S_gamma={g:g}" for g in gammas],
                 zip(x, x * omega, *cols))
    return EXIT_OK


def _sweep_points(mode, sec, noise_sec):
    """(label, sigma, n) triples for the configured sweeps."""
    pts = []
    sigmas = _log_grid(sec, "sigma_grid", "[sweep] sigma_grid")
    if sigmas is not None:
        n = float(sec.get("n", 0.0))
        pts += [("sigma", s, n) for s in sigmas]
    n_grid = _log_grid(sec, "n_grid", "[sweep] n_grid")
    if n_grid is not None:
        if mode is Mode.SPIN_INDEPENDENT:
            raise core.ConfigError("an n sweep is meaningless for spin-independent noise")
        sigma = float(sec.get("sigma", noise_sec.get("sigma", 1e-2)))
        pts += [("n", sigma, n) for n in n_grid]
    if not pts:
        raise core.ConfigError("[sweep] needs sigma_grid and/or n_grid")
    return pts


def cmd_contrast_sweep(ctx):
    sec = ctx.section("sweep")
    mode = Mode.parse(sec.get("mode", "spin-independent"))
    u = float(sec.get("u", 100.0))
    conv = ctx.convention()
    omega = float(ctx.section("noise").get("omega", 1.0))
    gammas = _float_list(sec.get("gammas", []), "[sweep] gammas")
    pts = _sweep_points(mode, sec, ctx.section("noise"))

    def family(sigma, gamma):
        if gamma is None:
            return noise.White(sigma, omega=omega)
        return noise.Lorentzian(sigma, gamma, omega=omega)

    def point(p):
        _, sigma, n = p
        return [analytic.contrast(mode, family(sigma, g), u=u, n=n, convention=conv).contrast
                for g in [None] + gammas]

    with ThreadPoolExecutor(ctx.workers()) as ex:
        values = list(ex.map(point, pts))

    header = ["sweep", "sigma", "n", "white"] + [f"lorentzian_gamma={g:g}" for g in gammas]
    rows = [[p[0], p[1], p[2]] + v for p, v in zip(pts, values)]
    meta = {"model": "white+lorentzian" if gammas else "white", "mode": mode.value, "u": u,
            "convention": conv}
    if ctx.args.mc:
        runs = ctx.args.runs or int(sec.get("runs", 1000))
        steps = ctx.steps()
        seed = ctx.seed()
        header += ["mc_white", "mc_white_se"]
        meta.update(mc_runs=runs, mc_steps=steps, seed=seed)
        for row, (_, sigma, n) in zip(rows, pts):
            if sigma == 0.0:
                row += [1.0, 0.0]
                continue
            cfg = montecarlo.McConfig(family(sigma, None), mode, u=u, n=n, runs=runs, steps=steps,
                                      master_seed=seed, convention=conv)
            s = montecarlo.run_ensemble(cfg, workers=ctx.workers())
            row += [s.contrast, s.contrast_se]
    default = "fig2_contrast.csv" if mode is Mode.SPIN_INDEPENDENT else "fig5_contrast.csv"
    _write_table(ctx, sec.get("output", default), meta, header, rows)
    return EXIT_OK


def cmd_mc(ctx):
    sec = ctx.section("mc")
    psd = psd_from_config(ctx.section("noise"))
    cfg = montecarlo.McConfig(
        psd, Mode.parse(sec.get("mode", "spin-independent")), u=float(sec.get("u", 1.0)),
        n=float(sec.get("n", 0.0)), runs=ctx.args.runs or int(sec.get("runs", 10_000)),
        steps=ctx.steps(), master_seed=ctx.seed(), convention=ctx.convention())
    s = montecarlo.run_ensemble(cfg, workers=ctx.workers(), keep_runs=True)
    ctx.out.mkdir(parents=True, exist_ok=True)
    montecarlo.write_summary_json(s, ctx.out / "mc_summary.json")
    montecarlo.write_runs_csv(s, ctx.out / "mc_runs.csv")
    print(f"wrote {ctx.out / 'mc_summary.json'} and {ctx.out / 'mc_runs.csv'}")
    print(f"contrast = {s.contrast:.6g} +- {s.contrast_se:.2g}")
    ref = analytic.contrast(cfg.mode, psd, u=cfg.u, n=cfg.n, convention=cfg.convention)
    rep = montecarlo.compare_analytic(s, ref)
    print(f"analytic contrast = {ref.contrast:.6g}")
    for line in rep.lines():
        print(line)
    print("comparison:", "PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_tolerance(ctx):
    p = core.physical_from_config(ctx.section("physical"))
    t = core.derive_trap(p)
    th = core.thermal_from_config(ctx.section("thermal"), t.omega)
    sec = ctx.section("tolerance")
    target = float(sec.get("target", 0.95))
    conv = ctx.convention()
    si = analytic.tolerance_solve(Mode.SPIN_INDEPENDENT, noise.White(1.0), target, u=t.u,
                                  convention=conv)
    sd = analytic.tolerance_solve(Mode.SPIN_DEPENDENT, noise.White(1.0), target, n=th.n,
                                  convention=conv)
    rows = [("mass_kg", p.mass), ("gradient_T_per_m", p.gradient), ("omega_rad_per_s", t.omega),
            ("superposition_m", t.superposition), ("width_m", t.width), ("u", t.u),
            ("n", th.n), ("temperature_K", th.temperature),
            ("sigma_max_spin_independent", si), ("sigma_max_spin_dependent", sd)]
    for k, v in rows:
        print(f"{k} = {v:.6g}")
    _write_table(ctx, sec.get("output", "table1.csv"),
                 {"model": "white", "target": target, "convention": conv},
                 ["quantity", "value"], rows)
    return EXIT_OK


def cmd_oracle(ctx):
    sec = ctx.section("oracle")
    cfg = fock.PropagatorConfig(int(sec.get("dim", 128)), int(sec.get("substeps", 8)))
    matrix = fock.DEFAULT_MATRIX
    if ctx.args.seed is not None:
        matrix = tuple(replace(c, seed=ctx.args.seed) for c in matrix)
    rows = fock.run_oracle(matrix, cfg, steps=ctx.args.grid or int(sec.get("steps", 1024)),
                           tol=float(sec.get("tol", 1e-5)),
                           convergence_tol=float(sec.get("convergence_tol", 1e-6)),
                           check_convergence=bool(sec.get("check_convergence", True)))
    ctx.out.mkdir(parents=True, exist_ok=True)
    fock.write_oracle_report(rows, ctx.out / "oracle_report.json")
    for r in rows:
        shift = r.get("refinement_shift", float("nan"))
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['case']}: |diff| = {r['abs_diff']:.2e}, "
              f"refinement shift = {shift:.2e}")
    print(f"wrote {ctx.out / 'oracle_report.json'}")
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_FAIL


def cmd_validate(ctx):
    results = validation.run_all()
    for c in results:
        print(c.line())
    failed = sum(not c.passed for c in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


HANDLERS = {
    "derive": cmd_derive, "transfer": cmd_transfer, "psd": cmd_psd,
    "contrast-sweep": cmd_contrast_sweep, "mc": cmd_mc, "tolerance": cmd_tolerance,
    "oracle": cmd_oracle, "validate": cmd_validate,
}


def _u64(s):
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="sgi-contrast", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="TOML configuration file")
    ap.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    ap.add_argument("--seed", type=_u64, metavar="U64", help="override the master seed")
    ap.add_argument("--mc", action="store_true", help="add Monte Carlo columns to sweeps")
    ap.add_argument("--runs", type=_positive, metavar="N", help="Monte Carlo runs")
    ap.add_argument("--grid", type=_positive, metavar="N", help="time steps per trap period")
    ap.add_argument("--psd-convention", choices=noise.CONVENTIONS,
                    help="PSD normalization (default: standard)")
    ap.add_argument("--no-timestamp", action="store_true",
                    help="omit the timestamp comment line from CSV output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = core.load_config(args.config) if args.config else {}
        return HANDLERS[args.command](_Ctx(args, cfg))
    except fock.TruncationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (core.ConfigError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
