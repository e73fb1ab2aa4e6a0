"""Command-line front end: ``glimmdamp run|verify|plotdata``."""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, VerifyConfig, config_hash, load_config, serialize_config
from .errors import ConfigError, GlimmDampError, SafetyRegionError
from .glimm import diagnostics, run
from .verify import (Condition, check_B1, check_B2, check_B3, check_B4, check_D3_direct, check_D4,
                     map_theta_region)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_CONDITION = 3
EXIT_IO = 4

DIAG_HEADER = "t,L_per,tv_per,entropy_int,dist_eq,mean_q1,mean_q2,max_omega,min_zeta"

EPILOG = """exit status:
  0  success
  1  configuration error
  2  run-time solver error (unsolvable Riemann problem, CFL failure, safety-region exit)
  3  condition-check failure (verify)
  4  I/O error
"""


def _num(x) -> str:
    return format(float(x), ".17g")


def provenance(cfg) -> str:
    return f"# config={config_hash(cfg)} version={__version__}"


class _Log:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, msg: str):
        if not self.quiet:
            print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# writers

def diagnostics_csv(records, cfg) -> str:
    lines = [provenance(cfg), DIAG_HEADER]
    for r in records:
        lines.append(",".join(_num(v) for v in (r.t, r.L_per, r.tv_per, r.entropy_int, r.dist_eq,
                                                r.mean_q1, r.mean_q2, r.max_omega, r.min_zeta)))
    return "\n".join(lines) + "\n"


def snapshot_text(grid, cfg) -> str:
    model = cfg.model
    q1, q2 = model.primitives_unchecked(grid.omega, grid.zeta)
    lines = [f"# t={_num(grid.t)} N={grid.N} model={model.kind.value}", provenance(cfg)]
    for x, w, z, a, b in zip(grid.x_centers, grid.omega, grid.zeta, q1, q2):
        lines.append(" ".join(_num(v) for v in (x, w, z, a, b)))
    return "\n".join(lines) + "\n"


def decay_fit(t, d):
    """Least-squares fit of log(dist_eq) = c - rate * t over the final half of the run."""
    t = np.asarray(t, float)
    d = np.asarray(d, float)
    keep = (t >= 0.5 * t[-1]) & (d > 0) if t.size else np.zeros(0, bool)
    if np.sum(keep) < 2 or np.ptp(t[keep]) == 0:
        return math.nan, math.nan, math.nan
    A = np.column_stack([np.ones(np.sum(keep)), t[keep]])
    coef, *_ = np.linalg.lstsq(A, np.log(d[keep]), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(d[keep])) ** 2)))
    return -float(coef[1]), float(coef[0]), resid


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_run(config_path, output=None, quiet=False, threads=1) -> int:
    log = _Log(quiet)
    try:
        cfg = load_config(config_path, log=log)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        log(f"cannot read {config_path}: {exc}")
        return EXIT_IO
    if not isinstance(cfg, RunConfig):
        log("config error: this is a verify configuration; use 'verify'")
        return EXIT_CONFIG
    out = output or cfg.output_dir
    status = EXIT_OK
    try:
        result = run(cfg, threads=threads)
        records, final, snaps, stats = result.records, result.final, result.snapshots, result.stats
        reason = None
    except SafetyRegionError as exc:
        records, final, snaps, stats = exc.records, None, [], {}
        reason, status = str(exc), EXIT_SOLVER
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    except GlimmDampError as exc:
        records, final, snaps, stats = [], None, [], {}
        reason, status = str(exc), EXIT_SOLVER
    try:
        os.makedirs(out, exist_ok=True)
        _write(os.path.join(out, "config.txt"), serialize_config(cfg))
        if records:
            _write(os.path.join(out, "diagnostics.csv"), diagnostics_csv(records, cfg))
        for k, g in enumerate(snaps):
            _write(os.path.join(out, f"snapshot_{k:03d}.txt"), snapshot_text(g, cfg))
        summary = [provenance(cfg)]
        if status == EXIT_OK:
            last = diagnostics(final, cfg.model)
            rate, _, resid = decay_fit([r.t for r in records], [r.dist_eq for r in records])
            summary += [
                "status = ok",
                f"t_final = {_num(final.t)}",
                f"steps = {stats['steps']}",
                f"L_per = {_num(last.L_per)}",
                f"tv_per = {_num(last.tv_per)}",
                f"tv_per_primitive = {_num(last.tv_per_primitive)}",
                f"dist_eq = {_num(last.dist_eq)}",
                f"decay_rate = {_num(rate)}",
                f"decay_fit_residual = {_num(resid)}",
                f"K_tv = {_num(stats['K_tv'])}",
                f"empirical_R = {_num(stats['empirical_R'])}",
            ]
        else:
            summary += ["status = aborted", f"reason = {reason}"]
        _write(os.path.join(out, "summary.txt"), "\n".join(summary) + "\n")
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    if status != EXIT_OK:
        log(f"run aborted: {reason}")
    return status


def run_verification(cfg: VerifyConfig):
    """Evaluate the requested conditions; returns (reports, theta_table or None)."""
    model, damping = cfg.model, cfg.damping
    reports, table = {}, None
    for name in cfg.conditions:
        cond = Condition(name)
        if cond is Condition.B1:
            rep = check_B1(model, cfg.V)
        elif cond is Condition.B2:
            rep = check_B2(model, cfg.K, cfg.beta_max)
        elif cond is Condition.B3:
            rep = check_B3(model, cfg.K, cfg.beta_max)
        elif cond is Condition.B4:
            rep = check_B4(model, cfg.K, cfg.beta_max, cfg.n_quadruples, cfg.seed)
        elif cond is Condition.D3:
            rep = check_D3_direct(model, damping, cfg.delta_max, cfg.K, cfg.n_samples, cfg.seed,
                                  cfg.beta_max)
        elif cond is Condition.D3angle:
            a_base = damping.a if damping.a > 0 else 1.0
            table = map_theta_region(model, cfg.gamma_list, cfg.mu_list, cfg.delta_list, cfg.K, cfg.V,
                                     cfg.beta_max, a_base=a_base)
            rep = _table_report(table)
        else:
            rep = check_D4(model, damping, cfg.K, cfg.n_samples, cfg.seed)
        reports[cond.value] = rep
    return reports, table


def _table_report(table):
    from .verify import QUARTER_PI, ConditionReport

    worst, wit = math.inf, None
    for r in table.rows:
        m = min(r.min_theta1, r.min_theta2) - QUARTER_PI - table.tolerance
        m = m if math.isfinite(m) else -math.inf
        if m < worst:
            worst, wit = m, {"gamma": r.gamma, "mu": r.mu, "delta": r.delta}
    return ConditionReport(Condition.D3angle, all(r.passed for r in table.rows) and bool(table.rows),
                           worst, wit, sum(r.samples for r in table.rows),
                           sum(r.excluded for r in table.rows), 0.0, {"eps0": table.eps0})


def cmd_verify(config_path, output=None, quiet=False, threads=1) -> int:
    log = _Log(quiet)
    try:
        cfg = load_config(config_path, log=log)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        log(f"cannot read {config_path}: {exc}")
        return EXIT_IO
    if not isinstance(cfg, VerifyConfig):
        log("config error: this is a run configuration; use 'run'")
        return EXIT_CONFIG
    try:
        reports, table = run_verification(cfg)
    except GlimmDampError as exc:
        log(f"verification error: {exc}")
        return EXIT_SOLVER
    out = output or cfg.output_dir
    try:
        os.makedirs(out, exist_ok=True)
        rows = [provenance(cfg), "condition,pass,margin,samples_checked,excluded"]
        for name, rep in reports.items():
            _write(os.path.join(out, f"report_{name}.txt"), provenance(cfg) + "\n" + rep.to_text())
            rows.append(f"{name},{'true' if rep.passed else 'false'},{_num(rep.margin)},"
                        f"{rep.samples_checked},{rep.excluded}")
        _write(os.path.join(out, "conditions.csv"), "\n".join(rows) + "\n")
        if table is not None:
            _write(os.path.join(out, "theta_table.csv"), provenance(cfg) + "\n" + table.to_csv())
        summary = [provenance(cfg)]
        for name, rep in reports.items():
            line = f"{name}: {'PASS' if rep.passed else 'FAIL'} margin={_num(rep.margin)}"
            if rep.warning:
                line += f" ({rep.warning})"
            summary.append(line)
            log(line)
        if table is not None:
            summary.append(f"eps0 = {_num(table.eps0)}")
        _write(os.path.join(out, "summary.txt"), "\n".join(summary) + "\n")
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    return EXIT_OK if all(r.passed for r in reports.values()) else EXIT_CONDITION


def _read_table(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    return lines


def cmd_plotdata(run_dir, output=None, quiet=False) -> int:
    log = _Log(quiet)
    diag = os.path.join(run_dir, "diagnostics.csv")
    try:
        lines = _read_table(diag)
    except OSError as exc:
        log(f"cannot read {diag}: {exc}")
        return EXIT_IO
    if not lines or lines[0] != DIAG_HEADER:
        log(f"{diag}: missing or unexpected header")
        return EXIT_IO
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        log(f"{diag}: corrupt row ({exc})")
        return EXIT_IO
    if data.size == 0 or data.ndim != 2 or data.shape[1] != 9:
        log(f"{diag}: no data rows")
        return EXIT_IO
    out = output or os.path.join(run_dir, "plot")
    t, L, tv, dist = data[:, 0], data[:, 1], data[:, 2], data[:, 4]
    rate, c0, _ = decay_fit(t, dist)
    try:
        os.makedirs(out, exist_ok=True)
        fit = np.exp(c0 - rate * t) if math.isfinite(rate) else np.full_like(t, np.nan)
        _write(os.path.join(out, "dist_eq.dat"),
               f"# t dist_eq fit  (fit: exp({_num(c0)} - {_num(rate)} t))\n"
               + "".join(f"{_num(a)} {_num(b)} {_num(c)}\n" for a, b, c in zip(t, dist, fit)))
        _write(os.path.join(out, "L_per.dat"),
               "# t L_per\n" + "".join(f"{_num(a)} {_num(b)}\n" for a, b in zip(t, L)))
        _write(os.path.join(out, "tv_per.dat"),
               "# t tv_per\n" + "".join(f"{_num(a)} {_num(b)}\n" for a, b in zip(t, tv)))
        for name in sorted(os.listdir(run_dir)):
            if not (name.startswith("snapshot_") and name.endswith(".txt")):
                continue
            rows = _read_table(os.path.join(run_dir, name))
            prof = "".join(" ".join(r.split()[:3]) + "\n" for r in rows)
            _write(os.path.join(out, name.replace("snapshot_", "profile_").replace(".txt", ".dat")),
                   "# x omega zeta\n" + prof)
    except OSError as exc:
        log(f"I/O error: {exc}")
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", metavar="DIR", help="output directory (overrides output.dir)")
    common.add_argument("--quiet", action="store_true", help="suppress log messages")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads (never changes results)")
    parser = argparse.ArgumentParser(
        prog="glimmdamp", description="Glimm scheme with exact damping substep, and condition checks.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run the scheme from a config file")
    p.add_argument("config")
    p = sub.add_parser("verify", parents=[common], help="check structural conditions")
    p.add_argument("config")
    p = sub.add_parser("plotdata", parents=[common], help="plot-ready files from a run directory")
    p.add_argument("run_dir")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_CONFIG
    threads = max(1, args.threads)
    if args.command == "run":
        return cmd_run(args.config, args.output, args.quiet, threads)
    if args.command == "verify":
        return cmd_verify(args.config, args.output, args.quiet, threads)
    return cmd_plotdata(args.run_dir, args.output, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
