"""Batch experiment runner.

Verbs:
  validate  check a config against the scheme assumptions (exit 0/2)
  run       run the scheme, export trajectory CSV(s), figure and summary
  check     run a named diagnostic suite and print one line per check

Exit codes: 0 success, 1 usage/config error, 2 non-conforming config,
3 divergence event, 4 diagnostic failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import iterate, report, schedules, suites
from .companion import validate_weak_contraction
from .config import ConfigError, ExperimentConfig, load_config, preset_names
from .mappings import estimate_lipschitz

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONFORMING = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILED = 4

VALIDATION_HORIZON = 2000
VALIDATION_SAMPLES = 256


def _validation_reports(cfg: ExperimentConfig) -> list:
    sch = cfg.scheme
    horizon = min(sch.horizon, VALIDATION_HORIZON)
    reports = []
    if sch.schedules is not None:
        reports.append(schedules.validate_assumptions(sch.schedules, horizon))
    else:
        beta = sch.beta.values(horizon + 1)
        ok = bool(((beta >= 0) & (beta < 1)).all())
        reports.append(report.DiagnosticReport(
            "beta_range", "pass" if ok else "fail",
            {"beta_min": float(beta.min()), "beta_max": float(beta.max())},
            horizon, {}, [] if ok else ["beta outside [0,1)"]))
    if sch.contraction is not None and sch.space is not None:
        est = estimate_lipschitz(sch.contraction, sch.space,
                                 VALIDATION_SAMPLES, sch.seed)
        ok = est <= sch.contraction.lipschitz_bound + 1e-9
        reports.append(report.DiagnosticReport(
            "contraction_lipschitz", "pass" if ok else "fail",
            {"estimate": est, "bound": sch.contraction.lipschitz_bound},
            None, {}, [] if ok else ["sampled estimate exceeds declared bound"]))
    if sch.family is not None and sch.space is not None:
        est = estimate_lipschitz(lambda x: sch.family(sch.horizon, x), sch.space,
                                 VALIDATION_SAMPLES, sch.seed)
        ok = est <= 1.0 + 1e-6 and sch.family.limit_lipschitz <= 1.0 + 1e-9
        reports.append(report.DiagnosticReport(
            "family_asymptotic_nonexpansive", "pass" if ok else "fail",
            {"late_lipschitz_estimate": est,
             "limit_lipschitz": sch.family.limit_lipschitz},
            None, {}, [] if ok else ["late-index map expands"]))
    if sch.halpern_map is not None and sch.space is not None:
        est = estimate_lipschitz(sch.halpern_map, sch.space,
                                 VALIDATION_SAMPLES, sch.seed)
        ok = est <= 1.0 + 1e-9
        reports.append(report.DiagnosticReport(
            "averaged_map_nonexpansive", "pass" if ok else "fail",
            {"estimate": est}, None, {}, [] if ok else ["map expands"]))
    if sch.companion is not None:
        reports.append(validate_weak_contraction(sch.companion, seed=sch.seed))
    return reports


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
        reports = _validation_reports(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for rep in reports:
        print(rep.line())
    return EXIT_OK if all(r.ok for r in reports) else EXIT_NONCONFORMING


def _load_with_overrides(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, "horizon", None):
        cfg.scheme.horizon = args.horizon
    if getattr(args, "seed", None) is not None:
        cfg.scheme.seed = args.seed
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    return cfg


def _gate(cfg: ExperimentConfig, force: bool) -> int | None:
    reports = _validation_reports(cfg)
    if all(r.ok for r in reports):
        return None
    for rep in reports:
        if not rep.ok:
            print(rep.line())
    if force:
        print("warning: running non-conforming configuration (--force)")
        return None
    print("configuration is non-conforming; use --force to run anyway",
          file=sys.stderr)
    return EXIT_NONCONFORMING


def cmd_run(args) -> int:
    try:
        cfg = _load_with_overrides(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    gate = _gate(cfg, args.force)
    if gate is not None:
        return gate

    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if cfg.scheme.kind == "coupled-aux":
        main, aux = iterate.run_coupled(cfg.scheme)
        trajs = [(main, f"{cfg.name}_trajectory.csv", f"{cfg.name}_convergence.png"),
                 (aux, f"{cfg.name}_aux_trajectory.csv", f"{cfg.name}_aux_convergence.png")]
    else:
        traj = iterate.run(cfg.scheme)
        trajs = [(traj, f"{cfg.name}_trajectory.csv", f"{cfg.name}_convergence.png")]

    lines = []
    for traj, csv_name, fig_name in trajs:
        traj.to_csv(out / csv_name)
        report.save_convergence_figure(traj, out / fig_name)
        lines.append(f"{traj.scheme} steps={traj.steps} diverged={traj.diverged} "
                     f"final_norm={float((traj.xs[-1] ** 2).sum()) ** 0.5:.6g}")
        print(f"wrote {out / csv_name} and {out / fig_name}")

    summary = out / f"{cfg.name}_summary.txt"
    tmp = str(summary) + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    import os
    os.replace(tmp, summary)

    if any(t.diverged for t, _, _ in trajs):
        print("divergence event: trajectory is partial")
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite not in suites.SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(suites.SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load_with_overrides(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    gate = _gate(cfg, args.force)
    if gate is not None:
        return gate
    try:
        reports = suites.run_suite(args.suite, cfg)
    except ValueError as exc:
        print(f"suite error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for rep in reports:
        print(rep.line())
    return EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viscolab",
        description="Fixed-point iteration laboratory for averaged, Halpern and "
                    "generalized viscosity schemes.",
        epilog="bundled presets: " + ", ".join(preset_names()))
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_run_flags=True):
        p.add_argument("config", help="config file path or bundled preset name")
        if with_run_flags:
            p.add_argument("--horizon", type=int, help="override the horizon")
            p.add_argument("--seed", type=int, help="override the seed")
            p.add_argument("--force", action="store_true",
                           help="run even if the config is non-conforming")

    p_val = sub.add_parser("validate", help="validate a configuration")
    common(p_val, with_run_flags=False)
    p_val.set_defaults(fn=cmd_validate)

    p_run = sub.add_parser("run", help="run a scheme and export its trajectory")
    common(p_run)
    p_run.add_argument("--out", help="output directory (default from config)")
    p_run.set_defaults(fn=cmd_run)

    p_chk = sub.add_parser("check", help="run a diagnostic suite")
    common(p_chk)
    p_chk.add_argument("--suite", default="all",
                       help="thm21 | thm42 | thm411 | corollary413 | all")
    p_chk.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
