"""Named diagnostic suites: batches of theorem-keyed checks per experiment."""

from __future__ import annotations

import numpy as np

from . import diagnostics as dx
from . import iterate
from .config import ExperimentConfig
from .iterate import SchemeConfig
from .report import DiagnosticReport
from .schedules import Schedule

SUITES = ("thm21", "thm42", "thm411", "corollary413", "all")

VENTER_HORIZON = 100_000


def _basic(beta: Schedule, z_provider, x0, horizon, seed=0) -> iterate.Trajectory:
    return iterate.run(SchemeConfig(kind="basic", horizon=horizon, x0=np.atleast_1d(x0),
                                    beta=beta, z_provider=z_provider, seed=seed))


def suite_thm21(cfg: ExperimentConfig) -> list:
    """Scalar averaged-recursion suite: band decrease, ratio band, the three
    boundedness regimes, the diminishing-average zero limit, and the
    bounded-increment tail estimate."""
    if len(cfg.scheme.x0) != 1:
        raise ValueError("thm21 suite needs a scalar configuration")
    beta = cfg.scheme.beta if cfg.scheme.beta is not None else cfg.scheme.schedules.beta
    horizon = min(cfg.scheme.horizon, 5000)
    x0 = cfg.scheme.x0
    reports = []

    banded = _basic(beta, iterate.z_proportional(0.5), x0, horizon)
    reports.append(dx.check_thm21_i(banded))
    reports.append(dx.check_suzuki(banded, beta))

    ratio = _basic(beta, iterate.z_ell_driven(ell=beta(0), z0=0.0), x0, horizon)
    reports.append(dx.check_thm21_ii(ratio))

    case1 = _basic(Schedule("constant", c=0.9),
                   iterate.z_from_schedule(Schedule("geometric", c=1.0, q=0.5)),
                   x0, horizon)
    reports.append(dx.check_thm21_iv(case1, 1, {}))

    case2 = _basic(Schedule("constant", c=0.5),
                   iterate.z_from_schedule(Schedule("constant", c=1.0)),
                   x0, horizon)
    reports.append(dx.check_thm21_iv(case2, 2, {"beta": 0.5}))

    case3 = _basic(Schedule("constant", c=0.3),
                   iterate.z_alternating(0.9, proportional=True),
                   np.abs(x0) + (x0 == 0), min(horizon, 1000))
    reports.append(dx.check_thm21_iv(case3, 3, {"beta": 0.3, "beta0": 1.0}))

    venter_beta = Schedule("one-minus-power", c=1.0, a=1.0, shift=1)
    venter = _basic(venter_beta,
                    iterate.z_from_schedule(Schedule("power-law", c=1.0, a=1.0)),
                    np.abs(x0) + (x0 == 0), VENTER_HORIZON)
    reports.append(dx.check_venter(venter, venter_beta,
                                   tol=cfg.diagnostics.get("venter", 1e-2),
                                   min_divergence_sum=10.0))
    return reports


def suite_thm42(cfg: ExperimentConfig) -> list:
    """Generalized-scheme suite: permanence, residual chain, increment
    comparison, telescoping, limit estimate and variational inequality."""
    sch = cfg.scheme
    if sch.kind not in ("generalized", "viscosity"):
        raise ValueError("thm42 suite needs a generalized or viscosity scheme")
    traj = iterate.run(sch)
    tail_tol = cfg.diagnostics.get("residual", 1e-6)
    reports = [
        dx.check_permanence(traj, sch.family, k0=traj.steps // 2),
        dx.check_residual_vanishes(traj, sch.family, tol=tail_tol),
        dx.check_suzuki(traj, sch.schedules.beta),
        dx.check_telescoping(traj, sch.contraction, sch.family,
                             r=sch.schedules.r, direction=sch.direction,
                             tol=cfg.diagnostics.get("telescoping", 1e-8)),
    ]
    try:
        est = dx.estimate_fixed_point(traj, sch.family,
                                      window=max(1, traj.steps // 10))
        ok = est.residual <= tail_tol
        reports.append(DiagnosticReport(
            "thm43_fixed_point", "pass" if ok else "fail",
            {"residual": est.residual}, traj.steps, {"tol": tail_tol},
            [est.method] if ok else [est.method, "residual above tolerance"]))
        if sch.space is not None:
            reports.append(dx.check_variational_inequality(
                est.x_star, sch.contraction, sch.family, sch.space,
                seed=sch.seed, tol=cfg.diagnostics.get("variational", 1e-9)))
    except dx.NotConverged:
        reports.append(DiagnosticReport(
            "thm43_fixed_point", "fail", {}, traj.steps, {"tol": tail_tol},
            ["increments did not settle"]))
    return reports


def suite_thm411(cfg: ExperimentConfig) -> list:
    """Coupled-scheme suite: auxiliary permanence plus the offset relation
    (exact equality at zero forcing, deviation measurement otherwise)."""
    sch = cfg.scheme
    if sch.kind not in ("generalized", "coupled-aux"):
        raise ValueError("thm411 suite needs a generalized or coupled-aux scheme")
    main, aux = iterate.run_coupled(sch)
    return [
        dx.check_permanence(aux, sch.family, k0=aux.steps // 2),
        dx.check_offset_series(main, aux, sch.schedules.r, sch.direction,
                               tol=cfg.diagnostics.get("offset", 1e-10)),
    ]


def suite_corollary413(cfg: ExperimentConfig) -> list:
    """Positive coupled schemes with averaging weight tending to one: both
    limits are the zero equilibrium."""
    sch = cfg.scheme
    if sch.kind not in ("generalized", "coupled-aux"):
        raise ValueError("corollary413 suite needs a generalized or coupled-aux scheme")
    main, aux = iterate.run_coupled(sch)
    tol = cfg.diagnostics.get("corollary413", 1e-2)
    tail = max(2, main.steps // 10)
    failures = []
    if np.any(main.xs < -1e-12) or np.any(aux.xs < -1e-12):
        failures.append("scheme not positive")
    meas = {
        "tail_x": float(np.max(np.linalg.norm(main.xs[-tail:], axis=1))),
        "tail_xbar": float(np.max(np.linalg.norm(aux.xs[-tail:], axis=1))),
    }
    if meas["tail_x"] > tol:
        failures.append("main tail above tolerance")
    if meas["tail_xbar"] > tol:
        failures.append("auxiliary tail above tolerance")
    return [DiagnosticReport("corollary413_zero_limit",
                             "pass" if not failures else "fail",
                             meas, main.steps, {"tol": tol}, failures)]


def run_suite(name: str, cfg: ExperimentConfig) -> list:
    if name == "thm21":
        return suite_thm21(cfg)
    if name == "thm42":
        return suite_thm42(cfg)
    if name == "thm411":
        return suite_thm411(cfg)
    if name == "corollary413":
        return suite_corollary413(cfg)
    if name == "all":
        reports = []
        kind = cfg.scheme.kind
        if kind == "basic" and len(cfg.scheme.x0) == 1:
            reports += suite_thm21(cfg)
        if kind in ("generalized", "viscosity"):
            reports += suite_thm42(cfg)
        if kind in ("generalized", "coupled-aux"):
            reports += suite_thm411(cfg)
        if not reports:
            raise ValueError(f"no suite applies to scheme kind {kind!r}")
        return reports
    raise ValueError(f"unknown suite {name!r}")
