"""Theorem-keyed property checks on trajectories and configurations.

Each check is a pure function of immutable trajectory data returning a
:class:`DiagnosticReport`. Asymptotic ("limsup"/tail) claims are estimated on
a tail window of the finite horizon and reported as estimates, never proofs.
Band-conditional checks only assert at indices where the band hypothesis
holds and always report the coverage fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iterate import Trajectory
from .mappings import AmbientSpace, ContractionMap, MapFamily
from .report import DiagnosticReport
from .schedules import Schedule, trait_holds

#: default tolerances: exact algebra / convergence tails / limsup estimates
TOL_IDENTITY = 1e-10
TOL_TAIL = 1e-6
TOL_LIMSUP = 1e-3

TAIL_NOTE = "limsup estimated on tail window"


class NotConverged(RuntimeError):
    """Trajectory increments have not settled below the requested level."""


def _tail_window(n: int, frac: float = 0.2, minimum: int = 50) -> int:
    return min(n, max(minimum, int(frac * n)))


def _scalar(traj: Trajectory) -> np.ndarray:
    if traj.dim != 1:
        raise ValueError("check requires a scalar trajectory")
    return traj.xs[:, 0]


@dataclass
class FixedPointEstimate:
    """Tail estimate of the limit point with its limit-map residual."""

    x_star: np.ndarray
    residual: float
    method: str

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual cannot be negative")


def check_thm21_i(traj: Trajectory, tol: float = TOL_IDENTITY,
                  tail_tol: float = TOL_TAIL) -> DiagnosticReport:
    """Squared-state decrease under the error-band condition (scalar scheme)."""
    x = _scalar(traj)
    e = traj.es[:, 0]
    beta = traj.betas
    n = len(e)
    bound = 2.0 * x[:n] / (1.0 - beta)
    pos = x[:n] > 0
    band = np.where(pos, (e >= 0) & (e <= bound), (e >= bound) & (e <= 0))
    strict = np.where(pos, (e > 0) & (e < bound),
                      np.where(x[:n] < 0, (e > bound) & (e <= 0), e == 0))
    coverage = float(np.mean(band)) if n else 0.0
    if not np.any(band):
        return DiagnosticReport("thm21_i", "inconclusive",
                                {"coverage": coverage}, traj.steps,
                                {"tol": tol}, ["band never satisfied"])
    sq = x ** 2
    viol = float(np.max((sq[1:n + 1] - sq[:n])[band]))
    meas = {"coverage": coverage, "max_sq_increase": viol}
    failures = []
    if viol > tol:
        failures.append("squared state increased inside the band")
    if np.all(strict):
        absx = np.abs(x)
        mono = float(np.max(absx[1:] - absx[:-1]))
        meas["max_abs_increase"] = mono
        meas["tail_abs"] = float(np.max(absx[-_tail_window(len(x), 0.1):]))
        if mono > tol:
            failures.append("|x| not monotonically decreasing under strict band")
        if meas["tail_abs"] > tail_tol:
            failures.append("tail of |x| above tolerance under strict band")
    return DiagnosticReport("thm21_i", "pass" if not failures else "fail",
                            meas, traj.steps,
                            {"tol": tol, "tail_tol": tail_tol}, failures)


def check_thm21_ii(traj: Trajectory, tol: float = TOL_IDENTITY,
                   tail_tol: float = TOL_TAIL) -> DiagnosticReport:
    """Squared-error decrease when the increment ratio stays in its band."""
    _scalar(traj)
    e = traj.es[:, 0]
    ells = traj.ells
    beta = traj.betas[: len(ells)]
    band = (ells >= beta - 1.0) & (ells <= beta + 1.0)
    strict = (ells > beta - 1.0) & (ells < beta + 1.0)
    coverage = float(np.mean(band)) if len(band) else 0.0
    if not np.any(band):
        return DiagnosticReport("thm21_ii", "inconclusive",
                                {"coverage": coverage}, traj.steps,
                                {"tol": tol}, ["ratio band never satisfied"])
    sq = e ** 2
    viol = float(np.max((sq[1:len(band) + 1] - sq[:len(band)])[band]))
    meas = {"coverage": coverage, "max_sq_increase": viol}
    failures = []
    if viol > tol:
        failures.append("squared error increased inside the band")
    # strictly interior from some index onward forces the error tail to zero
    not_strict = np.nonzero(~strict)[0]
    k1 = 0 if len(not_strict) == 0 else int(not_strict[-1]) + 1
    if k1 < len(strict) and len(strict) - k1 >= max(10, len(strict) // 2):
        tail = float(np.max(np.abs(e[-_tail_window(len(e), 0.1):])))
        meas["tail_abs_e"] = tail
        if tail > tail_tol:
            failures.append("error tail above tolerance despite interior ratios")
    return DiagnosticReport("thm21_ii", "pass" if not failures else "fail",
                            meas, traj.steps,
                            {"tol": tol, "tail_tol": tail_tol}, failures)


def check_thm21_iv(traj: Trajectory, case: int, params: dict,
                   tol: float = TOL_TAIL) -> DiagnosticReport:
    """The three boundedness regimes of the averaged scalar recursion."""
    x = _scalar(traj)
    z = traj.zs[:, 0]
    check_id = f"thm21_iv_case{case}"
    sup_x = float(np.max(np.abs(x)))
    meas = {"sup_abs_x": sup_x}
    failures = []
    if case == 1:
        partial = np.cumsum(z)
        bound = abs(x[0]) + float(np.max(np.abs(x[0] + partial)))
        meas["analytic_bound"] = bound
        if sup_x > 2.0 * bound or sup_x > 1e12:
            failures.append("state exceeded the summable-forcing bound")
    elif case == 2:
        beta = float(params["beta"])
        bound = abs(x[0]) + 2.0 * float(np.max(np.abs(z))) / (1.0 - beta)
        meas["analytic_bound"] = bound
        if sup_x > 2.0 * bound or sup_x > 1e12:
            failures.append("state exceeded the bounded-forcing bound")
    elif case == 3:
        beta0 = float(params["beta0"])
        n = len(z)
        if np.any(np.abs(z) > beta0 * np.abs(x[:n]) + 1e-12):
            return DiagnosticReport(check_id, "inconclusive", meas, traj.steps,
                                    {"tol": tol}, ["forcing bound hypothesis failed"])
        absx = np.abs(x)
        nonzero = absx[:-1] > 0
        if np.any(absx[1:][nonzero] >= absx[:-1][nonzero]):
            failures.append("|x| not strictly decreasing")
        tail = float(np.max(absx[-_tail_window(len(x), 0.1):]))
        meas["tail_abs"] = tail
        if tail > tol:
            failures.append("tail above tolerance")
    else:
        raise ValueError("case must be 1, 2 or 3")
    return DiagnosticReport(check_id, "pass" if not failures else "fail",
                            meas, traj.steps, {"tol": tol}, failures)


def check_venter(traj: Trajectory, beta: Schedule, tol: float = 1e-2,
                 min_divergence_sum: float = 20.0) -> DiagnosticReport:
    """Zero limit for nonnegative averaged schemes with beta tending to one."""
    x = _scalar(traj)
    z = traj.zs[:, 0]
    n = len(z)
    notes = []

    if x[0] < 0 or np.any(z < 0) or np.any(traj.betas < 0) or np.any(traj.betas > 1):
        return DiagnosticReport("thm21_v_venter", "inconclusive", {}, traj.steps,
                                {"tol": tol}, ["nonnegativity hypothesis failed"])
    try:
        comp = beta.complement()
        certified = (trait_holds(comp, "tends-to-zero") is True
                     and trait_holds(comp, "sum-diverges") is True)
    except ValueError:
        certified = False
    if not certified:
        return DiagnosticReport("thm21_v_venter", "inconclusive", {}, traj.steps,
                                {"tol": tol}, ["beta traits not certified"])

    weighted = (1.0 - traj.betas) * z
    weighted_sum = float(np.sum(weighted))
    # summability corroborated on the tail; symbolic only case by case upstream
    if np.max(weighted[-max(2, n // 10):]) > tol * 1e-2:
        notes.append("weighted forcing summability only corroborated numerically")
    divsum = float(np.sum(1.0 - traj.betas))
    meas = {"divergence_partial_sum": divsum,
            "weighted_forcing_sum": weighted_sum,
            "tail_x": float(np.max(x[-_tail_window(len(x), 0.1):]))}
    failures = []
    if divsum < min_divergence_sum:
        return DiagnosticReport("thm21_v_venter", "inconclusive", meas, traj.steps,
                                {"tol": tol},
                                notes + [f"partial sum below {min_divergence_sum:g}"])
    if meas["tail_x"] > tol:
        failures.append("state tail above tolerance")
    return DiagnosticReport("thm21_v_venter", "pass" if not failures else "fail",
                            meas, traj.steps,
                            {"tol": tol, "min_divergence_sum": min_divergence_sum},
                            failures + notes)


def check_suzuki(traj: Trajectory, beta: Schedule,
                 tol: float = TOL_LIMSUP) -> DiagnosticReport:
    """Tail estimate of limsup(||z_{k+1}-z_k|| - ||x_{k+1}-x_k||)."""
    if traj.diverged:
        return DiagnosticReport("thm21_vi_suzuki", "inconclusive", {}, traj.steps,
                                {"tol": tol}, ["trajectory diverged"])
    certified = (trait_holds(beta, "liminf-positive") is True
                 and trait_holds(beta, "limsup-below-one") is True)
    if not certified:
        return DiagnosticReport("thm21_vi_suzuki", "inconclusive", {}, traj.steps,
                                {"tol": tol}, ["beta band traits not certified"])
    dz = np.linalg.norm(np.diff(traj.zs, axis=0), axis=1)
    dx = np.linalg.norm(np.diff(traj.xs[: len(traj.zs)], axis=0), axis=1)
    w = _tail_window(len(dz))
    est = float(np.max(dz[-w:] - dx[-w:]))
    status = "pass" if est <= tol else "fail"
    return DiagnosticReport("thm21_vi_suzuki", status,
                            {"limsup_estimate": est, "window": w}, traj.steps,
                            {"tol": tol},
                            [] if status == "pass" else ["estimate above tolerance"],
                            )


def check_residual_vanishes(traj: Trajectory, fam: MapFamily,
                            tol: float = TOL_TAIL) -> DiagnosticReport:
    """The four-sequence convergence chain of the generalized scheme."""
    if traj.diverged:
        return DiagnosticReport("thm42_ii_residual", "inconclusive", {},
                                traj.steps, {"tol": tol}, ["trajectory diverged"])
    if traj.residuals is None:
        raise ValueError("trajectory has no recorded map residuals")
    n = len(traj.zs)
    w = _tail_window(n, 0.1)
    err = np.linalg.norm(traj.xs[:n] - traj.zs, axis=1)
    scaled = np.array([
        np.linalg.norm(traj.gammas[k] * fam(k, traj.xs[k]) / (1.0 - traj.betas[k])
                       - traj.xs[k])
        for k in range(n - w, n)])
    meas = {
        "tail_residual": float(np.max(traj.residuals[-w:])),
        "tail_x_minus_z": float(np.max(err[-w:])),
        "tail_scaled_map_term": float(np.max(scaled)),
    }
    failures = [f"{k} above tolerance" for k, val in meas.items() if val > tol]
    return DiagnosticReport("thm42_ii_residual", "pass" if not failures else "fail",
                            meas, traj.steps, {"tol": tol},
                            failures + [TAIL_NOTE])


def estimate_fixed_point(traj: Trajectory, fam: MapFamily, window: int = 50,
                         settle_tol: float = TOL_TAIL) -> FixedPointEstimate:
    """Tail-average limit estimate; raises NotConverged if increments
    have not settled below ``settle_tol``."""
    window = max(1, min(window, traj.steps))
    inc = np.linalg.norm(np.diff(traj.xs[-(window + 1):], axis=0), axis=1)
    if traj.diverged or float(np.max(inc)) > settle_tol:
        raise NotConverged("trajectory increments have not settled")
    x_star = np.mean(traj.xs[-window:], axis=0)
    residual = float(np.linalg.norm(fam.limit(x_star) - x_star))
    method = "last-iterate" if window == 1 else f"tail-average({window})"
    return FixedPointEstimate(x_star=x_star, residual=residual, method=method)


def check_variational_inequality(xstar, f: ContractionMap, fam: MapFamily,
                                 space: AmbientSpace, n_samples: int = 256,
                                 seed: int = 0, tol: float = 1e-9,
                                 max_iter: int = 1000) -> DiagnosticReport:
    """Optimality of the limit over the sampled fixed-point set of the family.

    In Euclidean space the duality pairing is the plain inner product. Maps
    with a unique fixed point make the check vacuous; that is reported as
    pass-vacuous.
    """
    xstar = np.atleast_1d(np.asarray(xstar, float))
    rng = np.random.default_rng(seed)
    starts = space.sample(rng, n_samples)
    fixed = []
    for s in starts:
        y = s
        for _ in range(max_iter):
            y_next = np.asarray(fam.limit(y), float)
            if np.linalg.norm(y_next - y) <= tol:
                fixed.append(y_next)
                break
            y = y_next
    if not fixed:
        return DiagnosticReport("thm49_variational", "inconclusive", {},
                                None, {"tol": tol},
                                ["no fixed points found by iteration"])
    fixed = np.array(fixed)
    distinct = np.linalg.norm(fixed - xstar, axis=1) > 10 * tol
    direction = f(xstar) - xstar
    inner = fixed @ direction - float(xstar @ direction)
    worst = float(np.max(inner))
    meas = {"max_inner_product": worst,
            "n_fixed_points": len(fixed),
            "n_distinct": int(np.sum(distinct))}
    if not np.any(distinct):
        return DiagnosticReport("thm49_variational", "pass-vacuous", meas,
                                None, {"tol": tol},
                                ["fixed point set collapsed to the limit"])
    status = "pass" if worst <= tol else "fail"
    return DiagnosticReport("thm49_variational", status, meas, None,
                            {"tol": tol},
                            [] if status == "pass" else ["inequality violated"])


def check_offset_series(main: Trajectory, aux: Trajectory, r: float,
                        direction, tol: float = TOL_IDENTITY) -> DiagnosticReport:
    """Relation between the generalized scheme and its forcing-free twin.

    Asserts only in the regime where the relation is exact (forcing
    identically zero); otherwise the deviation curve is recorded as a
    measurement, with no pass/fail claim.
    """
    if main.steps != aux.steps:
        raise ValueError("trajectories have different lengths")
    n = main.steps
    beta = main.betas
    forcing = main.phi_terms + main.deltas * r
    u = np.atleast_1d(np.asarray(direction, float))

    # S_k = sum_{l<k} (prod_{j=l+1..k-1} beta_j) * forcing_l, built recursively
    dev = np.zeros(n + 1)
    s_val = 0.0
    for k in range(1, n + 1):
        s_val = beta[k - 1] * s_val + forcing[k - 1]
        dev[k] = np.linalg.norm((main.xs[k] - aux.xs[k]) - s_val * u)
    meas = {"max_deviation": float(np.max(dev)),
            "final_deviation": float(dev[-1]),
            "final_gap_norm": float(np.linalg.norm(main.xs[-1] - aux.xs[-1]))}
    exact_regime = r == 0.0 and np.all(forcing == 0.0)
    if exact_regime:
        status = "pass" if meas["max_deviation"] <= tol else "fail"
        notes = [] if status == "pass" else ["schemes disagree despite zero forcing"]
        return DiagnosticReport("thm411_v_offset", status, meas, n,
                                {"tol": tol}, notes)
    return DiagnosticReport("thm411_v_offset", "inconclusive", meas, n,
                            {"tol": tol}, ["measurement-only regime (nonzero forcing)"])


def check_permanence(traj: Trajectory, fam: MapFamily | None,
                     k0: int = 0) -> DiagnosticReport:
    """Finiteness of the trajectory and its mapped images beyond index k0."""
    if traj.steps <= k0:
        raise ValueError("horizon must exceed k0")
    if traj.diverged:
        return DiagnosticReport("thm42_i_permanence", "fail",
                                {"steps_completed": traj.steps}, traj.steps, {},
                                ["divergence event"])
    norms = np.linalg.norm(traj.xs[k0:], axis=1)
    d0 = float(np.max(norms))
    if fam is not None:
        mapped = np.array([np.linalg.norm(fam(k, traj.xs[k]))
                           for k in range(k0, traj.steps + 1)])
        d0 = max(d0, float(np.max(mapped)))
    status = "pass" if np.isfinite(d0) and d0 < 1e12 else "fail"
    return DiagnosticReport("thm42_i_permanence", status,
                            {"empirical_diameter": d0, "k0": k0}, traj.steps, {},
                            [] if status == "pass" else ["unbounded trajectory"])


def check_telescoping(traj: Trajectory, f: ContractionMap | None,
                      fam: MapFamily | None, r: float = 0.0,
                      direction=None, tol: float = 1e-8) -> DiagnosticReport:
    """Total displacement equals the sum of recomputed per-step increments."""
    n = len(traj.zs) if traj.zs is not None else traj.steps
    if traj.scheme in ("generalized", "viscosity"):
        u = np.atleast_1d(np.asarray(direction, float)) if direction is not None \
            else np.ones(traj.dim) / np.sqrt(traj.dim)
        incs = [
            traj.alphas[k] * f(traj.xs[k])
            + (traj.betas[k] - 1.0) * traj.xs[k]
            + traj.gammas[k] * fam(k, traj.xs[k])
            + (traj.phi_terms[k] + traj.deltas[k] * r) * u
            for k in range(n)]
    else:
        incs = [(traj.betas[k] - 1.0) * traj.xs[k]
                + (1.0 - traj.betas[k]) * traj.zs[k] for k in range(n)]
    total = np.sum(np.array(incs), axis=0)
    gap = float(np.linalg.norm((traj.xs[n] - traj.xs[0]) - total))
    status = "pass" if gap <= tol else "fail"
    return DiagnosticReport("thm42_iii_telescoping", status,
                            {"telescoping_gap": gap}, traj.steps, {"tol": tol},
                            [] if status == "pass" else ["identity violated"])
