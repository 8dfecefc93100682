import numpy as np
import pytest

from viscolab.diagnostics import (FixedPointEstimate, NotConverged,
                                  check_offset_series, check_permanence,
                                  check_residual_vanishes, check_suzuki,
                                  check_telescoping, check_thm21_i,
                                  check_thm21_ii, check_thm21_iv,
                                  check_variational_inequality, check_venter,
                                  estimate_fixed_point)
from viscolab.iterate import (SchemeConfig, Trajectory, run, run_coupled,
                              z_alternating, z_ell_driven, z_from_schedule,
                              z_proportional)
from viscolab.mappings import (AffineMap, AmbientSpace, ClipMap,
                               ContractionMap, MapFamily)
from viscolab.schedules import Schedule, ScheduleSet


def _basic(beta, z_provider, x0=1.0, horizon=500):
    return run(SchemeConfig(kind="basic", horizon=horizon, x0=[x0],
                            beta=beta, z_provider=z_provider))


def _traj(xs, zs, betas=None, scheme="basic"):
    xs = np.asarray(xs, float).reshape(-1, 1)
    zs = np.asarray(zs, float).reshape(-1, 1)
    betas = np.full(len(zs), 0.5) if betas is None else np.asarray(betas, float)
    return Trajectory(scheme=scheme, xs=xs, zs=zs, betas=betas)


BETA_HALF = Schedule("constant", c=0.5,
                     traits={"liminf-positive", "limsup-below-one"})


def test_band_decrease_passes_on_proportional_companion():
    rep = check_thm21_i(_basic(BETA_HALF, z_proportional(0.5)))
    assert rep.status == "pass"
    assert rep.measurements["coverage"] == 1.0


def test_band_decrease_negative_control():
    # e inside the band but the squared state increases: tampered data
    rep = check_thm21_i(_traj([1.0, 1.2], [0.9]))
    assert rep.status == "fail"


def test_band_decrease_inconclusive_outside_band():
    rep = check_thm21_i(_traj([1.0, 0.5], [6.0]))  # e = -5 with x > 0
    assert rep.status == "inconclusive"


def test_ratio_band_passes_and_boundary_case_is_exact():
    rep = check_thm21_ii(_basic(BETA_HALF, z_ell_driven(ell=0.3, z0=0.0)))
    assert rep.status == "pass"
    # boundary ratio beta + 1: squared error exactly conserved
    boundary = _basic(BETA_HALF, z_ell_driven(ell=1.5, z0=0.0), horizon=100)
    e = boundary.es[:, 0]
    assert np.max(np.abs(e ** 2 - e[0] ** 2)) == 0.0
    rep = check_thm21_ii(boundary)
    assert rep.status == "pass"
    assert rep.measurements["max_sq_increase"] <= 0.0


def test_ratio_band_negative_control():
    # ratio 1.4 lies in the band for beta = 0.5, but x1 is tampered upward
    rep = check_thm21_ii(_traj([1.0, 3.0, 0.0], [0.0, 1.4]))
    assert rep.status == "fail"


def test_boundedness_case1_and_negative_control():
    traj = _basic(Schedule("constant", c=0.9),
                  z_from_schedule(Schedule("geometric", c=1.0, q=0.5)))
    rep = check_thm21_iv(traj, 1, {})
    assert rep.status == "pass"
    bad = _traj([1.0, 1e6], [0.5], betas=[0.9])
    assert check_thm21_iv(bad, 1, {}).status == "fail"


def test_boundedness_case2_and_negative_control():
    traj = _basic(BETA_HALF, z_from_schedule(Schedule("constant", c=1.0)))
    rep = check_thm21_iv(traj, 2, {"beta": 0.5})
    assert rep.status == "pass"
    assert rep.measurements["sup_abs_x"] <= rep.measurements["analytic_bound"]
    bad = _traj([1.0, 1e6], [1.0])
    assert check_thm21_iv(bad, 2, {"beta": 0.5}).status == "fail"


def test_boundedness_case3_decay_and_negative_control():
    traj = _basic(Schedule("constant", c=0.3),
                  z_alternating(0.9, proportional=True), horizon=800)
    rep = check_thm21_iv(traj, 3, {"beta": 0.3, "beta0": 1.0})
    assert rep.status == "pass"
    bad = _traj([1.0, 2.0], [0.5])
    assert check_thm21_iv(bad, 3, {"beta": 0.3, "beta0": 1.0}).status == "fail"
    # hypothesis violation is inconclusive, not a failure
    wild = _traj([1.0, 0.5], [5.0])
    assert check_thm21_iv(wild, 3, {"beta": 0.3, "beta0": 1.0}).status == \
        "inconclusive"
    with pytest.raises(ValueError):
        check_thm21_iv(traj, 4, {})


VENTER_BETA = Schedule("one-minus-power", c=1.0, a=1.0, shift=1)


def test_venter_pass_and_negative_control():
    good = _basic(VENTER_BETA,
                  z_from_schedule(Schedule("power-law", c=1.0, a=1.0)),
                  horizon=20000)
    rep = check_venter(good, VENTER_BETA, tol=1e-2, min_divergence_sum=5.0)
    assert rep.status == "pass"
    assert np.min(good.xs) >= 0.0  # positivity is preserved along the way
    bad = _basic(VENTER_BETA, z_from_schedule(Schedule("constant", c=1.0)),
                 horizon=20000)
    rep = check_venter(bad, VENTER_BETA, tol=1e-2, min_divergence_sum=5.0)
    assert rep.status == "fail"


def test_venter_inconclusive_cases():
    good = _basic(VENTER_BETA,
                  z_from_schedule(Schedule("power-law", c=1.0, a=1.0)),
                  horizon=200)
    # divergent-sum evidence too thin at a short horizon
    rep = check_venter(good, VENTER_BETA, min_divergence_sum=20.0)
    assert rep.status == "inconclusive"
    # traits not certifiable for a table schedule
    table = Schedule("table", table=tuple(VENTER_BETA.values(201)))
    assert check_venter(good, table).status == "inconclusive"
    negative = _basic(VENTER_BETA, z_from_schedule(
        Schedule("table", table=(-1.0,) * 201)), horizon=200)
    assert check_venter(negative, VENTER_BETA).status == "inconclusive"


def test_suzuki_pass_fail_inconclusive():
    good = _basic(BETA_HALF, z_proportional(0.5))
    assert check_suzuki(good, BETA_HALF).status == "pass"
    beta08 = Schedule("constant", c=0.8,
                      traits={"liminf-positive", "limsup-below-one"})
    adversarial = _basic(beta08, z_alternating(0.25), horizon=2000)
    rep = check_suzuki(adversarial, beta08)
    assert rep.status == "fail"
    assert rep.measurements["limsup_estimate"] >= 0.4
    vanishing = Schedule("power-law", c=1.0, a=0.5, shift=1)
    assert check_suzuki(good, vanishing).status == "inconclusive"


def _generalized(horizon=2000, limit_scale=0.6, r=0.0, delta=None):
    sset = ScheduleSet(
        alpha=Schedule("power-law", c=1.0, a=1.0, shift=3),
        beta=Schedule("constant", c=0.5),
        delta=delta or Schedule("power-law", c=1.0, a=2.0, shift=3),
        epsilon=Schedule("geometric", c=0.1, q=0.5),
        r=r,
    )
    f = ContractionMap.affine([[0.5]], [0.0])
    fam = MapFamily.from_maps(limit=AffineMap([[limit_scale]], [0.0]))
    cfg = SchemeConfig(kind="generalized", horizon=horizon, x0=[1.0],
                       schedules=sset, contraction=f, family=fam)
    return cfg, run(cfg)


def test_residual_chain_pass_and_negative_control():
    cfg, traj = _generalized()
    rep = check_residual_vanishes(traj, cfg.family)
    assert rep.status == "pass"
    # persistent external forcing keeps the residual bounded away from zero
    cfg_bad, bad = _generalized(r=1.0, delta=Schedule("constant", c=0.3))
    rep = check_residual_vanishes(bad, cfg_bad.family)
    assert rep.status == "fail"


def test_fixed_point_estimate():
    cfg, traj = _generalized()
    est = estimate_fixed_point(traj, cfg.family, window=traj.steps // 10)
    assert est.residual <= 1e-6
    assert abs(est.x_star[0]) <= 1e-6
    wobble = _basic(BETA_HALF, z_alternating(0.5))
    fam = MapFamily.from_maps(limit=AffineMap([[0.6]], [0.0]))
    with pytest.raises(NotConverged):
        estimate_fixed_point(wobble, fam, window=10)
    with pytest.raises(ValueError):
        FixedPointEstimate(x_star=np.zeros(1), residual=-1.0, method="x")


def test_variational_inequality_segment():
    space = AmbientSpace(dim=1, kind="ball", center=[0.5], radius=2.0)
    f = ContractionMap.affine([[0.5]], [0.0])
    fam = MapFamily.from_maps(limit=ClipMap([0.0], [1.0]))
    rep = check_variational_inequality([0.0], f, fam, space, n_samples=64)
    assert rep.status == "pass"
    assert rep.measurements["n_distinct"] > 0
    shifted = check_variational_inequality([0.1], f, fam, space, n_samples=64)
    assert shifted.status == "fail"


def test_variational_inequality_vacuous_for_unique_fixed_point():
    space = AmbientSpace(dim=1, kind="ball", radius=2.0)
    f = ContractionMap.affine([[0.5]], [0.0])
    fam = MapFamily.from_maps(limit=AffineMap([[0.6]], [0.0]))
    rep = check_variational_inequality([0.0], f, fam, space, n_samples=32)
    assert rep.status == "pass-vacuous"
    assert rep.ok


def _coupled(r=0.0, delta=None):
    sset = ScheduleSet(
        alpha=Schedule("constant", c=0.1),
        beta=Schedule("constant", c=0.5),
        delta=delta or Schedule("constant", c=0.0),
        epsilon=Schedule("constant", c=0.0),
        r=r,
    )
    f = ContractionMap.affine([[0.5]], [0.0])
    fam = MapFamily.from_maps(limit=AffineMap([[0.6]], [0.0]))
    cfg = SchemeConfig(kind="coupled-aux", horizon=200, x0=[1.0],
                       schedules=sset, contraction=f, family=fam)
    return cfg, *run_coupled(cfg)


def test_offset_series_exact_without_forcing():
    cfg, main, aux = _coupled()
    rep = check_offset_series(main, aux, cfg.schedules.r, cfg.direction)
    assert rep.status == "pass"
    assert rep.measurements["max_deviation"] == 0.0


def test_offset_series_measurement_regime():
    cfg, main, aux = _coupled(r=0.5, delta=Schedule("constant", c=1.0))
    rep = check_offset_series(main, aux, cfg.schedules.r, cfg.direction)
    assert rep.status == "inconclusive"
    assert rep.measurements["final_gap_norm"] > 0.0
    # no smallness claim here, only deterministic reproduction
    cfg2, main2, aux2 = _coupled(r=0.5, delta=Schedule("constant", c=1.0))
    rep2 = check_offset_series(main2, aux2, cfg2.schedules.r, cfg2.direction)
    assert rep2.measurements == rep.measurements


def test_offset_series_rejects_mismatched_lengths():
    cfg, main, aux = _coupled()
    short = Trajectory(scheme="coupled-aux", xs=aux.xs[:-1], zs=aux.zs[:-1],
                       betas=aux.betas[:-1])
    with pytest.raises(ValueError):
        check_offset_series(main, short, 0.0, cfg.direction)


def test_permanence_and_telescoping():
    cfg, traj = _generalized(horizon=500)
    rep = check_permanence(traj, cfg.family, k0=250)
    assert rep.status == "pass"
    assert np.isfinite(rep.measurements["empirical_diameter"])
    with pytest.raises(ValueError):
        check_permanence(traj, cfg.family, k0=500)

    rep = check_telescoping(traj, cfg.contraction, cfg.family,
                            r=cfg.schedules.r, direction=cfg.direction)
    assert rep.status == "pass"
    tampered = Trajectory(scheme=traj.scheme, xs=traj.xs.copy(), zs=traj.zs,
                          phi_terms=traj.phi_terms, alphas=traj.alphas,
                          betas=traj.betas, gammas=traj.gammas,
                          deltas=traj.deltas, epsilons=traj.epsilons)
    tampered.xs[-1] += 1.0
    rep = check_telescoping(tampered, cfg.contraction, cfg.family,
                            r=cfg.schedules.r, direction=cfg.direction)
    assert rep.status == "fail"


def test_permanence_fails_on_divergence():
    cfg, traj = _generalized(limit_scale=3.0, horizon=400)
    assert traj.diverged
    rep = check_permanence(traj, cfg.family, k0=1)
    assert rep.status == "fail"
