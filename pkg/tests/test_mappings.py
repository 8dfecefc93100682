import numpy as np
import pytest

from viscolab.mappings import (AffineMap, AmbientSpace, ClipMap,
                               ContractionMap, MapFamily,
                               NonFiniteImageError, apply_family,
                               check_assumption_4_1_8, estimate_lipschitz,
                               family_drift)
from viscolab.schedules import Schedule


def test_ball_sample_contains_project():
    space = AmbientSpace(dim=3, kind="ball", radius=2.0)
    rng = np.random.default_rng(0)
    pts = space.sample(rng, 200)
    assert pts.shape == (200, 3)
    assert all(space.contains(p) for p in pts)
    far = np.array([10.0, 0.0, 0.0])
    proj = space.project(far)
    assert np.linalg.norm(proj) == pytest.approx(2.0)
    assert space.project([0.1, 0.0, 0.0]).tolist() == [0.1, 0.0, 0.0]
    assert space.diameter == 4.0


def test_box_space():
    space = AmbientSpace(dim=2, kind="box", lower=[0.0, -1.0], upper=[1.0, 1.0])
    rng = np.random.default_rng(1)
    pts = space.sample(rng, 100)
    assert all(space.contains(p) for p in pts)
    assert space.project([5.0, -5.0]).tolist() == [1.0, -1.0]
    with pytest.raises(ValueError):
        AmbientSpace(dim=2, kind="box", lower=[0.0, 0.0], upper=[1.0, 0.0])


def test_affine_map_lipschitz_is_spectral_norm():
    # scaled rotation: exact constant 0.45 * sqrt(2)
    m = AffineMap(matrix=[[0.45, -0.45], [0.45, 0.45]], offset=[1.0, 2.0])
    assert m.lipschitz == pytest.approx(0.6363961030678928, abs=1e-14)
    assert m([1.0, 0.0]).tolist() == [1.45, 2.45]
    with pytest.raises(ValueError):
        AffineMap(matrix=[[1.0, 0.0]], offset=[0.0])


def test_clip_map():
    m = ClipMap(lower=[0.0], upper=[1.0])
    assert m([2.0])[0] == 1.0
    assert m([-3.0])[0] == 0.0
    assert m.lipschitz == 1.0


def test_contraction_bound_range():
    with pytest.raises(ValueError):
        ContractionMap(fn=lambda x: x, lipschitz_bound=1.0)
    f = ContractionMap.affine([[0.5]], [0.0])
    assert f.lipschitz_bound == 0.5
    assert f([2.0])[0] == 1.0


def test_estimate_lipschitz_matches_affine():
    space = AmbientSpace(dim=2, kind="ball", radius=1.0)
    m = AffineMap(matrix=[[0.45, -0.45], [0.45, 0.45]], offset=[0.0, 0.0])
    est = estimate_lipschitz(m, space, n_samples=256, seed=0)
    assert est <= m.lipschitz + 1e-12
    assert est == pytest.approx(m.lipschitz, rel=1e-2)


def test_estimate_lipschitz_deterministic():
    space = AmbientSpace(dim=2, kind="ball", radius=1.0)
    m = AffineMap(matrix=[[0.3, 0.0], [0.0, 0.7]], offset=[0.0, 0.0])
    a = estimate_lipschitz(m, space, n_samples=128, seed=7)
    b = estimate_lipschitz(m, space, n_samples=128, seed=7)
    assert a == b


def test_map_family_evaluation_and_drift():
    limit = AffineMap(matrix=[[0.6]], offset=[0.0])
    pert = AffineMap(matrix=[[0.0]], offset=[1.0])
    fam = MapFamily.from_maps(limit=limit, perturbation=pert,
                              decay=Schedule("power-law", c=1.0, a=1.0))
    assert fam(0, [1.0])[0] == pytest.approx(1.6)
    assert fam(9, [0.0])[0] == pytest.approx(0.1)
    assert fam.lipschitz_at(0) == pytest.approx(0.6)
    space = AmbientSpace(dim=1, kind="ball", radius=1.0)
    # offset-only perturbation: sup drift is 1/(k+1) - 1/(k+2) exactly
    for k in (0, 3, 10):
        expect = 1.0 / ((k + 1) * (k + 2))
        assert family_drift(fam, k, space, n_samples=16, seed=0) == \
            pytest.approx(expect, abs=1e-14)


def test_map_family_without_perturbation():
    fam = MapFamily.from_maps(limit=AffineMap([[0.5]], [0.0]))
    assert fam(100, [2.0])[0] == 1.0
    assert fam.lipschitz_at(100) == 0.5


def test_apply_family_rejects_nonfinite():
    fam = MapFamily(limit=lambda x: np.array([np.inf]), limit_lipschitz=1.0)
    with pytest.raises(NonFiniteImageError):
        apply_family(fam, 0, [1.0])


def test_diminishing_expansion_quotient():
    space = AmbientSpace(dim=1, kind="ball", radius=1.0)
    fam = MapFamily.from_maps(limit=AffineMap([[0.6]], [0.0]))
    alpha = Schedule("power-law", c=1.0, a=1.0)
    delta = Schedule("power-law", c=1.0, a=2.0)
    worst, skipped = check_assumption_4_1_8(fam, alpha, delta, [1, 2, 3],
                                            space, n_samples=32, seed=0)
    # nonexpansive family: numerator is negative at every index
    assert worst < 0
    assert skipped == []
    zero = Schedule("constant", c=0.0)
    with pytest.raises(ValueError):
        check_assumption_4_1_8(fam, zero, zero, [1], space, n_samples=32)
