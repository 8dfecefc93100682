"""Self-maps on a convex compact region of R^m and their sampled estimators.

The means-indexed map family of the iteration is concretized as a
one-parameter perturbation ``T_k(x) = T_inf(x) + eta_k * G(x)`` of a limit
map, which realizes (or deliberately violates) asymptotic nonexpansiveness,
vanishing drift and the diminishing-expansion condition by parameter choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .schedules import Schedule


class DegenerateSampleError(RuntimeError):
    """All sampled pairs were (numerically) identical."""


class NonFiniteImageError(RuntimeError):
    """A map produced a non-finite point."""


@dataclass(frozen=True)
class AmbientSpace:
    """Euclidean R^m with a closed ball or axis-aligned box region."""

    dim: int
    kind: str = "ball"  # ball | box
    center: np.ndarray | None = None
    radius: float = 1.0
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.kind == "ball":
            c = np.zeros(self.dim) if self.center is None else np.asarray(self.center, float)
            if c.shape != (self.dim,):
                raise ValueError("center has wrong dimension")
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            object.__setattr__(self, "center", c)
        elif self.kind == "box":
            lo = np.asarray(self.lower, float)
            hi = np.asarray(self.upper, float)
            if lo.shape != (self.dim,) or hi.shape != (self.dim,) or np.any(hi <= lo):
                raise ValueError("box bounds empty or wrong dimension")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.upper - self.lower))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "box":
            return rng.uniform(self.lower, self.upper, size=(n, self.dim))
        dirs = rng.normal(size=(n, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = self.radius * rng.uniform(size=(n, 1)) ** (1.0 / self.dim)
        return self.center + dirs * radii

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, float)
        if self.kind == "ball":
            return np.linalg.norm(x - self.center) <= self.radius + tol
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.kind == "box":
            return np.clip(x, self.lower, self.upper)
        d = x - self.center
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return x
        return self.center + d * (self.radius / nrm)


@dataclass(frozen=True)
class AffineMap:
    """x -> A @ x + b, with exact Lipschitz constant = spectral norm of A."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, float))
        b = np.atleast_1d(np.asarray(self.offset, float))
        if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise ValueError("matrix/offset shapes inconsistent")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, float) + self.offset

    @property
    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class ClipMap:
    """Componentwise projection onto a box; nonexpansive with constant 1."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.atleast_1d(np.asarray(self.lower, float)))
        object.__setattr__(self, "upper", np.atleast_1d(np.asarray(self.upper, float)))

    def __call__(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, float), self.lower, self.upper)

    @property
    def lipschitz(self) -> float:
        return 1.0


@dataclass(frozen=True)
class ContractionMap:
    """A map with a declared Lipschitz bound strictly below 1."""

    fn: Callable
    lipschitz_bound: float

    def __post_init__(self):
        if not 0.0 <= self.lipschitz_bound < 1.0:
            raise ValueError("contraction bound must lie in [0,1)")

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(x), float)

    @classmethod
    def affine(cls, matrix, offset) -> "ContractionMap":
        m = AffineMap(matrix, offset)
        return cls(fn=m, lipschitz_bound=m.lipschitz)


@dataclass(frozen=True)
class MapFamily:
    """T_k(x) = limit(x) + decay(k) * perturbation(x)."""

    limit: Callable
    limit_lipschitz: float
    perturbation: Callable | None = None
    perturbation_lipschitz: float = 0.0
    decay: Schedule = Schedule("constant", c=0.0)

    def __call__(self, k: int, x) -> np.ndarray:
        y = np.asarray(self.limit(x), float)
        if self.perturbation is not None:
            y = y + self.decay(k) * np.asarray(self.perturbation(x), float)
        return y

    def lipschitz_at(self, k: int) -> float:
        return self.limit_lipschitz + abs(self.decay(k)) * self.perturbation_lipschitz

    @classmethod
    def from_maps(cls, limit, perturbation=None, decay=None) -> "MapFamily":
        lips = getattr(limit, "lipschitz", None)
        if lips is None:
            raise ValueError("limit map needs a known Lipschitz constant")
        plips = 0.0 if perturbation is None else getattr(perturbation, "lipschitz", None)
        if plips is None:
            raise ValueError("perturbation map needs a known Lipschitz constant")
        return cls(limit=limit, limit_lipschitz=lips,
                   perturbation=perturbation, perturbation_lipschitz=plips,
                   decay=decay if decay is not None else Schedule("constant", c=0.0))


def _finite(y, what: str) -> np.ndarray:
    y = np.asarray(y, float)
    if not np.all(np.isfinite(y)):
        raise NonFiniteImageError(f"{what} produced a non-finite point")
    return y


def apply_contraction(f: ContractionMap, x) -> np.ndarray:
    return _finite(f(x), "contraction")


def apply_family(fam: MapFamily, k: int, x) -> np.ndarray:
    return _finite(fam(k, x), "map family")


def estimate_lipschitz(map_fn, space: AmbientSpace, n_samples: int = 512,
                       seed: int = 0) -> float:
    """Max difference quotient over all sampled point pairs in the region.

    Deterministic given the seed; a lower bound on the true constant.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    pts = space.sample(rng, n_samples)
    imgs = np.stack([np.asarray(map_fn(p), float) for p in pts])
    iu, ju = np.triu_indices(n_samples, k=1)
    dn = np.linalg.norm(pts[iu] - pts[ju], axis=1)
    keep = dn > 1e-12
    if not np.any(keep):
        raise DegenerateSampleError("all sampled pairs are identical")
    num = np.linalg.norm(imgs[iu] - imgs[ju], axis=1)
    return float(np.max(num[keep] / dn[keep]))


def family_drift(fam: MapFamily, k: int, space: AmbientSpace,
                 n_samples: int = 512, seed: int = 0) -> float:
    """Sampled sup over the region of ||T_{k+1}(x) - T_k(x)||."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    pts = space.sample(rng, n_samples)
    diffs = [np.linalg.norm(fam(k + 1, p) - fam(k, p)) for p in pts]
    return float(np.max(diffs))


def check_assumption_4_1_8(fam: MapFamily, alpha: Schedule, delta: Schedule,
                           ks, space: AmbientSpace, n_samples: int = 512,
                           seed: int = 0):
    """Diminishing-expansion quotient of the family against min(alpha, delta).

    Returns ``(max_quotient, skipped)`` where skipped lists the indices whose
    denominator min(alpha_k, delta_k) was zero.
    """
    rng = np.random.default_rng(seed)
    pts = space.sample(rng, n_samples)
    iu, ju = np.triu_indices(n_samples, k=1)
    dn = np.linalg.norm(pts[iu] - pts[ju], axis=1)
    keep = dn > 1e-12
    worst = -np.inf
    skipped = []
    for k in ks:
        denom = min(alpha(k), delta(k))
        if denom <= 0.0:
            skipped.append(k)
            continue
        imgs = np.stack([fam(k, p) for p in pts])
        num = np.linalg.norm(imgs[iu] - imgs[ju], axis=1) - dn
        worst = max(worst, float(np.max(num[keep] / denom)))
    if not np.isfinite(worst):
        raise ValueError("every index was skipped; no quotient computed")
    return worst, skipped
