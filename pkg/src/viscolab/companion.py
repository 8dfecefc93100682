"""The auxiliary metric-space iteration that forces the main scheme.

A weak-contraction self-map Q is iterated on a separate space W = R^n; the
delayed distances of its orbit feed the nondecreasing function pairs whose
weighted sum enters the main iteration as a scalar forcing term. W is
deliberately a different object from the ambient space of the main scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mappings import NonFiniteImageError
from .report import DiagnosticReport
from .schedules import Schedule


@dataclass(frozen=True)
class PhiPair:
    """A (phi, psi) pair: continuous, nondecreasing, vanishing only at 0."""

    phi: Callable
    psi: Callable
    name: str = ""

    @classmethod
    def linear(cls, phi_slope: float, psi_slope: float) -> "PhiPair":
        return cls(phi=lambda t: phi_slope * t, psi=lambda t: psi_slope * t,
                   name=f"linear({phi_slope:g},{psi_slope:g})")

    @classmethod
    def power(cls, phi_coeff: float, phi_exp: float,
              psi_coeff: float, psi_exp: float) -> "PhiPair":
        return cls(phi=lambda t: phi_coeff * t ** phi_exp,
                   psi=lambda t: psi_coeff * t ** psi_exp,
                   name=f"power({phi_coeff:g},{phi_exp:g};{psi_coeff:g},{psi_exp:g})")


def banach_pair(modulus: float) -> PhiPair:
    """Pair under which the weak-contraction inequality reduces to the
    ordinary contraction d(Qy,Qz) <= modulus * d(y,z)."""
    return PhiPair.linear(1.0, 1.0 - modulus)


@dataclass(frozen=True)
class MetricSystem:
    """The companion complete metric space (W, d) with its self-map Q."""

    dim: int
    q: Callable
    pairs: tuple
    omega0: np.ndarray
    p: int = 1
    metric: str = "euclidean"  # euclidean | weighted-max
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("delay must be a positive integer")
        if self.metric not in ("euclidean", "weighted-max"):
            raise ValueError(f"unknown metric {self.metric!r}")
        w0 = np.atleast_1d(np.asarray(self.omega0, float))
        if w0.shape != (self.dim,):
            raise ValueError("initial point has wrong dimension")
        object.__setattr__(self, "omega0", w0)
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if self.metric == "weighted-max":
            w = np.ones(self.dim) if self.weights is None \
                else np.asarray(self.weights, float)
            if w.shape != (self.dim,) or np.any(w <= 0):
                raise ValueError("weights must be positive, one per component")
            object.__setattr__(self, "weights", w)

    def distance(self, y, z) -> float:
        d = np.asarray(y, float) - np.asarray(z, float)
        if self.metric == "euclidean":
            return float(np.linalg.norm(d))
        return float(np.max(self.weights * np.abs(d)))


@dataclass
class OmegaHistory:
    """Ring buffer of the last p+1 orbit points, pre-filled with omega0.

    Pre-filling makes the delayed distance defined from k = 0; it vanishes
    identically when omega0 is a fixed point of Q.
    """

    buffer: list = field(default_factory=list)
    k: int = 0

    @classmethod
    def start(cls, sys: MetricSystem) -> "OmegaHistory":
        return cls(buffer=[sys.omega0.copy() for _ in range(sys.p + 1)], k=0)

    @property
    def current(self) -> np.ndarray:
        return self.buffer[-1]

    @property
    def delayed(self) -> np.ndarray:
        return self.buffer[0]


def step_omega(sys: MetricSystem, hist: OmegaHistory) -> OmegaHistory:
    """Advance the companion orbit one step: append Q(omega_k)."""
    nxt = np.asarray(sys.q(hist.current), float)
    if not np.all(np.isfinite(nxt)):
        raise NonFiniteImageError("companion map produced a non-finite point")
    hist.buffer.append(nxt)
    hist.buffer.pop(0)
    hist.k += 1
    return hist


def phi_forcing(sys: MetricSystem, hist: OmegaHistory, k: int,
                v: tuple, s_k: int) -> float:
    """Weighted sum of the pair functions of the delayed orbit distance.

    Zero when ``s_k`` is zero (the sum is dropped).
    """
    if s_k == 0:
        return 0.0
    if s_k > len(sys.pairs):
        raise ValueError(f"s_k={s_k} exceeds configured pair count {len(sys.pairs)}")
    if s_k > len(v):
        raise ValueError(f"s_k={s_k} exceeds number of weight schedules {len(v)}")
    dist = sys.distance(hist.current, hist.delayed)
    return float(sum(v[i](k) * sys.pairs[i].phi(dist) for i in range(s_k)))


def validate_weak_contraction(sys: MetricSystem, n_samples: int = 256,
                              seed: int = 0, tol: float = 1e-9) -> DiagnosticReport:
    """Sampled check of the weak-contraction inequality and the pair axioms.

    Samples point pairs in a bounded region of W and reports the maximum
    violation of phi(d(Qy,Qz)) <= phi(d(y,z)) - psi(d(y,z)) over all pairs.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    radius = max(1.0, 2.0 * float(np.linalg.norm(sys.omega0)))
    ys = rng.uniform(-radius, radius, size=(n_samples, sys.dim))
    zs = rng.uniform(-radius, radius, size=(n_samples, sys.dim))

    failures = []
    notes = []
    max_viol = 0.0
    for y, z in zip(ys, zs):
        d = sys.distance(y, z)
        dq = sys.distance(sys.q(y), sys.q(z))
        for pair in sys.pairs:
            viol = pair.phi(dq) - (pair.phi(d) - pair.psi(d))
            max_viol = max(max_viol, viol)
    if max_viol > tol:
        failures.append("weak-contraction inequality violated")

    # pair axioms on a sampled grid
    grid = np.linspace(0.0, 2.0 * radius, 101)
    for i, pair in enumerate(sys.pairs):
        for tag, fn in (("phi", pair.phi), ("psi", pair.psi)):
            vals = np.array([fn(t) for t in grid])
            if vals[0] != 0.0:
                failures.append(f"pair[{i}].{tag}(0) != 0")
            if np.any(vals[1:] <= 0.0):
                failures.append(f"pair[{i}].{tag} vanishes off zero")
            if np.any(np.diff(vals) < -tol):
                failures.append(f"pair[{i}].{tag} not nondecreasing")

    return DiagnosticReport(
        check_id="assumption_4_1_9",
        status="pass" if not failures else "fail",
        measurements={"max_violation": max_viol, "sample_radius": radius},
        tolerances={"tol": tol},
        notes=failures + notes,
    )


def companion_distance_series(sys: MetricSystem, horizon: int) -> np.ndarray:
    """d(omega_k, omega_{k-p}) for k = p .. horizon, iterating Q from omega0."""
    if horizon <= sys.p:
        raise ValueError("horizon must exceed the delay")
    orbit = [sys.omega0]
    for _ in range(horizon):
        nxt = np.asarray(sys.q(orbit[-1]), float)
        orbit.append(nxt)
    return np.array([sys.distance(orbit[k], orbit[k - sys.p])
                     for k in range(sys.p, horizon + 1)])
