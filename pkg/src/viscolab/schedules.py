"""Scalar coefficient sequences and their finite-horizon conformance checks.

A :class:`Schedule` is an immutable rule ``k -> value`` from one of a few
closed-form families (or an explicit table), carrying declared asymptotic
traits that can be certified symbolically from the closed form. A
:class:`ScheduleSet` bundles the coefficient sequences of the generalized
iteration; the fourth coefficient is always derived from the non-unity-sum
constraint, never user-supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .report import DiagnosticReport

KINDS = ("constant", "power-law", "one-minus-power", "geometric", "table")

TRAITS = frozenset({
    "tends-to-zero",
    "sum-diverges",
    "sum-converges",
    "liminf-positive",
    "limsup-below-one",
})


@dataclass(frozen=True)
class Schedule:
    """One scalar coefficient sequence.

    kinds:
      - ``constant``: c
      - ``power-law``: c * (k + 1 + shift)^(-a), clipped to [0, 1]
      - ``one-minus-power``: 1 - c * (k + 1 + shift)^(-a), clipped to [0, 1]
      - ``geometric``: c * q^k
      - ``table``: explicit finite list of values
    """

    kind: str
    c: float = 0.0
    a: float = 1.0
    q: float = 0.5
    shift: int = 0
    table: tuple = ()
    traits: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "table" and not self.table:
            raise ValueError("table schedule needs at least one value")
        bad = set(self.traits) - TRAITS
        if bad:
            raise ValueError(f"unknown traits {sorted(bad)}")
        object.__setattr__(self, "traits", frozenset(self.traits))
        object.__setattr__(self, "table", tuple(float(v) for v in self.table))

    def __call__(self, k: int) -> float:
        if k < 0:
            raise ValueError("schedule index must be nonnegative")
        if self.kind == "constant":
            return float(self.c)
        if self.kind == "power-law":
            return float(np.clip(self.c * (k + 1 + self.shift) ** (-self.a), 0.0, 1.0))
        if self.kind == "one-minus-power":
            return float(np.clip(1.0 - self.c * (k + 1 + self.shift) ** (-self.a), 0.0, 1.0))
        if self.kind == "geometric":
            return float(self.c * self.q ** k)
        if k >= len(self.table):
            raise IndexError(f"index {k} beyond table horizon {len(self.table) - 1}")
        return self.table[k]

    def values(self, n: int) -> np.ndarray:
        """First ``n`` values (k = 0 .. n-1) as an array."""
        ks = np.arange(n, dtype=float)
        if self.kind == "constant":
            return np.full(n, float(self.c))
        if self.kind == "power-law":
            return np.clip(self.c * (ks + 1 + self.shift) ** (-self.a), 0.0, 1.0)
        if self.kind == "one-minus-power":
            return np.clip(1.0 - self.c * (ks + 1 + self.shift) ** (-self.a), 0.0, 1.0)
        if self.kind == "geometric":
            return self.c * self.q ** ks
        if n > len(self.table):
            raise IndexError(f"horizon {n - 1} beyond table horizon {len(self.table) - 1}")
        return np.array(self.table[:n])

    def complement(self) -> "Schedule":
        """Closed form of ``1 - value``, where it stays within a known family."""
        if self.kind == "constant":
            return Schedule("constant", c=1.0 - self.c)
        if self.kind == "one-minus-power":
            return Schedule("power-law", c=self.c, a=self.a, shift=self.shift)
        if self.kind == "power-law":
            return Schedule("one-minus-power", c=self.c, a=self.a, shift=self.shift)
        raise ValueError(f"no closed-form complement for kind {self.kind!r}")


def eval_schedule(s: Schedule, k: int) -> float:
    """Value of the schedule at index ``k``; pure and deterministic."""
    return s(k)


def trait_holds(s: Schedule, trait: str):
    """Certify a trait from the closed form.

    Returns True/False for the closed-form families, None for tables (which
    carry no asymptotic information beyond their horizon).
    """
    if trait not in TRAITS:
        raise ValueError(f"unknown trait {trait!r}")
    if s.kind == "table":
        return None
    if s.kind == "constant":
        return {
            "tends-to-zero": s.c == 0.0,
            "sum-diverges": s.c > 0.0,
            "sum-converges": s.c == 0.0,
            "liminf-positive": s.c > 0.0,
            "limsup-below-one": s.c < 1.0,
        }[trait]
    if s.kind == "power-law":
        zero = s.c <= 0.0
        return {
            "tends-to-zero": zero or s.a > 0.0,
            "sum-diverges": not zero and s.a <= 1.0,
            "sum-converges": zero or s.a > 1.0,
            "liminf-positive": not zero and s.a <= 0.0,
            # values are decreasing for a > 0, so the sup is the first one
            "limsup-below-one": zero or (s.a >= 0.0 and s(0) < 1.0),
        }[trait]
    if s.kind == "one-minus-power":
        # values increase to 1 for c > 0, a > 0
        rises = s.c > 0.0 and s.a > 0.0
        return {
            "tends-to-zero": not rises and s.c >= 1.0 and s.a <= 0.0,
            "sum-diverges": True if rises else s(0) > 0.0,
            "sum-converges": False if rises else s(0) == 0.0,
            "liminf-positive": rises or s(0) > 0.0,
            "limsup-below-one": False if rises else s(0) < 1.0,
        }[trait]
    # geometric
    zero = s.c == 0.0
    return {
        "tends-to-zero": zero or abs(s.q) < 1.0,
        "sum-diverges": s.c > 0.0 and s.q >= 1.0,
        "sum-converges": zero or abs(s.q) < 1.0,
        "liminf-positive": s.c > 0.0 and s.q >= 1.0,
        "limsup-below-one": zero or (s.q <= 1.0 and s.c < 1.0),
    }[trait]


@dataclass(frozen=True)
class ScheduleSet:
    """All coefficient sequences of the generalized scheme.

    The third averaging coefficient is derived from the constraint
    ``alpha + beta + gamma + delta = 1 + (1 - beta) * epsilon`` and is not a
    stored field; see :func:`derive_gamma`.
    """

    alpha: Schedule
    beta: Schedule
    delta: Schedule
    epsilon: Schedule
    v: tuple = ()
    s: Schedule = Schedule("constant", c=0.0)
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(self.v))

    def n_pairs_at(self, k: int) -> int:
        return int(round(self.s(k)))


def derive_gamma(sset: ScheduleSet, k: int) -> float:
    """Coefficient of the map-family term, from the non-unity-sum constraint."""
    beta = sset.beta(k)
    return 1.0 + (1.0 - beta) * sset.epsilon(k) - sset.alpha(k) - beta - sset.delta(k)


def gamma_values(sset: ScheduleSet, n: int) -> np.ndarray:
    beta = sset.beta.values(n)
    return 1.0 + (1.0 - beta) * sset.epsilon.values(n) \
        - sset.alpha.values(n) - beta - sset.delta.values(n)


def _trait_check(name, sched, trait, failures, notes):
    held = trait_holds(sched, trait)
    if held is None:
        notes.append(f"{name}:{trait} horizon-limited (table schedule)")
    elif trait not in sched.traits:
        failures.append(f"{name} missing declared trait {trait}")
    elif not held:
        failures.append(f"{name} trait {trait} inconsistent with closed form")


def validate_assumptions(sset: ScheduleSet, horizon: int, tol: float = 1e-3) -> DiagnosticReport:
    """Finite-horizon plus symbolic conformance check of the coefficient set.

    A failing set is reported non-conforming but can still be run (useful for
    negative controls).
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    n = horizon + 1
    alpha = sset.alpha.values(n)
    beta = sset.beta.values(n)
    delta = sset.delta.values(n)
    eps = sset.epsilon.values(n)
    gamma = gamma_values(sset, n)
    tail = max(2, n // 5)

    failures: list = []
    notes: list = []

    # range membership over the horizon
    if np.any(alpha < 0) or np.any(alpha > 1):
        failures.append("alpha outside [0,1]")
    if np.any(delta < 0) or np.any(delta > 1):
        failures.append("delta outside [0,1]")
    if np.any(gamma < 0) or np.any(gamma > 1):
        failures.append("derived gamma outside [0,1]")
    if np.any(beta <= 0) or np.any(beta >= 1):
        failures.append("beta outside (0,1)")
    for i, vi in enumerate(sset.v):
        if np.any(vi.values(n) < 0):
            failures.append(f"v[{i}] negative")
    if len(sset.v) < max(0, int(np.max(sset.s.values(n)))):
        failures.append("companion term count exceeds configured pair count")

    # asymptotic traits, certified symbolically from the closed forms
    _trait_check("alpha", sset.alpha, "tends-to-zero", failures, notes)
    _trait_check("alpha", sset.alpha, "sum-diverges", failures, notes)
    _trait_check("delta", sset.delta, "tends-to-zero", failures, notes)
    _trait_check("delta", sset.delta, "sum-converges", failures, notes)
    _trait_check("beta", sset.beta, "liminf-positive", failures, notes)
    _trait_check("beta", sset.beta, "limsup-below-one", failures, notes)

    # epsilon: bounded, vanishing, and pointwise above 1/(beta - 1)
    if not np.all(np.isfinite(eps)):
        failures.append("epsilon not finite")
    if np.max(np.abs(eps[-tail:])) > tol:
        failures.append("epsilon tail above tolerance")
    with np.errstate(divide="ignore"):
        if np.any(eps < np.where(beta == 1.0, -np.inf, 1.0 / (beta - 1.0))):
            failures.append("epsilon below 1/(beta-1) bound")

    # liminf gamma > 0, corroborated on the tail window
    if np.min(gamma[-tail:]) <= 0:
        failures.append("gamma tail not bounded away from zero")

    meas = {
        "alpha_partial_sum": float(np.sum(alpha)),
        "delta_partial_sum": float(np.sum(delta)),
        "beta_tail_min": float(np.min(beta[-tail:])),
        "beta_tail_max": float(np.max(beta[-tail:])),
        "gamma_tail_min": float(np.min(gamma[-tail:])),
        "epsilon_tail_max": float(np.max(np.abs(eps[-tail:]))),
        "sum_residual_max": float(np.max(np.abs(
            alpha + beta + gamma + delta - (1.0 + (1.0 - beta) * eps)))),
    }
    return DiagnosticReport(
        check_id="assumptions_4_1",
        status="pass" if not failures else "fail",
        measurements=meas,
        horizon=horizon,
        tolerances={"tol": tol},
        notes=failures + notes,
    )
