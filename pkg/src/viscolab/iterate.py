"""Iteration schemes: pure step functions, trajectory runner, closed-form oracle.

Every scheme reduces to the averaged difference form
``x_{k+1} = beta_k x_k + (1 - beta_k) z_k`` for a suitable companion sequence
z_k; the runner records enough per-step state to verify that reduction and
all the theorem-keyed diagnostics downstream.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .companion import MetricSystem, OmegaHistory, phi_forcing, step_omega
from .mappings import AmbientSpace, ContractionMap, MapFamily
from .schedules import Schedule, ScheduleSet, derive_gamma

DIVERGENCE_NORM = 1e12

SCHEME_KINDS = ("basic", "halpern", "viscosity", "generalized", "coupled-aux")

CSV_FIELDS = ("k", "e", "ell", "phi_term", "alpha", "beta", "gamma", "delta",
              "epsilon", "residual")


class Coeffs(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float


def step_basic(beta_k: float, x_k, z_k) -> np.ndarray:
    """The averaged step: convex combination of the state and its companion."""
    return beta_k * np.asarray(x_k, float) + (1.0 - beta_k) * np.asarray(z_k, float)


def error_step(beta_k: float, e_k: float, z_next: float, z_cur: float) -> float:
    """Error recursion e_{k+1} = beta_k e_k - (z_{k+1} - z_k), scalar schemes."""
    return beta_k * e_k - (z_next - z_cur)


def compute_ell(e_k: float, z_cur: float, z_next: float) -> float:
    """Increment ratio (z_{k+1} - z_k) / e_k, with the value 1 when e_k = 0."""
    if e_k == 0.0:
        return 1.0
    return (z_next - z_cur) / e_k


def step_halpern(beta_k: float, x_k, P: Callable) -> np.ndarray:
    """Averaged step against a nonexpansive self-map: z_k = P(x_k)."""
    return step_basic(beta_k, x_k, P(x_k))


def step_generalized(coeffs: Coeffs, f: ContractionMap, fam: MapFamily, k: int,
                     phi_term: float, r: float, x_k, u) -> np.ndarray:
    """One step of the generalized viscosity scheme.

    The scalar forcing (phi sum plus the external delta*r term) is broadcast
    along the unit direction ``u``; in one dimension this is the scalar
    equation verbatim.
    """
    x_k = np.asarray(x_k, float)
    fx = f(x_k)
    tx = fam(k, x_k)
    return (coeffs.alpha * fx + coeffs.beta * x_k) + coeffs.gamma * tx \
        + (phi_term + coeffs.delta * r) * u


def z_of_generalized(coeffs: Coeffs, f: ContractionMap, fam: MapFamily, k: int,
                     phi_term: float, r: float, x_k, u) -> np.ndarray:
    """Companion sequence putting the generalized step in averaged form."""
    if coeffs.beta >= 1.0:
        raise ValueError("z is only defined for beta < 1")
    x_k = np.asarray(x_k, float)
    fx = f(x_k)
    tx = fam(k, x_k)
    return (coeffs.alpha * fx + coeffs.gamma * tx
            + (phi_term + coeffs.delta * r) * u) / (1.0 - coeffs.beta)


def step_coupled_aux(beta_k: float, x_k, alpha_k: float, gamma_k: float,
                     f: ContractionMap, fam: MapFamily, k: int, xbar_k) -> np.ndarray:
    """Auxiliary scheme step; the averaged term uses the MAIN iterate x_k."""
    xbar_k = np.asarray(xbar_k, float)
    return (alpha_k * f(xbar_k) + beta_k * np.asarray(x_k, float)) \
        + gamma_k * fam(k, xbar_k)


def closed_form_solution(betas, zs, x0, k: int) -> np.ndarray:
    """Variation-of-constants form of the averaged recursion after k steps.

    Computed from products and weighted sums only, independently of the
    step-by-step runner; serves as its oracle.
    """
    betas = np.asarray(betas, float)
    x0 = np.atleast_1d(np.asarray(x0, float))
    if len(betas) < k or len(zs) < k:
        raise ValueError("coefficient/companion lists do not cover 0..k-1")
    out = np.prod(betas[:k]) * x0
    for j in range(k):
        w = np.prod(betas[j + 1:k]) * (1.0 - betas[j])
        out = out + w * np.atleast_1d(np.asarray(zs[j], float))
    return out


@dataclass
class Trajectory:
    """Recorded iterates and per-step state of one scheme run."""

    scheme: str
    xs: np.ndarray                      # (steps+1, m)
    zs: np.ndarray | None = None        # (steps, m)
    phi_terms: np.ndarray | None = None
    alphas: np.ndarray | None = None
    betas: np.ndarray | None = None
    gammas: np.ndarray | None = None
    deltas: np.ndarray | None = None
    epsilons: np.ndarray | None = None
    residuals: np.ndarray | None = None  # ||T_k(x_k) - x_k||
    diverged: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.xs) - 1

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def es(self) -> np.ndarray:
        if self.zs is None:
            raise ValueError("trajectory has no companion sequence")
        return self.xs[: len(self.zs)] - self.zs

    @property
    def ells(self) -> np.ndarray:
        """Increment ratios, scalar schemes only; length steps - 1."""
        if self.dim != 1:
            raise ValueError("increment ratios are defined for scalar schemes")
        e = self.es[:, 0]
        z = self.zs[:, 0]
        return np.array([compute_ell(e[k], z[k], z[k + 1])
                         for k in range(len(z) - 1)])

    def to_csv(self, path) -> None:
        """One row per iteration, written atomically; header mandatory."""
        m = self.dim
        header = ["k"] + [f"x{i}" for i in range(m)] + [f"z{i}" for i in range(m)] \
            + list(CSV_FIELDS[1:])
        fmt = lambda v: f"{v:.17g}"
        nz = 0 if self.zs is None else len(self.zs)
        ells = self.ells if (self.dim == 1 and nz > 1) else None

        def col(arr, k):
            return fmt(arr[k]) if arr is not None and k < len(arr) else ""

        tmp = str(path) + ".tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(self.steps + 1):
                row = [str(k)] + [fmt(v) for v in self.xs[k]]
                if k < nz:
                    row += [fmt(v) for v in self.zs[k]]
                    e = self.xs[k] - self.zs[k]
                    row.append(fmt(e[0]) if m == 1 else fmt(np.linalg.norm(e)))
                else:
                    row += [""] * m + [""]
                row.append(fmt(ells[k]) if ells is not None and k < len(ells) else "")
                row += [col(self.phi_terms, k), col(self.alphas, k), col(self.betas, k),
                        col(self.gammas, k), col(self.deltas, k), col(self.epsilons, k),
                        col(self.residuals, k)]
                w.writerow(row)
        os.replace(tmp, str(path))


@dataclass
class SchemeConfig:
    """Everything needed to run one scheme for a fixed horizon."""

    kind: str
    horizon: int
    x0: np.ndarray
    space: AmbientSpace | None = None
    schedules: ScheduleSet | None = None
    beta: Schedule | None = None          # basic / halpern shortcut
    z_provider: Callable | None = None    # basic: (k, x_k) -> z_k
    halpern_map: Callable | None = None
    contraction: ContractionMap | None = None
    family: MapFamily | None = None
    companion: MetricSystem | None = None
    direction: np.ndarray | None = None
    xbar0: np.ndarray | None = None
    aux_beta_uses_main: bool = True
    clamp: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        self.x0 = np.atleast_1d(np.asarray(self.x0, float))
        if self.xbar0 is not None:
            self.xbar0 = np.atleast_1d(np.asarray(self.xbar0, float))
        m = len(self.x0)
        if self.direction is None:
            self.direction = np.ones(m) / np.sqrt(m)
        else:
            self.direction = np.atleast_1d(np.asarray(self.direction, float))
        if self.kind in ("viscosity", "generalized", "coupled-aux"):
            if self.schedules is None or self.contraction is None or self.family is None:
                raise ValueError(f"{self.kind} scheme needs schedules, contraction and family")
        if self.kind == "basic" and self.z_provider is None:
            raise ValueError("basic scheme needs a z provider")
        if self.kind == "halpern" and self.halpern_map is None:
            raise ValueError("halpern scheme needs the averaged map")
        if self.beta is None and self.schedules is not None:
            self.beta = self.schedules.beta
        if self.beta is None:
            raise ValueError("a beta schedule is required")

    def coeffs_at(self, k: int) -> Coeffs:
        s = self.schedules
        if s is None:
            b = self.beta(k)
            return Coeffs(0.0, b, 1.0 - b, 0.0, 0.0)
        return Coeffs(s.alpha(k), s.beta(k), derive_gamma(s, k), s.delta(k),
                      s.epsilon(k))


def _blown(x) -> bool:
    return not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM


def run(config: SchemeConfig) -> "Trajectory":
    """Iterate the configured scheme from x0, recording the full trajectory.

    A non-finite or norm-exploding iterate terminates the run early with the
    partial trajectory flagged as diverged. Deterministic for a fixed config.
    """
    if config.kind == "coupled-aux":
        raise ValueError("use run_coupled for the coupled auxiliary scheme")
    n = config.horizon
    m = len(config.x0)
    u = config.direction
    general = config.kind in ("viscosity", "generalized")

    xs = [config.x0.copy()]
    zs, phis, residuals = [], [], []
    co = {name: [] for name in ("alpha", "beta", "gamma", "delta", "epsilon")}
    hist = OmegaHistory.start(config.companion) if (
        general and config.companion is not None) else None
    diverged = False

    x = config.x0.copy()
    for k in range(n):
        c = config.coeffs_at(k)
        if general:
            phi = 0.0
            if hist is not None:
                phi = phi_forcing(config.companion, hist, k, config.schedules.v,
                                  config.schedules.n_pairs_at(k))
            z = z_of_generalized(c, config.contraction, config.family, k, phi,
                                 config.schedules.r, x, u)
            x_next = step_generalized(c, config.contraction, config.family, k,
                                      phi, config.schedules.r, x, u)
            residuals.append(float(np.linalg.norm(config.family(k, x) - x)))
        elif config.kind == "halpern":
            phi = 0.0
            z = np.atleast_1d(np.asarray(config.halpern_map(x), float))
            x_next = step_basic(c.beta, x, z)
        else:
            phi = 0.0
            z = np.atleast_1d(np.asarray(config.z_provider(k, x), float))
            x_next = step_basic(c.beta, x, z)

        if config.clamp and config.space is not None:
            x_next = config.space.project(x_next)

        if _blown(x_next):
            diverged = True
            if general:
                residuals.pop()
            break
        zs.append(z)
        phis.append(phi)
        for name, val in zip(co, c):
            co[name].append(val)
        xs.append(x_next)
        x = x_next
        if hist is not None:
            step_omega(config.companion, hist)

    return Trajectory(
        scheme=config.kind,
        xs=np.array(xs).reshape(-1, m),
        zs=np.array(zs).reshape(-1, m) if zs else None,
        phi_terms=np.array(phis),
        alphas=np.array(co["alpha"]),
        betas=np.array(co["beta"]),
        gammas=np.array(co["gamma"]),
        deltas=np.array(co["delta"]),
        epsilons=np.array(co["epsilon"]),
        residuals=np.array(residuals) if general else None,
        diverged=diverged,
        metadata={"horizon": n, "clamp": config.clamp, "seed": config.seed,
                  "aux_beta_uses_main": config.aux_beta_uses_main},
    )


def run_coupled(config: SchemeConfig):
    """Run the generalized scheme and its forcing-free auxiliary in lockstep.

    Returns ``(main, aux)`` trajectories. The auxiliary averaged term uses the
    main iterate x_k verbatim; set ``aux_beta_uses_main=False`` for the
    alternative reading with xbar_k.
    """
    main_cfg = SchemeConfig(
        kind="generalized", horizon=config.horizon, x0=config.x0,
        space=config.space, schedules=config.schedules,
        contraction=config.contraction, family=config.family,
        companion=config.companion, direction=config.direction,
        clamp=config.clamp, seed=config.seed)
    main = run(main_cfg)

    xbar0 = config.xbar0 if config.xbar0 is not None else config.x0
    m = len(config.x0)
    xs = [np.asarray(xbar0, float).copy()]
    zs = []
    co = {name: [] for name in ("alpha", "beta", "gamma", "delta", "epsilon")}
    residuals = []
    diverged = False
    xb = xs[0]
    for k in range(main.steps):
        c = config.coeffs_at(k)
        anchor = main.xs[k] if config.aux_beta_uses_main else xb
        zbar = (c.alpha * config.contraction(xb)
                + c.gamma * config.family(k, xb)) / (1.0 - c.beta)
        xb_next = step_coupled_aux(c.beta, anchor, c.alpha, c.gamma,
                                   config.contraction, config.family, k, xb)
        if _blown(xb_next):
            diverged = True
            break
        residuals.append(float(np.linalg.norm(config.family(k, xb) - xb)))
        zs.append(zbar)
        for name, val in zip(co, c):
            co[name].append(val)
        xs.append(xb_next)
        xb = xb_next

    aux = Trajectory(
        scheme="coupled-aux",
        xs=np.array(xs).reshape(-1, m),
        zs=np.array(zs).reshape(-1, m) if zs else None,
        phi_terms=np.zeros(len(zs)),
        alphas=np.array(co["alpha"]),
        betas=np.array(co["beta"]),
        gammas=np.array(co["gamma"]),
        deltas=np.array(co["delta"]),
        epsilons=np.array(co["epsilon"]),
        residuals=np.array(residuals),
        diverged=diverged or main.diverged,
        metadata=dict(main.metadata),
    )
    return main, aux


# ---------------------------------------------------------------------------
# z providers for the basic scheme


def z_from_schedule(sched: Schedule, dim: int = 1):
    """z_k = schedule value broadcast over components."""
    def provider(k, x):
        return np.full(dim, sched(k))
    return provider


def z_proportional(factor: float):
    """z_k = factor * x_k."""
    def provider(k, x):
        return factor * np.asarray(x, float)
    return provider


def z_alternating(amplitude: float, proportional: bool = False):
    """z_k = amplitude * (-1)^k, optionally scaled by |x_k| componentwise."""
    def provider(k, x):
        sign = -1.0 if k % 2 else 1.0
        if proportional:
            return amplitude * sign * np.asarray(x, float)
        return amplitude * sign * np.ones_like(np.asarray(x, float))
    return provider


def z_ell_driven(ell: float, z0: float):
    """Companion built so the increment ratio is identically ``ell``."""
    state = {"z": None, "x": None}

    def provider(k, x):
        x = np.asarray(x, float)
        if k == 0:
            state["z"] = None
        if state["z"] is None:
            z = np.full_like(x, z0)
        else:
            z = state["z"] + ell * (state["x"] - state["z"])
        state["z"], state["x"] = z, x.copy()
        return z
    return provider


def z_table(values):
    """z_k read from an explicit table of points."""
    arr = [np.atleast_1d(np.asarray(v, float)) for v in values]

    def provider(k, x):
        return arr[k]
    return provider
