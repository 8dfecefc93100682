"""Experiment configuration: YAML schema, builders and preset resolution."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import iterate
from .companion import MetricSystem, PhiPair
from .iterate import SchemeConfig
from .mappings import AffineMap, AmbientSpace, ClipMap, ContractionMap, MapFamily
from .schedules import Schedule, ScheduleSet


class ConfigError(Exception):
    """Malformed experiment configuration."""


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing {key!r} in {where}")
    return d[key]


def build_schedule(spec, where: str = "schedule") -> Schedule:
    if isinstance(spec, (int, float)):
        return Schedule("constant", c=float(spec))
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected mapping or number")
    try:
        return Schedule(
            kind=_need(spec, "kind", where),
            c=float(spec.get("c", 0.0)),
            a=float(spec.get("a", 1.0)),
            q=float(spec.get("q", 0.5)),
            shift=int(spec.get("shift", 0)),
            table=tuple(spec.get("table", ())),
            traits=frozenset(spec.get("traits", ())),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_schedule_set(spec: dict) -> ScheduleSet:
    if not isinstance(spec, dict):
        raise ConfigError("schedules: expected a mapping")
    for key in ("alpha", "beta", "delta", "epsilon"):
        _need(spec, key, "schedules")
    return ScheduleSet(
        alpha=build_schedule(spec["alpha"], "schedules.alpha"),
        beta=build_schedule(spec["beta"], "schedules.beta"),
        delta=build_schedule(spec["delta"], "schedules.delta"),
        epsilon=build_schedule(spec["epsilon"], "schedules.epsilon"),
        v=tuple(build_schedule(s, f"schedules.v[{i}]")
                for i, s in enumerate(spec.get("v", ()))),
        s=build_schedule(spec.get("s", 0), "schedules.s"),
        r=float(spec.get("r", 0.0)),
    )


def build_space(spec: dict) -> AmbientSpace:
    if not isinstance(spec, dict):
        raise ConfigError("space: expected a mapping")
    kind = spec.get("kind", "ball")
    try:
        if kind == "ball":
            return AmbientSpace(dim=int(_need(spec, "dim", "space")), kind="ball",
                                center=spec.get("center"),
                                radius=float(spec.get("radius", 1.0)))
        return AmbientSpace(dim=int(_need(spec, "dim", "space")), kind="box",
                            lower=_need(spec, "lower", "space"),
                            upper=_need(spec, "upper", "space"))
    except ValueError as exc:
        raise ConfigError(f"space: {exc}") from exc


def build_map(spec: dict, where: str):
    """Affine (matrix rows + offset) or clip (box projection) map."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping")
    try:
        if spec.get("kind", "affine") == "clip":
            return ClipMap(lower=_need(spec, "lower", where),
                           upper=_need(spec, "upper", where))
        return AffineMap(matrix=_need(spec, "matrix", where),
                         offset=_need(spec, "offset", where))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def build_contraction(spec: dict) -> ContractionMap:
    m = build_map(spec, "maps.contraction")
    try:
        return ContractionMap(fn=m, lipschitz_bound=float(
            spec.get("lipschitz_bound", m.lipschitz)))
    except ValueError as exc:
        raise ConfigError(f"maps.contraction: {exc}") from exc


def build_family(spec: dict) -> MapFamily:
    if not isinstance(spec, dict):
        raise ConfigError("maps.family: expected a mapping")
    limit = build_map(_need(spec, "limit", "maps.family"), "maps.family.limit")
    pert = spec.get("perturbation")
    return MapFamily.from_maps(
        limit=limit,
        perturbation=build_map(pert, "maps.family.perturbation") if pert else None,
        decay=build_schedule(spec.get("decay", 0.0), "maps.family.decay"))


def build_pair(spec: dict, where: str) -> PhiPair:
    def one(tag):
        sub = _need(spec, tag, where)
        fam = sub.get("family", "linear")
        if fam == "linear":
            slope = float(sub.get("slope", 1.0))
            return lambda t, s=slope: s * t
        if fam == "power":
            coeff = float(sub.get("coeff", 1.0))
            exp = float(sub.get("exponent", 2.0))
            return lambda t, c=coeff, e=exp: c * t ** e
        raise ConfigError(f"{where}.{tag}: unknown family {fam!r}")
    return PhiPair(phi=one("phi"), psi=one("psi"))


def build_companion(spec: dict) -> MetricSystem:
    if not isinstance(spec, dict):
        raise ConfigError("companion: expected a mapping")
    qspec = _need(spec, "map", "companion")
    q = build_map(qspec, "companion.map")
    try:
        return MetricSystem(
            dim=int(_need(spec, "dim", "companion")),
            q=q,
            pairs=tuple(build_pair(p, f"companion.pairs[{i}]")
                        for i, p in enumerate(spec.get("pairs", ()))),
            omega0=_need(spec, "omega0", "companion"),
            p=int(spec.get("p", 1)),
            metric=spec.get("metric", "euclidean"),
            weights=spec.get("weights"),
        )
    except ValueError as exc:
        raise ConfigError(f"companion: {exc}") from exc


def build_z_provider(spec: dict, dim: int):
    if not isinstance(spec, dict):
        raise ConfigError("scheme.z: expected a mapping")
    kind = _need(spec, "kind", "scheme.z")
    if kind == "schedule":
        return iterate.z_from_schedule(
            build_schedule(_need(spec, "schedule", "scheme.z"), "scheme.z.schedule"), dim)
    if kind == "proportional":
        return iterate.z_proportional(float(_need(spec, "factor", "scheme.z")))
    if kind == "alternating":
        return iterate.z_alternating(float(_need(spec, "amplitude", "scheme.z")),
                                     proportional=bool(spec.get("proportional", False)))
    if kind == "ell":
        return iterate.z_ell_driven(float(_need(spec, "ell", "scheme.z")),
                                    float(spec.get("z0", 0.0)))
    if kind == "table":
        return iterate.z_table(_need(spec, "values", "scheme.z"))
    raise ConfigError(f"scheme.z: unknown kind {kind!r}")


@dataclass
class ExperimentConfig:
    """A loaded, fully built experiment description."""

    name: str
    scheme: SchemeConfig
    diagnostics: dict = field(default_factory=dict)
    out_dir: str = "out"
    raw: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.scheme.seed


def load_config(source) -> ExperimentConfig:
    """Load a config from a path, preset name, or already-parsed mapping."""
    if isinstance(source, dict):
        raw = source
        name = raw.get("name", "experiment")
    else:
        path = resolve_config_path(source)
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        name = raw.get("name", path.stem)

    scheme_spec = _need(raw, "scheme", "config")
    kind = _need(scheme_spec, "kind", "scheme")
    if kind not in iterate.SCHEME_KINDS:
        raise ConfigError(f"scheme: unknown kind {kind!r}")
    horizon = int(_need(scheme_spec, "horizon", "scheme"))
    if horizon < 1:
        raise ConfigError("scheme: horizon must be at least 1")
    x0 = np.atleast_1d(np.asarray(_need(scheme_spec, "x0", "scheme"), float))

    space = build_space(raw["space"]) if "space" in raw else None
    schedules = None
    contraction = family = companion = None
    beta = z_provider = halpern_map = None

    if kind in ("viscosity", "generalized", "coupled-aux"):
        schedules = build_schedule_set(_need(raw, "schedules", "config"))
        maps = _need(raw, "maps", "config")
        contraction = build_contraction(_need(maps, "contraction", "maps"))
        family = build_family(_need(maps, "family", "maps"))
        if kind != "viscosity" and "companion" in raw:
            companion = build_companion(raw["companion"])
    else:
        sched_spec = raw.get("schedules", {})
        beta = build_schedule(_need(sched_spec, "beta", "schedules"), "schedules.beta")
        if kind == "basic":
            z_provider = build_z_provider(_need(scheme_spec, "z", "scheme"), len(x0))
        else:
            maps = _need(raw, "maps", "config")
            halpern_map = build_map(_need(maps, "p", "maps"), "maps.p")

    try:
        scheme = SchemeConfig(
            kind=kind, horizon=horizon, x0=x0, space=space,
            schedules=schedules, beta=beta, z_provider=z_provider,
            halpern_map=halpern_map, contraction=contraction, family=family,
            companion=companion,
            direction=scheme_spec.get("direction"),
            xbar0=scheme_spec.get("xbar0"),
            aux_beta_uses_main=bool(scheme_spec.get("aux_beta_uses_main", True)),
            clamp=bool(scheme_spec.get("clamp", False)),
            seed=int(raw.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    diags = raw.get("diagnostics", {})
    if not isinstance(diags, dict):
        raise ConfigError("diagnostics: expected a mapping of check -> tolerance")
    out_dir = raw.get("output", {}).get("dir", "out")
    return ExperimentConfig(name=name, scheme=scheme, diagnostics=diags,
                            out_dir=out_dir, raw=raw)


def preset_names() -> list:
    root = importlib.resources.files("viscolab") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_config_path(source) -> Path:
    path = Path(source)
    if path.exists():
        return path
    name = str(source)
    if not name.endswith(".yaml"):
        name += ".yaml"
    packaged = importlib.resources.files("viscolab") / "presets" / name
    if packaged.is_file():
        return Path(str(packaged))
    raise ConfigError(f"no such config file or preset: {source}")
