"""Scenario configurations: flat ``key = value`` files mapped onto problems.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Unspecified keys take the scenario's defaults (``SCENARIO_DEFAULTS``
on top of the dataclass defaults). See :class:`ScenarioConfig` for the keys.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .constraints import CircleBoundary, InterfaceJoint, PointConstraint
from .functional import (Domain, FilmParams, GravityParams, OpticsParams, lagrangian_film,
                         lagrangian_gravity, lagrangian_optics)
from .network import NetworkSpec
from .solver import PathModel, Problem, TrainConfig

SCENARIOS = ("gravity", "refraction", "refraction-jointed", "film")
EMIT_KINDS = ("path-csv", "history-csv", "svg-plot", "obj-mesh", "residual-csv")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "gravity"
    output_dir: str = "runs/out"
    emit: tuple[str, ...] = EMIT_KINDS
    seed: int = 0
    # network
    widths: tuple[int, ...] = (32, 32, 32)
    activation: str = "tanh"
    # training
    steps: int = 10000
    lr_path: float = 1e-3
    lr_force: float = 1e-2
    damp_factor: float = 0.999
    damp_every: int = 10
    n_samples: int = 64
    sampling: str = "midpoint"  # interval rule: midpoint, stratified or uniform
    resample: bool = False
    tol_violation: float = 1e-4
    tol_action: float = 1e-5
    stabilizer_rho: float = 10.0
    optimizer: str = "adam"
    # gravity: x(t1) = x1, x(t2) = x2
    m: float = 1.0
    g: float = 10.0
    t1: float = 0.0
    x1: float = 0.0
    t2: float = 1.0
    x2: float = 0.0
    # refraction: light from A to B across the interface x = interface_x
    n1: float = 1.0
    n2: float = 1.5
    c: float = 1.0
    ax: float = -1.0
    ay: float = 1.0
    bx: float = 1.0
    by: float = -1.0
    interface_x: float = 0.0
    # film over the unit disk, zero height on the circle
    sigma: float = 1.0
    p: float = 0.0
    boundary_samples: int = 64
    force_widths: tuple[int, ...] = (16, 16)

    def __post_init__(self):
        _validate(self)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            steps=self.steps, lr_path=self.lr_path, lr_force=self.lr_force,
            damp_factor=self.damp_factor, damp_every=self.damp_every,
            n_samples=self.n_samples, resample=self.resample, seed=self.seed,
            tol_violation=self.tol_violation, tol_action=self.tol_action,
            stabilizer_rho=self.stabilizer_rho, optimizer=self.optimizer,
        )


SCENARIO_DEFAULTS: dict[str, dict] = {
    "gravity": {"n_samples": 256, "steps": 30000, "lr_path": 3e-3, "damp_factor": 0.998, "tol_action": 1e-10},
    "refraction": {"n_samples": 128},
    "refraction-jointed": {"steps": 40000, "damp_factor": 0.9985, "tol_action": 1e-9},
    "film": {
        "steps": 15000, "lr_path": 3e-3, "lr_force": 1e-2, "n_samples": 512, "resample": True,
        "tol_violation": 1e-2, "tol_action": 1e-9,
    },
}

_POSITIVE = ("lr_path", "lr_force", "tol_violation", "tol_action", "m", "c", "sigma", "steps",
             "damp_every", "n_samples")


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"scenario: must be one of {', '.join(SCENARIOS)}, got {cfg.scenario!r}")
    for name in _POSITIVE:
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name}: must be > 0, got {getattr(cfg, name)}")
    if not 0 < cfg.damp_factor <= 1:
        raise ConfigError(f"damp_factor: must be in (0, 1], got {cfg.damp_factor}")
    if cfg.stabilizer_rho < 0:
        raise ConfigError(f"stabilizer_rho: must be >= 0, got {cfg.stabilizer_rho}")
    if cfg.sampling not in ("midpoint", "stratified", "uniform"):
        raise ConfigError(f"sampling: must be midpoint, stratified or uniform, got {cfg.sampling!r}")
    if cfg.sampling != "midpoint" and not cfg.resample:
        raise ConfigError(f"sampling: {cfg.sampling} draws need resample = true")
    if cfg.optimizer not in ("sgd", "adam"):
        raise ConfigError(f"optimizer: must be sgd or adam, got {cfg.optimizer!r}")
    bad = [e for e in cfg.emit if e not in EMIT_KINDS]
    if bad:
        raise ConfigError(f"emit: unknown artifact kind(s) {bad}; choose from {', '.join(EMIT_KINDS)}")
    if cfg.n_samples < 2:
        raise ConfigError("n_samples: need at least 2")
    if not cfg.widths or min(cfg.widths) < 1:
        raise ConfigError("widths: need at least one positive layer width")
    if cfg.scenario == "gravity":
        if not cfg.t2 > cfg.t1:
            raise ConfigError(f"t2: must exceed t1 ({cfg.t1}), got {cfg.t2}")
        if cfg.g < 0:
            raise ConfigError("g: must be >= 0")
    if cfg.scenario.startswith("refraction"):
        if cfg.n1 < 1 or cfg.n2 < 1:
            raise ConfigError("n1/n2: refractive indices must be >= 1")
        if not cfg.ax < cfg.interface_x < cfg.bx:
            raise ConfigError(f"interface_x: must lie strictly between ax={cfg.ax} and bx={cfg.bx}")
        if cfg.scenario == "refraction" and cfg.sampling == "midpoint" and not cfg.resample:
            h = (cfg.bx - cfg.ax) / cfg.n_samples
            mids = cfg.ax + h * (np.arange(cfg.n_samples) + 0.5)
            if np.any(np.isclose(mids, cfg.interface_x, rtol=0, atol=1e-12)):
                raise ConfigError("n_samples: a midpoint falls on the interface; use an even count")
    if cfg.scenario == "film" and cfg.boundary_samples < 3:
        raise ConfigError("boundary_samples: need at least 3")


def _convert(raw: str, typ):
    raw = raw.strip()
    if typ is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    if typ is str:
        return raw
    if typ == "int-tuple":
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if typ == "str-tuple":
        return tuple(v for v in raw.replace(",", " ").split())
    raise TypeError(typ)


def _field_types() -> dict[str, object]:
    simple = {"int": int, "float": float, "bool": bool, "str": str,
              "tuple[int, ...]": "int-tuple", "tuple[str, ...]": "str-tuple"}
    return {f.name: simple[str(f.type)] for f in fields(ScenarioConfig)}


FIELD_TYPES = _field_types()


def parse_config_text(text: str, source: str = "<config>", overrides: dict | None = None) -> ScenarioConfig:
    """Parse ``key = value`` lines; errors carry the line number and key."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(raw, FIELD_TYPES[key])
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return make_config(**values)


def make_config(**values) -> ScenarioConfig:
    """Scenario defaults, then ``values``; raises :class:`ConfigError` naming the bad field."""
    scenario = values.get("scenario", "gravity")
    merged = {**SCENARIO_DEFAULTS.get(scenario, {}), **values}
    unknown = set(merged) - set(FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    return ScenarioConfig(**merged)


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), str(path), overrides)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(map(str, v))
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


# -- problem construction -------------------------------------------------

def _spec(cfg: ScenarioConfig, lo, hi, k: int, input_dim: int = 1) -> NetworkSpec:
    return NetworkSpec(input_dim, cfg.widths, 1, cfg.activation, init_seed=1000 * cfg.seed + k,
                       lo=lo, hi=hi)


def build_problem(cfg: ScenarioConfig) -> Problem:
    """Problem for the configured scenario; network init seeds derive from ``cfg.seed``."""
    if cfg.scenario == "gravity":
        L = lagrangian_gravity(GravityParams(cfg.m, cfg.g))
        dom = Domain("interval", cfg.t1, cfg.t2, cfg.n_samples, cfg.sampling)
        model = PathModel(_spec(cfg, (cfg.t1,), (cfg.t2,), 0), L, dom)
        return Problem((model,), (PointConstraint(cfg.t1, cfg.x1), PointConstraint(cfg.t2, cfg.x2)))
    if cfg.scenario in ("refraction", "refraction-jointed"):
        L = lagrangian_optics(OpticsParams(cfg.n1, cfg.n2, cfg.c, cfg.interface_x))
        if cfg.scenario == "refraction":
            dom = Domain("interval", cfg.ax, cfg.bx, cfg.n_samples, cfg.sampling)
            model = PathModel(_spec(cfg, (cfg.ax,), (cfg.bx,), 0), L, dom)
            return Problem((model,), (PointConstraint(cfg.ax, cfg.ay), PointConstraint(cfg.bx, cfg.by)))
        x1 = cfg.interface_x
        left = PathModel(_spec(cfg, (cfg.ax,), (x1,), 0), L, Domain("interval", cfg.ax, x1, cfg.n_samples, cfg.sampling))
        right = PathModel(_spec(cfg, (x1,), (cfg.bx,), 1), L, Domain("interval", x1, cfg.bx, cfg.n_samples, cfg.sampling))
        return Problem((left, right),
                       (PointConstraint(cfg.ax, cfg.ay, 0), PointConstraint(cfg.bx, cfg.by, 1)),
                       InterfaceJoint(x1))
    L = lagrangian_film(FilmParams(cfg.sigma, cfg.p))
    dom = Domain("disk", n=cfg.n_samples, sampling="uniform", seed=cfg.seed)
    force_spec = NetworkSpec(1, cfg.force_widths, 1, cfg.activation, init_seed=1000 * cfg.seed + 7,
                             lo=(0.0,), hi=(2.0 * np.pi,))
    boundary = CircleBoundary(cfg.boundary_samples, force_spec)
    model = PathModel(_spec(cfg, (-1.0, -1.0), (1.0, 1.0), 0, input_dim=2), L, dom)
    return Problem((model,), boundary=boundary)


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(cfg, **changes)
