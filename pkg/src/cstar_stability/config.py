"""Experiment configuration: flat JSON documents with one level of sections.

Example::

    {
      "space": {"kind": "vector", "dim": 2},
      "derivation": {"kind": "random-skew", "seed": 7},
      "perturbation": {"family": "power_law", "epsilon": 0.1, "p": 0.5},
      "control": {"family": "rassias", "beta": 0.2, "p": 0.5},
      "grid": {"base_points": 8, "scale_depth": 12, "seed": 0},
      "run": {"depth": 40, "tol": 1e-9, "strict": true},
      "output": {"format": "csv", "path": "out.csv"}
    }

Explicit generator matrices are given as flat row-major ``re`` / ``im`` lists.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .control import (
    CONSTANT,
    DOUBLING,
    HALVING,
    RASSIAS,
    AlphaNotAllowed,
    ControlFunction,
    PEqualsOne,
    regime_constants,
)
from .cstar_core import StabilityError
from .derivation_lab import (
    COMMUTATOR,
    COMPACT_SUPPORT,
    NONE,
    POWER_LAW,
    SKEW,
    Derivation,
    MapUnderTest,
    NotSkew,
    Perturbation,
    non_adjointable_witness,
    random_skew,
)
from .fixed_point import SampleGrid
from .module_space import ALGEBRA, MAX_DIM, VECTOR, ModuleSpace

MAX_DEPTH = 60


class ConfigError(StabilityError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass


@dataclass
class SpaceConfig:
    kind: str = VECTOR
    dim: int = 2


@dataclass
class DerivationConfig:
    kind: str = "random-skew"  # random-skew | skew | commutator | witness
    seed: int = 7
    re: list | None = None
    im: list | None = None


@dataclass
class PerturbationConfig:
    family: str = NONE
    epsilon: float = 0.0
    p: float = 0.0
    radius: float = 4.0
    direction: int = 0


@dataclass
class ControlConfig:
    family: str = RASSIAS
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    p: float = 0.0


@dataclass
class GridConfig:
    base_points: int = 8
    scale_depth: int = 12
    seed: int = 0
    tuples: int = 200
    product_radius: float = 1.0


@dataclass
class RunConfig:
    regime: str = "auto"
    depth: int = 40
    tol: float = 1e-9
    strict: bool = False


@dataclass
class OutputConfig:
    format: str = "json"
    path: str | None = None


@dataclass
class ExperimentConfig:
    space: SpaceConfig = field(default_factory=SpaceConfig)
    derivation: DerivationConfig = field(default_factory=DerivationConfig)
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    # --- built objects ----------------------------------------------------

    def module_space(self) -> ModuleSpace:
        return ModuleSpace(self.space.kind, self.space.dim)

    def build_derivation(self) -> Derivation:
        space = self.module_space()
        d = self.derivation
        kind = SKEW if space.kind == VECTOR else COMMUTATOR
        if d.kind == "random-skew":
            matrix = random_skew(space.dim, d.seed)
        elif d.kind == "witness":
            matrix = non_adjointable_witness(space.dim).u0
        else:
            matrix = (np.asarray(d.re, dtype=float) + 1j * np.asarray(d.im, dtype=float)).reshape(
                space.dim, space.dim
            )
        return Derivation(kind, matrix, space)

    def build_map(self) -> MapUnderTest:
        space = self.module_space()
        p = self.perturbation
        pert = Perturbation(p.family, p.epsilon, p.p, p.radius, space.basis(p.direction))
        return MapUnderTest(self.build_derivation(), pert)

    def build_control(self) -> ControlFunction:
        c = self.control
        if c.family == CONSTANT:
            return ControlFunction.constant(c.alpha)
        return ControlFunction(c.alpha, c.beta, c.gamma, c.p)

    def build_grid(self) -> SampleGrid:
        g = self.grid
        return SampleGrid.generate(self.module_space(), g.base_points, g.scale_depth, g.seed)

    @property
    def regime(self) -> str:
        return regime_constants(self.build_control()).regime


_SECTION_CLASSES = {
    "space": SpaceConfig,
    "derivation": DerivationConfig,
    "perturbation": PerturbationConfig,
    "control": ControlConfig,
    "grid": GridConfig,
    "run": RunConfig,
    "output": OutputConfig,
}


def _coerce(section: str, name: str, value, default):
    where = f"{section}.{name}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValidationError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"{where}: expected a finite number, got {value!r}")
        return float(value)
    if name in ("re", "im"):
        if value is not None and (
            not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value)
        ):
            raise ValidationError(f"{where}: expected a flat list of numbers")
        return value
    if value is not None and not isinstance(value, str):
        raise ValidationError(f"{where}: expected a string, got {value!r}")
    return value


def from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    cfg = ExperimentConfig()
    for section, body in doc.items():
        if section not in _SECTION_CLASSES:
            raise ValidationError(f"unknown section {section!r}")
        if not isinstance(body, dict):
            raise ValidationError(f"section {section!r} must be an object")
        target = getattr(cfg, section)
        known = {f.name for f in fields(target)}
        for name, value in body.items():
            if name not in known:
                raise ValidationError(f"{section}.{name}: unknown field")
            setattr(target, name, _coerce(section, name, value, getattr(target, name)))
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    s = cfg.space
    if s.kind not in (VECTOR, ALGEBRA):
        raise ValidationError(f"space.kind: must be {VECTOR!r} or {ALGEBRA!r}")
    if not 1 <= s.dim <= MAX_DIM:
        raise ValidationError(f"space.dim: must be in [1, {MAX_DIM}]")

    d = cfg.derivation
    if d.kind not in ("random-skew", "skew", "commutator", "witness"):
        raise ValidationError(f"derivation.kind: unknown kind {d.kind!r}")
    if d.kind == "skew" and s.kind != VECTOR:
        raise ValidationError("derivation.kind: 'skew' acts on vector spaces only")
    if d.kind in ("commutator", "witness") and s.kind != ALGEBRA:
        raise ValidationError(f"derivation.kind: {d.kind!r} needs an algebra space")
    if d.kind in ("skew", "commutator"):
        n = s.dim * s.dim
        if d.re is None or len(d.re) != n or (d.im is not None and len(d.im) != n):
            raise ValidationError(f"derivation.re/im: need {n} row-major entries")
        if d.im is None:
            d.im = [0.0] * n
    if d.kind == "witness" and s.dim < 2:
        raise ValidationError("derivation.kind: the witness needs dim >= 2")

    p = cfg.perturbation
    if p.family not in (NONE, POWER_LAW, COMPACT_SUPPORT):
        raise ValidationError(f"perturbation.family: unknown family {p.family!r}")
    if p.epsilon < 0 or p.p < 0 or p.radius <= 0:
        raise ValidationError("perturbation: need epsilon >= 0, p >= 0, radius > 0")
    if not 0 <= p.direction < s.dim ** (1 if s.kind == VECTOR else 2):
        raise ValidationError("perturbation.direction: basis index out of range")

    c = cfg.control
    if c.family not in (RASSIAS, CONSTANT):
        raise ValidationError(f"control.family: unknown family {c.family!r}")
    for name in ("alpha", "beta", "gamma", "p"):
        if getattr(c, name) < 0:
            raise ValidationError(f"control.{name}: must be >= 0")
    try:
        regime = regime_constants(cfg.build_control()).regime
    except PEqualsOne as err:
        raise ValidationError(str(err)) from err
    except AlphaNotAllowed as err:
        raise ValidationError(f"control.alpha: {err}") from err

    if p.family == POWER_LAW and p.epsilon > 0:
        if regime == DOUBLING and p.p >= 1:
            raise ValidationError("perturbation.p: doubling regime needs a perturbation exponent < 1")
        if regime == HALVING and p.p <= 1:
            raise ValidationError("perturbation.p: halving regime needs a perturbation exponent > 1")
    if p.family == COMPACT_SUPPORT and p.epsilon > 0 and regime != DOUBLING:
        raise ValidationError("perturbation.family: compact support only stabilizes under doubling")

    r = cfg.run
    if r.regime not in ("auto", DOUBLING, HALVING):
        raise ValidationError(f"run.regime: must be auto, {DOUBLING} or {HALVING}")
    if r.regime != "auto" and r.regime != regime:
        raise ValidationError(f"run.regime: {r.regime} contradicts control.p (which gives {regime})")
    if not 3 <= r.depth <= MAX_DEPTH:
        raise ValidationError(f"run.depth: must be in [3, {MAX_DEPTH}]")
    if r.tol <= 0:
        raise ValidationError("run.tol: must be > 0")

    g = cfg.grid
    if g.base_points < 1 or g.scale_depth < 1 or g.tuples < 1 or g.product_radius <= 0:
        raise ValidationError("grid: counts must be >= 1 and product_radius > 0")

    if cfg.output.format not in ("json", "csv"):
        raise ValidationError("output.format: must be json or csv")

    try:
        cfg.build_map()
    except NotSkew as err:
        raise ValidationError(f"derivation: {err}") from err


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    return from_dict(doc)


PRESETS = {
    "doubling": {
        "space": {"kind": "vector", "dim": 2},
        "derivation": {"kind": "random-skew", "seed": 7},
        "perturbation": {"family": "power_law", "epsilon": 0.1, "p": 0.5},
        "control": {"family": "rassias", "beta": 0.2, "p": 0.5},
        "run": {"strict": True},
    },
    "halving": {
        "space": {"kind": "vector", "dim": 2},
        "derivation": {"kind": "random-skew", "seed": 7},
        "perturbation": {"family": "power_law", "epsilon": 0.1, "p": 2.0},
        "control": {"family": "rassias", "beta": 1.0, "p": 2.0},
        "run": {"strict": True},
    },
    "negative-control": {
        "space": {"kind": "vector", "dim": 2},
        "derivation": {"kind": "random-skew", "seed": 7},
        "perturbation": {"family": "power_law", "epsilon": 0.1, "p": 0.5},
        "control": {"family": "rassias", "beta": 0.01, "p": 0.5},
        "run": {"strict": True},
    },
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return from_dict(copy.deepcopy(PRESETS[name]))
