"""Experiment configuration: YAML files, ``--set`` overrides, angle parsing."""

from __future__ import annotations

import copy
import math
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..errors import ConfigError

OUTPUT_KINDS = (
    "trajectory",
    "density",
    "spectrum",
    "dispersion",
    "eigenpairs",
    "mode_density",
    "bands",
    "diagnostics",
)
DYNAMIC_OUTPUTS = {"trajectory", "density", "spectrum", "diagnostics"}
INITIAL_KINDS = ("plane_wave", "packet", "basis", "random")
POTENTIAL_KINDS = ("none", "square_well")

_COEFF = re.compile(r"^([+-]?)((?:\d+(?:\.\d*)?|\.\d+)(?:/\d+)?)?\*?$")
_DIVISOR = re.compile(r"^(?:/(\d+))?$")


def parse_angle(value: Any) -> float:
    """Radians from a number or a string such as ``"pi/24"``, ``"-2pi/3"``, ``"0.5"``.

    Rational multiples of pi are evaluated as ``coefficient * pi / divisor``.
    """
    if isinstance(value, bool):
        raise ConfigError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"not an angle: {value!r}")
    text = value.strip().lower().replace(" ", "").replace("π", "pi")
    if "pi" not in text:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"cannot parse angle {value!r}") from None
    pre, _, post = text.partition("pi")
    m_pre, m_post = _COEFF.match(pre), _DIVISOR.match(post)
    if m_pre is None or m_post is None:
        raise ConfigError(f"cannot parse angle {value!r}")
    sign = -1.0 if m_pre.group(1) == "-" else 1.0
    try:
        coeff = Fraction(m_pre.group(2)) if m_pre.group(2) else Fraction(1)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse angle {value!r}") from None
    divisor = int(m_post.group(1)) if m_post.group(1) else 1
    if divisor == 0:
        raise ConfigError(f"division by zero in angle {value!r}")
    return sign * coeff.numerator * math.pi / (coeff.denominator * divisor)


@dataclass(frozen=True)
class PotentialConfig:
    kind: str = "none"
    depth: float = 0.0


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "plane_wave"
    n: int = 1
    epsilon: int = 1
    k0: float = 0.0
    x0: int = 0
    s: int = 0
    x: int = 0
    alpha: int = 1


@dataclass(frozen=True)
class SweepConfig:
    start: float = 0.0
    stop: float = math.pi
    count: int = 65


@dataclass(frozen=True)
class ModeSelection:
    """Which eigenpairs to emit: ``all``, ``lowest_positive`` or ``nearest``."""

    kind: str = "all"
    count: int = 3
    omega: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    N: int = 32
    theta: float = math.pi / 3
    rho: float = math.pi / 4
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    steps: int = 0
    outputs: tuple[str, ...] = ("trajectory",)
    seed: int = 0
    resolution: int = 256
    sweep: SweepConfig | None = None
    modes: ModeSelection = field(default_factory=ModeSelection)
    regions: tuple[tuple[int, int], ...] | None = None
    workers: int = 1
    description: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        if self.regions is not None:
            d["regions"] = [list(r) for r in self.regions]
        return d

    def validate(self) -> ExperimentConfig:
        if self.N < 2:
            raise ConfigError(f"N must be at least 2, got {self.N}")
        if self.steps < 0:
            raise ConfigError(f"steps must be non-negative, got {self.steps}")
        if not self.outputs:
            raise ConfigError("no outputs requested")
        for out in self.outputs:
            if out not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output {out!r}; choose from {', '.join(OUTPUT_KINDS)}")
        if self.potential.kind not in POTENTIAL_KINDS:
            raise ConfigError(f"unknown potential kind {self.potential.kind!r}")
        init = self.initial
        if init.kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial state kind {init.kind!r}")
        if init.epsilon not in (-1, 1) or init.alpha not in (-1, 1):
            raise ConfigError("branch and velocity labels must be +1 or -1")
        if init.kind == "packet":
            if init.s < 0 or init.s % 2:
                raise ConfigError(f"packet width must be even and non-negative, got {init.s}")
            if init.s > self.N:
                raise ConfigError(f"packet width {init.s} exceeds lattice size {self.N}")
            if not 0 <= init.x0 < self.N:
                raise ConfigError(f"packet centre {init.x0} outside [0, {self.N})")
        if init.kind == "basis" and not 0 <= init.x < self.N:
            raise ConfigError(f"basis site {init.x} outside [0, {self.N})")
        if "dispersion" in self.outputs and self.resolution < 2:
            raise ConfigError(f"dispersion resolution must be >= 2, got {self.resolution}")
        if "bands" in self.outputs:
            if self.sweep is None:
                raise ConfigError("output 'bands' needs a 'sweep' section")
            if self.sweep.count < 2:
                raise ConfigError("a depth sweep needs at least 2 points")
        if self.modes.kind not in ("all", "lowest_positive", "nearest"):
            raise ConfigError(f"unknown mode selection {self.modes.kind!r}")
        if self.regions is not None:
            for a, b in self.regions:
                if not 0 <= a <= b <= self.N:
                    raise ConfigError(f"region [{a}, {b}) outside the lattice")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        return self


def _as_int(d: Mapping, key: str, default: int) -> int:
    value = d.get(key, default)
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return int(value)


def _strict(section: str, d: Mapping, allowed) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(sorted(unknown))}")


def config_from_dict(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Build and validate a config from plain (YAML-style) data."""
    if not isinstance(raw, Mapping):
        raise ConfigError("configuration must be a mapping")
    _strict("config", raw, ExperimentConfig.__dataclass_fields__)
    try:
        pot = raw.get("potential") or {}
        if isinstance(pot, str):
            pot = {"kind": pot}
        _strict("potential", pot, ("kind", "depth"))
        potential = PotentialConfig(
            kind=str(pot.get("kind", "none")), depth=parse_angle(pot.get("depth", 0.0))
        )

        ini = raw.get("initial") or {}
        _strict("initial", ini, InitialConfig.__dataclass_fields__)
        initial = InitialConfig(
            kind=str(ini.get("kind", "plane_wave")),
            n=_as_int(ini, "n", 1),
            epsilon=_as_int(ini, "epsilon", 1),
            k0=parse_angle(ini.get("k0", 0.0)),
            x0=_as_int(ini, "x0", 0),
            s=_as_int(ini, "s", 0),
            x=_as_int(ini, "x", 0),
            alpha=_as_int(ini, "alpha", 1),
        )

        sweep = None
        if raw.get("sweep") is not None:
            sw = raw["sweep"]
            _strict("sweep", sw, SweepConfig.__dataclass_fields__)
            sweep = SweepConfig(
                start=parse_angle(sw.get("start", 0.0)),
                stop=parse_angle(sw.get("stop", "pi")),
                count=_as_int(sw, "count", 65),
            )

        md = raw.get("modes") or {}
        if isinstance(md, str):
            md = {"kind": md}
        _strict("modes", md, ModeSelection.__dataclass_fields__)
        modes = ModeSelection(
            kind=str(md.get("kind", "all")),
            count=_as_int(md, "count", 3),
            omega=parse_angle(md.get("omega", 0.0)),
        )

        outputs = raw.get("outputs", ["trajectory"])
        if isinstance(outputs, str):
            outputs = [outputs]
        regions = raw.get("regions")
        if regions is not None:
            regions = tuple((int(a), int(b)) for a, b in regions)

        cfg = ExperimentConfig(
            scenario=str(raw.get("scenario", "custom")),
            N=_as_int(raw, "N", 32),
            theta=parse_angle(raw.get("theta", "pi/3")),
            rho=parse_angle(raw.get("rho", "pi/4")),
            potential=potential,
            initial=initial,
            steps=_as_int(raw, "steps", 0),
            outputs=tuple(str(o) for o in outputs),
            seed=_as_int(raw, "seed", 0),
            resolution=_as_int(raw, "resolution", 256),
            sweep=sweep,
            modes=modes,
            regions=regions,
            workers=_as_int(raw, "workers", 1),
            description=str(raw.get("description", "")),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return cfg.validate()


def deep_merge(base: Mapping, override: Mapping) -> dict:
    out = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_overrides(pairs) -> dict:
    """``["initial.s=8", "theta=pi/6"]`` -> nested dict; values parsed as YAML scalars."""
    out: dict = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        try:
            parsed = yaml.safe_load(value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override {pair!r}: {exc}") from exc
        node = out
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = parsed
    return out


def load_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a mapping")
    return data
