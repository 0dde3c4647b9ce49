"""Named presets, one per published figure, plus templates for the CLI verbs.

Horizons the figures leave open are fixed here: plane waves run for one
spatial period (``steps = N``), packets for 49 steps, and eigenvalue figures
need no time evolution at all.
"""

from __future__ import annotations

from .config import ExperimentConfig, config_from_dict, deep_merge
from ..errors import ConfigError

_MASSIVE = {"theta": "pi/3", "rho": "pi/4"}
_MASSLESS = {"theta": "pi/6", "rho": "pi/6"}
_PACKET = {"kind": "packet", "k0": "pi/4", "x0": 31, "s": 32}
_PACKET_OUT = ["trajectory", "density", "spectrum", "diagnostics"]
_SWEEP = {"start": 0.0, "stop": "pi", "count": 97}

SCENARIOS: dict[str, dict] = {
    "fig1": {
        **_MASSIVE, "N": 32, "steps": 32,
        "initial": {"kind": "plane_wave", "n": 1, "epsilon": 1},
        "outputs": ["trajectory", "spectrum"],
        "description": "n = 1 right-moving plane wave, N = 32",
    },
    "fig2": {
        **_MASSIVE, "N": 32, "steps": 32,
        "initial": {"kind": "plane_wave", "n": 2, "epsilon": 1},
        "outputs": ["trajectory", "spectrum"],
        "description": "n = 2 right-moving plane wave, N = 32",
    },
    "fig3": {
        **_MASSIVE, "resolution": 256, "outputs": ["dispersion"],
        "description": "dispersion relation, theta = pi/3, rho = pi/4",
    },
    "fig4": {
        **_MASSLESS, "resolution": 256, "outputs": ["dispersion"],
        "description": "massless dispersion relation, theta = rho = pi/6",
    },
    "fig5": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": dict(_PACKET), "outputs": _PACKET_OUT,
        "description": "k0 = pi/4, s = 32 packet",
    },
    "fig6": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": {**_PACKET, "s": 8}, "outputs": _PACKET_OUT,
        "description": "k0 = pi/4, s = 8 packet (faster spreading)",
    },
    "fig7": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": {**_PACKET, "k0": "pi/32"},
        "outputs": _PACKET_OUT,
        "description": "k0 = pi/32, s = 32 packet near the band bottom",
    },
    "fig8": {
        **_MASSLESS, "N": 64, "steps": 49, "initial": {**_PACKET, "k0": "pi/32"},
        "outputs": _PACKET_OUT,
        "description": "k0 = pi/32, s = 32 packet, massless rule",
    },
    "fig9": {
        **_MASSIVE, "N": 8, "potential": {"kind": "square_well"}, "sweep": dict(_SWEEP),
        "outputs": ["bands"],
        "description": "eigenfrequencies versus well depth, N = 8",
    },
    "fig10": {
        **_MASSIVE, "N": 32, "potential": {"kind": "square_well"}, "sweep": dict(_SWEEP),
        "outputs": ["bands"],
        "description": "eigenfrequencies versus well depth, N = 32",
    },
    "fig11": {
        **_MASSLESS, "N": 32, "potential": {"kind": "square_well"}, "sweep": dict(_SWEEP),
        "outputs": ["bands"],
        "description": "eigenfrequencies versus well depth, N = 32, massless rule",
    },
    "fig12": {
        **_MASSIVE, "N": 256, "potential": {"kind": "square_well", "depth": "pi/24"},
        "modes": {"kind": "lowest_positive", "count": 3},
        "outputs": ["eigenpairs", "mode_density"],
        "description": "three lowest positive-frequency eigenfunctions, well depth pi/24",
    },
    "fig13": {
        **_MASSIVE, "N": 256, "potential": {"kind": "square_well", "depth": "pi/24"},
        "modes": {"kind": "nearest", "omega": 0.3985},
        "outputs": ["eigenpairs", "mode_density"],
        "description": "unconfined eigenfunction near omega = 0.3985",
    },
    "fig14": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": dict(_PACKET),
        "potential": {"kind": "square_well", "depth": "pi/6"},
        "outputs": ["trajectory", "density", "diagnostics"],
        "description": "fig5 packet in a well of depth pi/6 (mostly transmitted)",
    },
    "fig15": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": dict(_PACKET),
        "potential": {"kind": "square_well", "depth": "pi/4"},
        "outputs": ["trajectory", "density", "diagnostics"],
        "description": "fig5 packet in a well of depth pi/4 (split)",
    },
    "fig16": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": dict(_PACKET),
        "potential": {"kind": "square_well", "depth": "pi/3"},
        "outputs": ["trajectory", "density", "diagnostics"],
        "description": "fig5 packet in a well of depth pi/3 (mostly reflected)",
    },
    # templates behind the single-purpose CLI verbs
    "dispersion": {**_MASSIVE, "outputs": ["dispersion"], "description": "dispersion table"},
    "planewave": {
        **_MASSIVE, "N": 32, "steps": 32,
        "initial": {"kind": "plane_wave", "n": 1, "epsilon": 1},
        "outputs": ["trajectory", "spectrum"], "description": "plane-wave evolution",
    },
    "packet": {
        **_MASSIVE, "N": 64, "steps": 49, "initial": dict(_PACKET), "outputs": _PACKET_OUT,
        "description": "wave-packet evolution",
    },
    "spectrum": {
        **_MASSIVE, "N": 32, "outputs": ["eigenpairs", "mode_density"], "description": "eigenpairs of U",
    },
    "custom": {"description": "free-form configuration"},
}


def scenario_names() -> list[str]:
    return list(SCENARIOS)


def scenario_dict(name: str) -> dict:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; run 'list-scenarios' to see the registry")
    return deep_merge({"scenario": name}, SCENARIOS[name])


def build_config(name: str, overrides: dict | None = None) -> ExperimentConfig:
    """Preset ``name`` with ``overrides`` merged on top."""
    raw = deep_merge(scenario_dict(name), overrides or {})
    return config_from_dict(raw)
