"""Run configuration: flat key = value files with one section per module.

Unknown sections or keys are rejected, every numeric field is checked
against its domain, and parse -> serialize -> parse is the identity, so a
written config file fully reproduces a run together with the master seed.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

TASKS = (
    "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig5",
    "ipc", "snr", "validate",
)


@dataclass
class RunConfig:
    # [run]
    task: str = "ipc"
    master_seed: int = 12345
    realizations: int = 10
    output_dir: str = "runs"
    # [reservoir]
    n_modes: int = 8
    reflectivity: float = 0.9
    m_pulses: int = 10_000
    dt: float = 1.0
    mean_g: float = 0.2
    spread_g: float = 0.1
    mean_h: float = 0.3
    spread_h: float = 0.1
    squeeze_db_limit: float = 15.0
    enforce_squeeze_limit: bool = True
    initial_state: str = "vacuum"
    ideal_mode: bool = False
    # [encoding]
    squeeze_strength: float = 1.0
    angle_scale: float = 3.0 * math.pi / 4.0
    input_low: float = 0.0
    input_high: float = 1.0
    # [readout]
    train_steps: int = 10_000
    test_steps: int = 5_000
    degree_max: int = 5
    delay_max: int = 75
    threshold_enabled: bool = True
    ridge: float = 0.0
    # [scaling]
    c_const: float = 10.0
    m_coeff: float = 3.0
    m_exponent: float = 6.0
    scaling_base_m: float = 0.0  # 0 disables renormalization to the grid base
    # [experiment]
    n_grid: list[int] | None = None
    m_grid: list[int] | None = None
    r_grid: list[float] | None = None
    snr_window: int = 100
    snr_d_max: int = 15
    snr_floor_db: float = -20.0


SECTION_KEYS = {
    "run": ("task", "master_seed", "realizations", "output_dir"),
    "reservoir": (
        "n_modes", "reflectivity", "m_pulses", "dt", "mean_g", "spread_g",
        "mean_h", "spread_h", "squeeze_db_limit", "enforce_squeeze_limit",
        "initial_state", "ideal_mode",
    ),
    "encoding": ("squeeze_strength", "angle_scale", "input_low", "input_high"),
    "readout": (
        "train_steps", "test_steps", "degree_max", "delay_max",
        "threshold_enabled", "ridge",
    ),
    "scaling": ("c_const", "m_coeff", "m_exponent", "scaling_base_m"),
    "experiment": (
        "n_grid", "m_grid", "r_grid", "snr_window", "snr_d_max", "snr_floor_db",
    ),
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_LIST_KEYS = {"n_grid": int, "m_grid": int, "r_grid": float}
_BOOL_KEYS = {"enforce_squeeze_limit", "threshold_enabled", "ideal_mode"}
_KEY_TO_SECTION = {k: s for s, keys in SECTION_KEYS.items() for k in keys}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _LIST_KEYS:
        if not raw:
            return None
        cast = _LIST_KEYS[key]
        try:
            return [cast(part.strip()) for part in raw.split(",") if part.strip()]
        except ValueError as err:
            raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from err
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as err:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from err
    return raw


def _check_domains(cfg: RunConfig) -> RunConfig:
    def positive(name, value, strict=True):
        if (value <= 0) if strict else (value < 0):
            raise ConfigError(f"{name} must be {'> 0' if strict else '>= 0'}, got {value}")

    if cfg.task not in TASKS:
        raise ConfigError(f"task must be one of {', '.join(TASKS)}, got {cfg.task!r}")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    positive("realizations", cfg.realizations)
    if cfg.n_modes < 1:
        raise ConfigError(f"n_modes must be >= 1, got {cfg.n_modes}")
    if not 0.0 < cfg.reflectivity < 1.0:
        raise ConfigError(
            f"reflectivity must lie strictly inside the open interval (0, 1), "
            f"got {cfg.reflectivity}"
        )
    if cfg.m_pulses < 2:
        raise ConfigError(f"m_pulses must be >= 2, got {cfg.m_pulses}")
    positive("dt", cfg.dt)
    positive("spread_g", cfg.spread_g, strict=False)
    positive("spread_h", cfg.spread_h, strict=False)
    positive("squeeze_db_limit", cfg.squeeze_db_limit)
    if cfg.initial_state not in ("vacuum", "random_squeezed"):
        raise ConfigError(f"initial_state must be vacuum|random_squeezed, got {cfg.initial_state!r}")
    positive("squeeze_strength", cfg.squeeze_strength, strict=False)
    if not cfg.input_low < cfg.input_high:
        raise ConfigError("input domain must satisfy input_low < input_high")
    positive("train_steps", cfg.train_steps)
    positive("test_steps", cfg.test_steps)
    positive("degree_max", cfg.degree_max)
    positive("delay_max", cfg.delay_max, strict=False)
    positive("ridge", cfg.ridge, strict=False)
    positive("c_const", cfg.c_const)
    positive("m_coeff", cfg.m_coeff)
    positive("m_exponent", cfg.m_exponent)
    positive("scaling_base_m", cfg.scaling_base_m, strict=False)
    positive("snr_window", cfg.snr_window)
    positive("snr_d_max", cfg.snr_d_max)
    for name, grid, low in (("n_grid", cfg.n_grid, 1), ("m_grid", cfg.m_grid, 2)):
        if grid is not None and any(v < low for v in grid):
            raise ConfigError(f"{name} entries must be >= {low}")
    if cfg.r_grid is not None and any(not 0.0 < r < 1.0 for r in cfg.r_grid):
        raise ConfigError("r_grid entries must lie strictly inside (0, 1)")
    return cfg


def parse_config(
    path: str | Path | None = None,
    overrides: list[str] | None = None,
    task: str | None = None,
    seed: int | None = None,
    output_dir: str | None = None,
) -> RunConfig:
    """Resolved configuration from an optional file plus overrides.

    Overrides use ``section.key=value``; the CLI task, seed, and output
    directory take precedence over both the file and the overrides.
    """
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        text = Path(path).read_text(encoding="utf-8")
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as err:
            raise ConfigError(f"malformed config file {path}: {err}") from err
        for section in parser.sections():
            if section not in SECTION_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SECTION_KEYS[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                values[key] = _parse_value(key, raw)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        dotted, raw = item.split("=", 1)
        if "." in dotted:
            section, key = dotted.split(".", 1)
            if section not in SECTION_KEYS or key not in SECTION_KEYS[section]:
                raise ConfigError(f"unknown override key {dotted!r}")
        else:
            key = dotted
            if key not in _KEY_TO_SECTION:
                raise ConfigError(f"unknown override key {key!r}")
        values[key] = _parse_value(key, raw)
    cfg = RunConfig(**values)
    if task is not None:
        cfg = replace(cfg, task=task)
    if seed is not None:
        cfg = replace(cfg, master_seed=seed)
    if output_dir is not None:
        cfg = replace(cfg, output_dir=output_dir)
    return _check_domains(cfg)


def serialize_config(cfg: RunConfig) -> str:
    """Config file text that parses back to an identical RunConfig."""
    out = io.StringIO()
    for section, keys in SECTION_KEYS.items():
        out.write(f"[{section}]\n")
        for key in keys:
            value = getattr(cfg, key)
            if key in _LIST_KEYS:
                value = "" if value is None else ",".join(str(v) for v in value)
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()
