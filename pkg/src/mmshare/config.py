"""Simulation parameters, scenario/model selectors and the flat config file format.

A config file is UTF-8 text with one ``key = value`` pair per line. ``#``
starts a comment. Keys not present keep their defaults; unknown keys are
errors. Example::

    # low-density Model 3 campaign
    scenario = Spectrum
    channel_model = Model3
    lambda_bs = 30
    tx_dims = 8x8
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path

SEED_ENV = "MMSHARE_SEED"


class Scenario(enum.Enum):
    NoSharing = 1
    SpectrumAccess = 2
    Spectrum = 3
    SpectrumInfra = 4

    @property
    def short(self) -> str:
        return f"s{self.value}"


class ChannelModel(enum.Enum):
    Model1 = 1
    Model2 = 2
    Model3 = 3
    Model4 = 4

    @property
    def short(self) -> str:
        return f"m{self.value}"

    @property
    def simplified_pathloss(self) -> bool:
        """Models 1 and 4: power-law pathloss, no outage, no shadowing."""
        return self in (ChannelModel.Model1, ChannelModel.Model4)

    @property
    def uses_mimo(self) -> bool:
        return self is not ChannelModel.Model1


def parse_scenario(text: str) -> Scenario:
    t = text.strip()
    for s in Scenario:
        if t.lower() in (s.name.lower(), s.short, str(s.value)):
            return s
    raise ValueError(f"unknown scenario {text!r}")


def parse_model(text: str) -> ChannelModel:
    t = text.strip()
    for m in ChannelModel:
        if t.lower() in (m.name.lower(), m.short, str(m.value)):
            return m
    raise ValueError(f"unknown channel model {text!r}")


@dataclass(frozen=True)
class ModelParams:
    # blockage (28 GHz dense urban fit)
    a_out: float = 0.0334
    b_out: float = 5.2
    a_los: float = 0.0149
    # pathloss  PL = alpha + 10 beta log10(d), shadowing std sigma
    los_alpha_db: float = 61.4
    los_beta: float = 2.0
    los_sigma_db: float = 5.8
    nlos_alpha_db: float = 72.0
    nlos_beta: float = 2.92
    nlos_sigma_db: float = 8.7
    # cluster model
    cluster_mean: float = 1.8
    r_tau: float = 2.8
    zeta_db: float = 4.0
    cluster_el_max_deg: float = 30.0
    subpath_az_spread_deg: float = 10.0
    subpath_el_spread_deg: float = 5.0
    bs_panels: int = 3
    # rect antenna pattern (Model 1), aggregate TX+RX
    rect_half_beamwidth_deg: float = 28.0
    rect_gmax_db: float = 26.0
    rect_gmin_db: float = -4.0
    # simplified pathloss (Models 1 and 4)
    model1_ref_loss_db: float = 61.4
    model1_n_los: float = 2.0
    model1_n_nlos: float = 4.0


@dataclass(frozen=True)
class SimulationConfig:
    num_operators: int = 2
    lambda_ue: float = 200.0  # per km^2
    lambda_bs: float = 30.0  # per km^2
    area_km2: float = 1.0
    p_tx_dbm: float = 30.0
    carrier_freq_hz: float = 28e9
    bw_hz: float = 1e9  # total, both operators
    noise_figure_db: float = 7.0
    n_tx: int = 64
    tx_dims: tuple[int, int] = (8, 8)
    n_rx: int = 16
    rx_dims: tuple[int, int] = (4, 4)
    half_duplex_factor: float = 0.5
    num_drops: int = 10_000
    scenario: Scenario = Scenario.NoSharing
    channel_model: ChannelModel = ChannelModel.Model3
    rng_seed: int = 1
    model_params: ModelParams = field(default_factory=ModelParams)

    @property
    def side_m(self) -> float:
        return math.sqrt(self.area_km2) * 1000.0

    def replace(self, **changes) -> "SimulationConfig":
        """Copy with top-level and/or model-parameter fields changed."""
        mp_names = {f.name for f in dataclasses.fields(ModelParams)}
        mp_changes = {k: changes.pop(k) for k in list(changes) if k in mp_names}
        if mp_changes:
            changes["model_params"] = dataclasses.replace(self.model_params, **mp_changes)
        return dataclasses.replace(self, **changes)


class ConfigError(Exception):
    """Raised for unreadable, malformed or invalid configuration files."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


# descriptive names used in validation messages next to the file keys
_ALIASES = {
    "lambda_ue": "ue_density",
    "lambda_bs": "bs_density",
    "area_km2": "area",
    "bw_hz": "total_bandwidth",
    "carrier_freq_hz": "carrier_freq",
}


def validate(config: SimulationConfig) -> list[str]:
    """Return every violated invariant of ``config``; an empty list means valid."""
    v = []
    c = config
    for name in ("lambda_ue", "lambda_bs", "area_km2", "bw_hz", "carrier_freq_hz"):
        val = getattr(c, name)
        if not (math.isfinite(val) and val > 0):
            v.append(f"{name} ({_ALIASES[name]}): must be strictly positive, got {val}")
    if c.num_operators != 2:
        v.append(f"num_operators: sharing scenarios are defined for exactly 2 operators, got {c.num_operators}")
    for n_name, d_name in (("n_tx", "tx_dims"), ("n_rx", "rx_dims")):
        n, dims = getattr(c, n_name), getattr(c, d_name)
        if len(dims) != 2 or min(dims) < 1:
            v.append(f"{d_name}: needs two dimensions >= 1, got {dims}")
        elif dims[0] * dims[1] != n:
            v.append(f"{d_name}: array dims product {dims[0]}x{dims[1]}={dims[0] * dims[1]} != element count {n_name}={n}")
    if not (0.0 < c.half_duplex_factor <= 1.0):
        v.append(f"half_duplex_factor: must lie in (0, 1], got {c.half_duplex_factor}")
    if c.num_drops < 0:
        v.append(f"num_drops: must be >= 0, got {c.num_drops}")
    if not (0 <= c.rng_seed < 2**64):
        v.append(f"rng_seed: must be a 64-bit unsigned integer, got {c.rng_seed}")
    if not math.isfinite(c.p_tx_dbm):
        v.append(f"p_tx_dbm: must be finite, got {c.p_tx_dbm}")
    if not isinstance(c.scenario, Scenario):
        v.append(f"scenario: not a Scenario, got {c.scenario!r}")
    if not isinstance(c.channel_model, ChannelModel):
        v.append(f"channel_model: not a ChannelModel, got {c.channel_model!r}")

    p = c.model_params
    for name in ("los_sigma_db", "nlos_sigma_db", "zeta_db"):
        if getattr(p, name) < 0:
            v.append(f"{name}: must be >= 0, got {getattr(p, name)}")
    for name in ("a_out", "a_los", "cluster_mean", "los_beta", "nlos_beta", "model1_n_los", "model1_n_nlos"):
        if not getattr(p, name) > 0:
            v.append(f"{name}: must be strictly positive, got {getattr(p, name)}")
    if not (0.0 < p.rect_half_beamwidth_deg < 90.0):
        v.append(f"rect_half_beamwidth_deg: must lie in (0, 90), got {p.rect_half_beamwidth_deg}")
    if not p.rect_gmax_db > p.rect_gmin_db:
        v.append(f"rect_gmax_db: must exceed rect_gmin_db ({p.rect_gmax_db} <= {p.rect_gmin_db})")
    if not (0.0 <= p.cluster_el_max_deg < 90.0):
        v.append(f"cluster_el_max_deg: must lie in [0, 90), got {p.cluster_el_max_deg}")
    for name in ("subpath_az_spread_deg", "subpath_el_spread_deg"):
        if getattr(p, name) < 0:
            v.append(f"{name}: must be >= 0, got {getattr(p, name)}")
    if p.bs_panels < 2:
        v.append(f"bs_panels: need at least 2 panels to cover the horizon, got {p.bs_panels}")
    return v


# ---------------------------------------------------------------- file format

def _parse_dims(text: str) -> tuple[int, int]:
    parts = text.lower().replace("×", "x").split("x")
    if len(parts) != 2:
        raise ValueError(f"expected ROWSxCOLS, got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    f = float(text)  # accepts "1e4"
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(f)


_PARSERS = {
    int: _parse_int,
    float: float,
    tuple[int, int]: _parse_dims,
    Scenario: parse_scenario,
    ChannelModel: parse_model,
}


def _field_types(cls) -> dict[str, object]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls) if f.name != "model_params"}


_TOP_TYPES = _field_types(SimulationConfig)
_MP_TYPES = _field_types(ModelParams)


def _format_value(val) -> str:
    if isinstance(val, enum.Enum):
        return val.name
    if isinstance(val, tuple):
        return f"{val[0]}x{val[1]}"
    if isinstance(val, float):
        return repr(val)
    return str(val)


def parse_config(text: str, source: str = "<string>") -> SimulationConfig:
    top, mp = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _TOP_TYPES:
            target, ftype = top, _TOP_TYPES[key]
        elif key in _MP_TYPES:
            target, ftype = mp, _MP_TYPES[key]
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            target[key] = _PARSERS[ftype](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return SimulationConfig(**top, model_params=ModelParams(**mp))


def load_config(path) -> SimulationConfig:
    """Read, apply the seed override from the environment, and validate."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    config = parse_config(text, source=str(path))
    seed = os.environ.get(SEED_ENV)
    if seed:
        try:
            config = config.replace(rng_seed=int(seed))
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={seed!r} is not an integer") from None
    problems = validate(config)
    if problems:
        raise ConfigError(f"{path}: invalid configuration:\n  " + "\n  ".join(problems), problems)
    return config


def dump_config(config: SimulationConfig) -> str:
    lines = []
    for name in _TOP_TYPES:
        lines.append(f"{name} = {_format_value(getattr(config, name))}")
    for name in _MP_TYPES:
        lines.append(f"{name} = {_format_value(getattr(config.model_params, name))}")
    return "\n".join(lines) + "\n"


def save_config(config: SimulationConfig, path) -> None:
    Path(path).write_text(dump_config(config), encoding="utf-8")


def config_as_dict(config: SimulationConfig) -> dict:
    """Flat JSON-ready echo of every key."""
    out = {}
    for name in _TOP_TYPES:
        val = getattr(config, name)
        out[name] = _format_value(val) if isinstance(val, (enum.Enum, tuple)) else val
    for name in _MP_TYPES:
        out[name] = getattr(config.model_params, name)
    return out
