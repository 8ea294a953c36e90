"""Configuration types, simulation defaults and deployment geometry.

A scenario is a frozen tree of small dataclasses. It is written and read as
flat ``section.key = value`` text, one assignment per line, ``#`` comments::

    fso.beamwidth = 0.4
    subthz.n_tx = 2
    service.tx_snr_db = 30

Omitted keys keep their defaults; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

__all__ = [
    "ConfigError",
    "FsoLinkParams",
    "SubThzLinkParams",
    "MmWaveLinkParams",
    "Geometry",
    "ServiceParams",
    "SwitchThresholds",
    "NetworkParams",
    "Scenario",
    "STRONG_TURBULENCE",
    "MODERATE_TURBULENCE",
    "table1_defaults",
    "load_scenario",
    "dump_scenario",
    "with_overrides",
]


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


def _require(ok: bool, key: str, message: str) -> None:
    if not ok:
        raise ConfigError(message, key=key)


# (C_n^2 [m^-2/3], alpha_f, beta_f) pairs, 1550 nm
STRONG_TURBULENCE = (1e-12, 4.343, 2.492)
MODERATE_TURBULENCE = (5e-13, 5.838, 4.249)


@dataclass(frozen=True)
class FsoLinkParams:
    wavelength: float = 1550e-9
    cn2: float = STRONG_TURBULENCE[0]
    alpha_f: float = STRONG_TURBULENCE[1]
    beta_f: float = STRONG_TURBULENCE[2]
    # derive (alpha_f, beta_f) from cn2 per hop length instead of using the fixed pair
    shapes_from_cn2: bool = False
    conversion_coeff: float = 1.0
    receiver_radius: float = 0.20
    beamwidth: float = 0.40
    jitter_sigma: float = 0.05
    visibility: float = 10.0  # km

    def __post_init__(self) -> None:
        for name in ("wavelength", "cn2", "alpha_f", "beta_f", "conversion_coeff",
                     "receiver_radius", "beamwidth", "visibility"):
            _require(getattr(self, name) > 0, f"fso.{name}", "must be > 0")
        _require(self.jitter_sigma >= 0, "fso.jitter_sigma", "must be >= 0")


@dataclass(frozen=True)
class SubThzLinkParams:
    frequency: float = 119e9
    tx_gain_db: float = 55.0
    rx_gain_db: float = 55.0
    pressure: float = 101325.0
    temperature: float = 298.0
    humidity: float = 0.5
    alpha: float = 2.0
    mu: float = 3.0
    n_tx: int = 2
    n_rx: int = 2
    receiver_radius: float = 0.20
    beamwidth: float = 0.50
    jitter_sigma: float = 0.06

    def __post_init__(self) -> None:
        for name in ("frequency", "pressure", "temperature", "alpha", "mu",
                     "receiver_radius", "beamwidth"):
            _require(getattr(self, name) > 0, f"subthz.{name}", "must be > 0")
        _require(self.jitter_sigma >= 0, "subthz.jitter_sigma", "must be >= 0")
        _require(0.0 <= self.humidity <= 1.0, "subthz.humidity", "must lie in [0, 1]")
        _require(self.n_tx >= 1, "subthz.n_tx", "must be >= 1")
        _require(self.n_rx >= 1, "subthz.n_rx", "must be >= 1")


@dataclass(frozen=True)
class MmWaveLinkParams:
    frequency: float = 30e9
    tx_gain_db: float = 40.0
    rx_gain_db: float = 40.0
    rain_atten_db_per_km: float = 0.0
    oxygen_atten_db_per_km: float = 15.1
    m: float = 1.0
    n_tx: int = 2
    n_rx: int = 2

    def __post_init__(self) -> None:
        _require(self.frequency > 0, "mmwave.frequency", "must be > 0")
        _require(self.rain_atten_db_per_km >= 0, "mmwave.rain_atten_db_per_km", "must be >= 0")
        _require(self.oxygen_atten_db_per_km >= 0, "mmwave.oxygen_atten_db_per_km", "must be >= 0")
        _require(self.m >= 0.5, "mmwave.m", "Nakagami shape must be >= 0.5")
        _require(self.n_tx >= 1, "mmwave.n_tx", "must be >= 1")
        _require(self.n_rx >= 1, "mmwave.n_rx", "must be >= 1")


@dataclass(frozen=True)
class Geometry:
    """Node height, hop length and UE placement (metres).

    ``ue_horizontal_distance`` is the UE's position along the donor-to-last-node
    line, measured from the donor. The UE sits on the ground by default.
    """

    node_height: float = 60.0
    hop_length: float = 200.0
    ue_height: float = 0.0
    ue_horizontal_distance: float = 0.0

    def __post_init__(self) -> None:
        for name in ("node_height", "hop_length", "ue_height", "ue_horizontal_distance"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value >= 0, f"geometry.{name}",
                     "must be finite and >= 0")
        _require(self.hop_length > 0, "geometry.hop_length", "must be > 0")

    def access_length(self, horizontal_offset: float) -> float:
        """3-D slant distance from a node to the UE at a horizontal offset."""
        return math.hypot(self.node_height - self.ue_height, horizontal_offset)


@dataclass(frozen=True)
class ServiceParams:
    ues_per_node: int = 10
    rate_per_ue: float = 0.1  # bps/Hz
    tx_snr_db: float = 30.0
    # outage threshold for stand-alone link studies (effective SNR, dB)
    link_threshold_db: float = 5.0

    def __post_init__(self) -> None:
        _require(self.ues_per_node >= 1, "service.ues_per_node", "must be >= 1")
        _require(self.rate_per_ue > 0, "service.rate_per_ue", "must be > 0")
        _require(math.isfinite(self.tx_snr_db), "service.tx_snr_db", "must be finite")
        _require(math.isfinite(self.link_threshold_db), "service.link_threshold_db",
                 "must be finite")


@dataclass(frozen=True)
class SwitchThresholds:
    """Soft-switching thresholds in dB: FSO hysteresis pair plus the sub-THz floor."""

    fso_upper_db: float = 6.0
    fso_lower_db: float = 4.0
    subthz_db: float = 5.0

    def __post_init__(self) -> None:
        _require(self.fso_upper_db >= self.fso_lower_db, "switching.fso_upper_db",
                 "must be >= switching.fso_lower_db")


_HOP_STRATEGIES = ("hard", "soft", "mrc")


@dataclass(frozen=True)
class NetworkParams:
    # receiver strategy on backhaul hops that carry both links
    hybrid_strategy: str = "hard"

    def __post_init__(self) -> None:
        _require(self.hybrid_strategy in _HOP_STRATEGIES, "network.hybrid_strategy",
                 f"must be one of {', '.join(_HOP_STRATEGIES)}")


@dataclass(frozen=True)
class Scenario:
    fso: FsoLinkParams = field(default_factory=FsoLinkParams)
    subthz: SubThzLinkParams = field(default_factory=SubThzLinkParams)
    mmwave: MmWaveLinkParams = field(default_factory=MmWaveLinkParams)
    geometry: Geometry = field(default_factory=Geometry)
    service: ServiceParams = field(default_factory=ServiceParams)
    switching: SwitchThresholds = field(default_factory=SwitchThresholds)
    network: NetworkParams = field(default_factory=NetworkParams)


_SECTIONS: dict[str, type] = {f.name: f.default_factory for f in fields(Scenario)}  # type: ignore[misc]


def table1_defaults() -> Scenario:
    """The default parameter set used throughout the simulations."""
    return Scenario()


def _schema() -> dict[str, type]:
    out: dict[str, type] = {}
    for section, cls in _SECTIONS.items():
        for f in fields(cls):
            out[f"{section}.{f.name}"] = type(getattr(cls(), f.name))
    return out


def _coerce(raw: str, kind: type, key: str, line: int | None) -> Any:
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {kind.__name__}", key=key, line=line) from None


def _build(values: dict[str, Any]) -> Scenario:
    grouped: dict[str, dict[str, Any]] = {s: {} for s in _SECTIONS}
    for key, value in values.items():
        section, name = key.split(".", 1)
        grouped[section][name] = value
    return Scenario(**{s: cls(**grouped[s]) for s, cls in _SECTIONS.items()})


def load_scenario(config_text: str) -> Scenario:
    """Parse ``section.key = value`` text into a fully resolved :class:`Scenario`.

    Raises :class:`ConfigError` carrying the line number on syntax problems and
    the dotted key name on unknown keys or invariant violations.
    """
    schema = _schema()
    values: dict[str, Any] = {}
    for lineno, line in enumerate(config_text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in schema:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        if not raw:
            raise ConfigError("missing value", key=key, line=lineno)
        values[key] = _coerce(raw, schema[key], key, lineno)
    return _build(values)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_scenario(scenario: Scenario) -> str:
    """Serialize every field (defaults included); ``load_scenario`` inverts it."""
    lines = []
    for section in _SECTIONS:
        params = getattr(scenario, section)
        for f in fields(params):
            lines.append(f"{section}.{f.name} = {_format(getattr(params, f.name))}")
    return "\n".join(lines) + "\n"


def with_overrides(scenario: Scenario, overrides: dict[str, Any]) -> Scenario:
    """Return a copy with dotted-key overrides applied (validated like a load)."""
    schema = _schema()
    grouped: dict[str, dict[str, Any]] = {}
    for key, value in overrides.items():
        if key not in schema:
            raise ConfigError("unknown key", key=key)
        section, name = key.split(".", 1)
        kind = schema[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        grouped.setdefault(section, {})[name] = value
    parts = {s: replace(getattr(scenario, s), **kw) for s, kw in grouped.items()}
    return dataclasses.replace(scenario, **parts)
