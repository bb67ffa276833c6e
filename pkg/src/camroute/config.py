"""Scenario configuration: defaults, flat ``key = value`` files and flag overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from .imaging import ImageSpec
from .routing import GPSR, TGPSR


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RadioModel:
    range: float = 150.0
    bitrate: float = 250_000.0
    frame_overhead: int = 12
    ack_bytes: int = 11
    ideal: bool = False  # no collisions; used for routing-only checks

    def __post_init__(self):
        if not (self.range > 0 and self.bitrate > 0):
            raise ConfigError("radio range and bitrate must be positive")

    def airtime(self, payload: int) -> float:
        return (payload + self.frame_overhead) * 8 / self.bitrate


@dataclass(frozen=True)
class MacConfig:
    cca_duration: float = 128e-6
    backoff_slot: float = 320e-6
    min_backoff_exponent: int = 3
    max_backoff_exponent: int = 5
    max_csma_backoffs: int = 4
    max_retries: int = 5
    turnaround: float = 192e-6
    queue_limit: int = 64

    def __post_init__(self):
        if min(self.cca_duration, self.backoff_slot) <= 0 or self.max_backoff_exponent <= 0:
            raise ConfigError("MAC timings must be positive")
        if self.max_retries < 0 or self.queue_limit <= 0:
            raise ConfigError("max_retries must be >= 0 and queue_limit > 0")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int = 1
    node_count: int = 400
    area: tuple[float, float] = (2000.0, 2000.0)
    comm_range: float = 150.0
    aov_deg: float = 60.0
    dov: float = 125.0
    bitrate: float = 250_000.0
    payload: int = 90
    encoded_size: int = 16621
    packet_count: Optional[int] = 205
    raw_size: int = 102400
    capture_rate: float = 1.0
    images_per_burst: int = 1
    alpha: float = 0.5
    beta: float = 0.5
    path_factor: float = 1.0
    energy_floor: float = 0.0
    seed: int = 1
    runs: int = 1
    sentry_fraction: float = 0.10
    event_count: Optional[int] = None
    event_start: float = 5.0
    event_window: float = 60.0
    display_timer: float = 10.0
    beacon_period: float = 5.0
    beacon_jitter: float = 0.05
    sink_x: Optional[float] = None
    sink_y: Optional[float] = None
    sink_speed: float = 0.0
    sink_waypoints: tuple[tuple[float, float], ...] = ()
    hello_jitter: float = 1.0
    table_round: float = 2.0
    reply_timeout: float = 2.0
    coverage_spacing: float = 5.0
    max_cover_cardinality: int = 4
    source_window: int = 2
    proc_delay: float = 0.0
    best_case_latency: float = 0.94
    energy_min: float = 50.0
    energy_max: float = 100.0
    mac: MacConfig = field(default_factory=MacConfig)
    frame_overhead: int = 12
    image_file: Optional[str] = None

    def __post_init__(self):
        if self.scenario not in (1, 2, 3):
            raise ConfigError(f"scenario must be 1, 2 or 3, got {self.scenario!r}")
        if self.node_count <= 0 or self.area[0] <= 0 or self.area[1] <= 0:
            raise ConfigError("node count and area must be positive")
        if self.comm_range <= 0 or self.dov <= 0 or not (0 < self.aov_deg < 180):
            raise ConfigError("radio range, depth of view and angle of view must be positive")
        if self.runs < 1 or self.images_per_burst < 1:
            raise ConfigError("runs and images_per_burst must be >= 1")
        if self.capture_rate < 0 or self.path_factor <= 0:
            raise ConfigError("capture_rate must be >= 0 and path_factor > 0")
        if self.alpha < 0 or self.beta < 0 or abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ConfigError("alpha and beta must be non-negative and sum to 1")
        if not (0.0 <= self.sentry_fraction <= 1.0):
            raise ConfigError("sentry_fraction must lie in [0, 1]")

    @property
    def routing(self) -> str:
        return TGPSR if self.scenario == 3 else GPSR

    @property
    def radio(self) -> RadioModel:
        return RadioModel(range=self.comm_range, bitrate=self.bitrate, frame_overhead=self.frame_overhead)

    @property
    def image_spec(self) -> ImageSpec:
        return ImageSpec(raw_size=self.raw_size, encoded_size=self.encoded_size, payload_size=self.payload,
                         packet_count=self.packet_count)

    @property
    def aov(self) -> float:
        return math.radians(self.aov_deg)

    @property
    def sink_start(self) -> tuple[float, float]:
        x = self.area[0] / 2 if self.sink_x is None else self.sink_x
        y = self.area[1] / 2 if self.sink_y is None else self.sink_y
        return (x, y)

    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.runs)]

    def with_(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)

    def as_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["routing"] = self.routing
        return d


# flag / file key -> field name
ALIASES = {
    "nodes": "node_count",
    "range": "comm_range",
    "path-factor": "path_factor",
    "capture-rate": "capture_rate",
    "images-per-burst": "images_per_burst",
    "energy-floor": "energy_floor",
    "image-file": "image_file",
    "aov": "aov_deg",
    "display-timer": "display_timer",
    "beacon-period": "beacon_period",
    "sentry-fraction": "sentry_fraction",
    "events": "event_count",
    "event-window": "event_window",
}

_MAC_FIELDS = {f.name for f in fields(MacConfig)}


def _parse_area(text: str) -> tuple[float, float]:
    parts = text.lower().replace("*", "x").split("x")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v)
    if len(parts) == 2:
        return (float(parts[0]), float(parts[1]))
    raise ValueError(text)


def _parse_waypoints(text: str) -> tuple[tuple[float, float], ...]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            x, y = chunk.split(",")
            pts.append((float(x), float(y)))
    return tuple(pts)


def _optional(conv):
    def f(text: str):
        if text.strip().lower() in ("", "none"):
            return None
        return conv(text)
    return f


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


_CONVERTERS = {
    "area": _parse_area,
    "sink_waypoints": _parse_waypoints,
    "packet_count": _optional(int),
    "event_count": _optional(int),
    "sink_x": _optional(float),
    "sink_y": _optional(float),
    "image_file": _optional(str),
}


def _field_types() -> dict[str, Any]:
    out = {}
    for f in fields(ScenarioConfig):
        if f.name == "mac":
            continue
        default = f.default if f.default is not dataclasses.MISSING else None
        out[f.name] = type(default) if default is not None else str
    return out


def canonical_key(key: str) -> str:
    key = key.strip().lstrip("-")
    if key in ALIASES:
        return ALIASES[key]
    return key.replace("-", "_")


def convert(key: str, value: Any) -> tuple[str, Any]:
    """Resolve a flag/file key and coerce its value. Raises KeyError or ValueError."""
    name = canonical_key(key)
    if name.startswith("mac_") and name[4:] in _MAC_FIELDS:
        target = type(getattr(MacConfig(), name[4:]))
        if isinstance(value, str):
            value = float(value)
            if target is int and value != int(value):
                raise ValueError(value)
        return name, target(value)
    types = _field_types()
    if name not in types:
        raise KeyError(key)
    if not isinstance(value, str):
        return name, value
    if name in _CONVERTERS:
        return name, _CONVERTERS[name](value)
    t = types[name]
    if t is bool:
        return name, _bool(value)
    if t is int:
        f = float(value)
        if f != int(f):
            raise ValueError(value)
        return name, int(f)
    return name, t(value)


def read_config_file(path) -> dict[str, Any]:
    values: dict[str, Any] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            name, v = convert(key, value)
        except KeyError:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}") from None
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: malformed value {value!r} for key {key!r}") from None
        values[name] = v
    return values


def parse_config(path=None, overrides: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """Defaults, then file values, then flag overrides (``None`` overrides are ignored)."""
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        try:
            name, v = convert(key, value)
        except KeyError:
            raise ConfigError(f"unknown key {key!r}") from None
        except ValueError:
            raise ConfigError(f"malformed value {value!r} for key {key!r}") from None
        values[name] = v
    mac_kw = {k[4:]: values.pop(k) for k in list(values) if k.startswith("mac_")}
    if mac_kw:
        values["mac"] = MacConfig(**mac_kw)
    try:
        return ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
