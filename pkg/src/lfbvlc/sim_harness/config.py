"""Experiment configuration: dataclasses with the default link parameters
and a TOML loader.  Every key is optional; missing keys keep defaults."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli

from ..channel_geometry import LinkGeometry
from ..led_device import (
    FrequencyResponse, LED_CUTOFF_HZ, LedModel, TIA_BANDWIDTH_HZ, default_lowpass_response,
)
from ..noise_model import NoiseParams
from ..ofdm_phy import OfdmConfig

SCHEMES = ("W-DPD", "F-DPD", "LFB-DPD")
EQUALIZATION = ("Post-Eq", "PP-Eq")
CAMPAIGNS = ("fig7", "fig10", "distance", "custom")


@dataclass(frozen=True)
class GeometryConfig:
    led_pos: tuple[float, float, float] = (2.0, 2.0, 3.0)
    led_normal: tuple[float, float, float] = (0.0, 0.0, -1.0)
    rx_pos: tuple[float, float, float] = (2.0, 2.0, 1.0)
    rx_normal: tuple[float, float, float] = (0.0, 0.0, 1.0)
    fb_pos: tuple[float, float, float] = (1.98, 2.0, 2.98)
    fb_normal: tuple[float, float, float] = (1 / math.sqrt(2), 0.0, 1 / math.sqrt(2))
    lambert_order: float = 0.5
    pd_area: float = 1e-6

    def build(self) -> LinkGeometry:
        return LinkGeometry(**{f.name: getattr(self, f.name) for f in fields(self)})


@dataclass(frozen=True)
class LedConfig:
    model_path: str | None = None
    i_bias0: float = 0.175
    current_min: float = 0.0
    current_max: float = 0.35
    allow_extrapolation: bool = False

    def build(self) -> LedModel:
        kw = dict(current_range=(self.current_min, self.current_max),
                  allow_extrapolation=self.allow_extrapolation)
        if self.model_path:
            return LedModel.from_csv(self.model_path, **kw)
        return LedModel.default(**kw)


@dataclass(frozen=True)
class ResponseConfig:
    """Electric-gain shape: `flat`, `lowpass` (parametric) or `csv`."""

    kind: str = "lowpass"
    path: str | None = None
    f_led_cutoff: float = LED_CUTOFF_HZ
    f_tia_bandwidth: float = TIA_BANDWIDTH_HZ
    n_points: int = 513
    f_max: float = 20e6

    def build(self) -> FrequencyResponse:
        if self.kind == "flat":
            return FrequencyResponse.flat()
        if self.kind == "lowpass":
            return default_lowpass_response(self.f_led_cutoff, self.f_tia_bandwidth, self.n_points, self.f_max)
        if self.kind == "csv":
            if not self.path:
                raise ValueError("response kind 'csv' needs a path")
            return FrequencyResponse.from_csv(self.path)
        raise ValueError(f"unknown response kind {self.kind!r}")


@dataclass(frozen=True)
class LinkConfig:
    responsivity: float = 0.54
    tia_gain: float = 32e3
    dpd_levels: int = 64
    dpd_samples_per_level: int = 16
    noiseless_calibration: bool = False
    probe_frames: int = 16
    epsilon_db: float = 40.0
    preeq_normalization: str = "inverse"
    pilot: str = "constant_modulus"

    def __post_init__(self):
        if self.pilot not in ("qam", "constant_modulus"):
            raise ValueError("pilot must be 'qam' or 'constant_modulus'")


@dataclass(frozen=True)
class ExperimentConfig:
    """Scheme matrix, grids and Monte Carlo stopping rules."""

    schemes: tuple[str, ...] = SCHEMES
    equalization: tuple[str, ...] = ("Post-Eq",)
    fdpd_calib_temp: float = 50.0
    led_temps_c: tuple[float, ...] = (0.0, 20.0, 40.0, 60.0, 80.0, 100.0)
    mod_orders: tuple[int, ...] = (16, 64, 256)
    snr_grid_db: tuple[float, ...] = tuple(float(s) for s in range(0, 41, 4))
    distance_grid_m: tuple[float, ...] = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1)
    noise_mode: str = "snr"
    target_bit_errors: int = 100
    max_bits: int = 2_000_000
    frames_per_burst: int = 32
    ideal_csi: bool = False
    seed: int = 2024

    def __post_init__(self):
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
        for e in self.equalization:
            if e not in EQUALIZATION:
                raise ValueError(f"unknown equalization {e!r}; expected one of {EQUALIZATION}")
        if self.noise_mode not in ("snr", "physical"):
            raise ValueError("noise_mode must be 'snr' or 'physical'")
        if self.target_bit_errors < 100:
            raise ValueError("target_bit_errors must be >= 100")
        if self.max_bits <= 0 or self.frames_per_burst <= 0:
            raise ValueError("max_bits and frames_per_burst must be > 0")


@dataclass(frozen=True)
class SimConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    led: LedConfig = field(default_factory=LedConfig)
    response: ResponseConfig = field(default_factory=ResponseConfig)
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    noise: NoiseParams = field(default_factory=NoiseParams)
    link: LinkConfig = field(default_factory=LinkConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def to_dict(self) -> dict:
        return {f.name: _plain(asdict(getattr(self, f.name))) for f in fields(self)}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_experiment(self, **changes) -> "SimConfig":
        return replace(self, experiment=replace(self.experiment, **changes))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _section(cls, data: dict | None, where: str):
    data = dict(data or {})
    names = {f.name: f for f in fields(cls) if f.init}
    unknown = set(data) - set(names)
    if unknown:
        raise ValueError(f"unknown key(s) in [{where}]: {sorted(unknown)}")
    for k, v in list(data.items()):
        if isinstance(v, list):
            data[k] = tuple(v)
    return cls(**data)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> SimConfig:
    """Read a TOML experiment file; relative file paths resolve against it."""
    raw: dict = {}
    base = Path(".")
    if path is not None:
        base = Path(path).resolve().parent
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    for key, value in (overrides or {}).items():
        raw.setdefault(key, {}).update(value)
    unknown = set(raw) - {f.name for f in fields(SimConfig)}
    if unknown:
        raise ValueError(f"unknown config section(s): {sorted(unknown)}")
    for sec, key in (("led", "model_path"), ("response", "path")):
        p = raw.get(sec, {}).get(key)
        if p and not Path(p).is_absolute():
            raw[sec][key] = str(base / p)
    return SimConfig(
        geometry=_section(GeometryConfig, raw.get("geometry"), "geometry"),
        led=_section(LedConfig, raw.get("led"), "led"),
        response=_section(ResponseConfig, raw.get("response"), "response"),
        ofdm=_section(OfdmConfig, raw.get("ofdm"), "ofdm"),
        noise=_section(NoiseParams, raw.get("noise"), "noise"),
        link=_section(LinkConfig, raw.get("link"), "link"),
        experiment=_section(ExperimentConfig, raw.get("experiment"), "experiment"),
    )
