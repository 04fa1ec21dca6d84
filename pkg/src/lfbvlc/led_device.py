"""HPLED electro-optical model: temperature-dependent quadratic P(I), the
flux/TIA-voltage conversions of the characterization rig, and the
frequency response of the LED -> PD -> TIA chain."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

FLUX_REF_LM = 115.0
VTIA_REF_V = 3.457
WATTS_PER_LUMEN = 2.1e-3
TIA_BANDWIDTH_HZ = 10.01e6
LED_CUTOFF_HZ = 2.0e6

# temp_c, A [W/A^2], B [W/A], C [W], R
LED_POLY_TABLE = (
    (-10.0, -0.23735, 0.764263, 0.009285, 0.99997),
    (0.0, -0.24969, 0.763086, 0.008686, 0.99998),
    (10.0, -0.22750, 0.751208, 0.008882, 0.99999),
    (20.0, -0.24060, 0.745831, 0.008781, 0.99998),
    (30.0, -0.22566, 0.742316, 0.008848, 0.99997),
    (40.0, -0.25976, 0.734123, 0.008910, 0.99993),
    (50.0, -0.26767, 0.730652, 0.008128, 0.99997),
    (60.0, -0.26323, 0.722152, 0.008205, 0.99998),
    (70.0, -0.27341, 0.713003, 0.007769, 0.99997),
    (80.0, -0.27189, 0.698047, 0.007694, 0.99997),
    (90.0, -0.26485, 0.680774, 0.007487, 0.99997),
    (100.0, -0.25532, 0.661240, 0.007331, 0.99997),
)


class DomainError(ValueError):
    """Argument outside the range a model is valid for."""


@dataclass(frozen=True)
class LedPolyEntry:
    temp_c: float
    a2: float
    a1: float
    a0: float
    corr: float | None = None


@dataclass(frozen=True)
class LedModel:
    """Quadratic optical power vs. drive current, tabulated over temperature.

    Coefficients are interpolated linearly between bracketing rows.
    """

    entries: tuple[LedPolyEntry, ...]
    flux_ref_lm: float = FLUX_REF_LM
    vtia_ref_v: float = VTIA_REF_V
    watts_per_lumen: float = WATTS_PER_LUMEN
    current_range: tuple[float, float] = (0.0, 0.35)
    allow_extrapolation: bool = False

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("LED model needs at least one temperature entry")
        temps = [e.temp_c for e in entries]
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise ValueError("LED model temperatures must be strictly increasing")
        if self.watts_per_lumen <= 0:
            raise ValueError("watts_per_lumen must be > 0")
        lo, hi = self.current_range
        if not lo < hi:
            raise ValueError("current_range must satisfy I_min < I_max")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "current_range", (float(lo), float(hi)))

    @classmethod
    def default(cls, **kwargs) -> "LedModel":
        return cls(tuple(LedPolyEntry(*row) for row in LED_POLY_TABLE), **kwargs)

    @classmethod
    def from_csv(cls, path, **kwargs) -> "LedModel":
        """Read a `temp_c,a2,a1,a0` table (extra columns such as `corr` are kept)."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"temp_c", "a2", "a1", "a0"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"LED model CSV missing columns: {sorted(missing)}")
            for rec in reader:
                corr = rec.get("corr")
                rows.append(
                    LedPolyEntry(
                        float(rec["temp_c"]),
                        float(rec["a2"]),
                        float(rec["a1"]),
                        float(rec["a0"]),
                        float(corr) if corr not in (None, "") else None,
                    )
                )
        rows.sort(key=lambda e: e.temp_c)
        return cls(tuple(rows), **kwargs)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["temp_c", "a2", "a1", "a0"])
            for e in self.entries:
                w.writerow([repr(e.temp_c), repr(e.a2), repr(e.a1), repr(e.a0)])

    @property
    def temperatures(self) -> tuple[float, ...]:
        return tuple(e.temp_c for e in self.entries)

    def coefficients(self, temp: float) -> tuple[float, float, float]:
        """(a2, a1, a0) at `temp` degrees C."""
        temps = self.temperatures
        if len(temps) == 1:
            e = self.entries[0]
            if temp != e.temp_c and not self.allow_extrapolation:
                raise DomainError(f"temperature {temp} C outside table [{e.temp_c}, {e.temp_c}] C")
            return e.a2, e.a1, e.a0
        if (temp < temps[0] or temp > temps[-1]) and not self.allow_extrapolation:
            raise DomainError(
                f"temperature {temp} C outside table [{temps[0]}, {temps[-1]}] C; "
                "set allow_extrapolation to extend"
            )
        k = int(np.searchsorted(temps, temp, side="right")) - 1
        k = min(max(k, 0), len(temps) - 2)
        lo, hi = self.entries[k], self.entries[k + 1]
        if temp == lo.temp_c:
            return lo.a2, lo.a1, lo.a0
        if temp == hi.temp_c:
            return hi.a2, hi.a1, hi.a0
        w = (temp - lo.temp_c) / (hi.temp_c - lo.temp_c)
        return (
            lo.a2 + w * (hi.a2 - lo.a2),
            lo.a1 + w * (hi.a1 - lo.a1),
            lo.a0 + w * (hi.a0 - lo.a0),
        )

    def check_current(self, i_led) -> None:
        lo, hi = self.current_range
        arr = np.asarray(i_led, dtype=float)
        if arr.size and (arr.min() < lo or arr.max() > hi):
            raise DomainError(
                f"LED current outside the valid range [{lo}, {hi}] A "
                f"(got min {arr.min():.6g}, max {arr.max():.6g})"
            )

    def small_signal_slope(self, i_bias: float, temp: float) -> float:
        a2, a1, _ = self.coefficients(temp)
        return 2.0 * a2 * i_bias + a1


def optical_power(model: LedModel, i_led, temp: float):
    """Transmitted optical power in W for drive current(s) `i_led` in A."""
    model.check_current(i_led)
    a2, a1, a0 = model.coefficients(temp)
    i = np.asarray(i_led, dtype=float)
    p = (a2 * i + a1) * i + a0
    return float(p) if p.ndim == 0 else p


def flux_from_tia_voltage(v_tia, model: LedModel | None = None):
    """Luminous flux (lm) from the characterization rig's TIA voltage."""
    ref_lm = model.flux_ref_lm if model else FLUX_REF_LM
    ref_v = model.vtia_ref_v if model else VTIA_REF_V
    v = np.asarray(v_tia, dtype=float)
    if np.any(v < 0):
        raise DomainError("TIA voltage must be >= 0")
    out = (ref_lm / ref_v) * v
    return float(out) if out.ndim == 0 else out


def optical_power_from_flux(flux, model: LedModel | None = None):
    """Optical power (W) of a phosphor-coated blue LED from flux (lm)."""
    k = model.watts_per_lumen if model else WATTS_PER_LUMEN
    f = np.asarray(flux, dtype=float)
    if np.any(f < 0):
        raise DomainError("flux must be >= 0")
    out = k * f
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FrequencyResponse:
    """Sampled complex response: linear interpolation of magnitude and phase,
    held constant outside the sampled band."""

    freq_hz: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray
    interpolation: str = "linear"

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float).ravel()
        m = np.asarray(self.magnitude, dtype=float).ravel()
        p = np.asarray(self.phase, dtype=float).ravel()
        if f.size == 0:
            raise ValueError("frequency response table is empty")
        if not (f.size == m.size == p.size):
            raise ValueError("freq, magnitude and phase must have equal length")
        if np.any(f < 0) or np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be >= 0 and strictly increasing")
        if np.any(m < 0):
            raise ValueError("magnitudes must be >= 0")
        if self.interpolation != "linear":
            raise ValueError(f"unsupported interpolation {self.interpolation!r}")
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "phase", np.unwrap(p))

    @classmethod
    def flat(cls, magnitude: float = 1.0) -> "FrequencyResponse":
        return cls(np.array([0.0]), np.array([magnitude]), np.array([0.0]))

    @classmethod
    def from_csv(cls, path) -> "FrequencyResponse":
        """Read `freq_hz,magnitude_db,phase_deg` (20*log10 magnitude)."""
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
        names = set(data.dtype.names or ())
        need = {"freq_hz", "magnitude_db", "phase_deg"}
        if not need <= names:
            raise ValueError(f"response CSV missing columns: {sorted(need - names)}")
        data = np.atleast_1d(data)
        return cls(
            data["freq_hz"],
            10.0 ** (data["magnitude_db"] / 20.0),
            np.deg2rad(data["phase_deg"]),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["freq_hz", "magnitude_db", "phase_deg"])
            with np.errstate(divide="ignore"):
                mag_db = 20.0 * np.log10(self.magnitude)
            for f, m, p in zip(self.freq_hz, mag_db, np.rad2deg(self.phase)):
                w.writerow([repr(float(f)), repr(float(m)), repr(float(p))])

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        if np.any(f < 0):
            raise ValueError("frequency must be >= 0")
        mag = np.interp(f, self.freq_hz, self.magnitude)
        ph = np.interp(f, self.freq_hz, self.phase)
        out = mag * np.exp(1j * ph)
        return complex(out) if out.ndim == 0 else out


def electric_gain(resp: FrequencyResponse, omega_dc: float, f):
    """Combined electric gain at frequency `f`: response shape times the
    optical DC gain."""
    return omega_dc * resp(f)


def lowpass_transfer(f, f_led_cutoff=LED_CUTOFF_HZ, f_tia_bandwidth=TIA_BANDWIDTH_HZ):
    """First-order LED pole times a second-order Butterworth TIA, exact."""
    s = 1j * np.asarray(f, dtype=float)
    led = 1.0 / (1.0 + s / f_led_cutoff)
    if math.isinf(f_tia_bandwidth):
        return led
    u = s / f_tia_bandwidth
    tia = 1.0 / (1.0 + math.sqrt(2.0) * u + u * u)
    return led * tia


def default_lowpass_response(
    f_led_cutoff: float = LED_CUTOFF_HZ,
    f_tia_bandwidth: float = TIA_BANDWIDTH_HZ,
    n_points: int = 513,
    f_max: float = 20e6,
) -> FrequencyResponse:
    """Parametric stand-in for the measured electric-gain curve."""
    if f_led_cutoff <= 0 or f_tia_bandwidth <= 0:
        raise ValueError("cutoff frequencies must be > 0")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    f = np.linspace(0.0, f_max, n_points)
    h = lowpass_transfer(f, f_led_cutoff, f_tia_bandwidth)
    return FrequencyResponse(f, np.abs(h), np.unwrap(np.angle(h)))
