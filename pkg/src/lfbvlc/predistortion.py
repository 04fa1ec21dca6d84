"""Second-order digital pre-distortion calibrated from luminous feedback.

Calibration sweeps J equally spaced drive levels, averages the feedback TIA
voltage at each, fits drive current as a quadratic in voltage, resamples
that fit on an equally spaced voltage grid and finally fits the resampled
drive currents against the original level grid.  The resulting quadratic
maps a zero-mean OFDM current onto the drive current that makes the light
output linear in the input.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .led_device import LedModel, optical_power

log = logging.getLogger(__name__)

FeedbackSampler = Callable[[np.ndarray], np.ndarray]

DEFAULT_LEVELS = 64
DEFAULT_SAMPLES_PER_LEVEL = 16
DEFAULT_TIA_GAIN = 32e3


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PolyFit:
    a: float
    b: float
    c: float
    r: float

    @property
    def coeffs(self) -> tuple[float, float, float]:
        return self.a, self.b, self.c

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (self.a * x + self.b) * x + self.c


def polyfit2(xs, ys) -> PolyFit:
    """Least-squares y = a x^2 + b x + c via QR on a centered, scaled basis.

    `r` is the correlation coefficient sqrt(1 - SS_res / SS_tot).
    """
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("xs and ys differ in length")
    if np.unique(x).size < 3:
        raise ValueError("polyfit2 needs at least 3 distinct x values")
    mu = x.mean()
    s = np.abs(x - mu).max()
    t = (x - mu) / s
    basis = np.column_stack([np.ones_like(t), t, t * t])
    q, r = np.linalg.qr(basis)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * diag.max():
        raise ValueError("rank-deficient design in polyfit2")
    p0, p1, p2 = np.linalg.solve(r, q.T @ y)
    # back to the raw variable: t = (x - mu) / s
    a = p2 / s**2
    b = p1 / s - 2.0 * p2 * mu / s**2
    c = p0 - p1 * mu / s + p2 * mu**2 / s**2
    resid = y - basis @ np.array([p0, p1, p2])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    corr = 1.0 if ss_tot == 0.0 else float(np.sqrt(max(0.0, 1.0 - ss_res / ss_tot)))
    return PolyFit(float(a), float(b), float(c), corr)


@dataclass(frozen=True)
class DpdCurve:
    """Drive current = c2 I^2 + c1 I + c0 for modulating current I."""

    c2: float
    c1: float
    c0: float
    source_mode: str = "none"
    calib_temp: float | None = None
    calib_levels: int = 0

    MODES = ("none", "fixed", "luminous_feedback")

    def __post_init__(self):
        if self.source_mode not in self.MODES:
            raise ValueError(f"source_mode must be one of {self.MODES}")

    @property
    def bias_current(self) -> float:
        return self.c0

    @classmethod
    def passthrough(cls, bias: float) -> "DpdCurve":
        """No pre-distortion: the frame plus a static bias."""
        return cls(0.0, 1.0, float(bias), "none")

    def is_increasing(self, i_lo: float, i_hi: float) -> bool:
        return bool(2 * self.c2 * i_lo + self.c1 > 0 and 2 * self.c2 * i_hi + self.c1 > 0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["c2", "c1", "c0", "bias_current", "source_mode", "calib_temp"])
            w.writerow([
                repr(self.c2), repr(self.c1), repr(self.c0), repr(self.bias_current),
                self.source_mode, "" if self.calib_temp is None else repr(self.calib_temp),
            ])

    @classmethod
    def from_csv(cls, path) -> "DpdCurve":
        with open(path, newline="") as fh:
            rec = next(csv.DictReader(fh))
        temp = rec.get("calib_temp") or None
        return cls(
            float(rec["c2"]), float(rec["c1"]), float(rec["c0"]),
            rec["source_mode"], None if temp is None else float(temp),
        )


def apply(curve: DpdCurve, frame, current_range: tuple[float, float] | None = None):
    """Drive current(s) for modulating current(s) `frame`."""
    i = np.asarray(frame, dtype=float)
    out = (curve.c2 * i + curve.c1) * i + curve.c0
    if current_range is not None:
        lo, hi = current_range
        if out.size and (out.min() < lo or out.max() > hi):
            raise ValueError(f"pre-distorted drive leaves the LED range [{lo}, {hi}] A")
    return out


def calibrate(
    sampler: FeedbackSampler,
    j_levels: int = DEFAULT_LEVELS,
    i_lo: float = -0.15,
    i_hi: float = 0.15,
    i_bias0: float = 0.175,
    samples_per_level: int = DEFAULT_SAMPLES_PER_LEVEL,
    source_mode: str = "luminous_feedback",
    calib_temp: float | None = None,
) -> DpdCurve:
    if j_levels < 3:
        raise ValueError("calibration needs at least 3 current levels")
    if not i_lo < i_hi:
        raise ValueError("i_lo must be < i_hi")
    if samples_per_level < 1:
        raise ValueError("samples_per_level must be >= 1")

    levels = i_lo + (i_hi - i_lo) * np.arange(j_levels) / (j_levels - 1)
    drive = levels + i_bias0

    volts = np.asarray(sampler(np.repeat(drive, samples_per_level)), dtype=float)
    v_mean = volts.reshape(j_levels, samples_per_level).mean(axis=1)
    steps = np.diff(v_mean)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        bad = int(np.argmin(np.abs(steps))) if np.all(steps != 0) else int(np.flatnonzero(steps == 0)[0])
        raise CalibrationError(
            f"feedback voltage is not monotone in drive current (first offending step at "
            f"level {bad}: {drive[bad]:.4g} A -> {drive[bad + 1]:.4g} A)"
        )

    inverse = polyfit2(v_mean, drive)
    v_lo, v_hi = float(v_mean.min()), float(v_mean.max())
    # the fitted inverse must not fold back inside the observed voltage span
    slopes = (2 * inverse.a * v_lo + inverse.b, 2 * inverse.a * v_hi + inverse.b)
    if slopes[0] * slopes[1] <= 0:
        raise CalibrationError("fitted current-vs-voltage parabola is not monotone over the observed span")

    v_grid = v_lo + (v_hi - v_lo) * np.arange(j_levels) / (j_levels - 1)
    if steps[0] < 0:
        v_grid = v_grid[::-1]
    drive_grid = inverse(v_grid)
    fit = polyfit2(levels, drive_grid)
    curve = DpdCurve(fit.a, fit.b, fit.c, source_mode, calib_temp, j_levels)
    if not curve.is_increasing(i_lo, i_hi):
        raise CalibrationError("calibrated drive curve is not increasing over the modulation range")
    log.debug("DPD calibrated: c2=%.6g c1=%.6g c0=%.6g", curve.c2, curve.c1, curve.c0)
    return curve


def led_feedback_sampler(
    led: LedModel,
    temp: float,
    omega_fb: float,
    responsivity: float = 0.54,
    tia_gain: float = DEFAULT_TIA_GAIN,
    noise_std_a: Callable[[float], float] | None = None,
    rng: np.random.Generator | None = None,
) -> FeedbackSampler:
    """Feedback PD + TIA voltage for a DC drive current.

    `noise_std_a` maps received optical power (W) to the input-referred
    noise current std (A); leave it None for a noiseless sampler.
    """
    if noise_std_a is not None and rng is None:
        raise ValueError("a noisy sampler needs an explicit rng")

    def sample(currents):
        i = np.clip(np.asarray(currents, dtype=float), *led.current_range)
        p_rx = omega_fb * optical_power(led, i, temp)
        i_pd = responsivity * p_rx
        if noise_std_a is not None:
            std = np.array([noise_std_a(float(p)) for p in np.atleast_1d(p_rx)]).reshape(np.shape(p_rx))
            i_pd = i_pd + std * rng.standard_normal(np.shape(p_rx))
        return tia_gain * i_pd

    return sample


def make_fixed_dpd(
    led_model: LedModel,
    calib_temp: float,
    omega_fb: float = 1.0,
    j_levels: int = DEFAULT_LEVELS,
    i_lo: float = -0.15,
    i_hi: float = 0.15,
    i_bias0: float = 0.175,
    responsivity: float = 0.54,
    tia_gain: float = DEFAULT_TIA_GAIN,
) -> DpdCurve:
    """Factory calibration at one temperature against a noiseless sampler."""
    sampler = led_feedback_sampler(led_model, calib_temp, omega_fb, responsivity, tia_gain)
    return calibrate(sampler, j_levels, i_lo, i_hi, i_bias0, 1, "fixed", calib_temp)


def linearity_residual(led_model: LedModel, curve: DpdCurve, temp: float,
                       i_lo: float = -0.15, i_hi: float = 0.15, n: int = 1001) -> tuple[float, float]:
    """Normalized RMS deviation of P(apply(curve, I)) from its best straight
    line (fraction of the output full scale) and the quadratic coefficient
    of the composed response."""
    i = np.linspace(i_lo, i_hi, n)
    drive = np.clip(apply(curve, i), *led_model.current_range)
    p = optical_power(led_model, drive, temp)
    line = np.polynomial.polynomial.Polynomial.fit(i, p, 1)
    rms = float(np.sqrt(np.mean((p - line(i)) ** 2)))
    full_scale = float(p.max() - p.min())
    curvature = polyfit2(i, p).a
    return rms / full_scale, curvature
