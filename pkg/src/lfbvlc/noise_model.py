"""Receiver noise: shot + thermal variance of a PIN/FET-TIA front end, and
AWGN injection at a prescribed SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .led_device import DomainError, TIA_BANDWIDTH_HZ

ELEMENTARY_CHARGE = 1.602176634e-19
BOLTZMANN = 1.380649e-23
TIA_BANDWIDTH_FACTOR = 0.562
TIA_NOISE_FACTOR = 0.0868


@dataclass(frozen=True)
class NoiseParams:
    """Front-end parameters in SI units.

    Electronics defaults follow the usual indoor VLC receiver design values
    (112 pF/cm^2 PIN capacitance, G_ol = 10, Gamma = 1.5, g_m = 30 mS,
    5.8 uW/(cm^2 nm) background over a 300 nm filter).
    """

    bandwidth_hz: float = TIA_BANDWIDTH_HZ
    responsivity: float = 0.54
    pd_area: float = 1e-6
    background_irradiance: float = 5.8e-2
    optical_filter_bw_nm: float = 300.0
    dark_current: float = 2e-9
    temp_kelvin: float = 295.0
    open_loop_gain: float = 10.0
    pd_cap_per_area: float = 1.12e-6
    fet_noise_factor: float = 1.5
    fet_transconductance: float = 30e-3
    elementary_charge: float = ELEMENTARY_CHARGE
    boltzmann: float = BOLTZMANN
    i2: float = field(default=TIA_BANDWIDTH_FACTOR, init=False)
    i3: float = field(default=TIA_NOISE_FACTOR, init=False)

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        for name in (
            "responsivity", "pd_area", "background_irradiance", "optical_filter_bw_nm",
            "dark_current", "temp_kelvin", "open_loop_gain", "pd_cap_per_area",
            "fet_noise_factor", "fet_transconductance", "elementary_charge", "boltzmann",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def shot_variance(params: NoiseParams, received_power: float) -> float:
    """Shot-noise current variance (A^2) for received optical power in W."""
    if received_power < 0:
        raise DomainError("received power must be >= 0")
    p = params
    photo = p.responsivity * (received_power + p.pd_area * p.background_irradiance * p.optical_filter_bw_nm)
    return 2.0 * p.elementary_charge * p.bandwidth_hz * (photo + p.dark_current)


def thermal_variance(params: NoiseParams) -> float:
    """Feedback-resistor plus FET-channel noise variance (A^2)."""
    p = params
    if p.open_loop_gain <= 0 or p.fet_transconductance <= 0:
        raise DomainError("open_loop_gain and fet_transconductance must be > 0")
    kt = p.boltzmann * p.temp_kelvin
    c = p.pd_cap_per_area
    a = p.pd_area
    b = p.bandwidth_hz
    feedback = 8.0 * math.pi * kt / p.open_loop_gain * c * a * p.i2 * b**2
    channel = 16.0 * math.pi**2 * kt * p.fet_noise_factor / p.fet_transconductance * c**2 * a**2 * p.i3 * b**3
    return feedback + channel


def total_noise_std(params: NoiseParams, received_power: float) -> float:
    return math.sqrt(shot_variance(params, received_power) + thermal_variance(params))


def noise_variance_for_snr(signal_power: float, snr_db: float) -> float:
    return signal_power / 10.0 ** (snr_db / 10.0)


def awgn_at_snr(signal, snr_db: float, rng_seed) -> np.ndarray:
    """Add white Gaussian noise with variance var(signal) / 10**(snr_db/10).

    `rng_seed` may be an int, a SeedSequence or a Generator.
    """
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ValueError("signal must be nonempty")
    var = float(np.var(x))
    if var == 0.0:
        raise ValueError("signal has zero variance; SNR is undefined")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    sigma = math.sqrt(noise_variance_for_snr(var, snr_db))
    return x + sigma * rng.standard_normal(x.shape)
