"""End-to-end DCO-OFDM VLC link and the sequential Monte Carlo BER loop.

Chain per frame: bits -> QAM -> Hermitian map -> subcarrier gains -> IDFT/CP
-> clip -> DPD -> LED at its junction temperature -> optical gain -> electric
gain shape (per-bin, circular thanks to the CP) -> noise -> receive DFT ->
pilot ZF -> demap.  Each burst starts with one known pilot frame.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..channel_geometry import LinkGeometry, gain_from_vectors
from ..led_device import FrequencyResponse, LedModel, optical_power
from ..noise_model import NoiseParams, total_noise_std
from ..ofdm_phy import (
    OfdmConfig, add_cyclic_prefix, bits_per_symbol, hard_clip, qam_average_power, hermitian_map, qam_demodulate,
    qam_modulate,
)
from ..pre_equalization import GainVector, flat_gains, run_preeq_protocol
from ..predistortion import DpdCurve, apply, calibrate, led_feedback_sampler, make_fixed_dpd
from .config import SimConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BerPoint:
    scheme: str
    equalization: str
    mod_order: int
    led_temp_c: float
    snr_db: float | None = None
    distance_m: float | None = None

    @property
    def label(self) -> str:
        return self.scheme


@dataclass(frozen=True)
class BerRecord:
    campaign: str
    point_index: int
    scheme: str
    equalization: str
    mod_order: int
    led_temp_c: float
    snr_db: float
    distance_m: float | None
    bits_sent: int
    bit_errors: int
    censored: bool
    seed: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent if self.bits_sent else 0.0


def scheme_label(scheme: str, calib_temp: float) -> str:
    return f"F-DPD({calib_temp:g})" if scheme == "F-DPD" else scheme


def bin_response(resp: FrequencyResponse, ofdm: OfdmConfig) -> np.ndarray:
    """Response at bins 0..N/2 (the upper half follows by symmetry)."""
    return np.asarray(resp(ofdm.bin_frequencies()), dtype=complex)


class Link:
    """One configured transmitter/channel/receiver instance."""

    def __init__(self, cfg: SimConfig, mod_order: int, led_temp_c: float,
                 geometry: LinkGeometry | None = None,
                 response: FrequencyResponse | None = None):
        self.cfg = cfg
        self.ofdm = replace(cfg.ofdm, mod_order=mod_order)
        self.led: LedModel = cfg.led.build()
        self.temp = float(led_temp_c)
        self.geometry = geometry or cfg.geometry.build()
        self.omega_rx = gain_from_vectors(self.geometry, "remote")
        self.omega_fb = gain_from_vectors(self.geometry, "feedback")
        resp = response or cfg.response.build()
        self.h = bin_response(resp, self.ofdm)
        self.noise: NoiseParams = cfg.noise
        self.dpd: DpdCurve = DpdCurve.passthrough(cfg.led.i_bias0)
        self.gains: GainVector = flat_gains(self.ofdm)
        self.clamped_samples = 0

    # -- transmitter ---------------------------------------------------------

    def random_symbols(self, rng: np.random.Generator, n_frames: int):
        k = bits_per_symbol(self.ofdm.mod_order)
        bits = rng.integers(0, 2, size=(n_frames, self.ofdm.n_active * k), dtype=np.uint8)
        return bits, qam_modulate(bits, self.ofdm.mod_order)

    def modulate(self, symbols, gains: GainVector | None = None):
        """Drive-independent part: returns (clipped current frames, X)."""
        o = self.ofdm
        g = (gains or self.gains).values
        x = hermitian_map(symbols, o.n_fft, o.n_suppressed) * g
        body = np.fft.irfft(x[..., : o.n_fft // 2 + 1], n=o.n_fft, axis=-1)
        u = add_cyclic_prefix(body, o.n_cp)
        return hard_clip(u, o.clip_lo, o.clip_hi), x

    def light(self, current_frames) -> np.ndarray:
        """Optical power (W) emitted for modulating-current frames."""
        drive = apply(self.dpd, current_frames)
        lo, hi = self.led.current_range
        n_out = int(np.count_nonzero((drive < lo) | (drive > hi)))
        if n_out:
            self.clamped_samples += n_out
            drive = np.clip(drive, lo, hi)
        return optical_power(self.led, drive, self.temp)

    def transmit(self, symbols, gains: GainVector | None = None):
        current, x = self.modulate(symbols, gains)
        return self.light(current), x

    # -- optical/electrical path ---------------------------------------------

    def received_spectrum(self, light, omega: float) -> np.ndarray:
        """Noiseless TIA-output DFT (bins 0..N/2) for emitted light frames."""
        body = np.asarray(light)[..., self.ofdm.n_cp :]
        p = np.fft.rfft(body, axis=-1)
        scale = self.cfg.link.tia_gain * self.cfg.noise.responsivity * omega
        return scale * self.h * p

    def sample_noise_var(self, received_power: float) -> float:
        """Per-sample TIA-output noise variance (V^2) in the simulated band."""
        std = total_noise_std(self.noise, received_power) * self.cfg.link.tia_gain
        band = self.ofdm.sample_rate / 2.0
        return std**2 * band / self.noise.bandwidth_hz

    def feedback_capture(self, light, rng: np.random.Generator | None) -> np.ndarray:
        """Feedback TIA samples (CP included) for emitted light frames."""
        o = self.ofdm
        spec = self.received_spectrum(light, self.omega_fb)
        body = np.fft.irfft(spec, n=o.n_fft, axis=-1)
        if rng is not None:
            p_r = self.omega_fb * float(np.mean(light))
            body = body + math.sqrt(self.sample_noise_var(p_r)) * rng.standard_normal(body.shape)
        return add_cyclic_prefix(body, o.n_cp)

    # -- compensation mode -----------------------------------------------------

    def calibrate_dpd(self, scheme: str, rng: np.random.Generator | None) -> DpdCurve:
        lc = self.cfg.link
        o = self.ofdm
        bias = self.cfg.led.i_bias0
        if scheme == "W-DPD":
            self.dpd = DpdCurve.passthrough(bias)
        elif scheme == "F-DPD":
            self.dpd = make_fixed_dpd(
                self.led, self.cfg.experiment.fdpd_calib_temp, self.omega_fb, lc.dpd_levels,
                o.clip_lo, o.clip_hi, bias, self.noise.responsivity, lc.tia_gain,
            )
        elif scheme == "LFB-DPD":
            noisy = rng is not None and not lc.noiseless_calibration
            sampler = led_feedback_sampler(
                self.led, self.temp, self.omega_fb, self.noise.responsivity, lc.tia_gain,
                noise_std_a=(lambda p: math.sqrt(self.sample_noise_var(p)) / lc.tia_gain) if noisy else None,
                rng=rng if noisy else None,
            )
            spl = lc.dpd_samples_per_level if noisy else 1
            self.dpd = calibrate(sampler, lc.dpd_levels, o.clip_lo, o.clip_hi, bias, spl,
                                 "luminous_feedback", self.temp)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        return self.dpd

    def estimate_gains(self, equalization: str, rng: np.random.Generator | None) -> GainVector:
        lc = self.cfg.link
        if equalization == "Post-Eq":
            self.gains = flat_gains(self.ofdm)
            return self.gains
        if equalization != "PP-Eq":
            raise ValueError(f"unknown equalization {equalization!r}")
        probe_rng = rng or np.random.default_rng(0)

        def transmitter(gains):
            _, sym = self.random_symbols(probe_rng, lc.probe_frames)
            return self.transmit(sym, gains)

        self.gains = run_preeq_protocol(
            transmitter, lambda light: self.feedback_capture(light, rng), self.ofdm,
            lc.epsilon_db, lc.preeq_normalization,
        )
        return self.gains

    # -- data mode -------------------------------------------------------------

    def burst(self, rng: np.random.Generator, n_frames: int, snr_db: float | None,
              ideal_csi: bool = False):
        """Send one pilot frame plus `n_frames` payload frames.

        Returns (tx_bits, rx_bits, equalized symbols, measured SNR dB).  With
        `snr_db=None` the physical receiver noise model sets the noise.
        """
        o = self.ofdm
        bits, sym = self.random_symbols(rng, n_frames + 1)
        if self.cfg.link.pilot == "constant_modulus":
            # QPSK pilot at the data constellation's mean power
            amp = math.sqrt(qam_average_power(o.mod_order) / 2.0)
            sym[0] = amp * (np.sign(sym[0].real) + 1j * np.sign(sym[0].imag))
        light, _ = self.transmit(sym)
        spec = self.received_spectrum(light, self.omega_rx)
        active = o.active_bins
        y = spec[:, active]
        sig_power = float(np.mean(np.abs(y[1:]) ** 2))
        if snr_db is None:
            bin_var = o.n_fft * self.sample_noise_var(self.omega_rx * float(np.mean(light)))
        else:
            bin_var = sig_power / 10.0 ** (snr_db / 10.0)
        noise = rng.standard_normal((2,) + y.shape) * math.sqrt(bin_var / 2.0)
        y_noisy = y + noise[0] + 1j * noise[1]
        pilot_rx = y[0] if ideal_csi else y_noisy[0]
        c = np.zeros(active.size, dtype=complex)
        ok = np.abs(pilot_rx) > 0
        c[ok] = sym[0][ok] / pilot_rx[ok]
        eq = y_noisy[1:] * c
        rx_bits = qam_demodulate(eq, o.mod_order)
        measured = 10.0 * math.log10(sig_power / bin_var) if bin_var > 0 else math.inf
        return bits[1:], rx_bits, eq, measured


def setup_link(cfg: SimConfig, point: BerPoint, rng_calib, rng_preeq) -> Link:
    geometry = None
    if point.distance_m is not None:
        geometry = cfg.geometry.build().with_rx_distance(point.distance_m)
    link = Link(cfg, point.mod_order, point.led_temp_c, geometry)
    link.calibrate_dpd(point.scheme, rng_calib)
    link.estimate_gains(point.equalization, rng_preeq)
    return link


def point_streams(seed: int, point_index: int):
    ss = np.random.SeedSequence([int(seed), int(point_index)])
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def run_ber_point(cfg: SimConfig, point: BerPoint, point_index: int = 0,
                  campaign: str = "custom", keep_symbols: int = 0):
    """Sequential BER estimate: stop at `target_bit_errors` or `max_bits`.

    Returns the record, plus up to `keep_symbols` equalized payload frames
    when requested.
    """
    exp = cfg.experiment
    rng_calib, rng_preeq, rng_data = point_streams(exp.seed, point_index)
    link = setup_link(cfg, point, rng_calib, rng_preeq)
    snr = point.snr_db if exp.noise_mode == "snr" or point.distance_m is None else None
    bits_sent = errors = 0
    measured = []
    kept = []
    while errors < exp.target_bit_errors and bits_sent < exp.max_bits:
        tx, rx, eq, snr_meas = link.burst(rng_data, exp.frames_per_burst, snr, exp.ideal_csi)
        errors += int(np.count_nonzero(tx != rx))
        bits_sent += tx.size
        measured.append(snr_meas)
        if len(kept) < keep_symbols:
            kept.extend(eq[: keep_symbols - len(kept)])
    if link.clamped_samples:
        log.debug("point %d: %d drive samples clamped to the LED range", point_index, link.clamped_samples)
    record = BerRecord(
        campaign=campaign,
        point_index=point_index,
        scheme=scheme_label(point.scheme, exp.fdpd_calib_temp),
        equalization=point.equalization,
        mod_order=point.mod_order,
        led_temp_c=point.led_temp_c,
        snr_db=float(point.snr_db) if snr is not None else float(np.mean(measured)),
        distance_m=point.distance_m,
        bits_sent=bits_sent,
        bit_errors=errors,
        censored=errors < exp.target_bit_errors,
        seed=exp.seed,
    )
    if keep_symbols:
        return record, np.array(kept)
    return record
