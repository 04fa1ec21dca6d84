"""Subcarrier gain estimation: constant gains for a flat electric gain and
zero-forcing pre-equalization gains from the feedback-loop spectrum."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ofdm_phy import OfdmConfig, qam_average_power

log = logging.getLogger(__name__)

EPSILON_DB = 40.0


@dataclass(frozen=True)
class GainVector:
    """Per-bin complex gains (length N), Hermitian-consistent."""

    values: np.ndarray
    scale: float
    mode: str = "flat"
    rescaled: bool = False
    dropped_bins: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.mode not in ("flat", "zero_forcing"):
            raise ValueError("mode must be 'flat' or 'zero_forcing'")

    def __len__(self):
        return self.values.size

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        g = self.values
        n = g.size
        mirror = np.conj(g[(-np.arange(n)) % n])
        return bool(np.max(np.abs(g - mirror)) <= tol * max(1.0, float(np.max(np.abs(g)))))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin", "re", "im"])
            for k, g in enumerate(self.values):
                w.writerow([k, repr(float(g.real)), repr(float(g.imag))])


@dataclass(frozen=True)
class FeedbackSpectrum:
    """Feedback-loop channel seen per bin (length N): DFT of the captured
    feedback frame divided by the transmitted subcarrier symbols."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if not np.all(np.isfinite(v)):
            raise ValueError("feedback spectrum has non-finite entries")
        object.__setattr__(self, "values", v)

    def mean_square(self, bins) -> float:
        return float(np.mean(np.abs(self.values[bins]) ** 2))


def _power_constant(config: OfdmConfig) -> float:
    # 3 sigma^2 N^2 / (2 (N - 2 N_s) (M - 1))
    n = config.n_fft
    return (3.0 * config.sigma_x**2 * n**2) / (2.0 * (n - 2 * config.n_excluded) * (config.mod_order - 1))


def flat_gain(config: OfdmConfig) -> float:
    """Constant subcarrier gain magnitude that yields the target sigma_x."""
    if config.n_fft <= 2:
        raise ValueError("n_fft must be > 2")
    return math.sqrt(_power_constant(config))


def _fill(config: OfdmConfig, lower_half: np.ndarray) -> np.ndarray:
    """Full-length Hermitian vector from values on the active bins."""
    n = config.n_fft
    g = np.zeros(n, dtype=complex)
    bins = config.active_bins
    g[bins] = lower_half
    g[n - bins] = np.conj(lower_half)
    return g


def flat_gains(config: OfdmConfig) -> GainVector:
    gf = flat_gain(config)
    return GainVector(_fill(config, np.full(config.n_active, gf)), gf, "flat")


def zf_gains(feedback: FeedbackSpectrum, config: OfdmConfig, epsilon_db: float = EPSILON_DB,
             normalization: str = "inverse") -> GainVector:
    """G = alpha / Y_FB on active bins.

    `normalization="inverse"` sets alpha from the mean of |1/Y_FB|^2, which
    makes the time-domain variance hit sigma_x^2 exactly.  `"direct"` uses
    1 / mean(|Y_FB|^2) instead; for a non-flat spectrum that overshoots the
    target power and relies on the dynamic-range check in
    `run_preeq_protocol` to pull it back.

    Bins whose feedback magnitude falls more than `epsilon_db` below the
    median active magnitude are zeroed rather than inverted.
    """
    bins = config.active_bins
    y = feedback.values[bins]
    mag = np.abs(y)
    eps = float(np.median(mag)) * 10.0 ** (-epsilon_db / 20.0)
    usable = mag > eps
    if not np.any(usable):
        raise ValueError("no usable feedback bins")
    dropped = tuple(int(b) for b in bins[~usable])
    if dropped:
        log.warning("zeroing %d feedback bin(s) below %.1f dB of the median", len(dropped), -epsilon_db)
    y_ok = y[usable]
    # dropped bins carry no power: rescale so active bins still share it
    share = usable.size / np.count_nonzero(usable)
    if normalization == "inverse":
        alpha = math.sqrt(_power_constant(config) * share / float(np.mean(np.abs(1.0 / y_ok) ** 2)))
    elif normalization == "direct":
        alpha = math.sqrt(_power_constant(config) * share / float(np.mean(np.abs(y_ok) ** 2)))
    else:
        raise ValueError("normalization must be 'inverse' or 'direct'")
    lower = np.zeros(bins.size, dtype=complex)
    lower[usable] = alpha / y_ok
    return GainVector(_fill(config, lower), alpha, "zero_forcing", dropped_bins=dropped)


def predicted_sigma(gains: GainVector, config: OfdmConfig) -> float:
    """Expected time-domain std for random QAM data under `gains`."""
    g = gains.values[config.active_bins]
    var = 2.0 / config.n_fft**2 * qam_average_power(config.mod_order) * float(np.sum(np.abs(g) ** 2))
    return math.sqrt(var)


def enforce_dynamic_range(gains: GainVector, config: OfdmConfig, rtol: float = 1e-9) -> GainVector:
    """Scale the gains down if they would push sigma_x above its target."""
    sigma = predicted_sigma(gains, config)
    target = config.sigma_x
    if sigma <= target * (1.0 + rtol):
        return gains
    k = target / sigma
    log.info("pre-equalization gains rescaled by %.4f to keep the clipping factor", k)
    return GainVector(gains.values * k, gains.scale * k, gains.mode, True, gains.dropped_bins)


def estimate_feedback_spectrum(captured, transmitted, config: OfdmConfig) -> FeedbackSpectrum:
    """Average per-bin ratio of feedback DFT to transmitted symbols.

    `captured` holds feedback frames (CP included, one per row) and
    `transmitted` the matching post-gain spectra X = X_H * G.
    """
    cap = np.atleast_2d(np.asarray(captured, dtype=float))
    body = cap[:, config.n_cp :]
    body = body - body.mean(axis=1, keepdims=True)
    y = np.fft.fft(body, axis=1)
    x = np.atleast_2d(np.asarray(transmitted, dtype=complex))
    n = config.n_fft
    bins = config.active_bins
    ratio = np.zeros(n, dtype=complex)
    ratio[bins] = np.mean(y[:, bins] / x[:, bins], axis=0)
    ratio[n - bins] = np.conj(ratio[bins])
    return FeedbackSpectrum(ratio)


def run_preeq_protocol(
    transmitter: Callable[[GainVector], tuple[np.ndarray, np.ndarray]],
    feedback_receiver: Callable[[np.ndarray], np.ndarray],
    config: OfdmConfig,
    epsilon_db: float = EPSILON_DB,
    normalization: str = "inverse",
) -> GainVector:
    """Probe with constant gains, capture the feedback, estimate the
    per-bin response and return dynamic-range-checked ZF gains.

    `transmitter(gains)` sends known random probe frames and returns
    `(light_frames, spectra)`, the spectra being the post-gain symbols
    X = X_H * G.  `feedback_receiver(light_frames)` returns the feedback
    TIA samples for those frames.
    """
    probe = flat_gains(config)
    light, spectra = transmitter(probe)
    captured = feedback_receiver(light)
    spectrum = estimate_feedback_spectrum(captured, spectra, config)
    gains = zf_gains(spectrum, config, epsilon_db, normalization)
    return enforce_dynamic_range(gains, config)
