"""DCO-OFDM baseband: Gray QAM, Hermitian mapping, subcarrier gains,
IDFT + cyclic prefix, hard clipping, receive DFT and pilot ZF equalization.

Transforms use 1/N on the inverse and no scaling on the forward DFT, so that
the time-domain variance of a frame equals sum(|X|^2) / N^2.  All routines
accept a leading batch axis (one frame per row).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-9


@dataclass(frozen=True)
class OfdmConfig:
    """Frame parameters.

    `n_suppressed` counts data subcarriers switched off at the low end of the
    spectrum (bins 1..n_suppressed and their mirrors).  The DC and Nyquist
    bins are always null.  `bandwidth_hz` is the occupied band, so the
    highest subcarrier sits at `bandwidth_hz` and the sample rate is twice it.
    """

    n_fft: int = 1024
    n_cp: int = 16
    mod_order: int = 16
    clip_hi: float = 0.15
    clip_lo: float = -0.15
    clip_factor: float = 5.0
    n_suppressed: int = 0
    bandwidth_hz: float = 5e6

    def __post_init__(self):
        n = self.n_fft
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_fft must be a power of two >= 4, got {n}")
        if self.n_cp < 0 or self.n_cp > n:
            raise ValueError("n_cp must be in [0, n_fft]")
        bits_per_symbol(self.mod_order)
        if not self.clip_lo < self.clip_hi:
            raise ValueError("clip_lo must be < clip_hi")
        if self.clip_factor <= 0:
            raise ValueError("clip_factor must be > 0")
        if not 0 <= self.n_suppressed < n // 2 - 1:
            raise ValueError("n_suppressed must leave at least one active subcarrier")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")

    @property
    def sigma_x(self) -> float:
        return sigma_from_clip_factor(self)

    @property
    def n_active(self) -> int:
        """Active data subcarriers (lower half of the spectrum)."""
        return self.n_fft // 2 - 1 - self.n_suppressed

    @property
    def n_excluded(self) -> int:
        """Excluded bins per half-spectrum, counting the null DC bin."""
        return self.n_suppressed + 1

    @property
    def active_bins(self) -> np.ndarray:
        return np.arange(self.n_suppressed + 1, self.n_fft // 2)

    @property
    def bits_per_frame(self) -> int:
        return self.n_active * bits_per_symbol(self.mod_order)

    @property
    def sample_rate(self) -> float:
        return 2.0 * self.bandwidth_hz

    def bin_frequencies(self) -> np.ndarray:
        """Frequency (Hz) of bins 0..N/2."""
        return np.arange(self.n_fft // 2 + 1) * (self.sample_rate / self.n_fft)


def sigma_from_clip_factor(config: OfdmConfig) -> float:
    """Time-domain standard deviation that puts the clip limits
    `clip_factor` standard deviations from the center."""
    return (config.clip_hi - config.clip_lo) / (2.0 * config.clip_factor)


# -- QAM ---------------------------------------------------------------------

def bits_per_symbol(m: int) -> int:
    k = int(round(math.log2(m))) if m > 0 else 0
    if m < 4 or 2**k != m or k % 2:
        raise ValueError(f"modulation order must be a square power of 4, got {m}")
    return k


@lru_cache(maxsize=None)
def _gray_tables(m: int):
    k = bits_per_symbol(m)
    half = k // 2
    levels = 1 << half
    idx = np.arange(levels)
    gray = idx ^ (idx >> 1)
    # bit pattern (as integer) -> amplitude index, and back
    pattern_to_index = np.empty(levels, dtype=np.int64)
    pattern_to_index[gray] = idx
    index_to_pattern = gray
    amplitudes = 2.0 * idx - (levels - 1)
    weights = 1 << np.arange(half - 1, -1, -1)
    return half, levels, pattern_to_index, index_to_pattern, amplitudes, weights


def constellation(m: int) -> np.ndarray:
    """All M points ordered by symbol index (in-phase bits first, MSB first)."""
    k = bits_per_symbol(m)
    bits = ((np.arange(m)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    return qam_modulate(bits.ravel(), m)


def qam_modulate(bits, m: int) -> np.ndarray:
    """Gray-mapped square M-QAM on the odd-integer grid {+-1, +-3, ...}.

    The in-phase half of each symbol's bits comes first, most significant
    bit first.  Leading axes other than the last are kept.
    """
    half, levels, p2i, _, amps, weights = _gray_tables(m)
    b = np.asarray(bits)
    k = 2 * half
    if b.shape[-1] % k:
        raise ValueError(f"bit count {b.shape[-1]} not divisible by log2(M)={k}")
    b = b.reshape(*b.shape[:-1], -1, k).astype(np.int64)
    i_pat = b[..., :half] @ weights
    q_pat = b[..., half:] @ weights
    return amps[p2i[i_pat]] + 1j * amps[p2i[q_pat]]


def _slice_axis(y: np.ndarray, levels: int) -> np.ndarray:
    # nearest level index; exact midpoints go to the lower index
    pos = (y + (levels - 1)) / 2.0
    idx = np.ceil(pos - 0.5)
    return np.clip(idx, 0, levels - 1).astype(np.int64)


def qam_demodulate(symbols, m: int) -> np.ndarray:
    """Minimum-distance hard decisions back to bits (uint8)."""
    half, levels, _, i2p, _, _ = _gray_tables(m)
    y = np.asarray(symbols)
    i_idx = _slice_axis(y.real, levels)
    q_idx = _slice_axis(y.imag, levels)
    shifts = np.arange(half - 1, -1, -1)
    i_bits = (i2p[i_idx][..., None] >> shifts) & 1
    q_bits = (i2p[q_idx][..., None] >> shifts) & 1
    out = np.concatenate([i_bits, q_bits], axis=-1).astype(np.uint8)
    return out.reshape(*y.shape[:-1], -1)


def qam_average_power(m: int) -> float:
    return 2.0 * (m - 1) / 3.0


# -- frame construction --------------------------------------------------------

def hermitian_map(data, n_fft: int, n_suppressed: int = 0) -> np.ndarray:
    """Place data symbols on bins n_suppressed+1 .. N/2-1 and mirror their
    conjugates onto the upper half; DC, Nyquist and suppressed bins are 0."""
    x = np.asarray(data, dtype=complex)
    n_active = n_fft // 2 - 1 - n_suppressed
    if x.shape[-1] != n_active:
        raise ValueError(f"expected {n_active} data symbols, got {x.shape[-1]}")
    out = np.zeros((*x.shape[:-1], n_fft), dtype=complex)
    lo = n_suppressed + 1
    out[..., lo : n_fft // 2] = x
    out[..., n_fft - n_fft // 2 + 1 : n_fft - lo + 1] = np.conj(x[..., ::-1])
    return out


def apply_subcarrier_gains(x_h, g) -> np.ndarray:
    x_h = np.asarray(x_h)
    g = np.asarray(g)
    if x_h.shape[-1] != g.shape[-1]:
        raise ValueError("symbol and gain vectors differ in length")
    return x_h * g


def hermitian_residue(x) -> float:
    """Largest imaginary magnitude of the inverse DFT of `x`."""
    return float(np.max(np.abs(np.fft.ifft(np.asarray(x), axis=-1).imag), initial=0.0))


def idft_frame(x, n_cp: int = 0, check: bool = True) -> np.ndarray:
    """Real time-domain frame(s) with an `n_cp`-sample cyclic prefix."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if check:
        t = np.fft.ifft(x, axis=-1)
        scale = max(1.0, float(np.max(np.abs(t.real), initial=0.0)))
        if np.max(np.abs(t.imag), initial=0.0) > HERMITIAN_TOL * scale:
            raise ValueError("spectrum is not Hermitian-symmetric; IDFT would be complex")
        body = t.real
    else:
        body = np.fft.irfft(x[..., : n // 2 + 1], n=n, axis=-1)
    return add_cyclic_prefix(body, n_cp)


def add_cyclic_prefix(body, n_cp: int) -> np.ndarray:
    body = np.asarray(body)
    if n_cp == 0:
        return body.copy()
    return np.concatenate([body[..., -n_cp:], body], axis=-1)


def hard_clip(frame, clip_lo: float, clip_hi: float) -> np.ndarray:
    if not clip_lo < clip_hi:
        raise ValueError("clip_lo must be < clip_hi")
    return np.clip(frame, clip_lo, clip_hi)


# -- receiver ------------------------------------------------------------------

def dft_receive(frame, config: OfdmConfig) -> np.ndarray:
    """Strip the cyclic prefix and take the unscaled forward DFT."""
    f = np.asarray(frame, dtype=float)
    if f.shape[-1] != config.n_fft + config.n_cp:
        raise ValueError("frame length does not match n_fft + n_cp")
    return np.fft.fft(f[..., config.n_cp :], axis=-1)


def extract_data(spectrum, config: OfdmConfig) -> np.ndarray:
    return np.asarray(spectrum)[..., config.active_bins]


def zf_correction(pilot_received, pilot_known, tol: float = 0.0):
    """Per-subcarrier ZF coefficients known / received and a mask of bins
    whose pilot came back as (near) zero."""
    rx = np.asarray(pilot_received, dtype=complex)
    known = np.asarray(pilot_known, dtype=complex)
    if rx.shape != known.shape:
        raise ValueError("pilot vectors differ in shape")
    bad = np.abs(rx) <= tol
    c = np.zeros_like(rx)
    np.divide(known, rx, out=c, where=~bad)
    return c, bad


def post_equalize(received, pilot_received, pilot_known) -> np.ndarray:
    """Zero-forcing correction estimated from a known pilot frame.

    Subcarriers whose received pilot is exactly zero cannot be equalized;
    they are output as 0 and reported in the log.
    """
    c, bad = zf_correction(pilot_received, pilot_known)
    if np.any(bad):
        log.warning("%d subcarrier(s) unequalizable (zero pilot)", int(np.count_nonzero(bad)))
    return np.asarray(received) * c
