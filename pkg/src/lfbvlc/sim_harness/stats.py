"""Reference BER curves and binomial confidence tools."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc
from scipy.stats import norm


def qam_ber_awgn(es_n0_db, m: int):
    """Exact BER of Gray-coded square M-QAM over AWGN (closed-form sum),
    as a function of symbol SNR Es/N0 in dB."""
    es_n0 = 10.0 ** (np.asarray(es_n0_db, dtype=float) / 10.0)
    root = int(round(math.sqrt(m)))
    nbits = int(round(math.log2(root)))
    arg = np.sqrt(3.0 * es_n0 / (2.0 * (m - 1)))
    total = np.zeros_like(es_n0)
    for k in range(1, nbits + 1):
        pk = np.zeros_like(es_n0)
        for i in range(int((1 - 2.0**-k) * root)):
            w = i * 2 ** (k - 1) / root
            sign = (-1) ** int(math.floor(w))
            mult = 2 ** (k - 1) - math.floor(w + 0.5)
            pk += sign * mult * erfc((2 * i + 1) * arg)
        total += pk / root
    out = total / nbits
    return float(out) if out.ndim == 0 else out


def snr_for_ber(target: float, m: int, lo: float = -10.0, hi: float = 60.0) -> float:
    return brentq(lambda s: qam_ber_awgn(s, m) - target, lo, hi, xtol=1e-10)


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def lower_with_confidence(e1: int, n1: int, e2: int, n2: int, confidence: float = 0.95) -> bool:
    """One-sided pooled two-proportion z-test that rate 1 < rate 2."""
    p1, p2 = e1 / n1, e2 / n2
    pooled = (e1 + e2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0.0:
        return False
    return (p2 - p1) / se > norm.ppf(confidence)


def not_higher_with_confidence(e1: int, n1: int, e2: int, n2: int, confidence: float = 0.95) -> bool:
    """True unless rate 1 is significantly above rate 2."""
    return not lower_with_confidence(e2, n2, e1, n1, confidence)
