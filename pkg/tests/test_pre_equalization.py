import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lfbvlc.led_device import default_lowpass_response
from lfbvlc.noise_model import awgn_at_snr
from lfbvlc.ofdm_phy import OfdmConfig, add_cyclic_prefix, hermitian_map, idft_frame, qam_modulate
from lfbvlc.pre_equalization import (
    FeedbackSpectrum, GainVector, enforce_dynamic_range, flat_gain, flat_gains, predicted_sigma,
    run_preeq_protocol, zf_gains,
)

CFG = OfdmConfig()


def full_response(cfg, resp):
    f = np.fft.fftfreq(cfg.n_fft, 1.0 / cfg.sample_rate)
    h = resp(np.abs(f))
    return np.where(f < 0, np.conj(h), h)


def linear_link(cfg, h, frames, rng, snr_db=None):
    def transmitter(g):
        bits = rng.integers(0, 2, (frames, cfg.bits_per_frame))
        x = hermitian_map(qam_modulate(bits, cfg.mod_order), cfg.n_fft, cfg.n_suppressed) * g.values
        return idft_frame(x, cfg.n_cp), x

    def receiver(light):
        body = np.fft.ifft(np.fft.fft(light[:, cfg.n_cp:], axis=1) * h, axis=1).real
        frames_out = add_cyclic_prefix(body, cfg.n_cp)
        return frames_out if snr_db is None else awgn_at_snr(frames_out, snr_db, rng)

    return transmitter, receiver


def test_flat_gain_default():
    # sqrt(3 * 0.03^2 * 1024^2 / (2 * 1022 * 15))
    assert flat_gain(CFG) == pytest.approx(0.3038755538875894, rel=1e-12)


def test_flat_gain_small_instance():
    cfg = OfdmConfig(n_fft=4, n_cp=0, mod_order=4, clip_hi=5.0, clip_lo=-5.0, clip_factor=5.0)
    assert cfg.sigma_x == 1.0
    assert flat_gain(cfg) == pytest.approx(2.0)


def test_flat_gain_homogeneous():
    wide = OfdmConfig(clip_hi=0.3, clip_lo=-0.3)
    assert flat_gain(wide) == pytest.approx(2 * flat_gain(CFG))


def test_flat_vector_is_hermitian():
    g = flat_gains(CFG)
    assert g.is_hermitian() and g.values[0] == 0 and g.values[512] == 0
    assert predicted_sigma(g, CFG) == pytest.approx(CFG.sigma_x, rel=1e-12)


@given(c=st.floats(0.01, 100.0), norm=st.sampled_from(["inverse", "direct"]))
def test_constant_feedback_reduces_to_flat(c, norm):
    g = zf_gains(FeedbackSpectrum(np.full(CFG.n_fft, c)), CFG, normalization=norm)
    # alpha = |G|_flat * c (inverse) or |G|_flat / c (direct); G = alpha / c
    expected = flat_gain(CFG) if norm == "inverse" else flat_gain(CFG) / c**2
    assert np.allclose(np.abs(g.values[CFG.active_bins]), expected, rtol=1e-12)
    assert g.scale == pytest.approx(flat_gain(CFG) * (c if norm == "inverse" else 1 / c))


def test_lowpass_feedback_gains_increase():
    h = full_response(CFG, default_lowpass_response())
    g = zf_gains(FeedbackSpectrum(h), CFG)
    mags = np.abs(g.values[CFG.active_bins])
    assert np.all(np.diff(mags) > 0)
    assert g.is_hermitian(1e-12)


def test_direct_normalization_overshoots_then_rescales():
    h = full_response(CFG, default_lowpass_response())
    direct = zf_gains(FeedbackSpectrum(h), CFG, normalization="direct")
    assert predicted_sigma(direct, CFG) > CFG.sigma_x
    fixed = enforce_dynamic_range(direct, CFG)
    assert fixed.rescaled and predicted_sigma(fixed, CFG) == pytest.approx(CFG.sigma_x)
    inverse = zf_gains(FeedbackSpectrum(h), CFG)
    assert predicted_sigma(inverse, CFG) == pytest.approx(CFG.sigma_x, rel=1e-12)
    assert not enforce_dynamic_range(inverse, CFG).rescaled


def test_deep_notch_bins_are_dropped(caplog):
    y = np.ones(CFG.n_fft, complex)
    y[[10, CFG.n_fft - 10]] = 1e-4
    g = zf_gains(FeedbackSpectrum(y), CFG)
    assert g.dropped_bins == (10,) and g.values[10] == 0
    assert predicted_sigma(g, CFG) == pytest.approx(CFG.sigma_x)


def test_gain_csv(tmp_path):
    path = tmp_path / "g.csv"
    flat_gains(OfdmConfig(n_fft=8, n_cp=0)).to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "bin,re,im" and len(lines) == 9


def test_protocol_flat_channel():
    rng = np.random.default_rng(0)
    tx, rx = linear_link(CFG, np.ones(CFG.n_fft), 2, rng)
    g = run_preeq_protocol(tx, rx, CFG)
    assert np.allclose(g.values[CFG.active_bins], flat_gain(CFG), atol=1e-9)


def test_protocol_lowpass_flattens():
    rng = np.random.default_rng(1)
    h = full_response(CFG, default_lowpass_response())
    tx, rx = linear_link(CFG, h, 2, rng)
    g = run_preeq_protocol(tx, rx, CFG)
    power_db = 20 * np.log10(np.abs(g.values * h)[CFG.active_bins])
    assert power_db.max() - power_db.min() < 0.01


def test_protocol_noisy_feedback_within_one_db():
    h = full_response(CFG, default_lowpass_response())
    b = CFG.active_bins
    for trial in range(5):
        rng = np.random.default_rng(100 + trial)
        g0 = run_preeq_protocol(*linear_link(CFG, h, 16, rng), CFG)
        g1 = run_preeq_protocol(*linear_link(CFG, h, 16, rng, snr_db=30.0), CFG)
        diff_db = 20 * np.log10(np.abs(g1.values[b]) / np.abs(g0.values[b]))
        assert np.mean(np.abs(diff_db) <= 1.0) >= 0.99


def test_suppressed_layout_power():
    cfg = replace(CFG, n_suppressed=100)
    g = flat_gains(cfg)
    assert np.count_nonzero(g.values) == 2 * cfg.n_active
    assert predicted_sigma(g, cfg) == pytest.approx(cfg.sigma_x)


def test_bad_mode():
    with pytest.raises(ValueError):
        GainVector(np.ones(4), 1.0, "other")
