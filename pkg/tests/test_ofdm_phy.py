import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import norm

from lfbvlc.ofdm_phy import (
    OfdmConfig, apply_subcarrier_gains, bits_per_symbol, constellation, dft_receive, hard_clip,
    hermitian_map, hermitian_residue, idft_frame, post_equalize, qam_average_power, qam_demodulate,
    qam_modulate, sigma_from_clip_factor, zf_correction,
)

orders = st.sampled_from([4, 16, 64, 256])


def test_qpsk_gray_mapping():
    pts = qam_modulate(np.array([0, 0, 0, 1, 1, 1, 1, 0]), 4)
    assert np.allclose(pts, [-1 - 1j, -1 + 1j, 1 + 1j, 1 - 1j])
    # consecutive points differ in one bit and are nearest neighbors
    assert np.allclose(np.abs(np.diff(pts)), 2.0)


def test_16qam_power():
    assert np.mean(np.abs(constellation(16)) ** 2) == pytest.approx(10.0)
    assert qam_average_power(16) == pytest.approx(10.0)


@pytest.mark.parametrize("m", [4, 16, 64, 256, 1024])
def test_gray_neighbors_differ_in_one_bit(m):
    k = bits_per_symbol(m)
    pts = constellation(m)
    labels = np.arange(m)
    for a in range(m):
        d = np.abs(pts - pts[a])
        for b in np.flatnonzero(np.isclose(d, 2.0)):
            assert bin(labels[a] ^ labels[b]).count("1") == 1
    assert k == int(math.log2(m))


def test_demodulate_nearest_and_tie():
    assert list(qam_demodulate(np.array([1.1 + 0.9j]), 4)) == [1, 1]
    # ties go to the lower amplitude index on both axes
    assert list(qam_demodulate(np.array([0j]), 4)) == [0, 0]


def test_bad_order():
    for m in (2, 8, 32, 12):
        with pytest.raises(ValueError):
            bits_per_symbol(m)


@given(m=orders, seed=st.integers(0, 2**31))
def test_round_trip(m, seed):
    k = bits_per_symbol(m)
    bits = np.random.default_rng(seed).integers(0, 2, 40 * k).astype(np.uint8)
    assert np.array_equal(qam_demodulate(qam_modulate(bits, m), m), bits)


def test_hermitian_map_small():
    s = np.array([1 + 2j, 3 - 1j, -2 + 0.5j])
    out = hermitian_map(s, 8)
    expected = [0, s[0], s[1], s[2], 0, np.conj(s[2]), np.conj(s[1]), np.conj(s[0])]
    assert np.allclose(out, expected)
    assert not np.any(hermitian_map(np.zeros(3), 8))


def test_hermitian_map_suppressed():
    out = hermitian_map(np.ones(5), 16, n_suppressed=2)
    assert np.flatnonzero(out).tolist() == [3, 4, 5, 6, 7, 9, 10, 11, 12, 13]


@given(seed=st.integers(0, 2**31), n=st.sampled_from([8, 64, 1024]))
def test_hermitian_ifft_is_real(seed, n):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(n // 2 - 1) + 1j * rng.standard_normal(n // 2 - 1)
    assert hermitian_residue(hermitian_map(d, n)) < 1e-10


def test_gains_elementwise():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    g = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert np.array_equal(apply_subcarrier_gains(x, np.ones(16)), x)
    assert np.allclose(np.abs(apply_subcarrier_gains(x, np.full(16, 0.3))), 0.3 * np.abs(x))
    out = apply_subcarrier_gains(x, g)
    for k in range(16):
        assert out[k] == pytest.approx(x[k] * g[k], rel=1e-15)
    with pytest.raises(ValueError):
        apply_subcarrier_gains(x, g[:4])


def test_single_tone_idft():
    n = 64
    x = np.zeros(n, complex)
    x[1] = x[-1] = n / 2
    assert np.allclose(idft_frame(x), np.cos(2 * np.pi * np.arange(n) / n))
    assert not np.any(idft_frame(np.zeros(n)))


def test_idft_rejects_non_hermitian():
    x = np.zeros(8, complex)
    x[1] = 1.0
    with pytest.raises(ValueError):
        idft_frame(x)


def test_idft_variance_matches_bin_power():
    rng = np.random.default_rng(2)
    n = 256
    d = qam_modulate(rng.integers(0, 2, (4000, (n // 2 - 1) * 4)), 16)
    x = hermitian_map(d, n)
    frames = idft_frame(x)
    expected = np.mean(np.sum(np.abs(x) ** 2, axis=1)) / n**2
    assert np.var(frames) == pytest.approx(expected, rel=0.01)


def test_cyclic_prefix_and_receive_round_trip():
    cfg = OfdmConfig(n_fft=64, n_cp=8)
    rng = np.random.default_rng(4)
    x = hermitian_map(rng.standard_normal(31) + 1j * rng.standard_normal(31), 64)
    frame = idft_frame(x, 8)
    assert np.array_equal(frame[:8], frame[-8:])
    assert np.allclose(dft_receive(frame, cfg), x, atol=1e-9)
    assert not np.any(dft_receive(np.zeros(72), cfg))


def test_cp_shift_gives_phase_ramp():
    n, cp, shift = 64, 8, 3
    cfg = OfdmConfig(n_fft=n, n_cp=cp)
    rng = np.random.default_rng(5)
    x = hermitian_map(rng.standard_normal(31) + 1j * rng.standard_normal(31), n)
    frame = idft_frame(x, cp)
    # window starts `shift` samples early, i.e. inside the CP
    early = np.concatenate([np.zeros(shift), frame[:-shift]])
    k = np.arange(n)
    assert np.allclose(dft_receive(early, cfg), x * np.exp(-2j * np.pi * k * shift / n), atol=1e-9)


def test_hard_clip():
    assert np.allclose(hard_clip(np.array([0.2, 0.1, -0.3]), -0.15, 0.15), [0.15, 0.1, -0.15])
    inside = np.array([0.01, -0.1])
    assert np.array_equal(hard_clip(inside, -0.15, 0.15), inside)


def test_clip_probability_gaussian_tail():
    rng = np.random.default_rng(6)
    n = 20_000_000
    hits = 0
    for _ in range(4):
        u = rng.standard_normal(n // 4) * 0.03
        hits += int(np.count_nonzero(np.abs(u) >= 0.15))
    # Poisson count with mean ~11.5: accept within about 3 sigma
    expected = 2 * norm.sf(5.0) * n
    assert abs(hits - expected) < 3.5 * math.sqrt(expected) + 1


def test_sigma_from_clip_factor():
    assert OfdmConfig().sigma_x == 0.03
    assert sigma_from_clip_factor(OfdmConfig(clip_hi=1.0, clip_lo=-1.0, clip_factor=1.0)) == 1.0


@given(scale=st.floats(0.01, 100.0))
def test_sigma_homogeneous(scale):
    c = OfdmConfig(clip_hi=0.15 * scale, clip_lo=-0.15 * scale)
    assert c.sigma_x == pytest.approx(0.03 * scale)


def test_layout_properties():
    c = OfdmConfig()
    assert c.n_active == 511 and c.n_excluded == 1
    assert c.active_bins[0] == 1 and c.active_bins[-1] == 511
    assert c.bin_frequencies()[-1] == pytest.approx(5e6)
    s = OfdmConfig(n_suppressed=100)
    assert s.n_active == 411 and s.n_excluded == 101


def test_zf_identity_and_scalar_channel():
    rng = np.random.default_rng(7)
    p = constellation(16)[rng.integers(0, 16, 50)]
    c, bad = zf_correction(p, p)
    assert np.allclose(c, 1.0) and not bad.any()
    h = 0.5 * np.exp(1j * np.pi / 4)
    data = constellation(16)[rng.integers(0, 16, 50)]
    assert np.allclose(post_equalize(h * data, h * p, p), data, atol=1e-12)


def test_zf_random_diagonal():
    rng = np.random.default_rng(8)
    h = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    p = constellation(4)[rng.integers(0, 4, 64)]
    data = constellation(64)[rng.integers(0, 64, (5, 64))]
    assert np.allclose(post_equalize(h * data, h * p, p), data)


def test_zero_pilot_bins(caplog):
    p = np.ones(4, complex)
    rx = np.array([1, 0, 2, 1], complex)
    out = post_equalize(np.ones(4), rx, p)
    assert out[1] == 0 and "unequalizable" in caplog.text
