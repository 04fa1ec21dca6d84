import math
from dataclasses import replace

import numpy as np
import pytest

from lfbvlc.led_device import LedModel, LedPolyEntry
from lfbvlc.sim_harness import BerPoint, SimConfig, load_config, run_ber_point, snr_from_distance
from lfbvlc.sim_harness.campaigns import fig7_points, run_fig7, run_points
from lfbvlc.sim_harness.config import LedConfig, ResponseConfig
from lfbvlc.sim_harness.stats import lower_with_confidence, wilson_interval


def small(cfg=None, **exp):
    cfg = cfg or SimConfig()
    base = dict(max_bits=300_000, target_bit_errors=100, frames_per_burst=16)
    return cfg.with_experiment(**(base | exp))


def linear_led_config(tmp_path, response="flat"):
    path = tmp_path / "linear_led.csv"
    LedModel((LedPolyEntry(-10.0, 0.0, 0.7, 0.01), LedPolyEntry(100.0, 0.0, 0.7, 0.01))).to_csv(path)
    return replace(SimConfig(), led=LedConfig(model_path=str(path)), response=ResponseConfig(kind=response))


def test_same_seed_same_record():
    cfg = small()
    p = BerPoint("LFB-DPD", "Post-Eq", 16, 60.0, 14.0)
    assert run_ber_point(cfg, p, 3) == run_ber_point(cfg, p, 3)
    assert run_ber_point(cfg, p, 3) != run_ber_point(cfg, p, 4)


def test_high_snr_linear_chain_error_free(tmp_path):
    cfg = small(linear_led_config(tmp_path), max_bits=1_000_000)
    rec = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 16, 25.0, 200.0))
    assert rec.bits_sent >= 1_000_000
    assert rec.bit_errors == 0 and rec.censored


def test_record_invariants():
    rec = run_ber_point(small(), BerPoint("W-DPD", "Post-Eq", 64, 0.0, 12.0))
    assert rec.ber == rec.bit_errors / rec.bits_sent
    assert 0 <= rec.ber <= 1
    assert rec.bit_errors >= 100 and not rec.censored


def test_ber_non_increasing_in_snr():
    cfg = small()
    prev = None
    for snr in (4.0, 10.0, 16.0, 22.0):
        rec = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 16, 40.0, snr))
        if prev is not None:
            lo_prev, _ = wilson_interval(prev.bit_errors, prev.bits_sent)
            _, hi_now = wilson_interval(rec.bit_errors, rec.bits_sent)
            assert rec.ber <= prev.ber or hi_now >= lo_prev
        prev = rec


def test_matched_fixed_dpd_tracks_feedback_dpd():
    cfg = small(max_bits=1_000_000)
    f = run_ber_point(cfg, BerPoint("F-DPD", "Post-Eq", 64, 50.0, 22.0), 1)
    lfb = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 64, 50.0, 22.0), 1)
    assert not lower_with_confidence(f.bit_errors, f.bits_sent, lfb.bit_errors, lfb.bits_sent)
    assert not lower_with_confidence(lfb.bit_errors, lfb.bits_sent, f.bit_errors, f.bits_sent)


def test_no_dpd_hurts_dense_constellations_more():
    cfg = small(max_bits=1_000_000)
    snr = 32.0
    w4 = run_ber_point(cfg, BerPoint("W-DPD", "Post-Eq", 4, 100.0, snr))
    l4 = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 4, 100.0, snr))
    w256 = run_ber_point(cfg, BerPoint("W-DPD", "Post-Eq", 256, 100.0, snr))
    l256 = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 256, 100.0, snr))
    # QPSK stays error free either way; 256-QAM pays for the missing DPD
    assert w4.bit_errors == l4.bit_errors == 0
    assert lower_with_confidence(l256.bit_errors, l256.bits_sent, w256.bit_errors, w256.bits_sent)


def test_flat_response_pre_and_post_coincide():
    cfg = small(replace(SimConfig(), response=ResponseConfig(kind="flat")), max_bits=600_000)
    pp = run_ber_point(cfg, BerPoint("LFB-DPD", "PP-Eq", 64, 25.0, 20.0), 2)
    post = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 64, 25.0, 20.0), 2)
    assert not lower_with_confidence(pp.bit_errors, pp.bits_sent, post.bit_errors, post.bits_sent)
    assert not lower_with_confidence(post.bit_errors, post.bits_sent, pp.bit_errors, pp.bits_sent)


def test_parallel_matches_serial():
    cfg = small(led_temps_c=(20.0,), mod_orders=(16,), snr_grid_db=(10.0, 18.0), max_bits=60_000)
    pts = fig7_points(cfg)
    assert run_points(cfg, pts, "fig7", jobs=1) == run_points(cfg, pts, "fig7", jobs=3)


def test_fig7_matrix():
    cfg = small(led_temps_c=(0.0, 100.0), mod_orders=(16,), snr_grid_db=(12.0,), max_bits=30_000)
    res = run_fig7(cfg)
    assert {r.scheme for r in res.records} == {"W-DPD", "F-DPD(50)", "LFB-DPD"}
    assert len(res.records) == 6


def test_distance_snr_monotone_and_bounded():
    cfg = SimConfig()
    grid = cfg.experiment.distance_grid_m
    assert (grid[0], grid[-1]) == (0.4, 1.1)
    snrs = [snr_from_distance(cfg, d) for d in grid]
    assert all(a > b for a, b in zip(snrs, snrs[1:]))


def test_distance_doubling_costs_12db_without_shot_noise():
    cfg = SimConfig()
    quiet = replace(cfg, noise=replace(cfg.noise, background_irradiance=0.0, dark_current=0.0,
                                       elementary_charge=1e-30))
    drop = snr_from_distance(quiet, 0.5) - snr_from_distance(quiet, 1.0)
    assert drop == pytest.approx(20 * math.log10(4), abs=0.01)


def test_physical_noise_point_records_measured_snr():
    cfg = small(noise_mode="physical", max_bits=50_000)
    rec = run_ber_point(cfg, BerPoint("LFB-DPD", "Post-Eq", 4, 25.0, None, 0.4))
    assert rec.distance_m == 0.4
    assert rec.snr_db == pytest.approx(snr_from_distance(cfg, 0.4), abs=0.5)


def test_toml_loader(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[experiment]\nmod_orders = [4]\nseed = 9\n[led]\nmodel_path = "led.csv"\n')
    cfg = load_config(p)
    assert cfg.experiment.mod_orders == (4,) and cfg.experiment.seed == 9
    assert cfg.led.model_path == str(tmp_path / "led.csv")
    assert cfg.digest() != SimConfig().digest()


@pytest.mark.parametrize("text", [
    "[experiment]\nbogus = 1\n",
    "[nonsense]\nx = 1\n",
    "[experiment]\ntarget_bit_errors = 10\n",
    '[experiment]\nschemes = ["X-DPD"]\n',
    '[link]\npilot = "chirp"\n',
])
def test_toml_rejects(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    with pytest.raises(ValueError):
        load_config(p)


def test_shipped_default_config_matches_code_defaults():
    from pathlib import Path

    shipped = Path(__file__).resolve().parents[1] / "configs" / "default.toml"
    assert load_config(shipped).digest() == SimConfig().digest()
