"""Campaign definitions (point matrices) and the parallel point runner."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..channel_geometry import gain_from_vectors
from ..led_device import optical_power
from ..noise_model import NoiseParams, total_noise_std
from ..pre_equalization import GainVector
from .config import ResponseConfig, SimConfig
from .link import BerPoint, BerRecord, Link, point_streams, run_ber_point, setup_link

log = logging.getLogger(__name__)

AMBIENT_TEMP_C = 25.0


@dataclass
class CampaignResult:
    name: str
    records: list[BerRecord]
    spectra: dict[str, GainVector] = field(default_factory=dict)
    constellations: dict[str, np.ndarray] = field(default_factory=dict)


def _run_one(args):
    cfg, point, index, campaign = args
    return run_ber_point(cfg, point, index, campaign)


def run_points(cfg: SimConfig, points: list[BerPoint], campaign: str, jobs: int = 1) -> list[BerRecord]:
    """Run every point with its own (seed, index) stream; output order is the
    point order regardless of `jobs`."""
    tasks = [(cfg, p, i, campaign) for i, p in enumerate(points)]
    if jobs <= 1:
        records = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return sorted(records, key=lambda r: r.point_index)


def fig7_config(cfg: SimConfig) -> SimConfig:
    return replace(cfg, response=ResponseConfig(kind="flat"))


def fig7_points(cfg: SimConfig) -> list[BerPoint]:
    exp = cfg.experiment
    return [
        BerPoint(scheme, "Post-Eq", m, t, snr)
        for m in exp.mod_orders
        for scheme in ("W-DPD", "F-DPD", "LFB-DPD")
        for t in exp.led_temps_c
        for snr in exp.snr_grid_db
    ]


def run_fig7(cfg: SimConfig, jobs: int = 1) -> CampaignResult:
    """Flat electric gain: no DPD vs fixed DPD vs luminous-feedback DPD over
    LED temperature and modulation order."""
    cfg = fig7_config(cfg)
    records = run_points(cfg, fig7_points(cfg), "fig7", jobs)
    return CampaignResult("fig7", records)


def fig10_config(cfg: SimConfig) -> SimConfig:
    if cfg.response.kind == "flat":
        cfg = replace(cfg, response=ResponseConfig(kind="lowpass"))
    return cfg


def fig10_points(cfg: SimConfig) -> list[BerPoint]:
    exp = cfg.experiment
    return [
        BerPoint("LFB-DPD", eq, m, AMBIENT_TEMP_C, snr)
        for m in exp.mod_orders
        for eq in ("PP-Eq", "Post-Eq")
        for snr in exp.snr_grid_db
    ]


def run_fig10(cfg: SimConfig, jobs: int = 1, constellation_snr_db: float = 25.0,
              constellation_order: int = 16) -> CampaignResult:
    """Non-flat electric gain with LFB-DPD: pre+post vs post-only
    equalization.  Also captures the gain vectors and a 16-QAM scatter."""
    cfg = fig10_config(cfg)
    result = CampaignResult("fig10", run_points(cfg, fig10_points(cfg), "fig10", jobs))
    base = 1_000_000
    for m in cfg.experiment.mod_orders:
        for eq in ("PP-Eq", "Post-Eq"):
            rng_c, rng_p, _ = point_streams(cfg.experiment.seed, base + m)
            link = setup_link(cfg, BerPoint("LFB-DPD", eq, m, AMBIENT_TEMP_C), rng_c, rng_p)
            result.spectra[f"{_tag(eq)}_m{m}"] = link.gains
    for eq in ("PP-Eq", "Post-Eq"):
        point = BerPoint("LFB-DPD", eq, constellation_order, AMBIENT_TEMP_C, constellation_snr_db)
        one = cfg.with_experiment(max_bits=1, target_bit_errors=100)
        _, symbols = run_ber_point(one, point, base + 500, "fig10", keep_symbols=1)
        result.constellations[f"{_tag(eq)}_m{constellation_order}_snr{constellation_snr_db:g}"] = symbols[0]
    return result


def _tag(eq: str) -> str:
    return eq.lower().replace("-", "")


def distance_config(cfg: SimConfig) -> SimConfig:
    ofdm = cfg.ofdm if cfg.ofdm.n_suppressed else replace(cfg.ofdm, n_suppressed=100)
    cfg = replace(fig10_config(cfg), ofdm=ofdm)
    return cfg.with_experiment(noise_mode="physical")


def distance_points(cfg: SimConfig) -> list[BerPoint]:
    exp = cfg.experiment
    pts = []
    for m in exp.mod_orders:
        for scheme in exp.schemes:
            for eq in ("PP-Eq", "Post-Eq"):
                for d in exp.distance_grid_m:
                    pts.append(BerPoint(scheme, eq, m, AMBIENT_TEMP_C, None, d))
    return pts


def run_distance(cfg: SimConfig, jobs: int = 1) -> CampaignResult:
    """Receiver moved along the LED axis; SNR follows from the physical
    noise model (first 100 subcarriers suppressed by default)."""
    cfg = distance_config(cfg)
    return CampaignResult("distance", run_points(cfg, distance_points(cfg), "distance", jobs))


def custom_points(cfg: SimConfig) -> list[BerPoint]:
    exp = cfg.experiment
    pts = []
    for m in exp.mod_orders:
        for scheme in exp.schemes:
            for eq in exp.equalization:
                for t in exp.led_temps_c:
                    if exp.noise_mode == "physical":
                        pts += [BerPoint(scheme, eq, m, t, None, d) for d in exp.distance_grid_m]
                    else:
                        pts += [BerPoint(scheme, eq, m, t, s) for s in exp.snr_grid_db]
    return pts


def run_custom(cfg: SimConfig, jobs: int = 1) -> CampaignResult:
    """The full scheme x equalization x order x temperature x grid product
    exactly as configured."""
    return CampaignResult("custom", run_points(cfg, custom_points(cfg), "custom", jobs))


CAMPAIGN_RUNNERS = {
    "fig7": run_fig7,
    "fig10": run_fig10,
    "distance": run_distance,
    "custom": run_custom,
}


def snr_from_distance(cfg: SimConfig, distance: float, led_temp_c: float = AMBIENT_TEMP_C) -> float:
    """Electrical SNR (dB) over active subcarriers at the remote TIA output
    when the receiver sits `distance` meters from the LED.

    Signal: linearized small-signal LED slope at the bias times sigma_x,
    through the optical gain, responsivity, TIA gain and the mean power of
    the electric-gain shape over the active bins.  Noise: shot + thermal at
    the mean received optical power, restricted to the simulated band.
    """
    geometry = cfg.geometry.build().with_rx_distance(distance)
    link = Link(cfg, cfg.ofdm.mod_order, led_temp_c, geometry)
    o = link.ofdm
    bias = cfg.led.i_bias0
    slope = link.led.small_signal_slope(bias, led_temp_c)
    omega = gain_from_vectors(geometry, "remote")
    shape = float(np.mean(np.abs(link.h[o.active_bins]) ** 2))
    amp = cfg.link.tia_gain * cfg.noise.responsivity * omega * slope
    # active bins carry sigma_x^2 spread over n_active of N/2 - 1 slots
    sig_var = amp**2 * o.sigma_x**2 * shape * (o.n_fft / (2.0 * o.n_active))
    p_r = omega * optical_power(link.led, bias, led_temp_c)
    noise_var = link.sample_noise_var(p_r)
    return 10.0 * math.log10(sig_var / noise_var)
