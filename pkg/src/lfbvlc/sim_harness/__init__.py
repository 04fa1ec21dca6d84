"""Monte Carlo experiment orchestration."""

from .artifacts import emit_artifacts
from .campaigns import (
    CAMPAIGN_RUNNERS, CampaignResult, run_custom, run_distance, run_fig7, run_fig10, snr_from_distance,
)
from .config import SimConfig, load_config
from .link import BerPoint, BerRecord, Link, run_ber_point

__all__ = [
    "BerPoint", "BerRecord", "CAMPAIGN_RUNNERS", "CampaignResult", "Link", "SimConfig",
    "emit_artifacts", "load_config", "run_ber_point", "run_custom", "run_distance",
    "run_fig7", "run_fig10", "snr_from_distance",
]
