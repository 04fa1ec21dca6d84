#!/usr/bin/env python3
"""Linearity residual of the composed DPD + LED response for every
tabulated temperature, for LFB-DPD, F-DPD(50) and no DPD."""

import numpy as np

from lfbvlc.led_device import LedModel
from lfbvlc.predistortion import (
    DpdCurve, calibrate, led_feedback_sampler, linearity_residual, make_fixed_dpd,
)

led = LedModel.default()
fixed = make_fixed_dpd(led, 50.0)
print(f"{'temp_c':>6} {'lfb':>10} {'fdpd50':>10} {'none':>10}")
for entry in led.entries:
    t = entry.temp_c
    lfb = calibrate(led_feedback_sampler(led, t, omega_fb=2.5e-4), calib_temp=t)
    row = [linearity_residual(led, c, t)[0] for c in (lfb, fixed, DpdCurve.passthrough(0.175))]
    print(f"{t:6.0f} " + " ".join(f"{100 * r:9.4f}%" for r in row))
