#!/usr/bin/env python3
"""Low-pass electric gain, PP-Eq vs Post-Eq with LFB-DPD; writes results/fig10/."""

import argparse
import sys

from lfbvlc.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--config", default="configs/default.toml")
    p.add_argument("--out", default="results/fig10")
    p.add_argument("--jobs", default="4")
    a = p.parse_args()
    sys.exit(main(["run", a.config, "--campaign", "fig10", "--out", a.out, "--jobs", a.jobs]))
