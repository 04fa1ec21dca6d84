#!/usr/bin/env python3
"""Receiver distance sweep with physical noise; writes results/distance/."""

import argparse
import sys

from lfbvlc.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--config", default="configs/default.toml")
    p.add_argument("--out", default="results/distance")
    p.add_argument("--jobs", default="4")
    a = p.parse_args()
    sys.exit(main(["run", a.config, "--campaign", "distance", "--out", a.out, "--jobs", a.jobs]))
