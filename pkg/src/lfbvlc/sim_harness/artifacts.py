"""CSV and manifest output.  Nothing time- or host-dependent is written, so
identical inputs give byte-identical files."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from .. import __version__
from .config import SimConfig
from .link import BerRecord

BER_COLUMNS = (
    "campaign", "point_index", "scheme", "equalization", "mod_order", "led_temp_c",
    "snr_db", "distance_m", "bits_sent", "bit_errors", "ber", "censored", "seed",
)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_ber_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BER_COLUMNS)
        for r in records:
            w.writerow([
                r.campaign, _num(r.point_index), r.scheme, r.equalization, _num(r.mod_order),
                _num(r.led_temp_c), _num(r.snr_db), _num(r.distance_m), _num(r.bits_sent),
                _num(r.bit_errors), _num(r.ber), _num(r.censored), _num(r.seed),
            ])


def read_ber_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_constellation_csv(symbols, path) -> None:
    """`subcarrier,re,im` for one equalized frame (index = active slot)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subcarrier", "re", "im"])
        for k, s in enumerate(np.asarray(symbols).ravel()):
            w.writerow([k, _num(s.real), _num(s.imag)])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_artifacts(records: list[BerRecord], spectra: dict, constellations: dict, out_dir,
                   campaign: str, cfg: SimConfig | None = None, split_by_order: bool = False) -> str:
    """Write BER/spectrum/constellation CSVs plus `manifest.json`.

    Returns "ok", or "no data" when there is nothing but the manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if records:
        ordered = sorted(records, key=lambda r: r.point_index)
        path = out / f"ber_{campaign}.csv"
        write_ber_csv(ordered, path)
        written.append(path)
        if split_by_order:
            for m in sorted({r.mod_order for r in ordered}):
                path = out / f"ber_{campaign}_m{m}.csv"
                write_ber_csv([r for r in ordered if r.mod_order == m], path)
                written.append(path)
    for case in sorted(spectra):
        path = out / f"spectrum_{case}.csv"
        spectra[case].to_csv(path)
        written.append(path)
    for case in sorted(constellations):
        path = out / f"constellation_{case}.csv"
        write_constellation_csv(constellations[case], path)
        written.append(path)
    status = "ok" if written else "no data"
    manifest = {
        "campaign": campaign,
        "status": status,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "config_sha256": cfg.digest() if cfg else None,
        "seed": cfg.experiment.seed if cfg else None,
        "censored_points": sum(1 for r in records if r.censored),
        "files": {p.name: _sha256(p) for p in written},
        "config": cfg.to_dict() if cfg else None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return status
