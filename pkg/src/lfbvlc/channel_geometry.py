"""Line-of-sight Lambertian DC gains between the LED and each photodiode.

The vector form uses v = r_pd - r_led.  For a detector in front of the LED
and facing it, v.n_led > 0 and v.n_pd < 0, so the leading minus sign makes
the gain positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NORMAL_TOL = 1e-9


def _as_vec(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector components must be finite")
    return arr


def unit(v) -> np.ndarray:
    arr = _as_vec(v)
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise ValueError("orientation vector must be nonzero")
    return arr / norm


def lambertian_gain_angles(phi, theta, distance, pd_area, lambert_order):
    """DC gain of a Lambertian emitter at irradiance angle `phi` seen by a
    detector at incidence angle `theta`, both in radians.

    Returns 0 when either angle reaches pi/2.
    """
    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    if pd_area <= 0:
        raise ValueError(f"pd_area must be > 0, got {pd_area}")
    if lambert_order <= 0:
        raise ValueError(f"lambert_order must be > 0, got {lambert_order}")
    if phi >= math.pi / 2 or theta >= math.pi / 2:
        return 0.0
    lead = (lambert_order + 1.0) * pd_area / (2.0 * math.pi)
    return lead * math.cos(phi) ** lambert_order * math.cos(theta) / distance**2


@dataclass(frozen=True)
class LinkGeometry:
    """Positions (m) and orientations of LED, remote PD and feedback PD.

    Normals are rescaled to unit length on construction.
    """

    led_pos: np.ndarray
    led_normal: np.ndarray
    rx_pos: np.ndarray
    rx_normal: np.ndarray
    fb_pos: np.ndarray
    fb_normal: np.ndarray
    lambert_order: float = 0.5
    pd_area: float = 1e-6

    def __post_init__(self):
        for name in ("led_pos", "rx_pos", "fb_pos"):
            object.__setattr__(self, name, _as_vec(getattr(self, name)))
        for name in ("led_normal", "rx_normal", "fb_normal"):
            object.__setattr__(self, name, unit(getattr(self, name)))
        if self.pd_area <= 0:
            raise ValueError("pd_area must be > 0")
        if self.lambert_order <= 0:
            raise ValueError("lambert_order must be > 0")

    @classmethod
    def default_room(cls) -> "LinkGeometry":
        """Default room geometry: LED 2 m above an upward-facing receiver and a
        feedback PD tilted 45 degrees next to the LED."""
        s = 1.0 / math.sqrt(2.0)
        return cls(
            led_pos=[2.0, 2.0, 3.0],
            led_normal=[0.0, 0.0, -1.0],
            rx_pos=[2.0, 2.0, 1.0],
            rx_normal=[0.0, 0.0, 1.0],
            fb_pos=[1.98, 2.0, 2.98],
            fb_normal=[s, 0.0, s],
            lambert_order=0.5,
            pd_area=1e-6,
        )

    def with_rx_distance(self, distance: float) -> "LinkGeometry":
        """Move the remote PD along the LED->PD line to `distance` meters."""
        v = self.rx_pos - self.led_pos
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("LED and remote PD coincide")
        if distance <= 0:
            raise ValueError("distance must be > 0")
        return _replace(self, rx_pos=self.led_pos + v * (distance / norm))

    def pd(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        if which == "remote":
            return self.rx_pos, self.rx_normal
        if which == "feedback":
            return self.fb_pos, self.fb_normal
        raise ValueError(f"which must be 'remote' or 'feedback', got {which!r}")

    def angles(self, which: str) -> tuple[float, float, float]:
        """(phi, theta, distance) for the selected detector."""
        pos, normal = self.pd(which)
        v = pos - self.led_pos
        r = float(np.linalg.norm(v))
        if r == 0.0:
            raise ValueError("LED and photodiode positions coincide")
        cos_phi = float(np.dot(v, self.led_normal)) / r
        cos_theta = float(np.dot(-v, normal)) / r
        phi = math.acos(min(1.0, max(-1.0, cos_phi)))
        theta = math.acos(min(1.0, max(-1.0, cos_theta)))
        return phi, theta, r


def _replace(geom: LinkGeometry, **changes) -> LinkGeometry:
    from dataclasses import replace

    return replace(geom, **changes)


def gain_from_vectors(geometry: LinkGeometry, which: str = "remote") -> float:
    """Vector form of the Lambertian gain for the remote or feedback PD.

    Negative projections (detector behind the LED plane or facing away) clamp
    to zero.
    """
    pos, n_pd = geometry.pd(which)
    v = pos - geometry.led_pos
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise ValueError("LED and photodiode positions coincide")
    n_l = geometry.lambert_order
    proj_led = float(np.dot(v, geometry.led_normal))
    proj_pd = float(np.dot(v, n_pd))
    # v points LED->PD: a lit, facing detector has proj_led > 0 and proj_pd < 0
    if proj_led <= 0.0 or proj_pd >= 0.0:
        return 0.0
    lead = (n_l + 1.0) * geometry.pd_area / (2.0 * math.pi)
    return -lead * proj_led**n_l * proj_pd / r ** (n_l + 3.0)
