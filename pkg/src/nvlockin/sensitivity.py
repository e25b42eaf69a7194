"""Shot-noise-limited sensitivity, empirical noise floors, and map statistics.

eta = std(field series) * sqrt(single-frame duration); eta_V = eta * sqrt(V)
normalizes by the per-pixel sensing volume for cross-sensor comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionProtocol, calibrate_slope
from .physics import GYROMAGNETIC


@dataclass
class ShotNoiseInputs:
    """Ingredients of the CW shot-noise sensitivity formula."""

    linewidth: float
    contrast: float
    photon_rate: float
    planck_over_gmu: float = 1.0 / 28.0e9  # h/(g_e mu_B) expressed in T*s

    def __post_init__(self):
        if min(self.linewidth, self.contrast, self.photon_rate, self.planck_over_gmu) <= 0:
            raise ValueError("all shot-noise inputs must be positive")


def eta_cw(inputs: ShotNoiseInputs) -> float:
    """CW shot-noise sensitivity (4/(3*sqrt(3))) * (h/g_e mu_B) * dv/(C*sqrt(R)), T/rtHz."""
    return (
        4.0
        / (3.0 * np.sqrt(3.0))
        * inputs.planck_over_gmu
        * inputs.linewidth
        / (inputs.contrast * np.sqrt(inputs.photon_rate))
    )


def eta_from_series(series, frame_duration: float, axis: int = 0) -> np.ndarray | float:
    """Empirical per-pixel sensitivity: sample std over frames * sqrt(frame duration)."""
    series = np.asarray(series, dtype=float)
    if series.shape[axis] < 2:
        raise ValueError("need at least 2 frames to estimate a noise floor")
    out = np.std(series, axis=axis, ddof=1) * np.sqrt(frame_duration)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class CircularROI:
    """Pixel-space circular region: center (cx, cy) and radius, in pixels."""

    cx: float
    cy: float
    radius: float

    def mask(self, shape) -> np.ndarray:
        h, w = shape
        y, x = np.mgrid[0:h, 0:w]
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.radius**2


def default_roi(width: int, height: int, radius_frac: float = 0.45) -> CircularROI:
    """Centered circle with radius = radius_frac * min(width, height)."""
    return CircularROI(
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        radius=radius_frac * min(width, height),
    )


@dataclass
class SensitivityMap:
    """Per-pixel eta and volume-normalized eta_V with the analysis ROI."""

    eta: np.ndarray
    eta_v: np.ndarray
    roi: CircularROI
    pixel_volume: float


def volume_normalize(
    eta_map, pixel_pitch: float, layer_thickness: float, roi: CircularROI | None = None
) -> SensitivityMap:
    """eta_V = eta * sqrt(pitch^2 * thickness), elementwise."""
    if pixel_pitch <= 0 or layer_thickness <= 0:
        raise ValueError("pixel dimensions must be positive")
    eta_map = np.asarray(eta_map, dtype=float)
    volume = pixel_pitch**2 * layer_thickness
    if roi is None:
        h, w = eta_map.shape
        roi = default_roi(w, h)
    return SensitivityMap(
        eta=eta_map, eta_v=eta_map * np.sqrt(volume), roi=roi, pixel_volume=volume
    )


def roi_statistics(map_or_array, roi: CircularROI | None = None, bins: int = 50):
    """(mean, (counts, bin_edges)) over pixels whose centers fall in the ROI.

    Histogram bins span [min, max] of the ROI values in `bins` equal bins.
    """
    if isinstance(map_or_array, SensitivityMap):
        values = map_or_array.eta
        roi = roi if roi is not None else map_or_array.roi
    else:
        values = np.asarray(map_or_array, dtype=float)
        if roi is None:
            h, w = values.shape
            roi = default_roi(w, h)
    mask = roi.mask(values.shape)
    if not mask.any():
        raise ValueError("ROI contains no pixel centers")
    pix = values[mask]
    mean = float(np.mean(pix))
    lo, hi = float(pix.min()), float(pix.max())
    if lo == hi:
        hi = lo + max(abs(lo), 1.0) * 1e-12
    counts, edges = np.histogram(pix, bins=bins, range=(lo, hi))
    return mean, (counts, edges)


def predicted_eta(protocol: AcquisitionProtocol, models, *, senses=None) -> float:
    """Closed-form shot-noise eta of the simulated lock-in at the beam center.

    Noise: var(I) per frame = sum of the I+ and I- window expectations;
    signal: the calibrated dI/dB.  eta = sqrt(var)/slope * sqrt(frame duration);
    the frame duration cancels, leaving a photon-rate-limited floor.
    """
    from .acquisition import (
        _as_models,
        _default_senses,
        _effective_sharing,
        _window_fluence_constant,
    )

    models = _as_models(models)
    sn = tuple(senses) if senses is not None else _default_senses(models)
    sharing = _effective_sharing(protocol, models)
    fl = _window_fluence_constant(
        protocol, models, sn, sharing, GYROMAGNETIC, 0.0, 0.0
    )
    var_i = protocol.photon_rate * (fl[0] + fl[2])
    slope = calibrate_slope(protocol, models, quantity="field", senses=senses)
    return float(np.sqrt(var_i) / abs(slope) * np.sqrt(protocol.frame_duration))


def photon_rate_for_eta(
    protocol: AcquisitionProtocol, models, eta_target: float, *, senses=None
) -> float:
    """Photon rate at which the predicted beam-center eta equals `eta_target`."""
    base = predicted_eta(protocol, models, senses=senses)
    return protocol.photon_rate * (base / eta_target) ** 2
