"""Lorentzian ODMR lineshapes for single-tone and hyperfine (triple-tone) driving.

The three nuclear-spin-resolved lines sit at the transition center and +-HF.
Single-tone driving sees the triplet once; triple-tone driving excites all
three lines simultaneously, so the drive/line detunings form a five-point comb
with multiplicities 1,2,3,2,1 at offsets -2HF..+2HF.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .physics import HYPERFINE


class DriveScheme(enum.Enum):
    SINGLE_TONE = "single"
    TRIPLE_TONE = "triple"


# Comb offsets (units of HF) and multiplicities for each scheme.
_COMB = {
    DriveScheme.SINGLE_TONE: ((0, 1, -1), (1, 1, 1)),
    DriveScheme.TRIPLE_TONE: ((0, 1, -1, 2, -2), (3, 2, 2, 1, 1)),
}


@dataclass
class OdmrModel:
    """One transition's lineshape under a chosen driving scheme."""

    omega0: float
    linewidth: float
    contrast: float
    hf: float = HYPERFINE
    scheme: DriveScheme = DriveScheme.SINGLE_TONE

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = DriveScheme(self.scheme)
        if self.linewidth <= 0:
            raise ValueError("linewidth must be positive")
        if not 0 < self.contrast < 1:
            raise ValueError("contrast must lie in (0, 1)")
        if self.hf <= 0:
            raise ValueError("hf must be positive")


def lorentzian(delta, linewidth):
    """Unit-amplitude Lorentzian, full width `linewidth`: w^2 / (w^2 + 4 delta^2)."""
    w2 = linewidth * linewidth
    delta = np.asarray(delta, dtype=float)
    return w2 / (w2 + 4.0 * delta * delta)


def dip(model: OdmrModel, detuning):
    """Total fluorescence dip at drive detuning `detuning` from the line center.

    Comb terms are accumulated as m0*L(x) + sum_k m_k*(L(x+k*HF) + L(x-k*HF))
    so the result is exactly even in the detuning (the +-k pair is summed
    before joining the total), which keeps balanced-modulation differences
    free of spurious floating-point asymmetry.
    """
    offsets, mults = _COMB[model.scheme]
    x = np.asarray(detuning, dtype=float)
    total = mults[0] * lorentzian(x, model.linewidth)
    for k, m in zip(offsets[1::2], mults[1::2]):
        pair = lorentzian(x + k * model.hf, model.linewidth) + lorentzian(
            x - k * model.hf, model.linewidth
        )
        total = total + m * pair
    return model.contrast * total


def spectrum(model: OdmrModel, omega):
    """Normalized fluorescence 1 - dip at drive frequency `omega` (Hz)."""
    return 1.0 - dip(model, np.asarray(omega, dtype=float) - model.omega0)


def dip_depth(model: OdmrModel) -> float:
    """On-resonance dip depth: C(1+2a) single-tone, C(3+4a+2b) triple-tone."""
    return float(dip(model, 0.0))


def contrast_enhancement(linewidth: float, hf: float = HYPERFINE) -> float:
    """Ratio of triple-tone to single-tone on-resonance dip depths.

    (3 + 4a + 2b) / (1 + 2a) with a = 1/(1+4r^2), b = 1/(1+16r^2), r = hf/linewidth.
    Tends to 3 both for linewidth -> 0 and linewidth -> inf; its global minimum
    over linewidth is ~2.699 at linewidth ~= 2.149*hf.
    """
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    r = hf / linewidth
    a = 1.0 / (1.0 + 4.0 * r * r)
    b = 1.0 / (1.0 + 16.0 * r * r)
    return (3.0 + 4.0 * a + 2.0 * b) / (1.0 + 2.0 * a)


def minimum_enhancement(hf: float = HYPERFINE) -> tuple[float, float]:
    """(linewidth, ratio) at the global minimum of `contrast_enhancement`."""
    res = minimize_scalar(
        lambda w: contrast_enhancement(w, hf),
        bracket=(0.5 * hf, 2.0 * hf, 10.0 * hf),
        options={"xtol": 1e-10},
    )
    return float(res.x), float(res.fun)


def linewidth_for_enhancement(
    target: float, hf: float = HYPERFINE, branch: str = "broad"
) -> float:
    """Linewidth whose enhancement ratio equals `target`, by scalar root-search.

    The ratio is 3 in both narrow- and broad-line limits with a single minimum
    in between, so attainable targets have two roots; `branch` selects the
    power-broadened ("broad") or narrow ("narrow") one.  Raises ValueError when
    the target lies outside the attainable range (min_ratio, 3).
    """
    w_min, r_min = minimum_enhancement(hf)
    if not r_min <= target < 3.0:
        raise ValueError(
            f"enhancement ratio {target} is unattainable: the ratio only spans "
            f"({r_min:.6f}, 3.0) with its minimum at linewidth {w_min:.4g} Hz"
        )
    f = lambda w: contrast_enhancement(w, hf) - target
    if branch == "broad":
        hi = w_min
        while f(hi * 2) < 0:
            hi *= 2
        return float(brentq(f, w_min, hi * 2, xtol=1e-6))
    lo = w_min
    while f(lo / 2) < 0:
        lo /= 2
    return float(brentq(f, lo / 2, w_min, xtol=1e-6))


def dr_spectrum(model_f1: OdmrModel, model_f2: OdmrModel, omega, mirror_center=None):
    """Double-resonance fluorescence: dips of both transitions added (C << 1).

    With `mirror_center` set, the second dip is evaluated at the mirrored
    frequency 2*mirror_center - omega, reproducing a swept double-resonance
    curve where both tones move symmetrically about the midpoint.
    """
    if abs(model_f1.omega0 - model_f2.omega0) < max(
        model_f1.linewidth, model_f2.linewidth
    ) and model_f1.omega0 != model_f2.omega0:
        warnings.warn(
            "transition lines overlap within a linewidth; additive dip model "
            "is a rough approximation here",
            stacklevel=2,
        )
    omega = np.asarray(omega, dtype=float)
    omega2 = omega if mirror_center is None else 2.0 * mirror_center - omega
    return 1.0 - dip(model_f1, omega - model_f1.omega0) - dip(
        model_f2, omega2 - model_f2.omega0
    )
