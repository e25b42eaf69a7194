"""Spin physics of the four-axis diamond defect ensemble.

Axis geometry of the <111> family, Zeeman projection of a bias/test field onto
each symmetry axis, and the resonance-frequency pair of the ground-state spin
transitions, f = d0 -/+ gamma*|B_proj|.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfModelError

# Zero-field splitting of the m_s=0 <-> +-1 transitions, Hz.
D_SPLITTING = 2.87e9
# Gyromagnetic ratio gamma/2pi, Hz per tesla.
GYROMAGNETIC = 28.0e9
# 14N hyperfine splitting between the three nuclear-spin-resolved lines, Hz.
HYPERFINE = 2.16e6

_AXES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)


def nv_axes() -> np.ndarray:
    """The four defect symmetry axes as unit vectors, shape (4, 3).

    Tetrahedral <111> family: pairwise dot products are -1/3.
    """
    return _AXES.copy()


@dataclass
class NVConfiguration:
    """Diamond + bias-field geometry in the crystal frame (<001> = z)."""

    d0: float = D_SPLITTING
    gamma: float = GYROMAGNETIC
    bias_field: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axes: np.ndarray = field(default_factory=nv_axes)

    def __post_init__(self):
        self.bias_field = np.asarray(self.bias_field, dtype=float)
        self.axes = np.asarray(self.axes, dtype=float)
        if self.d0 <= 0:
            raise ValueError("d0 must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.bias_field.shape != (3,):
            raise ValueError("bias_field must be a 3-vector")
        if self.axes.shape != (4, 3):
            raise ValueError("axes must be four 3-vectors")
        norms = np.linalg.norm(self.axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("axis vectors must have unit norm (1e-12)")
        dots = self.axes @ self.axes.T
        off = dots[~np.eye(4, dtype=bool)]
        if np.any(np.abs(off + 1.0 / 3.0) > 1e-12):
            raise ValueError("pairwise axis dot products must equal -1/3 (1e-12)")

    def projections(self) -> np.ndarray:
        """Signed field projection onto each of the four axes, tesla."""
        return self.axes @ self.bias_field


@dataclass
class ResonancePair:
    """Lower/upper transition frequencies for one axis, Hz."""

    f1: float
    f2: float

    @property
    def splitting(self) -> float:
        return self.f2 - self.f1

    @property
    def center(self) -> float:
        return 0.5 * (self.f1 + self.f2)


def project_field(bias_field, axis) -> float:
    """Signed projection of `bias_field` (tesla 3-vector) onto a unit `axis`."""
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError("axis must be unit-norm")
    return float(np.dot(np.asarray(bias_field, dtype=float), axis))


def resonance_pair(config: NVConfiguration, axis_index: int) -> ResonancePair:
    """Transition pair for one axis: f1 = d0 - gamma*|B_proj|, f2 = d0 + gamma*|B_proj|.

    The projection is reduced to its magnitude (the lineshape observables are
    symmetric under axis inversion); signs matter only for demodulation slopes.
    """
    b = abs(project_field(config.bias_field, config.axes[axis_index]))
    f1 = config.d0 - config.gamma * b
    f2 = config.d0 + config.gamma * b
    if f1 <= 0:
        raise OutOfModelError(
            f"projected field {b:.3e} T pushes f1 = {f1:.3e} Hz out of the model"
        )
    return ResonancePair(f1, f2)


def alignment_spectrum_positions(config: NVConfiguration) -> list[ResonancePair]:
    """Resonance pairs for all four axes (degenerate pairs repeat).

    A <001>-aligned bias yields one four-fold degenerate pair; <111> alignment
    yields two distinct pairs (one axis at full projection, three at 1/3).
    """
    return [resonance_pair(config, i) for i in range(4)]
