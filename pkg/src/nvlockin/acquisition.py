"""Frame-based lock-in camera simulation.

Each modulation cycle is split into four equal integration windows ordered
I+, Q+, I-, Q-.  A square-wave frequency modulation toggles every drive tone
between its center +- mod_depth/2; the waveform m(t; phi) =
sign(cos(2*pi*f_mod*t - pi/4 + phi)) is offset so that for phi = 0 its
transitions land at the centers of the Q windows (high-state window fractions
1, 1/2, 0, 1/2).  A frame accumulates n_cyc cycles; I = N(I+) - N(I-),
Q = N(Q+) - N(Q-) in photon counts, with per-window Poisson shot noise.

Expected counts are integrated exactly over the piecewise-constant drive-state
segments (window edges plus FM transition instants), so arbitrary phase pairs
and time-varying fields are handled without quadrature error beyond the
piecewise-constant field approximation at segment midpoints.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError
from .odmr import OdmrModel, dip
from .physics import GYROMAGNETIC

N_WINDOWS = 4


@dataclass
class AcquisitionProtocol:
    """Lock-in camera protocol and detector geometry."""

    f_mod: float
    mod_depth: float = 3.0e5
    n_cyc: int = 1
    phi1: float = 0.0
    phi2: float = np.pi
    photon_rate: float = 1.0e9
    width: int = 1
    height: int = 1
    pixel_pitch: float = 0.54e-6
    layer_thickness: float = 40.0e-6
    beam_fwhm: float | None = None
    contrast_sharing: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.f_mod <= 0:
            raise ValueError("f_mod must be positive")
        if self.n_cyc < 1:
            raise ValueError("n_cyc must be at least 1")
        if self.photon_rate <= 0:
            raise ValueError("photon_rate must be positive")
        # Sign flips of mod_depth are permitted (slope-sign diagnostics); only
        # a zero excursion is meaningless.
        if self.mod_depth == 0:
            raise ValueError("mod_depth must be nonzero")
        if self.width < 1 or self.height < 1:
            raise ValueError("detector must have at least one pixel")

    @property
    def frame_duration(self) -> float:
        return self.n_cyc / self.f_mod

    @property
    def frame_rate(self) -> float:
        return self.f_mod / self.n_cyc

    @property
    def pixel_volume(self) -> float:
        return self.pixel_pitch**2 * self.layer_thickness


@dataclass
class LockInFrame:
    """Per-pixel integrated I and Q planes for one camera frame."""

    i_plane: np.ndarray
    q_plane: np.ndarray
    frame_index: int
    timestamp: float


@dataclass
class FrameStack:
    """Dense (n_frames, height, width) view of a frame stream plus timing."""

    i: np.ndarray
    q: np.ndarray
    f_mod: float
    n_cyc: int

    @property
    def n_frames(self) -> int:
        return self.i.shape[0]

    @property
    def frame_duration(self) -> float:
        return self.n_cyc / self.f_mod

    @classmethod
    def from_frames(cls, frames, f_mod, n_cyc):
        frames = list(frames)
        return cls(
            i=np.stack([f.i_plane for f in frames]),
            q=np.stack([f.q_plane for f in frames]),
            f_mod=f_mod,
            n_cyc=n_cyc,
        )


def frame_timing(protocol: AcquisitionProtocol) -> tuple[float, float]:
    """(frame duration s, frame rate Hz) = (n_cyc/f_mod, f_mod/n_cyc)."""
    return protocol.frame_duration, protocol.frame_rate


def _as_models(models) -> tuple[OdmrModel, ...]:
    if isinstance(models, OdmrModel):
        return (models,)
    out = tuple(models)
    if not 1 <= len(out) <= 2:
        raise ValueError("expected one or two drive models")
    return out


def _default_senses(models) -> tuple[int, ...]:
    """Which way each line moves per unit field: lower transition -1, upper +1."""
    if len(models) == 1:
        return (-1,)
    return (-1, 1) if models[0].omega0 <= models[1].omega0 else (1, -1)


def _effective_sharing(protocol, models) -> float:
    if protocol.contrast_sharing is not None:
        return protocol.contrast_sharing
    return 1.0 if len(models) == 1 else 2.0 / 3.0


def instantaneous_fluorescence(
    models,
    drive_freqs,
    true_field=0.0,
    delta_d=0.0,
    *,
    gamma: float = GYROMAGNETIC,
    senses=None,
    sharing: float = 1.0,
):
    """Expected photon-rate multiplier for given (FM-resolved) drive frequencies.

    Line centers shift by delta_d + sense*gamma*true_field; each driven chain
    contributes its dip scaled by the population-sharing factor.
    """
    models = _as_models(models)
    senses = tuple(senses) if senses is not None else _default_senses(models)
    drive_freqs = np.atleast_1d(np.asarray(drive_freqs, dtype=float))
    if len(drive_freqs) != len(models):
        raise ValueError("one drive frequency per model required")
    total = 1.0
    for model, drive, sense in zip(models, drive_freqs, senses):
        shift = delta_d + sense * gamma * true_field
        total = total - sharing * dip(model, drive - (model.omega0 + shift))
    return total


def _fluorescence_from_detunings(models, detunings, sharing):
    """1 - sum of shared dips, with drive/line detunings supplied directly.

    Working in relative frequencies keeps the balanced-modulation response
    exactly odd in the applied field (no ~1e-6 Hz rounding from absolute
    ~GHz drive frequencies), which the noiseless linearity contract needs.
    """
    total = 1.0
    for model, det in zip(models, detunings):
        total = total - sharing * dip(model, det)
    return total


def _mod_state(phi: float, frac) -> int:
    """Square-wave FM state (+1 high / -1 low) at cycle fraction `frac`."""
    c = np.cos(2.0 * np.pi * frac - 0.25 * np.pi + phi)
    return 1 if c >= 0 else -1


def _cycle_segments(phases: tuple[float, ...]):
    """Piecewise-constant segments of one cycle: (start, end, window, states).

    Fractions of the cycle period; `states` holds the +-1 FM state per chain.
    """
    edges = {0.0, 0.25, 0.5, 0.75, 1.0}
    for phi in phases:
        t = (0.375 - phi / (2.0 * np.pi)) % 0.5
        edges.add(t)
        edges.add(t + 0.5)
    pts = sorted(edges)
    segments = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-15:
            continue
        mid = 0.5 * (a + b)
        window = min(int(mid * 4.0), 3)
        states = tuple(_mod_state(phi, mid) for phi in phases)
        segments.append((a, b, window, states))
    return segments


def _segment_detunings(models, senses, states, half, gamma, field, delta_d):
    """Drive/line detunings per chain for one FM state tuple."""
    out = []
    for model, sense, st in zip(models, senses, states):
        shift = delta_d + sense * gamma * field
        out.append(st * half - shift)
    return out


def _window_fluence_constant(protocol, models, senses, sharing, gamma, field, delta_d):
    """Per-window expected photon seconds per unit rate, field constant in time.

    `field`/`delta_d` may be scalars or (height, width) arrays; returns a list
    of four matching-shaped values.
    """
    phases = (protocol.phi1, protocol.phi2)[: len(models)]
    segments = _cycle_segments(phases)
    half = 0.5 * protocol.mod_depth
    period = 1.0 / protocol.f_mod
    fluence = [0.0, 0.0, 0.0, 0.0]
    cache = {}
    for a, b, window, states in segments:
        if states not in cache:
            dets = _segment_detunings(models, senses, states, half, gamma, field, delta_d)
            cache[states] = _fluorescence_from_detunings(models, dets, sharing)
        fluence[window] = fluence[window] + (b - a) * period * cache[states]
    return [protocol.n_cyc * f for f in fluence]


def _window_fluence_timevarying(
    protocol, models, senses, sharing, gamma, field_at, delta_d_at, frame_t0
):
    """Per-window expected photon seconds per unit rate for callable movies."""
    phases = (protocol.phi1, protocol.phi2)[: len(models)]
    segments = _cycle_segments(phases)
    half = 0.5 * protocol.mod_depth
    period = 1.0 / protocol.f_mod
    fluence = [0.0, 0.0, 0.0, 0.0]
    for c in range(protocol.n_cyc):
        t0 = frame_t0 + c * period
        for a, b, window, states in segments:
            tm = t0 + 0.5 * (a + b) * period
            dets = _segment_detunings(
                models, senses, states, half, gamma, field_at(tm), delta_d_at(tm)
            )
            f = _fluorescence_from_detunings(models, dets, sharing)
            fluence[window] += (b - a) * period * f
    return fluence


def photon_rate_map(protocol: AcquisitionProtocol) -> np.ndarray:
    """(height, width) photon rate per pixel; Gaussian beam profile if configured.

    `photon_rate` is the peak (beam-center) rate; with no beam_fwhm the
    illumination is uniform.
    """
    shape = (protocol.height, protocol.width)
    if protocol.beam_fwhm is None:
        return np.full(shape, protocol.photon_rate)
    y = (np.arange(protocol.height) - (protocol.height - 1) / 2.0) * protocol.pixel_pitch
    x = (np.arange(protocol.width) - (protocol.width - 1) / 2.0) * protocol.pixel_pitch
    r2 = y[:, None] ** 2 + x[None, :] ** 2
    coeff = 4.0 * np.log(2.0) / protocol.beam_fwhm**2
    return protocol.photon_rate * np.exp(-coeff * r2)


def _normalize_movie(movie, n_frames, shape, name):
    """Classify a movie input: None, per-frame array, or callable of time."""
    if movie is None:
        return ("zero", None)
    if callable(movie):
        return ("callable", movie)
    arr = np.asarray(movie, dtype=float)
    if arr.ndim == 0:
        return ("per_frame", np.full(n_frames, float(arr)))
    if arr.shape[0] < n_frames:
        raise ValueError(
            f"{name} covers {arr.shape[0]} frames but {n_frames} are requested"
        )
    if arr.ndim == 1:
        return ("per_frame", arr)
    if arr.ndim == 3 and arr.shape[1:] == shape:
        return ("per_frame", arr)
    raise ValueError(f"{name} must be scalar, (n,), (n,H,W), or callable")


def _frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Counter-based per-frame stream: reproducible regardless of chunking."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(frame_index,))
    return np.random.Generator(np.random.Philox(ss))


def simulate_frames(
    protocol: AcquisitionProtocol,
    models,
    field_movie=None,
    delta_d_movie=None,
    n_frames: int = 1,
    *,
    shot_noise: bool = True,
    senses=None,
    gamma: float = GYROMAGNETIC,
):
    """Yield LockInFrame objects in frame-index order.

    field_movie / delta_d_movie: None (zero), scalar, per-frame array (n,),
    per-frame per-pixel array (n, height, width), or callable of absolute time
    (evaluated at drive-state segment midpoints within each frame).
    """
    models = _as_models(models)
    senses = tuple(senses) if senses is not None else _default_senses(models)
    sharing = _effective_sharing(protocol, models)
    shape = (protocol.height, protocol.width)
    rates = photon_rate_map(protocol)
    duration = protocol.frame_duration

    fkind, fdata = _normalize_movie(field_movie, n_frames, shape, "field_movie")
    dkind, ddata = _normalize_movie(delta_d_movie, n_frames, shape, "delta_d_movie")

    def frame_values(kind, data, f):
        if kind == "zero":
            return 0.0
        return data[f]

    static = fkind == "zero" and dkind == "zero"
    static_fluence = None
    for f in range(n_frames):
        if fkind == "callable" or dkind == "callable":
            field_at = fdata if fkind == "callable" else (
                lambda t, _v=frame_values(fkind, fdata, f): _v
            )
            dd_at = ddata if dkind == "callable" else (
                lambda t, _v=frame_values(dkind, ddata, f): _v
            )
            fluence = _window_fluence_timevarying(
                protocol, models, senses, sharing, gamma,
                field_at, dd_at, f * duration,
            )
        elif static and static_fluence is not None:
            fluence = static_fluence
        else:
            fluence = _window_fluence_constant(
                protocol, models, senses, sharing, gamma,
                frame_values(fkind, fdata, f), frame_values(dkind, ddata, f),
            )
            if static:
                static_fluence = fluence

        lam = [np.broadcast_to(np.asarray(rates * fl), shape) for fl in fluence]
        if shot_noise:
            rng = _frame_rng(protocol.seed, f)
            counts = [rng.poisson(l).astype(np.float64) for l in lam]
        else:
            counts = [np.asarray(l, dtype=np.float64) for l in lam]
        yield LockInFrame(
            i_plane=counts[0] - counts[2],
            q_plane=counts[1] - counts[3],
            frame_index=f,
            timestamp=f * duration,
        )


def collect_frames(protocol, models, *args, **kwargs) -> FrameStack:
    """simulate_frames, stacked into a FrameStack."""
    frames = simulate_frames(protocol, models, *args, **kwargs)
    return FrameStack.from_frames(frames, protocol.f_mod, protocol.n_cyc)


def calibrate_slope(
    protocol: AcquisitionProtocol,
    models,
    *,
    quantity: str = "field",
    step: float | None = None,
    senses=None,
    gamma: float = GYROMAGNETIC,
) -> float:
    """Noiseless lock-in slope at the operating point, by two-sided difference.

    quantity "field": dI/dB in counts per tesla per frame (step 100 nT);
    quantity "temperature": dI/d(delta_d) in counts per Hz per frame (step 100 Hz).
    The returned slope refers to a beam-center pixel (photon_rate at face value).
    """
    models = _as_models(models)
    senses = tuple(senses) if senses is not None else _default_senses(models)
    sharing = _effective_sharing(protocol, models)
    if quantity == "field":
        h = 1.0e-7 if step is None else step

        def i_at(x):
            fl = _window_fluence_constant(
                protocol, models, senses, sharing, gamma, x, 0.0
            )
            return protocol.photon_rate * (fl[0] - fl[2])

    elif quantity == "temperature":
        h = 100.0 if step is None else step

        def i_at(x):
            fl = _window_fluence_constant(
                protocol, models, senses, sharing, gamma, 0.0, x
            )
            return protocol.photon_rate * (fl[0] - fl[2])

    else:
        raise ValueError("quantity must be 'field' or 'temperature'")
    slope = (i_at(h) - i_at(-h)) / (2.0 * h)
    if slope == 0.0:
        raise CalibrationError(
            "lock-in slope is zero at this operating point (drive off resonance "
            "or phase configuration insensitive to the requested quantity)"
        )
    return float(slope)
