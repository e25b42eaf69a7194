"""LR-circuit driven magnetic pulse trains and their time-resolved readout.

The coil current obeys L di/dt + R i = V(t) (time constant tau = L/R) and maps
to the projected field through a calibrated coefficient; the camera frames
integrate that field, so the reconstruction lags the drive voltage by ~tau.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionProtocol, collect_frames
from .demod import PhaseConfig, calibrate_alpha, demodulate
from .errors import StepSizeError, UndefinedLagError


@dataclass
class LRCircuit:
    inductance: float = 1.8e-3
    resistance: float = 2.0
    field_coefficient: float = 1.0  # projected tesla per ampere

    def __post_init__(self):
        if min(self.inductance, self.resistance) <= 0:
            raise ValueError("inductance and resistance must be positive")

    @property
    def tau(self) -> float:
        return self.inductance / self.resistance


@dataclass
class PulseTrain:
    """Periodic triangular voltage pulse with a polarity reversal.

    One period: flat zero until `start_time`, ramp 0 -> +A over `ramp_time`,
    +A -> -A across `polarity_flip_window`, -A -> 0 over `ramp_time`, then
    flat zero to the end of the period.
    """

    amplitude: float
    period: float = 10.0e-3
    polarity_flip_window: float = 2.0e-3
    start_time: float = 1.0e-3
    ramp_time: float = 1.0e-3
    n_periods: int = 1
    shape: str = "triangular"

    def __post_init__(self):
        if self.polarity_flip_window >= self.period:
            raise ValueError("polarity_flip_window must be shorter than the period")
        if self.start_time + 2 * self.ramp_time + self.polarity_flip_window > self.period:
            raise ValueError("pulse vertices exceed the period")

    @property
    def duration(self) -> float:
        return self.n_periods * self.period

    def vertices(self):
        t0 = self.start_time
        return (
            (0.0, 0.0),
            (t0, 0.0),
            (t0 + self.ramp_time, self.amplitude),
            (t0 + self.ramp_time + self.polarity_flip_window, -self.amplitude),
            (t0 + 2 * self.ramp_time + self.polarity_flip_window, 0.0),
            (self.period, 0.0),
        )

    def voltage(self, t):
        """Piecewise-linear voltage at time(s) t; zero outside [0, duration)."""
        t = np.asarray(t, dtype=float)
        tv, vv = zip(*self.vertices())
        v = np.interp(t % self.period, tv, vv)
        v = np.where((t >= 0) & (t < self.duration), v, 0.0)
        return v if v.ndim else float(v)


@dataclass
class TransientTrace:
    """Frame-center times with reconstructed and frame-averaged true field."""

    times: np.ndarray
    reconstructed_field: np.ndarray
    true_field: np.ndarray
    noise_std: float
    voltage: np.ndarray | None = None
    current: np.ndarray | None = None

    def __post_init__(self):
        if not (len(self.times) == len(self.reconstructed_field) == len(self.true_field)):
            raise ValueError("trace arrays must have equal lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def lr_current(circuit: LRCircuit, voltage, dt: float, duration: float, i0: float = 0.0):
    """Classical 4th-order explicit integration of L di/dt + R i = V(t).

    Returns (times, current) on the uniform grid t = 0, dt, ..., ~duration.
    """
    tau = circuit.tau
    if dt > tau / 100.0:
        raise StepSizeError(
            f"dt = {dt:g} s too coarse; need dt <= tau/100 = {tau / 100.0:g} s"
        )
    n = int(round(duration / dt))
    times = dt * np.arange(n + 1)
    v_full = np.asarray(voltage(times), dtype=float)
    v_half = np.asarray(voltage(times[:-1] + 0.5 * dt), dtype=float)
    inv_l = 1.0 / circuit.inductance
    r = circuit.resistance
    i = np.empty(n + 1)
    i[0] = i0
    y = i0
    for k in range(n):
        k1 = inv_l * (v_full[k] - r * y)
        k2 = inv_l * (v_half[k] - r * (y + 0.5 * dt * k1))
        k3 = inv_l * (v_half[k] - r * (y + 0.5 * dt * k2))
        k4 = inv_l * (v_full[k + 1] - r * (y + dt * k3))
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        i[k + 1] = y
    return times, i


def run_transient_experiment(
    circuit: LRCircuit,
    pulse: PulseTrain,
    protocol: AcquisitionProtocol,
    models,
    *,
    n_frames: int | None = None,
    dt: float = 5.0e-6,
    seed: int | None = None,
    senses=None,
    shot_noise: bool = True,
) -> TransientTrace:
    """End-to-end pulsed-field acquisition and per-pixel reconstruction.

    Builds the projected-field movie B(t) = field_coefficient * i(t), uniform
    across pixels, simulates lock-in frames (shot noise optional), demodulates
    in FieldMode, and returns the central-pixel trace at frame-center times
    with the frame-averaged true field attached.
    """
    frame_duration = protocol.frame_duration
    if protocol.frame_rate < 2.0 / pulse.polarity_flip_window:
        raise ValueError(
            "frame rate must be at least 2/polarity_flip_window to resolve the flip"
        )
    if n_frames is None:
        n_frames = int(round(pulse.duration / frame_duration))
    if n_frames < 1:
        raise ValueError("experiment must span at least one frame")
    duration = n_frames * frame_duration
    times, current = lr_current(circuit, pulse.voltage, dt, duration)
    b_fine = circuit.field_coefficient * current

    def field_at(t):
        return float(np.interp(t, times, b_fine))

    if seed is not None:
        protocol = replace_seed(protocol, seed)
    stack = collect_frames(
        protocol,
        models,
        field_movie=field_at,
        n_frames=n_frames,
        senses=senses,
        shot_noise=shot_noise,
    )
    alpha = calibrate_alpha(protocol, models, PhaseConfig.FIELD, senses=senses)
    recon = demodulate(stack.i, alpha, PhaseConfig.FIELD)
    central = recon[:, protocol.height // 2, protocol.width // 2]

    # Frame-window averages of the true field from the fine ODE grid.
    frame_times = (np.arange(n_frames) + 0.5) * frame_duration
    true_avg = np.empty(n_frames)
    per_frame = frame_duration / dt
    for f in range(n_frames):
        a = int(round(f * per_frame))
        b = int(round((f + 1) * per_frame))
        b = min(b, len(b_fine) - 1)
        # Trapezoid over the frame window.
        true_avg[f] = np.trapezoid(b_fine[a : b + 1], dx=dt) / (dt * (b - a))
    noise = float(np.std(central - true_avg, ddof=1))
    return TransientTrace(
        times=frame_times,
        reconstructed_field=central,
        true_field=true_avg,
        noise_std=noise,
        voltage=np.asarray(pulse.voltage(frame_times), dtype=float),
        current=np.interp(frame_times, times, current),
    )


def replace_seed(protocol: AcquisitionProtocol, seed: int) -> AcquisitionProtocol:
    from dataclasses import replace

    return replace(protocol, seed=seed)


def delay_estimate(trace: TransientTrace, voltage_waveform=None, max_lag: float | None = None) -> float:
    """Lag (s) of the reconstruction behind the drive voltage.

    Normalized cross-correlation over the common support with parabolic
    sub-sample refinement around the peak; positive result means the trace
    lags the voltage.  `max_lag` restricts the search window.
    """
    y = np.asarray(trace.reconstructed_field, dtype=float)
    t = np.asarray(trace.times, dtype=float)
    if voltage_waveform is None:
        if trace.voltage is None:
            raise ValueError("no voltage waveform available")
        x = np.asarray(trace.voltage, dtype=float)
    elif callable(voltage_waveform):
        x = np.asarray(voltage_waveform(t), dtype=float)
    else:
        x = np.asarray(voltage_waveform, dtype=float)
        if len(x) != len(y):
            raise ValueError("voltage samples must match the trace length")
    x = x - x.mean()
    y = y - y.mean()
    if np.std(y) == 0 or np.std(x) == 0:
        raise UndefinedLagError("flat trace or drive; cross-correlation lag undefined")
    step = t[1] - t[0]
    corr = np.correlate(y, x, mode="full")
    lags = np.arange(-len(x) + 1, len(x)) * step
    if max_lag is not None:
        keep = np.abs(lags) <= max_lag
        corr, lags = corr[keep], lags[keep]
    k = int(np.argmax(corr))
    if 0 < k < len(corr) - 1:
        c0, c1, c2 = corr[k - 1], corr[k], corr[k + 1]
        denom = c0 - 2.0 * c1 + c2
        frac = 0.5 * (c0 - c2) / denom if denom != 0 else 0.0
        return float(lags[k] + frac * step)
    return float(lags[k])
