"""Independent reference routes used by the test suite.

Everything in this module is computed from first principles (Lorentzian comb
arithmetic, the exact piecewise-linear LR solution, a brute-force lag scan)
without calling back into the package, so each check compares two
independently written routes.
"""
import numpy as np

GAMMA = 28.0e9  # Hz per tesla

# hyperfine comb: (offset multiple of hf, weight)
_COMB = {
    "single": ((-1, 1.0), (0, 1.0), (1, 1.0)),
    "triple": ((-2, 1.0), (-1, 2.0), (0, 3.0), (1, 2.0), (2, 1.0)),
}


def dip_ref(detuning, linewidth, contrast, hf=2.16e6, scheme="triple"):
    """Fractional fluorescence dip at `detuning` from the comb center."""
    d = np.asarray(detuning, dtype=float)
    acc = 0.0
    for k, mult in _COMB[scheme]:
        delta = d - k * hf
        acc = acc + mult * linewidth**2 / (linewidth**2 + 4.0 * delta**2)
    return contrast * acc


def lockin_i_ref(photon_rate, f_mod, n_cyc, mod_depth, lines, b_field, delta_d=0.0):
    """Closed-form lock-in I output for a static field / splitting offset.

    `lines` is a sequence of (linewidth, contrast, hf, scheme, sense, sign)
    per driven transition: sense = -1/+1 is the Zeeman slope of the lower /
    upper transition, sign = +1 for modulation phase 0 and -1 for pi.
    Contrast sharing: full for a single chain, 2/3 each for two.

        I = R * (T_cyc/4) * n_cyc * share
            * sum_j sign_j * [dip_j(-h - s_j) - dip_j(h - s_j)]

    with h = mod_depth/2 and s_j = delta_d + sense_j * gamma * B.
    """
    share = 1.0 if len(lines) == 1 else 2.0 / 3.0
    h = mod_depth / 2.0
    t_quarter = 0.25 / f_mod
    acc = 0.0
    for lw, c, hf, scheme, sense, sign in lines:
        s = delta_d + sense * GAMMA * b_field
        acc += sign * (
            dip_ref(-h - s, lw, c, hf, scheme) - dip_ref(h - s, lw, c, hf, scheme)
        )
    return photon_rate * t_quarter * n_cyc * share * acc


def dr_lines(linewidth=1.0e6, contrast=0.015, hf=2.16e6, scheme="triple"):
    """The standard antiphase double-resonance line pair for lockin_i_ref."""
    return (
        (linewidth, contrast, hf, scheme, -1, +1.0),
        (linewidth, contrast, hf, scheme, +1, -1.0),
    )


def pulse_vertices_ref(amplitude, period, flip, start, ramp):
    """(t, V) breakpoints of one period of the bipolar triangular pulse."""
    return [
        (0.0, 0.0),
        (start, 0.0),
        (start + ramp, amplitude),
        (start + ramp + flip, -amplitude),
        (start + 2.0 * ramp + flip, 0.0),
        (period, 0.0),
    ]


def exact_lr_current(inductance, resistance, vertices, n_periods, period, times):
    """Exact LR response to a periodic piecewise-linear voltage.

    Over a segment with V(t) = a + b*(t - t0) the particular solution is
    i_p(dt) = (a + b*dt)/R - b*L/R^2 and the full solution
    i(dt) = i_p(dt) + (i0 - i_p(0)) * exp(-dt/tau); the state is marched
    vertex to vertex from i(0) = 0, then evaluated on `times`.
    """
    tau = inductance / resistance
    seg_t, seg_v = [], []
    for p in range(n_periods):
        for tv, vv in vertices[:-1]:
            seg_t.append(p * period + tv)
            seg_v.append(vv)
    seg_t.append(n_periods * period)
    seg_v.append(vertices[-1][1])
    seg_t = np.asarray(seg_t)
    seg_v = np.asarray(seg_v)

    states = [0.0]
    for k in range(len(seg_t) - 1):
        t0, t1 = seg_t[k], seg_t[k + 1]
        if t1 <= t0:
            states.append(states[-1])
            continue
        a = seg_v[k]
        b = (seg_v[k + 1] - seg_v[k]) / (t1 - t0)
        ip0 = a / resistance - b * inductance / resistance**2
        ip1 = (a + b * (t1 - t0)) / resistance - b * inductance / resistance**2
        states.append(ip1 + (states[-1] - ip0) * np.exp(-(t1 - t0) / tau))
    states = np.asarray(states)

    ts = np.asarray(times, dtype=float)
    out = np.empty_like(ts)
    idx = np.clip(np.searchsorted(seg_t, ts, side="right") - 1, 0, len(seg_t) - 2)
    for k in np.unique(idx):
        m = idx == k
        t0, t1 = seg_t[k], seg_t[k + 1]
        if t1 <= t0:
            out[m] = states[k]
            continue
        a = seg_v[k]
        b = (seg_v[k + 1] - seg_v[k]) / (t1 - t0)
        dt = ts[m] - t0
        ip0 = a / resistance - b * inductance / resistance**2
        out[m] = (
            (a + b * dt) / resistance
            - b * inductance / resistance**2
            + (states[k] - ip0) * np.exp(-dt / tau)
        )
    return out


def lag_scan(times, trace, reference, lags, fine_step=1.0e-5):
    """Brute-force normalized cross-correlation lag on a fixed grid.

    Positive lag means the trace follows the reference.  Both series are
    mean-removed and linearly interpolated onto a common `fine_step` grid.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(trace, dtype=float)
    v = np.asarray(reference, dtype=float)
    y = y - y.mean()
    v = v - v.mean()
    fine = np.arange(t[0], t[-1], fine_step)
    yi = np.interp(fine, t, y)
    vi = np.interp(fine, t, v)
    scores = []
    for lag in lags:
        shifted = np.interp(fine - lag, fine, vi, left=np.nan, right=np.nan)
        ok = ~np.isnan(shifted)
        a, b = yi[ok], shifted[ok]
        scores.append(np.dot(a - a.mean(), b - b.mean()) / (a.std() * b.std() * ok.sum()))
    return float(lags[int(np.argmax(scores))])
