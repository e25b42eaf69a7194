"""Ramsey and Hahn-echo decay models and their least-squares fitting.

Ramsey free-induction shows the three-line hyperfine beat under an exponential
envelope; the echo decays as a stretched exponential in the total evolution
time 2*tau.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import ConvergenceError, RankDeficiencyError
from .physics import HYPERFINE


@dataclass
class CoherenceModel:
    """Decay parameters; `hyperfine_freqs` are angular frequencies (rad/s)."""

    c0: float
    t2_star: float
    t2: float
    stretch_p: float = 1.0
    hyperfine_freqs: tuple = ()

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.t2_star <= 0 or self.t2 <= 0:
            raise ValueError("coherence times must be positive")
        if not 0 < self.stretch_p <= 3:
            raise ValueError("stretch_p must lie in (0, 3]")
        self.hyperfine_freqs = tuple(float(w) for w in self.hyperfine_freqs)


def ramsey_signal(model: CoherenceModel, tau):
    """c0 * exp(-tau/t2_star) * sum_i cos(w_i * tau)."""
    tau = np.asarray(tau, dtype=float)
    beat = sum(np.cos(w * tau) for w in model.hyperfine_freqs)
    return model.c0 * np.exp(-tau / model.t2_star) * beat


def hahn_signal(model: CoherenceModel, tau):
    """c0 * exp(-(2*tau/t2)**stretch_p)."""
    tau = np.asarray(tau, dtype=float)
    return model.c0 * np.exp(-((2.0 * tau / model.t2) ** model.stretch_p))


def _initial_decay_time(tau, y):
    """First 1/e crossing of |y| relative to the first sample, as a time-scale guess."""
    y0 = abs(y[0])
    below = np.nonzero(np.abs(y) < y0 / np.e)[0]
    if below.size:
        return max(tau[below[0]], tau[1] if len(tau) > 1 else tau[0])
    return tau[-1] if tau[-1] > 0 else 1.0


def fit_coherence(samples, kind: str, hf: float = HYPERFINE):
    """Nonlinear least-squares fit of Ramsey or Hahn decay.

    samples: sequence of (tau_s, value) pairs, at least 8 spanning a decay.
    kind: "ramsey" or "hahn".
    Returns (CoherenceModel, dict of per-parameter standard errors).
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 8:
        raise ValueError("need at least 8 (tau, value) samples")
    tau, y = data[:, 0], data[:, 1]
    order = np.argsort(tau)
    tau, y = tau[order], y[order]
    if np.ptp(y) < 1e-12 * max(1.0, abs(y[0])):
        raise RankDeficiencyError("constant samples cannot constrain a decay model")

    t_guess = _initial_decay_time(tau, y)
    kind = kind.lower()
    if kind == "ramsey":
        # Parameters: c0, t2_star, w1, w2, w3 (rad/s); the hyperfine
        # triplet {0, +-2*pi*hf} seeds the oscillation frequencies.
        x0 = np.array([abs(y[0]) / 3.0, t_guess, 0.0, 2 * np.pi * hf, -2 * np.pi * hf])
        lo = [1e-12, 1e-12, -np.inf, -np.inf, -np.inf]
        hi = [np.inf] * 5

        def resid(p):
            c0, t2s, w1, w2, w3 = p
            env = c0 * np.exp(-tau / t2s)
            return env * (np.cos(w1 * tau) + np.cos(w2 * tau) + np.cos(w3 * tau)) - y

        def build(p):
            return CoherenceModel(
                c0=p[0], t2_star=p[1], t2=1.0, hyperfine_freqs=tuple(p[2:])
            )

        names = ["c0", "t2_star", "w1", "w2", "w3"]
    elif kind == "hahn":
        x0 = np.array([abs(y[0]), 2.0 * t_guess, 1.0])
        lo = [1e-12, 1e-12, 1e-6]
        hi = [np.inf, np.inf, 3.0]

        def resid(p):
            c0, t2, sp = p
            return c0 * np.exp(-((2.0 * tau / t2) ** sp)) - y

        def build(p):
            return CoherenceModel(c0=p[0], t2_star=1.0, t2=p[1], stretch_p=p[2])

        names = ["c0", "t2", "stretch_p"]
    else:
        raise ValueError(f"unknown fit kind {kind!r}")

    res = least_squares(
        resid, x0, bounds=(lo, hi), xtol=1e-8, ftol=1e-12, gtol=1e-12,
        max_nfev=200 * (len(x0) + 1),
    )
    errors = _standard_errors(res, names)
    model = build(res.x)
    if not res.success:
        raise ConvergenceError(
            f"{kind} fit did not converge: {res.message}",
            best_model=model, best_errors=errors,
        )
    return model, errors


def _standard_errors(res, names):
    n, p = res.jac.shape
    dof = max(n - p, 1)
    sigma2 = 2.0 * res.cost / dof
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * sigma2
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        # Degenerate directions (e.g. the +-w cosine symmetry) get pseudo-inverse errors.
        cov = np.linalg.pinv(res.jac.T @ res.jac) * sigma2
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return dict(zip(names, se))
