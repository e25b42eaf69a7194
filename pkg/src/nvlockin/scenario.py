"""Reproducible experiment runs: one seed, deterministic artifacts, a manifest.

Each experiment writes its CSV/NVLF artifacts plus run_manifest.json (seed,
package version, wall time).  Identical scenario + seed give byte-identical
artifacts; only the manifest's wall time varies.
"""
from __future__ import annotations

import json
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .acquisition import collect_frames
from .coherence import CoherenceModel, fit_coherence, hahn_signal, ramsey_signal
from .demod import PhaseConfig, alpha_map, demodulate
from .errors import ScenarioError
from .io import Scenario, write_csv, write_frames
from .odmr import dr_spectrum, spectrum
from .physics import HYPERFINE, alignment_spectrum_positions, resonance_pair
from .sensitivity import default_roi, eta_from_series, roi_statistics, volume_normalize
from .transient import delay_estimate, run_transient_experiment


def _with_seed(scn: Scenario, seed: int | None) -> Scenario:
    if seed is None:
        return scn
    return replace(scn, seed=seed, protocol=replace(scn.protocol, seed=seed))


def sensitivity_outputs(stack, scn: Scenario):
    """Demodulate a frame stack and reduce it to a sensitivity map + ROI stats."""
    amap = alpha_map(scn.protocol, scn.models, scn.phase_config)
    fields = demodulate(stack.i, amap, scn.phase_config)
    eta = eta_from_series(fields, stack.frame_duration)
    roi = default_roi(scn.protocol.width, scn.protocol.height, scn.roi_radius_frac)
    smap = volume_normalize(
        eta, scn.protocol.pixel_pitch, scn.protocol.layer_thickness, roi=roi
    )
    mean_eta, (counts, edges) = roi_statistics(smap)
    mean_eta_v = mean_eta * np.sqrt(smap.pixel_volume)
    return smap, mean_eta, mean_eta_v, counts, edges


def _write_map_csv(path, smap):
    h, w = smap.eta.shape
    rows = []
    for y in range(h):
        for x in range(w):
            rows.append(
                (x, y, smap.eta[y, x] * 1e9, smap.eta_v[y, x] * 1e18)
            )
    write_csv(path, ["x", "y", "eta_nT_per_rtHz", "etaV_nT_um15_per_rtHz"], rows)


def _write_hist_csv(path, counts, edges):
    rows = [
        (edges[i] * 1e9, edges[i + 1] * 1e9, int(counts[i]))
        for i in range(len(counts))
    ]
    write_csv(path, ["bin_lo_nT_per_rtHz", "bin_hi_nT_per_rtHz", "count"], rows)


def run_scenario(scn: Scenario, outdir, seed: int | None = None) -> dict:
    """Execute the scenario's experiment; returns a summary with artifact paths."""
    scn = _with_seed(scn, seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()
    summary: dict = {"experiment": scn.experiment, "seed": scn.seed}
    outputs: dict = {}

    if scn.experiment == "sensitivity-map":
        stack = collect_frames(scn.protocol, scn.models, n_frames=scn.n_frames)
        frames_path = outdir / "frames.nvlf"
        write_frames(frames_path, stack)
        smap, mean_eta, mean_eta_v, counts, edges = sensitivity_outputs(stack, scn)
        _write_map_csv(outdir / "map.csv", smap)
        _write_hist_csv(outdir / "hist.csv", counts, edges)
        outputs = {
            "frames": str(frames_path),
            "map": str(outdir / "map.csv"),
            "hist": str(outdir / "hist.csv"),
        }
        summary.update(
            n_frames=scn.n_frames,
            roi_mean_eta_nt_per_rthz=mean_eta * 1e9,
            roi_mean_eta_v_nt_um15_per_rthz=mean_eta_v * 1e18,
        )
    elif scn.experiment == "transient":
        if scn.circuit is None or scn.pulse is None:
            raise ScenarioError("transient experiment requires circuit and pulse configs")
        trace = run_transient_experiment(
            scn.circuit, scn.pulse, scn.protocol, scn.models,
            n_frames=scn.n_frames, dt=scn.ode_dt,
        )
        delay = delay_estimate(trace, max_lag=scn.pulse.period / 2.0)
        rows = zip(
            trace.times,
            trace.voltage,
            trace.current,
            trace.true_field,
            trace.reconstructed_field,
        )
        trace_path = outdir / "trace.csv"
        write_csv(
            trace_path,
            ["t_s", "voltage_V", "true_current_A", "true_field_T", "reconstructed_field_T"],
            rows,
        )
        outputs = {"trace": str(trace_path)}
        summary.update(
            n_frames=len(trace.times),
            delay_s=delay,
            noise_std_t=trace.noise_std,
            peak_true_field_t=float(np.max(np.abs(trace.true_field))),
        )
    elif scn.experiment == "odmr-sweep":
        sweep = scn.sweep or {}
        scheme = sweep.get("scheme", "sr-hf")
        span = float(sweep.get("span", 16.0e6))
        points = int(sweep.get("points", 801))
        pair = resonance_pair(scn.nv, int((scn.sweep or {}).get("axis", 0)))
        omega = pair.f1 + np.linspace(-span / 2.0, span / 2.0, points)
        flu = sweep_curve(scn, scheme, omega)
        sweep_path = outdir / "sweep.csv"
        write_csv(sweep_path, ["omega_hz", "fluorescence"], zip(omega, flu))
        outputs = {"sweep": str(sweep_path)}
        summary.update(scheme=scheme, points=points, min_fluorescence=float(np.min(flu)))
    elif scn.experiment == "coherence-fit":
        summary.update(_run_coherence_fit(scn, outdir, outputs))
    else:
        raise ScenarioError(f"unknown experiment {scn.experiment!r}")

    summary["outputs"] = outputs
    manifest = dict(summary)
    manifest["version"] = __version__
    manifest["wall_time_s"] = time.perf_counter() - t_start
    (outdir / "run_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return summary


def sweep_curve(scn: Scenario, scheme: str, omega):
    """Fluorescence curve for one of the swept-drive configurations.

    "sr": single-tone, one transition; "sr-hf": triple-tone, one transition;
    "dr-hf": triple-tone, both transitions swept mirror-symmetrically about
    the pair midpoint.
    """
    m1 = scn.models[0]
    if scheme == "sr":
        return spectrum(replace(m1, scheme="single"), omega)
    if scheme == "sr-hf":
        return spectrum(replace(m1, scheme="triple"), omega)
    if scheme == "dr-hf":
        if len(scn.models) < 2:
            raise ScenarioError("dr-hf sweep requires a double-resonance scenario")
        m2 = scn.models[1]
        center = 0.5 * (m1.omega0 + m2.omega0)
        return dr_spectrum(
            replace(m1, scheme="triple"), replace(m2, scheme="triple"),
            omega, mirror_center=center,
        )
    raise ScenarioError(f"unknown sweep scheme {scheme!r} (want sr|sr-hf|dr-hf)")


def positions_rows(scn: Scenario):
    """(axis_index, f1_hz, f2_hz) for the four axes."""
    pairs = alignment_spectrum_positions(scn.nv)
    return [(i, p.f1, p.f2) for i, p in enumerate(pairs)]


def _run_coherence_fit(scn: Scenario, outdir: Path, outputs: dict) -> dict:
    cfg = scn.coherence or {}
    kind = cfg.get("kind", "ramsey")
    c0 = float(cfg.get("c0", 0.01))
    noise = float(cfg.get("noise_sigma", 0.01)) * c0
    n = int(cfg.get("n_samples", 160))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(scn.seed)))
    hf = scn.models[0].hf if scn.models else HYPERFINE
    if kind == "ramsey":
        t2s = float(cfg.get("t2_star", 1.6e-6))
        tau = np.linspace(0.0, float(cfg.get("tau_max", 6.0e-6)), n)
        model = CoherenceModel(
            c0=c0, t2_star=t2s, t2=1.0,
            hyperfine_freqs=(0.0, 2 * np.pi * hf, -2 * np.pi * hf),
        )
        y = ramsey_signal(model, tau) + noise * rng.standard_normal(n)
    elif kind == "hahn":
        t2 = float(cfg.get("t2", 19.3e-6))
        p = float(cfg.get("stretch_p", 1.2))
        tau = np.linspace(0.2e-6, float(cfg.get("tau_max", 40.0e-6)), n)
        model = CoherenceModel(c0=c0, t2_star=1.0, t2=t2, stretch_p=p)
        y = hahn_signal(model, tau) + noise * rng.standard_normal(n)
    else:
        raise ScenarioError(f"unknown coherence kind {kind!r}")
    data_path = outdir / "data.csv"
    write_csv(data_path, ["tau_s", "signal"], zip(tau, y))
    fitted, errors = fit_coherence(np.column_stack([tau, y]), kind)
    report = format_fit_report(kind, fitted, errors)
    report_path = outdir / "report.txt"
    report_path.write_text(report)
    outputs["data"] = str(data_path)
    outputs["report"] = str(report_path)
    out = {"kind": kind}
    if kind == "ramsey":
        out["t2_star_s"] = fitted.t2_star
    else:
        out["t2_s"] = fitted.t2
    return out


def format_fit_report(kind: str, model: CoherenceModel, errors: dict) -> str:
    lines = [f"{kind} decay fit"]
    if kind == "ramsey":
        lines.append(f"  c0       = {model.c0:.6g} +- {errors['c0']:.3g}")
        lines.append(f"  t2_star  = {model.t2_star:.6g} +- {errors['t2_star']:.3g} s")
        for name, w in zip(("w1", "w2", "w3"), model.hyperfine_freqs):
            lines.append(
                f"  {name}       = {w:.6g} +- {errors[name]:.3g} rad/s"
                f"  ({w / (2 * np.pi):.6g} Hz)"
            )
    else:
        lines.append(f"  c0        = {model.c0:.6g} +- {errors['c0']:.3g}")
        lines.append(f"  t2        = {model.t2:.6g} +- {errors['t2']:.3g} s")
        lines.append(f"  stretch_p = {model.stretch_p:.6g} +- {errors['stretch_p']:.3g}")
    return "\n".join(lines) + "\n"
