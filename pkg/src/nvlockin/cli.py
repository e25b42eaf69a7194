"""Command-line surface: reproducible experiment runs and artifact emitters."""
from __future__ import annotations

from pathlib import Path

import click
import numpy as np

from . import __version__
from .acquisition import collect_frames
from .coherence import fit_coherence
from .demod import alpha_map as _alpha_map
from .demod import demodulate
from .io import load_scenario, read_csv, read_frames, write_csv, write_frames
from .scenario import (
    format_fit_report,
    positions_rows,
    run_scenario,
    sensitivity_outputs,
    sweep_curve,
    _write_hist_csv,
    _write_map_csv,
)
from .sensitivity import default_roi
from .transient import delay_estimate, run_transient_experiment


@click.group()
@click.version_option(version=__version__, prog_name="nvlockin")
def main():
    """Lock-in camera magnetometry simulator and analysis toolkit."""


@main.group()
def odmr():
    """Resonance positions and swept spectra."""


@odmr.command("sweep")
@click.option("--config", "config_path", required=True, help="Scenario config (TOML).")
@click.option("--scheme", type=click.Choice(["sr", "sr-hf", "dr-hf"]), default="sr-hf")
@click.option("--span", type=float, default=16.0e6, help="Sweep span, Hz.")
@click.option("--points", type=int, default=801)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def odmr_sweep(config_path, scheme, span, points, out_path):
    """Emit CSV (omega_hz, fluorescence) for a swept drive."""
    scn = load_scenario(config_path)
    center = scn.models[0].omega0
    omega = center + np.linspace(-span / 2.0, span / 2.0, points)
    flu = sweep_curve(scn, scheme, omega)
    write_csv(out_path, ["omega_hz", "fluorescence"], zip(omega, flu))
    click.echo(f"wrote {out_path} ({points} points, scheme {scheme})")


@odmr.command("positions")
@click.option("--config", "config_path", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def odmr_positions(config_path, out_path):
    """Emit CSV (axis_index, f1_hz, f2_hz) for the four axes."""
    scn = load_scenario(config_path)
    write_csv(out_path, ["axis_index", "f1_hz", "f2_hz"], positions_rows(scn))
    click.echo(f"wrote {out_path}")


@main.group()
def coherence():
    """Decay-curve fitting."""


@coherence.command("fit")
@click.option("--kind", type=click.Choice(["ramsey", "hahn"]), required=True)
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def coherence_fit(kind, in_path, out_path):
    """Fit a (tau_s, signal) CSV; print a parameter report."""
    _, data = read_csv(in_path)
    model, errors = fit_coherence(data[:, :2], kind)
    report = format_fit_report(kind, model, errors)
    if out_path:
        Path(out_path).write_text(report)
    click.echo(report, nl=False)


@main.group()
def acquire():
    """Frame simulation."""


@acquire.command("simulate")
@click.option("--config", "config_path", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--frames", "n_frames", type=int, default=None, help="Override frame count.")
@click.option("--seed", type=int, default=None, help="Override scenario seed.")
def acquire_simulate(config_path, out_path, n_frames, seed):
    """Simulate lock-in frames and write an NVLF stack."""
    scn = load_scenario(config_path)
    if seed is not None:
        from dataclasses import replace

        scn = replace(scn, seed=seed, protocol=replace(scn.protocol, seed=seed))
    n = n_frames if n_frames is not None else max(scn.n_frames, 1)
    stack = collect_frames(scn.protocol, scn.models, n_frames=n)
    write_frames(out_path, stack)
    click.echo(f"wrote {out_path} ({n} frames of {scn.protocol.height}x{scn.protocol.width})")


@main.command("demod")
@click.option("--mode", type=click.Choice(["field", "temperature"]), default="field")
@click.option("--frames", "frames_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", "alpha_config", required=True,
              help="Scenario config supplying the calibration (protocol + lineshapes).")
@click.option("--frame", "frame_index", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def demod_cmd(mode, frames_path, alpha_config, frame_index, out_path):
    """Demodulate one frame of an NVLF stack to a per-pixel map CSV (x, y, value)."""
    scn = load_scenario(alpha_config)
    stack = read_frames(frames_path)
    amap = _alpha_map(scn.protocol, scn.models, mode)
    value = demodulate(stack.i[frame_index], amap, mode)
    h, w = value.shape
    rows = [(x, y, value[y, x]) for y in range(h) for x in range(w)]
    write_csv(out_path, ["x", "y", "value"], rows)
    unit = "tesla" if mode == "field" else "Hz"
    click.echo(f"wrote {out_path} (frame {frame_index}, {unit})")


@main.group()
def sensitivity():
    """Sensitivity maps and statistics."""


@sensitivity.command("map")
@click.option("--frames", "frames_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True,
              help="Scenario config supplying calibration and geometry.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--hist", "hist_path", required=True, type=click.Path(dir_okay=False))
def sensitivity_map_cmd(frames_path, config_path, out_path, hist_path):
    """Per-pixel eta / eta_V map CSV plus ROI histogram CSV from an NVLF stack."""
    scn = load_scenario(config_path)
    stack = read_frames(frames_path)
    smap, mean_eta, mean_eta_v, counts, edges = sensitivity_outputs(stack, scn)
    _write_map_csv(out_path, smap)
    _write_hist_csv(hist_path, counts, edges)
    click.echo(
        f"wrote {out_path}, {hist_path}; ROI mean eta = {mean_eta * 1e9:.3g} nT/rtHz, "
        f"eta_V = {mean_eta_v * 1e18:.3g} nT um^1.5/rtHz"
    )


@main.group()
def transient():
    """Pulsed-field experiments."""


@transient.command("run")
@click.option("--config", "config_path", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None)
def transient_run(config_path, out_path, seed):
    """Run the pulsed LR-circuit experiment; write the reconstruction trace CSV."""
    scn = load_scenario(config_path)
    if scn.circuit is None or scn.pulse is None:
        raise click.UsageError("config lacks a [transient] section")
    protocol = scn.protocol
    if seed is not None:
        from dataclasses import replace

        protocol = replace(protocol, seed=seed)
    trace = run_transient_experiment(
        scn.circuit, scn.pulse, protocol, scn.models,
        n_frames=scn.n_frames or None, dt=scn.ode_dt,
    )
    write_csv(
        out_path,
        ["t_s", "voltage_V", "true_current_A", "true_field_T", "reconstructed_field_T"],
        zip(trace.times, trace.voltage, trace.current, trace.true_field,
            trace.reconstructed_field),
    )
    delay = delay_estimate(trace, max_lag=scn.pulse.period / 2.0)
    click.echo(f"wrote {out_path}; delay estimate {delay * 1e3:.3f} ms, "
               f"noise {trace.noise_std * 1e6:.3f} uT")


@main.group()
def scenario():
    """Whole-experiment runs with manifests."""


@scenario.command("run")
@click.option("--config", "config_path", required=True)
@click.option("--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None)
def scenario_run(config_path, outdir, seed):
    """Execute a scenario end to end; write artifacts and run_manifest.json."""
    scn = load_scenario(config_path)
    summary = run_scenario(scn, outdir, seed=seed)
    for key, value in summary.items():
        if key != "outputs":
            click.echo(f"{key}: {value}")
    for name, path in summary["outputs"].items():
        click.echo(f"output {name}: {path}")
