"""Persistence: NVLF frame stacks, full-precision CSV, and scenario configs.

NVLF layout: magic "NVLF", version u16, width u16, height u16, n_frames u32,
f_mod f64, n_cyc u32 (little-endian, 26-byte header), then per frame the I
plane followed by the Q plane as little-endian f64, row-major.

Scenario files are TOML; unspecified keys fall back to the standard fixture
defaults (d0 = 2.87 GHz, hf = 2.16 MHz, depth = 300 kHz, pitch = 0.54 um,
thickness = 40 um).  Bare config names resolve against $NVLOCKIN_CONFIG_DIR
and then the configs bundled with the package.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .acquisition import AcquisitionProtocol, FrameStack
from .demod import PhaseConfig
from .errors import ScenarioError
from .odmr import DriveScheme, OdmrModel
from .physics import NVConfiguration, resonance_pair
from .transient import LRCircuit, PulseTrain

NVLF_MAGIC = b"NVLF"
NVLF_VERSION = 1
_HEADER = struct.Struct("<4sHHHIdI")

CONFIG_DIR_ENV = "NVLOCKIN_CONFIG_DIR"


def _atomic_write(path, data: bytes):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def write_frames(path, stack: FrameStack):
    """Persist a frame stack as NVLF (atomic write-temp-then-rename)."""
    n, h, w = stack.i.shape
    header = _HEADER.pack(NVLF_MAGIC, NVLF_VERSION, w, h, n, stack.f_mod, stack.n_cyc)
    chunks = [header]
    for f in range(n):
        chunks.append(np.ascontiguousarray(stack.i[f], dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(stack.q[f], dtype="<f8").tobytes())
    _atomic_write(path, b"".join(chunks))


def read_frames(path) -> FrameStack:
    """Load an NVLF frame stack."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated NVLF header")
    magic, version, w, h, n, f_mod, n_cyc = _HEADER.unpack_from(raw)
    if magic != NVLF_MAGIC:
        raise ValueError(f"{path}: not an NVLF file (magic {magic!r})")
    if version != NVLF_VERSION:
        raise ValueError(f"{path}: unsupported NVLF version {version}")
    plane = h * w
    need = _HEADER.size + n * 2 * plane * 8
    if len(raw) != need:
        raise ValueError(f"{path}: expected {need} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    data = data.reshape(n, 2, h, w)
    return FrameStack(
        i=np.ascontiguousarray(data[:, 0]),
        q=np.ascontiguousarray(data[:, 1]),
        f_mod=f_mod,
        n_cyc=n_cyc,
    )


def format_csv_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    """CSV with 17-significant-digit floats so derived checks stay bit-stable."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_csv_value(v) for v in row))
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def read_csv(path):
    """(header list, float ndarray of shape (n_rows, n_cols))."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array(
        [[float(v) for v in line.split(",")] for line in lines[1:]], dtype=float
    )
    return header, data


def resolve_config(name_or_path) -> Path:
    """Resolve a config: explicit path, $NVLOCKIN_CONFIG_DIR, bundled configs."""
    p = Path(name_or_path)
    if p.exists():
        return p
    env = os.environ.get(CONFIG_DIR_ENV)
    if env:
        cand = Path(env) / p.name
        if cand.exists():
            return cand
    bundled = resources.files("nvlockin") / "configs" / p.name
    with resources.as_file(bundled) as cand:
        if cand.exists():
            return cand
    raise FileNotFoundError(f"config {name_or_path!r} not found (cwd, ${CONFIG_DIR_ENV}, bundled)")


@dataclass
class Scenario:
    """Fully validated experiment description."""

    experiment: str
    seed: int
    nv: NVConfiguration
    models: tuple[OdmrModel, ...]
    protocol: AcquisitionProtocol
    n_frames: int
    phase_config: PhaseConfig
    roi_radius_frac: float = 0.45
    circuit: LRCircuit | None = None
    pulse: PulseTrain | None = None
    ode_dt: float = 5.0e-6
    sweep: dict | None = None
    coherence: dict | None = None


_EXPERIMENTS = {"odmr-sweep", "sensitivity-map", "transient", "coherence-fit"}


def load_scenario(path) -> Scenario:
    """Parse and validate a TOML scenario; all defaults filled from the fixtures."""
    path = resolve_config(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"{path}: parse error: {e}") from e
    if not cfg:
        raise ScenarioError(f"{path}: parse error: empty scenario file")
    try:
        return _build_scenario(cfg)
    except (ValueError, KeyError, TypeError) as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(f"{path}: invalid scenario: {e}") from e


def _build_scenario(cfg: dict) -> Scenario:
    sc = cfg.get("scenario", {})
    experiment = sc.get("experiment")
    if experiment not in _EXPERIMENTS:
        raise ScenarioError(
            f"scenario.experiment must be one of {sorted(_EXPERIMENTS)}, got {experiment!r}"
        )
    seed = int(sc.get("seed", 0))

    nv_cfg = cfg.get("nv", {})
    direction = np.asarray(nv_cfg.get("bias_direction", [0.0, 0.0, 1.0]), dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ScenarioError("nv.bias_direction must be a nonzero vector")
    magnitude = float(nv_cfg.get("bias_magnitude", 3.0e-3))
    nv = NVConfiguration(
        d0=float(nv_cfg.get("d0", 2.87e9)),
        gamma=float(nv_cfg.get("gamma", 28.0e9)),
        bias_field=direction / norm * magnitude,
    )

    od = cfg.get("odmr", {})
    axis = int(od.get("axis", 0))
    pair = resonance_pair(nv, axis)
    scheme = DriveScheme(od.get("scheme", "triple"))
    linewidth = float(od.get("linewidth", 1.0e6))
    contrast = float(od.get("contrast", 0.015))
    hf = float(od.get("hf", 2.16e6))
    resonance = od.get("resonance", "double")
    if resonance not in ("single", "double"):
        raise ScenarioError("odmr.resonance must be 'single' or 'double'")
    centers = [float(od.get("drive_f1", pair.f1))]
    if resonance == "double":
        centers.append(float(od.get("drive_f2", pair.f2)))
    for c, ref in zip(centers, (pair.f1, pair.f2)):
        if abs(c - ref) > 5.0 * linewidth:
            raise ScenarioError(
                f"drive frequency {c:.6g} Hz is more than 5 linewidths from the "
                f"resonance at {ref:.6g} Hz"
            )
    models = tuple(
        OdmrModel(omega0=c, linewidth=linewidth, contrast=contrast, hf=hf, scheme=scheme)
        for c in centers
    )

    pr = cfg.get("protocol", {})
    protocol = AcquisitionProtocol(
        f_mod=float(pr.get("f_mod", 2.5e3)),
        mod_depth=float(pr.get("mod_depth", 3.0e5)),
        n_cyc=int(pr.get("n_cyc", 22)),
        phi1=float(pr.get("phi1", 0.0)),
        phi2=float(pr.get("phi2", np.pi)),
        photon_rate=float(pr.get("photon_rate", 1.0e9)),
        width=int(pr.get("width", 1)),
        height=int(pr.get("height", 1)),
        pixel_pitch=float(pr.get("pixel_pitch", 0.54e-6)),
        layer_thickness=float(pr.get("layer_thickness", 40.0e-6)),
        beam_fwhm=(float(pr["beam_fwhm"]) if "beam_fwhm" in pr else None),
        contrast_sharing=(
            float(pr["contrast_sharing"]) if "contrast_sharing" in pr else None
        ),
        seed=seed,
    )

    n_frames = int(sc.get("n_frames", 0))
    if experiment in ("sensitivity-map", "transient") and n_frames < 1:
        raise ScenarioError("scenario.n_frames must be at least 1 for frame experiments")

    if len(models) == 2:
        dphi = abs(protocol.phi1 - protocol.phi2) % (2.0 * np.pi)
        phase_config = (
            PhaseConfig.FIELD
            if abs(dphi - np.pi) < 1e-9
            else PhaseConfig.TEMPERATURE
        )
    else:
        phase_config = PhaseConfig.FIELD

    circuit = pulse = None
    ode_dt = 5.0e-6
    if "transient" in cfg:
        tr = cfg["transient"]
        circuit = LRCircuit(
            inductance=float(tr.get("inductance", 1.8e-3)),
            resistance=float(tr.get("resistance", 2.0)),
            field_coefficient=float(tr.get("field_coefficient", 1.0)),
        )
        pulse = PulseTrain(
            amplitude=float(tr.get("amplitude", 1.0)),
            period=float(tr.get("period", 10.0e-3)),
            polarity_flip_window=float(tr.get("polarity_flip_window", 2.0e-3)),
            start_time=float(tr.get("start_time", 1.0e-3)),
            ramp_time=float(tr.get("ramp_time", 1.0e-3)),
            n_periods=int(tr.get("n_periods", 1)),
        )
        ode_dt = float(tr.get("dt", 5.0e-6))
    elif experiment == "transient":
        raise ScenarioError("transient experiment requires a [transient] section")

    roi_frac = float(cfg.get("roi", {}).get("radius_frac", 0.45))
    return Scenario(
        experiment=experiment,
        seed=seed,
        nv=nv,
        models=models,
        protocol=protocol,
        n_frames=n_frames,
        phase_config=phase_config,
        roi_radius_frac=roi_frac,
        circuit=circuit,
        pulse=pulse,
        ode_dt=ode_dt,
        sweep=cfg.get("sweep"),
        coherence=cfg.get("coherence"),
    )
