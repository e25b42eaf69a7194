import json
import struct

import numpy as np
import pytest

from nvlockin.acquisition import FrameStack
from nvlockin.errors import ScenarioError
from nvlockin.io import (
    CONFIG_DIR_ENV,
    load_scenario,
    read_csv,
    read_frames,
    resolve_config,
    write_csv,
    write_frames,
)
from nvlockin.scenario import run_scenario


def random_stack(n=3, h=32, w=32, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    return FrameStack(
        i=rng.normal(size=(n, h, w)), q=rng.normal(size=(n, h, w)),
        f_mod=2.5e3, n_cyc=22,
    )


def test_nvlf_roundtrip_bit_identical(tmp_path):
    stack = random_stack()
    path = tmp_path / "frames.nvlf"
    write_frames(path, stack)
    back = read_frames(path)
    assert np.array_equal(stack.i, back.i)
    assert np.array_equal(stack.q, back.q)
    assert back.f_mod == 2.5e3 and back.n_cyc == 22


def test_nvlf_layout(tmp_path):
    path = tmp_path / "frames.nvlf"
    write_frames(path, random_stack())
    raw = path.read_bytes()
    # 26-byte header + 3 frames x 2 planes x 32*32 doubles
    assert len(raw) == 26 + 3 * 2 * 32 * 32 * 8 == 49178
    magic, version, w, h, n, f_mod, n_cyc = struct.unpack("<4sHHHIdI", raw[:26])
    assert magic == b"NVLF"
    assert (version, w, h, n) == (1, 32, 32, 3)
    assert f_mod == 2.5e3 and n_cyc == 22


def test_nvlf_rejects_corruption(tmp_path):
    path = tmp_path / "frames.nvlf"
    write_frames(path, random_stack())
    raw = bytearray(path.read_bytes())
    bad_magic = tmp_path / "bad_magic.nvlf"
    bad_magic.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(ValueError):
        read_frames(bad_magic)
    truncated = tmp_path / "truncated.nvlf"
    truncated.write_bytes(bytes(raw[:-8]))
    with pytest.raises(ValueError):
        read_frames(truncated)
    bad_version = tmp_path / "bad_version.nvlf"
    raw2 = bytearray(raw)
    raw2[4:6] = struct.pack("<H", 99)
    bad_version.write_bytes(bytes(raw2))
    with pytest.raises(ValueError):
        read_frames(bad_version)


def test_csv_full_precision_roundtrip(tmp_path):
    path = tmp_path / "vals.csv"
    values = [1.0 / 3.0, np.pi * 1.0e-7, -4.9406564584124654e-324, 12.8]
    write_csv(path, ["idx", "value"], [(k, v) for k, v in enumerate(values)])
    header, data = read_csv(path)
    assert header == ["idx", "value"]
    assert data[:, 1].tolist() == values  # 17 significant digits round-trip exactly
    # integers are written without a decimal point
    first_row = path.read_text().splitlines()[1]
    assert first_row.startswith("0,")


def test_resolve_config_search_order(tmp_path, monkeypatch):
    local = tmp_path / "x.cfg"
    local.write_text("[scenario]\n")
    assert resolve_config(local) == local
    cfg_dir = tmp_path / "configs"
    cfg_dir.mkdir()
    (cfg_dir / "mine.cfg").write_text("[scenario]\n")
    monkeypatch.setenv(CONFIG_DIR_ENV, str(cfg_dir))
    assert resolve_config("mine.cfg") == cfg_dir / "mine.cfg"
    monkeypatch.delenv(CONFIG_DIR_ENV)
    with pytest.raises(FileNotFoundError):
        resolve_config("no-such-config.cfg")


def test_load_bundled_wide_field_fixture():
    scn = load_scenario("fig4.cfg")
    assert scn.experiment == "sensitivity-map"
    assert scn.protocol.f_mod == 2.5e3
    assert scn.protocol.n_cyc == 22
    assert scn.n_frames == 110
    assert (scn.protocol.width, scn.protocol.height) == (85, 85)
    assert len(scn.models) == 2
    assert scn.protocol.beam_fwhm is not None


def test_load_bundled_pulsed_fixture():
    scn = load_scenario("fig5.cfg")
    assert scn.experiment == "transient"
    assert scn.protocol.frame_rate == 2500.0
    assert scn.n_frames == 200
    assert scn.circuit is not None and scn.pulse is not None
    assert scn.circuit.tau == pytest.approx(0.9e-3, rel=1e-12)
    assert scn.pulse.period == 1.0e-2
    assert scn.pulse.polarity_flip_window == 2.0e-3


def test_load_empty_file_is_parse_error(tmp_path):
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    with pytest.raises(ScenarioError, match="parse error"):
        load_scenario(empty)


def test_load_malformed_toml(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario\nexperiment=")
    with pytest.raises(ScenarioError, match="parse error"):
        load_scenario(bad)


def test_unknown_experiment_rejected(tmp_path):
    cfg = tmp_path / "weird.cfg"
    cfg.write_text('[scenario]\nexperiment = "levitation"\n')
    with pytest.raises(ScenarioError, match="experiment"):
        load_scenario(cfg)


def test_far_detuned_drive_rejected(tmp_path):
    cfg = tmp_path / "detuned.cfg"
    cfg.write_text(
        '[scenario]\nexperiment = "odmr-sweep"\n\n'
        "[odmr]\nlinewidth = 1.0e6\ndrive_f1 = 2.6e9\n"
    )
    with pytest.raises(ScenarioError, match="linewidth"):
        load_scenario(cfg)


def test_zero_frames_rejected(tmp_path):
    cfg = tmp_path / "zero.cfg"
    cfg.write_text(
        '[scenario]\nexperiment = "sensitivity-map"\nn_frames = 0\n'
    )
    with pytest.raises(ScenarioError, match="n_frames"):
        load_scenario(cfg)


def test_run_scenario_sweep_artifacts(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        '[scenario]\nexperiment = "odmr-sweep"\nseed = 4\n\n'
        "[sweep]\nscheme = \"sr-hf\"\nspan = 8.0e6\npoints = 101\n"
    )
    summary = run_scenario(load_scenario(cfg), tmp_path / "out")
    assert summary["seed"] == 4
    assert summary["min_fluorescence"] < 1.0
    header, data = read_csv(summary["outputs"]["sweep"])
    assert header == ["omega_hz", "fluorescence"]
    assert data.shape == (101, 2)
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["experiment"] == "odmr-sweep"
    assert "version" in manifest and "wall_time_s" in manifest


def test_run_scenario_seed_override(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text('[scenario]\nexperiment = "odmr-sweep"\nseed = 4\n')
    summary = run_scenario(load_scenario(cfg), tmp_path / "out", seed=7)
    assert summary["seed"] == 7


def test_run_scenario_coherence_fit(tmp_path):
    cfg = tmp_path / "fit.cfg"
    cfg.write_text(
        '[scenario]\nexperiment = "coherence-fit"\nseed = 2\n\n'
        "[coherence]\nkind = \"ramsey\"\nt2_star = 1.6e-6\n"
    )
    summary = run_scenario(load_scenario(cfg), tmp_path / "out")
    assert summary["t2_star_s"] == pytest.approx(1.6e-6, rel=0.05)
    report = (tmp_path / "out" / "report.txt").read_text()
    assert "t2_star" in report
