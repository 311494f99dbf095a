import json
import math

import numpy as np
import pytest

from nlwqed.cli import _coerce_pi, load_config, main
from nlwqed.errors import ConfigError

BANDS_CFG = """
[lattice]
n_sites = 64
nonlinearity = 6.0

[bands]
points = 41
"""

SOLVE_CFG = """
[lattice]
n_sites = 512
nonlinearity = 6.0

[emitter]
detuning = -6.633
couplings = [
  {site = 255, strength = 0.31, phase = "0.1164pi"},
  {site = 256, strength = 0.31, phase = 0.0},
  {site = 257, strength = 0.31, phase = "-0.1164pi"},
]

[solve]
k0 = "0.5pi"
cutoff = 3
"""

EVOLVE_CFG = """
[lattice]
n_sites = 160
nonlinearity = 6.0

[packet]
kind = "gaussian"
center_momentum = "0.5pi"
width = 0.025
center_position = 40.0
clearance_factor = 1.7

[[emitters]]
detuning = -6.633
couplings = [{site = 78, strength = 0.4}]

[evolution]
total_time = 44.0
snapshots = 4
"""


class TestPiLiterals:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("0.05pi", 0.05 * math.pi),
            ("-0.5pi", -0.5 * math.pi),
            ("pi", math.pi),
            ("-pi", -math.pi),
            ("1e-2pi", 0.01 * math.pi),
        ],
    )
    def test_coercion(self, text, value):
        assert _coerce_pi(text) == pytest.approx(value)

    def test_non_literal_untouched(self):
        assert _coerce_pi("gaussian") == "gaussian"
        assert _coerce_pi(0.3) == 0.3


class TestConfigLoading:
    def test_unknown_key_fatal(self, tmp_path):
        cfg = tmp_path / "bad.toml"
        cfg.write_text(BANDS_CFG + "\nmystery = 1\n")
        with pytest.raises(ConfigError, match="mystery"):
            load_config(str(cfg), [], "bands")

    def test_unknown_nested_key_fatal(self, tmp_path):
        cfg = tmp_path / "bad.toml"
        cfg.write_text(BANDS_CFG.replace("points = 41", "points = 41\nwhat = 2"))
        with pytest.raises(ConfigError, match="bands.what"):
            load_config(str(cfg), [], "bands")

    def test_override_applied_after_file(self, tmp_path):
        cfg = tmp_path / "ok.toml"
        cfg.write_text(BANDS_CFG)
        loaded = load_config(str(cfg), ["bands.points=21", "lattice.hopping=2.0"], "bands")
        assert loaded["bands"]["points"] == 21
        assert loaded["lattice"]["hopping"] == 2.0

    def test_override_pi_literal(self, tmp_path):
        cfg = tmp_path / "ok.toml"
        cfg.write_text(SOLVE_CFG)
        loaded = load_config(str(cfg), ["solve.k0=0.4pi"], "solve")
        assert loaded["solve"]["k0"] == pytest.approx(0.4 * math.pi)

    def test_toml_error_carries_position(self, tmp_path):
        cfg = tmp_path / "broken.toml"
        cfg.write_text("[lattice\nn_sites = 4\n")
        with pytest.raises(ConfigError, match="line"):
            load_config(str(cfg), [], "bands")


class TestExitCodes:
    def test_bands_success(self, tmp_path):
        cfg = tmp_path / "bands.toml"
        cfg.write_text(BANDS_CFG)
        out = tmp_path / "out"
        assert main(["bands", "--config", str(cfg), "--outdir", str(out)]) == 0
        assert (out / "band_single_photon.csv").exists()
        assert (out / "band_doublon.csv").exists()
        assert (out / "bands.png").exists()
        header = (out / "band_doublon.csv").read_text().splitlines()[0]
        assert header == "momentum,energy,group_velocity"

    def test_config_error_is_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bands.toml"
        cfg.write_text(BANDS_CFG + "\nnope = true\n")
        assert main(["bands", "--config", str(cfg), "--outdir", str(tmp_path / "o")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_physics_error_is_exit_3_with_name(self, tmp_path, capsys):
        cfg = tmp_path / "solve.toml"
        cfg.write_text(SOLVE_CFG)
        code = main([
            "solve", "--config", str(cfg), "--outdir", str(tmp_path / "o"),
            "--set", "emitter.detuning=-25.0",
        ])
        assert code == 3
        assert capsys.readouterr().err.strip().splitlines()[-1] == "OffResonant"


class TestSolveCommand:
    def test_solve_payload(self, tmp_path):
        cfg = tmp_path / "solve.toml"
        cfg.write_text(SOLVE_CFG)
        out = tmp_path / "run"
        assert main(["solve", "--config", str(cfg), "--outdir", str(out)]) == 0
        payload = json.loads((out / "solve.json").read_text())
        assert {"kernel", "real_space", "momentum_space"} <= set(payload)
        rs, ms = payload["real_space"], payload["momentum_space"]
        assert abs(rs["flux_residual"]) < 1e-10
        assert rs["transmission"] == pytest.approx(ms["transmission"], abs=1e-9)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "solve"
        assert manifest["resolved_config"]["solve"]["k0"] == pytest.approx(math.pi / 2)


class TestSweepCommand:
    def test_small_atom_sweep(self, tmp_path):
        cfg = tmp_path / "sweep.toml"
        cfg.write_text(
            """
[lattice]
n_sites = 512
nonlinearity = 6.0

[sweep]
template = "small_atom"
detuning = -6.633
center = 256
[sweep.g]
min = 0.1
max = 0.5
count = 5
"""
        )
        out = tmp_path / "run"
        assert main(["sweep", "--config", str(cfg), "--outdir", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 6
        assert (out / "sweep.png").exists()


class TestEvolveAndReplay:
    def test_evolve_outputs_and_replay_identical(self, tmp_path):
        cfg = tmp_path / "evolve.toml"
        cfg.write_text(EVOLVE_CFG)
        out = tmp_path / "run"
        assert main(["evolve", "--config", str(cfg), "--outdir", str(out)]) == 0
        pops = (out / "populations.csv").read_bytes()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["extra"]["kinematics"]["single_speed_target"] == pytest.approx(2.0)
        out2 = tmp_path / "replayed"
        assert main(["--replay", str(out / "manifest.json"), "evolve", "--outdir", str(out2)]) == 0
        assert (out2 / "populations.csv").read_bytes() == pops

    def test_manifest_echoes_every_parameter(self, tmp_path):
        cfg = tmp_path / "evolve.toml"
        cfg.write_text(EVOLVE_CFG)
        out = tmp_path / "run"
        main(["evolve", "--config", str(cfg), "--outdir", str(out),
              "--set", "evolution.total_time=36.0"])
        manifest = json.loads((out / "manifest.json").read_text())
        resolved = manifest["resolved_config"]
        assert resolved["evolution"]["total_time"] == 36.0
        assert resolved["packet"]["width"] == 0.025
        assert resolved["emitters"][0]["detuning"] == -6.633


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
