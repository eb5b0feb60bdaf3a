"""End-to-end command-line behavior: configs, CSV output and exit codes.

Everything runs in-process through main(argv), so exit codes and stderr
messages are asserted directly.
"""

import csv
import json

import numpy as np
import pytest

from phonoscat.cli import ENV_MATERIALS, load_run_config, main
from phonoscat.materials import default_materials, save_materials

SMALL_QUAD = {"n_theta": 16, "n_phi": 32}

XCUT = {"matrix": [[0, 0, -1], [0, 1, 0], [1, 0, 0]]}


def base_config(**overrides):
    cfg = {
        "scenario": "rayleigh",
        "substrate": "sapphire_iso",
        "mode": {"frequency_GHz": 10.0, "mode_volume_um3": 8000.0, "field_direction": [0, 1, 0]},
        "inclusions": [
            {
                "material": "lithium_niobate",
                "dimensions_um": [0.01, 0.01, 0.01],
                "orientation": XCUT,
            }
        ],
        "sweep": {"axis": "frequency_GHz", "grid": "log", "start": 1.0, "stop": 10.0, "count": 5},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(tmp_path, cfg, *extra, name="run.json"):
    out = tmp_path / "out.csv"
    code = main(["run", write_config(tmp_path, cfg, name), "--out", str(out)] + list(extra))
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestRunRayleigh:
    def test_csv_schema_and_report(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, base_config())
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["f_GHz", "Gamma_rad_s", "Q", "regime"]
        assert len(rows) == 5
        assert rows[0][0] == "1.0"
        assert all(r[3] in ("rayleigh", "mie") for r in rows)
        qs = np.array([float(r[2]) for r in rows])
        assert np.all(qs > 0)
        captured = capsys.readouterr()
        assert "fitted log-log slope of Q vs frequency_GHz" in captured.out
        assert "derived material constant" in captured.out

    def test_frequency_slope_is_minus_three(self, tmp_path):
        code, out = run_cli(tmp_path, base_config())
        assert code == 0
        _, rows = read_csv(out)
        x = np.log([float(r[0]) for r in rows])
        y = np.log([float(r[2]) for r in rows])
        assert np.polyfit(x, y, 1)[0] == pytest.approx(-3.0, abs=0.01)

    def test_default_output_name(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["run", write_config(tmp_path, base_config())])
        assert code == 0
        assert (tmp_path / "phonoscat_rayleigh.csv").exists()


class TestRunMie:
    def _cfg(self, **kw):
        kw.setdefault("quadrature", dict(SMALL_QUAD))
        return base_config(scenario="mie", **kw)

    def test_runs_and_reports_quadrature(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, self._cfg())
        assert code == 0
        assert "quadrature: up to" in capsys.readouterr().out

    def test_byte_identical_repeats(self, tmp_path):
        cfg = self._cfg()
        _, out1 = run_cli(tmp_path, cfg)
        data1 = out1.read_bytes()
        _, out2 = run_cli(tmp_path, cfg)
        assert out2.read_bytes() == data1

    def test_threads_do_not_change_bytes(self, tmp_path):
        cfg = self._cfg()
        cfg["inclusions"][0]["dimensions_um"] = [0.5, 1.0, 5.0]
        cfg["sweep"] = {"axis": "frequency_GHz", "grid": "log", "start": 5.0, "stop": 10.0, "count": 2}
        _, out1 = run_cli(tmp_path, cfg)
        serial = out1.read_bytes()
        code = main(["run", write_config(tmp_path, cfg), "--out", str(tmp_path / "t.csv"), "--threads", "4"])
        assert code == 0
        assert (tmp_path / "t.csv").read_bytes() == serial

    def test_quad_flag_overrides_config(self, tmp_path):
        cfg = self._cfg(quadrature={"n_theta": 8, "n_phi": 16})
        ref = self._cfg(quadrature={"n_theta": 24, "n_phi": 48})
        _, out_ref = run_cli(tmp_path, ref, name="ref.json")
        code = main(
            ["run", write_config(tmp_path, cfg), "--out", str(tmp_path / "q.csv"), "--quad", "24x48"]
        )
        assert code == 0
        assert (tmp_path / "q.csv").read_bytes() == out_ref.read_bytes()

    def test_anisotropic_substrate_allowed(self, tmp_path):
        cfg = self._cfg(substrate="sapphire")
        cfg["sweep"]["count"] = 2
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        _, rows = read_csv(out)
        assert len(rows) == 2


class TestRunOtherScenarios:
    def test_dual_waveguide(self, tmp_path, capsys):
        cfg = base_config(
            scenario="dual_waveguide",
            quadrature=dict(SMALL_QUAD),
            dual={"direction": [1, 0, 0], "relative_sign": -1},
        )
        cfg["inclusions"][0]["dimensions_um"] = [0.0063917, 0.02, 0.02]
        cfg["sweep"] = {"axis": "separation_um", "grid": "log", "start": 0.0063917, "stop": 0.03, "count": 4}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["separation_um", "Gamma_pair_rad_s", "suppression_ratio", "Q_pair", "q_gain"]
        ratios = [float(r[2]) for r in rows]
        assert all(0 < x < 2 for x in ratios)
        assert ratios == sorted(ratios)  # monotone growth with separation here
        assert "suppression ratio vs separation_um" in capsys.readouterr().out

    def test_bragg(self, tmp_path, capsys):
        cfg = base_config(
            scenario="bragg",
            quadrature=dict(SMALL_QUAD),
            bragg={"low": "silicon", "high": "sapphire", "center_frequency_GHz": 11.0},
        )
        cfg["mode"]["frequency_GHz"] = 11.0
        cfg["inclusions"][0]["dimensions_um"] = [0.5, 1.0, 5.0]
        cfg["sweep"] = {"axis": "n_periods", "grid": "linear", "start": 0, "stop": 6, "count": 7}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["n_periods", "reflectance", "transmittance", "Gamma_rad_s", "Q", "q_gain"]
        trans = [float(r[2]) for r in rows]
        assert trans[0] == 1.0
        assert all(b < a for a, b in zip(trans, trans[1:]))
        for r in rows:
            assert float(r[1]) + float(r[2]) == pytest.approx(1.0, abs=1e-12)
        assert float(rows[-1][5]) >= 10.0
        assert "unmitigated Q" in capsys.readouterr().out

    def test_figure_of_merit(self, tmp_path, capsys):
        cfg = base_config(
            scenario="figure_of_merit",
            quadrature=dict(SMALL_QUAD),
            eo={"g0_Hz": 2000.0, "v_ref_um3": 8000.0, "overlap": 1.0},
        )
        cfg["inclusions"][0]["dimensions_um"] = [0.5, 1.0, 5.0]
        cfg["sweep"] = {"axis": "height_um", "grid": "log", "start": 0.4, "stop": 1.0, "count": 3}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["h_um", "Gamma_rad_s", "Q", "g_mo_Hz", "eta_Hz2"]
        assert "peak figure of merit" in capsys.readouterr().out
        # eta = (g/2pi)^2 Q consistency inside each row
        for r in rows:
            assert float(r[4]) == pytest.approx(float(r[3]) ** 2 * float(r[2]), rel=1e-12)

    def test_orientation(self, tmp_path):
        cfg = base_config(scenario="orientation", quadrature=dict(SMALL_QUAD))
        cfg["inclusions"][0]["dimensions_um"] = [0.5, 1.0, 5.0]
        cfg["sweep"] = {"axis": "angle_deg", "grid": "linear", "start": 0.0, "stop": 180.0, "count": 5}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["angle_deg", "G", "Gamma_rad_s", "Q"]
        # 0 and 180 degrees coincide by tensor parity.
        assert float(rows[-1][2]) == pytest.approx(float(rows[0][2]), rel=1e-10)

    def test_oracle_check(self, tmp_path, capsys):
        cfg = base_config(scenario="oracle_check", quadrature=dict(SMALL_QUAD))
        cfg["sweep"] = {"axis": "frequency_GHz", "grid": "log", "start": 1.0, "stop": 1.0, "count": 1}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0
        _, rows = read_csv(out)
        assert float(rows[0][3]) < 0.02
        assert "within threshold" in capsys.readouterr().out


class TestConfigErrors:
    def check(self, tmp_path, capsys, cfg, needle):
        code, _ = run_cli(tmp_path, cfg)
        err = capsys.readouterr().err
        assert code == 2
        assert needle in err
        assert err.startswith("config error:")

    def test_negative_dimension_names_field(self, tmp_path, capsys):
        cfg = base_config()
        cfg["inclusions"][0]["dimensions_um"] = [0.01, -0.01, 0.01]
        self.check(tmp_path, capsys, cfg, "inclusions[0].dimensions_um: components must be positive")

    def test_unknown_top_level_key(self, tmp_path, capsys):
        self.check(tmp_path, capsys, base_config(tolerance=1e-3), "unknown field")

    def test_unknown_scenario(self, tmp_path, capsys):
        self.check(tmp_path, capsys, base_config(scenario="exact"), "scenario")

    def test_axis_not_valid_for_scenario(self, tmp_path, capsys):
        cfg = base_config()
        cfg["sweep"]["axis"] = "separation_um"
        self.check(tmp_path, capsys, cfg, "not valid for scenario")

    def test_unknown_material(self, tmp_path, capsys):
        cfg = base_config()
        cfg["inclusions"][0]["material"] = "quartz"
        self.check(tmp_path, capsys, cfg, "unknown material 'quartz'")

    def test_rayleigh_needs_isotropic_substrate(self, tmp_path, capsys):
        self.check(tmp_path, capsys, base_config(substrate="sapphire"), "isotropic")

    def test_rayleigh_needs_single_inclusion(self, tmp_path, capsys):
        cfg = base_config()
        cfg["inclusions"] = cfg["inclusions"] * 2
        self.check(tmp_path, capsys, cfg, "exactly one inclusion")

    def test_figure_of_merit_needs_eo(self, tmp_path, capsys):
        cfg = base_config(scenario="figure_of_merit")
        cfg["sweep"]["axis"] = "height_um"
        cfg["sweep"]["start"] = cfg["sweep"]["stop"] = 0.5
        cfg["sweep"]["count"] = 1
        self.check(tmp_path, capsys, cfg, "eo: required")

    def test_fractional_n_periods_grid(self, tmp_path, capsys):
        cfg = base_config(
            scenario="bragg",
            bragg={"low": "silicon", "high": "sapphire"},
        )
        cfg["sweep"] = {"axis": "n_periods", "grid": "linear", "start": 0, "stop": 5, "count": 3}
        self.check(tmp_path, capsys, cfg, "integers")

    def test_overlapping_dual_separation(self, tmp_path, capsys):
        cfg = base_config(scenario="dual_waveguide", quadrature=dict(SMALL_QUAD))
        cfg["inclusions"][0]["dimensions_um"] = [0.02, 0.02, 0.02]
        cfg["sweep"] = {"axis": "separation_um", "grid": "linear", "start": 0.001, "stop": 0.001, "count": 1}
        self.check(tmp_path, capsys, cfg, "overlap")

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "absent.json")])
        assert code == 2
        assert "no such config file" in capsys.readouterr().err

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"scenario": }')
        code = main(["run", str(path)])
        assert code == 2
        assert "line 1" in capsys.readouterr().err

    def test_bad_quad_flag(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["run", write_config(tmp_path, base_config()), "--quad", "64"])

    def test_bad_threads_flag(self, tmp_path, capsys):
        code = main(["run", write_config(tmp_path, base_config()), "--threads", "0"])
        assert code == 2
        assert "--threads" in capsys.readouterr().err

    def test_orientation_rejects_both_forms(self, tmp_path, capsys):
        cfg = base_config()
        cfg["inclusions"][0]["orientation"] = {
            "matrix": XCUT["matrix"],
            "axis": [0, 0, 1],
            "angle_deg": 10.0,
        }
        self.check(tmp_path, capsys, cfg, "not both")

    def test_orientation_rejects_improper_matrix(self, tmp_path, capsys):
        cfg = base_config()
        cfg["inclusions"][0]["orientation"] = {"matrix": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}
        self.check(tmp_path, capsys, cfg, "orientation")


class TestNumericFailure:
    def test_nonconvergent_quadrature_exits_3(self, tmp_path, capsys):
        cfg = base_config(
            scenario="mie",
            quadrature={"n_theta": 2, "n_phi": 4, "tolerance": 1e-12},
        )
        cfg["inclusions"][0]["dimensions_um"] = [30.0, 30.0, 0.001]
        cfg["sweep"] = {"axis": "frequency_GHz", "grid": "log", "start": 10.0, "stop": 10.0, "count": 1}
        code, _ = run_cli(tmp_path, cfg)
        err = capsys.readouterr().err
        assert code == 3
        assert err.startswith("numeric failure:")
        assert "did not reach tolerance" in err


class TestMaterialsEnvAndValidate:
    def test_env_var_supplies_database(self, tmp_path, monkeypatch):
        db = default_materials()
        renamed = {"custom_ln": db["lithium_niobate"], "sapphire_iso": db["sapphire_iso"]}
        import dataclasses

        renamed["custom_ln"] = dataclasses.replace(db["lithium_niobate"], name="custom_ln")
        db_path = tmp_path / "custom.json"
        save_materials(renamed, db_path)
        monkeypatch.setenv(ENV_MATERIALS, str(db_path))
        cfg = base_config()
        cfg["inclusions"][0]["material"] = "custom_ln"
        code, out = run_cli(tmp_path, cfg)
        assert code == 0

    def test_config_db_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_MATERIALS, str(tmp_path / "nowhere.json"))
        db_path = tmp_path / "db.json"
        save_materials(default_materials(), db_path)
        cfg = base_config(materials_db=str(db_path))
        code, _ = run_cli(tmp_path, cfg)
        assert code == 0

    def test_env_var_missing_file(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(ENV_MATERIALS, str(tmp_path / "nowhere.json"))
        code, _ = run_cli(tmp_path, base_config())
        assert code == 2
        assert "materials_db: no such file" in capsys.readouterr().err

    def test_validate_ok(self, tmp_path, capsys):
        db_path = tmp_path / "db.json"
        save_materials(default_materials(), db_path)
        code = main(["materials", "validate", str(db_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "ok: 4 material(s) validated" in out
        assert "lithium_niobate" in out

    def test_validate_bad_record(self, tmp_path, capsys):
        bad = [{"name": "x", "rho": -5.0, "C": [0.0] * 36, "d": [0.0] * 18, "eps_r": [0.0] * 9}]
        db_path = tmp_path / "bad.json"
        db_path.write_text(json.dumps(bad))
        code = main(["materials", "validate", str(db_path)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_validate_missing_file(self, tmp_path, capsys):
        code = main(["materials", "validate", str(tmp_path / "ghost.json")])
        assert code == 2


class TestSelftestCommand:
    def test_all_checks_pass(self, capsys):
        code = main(["selftest"])
        out = capsys.readouterr().out
        assert code == 0
        assert "checks passed" in out
        assert "FAIL" not in out


class TestLoadRunConfig:
    def test_units_converted_to_si(self, tmp_path):
        cfg = load_run_config(write_config(tmp_path, base_config()))
        assert cfg.mode.omega0 == pytest.approx(2 * np.pi * 1e10)
        assert cfg.mode.mode_volume == pytest.approx(8000e-18, rel=1e-12, abs=0)
        assert cfg.inclusions[0].dimensions[0] == pytest.approx(1e-8)
        assert cfg.output == "phonoscat_rayleigh.csv"

    def test_axis_angle_orientation(self, tmp_path):
        cfg_dict = base_config()
        cfg_dict["inclusions"][0]["orientation"] = {"axis": [0, 0, 1], "angle_deg": 90.0}
        cfg = load_run_config(write_config(tmp_path, cfg_dict))
        R = cfg.inclusions[0].orientation.matrix
        assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-12)

    def test_eps_eff_defaults_to_substrate_average(self, tmp_path, db):
        cfg = load_run_config(write_config(tmp_path, base_config()))
        expect = float(np.mean(np.diag(db["sapphire_iso"].eps_r)))
        assert cfg.mode.eps_eff == pytest.approx(expect)
