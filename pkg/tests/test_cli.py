"""Tests for the command-line front end: outputs, determinism, exit codes."""

import json

import numpy as np
import pytest

from nonmarkov.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFICATION, main


def run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


class TestSimulate:
    def test_initial_row(self, tmp_path):
        code, text = run(tmp_path, "simulate", "--width-ratio", "0.1", "--t-max", "20")
        assert code == EXIT_OK
        lines = text.splitlines()
        assert lines[0] == "t,re_b,im_b,abs_b,pop_e,d_opt,d_eg,d_two,conc_psi,conc_phi"
        assert lines[1] == "0,1,0,1,1,1,1,1,1,1"

    def test_population_revives_in_non_markovian_regime(self, tmp_path):
        code, text = run(tmp_path, "simulate", "--width-ratio", "0.1", "--t-max", "25")
        rows = np.array(
            [[float(x) for x in line.split(",")] for line in text.splitlines()[1:]]
        )
        t, pop = rows[:, 0], rows[:, 4]
        after = pop[t > 8.3]
        # local maximum past the first zero: population climbs back up
        assert after.max() > 0.2
        assert t[np.argmin(pop)] < t[pop.size - 1 - np.argmax(after[::-1])]

    def test_markovian_columns_monotone(self, tmp_path):
        code, text = run(tmp_path, "simulate", "--width-ratio", "10", "--t-max", "10")
        rows = np.array(
            [[float(x) for x in line.split(",")] for line in text.splitlines()[1:]]
        )
        for col in range(3, 10):  # abs_b through conc_phi
            assert np.all(np.diff(rows[:, col]) <= 1e-15)

    def test_twelve_significant_digits(self, tmp_path):
        code, text = run(tmp_path, "simulate", "--width-ratio", "0.5", "--t-max", "5")
        cell = text.splitlines()[2].split(",")[1]
        assert len(cell.replace("-", "").replace(".", "").lstrip("0")) <= 12


class TestMeasure:
    def test_non_markovian_bundle(self, tmp_path):
        code, text = run(tmp_path, "measure", "--width-ratio", "0.1")
        assert code == EXIT_OK
        data = json.loads(text)
        assert data["regime"] == "non_markovian"
        assert data["n_single"]["total"] == pytest.approx(0.9470, abs=1e-3)
        assert data["n_eg"]["total"] == pytest.approx(0.3099, abs=1e-3)
        assert data["n_two_lower"]["total"] == pytest.approx(1.253, abs=1e-2)

    def test_markovian_bundle_zero(self, tmp_path):
        code, text = run(tmp_path, "measure", "--width-ratio", "10")
        data = json.loads(text)
        assert data["regime"] == "markovian"
        for key in ("n_single", "n_eg", "n_two_lower"):
            assert data[key]["total"] == 0.0

    def test_critical_bundle_zero(self, tmp_path):
        code, text = run(tmp_path, "measure", "--width-ratio", "2")
        data = json.loads(text)
        assert data["regime"] == "critical"
        for key in ("n_single", "n_eg", "n_two_lower"):
            assert data[key]["total"] == 0.0

    def test_horizon_error_exit_code(self, tmp_path):
        out = tmp_path / "x.json"
        code = main(["measure", "--width-ratio", "0.1", "--t-max", "30",
                     "--out", str(out)])
        assert code == 2


class TestSweep:
    def test_orderings_and_endpoint_consistency(self, tmp_path):
        code, text = run(
            tmp_path, "sweep", "--width-from", "0.1", "--width-to", "1.0", "--steps", "10"
        )
        assert code == EXIT_OK
        lines = text.splitlines()
        assert lines[0] == "width_ratio,kappa,regime,n_single,n_eg,n_two_lower"
        rows = [line.split(",") for line in lines[1:]]
        n_single = [float(r[3]) for r in rows]
        n_eg = [float(r[4]) for r in rows]
        assert all(a > b for a, b in zip(n_single, n_single[1:]))
        assert all(eg < full for eg, full in zip(n_eg, n_single))
        _, first = run(tmp_path, "measure", "--width-ratio", "0.1")
        assert json.loads(first)["n_single"]["total"] == pytest.approx(
            n_single[0], abs=1e-12
        )

    def test_jobs_do_not_change_bytes(self, tmp_path):
        args = ["sweep", "--width-from", "0.3", "--width-to", "0.9", "--steps", "4"]
        _, serial = run(tmp_path, *args, "--jobs", "1")
        _, parallel = run(tmp_path, *args, "--jobs", "3")
        assert serial == parallel

    def test_step_floor(self, tmp_path):
        code, _ = run(tmp_path, "sweep", "--width-from", "0.1", "--width-to", "1.0",
                      "--steps", "1")
        assert code == EXIT_CONFIG


class TestVerify:
    def test_clean_run(self, tmp_path):
        code, text = run(
            tmp_path, "verify", "--width-ratio", "0.1", "--t-max", "60",
            "--samples", "10000", "--seed", "42",
        )
        assert code == EXIT_OK
        data = json.loads(text)
        assert data["verification"]["violations"] == 0

    def test_injected_fault_exits_3(self, tmp_path):
        code, text = run(
            tmp_path, "verify", "--width-ratio", "0.1", "--t-max", "60",
            "--samples", "200", "--seed", "42", "--fault-scale", "0.9",
        )
        assert code == EXIT_VERIFICATION
        assert "worst_pair" in json.loads(text)["verification"]

    def test_same_seed_byte_identical(self, tmp_path):
        args = ("verify", "--width-ratio", "0.1", "--t-max", "60",
                "--samples", "500", "--seed", "11")
        _, a = run(tmp_path, *args)
        _, b = run(tmp_path, *args)
        assert a == b


class TestConfigHandling:
    def test_config_file_round_trip(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[model]\ntype = lorentzian\ngamma0 = 1.0\nwidth_ratio = 0.5\n"
            "[solver]\ndt = 0.001\n\n[run]\nseed = 42\n"
        )
        _, from_file = run(tmp_path, "measure", "--config", str(ini))
        _, from_flags = run(tmp_path, "measure", "--width-ratio", "0.5", "--dt", "0.001")
        assert json.loads(from_file)["n_single"] == json.loads(from_flags)["n_single"]

    def test_unknown_key_rejected(self, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text("[model]\nwidth_ratio = 0.5\nunknown_knob = 3\n")
        code, _ = run(tmp_path, "measure", "--config", str(ini))
        assert code == EXIT_CONFIG

    def test_unknown_section_rejected(self, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text("[mystery]\nx = 1\n")
        code, _ = run(tmp_path, "measure", "--config", str(ini))
        assert code == EXIT_CONFIG

    def test_flags_override_file(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[model]\nwidth_ratio = 10\n")
        _, text = run(tmp_path, "measure", "--config", str(ini), "--width-ratio", "0.1")
        assert json.loads(text)["regime"] == "non_markovian"

    def test_negative_width_is_config_error(self, tmp_path):
        code, _ = run(tmp_path, "measure", "--width-ratio", "-0.5")
        assert code == EXIT_CONFIG

    def test_format_mismatch_rejected(self, tmp_path):
        code, _ = run(tmp_path, "measure", "--width-ratio", "0.5", "--format", "csv")
        assert code == EXIT_CONFIG

    def test_missing_t_max_for_ohmic(self, tmp_path):
        ini = tmp_path / "ohmic.ini"
        ini.write_text(
            "[model]\ntype = ohmic\ncoupling = 0.2\nexponent = 1.0\ncutoff = 2.0\n"
            "qubit_frequency = 5.0\n"
        )
        code, _ = run(tmp_path, "measure", "--config", str(ini))
        assert code == EXIT_CONFIG


class TestEffectiveConfigRoundTrip:
    def test_rerunning_effective_config_reproduces_output(self, tmp_path):
        _, first = run(tmp_path, "measure", "--width-ratio", "0.3", "--dt", "0.002")
        eff = json.loads(first)["config"]
        ini = tmp_path / "effective.ini"
        lines = []
        for section, values in eff.items():
            lines.append(f"[{section}]")
            for key, value in values.items():
                if value is None:
                    continue
                lines.append(f"{key} = {value}")
        ini.write_text("\n".join(lines) + "\n")
        _, second = run(tmp_path, "measure", "--config", str(ini))
        assert first == second


class TestLogging:
    def test_nm_log_env_accepted(self, tmp_path):
        import os
        import subprocess
        import sys

        out = tmp_path / "m.json"
        env = dict(os.environ, NM_LOG="debug")
        proc = subprocess.run(
            [sys.executable, "-m", "nonmarkov.cli", "measure", "--width-ratio", "10",
             "--out", str(out)],
            env=env, capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(out.read_text())["regime"] == "markovian"


class TestOhmicEndToEnd:
    def test_simulate_ohmic_volterra(self, tmp_path):
        ini = tmp_path / "ohmic.ini"
        ini.write_text(
            "[model]\ntype = ohmic\ncoupling = 0.2\nexponent = 1.0\ncutoff = 2.0\n"
            "qubit_frequency = 5.0\n\n[solver]\ndt = 0.01\nt_max = 5.0\n"
        )
        code, text = run(tmp_path, "simulate", "--config", str(ini))
        assert code == EXIT_OK
        rows = text.splitlines()
        assert rows[1].startswith("0,1,0,1,")
        assert len(rows) == 502
