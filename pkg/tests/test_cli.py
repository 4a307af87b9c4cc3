import json

import pandas as pd
import pytest

from app.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, SCENARIO_RUNNERS, build_parser, main


@pytest.fixture
def config_file(tmp_path, config_text):
    path = tmp_path / "experiment.yaml"
    path.write_text(config_text)
    return path


class TestParser:
    def test_help(self):
        assert main(["--help"]) == EXIT_OK

    def test_unknown_scenario(self):
        assert main(["resonate"]) == EXIT_USAGE

    def test_every_scenario_is_registered(self):
        assert set(SCENARIO_RUNNERS) == {
            "simulate", "validate", "converge", "energy", "hbm", "harmonics", "impedance", "nonreciprocity",
            "boundedness",
        }
        args = build_parser().parse_args(["energy", "--fm", "30", "--nx", "800"])
        assert (args.scenario, args.fm, args.nx, args.config) == ("energy", 30.0, 800, None)


class TestMain:
    def test_simulate_writes_outputs(self, tmp_path, config_file):
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
        snapshot = pd.read_csv(out / "snapshot.csv")
        assert list(snapshot.columns) == ["x", "v", "sigma"]
        assert len(snapshot) == 400
        assert list(pd.read_csv(out / "receivers.csv").columns) == ["t", "v_100", "v_300"]
        assert (out / "energy.csv").is_file() and (out / "plot_simulate.py").is_file()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seedless"] is False

    def test_invalid_config(self, tmp_path, config_text):
        path = tmp_path / "bad.yaml"
        path.write_text(config_text.replace("zeta: 0.95", "zeta: 1.5"))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_USAGE

    def test_missing_config(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "absent.yaml")]) == EXIT_USAGE

    def test_invalid_override(self, tmp_path, config_file):
        assert main(["simulate", "--config", str(config_file), "--nx", "3", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_failed_check_still_writes_outputs(self, tmp_path, config_text):
        path = tmp_path / "hbm.yaml"
        path.write_text(config_text + "checks:\n  static_tolerance: -1.0\n")
        out = tmp_path / "out"
        assert main(["hbm", "--config", str(path), "--out", str(out)]) == EXIT_FAILED
        assert (out / "spectrum.csv").is_file()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["passed"] is False


class TestEnvelopeCheck:
    @staticmethod
    def _dissipation_only(tmp_path, config_text, extra=""):
        interface = "  K0: 2.45e9\n  M0: 2.0e4\n  eps_C: 0.75\n  eps_M: 0.75\n  f_m: 100.0\n"
        text = config_text.replace(interface, "  QC0: 2.0e-7\n  eps_QC: 0.9\n  f_m: 100.0\n")
        path = tmp_path / "dissipation.yaml"
        path.write_text(text.replace("t_end: 0.005", "t_end: 0.03") + extra)
        return path

    @staticmethod
    def _envelope(out):
        summary = json.loads((out / "summary.json").read_text())
        return summary, next(check for check in summary["checks"] if check["name"] == "envelope")

    def test_reference_stays_inside_the_envelopes(self, tmp_path, config_text):
        out = tmp_path / "out"
        code = main(["validate", "--config", str(self._dissipation_only(tmp_path, config_text)), "--out", str(out)])
        summary, envelope = self._envelope(out)
        assert envelope["passed"] is True
        assert summary["details"]["reference"] == "Q"
        # nx = 400 is too coarse for the 1e-4 error threshold, which alone decides the exit code
        relative = next(check for check in summary["checks"] if check["name"] == "relative_error")
        assert code == (EXIT_OK if relative["passed"] else EXIT_FAILED)
        assert {"v_lower", "v_upper"} <= set(pd.read_csv(out / "snapshot.csv").columns)

    def test_violated_envelope_fails_the_run(self, tmp_path, config_text):
        path = self._dissipation_only(tmp_path, config_text, "checks:\n  envelope_tolerance: -1.0\n")
        out = tmp_path / "out"
        assert main(["validate", "--config", str(path), "--out", str(out)]) == EXIT_FAILED
        summary, envelope = self._envelope(out)
        assert envelope["passed"] is False
        assert summary["passed"] is False
