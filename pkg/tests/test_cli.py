import math
from pathlib import Path

import pytest

from cli.filters import REGIME_C, McRegimeFilter, RegimeFilter
from cli.main import build_parser, main
from cli.output import OutputDir, format_value, summary_lines
from cli.run_config import RunConfig, Subcommand, build_run_config, load_config_file
from config import Settings
from model import InvalidParameterError, Regime, UnsupportedRegimeError
from mcsim import StopReason


def read_summary(path: Path) -> dict[str, str]:
    return dict(line.split(" = ", 1) for line in path.read_text(encoding="utf-8").splitlines() if line)


def run_cli(*args: str, out: Path) -> int:
    return main([*args, "--output-dir", str(out)])


class TestSeriesCommand:
    def test_critical_s0(self, tmp_path, capsys):
        assert run_cli("series", "--mu", "1.4142135", "--beta", "1", out=tmp_path) == 0
        summary = read_summary(tmp_path / "summary.txt")
        assert float(summary["s0"]) == pytest.approx(1.3486, abs=5e-4)
        assert summary["regime"] == "C_critical"
        assert "s0 = " in capsys.readouterr().out

    def test_output_files(self, tmp_path):
        run_cli("series", "--mu", "2", out=tmp_path)
        header = (tmp_path / "coefficients.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "# n,a_n,b_n"
        manifest = read_summary(tmp_path / "manifest.txt")
        assert manifest["version"] == "0.1.0"
        assert manifest["subcommand"] == '"series"'
        assert "timestamp" in manifest
        assert not (tmp_path / "failure.txt").exists()

    def test_invalid_beta(self, tmp_path):
        assert run_cli("series", "--mu", "2", "--beta", "-1", out=tmp_path) == 2
        failure = read_summary(tmp_path / "failure.txt")
        assert failure["exit_code"] == "2"
        assert failure["error_type"] == "InvalidParameterError"

    def test_wrong_regime(self, tmp_path):
        assert run_cli("series", "--mu", "0", out=tmp_path) == 2
        failure = read_summary(tmp_path / "failure.txt")
        assert failure["error_type"] == "UnsupportedRegimeError"

    def test_unknown_flag(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli("series", "--mu", "2", "--bogus", "1", out=tmp_path)
        assert exc.value.code == 2

    def test_missing_mu(self, tmp_path):
        assert run_cli("series", out=tmp_path) == 2

    def test_config_file_overrides_flags(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("mu = 2.0\nn-max = 60\n", encoding="utf-8")
        out = tmp_path / "out"
        assert run_cli("series", "--mu", "3", "--config", str(config), out=out) == 0
        summary = read_summary(out / "summary.txt")
        assert float(summary["mu"]) == 2.0
        assert summary["n_max"] == "60"


class TestOtherCommands:
    def test_s0_curve(self, tmp_path):
        assert run_cli("s0-curve", "--ratios", "1.5", "2", "3", out=tmp_path) == 0
        summary = read_summary(tmp_path / "summary.txt")
        assert summary["s0_increasing"] == "true"
        assert float(summary["psi0(-3)"]) == pytest.approx(-0.8528, abs=5e-4)
        lines = (tmp_path / "s0_curve.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# ratio,p,s0,p_s0,c_fit"
        assert len(lines) == 4

    def test_pde_relaxation(self, tmp_path):
        code = run_cli(
            "pde", "--mu", "2", "--horizon", "2", "--dx", "0.05", "--snapshot-times", "1", out=tmp_path
        )
        assert code == 0
        for name in ("relaxation.csv", "snapshot_t1.csv", "final_profile.csv"):
            assert (tmp_path / name).exists()

    def test_pde_short_front(self, tmp_path):
        assert run_cli("pde", "--mu", "0", "--horizon", "50", out=tmp_path) == 2

    def test_mc_reproducible(self, tmp_path):
        args = ("mc", "--mu", "2", "--x0", "1", "--replicas", "2000", "--batch-size", "1000",
                "--seed", "3", "--n-tail", "3", "--no-registry")
        assert run_cli(*args, out=tmp_path / "a") == 0
        assert run_cli(*args, out=tmp_path / "b") == 0
        for name in ("histogram.csv", "summary.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert not (tmp_path / "a" / "registry.sqlite3").exists()

    def test_mc_regime_b_needs_horizon(self, tmp_path):
        assert run_cli("mc", "--mu", "0", "--replicas", "100", out=tmp_path / "inf") == 2
        code = run_cli("mc", "--mu", "0", "--replicas", "500", "--horizon", "0.5", out=tmp_path / "fin")
        assert code == 0
        summary = read_summary(tmp_path / "fin" / "summary.txt")
        assert 0.0 < float(summary["p_no_absorption"]) < 1.0

    def test_crosscheck_failure_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.setattr("cli.handlers.crosscheck.ODE_SERIES_TOL", 0.0)
        code = run_cli(
            "crosscheck", "--mu", "2", "--s", "0", "--x0", "1", "--replicas", "200", out=tmp_path
        )
        assert code == 4
        assert read_summary(tmp_path / "summary.txt")["status"] == "FAIL"
        assert read_summary(tmp_path / "failure.txt")["exit_code"] == "4"
        assert (tmp_path / "crosscheck.csv").exists()

    @pytest.mark.slow
    def test_crosscheck_passes(self, tmp_path):
        code = run_cli("crosscheck", "--mu", "2", "--x0", "1", "--replicas", "20000", out=tmp_path)
        assert code == 0
        summary = read_summary(tmp_path / "summary.txt")
        assert summary["status"] == "PASS"
        assert float(summary["max_series_ode_gap"]) < 1e-5 * float(summary["s0"])
        lines = (tmp_path / "crosscheck.csv").read_text(encoding="utf-8").splitlines()[1:]
        rows = [line.split(",") for line in lines]
        series_ode = [row for row in rows if row[0] == "series-ode"]
        # s = 0, 0.5 и s0
        assert len(series_ode) == 3
        assert all(row[-1] == "true" for row in rows)
        assert {row[1] for row in rows if row[0] == "series-mc"} == {"0", "0.5"}

    @pytest.mark.slow
    def test_waves_regime_c(self, tmp_path):
        assert run_cli("waves", "--mu", "2", out=tmp_path) == 0
        summary = read_summary(tmp_path / "summary.txt")
        classes = [value for key, value in summary.items() if key.startswith("decay_class(")]
        assert classes == ["FAST_B"] * 3
        gaps = [float(value) for key, value in summary.items() if key.startswith("gap_series_ode(")]
        assert max(gaps) < 1e-5 * float(summary["s0_series"])
        assert float(summary["s0_shooting"]) == pytest.approx(float(summary["s0_series"]), rel=1e-4)
        assert float(summary["a_checks_max_gap"]) < 1e-5 * float(summary["s0_series"])
        assert (tmp_path / "a_checks.csv").exists()


class TestRunConfig:
    def test_precedence(self, tmp_path):
        settings = Settings(seed=5, output_dir=str(tmp_path))
        flags = {"subcommand": "mc", "mu": 2.0, "seed": None}
        assert build_run_config(flags, settings).seed == 5
        flags["seed"] = 7
        assert build_run_config(flags, settings).seed == 7
        config_file = tmp_path / "run.json"
        config_file.write_text('{"seed": 9}', encoding="utf-8")
        assert build_run_config(flags, settings, config_file).seed == 9

    def test_unknown_key_rejected(self, tmp_path):
        config_file = tmp_path / "run.toml"
        config_file.write_text("colour = 1\n", encoding="utf-8")
        with pytest.raises(InvalidParameterError):
            build_run_config({"subcommand": "series", "mu": 2.0}, Settings(output_dir=str(tmp_path)), config_file)

    def test_broken_file(self, tmp_path):
        config_file = tmp_path / "run.toml"
        config_file.write_text("mu = = 2\n", encoding="utf-8")
        with pytest.raises(InvalidParameterError):
            load_config_file(config_file)

    def test_pde_horizon_default(self, tmp_path):
        settings = Settings(pde_horizon=123.0, output_dir=str(tmp_path))
        config = build_run_config({"subcommand": "pde", "mu": 0.0}, settings)
        assert config.horizon == 123.0

    def test_mc_settings(self, tmp_path):
        config = RunConfig(subcommand=Subcommand.MC, mu=2.0, dt=1e-3, epsilon=1e-5, output_dir=tmp_path)
        settings = config.mc_settings()
        assert settings.dt == 1e-3
        assert settings.epsilon == 1e-5
        assert math.isinf(settings.horizon)

    def test_resolved_is_json_friendly(self, tmp_path):
        resolved = RunConfig(subcommand=Subcommand.SERIES, mu=2.0, output_dir=tmp_path).resolved()
        assert resolved["subcommand"] == "series"
        assert resolved["output_dir"] == str(tmp_path)


class TestFilters:
    def test_regime_c_filter(self, tmp_path):
        regime_filter = RegimeFilter(REGIME_C, "series")
        assert regime_filter(RunConfig(subcommand=Subcommand.SERIES, mu=2.0, output_dir=tmp_path))
        with pytest.raises(UnsupportedRegimeError):
            regime_filter.check(RunConfig(subcommand=Subcommand.SERIES, mu=0.0, output_dir=tmp_path))

    def test_mc_filter_accepts_finite_horizon(self, tmp_path):
        regime_filter = McRegimeFilter(REGIME_C, "mc")
        assert not regime_filter(RunConfig(subcommand=Subcommand.MC, mu=0.0, output_dir=tmp_path))
        assert regime_filter(RunConfig(subcommand=Subcommand.MC, mu=0.0, mc_horizon=2.0, output_dir=tmp_path))

    def test_no_mu_passes(self, tmp_path):
        config = RunConfig(subcommand=Subcommand.S0_CURVE, output_dir=tmp_path)
        assert RegimeFilter(REGIME_C, "s0-curve")(config)


class TestOutput:
    def test_format_value(self):
        assert format_value(True) == "true"
        assert format_value(0.1) == "0.1"
        assert format_value(Regime.B) == "B"
        assert format_value(StopReason.HORIZON) == "HORIZON"
        assert summary_lines({"a": 1}) == ["a = 1"]

    def test_unwritable_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(InvalidParameterError):
            OutputDir(blocker / "sub")

    def test_table(self, tmp_path):
        out = OutputDir(tmp_path)
        path = out.table("t.csv", {"x": [0.0, 1.0], "y": [2.0, 3.5]})
        assert path.read_text(encoding="utf-8").splitlines() == ["# x,y", "0,2", "1,3.5"]


def test_parser_subcommands():
    parser = build_parser()
    args = parser.parse_args(["mc", "--mu", "2", "--horizon", "3"])
    assert args.mc_horizon == 3.0
    args = parser.parse_args(["crosscheck", "--mu", "2", "--x0", "0.5", "1"])
    assert args.x_points == [0.5, 1.0]
