"""End-to-end command-line flows on a small generated market."""
import json

import pandas as pd
import pytest

from lsquant.cli import load_run_config, main
from lsquant.errors import ConfigError, InputDataError
from lsquant.synth import SynthConfig, generate_market, write_market


@pytest.fixture(scope="module")
def market_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("market")
    mkt = generate_market(
        SynthConfig(n_symbols=12, n_days=320, signal_strength=0.6, seed=19, rho=0.99)
    )
    write_market(mkt, root)
    return root


def backtest_doc(market_dir, out_dir, **overrides):
    doc = {
        "bars": str(market_dir / "bars.csv"),
        "fundamentals": str(market_dir / "fundamentals.csv"),
        "rebalance": "weekly",
        "n_long": 3,
        "n_short": 3,
        "top_k": 8,
        "universe_size": 12,
        "universe_lookback": 21,
        "ensemble": ["gaussian_nb", "sgd"],
        "seed": 5,
        "out_dir": str(out_dir),
    }
    doc.update(overrides)
    return doc


def write_config(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return str(path)


class TestRunConfig:
    def test_round_trip(self, market_dir, tmp_path):
        cfg_path = write_config(
            tmp_path / "run.json", backtest_doc(market_dir, tmp_path / "out")
        )
        run = load_run_config(cfg_path)
        assert run.backtest.n_long == 3
        assert run.backtest.rebalance == "weekly"
        assert run.ensemble == ["gaussian_nb", "sgd"]
        assert run.seed == 5

    def test_unknown_key_named_in_error(self, market_dir, tmp_path):
        doc = backtest_doc(market_dir, tmp_path / "out")
        doc["lookback_window"] = 10
        cfg_path = write_config(tmp_path / "run.json", doc)
        with pytest.raises(ConfigError, match="lookback_window"):
            load_run_config(cfg_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputDataError, match="not found"):
            load_run_config(tmp_path / "absent.json")

    def test_bars_required(self, tmp_path):
        cfg_path = write_config(tmp_path / "run.json", {"seed": 1})
        with pytest.raises(ConfigError, match="bars"):
            load_run_config(cfg_path)

    def test_bad_seed(self, market_dir, tmp_path):
        doc = backtest_doc(market_dir, tmp_path / "out", seed=-1)
        cfg_path = write_config(tmp_path / "run.json", doc)
        with pytest.raises(ConfigError, match="seed"):
            load_run_config(cfg_path)


class TestSimpleCommands:
    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0

    def test_missing_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_factors_list(self, capsys):
        assert main(["factors", "--list"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 28
        assert all(": " in line for line in out)

    def test_factors_compute_subset(self, market_dir, tmp_path):
        code = main(
            [
                "factors",
                "--bars",
                str(market_dir / "bars.csv"),
                "--names",
                "medprice",
                "rate_of_return",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        names = {p.name for p in tmp_path.glob("*.csv")}
        assert names == {"factor_medprice.csv", "factor_rate_of_return.csv"}

    def test_synth_deterministic(self, tmp_path):
        args = ["synth", "--symbols", "10", "--days", "300", "--seed", "3"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        for name in ("bars.csv", "fundamentals.csv", "latent.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()
        cfg = json.loads((tmp_path / "a" / "synth_config.json").read_text())
        assert cfg["seed"] == 3 and cfg["n_symbols"] == 10

    def test_synth_invalid_size_fails(self, tmp_path):
        assert (
            main(["synth", "--symbols", "5", "--out", str(tmp_path / "x")]) == 1
        )

    def test_ingest_writes_panels_and_report(self, market_dir, tmp_path):
        code = main(
            [
                "ingest",
                "--bars",
                str(market_dir / "bars.csv"),
                "--fundamentals",
                str(market_dir / "fundamentals.csv"),
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert {
            "panel_open.csv",
            "panel_close.csv",
            "panel_volume.csv",
            "fundamentals.csv",
            "validation_report.json",
        } <= names
        report = json.loads((tmp_path / "validation_report.json").read_text())
        assert report["bars"]["rows_read"] == 320 * 12
        assert report["bars"]["rows_accepted"] == 320 * 12

    def test_analyze_factor(self, market_dir, tmp_path):
        code = main(
            [
                "analyze-factor",
                "--bars",
                str(market_dir / "bars.csv"),
                "--factor",
                "rate_of_return",
                "--quantiles",
                "3",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "quantile_mean_returns.csv").exists()
        assert (tmp_path / "cumulative_by_quantile.csv").exists()

    def test_analyze_unknown_factor_fails(self, market_dir, tmp_path):
        code = main(
            [
                "analyze-factor",
                "--bars",
                str(market_dir / "bars.csv"),
                "--factor",
                "alpha42",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 1


@pytest.fixture(scope="module")
def run_dir(market_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg_path = write_config(out / "run.json", backtest_doc(market_dir, out))
    assert main(["backtest", "--config", cfg_path]) == 0
    return out


class TestBacktestCommand:
    def test_outputs_present(self, run_dir):
        names = {p.name for p in run_dir.iterdir()}
        assert {
            "equity.csv",
            "fills.csv",
            "positions.csv",
            "conviction.csv",
            "feature_log.csv",
            "benchmark.csv",
            "tearsheet.json",
            "manifest.json",
            "diagnostics.json",
        } <= names

    def test_manifest_hashes_inputs(self, run_dir, market_dir):
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["config"]["n_long"] == 3
        bars_entry = manifest["inputs"]["bars"]
        assert bars_entry["path"] == str(market_dir / "bars.csv")
        assert len(bars_entry["sha256"]) == 64

    def test_tearsheet_scalars(self, run_dir):
        sheet = json.loads((run_dir / "tearsheet.json").read_text())
        assert {
            "total_return_pct",
            "sharpe",
            "max_drawdown_pct",
            "portfolio_beta",
        } <= set(sheet)
        assert sheet["max_drawdown_pct"] <= 0

    def test_repeat_run_byte_identical(self, run_dir, market_dir, tmp_path):
        cfg_path = write_config(
            tmp_path / "run.json", backtest_doc(market_dir, tmp_path / "out")
        )
        assert main(["backtest", "--config", cfg_path]) == 0
        for name in ("tearsheet.json", "fills.csv", "equity.csv"):
            assert (tmp_path / "out" / name).read_bytes() == (
                run_dir / name
            ).read_bytes()

    def test_report_rebuilds_tearsheet(self, run_dir, tmp_path):
        code = main(
            ["report", "--run-dir", str(run_dir), "--out", str(tmp_path)]
        )
        assert code == 0
        original = json.loads((run_dir / "tearsheet.json").read_text())
        rebuilt = json.loads((tmp_path / "tearsheet.json").read_text())
        assert set(original) == set(rebuilt)
        for key, value in original.items():
            if isinstance(value, float):
                assert rebuilt[key] == pytest.approx(value, rel=1e-9), key

    def test_missing_config_exits_one(self, tmp_path):
        assert main(["backtest", "--config", str(tmp_path / "nope.json")]) == 1

    def test_short_history_writes_error_manifest(self, market_dir, tmp_path):
        doc = backtest_doc(market_dir, tmp_path / "out", window=319)
        cfg_path = write_config(tmp_path / "run.json", doc)
        assert main(["backtest", "--config", cfg_path]) == 1
        error = json.loads((tmp_path / "out" / "error_manifest.json").read_text())
        assert "window" in error["error"]

    def test_compare_writes_accuracy_table(self, market_dir, tmp_path, capsys):
        cfg_path = write_config(
            tmp_path / "run.json", backtest_doc(market_dir, tmp_path / "out")
        )
        code = main(
            [
                "compare",
                "--config",
                cfg_path,
                "--algorithms",
                "gaussian_nb",
                "sgd",
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "overall_accuracy" in printed
        table = pd.read_csv(tmp_path / "out" / "accuracy.csv")
        assert table["algorithm"].tolist() == ["gaussian_nb", "sgd"]
        assert table["overall_accuracy"].between(0, 1).all()
