import json

import numpy as np
import pytest

from tctnn.cli import main
from tctnn.synth import synth_periodic
from tctnn.tensor_core import load_tensor, save_tensor


@pytest.fixture
def periodic_file(tmp_path):
    series = synth_periodic((24, 3, 2), tau=4, seed=21)
    path = tmp_path / "series.tnsr"
    save_tensor(series, path)
    return path, series


class TestSynthCommand:
    def test_writes_deterministic_series(self, tmp_path):
        out1, out2 = tmp_path / "a.tnsr", tmp_path / "b.tnsr"
        for out in (out1, out2):
            code = main([
                "synth", "--kind", "periodic", "--shape", "16,3,2",
                "--tau", "4", "--seed", "7", "--output", str(out),
            ])
            assert code == 0
        assert load_tensor(out1).tobytes() == load_tensor(out2).tobytes()

    def test_bad_shape_is_usage_error(self, tmp_path):
        code = main([
            "synth", "--kind", "smooth", "--shape", "4;4",
            "--output", str(tmp_path / "x.tnsr"),
        ])
        assert code == 2

    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--kind", "smooth", "--shape", "4,4", "--frobnicate", "1"])
        assert exc.value.code == 2


class TestForecastCommand:
    def test_forecast_constant_series(self, tmp_path):
        hist = tmp_path / "hist.tnsr"
        save_tensor(np.full((16, 2, 2), 3.0), hist)
        out = tmp_path / "pred.tnsr"
        report = tmp_path / "report.json"
        code = main([
            "forecast", "--input", str(hist), "--horizon", "4",
            "--output", str(out), "--report", str(report),
        ])
        assert code == 0
        pred = load_tensor(out)
        assert pred.shape == (4, 2, 2)
        assert np.abs(pred - 3.0).max() <= 1e-6
        payload = json.loads(report.read_text())
        assert payload["schema"] == 1
        assert payload["converged"] is True
        assert payload["horizon"] == 4

    def test_forecast_with_truth_metrics(self, periodic_file, tmp_path):
        path, series = periodic_file
        hist = tmp_path / "hist.tnsr"
        save_tensor(series[:20], hist)
        out = tmp_path / "pred.tnsr"
        report = tmp_path / "report.json"
        code = main([
            "forecast", "--input", str(hist), "--horizon", "4", "--kernel", "12",
            "--output", str(out), "--report", str(report), "--truth", str(path),
        ])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["metrics"]["region"] == "forecast-only"
        assert payload["metrics"]["rmse"] <= 1e-3

    def test_missing_input_exits_4(self, tmp_path):
        code = main([
            "forecast", "--input", str(tmp_path / "nope.tnsr"), "--horizon", "2",
            "--output", str(tmp_path / "o.tnsr"), "--report", str(tmp_path / "r.json"),
        ])
        assert code == 4

    def test_nonconvergence_exits_3_with_report(self, periodic_file, tmp_path):
        path, series = periodic_file
        hist = tmp_path / "hist.tnsr"
        save_tensor(series[:20], hist)
        out = tmp_path / "pred.tnsr"
        report = tmp_path / "report.json"
        code = main([
            "forecast", "--input", str(hist), "--horizon", "4", "--max-iters", "3",
            "--output", str(out), "--report", str(report),
        ])
        assert code == 3
        assert out.exists()
        payload = json.loads(report.read_text())
        assert payload["converged"] is False
        assert payload["iterations"] == 3

    def test_csv_input(self, tmp_path):
        csv_path = tmp_path / "series.csv"
        rows = ["dims,12,2"]
        series = np.tile([[1.0, 5.0], [2.0, 6.0]], (6, 1))
        rows += [f"{a},{b}" for a, b in series]
        csv_path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "pred.tnsr"
        code = main([
            "forecast", "--input", str(csv_path), "--horizon", "2",
            "--output", str(out), "--report", str(tmp_path / "r.json"),
        ])
        assert code == 0
        pred = load_tensor(out)
        assert pred.shape == (2, 2)
        assert np.abs(pred - [[1.0, 5.0], [2.0, 6.0]]).max() <= 1e-4

    def test_bad_csv_header_exits_4(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,4.0\n")
        code = main([
            "forecast", "--input", str(bad), "--horizon", "1",
            "--output", str(tmp_path / "o.tnsr"), "--report", str(tmp_path / "r.json"),
        ])
        assert code == 4


class TestCompleteCommand:
    @pytest.mark.parametrize("model", ["tnn", "tctnn", "tcmnn"])
    def test_models_run_and_respect_observations(self, model, periodic_file, tmp_path):
        path, series = periodic_file
        mask = np.ones((24, 3, 2))
        mask[20:] = 0.0
        observed = series * mask
        obs_path, mask_path = tmp_path / "obs.tnsr", tmp_path / "mask.tnsr"
        save_tensor(observed, obs_path)
        save_tensor(mask, mask_path)
        out = tmp_path / f"{model}.tnsr"
        report = tmp_path / f"{model}.json"
        code = main([
            "complete", "--input", str(obs_path), "--mask", str(mask_path),
            "--model", model, "--output", str(out), "--report", str(report),
        ])
        assert code in (0, 3)
        completed = load_tensor(out)
        assert np.array_equal(completed * mask, observed)
        payload = json.loads(report.read_text())
        assert payload["config"]["model"] == model

    def test_tnn_on_order2_csv(self, tmp_path):
        csv_path = tmp_path / "m.csv"
        csv_path.write_text("dims,3,2\n1,2\n3,4\n5,6\n")
        mask_path = tmp_path / "mask.csv"
        mask_path.write_text("dims,3,2\n1,1\n1,0\n1,1\n")
        out = tmp_path / "out.tnsr"
        code = main([
            "complete", "--input", str(csv_path), "--mask", str(mask_path),
            "--model", "tnn", "--output", str(out), "--report", str(tmp_path / "r.json"),
        ])
        assert code in (0, 3)
        assert load_tensor(out).shape == (3, 2)


class TestAnalyzeCommand:
    def test_prediction_mask_reports_rho_zero(self, periodic_file, tmp_path, capsys):
        path, _ = periodic_file
        report = tmp_path / "analysis.json"
        code = main([
            "analyze", "--input", str(path), "--horizon", "4", "--report", str(report),
        ])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["rho"] == 0.0
        for key in ("schema", "mu", "r", "r_s", "rhs", "h_max", "k"):
            assert key in payload
        printed = json.loads(capsys.readouterr().out)
        assert printed == payload

    def test_default_mask_is_complete(self, periodic_file, tmp_path):
        path, _ = periodic_file
        report = tmp_path / "analysis.json"
        assert main(["analyze", "--input", str(path), "--report", str(report)]) == 0
        assert json.loads(report.read_text())["rho"] == 1.0


class TestTnsrRoundtripViaCli:
    def test_synth_then_load_bit_exact(self, tmp_path):
        out = tmp_path / "s.tnsr"
        assert main([
            "synth", "--kind", "lowrank", "--shape", "12,4,3", "--rank", "2",
            "--seed", "3", "--output", str(out),
        ]) == 0
        a = load_tensor(out)
        again = tmp_path / "copy.tnsr"
        save_tensor(a, again)
        assert out.read_bytes() == again.read_bytes()
