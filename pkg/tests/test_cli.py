"""Command-line interface: dispatch, exit codes, determinism, formats."""

import csv
import json

import pytest

from ulat.cli import EXIT_IO, EXIT_OK, EXIT_PRECONDITION, main


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def payload_of(text: str) -> str:
    doc = json.loads(text)
    assert doc["schema"] == 1
    return json.dumps(doc["payload"], sort_keys=True)


class TestGeometryCommand:
    def test_mean_width_unit_ball(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "mean-width",
             "--trials", "500", "--seed", "7"],
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["payload"]["value"] == pytest.approx(2.0)

    def test_measure_and_cover(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "measure"],
        )
        assert code == EXIT_OK
        assert json.loads(out)["payload"]["exact"] is True
        code, out, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "cover-upper"],
        )
        assert code == EXIT_OK

    def test_missing_file_is_io_error(self, capsys, doc_dir):
        code, _, err = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "absent.json"), "--op", "measure"],
        )
        assert code == EXIT_IO
        assert "i/o error" in err

    def test_bad_trials_precondition(self, capsys, doc_dir):
        code, _, err = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "measure",
             "--trials", "0"],
        )
        assert code == EXIT_PRECONDITION
        assert "precondition" in err


class TestTuranCommand:
    def test_campaign_csv_zero_violations(self, capsys):
        code, out, _ = run_cli(capsys, ["turan", "--dim", "1", "--random", "50", "--seed", "1"])
        assert code == EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 50
        assert all(r["holds"] == "True" for r in rows)


class TestLalCommand:
    def test_annulus_profile(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["lal", "--phi", "annulus:1:3", "--dim", "2", "--trials", "200", "--seed", "0"],
        )
        assert code == EXIT_OK
        payload = json.loads(out)["payload"]
        assert payload["outer_dilation"]["bound"] == pytest.approx(8 * 3.141592653589793)

    def test_unknown_profile_precondition(self, capsys):
        code, _, err = run_cli(capsys, ["lal", "--phi", "cone:1", "--dim", "2"])
        assert code == EXIT_PRECONDITION


class TestPipelineCommands:
    def test_ratio(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["ratio", "--function", str(doc_dir / "gauss1.json"),
             "--s-set", str(doc_dir / "ball1d.json"),
             "--sigma-set", str(doc_dir / "ball1d.json")],
        )
        assert code == EXIT_OK
        assert json.loads(out)["payload"]["ratio"] > 1

    def test_pipeline_trace(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["pipeline", "--function", str(doc_dir / "fbox.json"),
             "--s-set", str(doc_dir / "box8.json"),
             "--sigma-set", str(doc_dir / "sigma2.json"),
             "--seed", "2", "--grid", "128"],
        )
        assert code == EXIT_OK
        payload = json.loads(out)["payload"]
        assert payload["events"]["zero_coeff_dominated"] is True

    def test_pipeline_precondition(self, capsys, doc_dir):
        # Support too large for the pipeline reduction.
        big = doc_dir / "big.json"
        big.write_text(json.dumps({"kind": "box", "lower": [-1, -1], "upper": [1, 1]}))
        bigset = doc_dir / "bigset.json"
        bigset.write_text(
            json.dumps(
                {"dimension": 2, "pieces": [{"kind": "box", "lower": [-1, -1], "upper": [1, 1]}]}
            )
        )
        code, _, err = run_cli(
            capsys,
            ["pipeline", "--function", str(big), "--s-set", str(bigset),
             "--sigma-set", str(doc_dir / "sigma2.json")],
        )
        assert code == EXIT_PRECONDITION

    def test_sweep_csv(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["sweep", "--function", str(doc_dir / "fbox.json"),
             "--s-set", str(doc_dir / "box8.json"),
             "--sigma-set", str(doc_dir / "sigma2.json"),
             "--ygrid", "2", "--grid", "128", "--seed", "4"],
        )
        assert code == EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert {"y1", "y2", "bound", "direct"} <= set(rows[0].keys())


class TestPeriodizeCommand:
    def test_json_summary(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["periodize", "--function", str(doc_dir / "gauss2.json"), "--seed", "3",
             "--format", "json"],
        )
        assert code == EXIT_OK
        payload = json.loads(out)["payload"]
        assert payload["parseval_gap"] <= 1e-6

    def test_csv_grid_dump(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["periodize", "--function", str(doc_dir / "gauss2.json"), "--seed", "3",
             "--grid", "8", "--format", "csv"],
        )
        assert code == EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 64
        assert {"t1", "t2", "re", "im"} == set(rows[0].keys())


class TestSharpnessCommand:
    def test_report_fields(self, capsys):
        code, out, _ = run_cli(
            capsys, ["sharpness", "--n", "4", "--trials", "60", "--seed", "3"]
        )
        assert code == EXIT_OK
        payload = json.loads(out)["payload"]
        for key in ("m_estimate", "n", "measure", "mean_width", "cover_upper"):
            assert key in payload

    def test_crowded_ring_precondition(self, capsys):
        code, _, _ = run_cli(
            capsys, ["sharpness", "--n", "16", "--ring-radius", "20", "--trials", "10"]
        )
        assert code == EXIT_PRECONDITION


class TestDeterminismAndPlanning:
    def test_dry_run_prints_plan_without_computing(self, capsys, doc_dir):
        code, out, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "mean-width",
             "--trials", "10000000", "--dry-run"],
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["dry_run"] is True
        assert doc["plan"]["trials"] == 10000000

    def test_payloads_byte_identical(self, capsys, doc_dir):
        argv = ["lal", "--phi", "gaussian", "--dim", "2", "--trials", "120", "--seed", "5"]
        _, out1, _ = run_cli(capsys, argv)
        _, out2, _ = run_cli(capsys, argv)
        assert payload_of(out1) == payload_of(out2)

    def test_threads_do_not_change_results(self, capsys):
        base = ["lal", "--phi", "gaussian", "--dim", "2", "--trials", "120", "--seed", "5"]
        _, out1, _ = run_cli(capsys, base + ["--threads", "1"])
        _, out2, _ = run_cli(capsys, base + ["--threads", "4"])
        assert payload_of(out1) == payload_of(out2)

    def test_config_file_overrides(self, capsys, doc_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 300, "seed": 9}))
        code, out, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "mean-width",
             "--config", str(cfg)],
        )
        assert code == EXIT_OK
        assert json.loads(out)["seed"] == 9

    def test_output_file(self, capsys, doc_dir, tmp_path):
        out_path = tmp_path / "result.json"
        code, _, _ = run_cli(
            capsys,
            ["geometry", "--set", str(doc_dir / "ball.json"), "--op", "measure",
             "-o", str(out_path)],
        )
        assert code == EXIT_OK
        assert json.loads(out_path.read_text())["payload"]["value"] > 3.14
