"""End-to-end command-line behavior: output, files, and exit codes."""

import json
import xml.etree.ElementTree as ET

import pytest

from metarep.cli import main
from oracles import ratio_fixture, write_csv


@pytest.fixture()
def hr_csv(tmp_path):
    return str(ratio_fixture(tmp_path / "review.csv"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_basic_run(self, hr_csv, capsys):
        code, out, err = run_cli(capsys, "analyze", "--input", hr_csv)
        assert code == 0
        assert err == ""
        assert "Summary effect" in out
        assert "r-value" in out
        assert "leave-one-out" in out.lower()

    def test_default_model_is_fixed(self, hr_csv, capsys):
        _, out, _ = run_cli(capsys, "analyze", "--input", hr_csv)
        assert "fixed_z" in out

    def test_model_flag_switches(self, hr_csv, capsys):
        _, out, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--model", "random-t")
        assert "random_t" in out

    def test_report_sentence_present(self, hr_csv, capsys):
        _, out, _ = run_cli(capsys, "analyze", "--input", hr_csv)
        assert ("replicated in more than one study" in out) or (
            "cannot rule out" in out
        )

    def test_ratio_results_shown_on_ratio_scale(self, hr_csv, capsys):
        _, out, _ = run_cli(capsys, "analyze", "--input", hr_csv)
        # the pooled HR must be printed as a ratio near 0.85, not a log
        summary_line = next(l for l in out.splitlines() if "Summary effect" in l)
        value = float(summary_line.split()[2])
        assert 0.5 < value < 1.0
        assert "null value 1" in out

    def test_json_output(self, hr_csv, capsys, tmp_path):
        out_file = tmp_path / "res.json"
        code, _, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--json", str(out_file))
        assert code == 0
        payload = json.loads(out_file.read_text(encoding="utf-8"))
        assert payload["model"] == "fixed_z"
        assert payload["n"] == 5
        assert payload["measure"] == "ratio"
        assert "rvalue" in payload and "sensitivity_interval" in payload
        assert payload["meta"]["df"] is None

    def test_plot_output(self, hr_csv, capsys, tmp_path):
        out_file = tmp_path / "forest.svg"
        code, _, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--plot", str(out_file))
        assert code == 0
        root = ET.fromstring(out_file.read_text(encoding="utf-8"))
        assert root.tag.endswith("svg")

    def test_u_flag(self, hr_csv, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--u", "3")
        assert code == 0
        assert "u=3" in out

    def test_bound_flag(self, hr_csv, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--bound")
        assert code == 0
        assert "Replicability bound" in out or "not significant" in out

    def test_alpha_flag(self, hr_csv, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--alpha", "0.10")
        assert code == 0
        assert "90% CI" in out

    def test_outputs_deterministic(self, hr_csv, capsys, tmp_path):
        pairs = []
        for name in ("one", "two"):
            json_f = tmp_path / f"{name}.json"
            svg_f = tmp_path / f"{name}.svg"
            run_cli(
                capsys, "analyze", "--input", hr_csv, "--json", str(json_f), "--plot", str(svg_f)
            )
            pairs.append((json_f.read_bytes(), svg_f.read_bytes()))
        assert pairs[0] == pairs[1]

    def test_out_env_var_redirects_relative_paths(
        self, hr_csv, capsys, tmp_path, monkeypatch
    ):
        base = tmp_path / "outputs"
        monkeypatch.setenv("METAREP_OUT", str(base))
        code, _, _ = run_cli(capsys, "analyze", "--input", hr_csv, "--json", "res.json")
        assert code == 0
        assert (base / "res.json").exists()

    def test_out_env_var_leaves_absolute_paths(
        self, hr_csv, capsys, tmp_path, monkeypatch
    ):
        monkeypatch.setenv("METAREP_OUT", str(tmp_path / "elsewhere"))
        target = tmp_path / "direct.json"
        run_cli(capsys, "analyze", "--input", hr_csv, "--json", str(target))
        assert target.exists()


class TestAnalyzeErrors:
    def test_missing_file_is_input_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "analyze", "--input", str(tmp_path / "nope.csv"))
        assert code == 2
        assert "error" in err

    def test_bad_value_reports_row(self, capsys, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["s1,HR,-2.0,0.1,,,"])
        code, _, err = run_cli(capsys, "analyze", "--input", str(path))
        assert code == 2
        assert "row 1" in err

    def test_two_studies_fail_precondition(self, capsys, tmp_path):
        path = write_csv(
            tmp_path / "two.csv", ["a,MD,0.5,0.1,,,", "b,MD,0.6,0.1,,,"]
        )
        code, _, err = run_cli(capsys, "analyze", "--input", str(path), "--u", "2")
        assert code == 3
        assert "at least 3" in err

    def test_u_too_large_is_precondition(self, capsys, hr_csv):
        code, _, err = run_cli(capsys, "analyze", "--input", hr_csv, "--u", "9")
        assert code == 3

    def test_enumeration_cap_exit_code(self, capsys, tmp_path):
        rows = [f"s{i},MD,{0.2 + 0.01 * i},0.1,,," for i in range(25)]
        path = write_csv(tmp_path / "wide.csv", rows)
        code, _, err = run_cli(capsys, "analyze", "--input", str(path), "--u", "13")
        assert code == 4
        assert "max-evaluations" in err or "exceeds" in err

    def test_cap_override_flag(self, capsys, tmp_path):
        rows = [f"s{i},MD,{0.2 + 0.01 * i},0.05,,," for i in range(12)]
        path = write_csv(tmp_path / "mid.csv", rows)
        code, _, _ = run_cli(
            capsys, "analyze", "--input", str(path), "--u", "6", "--max-evaluations", "100"
        )
        assert code == 4
        code, _, _ = run_cli(
            capsys, "analyze", "--input", str(path), "--u", "6", "--max-evaluations", "1000"
        )
        assert code == 0

    def test_unknown_flag_exits_two(self, hr_csv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--input", hr_csv, "--frobnicate"])
        assert exc.value.code == 2


class TestAdjust:
    def test_bh_worked_example(self, capsys):
        code, out, _ = run_cli(
            capsys, "adjust", "--rvalues", "0.1231,0.0017,0.0167,0.1776"
        )
        assert code == 0
        assert "0.0068" in out
        assert "0.0334" in out
        assert "Declared endpoints: {2, 3}" in out

    def test_bonferroni_method(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "adjust",
            "--rvalues",
            "0.1231,0.0017,0.0167,0.1776",
            "--method",
            "bonferroni",
        )
        assert code == 0
        assert "Declared endpoints: {2}" in out

    def test_none_declared(self, capsys):
        code, out, _ = run_cli(capsys, "adjust", "--rvalues", "0.9,0.8")
        assert code == 0
        assert "none" in out

    def test_bad_rvalue_is_input_error(self, capsys):
        code, _, err = run_cli(capsys, "adjust", "--rvalues", "0.5,oops")
        assert code == 2
        assert "error" in err

    def test_out_of_range_rvalue(self, capsys):
        code, _, err = run_cli(capsys, "adjust", "--rvalues", "0.5,1.5")
        assert code == 2


class TestSimulate:
    def test_desk_run_writes_files(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys,
            "simulate",
            "--out",
            str(tmp_path),
            "--iterations",
            "200",
        )
        assert code == 0
        assert (tmp_path / "grid.csv").exists()
        charts = list(tmp_path.glob("rejections_*.svg"))
        assert len(charts) == 4  # 2 tau2 values x 2 tests at desk scale
        assert "grid.csv" in out

    def test_runs_are_deterministic(self, capsys, tmp_path):
        for sub in ("a", "b"):
            run_cli(
                capsys,
                "simulate",
                "--out",
                str(tmp_path / sub),
                "--iterations",
                "150",
                "--seed",
                "5",
            )
        a = sorted((tmp_path / "a").iterdir())
        b = sorted((tmp_path / "b").iterdir())
        assert [p.name for p in a] == [p.name for p in b]
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_seed_flag_changes_results(self, capsys, tmp_path):
        texts = []
        for seed in ("1", "2"):
            out_dir = tmp_path / seed
            run_cli(
                capsys,
                "simulate",
                "--out",
                str(out_dir),
                "--iterations",
                "150",
                "--seed",
                seed,
            )
            texts.append((out_dir / "grid.csv").read_text(encoding="utf-8"))
        assert texts[0] != texts[1]

    def test_json_summary(self, capsys, tmp_path):
        out_json = tmp_path / "sim.json"
        code, _, _ = run_cli(
            capsys,
            "simulate",
            "--out",
            str(tmp_path),
            "--iterations",
            "100",
            "--json",
            str(out_json),
        )
        assert code == 0
        payload = json.loads(out_json.read_text(encoding="utf-8"))
        assert payload["config"]["iterations"] == 100


class TestParser:
    def test_no_command_shows_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_bad_model_value(self, hr_csv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--input", hr_csv, "--model", "bayesian"])
        assert exc.value.code == 2
