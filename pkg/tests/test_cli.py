"""Command-line behavior: artifacts, determinism, exit codes."""
import json
import xml.etree.ElementTree as ET

import pytest

from harkit.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_PROTOCOL,
    EXIT_SCHEMA,
    EXIT_USAGE,
    main,
)

HEADER = "subject_id,session_id,activity,sensor,timestamp_ms,x,y,z"


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    """A small synthetic dataset generated through the CLI itself."""
    out = tmp_path_factory.mktemp("synth")
    code = main(["--seed", "3", "synth", "--subjects", "2", "--minutes", "0.5",
                 "-o", str(out)])
    assert code == EXIT_OK
    return out


@pytest.fixture(scope="module")
def recordings_csv(data_dir):
    return data_dir / "recordings.csv"


class TestSynth:
    def test_writes_expected_files(self, data_dir):
        assert (data_dir / "recordings.csv").exists()
        assert (data_dir / "manifest.csv").exists()
        manifest = json.loads((data_dir / "synth_manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["seed"] == 3
        assert manifest["config"]["n_subjects"] == 2

    def test_har_seed_env_provides_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HAR_SEED", "55")
        out = tmp_path / "env"
        assert main(["synth", "--subjects", "1", "--minutes", "0.1",
                     "-o", str(out)]) == EXIT_OK
        assert json.loads((out / "synth_manifest.json").read_text())["seed"] == 55

    def test_explicit_seed_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HAR_SEED", "55")
        out = tmp_path / "flag"
        assert main(["--seed", "8", "synth", "--subjects", "1", "--minutes", "0.1",
                     "-o", str(out)]) == EXIT_OK
        assert json.loads((out / "synth_manifest.json").read_text())["seed"] == 8


class TestSummary:
    def test_prints_rows_and_balance(self, recordings_csv, capsys):
        assert main(["summary", "--input", str(recordings_csv)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "subj00" in out
        assert "class balance" in out


class TestExtract:
    def test_writes_feature_csv(self, recordings_csv, tmp_path):
        out = tmp_path / "features.csv"
        assert main(["extract", "--input", str(recordings_csv), "--bank", "b",
                     "--window", "75", "-o", str(out)]) == EXIT_OK
        first = out.read_text().splitlines()[0]
        assert first.startswith("subject_id,activity,bank")
        assert first.count(",") == 3 + 70 - 1

    def test_window_too_small_is_usage_error(self, recordings_csv, tmp_path):
        assert main(["extract", "--input", str(recordings_csv), "--window", "2",
                     "-o", str(tmp_path / "f.csv")]) == EXIT_USAGE


class TestEval:
    def test_personal_eval_artifacts(self, recordings_csv, tmp_path):
        out = tmp_path / "eval"
        assert main(["--seed", "4", "eval", "--input", str(recordings_csv),
                     "--model", "dtree", "--bank", "b", "--window", "75",
                     "--protocol", "personal", "--treatment", "nr-rp",
                     "-o", str(out)]) == EXIT_OK
        results = (out / "results.csv").read_text()
        assert results.splitlines()[0] == (
            "protocol,classifier,bank,treatment,window,activity,metric,value,ci_halfwidth,n_units"
        )
        assert "walking" in results
        assert (out / "table.md").exists()
        assert json.loads((out / "eval_manifest.json").read_text())["command"] == "eval"

    def test_same_seed_same_output(self, recordings_csv, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["--seed", "4", "eval", "--input", str(recordings_csv),
                "--model", "knn", "--bank", "b", "--window", "100",
                "--protocol", "impersonal"]
        assert main(args + ["-o", str(a)]) == EXIT_OK
        assert main(args + ["-o", str(b)]) == EXIT_OK
        assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()

    def test_eval_accepts_feature_csv_and_matches_recordings_path(
            self, recordings_csv, tmp_path):
        features = tmp_path / "features.csv"
        assert main(["extract", "--input", str(recordings_csv), "--bank", "b",
                     "--window", "100", "-o", str(features)]) == EXIT_OK
        direct, staged = tmp_path / "direct", tmp_path / "staged"
        common = ["--seed", "4", "eval", "--model", "nb", "--bank", "b",
                  "--window", "100", "--protocol", "impersonal"]
        assert main(common + ["--input", str(recordings_csv), "-o", str(direct)]) == EXIT_OK
        assert main(common + ["--input", str(features), "-o", str(staged)]) == EXIT_OK
        assert (direct / "results.csv").read_bytes() == (staged / "results.csv").read_bytes()

    def test_permute_columns_leaves_knn_results_unchanged(self, recordings_csv, tmp_path):
        plain, permuted = tmp_path / "plain", tmp_path / "perm"
        args = ["--seed", "4", "eval", "--input", str(recordings_csv),
                "--model", "knn", "--bank", "b", "--window", "100",
                "--protocol", "impersonal"]
        assert main(args + ["-o", str(plain)]) == EXIT_OK
        assert main(args + ["--permute-columns", "-o", str(permuted)]) == EXIT_OK
        assert (plain / "results.csv").read_bytes() == (permuted / "results.csv").read_bytes()


class TestSweep:
    def test_single_size_artifacts(self, recordings_csv, tmp_path):
        out = tmp_path / "sweep"
        assert main(["--seed", "4", "sweep", "--input", str(recordings_csv),
                     "--model", "dtree", "--bank", "b", "--sizes", "100,300",
                     "--protocol", "impersonal", "-o", str(out)]) == EXIT_OK
        svg = (out / "sweep.svg").read_text()
        root = ET.fromstring(svg)  # well-formed XML
        assert root.tag.endswith("svg")
        results = (out / "sweep_results.csv").read_text()
        assert ",100," in results and ",300," in results

    def test_colon_range_sizes(self, recordings_csv, tmp_path):
        out = tmp_path / "sweep2"
        assert main(["--seed", "4", "sweep", "--input", str(recordings_csv),
                     "--model", "nb", "--bank", "b", "--sizes", "100:300:100",
                     "--protocol", "impersonal", "-o", str(out)]) == EXIT_OK
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert manifest["config"]["sizes"] == [100, 200, 300]

    def test_bad_sizes_is_usage_error(self, recordings_csv, tmp_path):
        assert main(["sweep", "--input", str(recordings_csv), "--sizes", "2",
                     "-o", str(tmp_path / "x")]) == EXIT_USAGE


class TestReport:
    def test_treatment_pair_gets_t_test_table(self, recordings_csv, tmp_path):
        dirs = {}
        for treatment in ("nr-rp", "unr-rp"):
            d = tmp_path / treatment
            assert main(["--seed", "4", "eval", "--input", str(recordings_csv),
                         "--model", "dtree", "--bank", "b", "--window", "100",
                         "--protocol", "impersonal", "--treatment", treatment,
                         "-o", str(d)]) == EXIT_OK
            dirs[treatment] = d / "results.csv"
        out = tmp_path / "report.md"
        assert main(["report", str(dirs["nr-rp"]), str(dirs["unr-rp"]),
                     "-o", str(out)]) == EXIT_OK
        md = out.read_text()
        assert "NR-RP" in md and "UNR-RP" in md
        assert "| p |" in md

    def test_without_pair_emits_note(self, recordings_csv, tmp_path):
        d = tmp_path / "single"
        assert main(["--seed", "4", "eval", "--input", str(recordings_csv),
                     "--model", "nb", "--bank", "b", "--window", "100",
                     "--protocol", "impersonal", "-o", str(d)]) == EXIT_OK
        out = tmp_path / "report.md"
        assert main(["report", str(d / "results.csv"), "-o", str(out)]) == EXIT_OK
        assert "t-test column omitted" in out.read_text()


class TestExitCodes:
    def test_missing_input_is_io_error(self, tmp_path):
        assert main(["summary", "--input", str(tmp_path / "missing.csv")]) == EXIT_IO

    def test_malformed_csv_is_schema_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text(HEADER + "\ns0,s0,walking,accel,0,1,2\n")
        assert main(["summary", "--input", str(bad)]) == EXIT_SCHEMA

    def test_unknown_activity_is_schema_error(self, tmp_path):
        bad = tmp_path / "bad2.csv"
        bad.write_text(HEADER + "\ns0,s0,flying,accel,0,1,2,3\n")
        assert main(["summary", "--input", str(bad)]) == EXIT_SCHEMA

    def test_single_subject_impersonal_is_protocol_error(self, tmp_path):
        out = tmp_path / "one"
        assert main(["--seed", "1", "synth", "--subjects", "1", "--minutes", "0.5",
                     "-o", str(out)]) == EXIT_OK
        assert main(["--seed", "1", "eval", "--input", str(out / "recordings.csv"),
                     "--bank", "b", "--window", "75", "--protocol", "impersonal",
                     "-o", str(tmp_path / "res")]) == EXIT_PROTOCOL

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as ei:
            main(["eval", "--no-such-flag"])
        assert ei.value.code == EXIT_USAGE
