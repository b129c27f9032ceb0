"""File formats: feature CSV, results CSV, markdown tables, SVG, manifests."""
import hashlib
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from harkit.classifiers import ModelKind, ModelSpec
from harkit.errors import MalformedRow
from harkit.evaluation import NR_RP, EvalConfig, Protocol, evaluate
from harkit.features import Bank, FeatureVector, feature_matrix
from harkit.ingest import Activity
from harkit.reporting import (
    RESULTS_HEADER,
    RunManifest,
    atomic_write_text,
    is_features_csv,
    read_features_csv,
    read_results_csv,
    report_markdown,
    report_rows,
    sha256_file,
    sweep_svg,
    write_features_csv,
    write_results_csv,
)


@pytest.fixture
def vectors(rng):
    return [
        FeatureVector(Bank.B70, rng.normal(size=70), Activity(i % 5), f"s{i % 3}")
        for i in range(30)
    ]


@pytest.fixture
def config_and_report(vectors):
    config = EvalConfig(ModelSpec(ModelKind.NaiveBayes), Bank.B70, 75,
                        NR_RP, Protocol.Impersonal, seed=1)
    X, y, subjects = feature_matrix(vectors)
    return config, evaluate(config, X, y, subjects)


class TestAtomicWrite:
    def test_creates_and_overwrites(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(path, "first")
        atomic_write_text(path, "second")
        assert path.read_text() == "second"
        assert list(tmp_path.iterdir()) == [path]  # no stray temp files


class TestFeaturesCsv:
    def test_round_trip_exact(self, vectors, tmp_path):
        path = tmp_path / "f.csv"
        write_features_csv(vectors, path)
        assert is_features_csv(path)
        back = read_features_csv(path)
        assert len(back) == len(vectors)
        for a, b in zip(vectors, back):
            assert a.bank is b.bank
            assert a.activity is b.activity
            assert a.subject_id == b.subject_id
            np.testing.assert_array_equal(a.values, b.values)  # bit-exact

    def test_mixed_banks_rejected(self, rng, tmp_path):
        mixed = [
            FeatureVector(Bank.B70, rng.normal(size=70), Activity.Walking, "s0"),
            FeatureVector(Bank.A43, rng.normal(size=43), Activity.Walking, "s0"),
        ]
        with pytest.raises(ValueError):
            write_features_csv(mixed, tmp_path / "m.csv")

    def test_bad_header_raises(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope,nope\n1,2\n")
        with pytest.raises(MalformedRow):
            read_features_csv(path)
        assert not is_features_csv(path)

    def test_bad_row_reports_line(self, vectors, tmp_path):
        path = tmp_path / "t.csv"
        write_features_csv(vectors[:2], path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2].rsplit(",", 1)[0]  # drop one field from row 2
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRow) as ei:
            read_features_csv(path)
        assert ei.value.line_no == 3


class TestResultsCsv:
    def test_row_shape_and_round_trip(self, config_and_report, tmp_path):
        config, report = config_and_report
        rows = report_rows(config, report)
        # 5 activity recalls + overall, then the same per evaluation unit
        assert len(rows) == 6 + report.n_units * 6
        assert all(len(r) == len(RESULTS_HEADER) for r in rows)
        path = tmp_path / "r.csv"
        write_results_csv(rows, path)
        back = read_results_csv(path)
        assert len(back) == len(rows)
        assert back[0]["protocol"] == "impersonal"
        assert back[0]["metric"] == "recall"
        overall = [r for r in back if r["metric"] == "accuracy"]
        assert float(overall[0]["value"]) == report.overall_accuracy

    def test_per_unit_rows_tagged_with_unit(self, config_and_report, tmp_path):
        config, report = config_and_report
        path = tmp_path / "r.csv"
        write_results_csv(report_rows(config, report), path)
        units = {
            r["metric"].split(":", 1)[1]
            for r in read_results_csv(path) if ":" in r["metric"]
        }
        assert units == set(report.unit_ids)

    def test_bad_header_raises(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(MalformedRow):
            read_results_csv(path)


class TestMarkdown:
    def test_contains_all_activities_and_overall(self, config_and_report):
        config, report = config_and_report
        md = report_markdown(config, report)
        for name in ("walking", "upstairs", "downstairs", "running", "jogging"):
            assert f"| {name} |" in md
        assert "overall" in md
        assert "98% CI" in md
        assert f"{report.overall_accuracy:.4f}" in md


class TestSweepSvg:
    def test_well_formed_xml_with_polylines(self):
        series = {
            "dtree": {25: 0.9, 150: 0.95, 300: 0.93},
            "knn": {25: 0.7, 150: 0.65, 300: 0.6},
        }
        svg = sweep_svg(series)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        ns = {"s": "http://www.w3.org/2000/svg"}
        assert len(root.findall("s:polyline", ns)) == 2
        texts = [t.text for t in root.findall("s:text", ns)]
        assert "samples per window" in texts
        assert "overall accuracy" in texts

    def test_single_point_degenerates_to_marker(self):
        svg = sweep_svg({"knn": {75: 0.8}})
        root = ET.fromstring(svg)
        ns = {"s": "http://www.w3.org/2000/svg"}
        assert len(root.findall("s:polyline", ns)) == 0
        assert len(root.findall("s:circle", ns)) == 1


class TestManifest:
    def test_json_fields(self):
        m = RunManifest(command="eval", config={"window": 75}, seed=7,
                        input_digests={"a.csv": "ff"}, duration_s=1.5)
        data = json.loads(m.to_json())
        assert data["command"] == "eval"
        assert data["seed"] == 7
        assert data["config"] == {"window": 75}
        assert "toolkit_version" in data

    def test_sha256_file(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"hello")
        assert sha256_file(path) == hashlib.sha256(b"hello").hexdigest()
