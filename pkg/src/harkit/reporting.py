"""Staged-artifact file formats: feature CSV, results CSV, markdown, SVG charts."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MalformedRow
from .evaluation import EvalConfig, EvalReport
from .features import Bank, BANK_WIDTH, FeatureVector
from .ingest import ACTIVITY_CSV_NAMES, Activity, CSV_NAME_TO_ACTIVITY

RESULTS_HEADER = [
    "protocol", "classifier", "bank", "treatment", "window",
    "activity", "metric", "value", "ci_halfwidth", "n_units",
]


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_features_csv(vectors: list[FeatureVector], path: str | Path) -> None:
    if not vectors:
        raise ValueError("no feature vectors to write")
    bank = vectors[0].bank
    width = BANK_WIDTH[bank]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["subject_id", "activity", "bank"] + [f"f{i}" for i in range(width)])
    for fv in vectors:
        if fv.bank is not bank:
            raise ValueError("mixed banks in one feature file")
        writer.writerow(
            [fv.subject_id, ACTIVITY_CSV_NAMES[fv.activity], bank.value]
            + [repr(float(v)) for v in fv.values]
        )
    atomic_write_text(path, buf.getvalue())


def read_features_csv(path: str | Path) -> list[FeatureVector]:
    vectors = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["subject_id", "activity", "bank"]:
            raise MalformedRow(1, "bad feature CSV header")
        width = len(header) - 3
        for line_no, row in enumerate(reader, start=2):
            if len(row) != width + 3:
                raise MalformedRow(line_no, f"expected {width + 3} fields, got {len(row)}")
            try:
                bank = Bank(row[2])
                activity = CSV_NAME_TO_ACTIVITY[row[1]]
                values = np.array([float(v) for v in row[3:]])
            except (ValueError, KeyError):
                raise MalformedRow(line_no, "unparseable feature row")
            vectors.append(FeatureVector(bank, values, activity, row[0]))
    return vectors


def is_features_csv(path: str | Path) -> bool:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        first = fh.readline()
    return first.startswith("subject_id,activity,bank")


def report_rows(config: EvalConfig, report: EvalReport) -> list[list[str]]:
    """One row per (activity, recall) plus the overall-accuracy row."""
    base = [
        config.protocol.value,
        config.model_spec.kind.value,
        config.bank.value,
        config.treatment.name,
        str(config.samples_per_window),
    ]
    rows = []
    for act in Activity:
        rows.append(
            base
            + [ACTIVITY_CSV_NAMES[act], "recall",
               repr(float(report.per_activity_recall[act])), "", str(report.n_units)]
        )
    rows.append(
        base
        + ["overall", "accuracy", repr(float(report.overall_accuracy)),
           repr(float(report.ci_halfwidth)), str(report.n_units)]
    )
    # per-unit rows enable paired t-tests across treatments downstream
    for ui, unit in enumerate(report.unit_ids):
        for act in Activity:
            rows.append(
                base
                + [ACTIVITY_CSV_NAMES[act], f"recall:{unit}",
                   repr(float(report.unit_recall(ui, act))), "", str(report.n_units)]
            )
        rows.append(
            base
            + ["overall", f"accuracy:{unit}",
               repr(float(report.per_unit_accuracies[ui])), "", str(report.n_units)]
        )
    return rows


def write_results_csv(rows: list[list[str]], path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(RESULTS_HEADER)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def read_results_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise MalformedRow(1, f"bad results header {header!r}")
        return [dict(zip(RESULTS_HEADER, row)) for row in reader]


def report_markdown(config: EvalConfig, report: EvalReport) -> str:
    """Activity x metric table mirroring the per-activity result layout."""
    lines = [
        f"### {config.model_spec.kind.value} / bank {config.bank.value} / "
        f"window {config.samples_per_window} / {config.treatment.name} / "
        f"{config.protocol.value}",
        "",
        "| Activity | Recall |",
        "|---|---|",
    ]
    for act in Activity:
        lines.append(f"| {ACTIVITY_CSV_NAMES[act]} | {report.per_activity_recall[act]:.4f} |")
    lines.append(
        f"| **overall** | **{report.overall_accuracy:.4f} ± {report.ci_halfwidth:.4f} "
        f"(98% CI, n={report.n_units})** |"
    )
    return "\n".join(lines) + "\n"


def sweep_svg(
    series: dict[str, dict[int, float]],
    title: str = "Accuracy vs samples per window",
) -> str:
    """Self-contained SVG line chart; one polyline per series."""
    width, height = 720, 440
    ml, mr, mt, mb = 60, 160, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    all_sizes = sorted({s for pts in series.values() for s in pts})
    x0, x1 = min(all_sizes), max(all_sizes)
    xspan = max(x1 - x0, 1)

    def sx(v):
        return ml + (v - x0) / xspan * pw

    def sy(v):
        return mt + (1.0 - v) * ph

    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle" font-size="12">samples per window</text>',
        f'<text x="16" y="{mt + ph / 2}" font-size="12" transform="rotate(-90 16 {mt + ph / 2})" text-anchor="middle">overall accuracy</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<text x="{ml - 8}" y="{sy(frac) + 4}" text-anchor="end" font-size="10">{frac:.2f}</text>'
        )
    for s in all_sizes:
        parts.append(
            f'<text x="{sx(s)}" y="{mt + ph + 16}" text-anchor="middle" font-size="10">{s}</text>'
        )
    for i, (name, pts) in enumerate(sorted(series.items())):
        color = palette[i % len(palette)]
        coords = " ".join(f"{sx(s):.1f},{sy(v):.1f}" for s, v in sorted(pts.items()))
        if len(pts) > 1:
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for s, v in sorted(pts.items()):
            parts.append(f'<circle cx="{sx(s):.1f}" cy="{sy(v):.1f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{ml + pw + 10}" y="{mt + 16 * i + 10}" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    input_digests: dict[str, str]
    duration_s: float
    toolkit_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Stopwatch:
    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.t0
